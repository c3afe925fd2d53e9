// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "semfed/embednet.h"
#include "semfed/errors.h"
#include "support.h"

using namespace semfed;

namespace {

using Vec = std::vector<double>;

TierConfig tiny(Tier tier, bool clusters = true) {
    TierConfig c;
    c.tier = tier;
    c.vocab_size = 20;
    c.embed_dim = 8;
    c.hidden_dim = 6;
    c.num_clusters = 3;
    c.feature_dim = 8;
    c.num_classes = 3;
    c.attention_dim = 5;
    c.semantic_clusters = clusters;
    return c;
}

TierModel random_model(const TierConfig& c, Rng& rng) {
    InitOptions init;
    init.token_range = 0.8;
    init.embedding_range = 0.5;
    auto m = make_tier_model(c, rng, init);
    // non-zero biases so the bias paths are exercised
    for (auto& b : m.blocks())
        if (b.name.ends_with(".b"))
            for (double& v : b.value->data()) v = rng.uniform(-0.3, 0.3);
    return m;
}

// distinct=true draws tokens without replacement, so no bigram repeats and the
// max-pool has no exact ties (where it is not differentiable)
std::vector<Document> random_docs(Rng& rng, int n, int vocab, int classes, int max_len = 7, bool distinct = false) {
    std::vector<Document> docs;
    for (int i = 0; i < n; ++i) {
        Document d;
        d.id = static_cast<std::uint32_t>(i);
        const int len = rng.uniform_int(1, max_len);
        std::vector<int> pool(static_cast<std::size_t>(vocab));
        std::iota(pool.begin(), pool.end(), 0);
        rng.shuffle(pool);
        for (int t = 0; t < len; ++t)
            d.tokens.push_back(distinct ? pool[static_cast<std::size_t>(t)] : rng.uniform_int(0, vocab - 1));
        d.label = rng.uniform_int(0, classes - 1);
        docs.push_back(d);
    }
    return docs;
}

// --- straight-line oracle ---------------------------------------------------

Vec row_of(const Matrix& m, std::size_t r) { return Vec(m.row(r).begin(), m.row(r).end()); }

Vec mat_vec(const Matrix& w, const Vec& x) {
    Vec y(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) y[i] += w(i, j) * x[j];
    return y;
}

Vec tanh_layer(const Matrix& w, const Matrix& b, const Vec& x) {
    Vec y = mat_vec(w, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i] + b(0, i));
    return y;
}

Vec oracle_embed_one(int tok, const EmbeddingParams& p, bool clusters) {
    Vec w = row_of(p.token_table, static_cast<std::size_t>(tok));
    if (!clusters) return w;
    const std::size_t c = p.cluster_queries.rows();
    Vec s(c);
    double mx = -1e300;
    for (std::size_t k = 0; k < c; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) acc += w[j] * p.cluster_queries(k, j);
        s[k] = acc;
        mx = std::max(mx, acc);
    }
    double z = 0.0;
    for (double& v : s) z += (v = std::exp(v - mx));
    Vec e = w;
    for (std::size_t k = 0; k < c; ++k)
        for (std::size_t j = 0; j < w.size(); ++j) e[j] += s[k] / z * p.cluster_embeddings(k, j);
    return e;
}

Vec oracle_features(const std::vector<int>& tokens, const TierModel& m) {
    std::vector<Vec> e;
    for (int t : tokens) e.push_back(oracle_embed_one(t, m.embedding, m.config.semantic_clusters));
    const std::size_t n = e.size(), d = e[0].size();
    Vec mean(d, 0.0);
    for (const auto& v : e)
        for (std::size_t j = 0; j < d; ++j) mean[j] += v[j] / static_cast<double>(n);
    const auto& x = m.extractor;
    switch (m.config.tier) {
        case Tier::Mobile:
            return tanh_layer(x[2], x[3], tanh_layer(x[0], x[1], mean));
        case Tier::Laptop: {
            const std::size_t h = x[0].rows();
            Vec mx(h, -1e300);
            const std::size_t pairs = std::max<std::size_t>(1, n - 1);
            for (std::size_t t = 0; t < pairs; ++t) {
                Vec pair = e[t];
                if (t + 1 < n) {
                    pair.insert(pair.end(), e[t + 1].begin(), e[t + 1].end());
                } else {
                    pair.resize(2 * d, 0.0);
                }
                const Vec c = tanh_layer(x[0], x[1], pair);
                for (std::size_t j = 0; j < h; ++j) mx[j] = std::max(mx[j], c[j]);
            }
            Vec cat = mean;
            cat.insert(cat.end(), mx.begin(), mx.end());
            return tanh_layer(x[2], x[3], cat);
        }
        case Tier::Desktop: {
            const std::size_t a = x[0].rows();
            std::vector<Vec> q, k;
            for (const auto& v : e) {
                q.push_back(mat_vec(x[0], v));
                k.push_back(mat_vec(x[1], v));
            }
            Vec colmean(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                Vec s(n);
                double mx = -1e300;
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t r = 0; r < a; ++r) acc += q[i][r] * k[j][r];
                    s[j] = acc / std::sqrt(static_cast<double>(a));
                    mx = std::max(mx, s[j]);
                }
                double z = 0.0;
                for (double& v : s) z += (v = std::exp(v - mx));
                for (std::size_t j = 0; j < n; ++j) colmean[j] += s[j] / z / static_cast<double>(n);
            }
            Vec pooled(d, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t r = 0; r < d; ++r) pooled[r] += colmean[j] * e[j][r];
            return tanh_layer(x[3], x[4], mat_vec(x[2], pooled));
        }
    }
    return {};
}

double oracle_loss(const TierModel& m, const std::vector<Document>& batch) {
    double total = 0.0;
    for (const auto& doc : batch) {
        const Vec f = oracle_features(doc.tokens, m);
        Vec logits = mat_vec(m.head_w, f);
        double mx = -1e300;
        for (std::size_t i = 0; i < logits.size(); ++i) mx = std::max(mx, logits[i] += m.head_b(0, i));
        double z = 0.0;
        for (double v : logits) z += std::exp(v - mx);
        total += -(logits[static_cast<std::size_t>(doc.label)] - mx - std::log(z));
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("embedding with a zero cluster table is a plain lookup") {
    Rng rng(1);
    auto m = random_model(tiny(Tier::Mobile), rng);
    m.embedding.cluster_embeddings.fill(0.0);
    const std::vector<int> toks{3, 7, 3, 19};
    const auto out = embed(toks, m.embedding);
    for (std::size_t i = 0; i < toks.size(); ++i)
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(out.vectors(i, j) == m.embedding.token_table(static_cast<std::size_t>(toks[i]), j));
}

TEST_CASE("a single cluster receives every token") {
    Rng rng(2);
    auto c = tiny(Tier::Mobile);
    c.num_clusters = 1;
    const auto m = random_model(c, rng);
    const std::vector<int> toks{0, 5, 11};
    const auto out = embed(toks, m.embedding);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        CHECK(out.assignments(i, 0) == doctest::Approx(1.0).epsilon(1e-15));
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(out.vectors(i, j) ==
                  doctest::Approx(m.embedding.token_table(static_cast<std::size_t>(toks[i]), j) +
                                  m.embedding.cluster_embeddings(0, j)));
    }
}

TEST_CASE("embedding matches the oracle and assignments are a distribution") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_model(tiny(Tier::Laptop), rng);
        std::vector<int> toks;
        for (int i = 0; i < 10; ++i) toks.push_back(rng.uniform_int(0, 19));
        const auto out = embed(toks, m.embedding);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                CHECK(out.assignments(i, c) > 0.0);
                s += out.assignments(i, c);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
            const auto ref = oracle_embed_one(toks[i], m.embedding, true);
            for (std::size_t j = 0; j < 8; ++j) CHECK(out.vectors(i, j) == doctest::Approx(ref[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("out-of-vocabulary tokens are rejected") {
    Rng rng(4);
    const auto m = random_model(tiny(Tier::Mobile), rng);
    CHECK_THROWS_AS(embed(std::vector<int>{20}, m.embedding), DomainError);
    CHECK_THROWS_AS(embed(std::vector<int>{-1}, m.embedding), DomainError);
}

TEST_CASE("features match the oracle for every tier") {
    Rng rng(5);
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop})
        for (bool clusters : {true, false}) {
            const auto m = random_model(tiny(tier, clusters), rng);
            for (const auto& doc : random_docs(rng, 10, 20, 3)) {
                const auto f = extract_features(doc, m);
                const auto ref = oracle_features(doc.tokens, m);
                REQUIRE(f.size() == 8);
                for (std::size_t j = 0; j < f.size(); ++j) {
                    CHECK(std::isfinite(f[j]));
                    CHECK(f[j] == doctest::Approx(ref[j]).epsilon(1e-12));
                }
            }
        }
}

TEST_CASE("mobile features ignore token order; laptop features do not") {
    Rng rng(6);
    const auto mobile = random_model(tiny(Tier::Mobile), rng);
    const auto laptop = random_model(tiny(Tier::Laptop), rng);
    std::vector<int> toks{1, 4, 9, 13, 2, 17};
    std::vector<int> perm{17, 9, 1, 2, 13, 4};
    const auto a = extract_features(toks, mobile);
    const auto b = extract_features(perm, mobile);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-12));
    const auto la = extract_features(toks, laptop);
    const auto lb = extract_features(perm, laptop);
    double diff = 0.0;
    for (std::size_t j = 0; j < la.size(); ++j) diff = std::max(diff, std::abs(la[j] - lb[j]));
    CHECK(diff > 1e-6);
}

TEST_CASE("single-token mobile feature is the projection of that token") {
    Rng rng(7);
    const auto m = random_model(tiny(Tier::Mobile), rng);
    const auto e = oracle_embed_one(12, m.embedding, true);
    const auto ref = tanh_layer(m.extractor[2], m.extractor[3], tanh_layer(m.extractor[0], m.extractor[1], e));
    const auto f = extract_features(std::vector<int>{12}, m);
    for (std::size_t j = 0; j < f.size(); ++j) CHECK(f[j] == doctest::Approx(ref[j]).epsilon(1e-12));
}

TEST_CASE("features are bitwise stable and empty documents are rejected") {
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        Rng a(8), b(8);
        const auto ma = random_model(tiny(tier), a);
        const auto mb = random_model(tiny(tier), b);
        const std::vector<int> toks{3, 1, 4, 1, 5};
        CHECK(extract_features(toks, ma) == extract_features(toks, mb));
        CHECK_THROWS_AS(extract_features(std::vector<int>{}, ma), DomainError);
    }
}

TEST_CASE("loss examples") {
    Rng rng(9);
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        auto m = random_model(tiny(tier), rng);
        const auto docs = random_docs(rng, 6, 20, 3);
        m.head_w.fill(0.0);
        m.head_b.fill(0.25);
        const auto uniform = forward_loss(m, docs);
        CHECK(uniform.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            double s = 0.0;
            for (std::size_t c = 0; c < 3; ++c) s += uniform.probabilities(i, c);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }
        std::vector<Document> same_label = docs;
        for (auto& d : same_label) d.label = 1;
        m.head_b.fill(0.0);
        m.head_b(0, 1) = 60.0;
        CHECK(forward_loss(m, same_label).loss < 1e-20);
    }
}

TEST_CASE("loss matches the oracle") {
    Rng rng(10);
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        const auto m = random_model(tiny(tier), rng);
        const auto docs = random_docs(rng, 9, 20, 3);
        CHECK(forward_loss(m, docs).loss == doctest::Approx(oracle_loss(m, docs)).epsilon(1e-12));
    }
}

TEST_CASE("gradients match central differences for every block") {
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop})
        for (bool clusters : {true, false})
            for (int seed = 0; seed < 20; ++seed) {
                Rng rng(1000 + static_cast<std::uint64_t>(seed));
                auto m = random_model(tiny(tier, clusters), rng);
                const auto docs = random_docs(rng, 4, 20, 3, 7, true);
                const auto grad = backward(m, docs);
                auto loss = [&] { return forward_loss(m, docs).loss; };
                testing::FdResult fd;
                auto blocks = m.blocks();
                const auto gblocks = grad.blocks();
                REQUIRE(blocks.size() == gblocks.size());
                for (std::size_t i = 0; i < blocks.size(); ++i) {
                    CHECK(blocks[i].name == gblocks[i].name);
                    if (!clusters && (blocks[i].name == "embedding.clusters" || blocks[i].name == "embedding.queries")) {
                        for (double g : gblocks[i].value->data()) CHECK(g == 0.0);
                        continue;
                    }
                    testing::check_block(blocks[i].name, *blocks[i].value, *gblocks[i].value, loss, fd);
                }
                CAPTURE(tier_name(tier));
                CAPTURE(seed);
                CAPTURE(fd.worst_where);
                CHECK(fd.worst_rel < 1e-4);
            }
}

TEST_CASE("head-bias gradient with a zero head is mean(softmax - onehot)") {
    Rng rng(11);
    auto m = random_model(tiny(Tier::Laptop), rng);
    m.head_w.fill(0.0);
    const auto docs = random_docs(rng, 7, 20, 3);
    const auto fwd = forward_loss(m, docs);
    const auto g = backward(m, docs);
    for (std::size_t c = 0; c < 3; ++c) {
        double expected = 0.0;
        for (std::size_t i = 0; i < docs.size(); ++i)
            expected += fwd.probabilities(i, c) - (docs[i].label == static_cast<int>(c) ? 1.0 : 0.0);
        expected /= static_cast<double>(docs.size());
        CHECK(g.head_b(0, c) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("duplicating a sample leaves the gradient unchanged") {
    Rng rng(12);
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        const auto m = random_model(tiny(tier), rng);
        const auto docs = random_docs(rng, 1, 20, 3);
        const std::vector<Document> twice{docs[0], docs[0]};
        auto g1 = backward(m, docs);
        auto g2 = backward(m, twice);
        const auto b1 = g1.blocks();
        const auto b2 = g2.blocks();
        for (std::size_t i = 0; i < b1.size(); ++i)
            for (std::size_t j = 0; j < b1[i].value->size(); ++j)
                CHECK(b2[i].value->data()[j] == doctest::Approx(b1[i].value->data()[j]).epsilon(1e-12));
    }
}

TEST_CASE("a small SGD step does not raise the batch loss") {
    Rng rng(13);
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop})
        for (int trial = 0; trial < 5; ++trial) {
            auto m = random_model(tiny(tier), rng);
            const auto docs = random_docs(rng, 8, 20, 3);
            const double before = forward_loss(m, docs).loss;
            auto g = backward(m, docs);
            auto blocks = m.blocks();
            const auto gb = g.blocks();
            for (std::size_t i = 0; i < blocks.size(); ++i) axpy(-1e-4, gb[i].value->data(), blocks[i].value->data());
            CHECK(forward_loss(m, docs).loss <= before);
        }
}

TEST_CASE("tier parameter counts are strictly ordered") {
    Rng rng(14);
    for (int vocab : {500, 12000}) {
        const auto mobile = make_tier_model(default_tier_config(Tier::Mobile, vocab, 5), rng);
        const auto laptop = make_tier_model(default_tier_config(Tier::Laptop, vocab, 5), rng);
        const auto desktop = make_tier_model(default_tier_config(Tier::Desktop, vocab, 5), rng);
        CHECK(mobile.param_count() < laptop.param_count());
        CHECK(laptop.param_count() < desktop.param_count());
    }
    const auto c = default_tier_config(Tier::Laptop, 100, 5);
    CHECK(c.embed_dim == 100);
    CHECK(c.hidden_dim == 64);
    CHECK(c.num_clusters == 8);
    CHECK(c.feature_dim == 128);
}

TEST_CASE("zero learning rate leaves the model unchanged") {
    Rng rng(15);
    auto m = random_model(tiny(Tier::Desktop), rng);
    const auto before = m;
    const auto docs = random_docs(rng, 20, 20, 3);
    ResourceProfile dev;
    dev.compute_units = 2.0;
    TrainOptions opt;
    opt.learning_rate = 0.0;
    opt.epochs = 2;
    const auto stats = train_local(m, docs, opt, rng, dev, 1e-6);
    CHECK(m.extractor == before.extractor);
    CHECK(m.embedding.token_table == before.embedding.token_table);
    CHECK(m.head_w == before.head_w);
    CHECK(forward_loss(m, docs).loss == forward_loss(before, docs).loss);
    CHECK(stats.epochs == 2);
    CHECK(stats.compute_seconds ==
          doctest::Approx(estimate_compute_time(40.0, static_cast<double>(m.param_count()), dev, 1e-6)));
}

TEST_CASE("training fits a separable toy task") {
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        Rng rng(16);
        auto c = tiny(tier);
        c.vocab_size = 30;
        auto m = make_tier_model(c, rng);
        // class k draws its tokens from {10k, ..., 10k + 9}
        std::vector<Document> docs;
        for (int i = 0; i < 90; ++i) {
            Document d;
            d.label = i % 3;
            for (int t = rng.uniform_int(3, 8); t > 0; --t) d.tokens.push_back(10 * d.label + rng.uniform_int(0, 9));
            docs.push_back(d);
        }
        ResourceProfile dev;
        dev.compute_units = 1.0;
        TrainOptions opt;
        opt.epochs = 50;
        opt.batch_size = 8;
        const auto stats = train_local(m, docs, opt, rng, dev, 1e-9);
        CAPTURE(tier_name(tier));
        CHECK(accuracy(m, docs) >= 0.95);
        CHECK(std::isfinite(stats.final_loss));
        CHECK(stats.accuracy >= 0.0);
        CHECK(stats.accuracy <= 1.0);
    }
}

TEST_CASE("training rejects an empty dataset") {
    Rng rng(17);
    auto m = random_model(tiny(Tier::Mobile), rng);
    CHECK_THROWS_AS(train_local(m, std::span<const Document>{}, TrainOptions{}, rng, ResourceProfile{}, 1e-9),
                    DomainError);
}

TEST_CASE("model records round trip") {
    testing::TempDir dir("embednet_io");
    for (Tier tier : {Tier::Mobile, Tier::Laptop, Tier::Desktop}) {
        Rng rng(18);
        const auto m = random_model(tiny(tier, tier != Tier::Laptop), rng);
        const auto path = dir.path() / (std::string(tier_name(tier)) + ".bin");
        save_model(path, m);
        const auto back = load_model(path);
        CHECK(back.config.tier == tier);
        CHECK(back.config.semantic_clusters == (tier != Tier::Laptop));
        CHECK(back.embedding.token_table == m.embedding.token_table);
        CHECK(back.extractor == m.extractor);
        CHECK(back.head_b == m.head_b);
        const std::vector<int> toks{1, 2, 3};
        CHECK(extract_features(toks, back) == extract_features(toks, m));
    }
    CHECK_THROWS_AS(load_model(dir.path() / "missing.bin"), IoError);
}
