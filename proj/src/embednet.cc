// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/embednet.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "semfed/errors.h"
#include "semfed/param_record.h"

namespace semfed {

void TierConfig::validate() const {
    if (vocab_size <= 0 || embed_dim <= 0 || hidden_dim <= 0 || num_clusters <= 0 || feature_dim <= 0 ||
        num_classes <= 0 || attention_dim <= 0)
        throw ConfigError(fmt::format("{} tier: all dimensions must be positive", tier_name(tier)));
}

TierConfig default_tier_config(Tier tier, int vocab_size, int num_classes, int feature_dim) {
    TierConfig c;
    c.tier = tier;
    c.vocab_size = vocab_size;
    c.num_classes = num_classes;
    c.feature_dim = feature_dim;
    switch (tier) {
        case Tier::Mobile:
            c.embed_dim = 64, c.hidden_dim = 32, c.num_clusters = 5;
            break;
        case Tier::Laptop:
            c.embed_dim = 100, c.hidden_dim = 64, c.num_clusters = 8;
            break;
        case Tier::Desktop:
            c.embed_dim = 128, c.hidden_dim = 128, c.num_clusters = 10;
            break;
    }
    return c;
}

std::vector<std::string> extractor_block_names(Tier tier) {
    switch (tier) {
        case Tier::Mobile: return {"dense1.w", "dense1.b", "dense2.w", "dense2.b"};
        case Tier::Laptop: return {"bigram.w", "bigram.b", "proj.w", "proj.b"};
        case Tier::Desktop: return {"attn.q", "attn.k", "attn.v", "proj.w", "proj.b"};
    }
    return {};
}

std::vector<ParamBlock> TierModel::blocks() {
    std::vector<ParamBlock> out{{"embedding.tokens", &embedding.token_table},
                                {"embedding.clusters", &embedding.cluster_embeddings},
                                {"embedding.queries", &embedding.cluster_queries}};
    const auto names = extractor_block_names(config.tier);
    for (std::size_t i = 0; i < extractor.size(); ++i) out.push_back({names.at(i), &extractor[i]});
    out.push_back({"head.w", &head_w});
    out.push_back({"head.b", &head_b});
    return out;
}

std::vector<ConstParamBlock> TierModel::blocks() const {
    std::vector<ConstParamBlock> out;
    for (auto& b : const_cast<TierModel*>(this)->blocks()) out.push_back({b.name, b.value});
    return out;
}

std::size_t TierModel::param_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks()) {
        if (!config.semantic_clusters && b.name.rfind("embedding.", 0) == 0 && b.name != "embedding.tokens")
            continue;
        n += b.value->size();
    }
    return n;
}

TierModel zeros_like(const TierConfig& config) {
    config.validate();
    const auto v = static_cast<std::size_t>(config.vocab_size);
    const auto d = static_cast<std::size_t>(config.embed_dim);
    const auto h = static_cast<std::size_t>(config.hidden_dim);
    const auto c = static_cast<std::size_t>(config.num_clusters);
    const auto f = static_cast<std::size_t>(config.feature_dim);
    const auto l = static_cast<std::size_t>(config.num_classes);
    const auto a = static_cast<std::size_t>(config.attention_dim);

    TierModel m;
    m.config = config;
    m.embedding.token_table = Matrix(v, d);
    m.embedding.cluster_embeddings = Matrix(c, d);
    m.embedding.cluster_queries = Matrix(c, d);
    switch (config.tier) {
        case Tier::Mobile:
            m.extractor = {Matrix(h, d), Matrix(1, h), Matrix(f, h), Matrix(1, f)};
            break;
        case Tier::Laptop:
            m.extractor = {Matrix(h, 2 * d), Matrix(1, h), Matrix(f, d + h), Matrix(1, f)};
            break;
        case Tier::Desktop:
            m.extractor = {Matrix(a, d), Matrix(a, d), Matrix(h, d), Matrix(f, h), Matrix(1, f)};
            break;
    }
    m.head_w = Matrix(l, f);
    m.head_b = Matrix(1, l);
    return m;
}

TierModel make_tier_model(const TierConfig& config, Rng& rng, const InitOptions& init) {
    TierModel m = zeros_like(config);
    auto uniform_fill = [&](Matrix& x, double r) {
        for (double& v : x.data()) v = rng.uniform(-r, r);
    };
    for (auto& b : m.blocks()) {
        Matrix& x = *b.value;
        if (x.rows() == 1 && b.name.ends_with(".b")) continue;  // biases start at zero
        if (b.name.rfind("embedding.", 0) == 0) {
            if (b.name == "embedding.tokens") {
                uniform_fill(x, init.token_range);
            } else if (config.semantic_clusters) {
                uniform_fill(x, init.embedding_range);
            }
        } else if (init.glorot_dense) {
            const double scale = b.name == "bigram.w" ? init.bigram_scale : 1.0;
            uniform_fill(x, scale * std::sqrt(6.0 / static_cast<double>(x.rows() + x.cols())));
        } else {
            uniform_fill(x, init.embedding_range);
        }
    }
    return m;
}

namespace {

void embed_into(std::span<const int> tokens, const EmbeddingParams& p, bool clusters, Embedded& out) {
    const std::size_t d = p.token_table.cols();
    const std::size_t c = p.cluster_embeddings.rows();
    const auto vocab = static_cast<int>(p.token_table.rows());
    out.vectors = Matrix(tokens.size(), d);
    out.assignments = clusters ? Matrix(tokens.size(), c) : Matrix();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const int tok = tokens[t];
        if (tok < 0 || tok >= vocab)
            throw DomainError(fmt::format("embed: token id {} outside vocabulary of size {}", tok, vocab));
        const auto w = p.token_table.row(tok);
        auto e = out.vectors.row(t);
        std::copy(w.begin(), w.end(), e.begin());
        if (!clusters) continue;
        auto s = out.assignments.row(t);
        for (std::size_t k = 0; k < c; ++k) s[k] = dot(w, p.cluster_queries.row(k));
        softmax_inplace(s);
        for (std::size_t k = 0; k < c; ++k) axpy(s[k], p.cluster_embeddings.row(k), e);
    }
}

struct Trace {
    Embedded emb;
    std::vector<double> pooled;   // mobile/laptop: mean of e; desktop: attention-weighted e
    std::vector<double> hidden;   // mobile: dense1 output; desktop: value projection
    std::vector<double> concat;   // laptop: [mean ; max]
    std::vector<double> feature;
    Matrix conv;                  // laptop: bigram activations (pairs x h)
    std::vector<int> argmax;      // laptop: max-pool source per channel
    Matrix q, k, attn;            // desktop
    std::vector<double> col_mean; // desktop: mean over queries of attention rows
    std::vector<double> logits;   // head probabilities after softmax
};

void dense_tanh(const Matrix& w, const Matrix& b, std::span<const double> x, std::vector<double>& y) {
    y.assign(w.rows(), 0.0);
    matvec(w, x, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i] + b(0, i));
}

void mean_rows(const Matrix& x, std::vector<double>& out) {
    out.assign(x.cols(), 0.0);
    for (std::size_t t = 0; t < x.rows(); ++t) axpy(1.0, x.row(t), out);
    const double inv = 1.0 / static_cast<double>(x.rows());
    for (auto& v : out) v *= inv;
}

void forward_doc(const TierModel& m, std::span<const int> tokens, Trace& tr) {
    if (tokens.empty()) throw DomainError("extract_features: empty document");
    embed_into(tokens, m.embedding, m.config.semantic_clusters, tr.emb);
    const Matrix& e = tr.emb.vectors;
    const std::size_t n = e.rows();
    const std::size_t d = e.cols();
    const auto& x = m.extractor;

    switch (m.config.tier) {
        case Tier::Mobile: {
            mean_rows(e, tr.pooled);
            dense_tanh(x[0], x[1], tr.pooled, tr.hidden);
            dense_tanh(x[2], x[3], tr.hidden, tr.feature);
            break;
        }
        case Tier::Laptop: {
            const std::size_t h = x[0].rows();
            mean_rows(e, tr.pooled);
            const std::size_t pairs = n > 1 ? n - 1 : 1;
            tr.conv = Matrix(pairs, h);
            tr.argmax.assign(h, 0);
            std::vector<double> pair(2 * d, 0.0);
            for (std::size_t t = 0; t < pairs; ++t) {
                std::copy(e.row(t).begin(), e.row(t).end(), pair.begin());
                if (t + 1 < n) {
                    std::copy(e.row(t + 1).begin(), e.row(t + 1).end(), pair.begin() + d);
                } else {
                    std::fill(pair.begin() + d, pair.end(), 0.0);
                }
                auto out = tr.conv.row(t);
                matvec(x[0], pair, out);
                for (std::size_t j = 0; j < h; ++j) out[j] = std::tanh(out[j] + x[1](0, j));
            }
            tr.concat.assign(d + h, 0.0);
            std::copy(tr.pooled.begin(), tr.pooled.end(), tr.concat.begin());
            for (std::size_t j = 0; j < h; ++j) {
                std::size_t best = 0;
                for (std::size_t t = 1; t < pairs; ++t)
                    if (tr.conv(t, j) > tr.conv(best, j)) best = t;
                tr.argmax[j] = static_cast<int>(best);
                tr.concat[d + j] = tr.conv(best, j);
            }
            dense_tanh(x[2], x[3], tr.concat, tr.feature);
            break;
        }
        case Tier::Desktop: {
            const Matrix& wq = x[0];
            const Matrix& wk = x[1];
            const std::size_t a = wq.rows();
            tr.q = Matrix(n, a);
            tr.k = Matrix(n, a);
            for (std::size_t t = 0; t < n; ++t) {
                matvec(wq, e.row(t), tr.q.row(t));
                matvec(wk, e.row(t), tr.k.row(t));
            }
            const double scale = 1.0 / std::sqrt(static_cast<double>(a));
            tr.attn = Matrix(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                auto row = tr.attn.row(i);
                for (std::size_t j = 0; j < n; ++j) row[j] = scale * dot(tr.q.row(i), tr.k.row(j));
                softmax_inplace(row);
            }
            mean_rows(tr.attn, tr.col_mean);
            tr.pooled.assign(d, 0.0);
            for (std::size_t j = 0; j < n; ++j) axpy(tr.col_mean[j], e.row(j), tr.pooled);
            tr.hidden.assign(x[2].rows(), 0.0);
            matvec(x[2], tr.pooled, tr.hidden);
            dense_tanh(x[3], x[4], tr.hidden, tr.feature);
            break;
        }
    }
}

/// Back-propagates d(loss)/d(feature) through the extractor into `grad`,
/// writing d(loss)/d(e) into `de`.
void backward_extractor(const TierModel& m, const Trace& tr, std::span<const double> dfeat, TierModel& grad,
                        Matrix& de) {
    const Matrix& e = tr.emb.vectors;
    const std::size_t n = e.rows();
    const std::size_t d = e.cols();
    const auto& x = m.extractor;
    auto& gx = grad.extractor;
    de = Matrix(n, d);

    // feature = tanh(W z + b): returns dz
    auto dense_back = [](const Matrix& w, std::span<const double> z, std::span<const double> y,
                         std::span<const double> dy, Matrix& gw, Matrix& gb) {
        std::vector<double> pre(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) pre[i] = dy[i] * (1.0 - y[i] * y[i]);
        add_outer(gw, 1.0, pre, z);
        axpy(1.0, pre, gb.row(0));
        std::vector<double> dz(w.cols());
        matvec_transposed(w, pre, dz);
        return dz;
    };

    switch (m.config.tier) {
        case Tier::Mobile: {
            const auto dh = dense_back(x[2], tr.hidden, tr.feature, dfeat, gx[2], gx[3]);
            const auto du = dense_back(x[0], tr.pooled, tr.hidden, dh, gx[0], gx[1]);
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t t = 0; t < n; ++t) axpy(inv, du, de.row(t));
            break;
        }
        case Tier::Laptop: {
            const std::size_t h = x[0].rows();
            const auto dz = dense_back(x[2], tr.concat, tr.feature, dfeat, gx[2], gx[3]);
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t t = 0; t < n; ++t) axpy(inv, std::span<const double>(dz).first(d), de.row(t));
            std::vector<double> pair(2 * d);
            for (std::size_t j = 0; j < h; ++j) {
                const double dm = dz[d + j];
                if (dm == 0.0) continue;
                const auto t = static_cast<std::size_t>(tr.argmax[j]);
                const double c = tr.conv(t, j);
                const double dpre = dm * (1.0 - c * c);
                std::fill(pair.begin(), pair.end(), 0.0);
                std::copy(e.row(t).begin(), e.row(t).end(), pair.begin());
                if (t + 1 < n) std::copy(e.row(t + 1).begin(), e.row(t + 1).end(), pair.begin() + d);
                axpy(dpre, pair, gx[0].row(j));
                gx[1](0, j) += dpre;
                const auto wrow = x[0].row(j);
                axpy(dpre, wrow.first(d), de.row(t));
                if (t + 1 < n) axpy(dpre, wrow.subspan(d, d), de.row(t + 1));
            }
            break;
        }
        case Tier::Desktop: {
            const Matrix& wq = x[0];
            const Matrix& wk = x[1];
            const std::size_t a = wq.rows();
            const auto dhid = dense_back(x[3], tr.hidden, tr.feature, dfeat, gx[3], gx[4]);
            add_outer(gx[2], 1.0, dhid, tr.pooled);
            std::vector<double> dpooled(d);
            matvec_transposed(x[2], dhid, dpooled);

            std::vector<double> dcol(n);
            for (std::size_t j = 0; j < n; ++j) {
                axpy(tr.col_mean[j], dpooled, de.row(j));
                dcol[j] = dot(e.row(j), dpooled);
            }
            const double inv_n = 1.0 / static_cast<double>(n);
            const double scale = 1.0 / std::sqrt(static_cast<double>(a));
            Matrix dq(n, a);
            Matrix dk(n, a);
            for (std::size_t i = 0; i < n; ++i) {
                const auto arow = tr.attn.row(i);
                const double centre = dot(arow, dcol);
                for (std::size_t j = 0; j < n; ++j) {
                    const double ds = arow[j] * (dcol[j] - centre) * inv_n * scale;
                    if (ds == 0.0) continue;
                    axpy(ds, tr.k.row(j), dq.row(i));
                    axpy(ds, tr.q.row(i), dk.row(j));
                }
            }
            std::vector<double> tmp(d);
            for (std::size_t t = 0; t < n; ++t) {
                add_outer(gx[0], 1.0, dq.row(t), e.row(t));
                add_outer(gx[1], 1.0, dk.row(t), e.row(t));
                matvec_transposed(wq, dq.row(t), tmp);
                axpy(1.0, tmp, de.row(t));
                matvec_transposed(wk, dk.row(t), tmp);
                axpy(1.0, tmp, de.row(t));
            }
            break;
        }
    }
}

class GradientBuffer {
public:
    explicit GradientBuffer(const TierConfig& config)
        : grad_(zeros_like(config)), touched_flag_(static_cast<std::size_t>(config.vocab_size), 0) {}

    TierModel& grad() { return grad_; }
    const std::vector<int>& touched() const { return touched_; }

    void touch(int row) {
        if (!touched_flag_[row]) {
            touched_flag_[row] = 1;
            touched_.push_back(row);
        }
    }

    void clear() {
        for (int r : touched_) {
            auto row = grad_.embedding.token_table.row(r);
            std::fill(row.begin(), row.end(), 0.0);
            touched_flag_[r] = 0;
        }
        touched_.clear();
        for (auto& b : grad_.blocks()) {
            if (b.name != "embedding.tokens") b.value->fill(0.0);
        }
    }

private:
    TierModel grad_;
    std::vector<int> touched_;
    std::vector<char> touched_flag_;
};

void backward_embedding(const TierModel& m, std::span<const int> tokens, const Trace& tr, const Matrix& de,
                        GradientBuffer& buf) {
    TierModel& g = buf.grad();
    const auto& p = m.embedding;
    const std::size_t c = p.cluster_embeddings.rows();
    std::vector<double> dz(c);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const int tok = tokens[t];
        buf.touch(tok);
        const auto ge = de.row(t);
        auto gw = g.embedding.token_table.row(tok);
        axpy(1.0, ge, gw);
        if (!m.config.semantic_clusters) continue;
        const auto s = tr.emb.assignments.row(t);
        double centre = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            axpy(s[k], ge, g.embedding.cluster_embeddings.row(k));
            dz[k] = dot(ge, p.cluster_embeddings.row(k));
            centre += s[k] * dz[k];
        }
        const auto w = p.token_table.row(tok);
        for (std::size_t k = 0; k < c; ++k) {
            const double dzk = s[k] * (dz[k] - centre);
            axpy(dzk, p.cluster_queries.row(k), gw);
            axpy(dzk, w, g.embedding.cluster_queries.row(k));
        }
    }
}

/// Forward + head; returns the sample loss and fills tr.logits with probabilities.
double forward_sample(const TierModel& m, const Document& doc, Trace& tr) {
    forward_doc(m, doc.tokens, tr);
    if (doc.label < 0 || doc.label >= m.config.num_classes)
        throw DomainError(fmt::format("label {} outside {} classes", doc.label, m.config.num_classes));
    tr.logits.assign(m.head_w.rows(), 0.0);
    matvec(m.head_w, tr.feature, tr.logits);
    for (std::size_t i = 0; i < tr.logits.size(); ++i) tr.logits[i] += m.head_b(0, i);
    // log-sum-exp before normalizing, for an accurate loss
    const double mx = *std::max_element(tr.logits.begin(), tr.logits.end());
    double z = 0.0;
    for (double v : tr.logits) z += std::exp(v - mx);
    const double loss = -(tr.logits[doc.label] - mx - std::log(z));
    softmax_inplace(tr.logits);
    return loss;
}

void backward_sample(const TierModel& m, const Document& doc, const Trace& tr, double weight,
                     GradientBuffer& buf) {
    TierModel& g = buf.grad();
    std::vector<double> dlogits = tr.logits;
    dlogits[doc.label] -= 1.0;
    for (auto& v : dlogits) v *= weight;
    add_outer(g.head_w, 1.0, dlogits, tr.feature);
    axpy(1.0, dlogits, g.head_b.row(0));
    std::vector<double> dfeat(m.head_w.cols());
    matvec_transposed(m.head_w, dlogits, dfeat);
    Matrix de;
    backward_extractor(m, tr, dfeat, g, de);
    backward_embedding(m, doc.tokens, tr, de, buf);
}

std::vector<const Document*> as_pointers(std::span<const Document> docs) {
    std::vector<const Document*> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(&d);
    return out;
}

}  // namespace

Embedded embed(std::span<const int> tokens, const EmbeddingParams& params, bool semantic_clusters) {
    Embedded out;
    embed_into(tokens, params, semantic_clusters, out);
    return out;
}

std::vector<double> extract_features(std::span<const int> tokens, const TierModel& model) {
    Trace tr;
    forward_doc(model, tokens, tr);
    return tr.feature;
}

ForwardResult forward_loss(const TierModel& model, std::span<const Document* const> batch) {
    ForwardResult out;
    out.probabilities = Matrix(batch.size(), static_cast<std::size_t>(model.config.num_classes));
    if (batch.empty()) return out;
    Trace tr;
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += forward_sample(model, *batch[i], tr);
        std::copy(tr.logits.begin(), tr.logits.end(), out.probabilities.row(i).begin());
    }
    out.loss = total / static_cast<double>(batch.size());
    return out;
}

ForwardResult forward_loss(const TierModel& model, std::span<const Document> batch) {
    const auto ptrs = as_pointers(batch);
    return forward_loss(model, ptrs);
}

TierModel backward(const TierModel& model, std::span<const Document* const> batch) {
    GradientBuffer buf(model.config);
    if (batch.empty()) return buf.grad();
    Trace tr;
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (const Document* doc : batch) {
        forward_sample(model, *doc, tr);
        backward_sample(model, *doc, tr, weight, buf);
    }
    return buf.grad();
}

TierModel backward(const TierModel& model, std::span<const Document> batch) {
    const auto ptrs = as_pointers(batch);
    return backward(model, ptrs);
}

std::vector<int> predict(const TierModel& model, std::span<const Document> docs) {
    std::vector<int> out;
    out.reserve(docs.size());
    Trace tr;
    std::vector<double> logits(model.head_w.rows());
    for (const auto& doc : docs) {
        forward_doc(model, doc.tokens, tr);
        matvec(model.head_w, tr.feature, logits);
        for (std::size_t i = 0; i < logits.size(); ++i) logits[i] += model.head_b(0, i);
        out.push_back(static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin()));
    }
    return out;
}

double accuracy(const TierModel& model, std::span<const Document> docs) {
    if (docs.empty()) return 0.0;
    const auto pred = predict(model, docs);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) hit += pred[i] == docs[i].label;
    return static_cast<double>(hit) / static_cast<double>(docs.size());
}

TrainStats train_local(TierModel& model, std::span<const Document> dataset, const TrainOptions& options, Rng& rng,
                       const ResourceProfile& device, double kappa) {
    if (dataset.empty()) throw DomainError("train_local: dataset is empty");
    if (options.epochs < 0 || options.batch_size < 1) throw ConfigError("train_local: need epochs >= 0, batch_size >= 1");

    GradientBuffer buf(model.config);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Trace tr;
    TrainStats stats;
    const double lr = options.learning_rate;
    const auto bs = static_cast<std::size_t>(options.batch_size);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t stop = std::min(order.size(), start + bs);
            const double weight = 1.0 / static_cast<double>(stop - start);
            buf.clear();
            for (std::size_t i = start; i < stop; ++i) {
                const Document& doc = dataset[order[i]];
                loss_sum += forward_sample(model, doc, tr);
                const auto pred = std::max_element(tr.logits.begin(), tr.logits.end()) - tr.logits.begin();
                hits += pred == doc.label;
                backward_sample(model, doc, tr, weight, buf);
            }
            if (lr == 0.0) continue;
            TierModel& g = buf.grad();
            for (int r : buf.touched()) axpy(-lr, g.embedding.token_table.row(r), model.embedding.token_table.row(r));
            auto params = model.blocks();
            auto grads = g.blocks();
            for (std::size_t b = 0; b < params.size(); ++b) {
                if (params[b].name == "embedding.tokens") continue;
                if (!model.config.semantic_clusters && params[b].name.rfind("embedding.", 0) == 0) continue;
                axpy(-lr, grads[b].value->data(), params[b].value->data());
            }
        }
        stats.final_loss = loss_sum / static_cast<double>(dataset.size());
        stats.accuracy = static_cast<double>(hits) / static_cast<double>(dataset.size());
        ++stats.epochs;
    }
    stats.compute_seconds = estimate_compute_time(static_cast<double>(dataset.size()) * options.epochs,
                                                  static_cast<double>(model.param_count()), device, kappa);
    return stats;
}

void save_model(const std::filesystem::path& path, const TierModel& model) {
    const auto& c = model.config;
    ParamRecord rec;
    rec.meta = {static_cast<std::int64_t>(c.tier), c.vocab_size, c.embed_dim, c.hidden_dim, c.num_clusters,
                c.feature_dim, c.num_classes, c.attention_dim, c.semantic_clusters ? 1 : 0};
    for (const auto& b : model.blocks()) rec.blocks.push_back(*b.value);
    write_param_record(path, rec);
}

TierModel load_model(const std::filesystem::path& path) {
    ParamRecord rec = read_param_record(path);
    if (rec.meta.size() != 9) throw IoError(fmt::format("{}: not a client model record", path.string()));
    TierConfig c;
    c.tier = static_cast<Tier>(rec.meta[0]);
    c.vocab_size = static_cast<int>(rec.meta[1]);
    c.embed_dim = static_cast<int>(rec.meta[2]);
    c.hidden_dim = static_cast<int>(rec.meta[3]);
    c.num_clusters = static_cast<int>(rec.meta[4]);
    c.feature_dim = static_cast<int>(rec.meta[5]);
    c.num_classes = static_cast<int>(rec.meta[6]);
    c.attention_dim = static_cast<int>(rec.meta[7]);
    c.semantic_clusters = rec.meta[8] != 0;
    TierModel m = zeros_like(c);
    auto blocks = m.blocks();
    if (blocks.size() != rec.blocks.size()) throw IoError(fmt::format("{}: block count mismatch", path.string()));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!blocks[i].value->same_shape(rec.blocks[i]))
            throw IoError(fmt::format("{}: block {} has the wrong shape", path.string(), blocks[i].name));
        *blocks[i].value = std::move(rec.blocks[i]);
    }
    return m;
}

}  // namespace semfed
