// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "semfed/errors.h"
#include "semfed/rng.h"

namespace semfed {

void GeneratorConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError(fmt::format("corpus.{}: {}", field, why));
    };
    if (num_classes < 2) fail("num_classes", "must be >= 2");
    if (vocab_size <= 0) fail("vocab_size", "vocabulary is empty");
    if (keywords_per_class < 1) fail("keywords_per_class", "must be >= 1");
    if (static_cast<long long>(num_classes) * keywords_per_class >= vocab_size)
        fail("vocab_size", "must exceed num_classes * keywords_per_class to leave a background vocabulary");
    if (num_clients < 1) fail("num_clients", "must be >= 1");
    if (total_samples < num_classes) fail("total_samples", "must be >= num_classes");
    if (total_samples < num_clients) fail("total_samples", "must be >= num_clients");
    if (!(dirichlet_alpha > 0.0)) fail("dirichlet_alpha", "must be > 0");
    if (topic_skew < 0.0 || topic_skew > 1.0) fail("topic_skew", "must lie in [0, 1]");
    if (zipf_exponent < 0.0) fail("zipf_exponent", "must be >= 0");
    if (min_length < 1 || max_length < min_length) fail("min_length", "need 1 <= min_length <= max_length");
    if (mask_min < 0.0 || mask_max >= 1.0 || mask_max < mask_min)
        fail("mask_min", "need 0 <= mask_min <= mask_max < 1");
    if (held_out_fraction < 0.0 || held_out_fraction >= 1.0) fail("held_out_fraction", "must lie in [0, 1)");
    if (test_fraction < 0.0 || test_fraction >= 1.0) fail("test_fraction", "must lie in [0, 1)");
}

namespace {

int background_begin(const GeneratorConfig& c) { return c.num_classes * c.keywords_per_class; }

}  // namespace

std::vector<Document> generate_corpus(const GeneratorConfig& config) {
    config.validate();
    Rng rng = Rng(config.seed).fork("corpus");

    const int bg_begin = background_begin(config);
    const int bg_size = config.vocab_size - bg_begin;

    // Background tokens follow a Zipf law over a seeded rank order.
    std::vector<int> rank_to_token(bg_size);
    std::iota(rank_to_token.begin(), rank_to_token.end(), bg_begin);
    rng.shuffle(rank_to_token);
    std::vector<double> cdf(bg_size);
    double acc = 0.0;
    for (int r = 0; r < bg_size; ++r) {
        acc += 1.0 / std::pow(static_cast<double>(r + 1), config.zipf_exponent);
        cdf[r] = acc;
    }
    for (auto& x : cdf) x /= acc;

    std::vector<int> labels(config.total_samples);
    for (int i = 0; i < config.total_samples; ++i) {
        labels[i] = i < config.num_classes ? i : static_cast<int>(rng.below(config.num_classes));
    }
    rng.shuffle(labels);

    std::vector<Document> corpus(config.total_samples);
    for (int i = 0; i < config.total_samples; ++i) {
        Document& doc = corpus[i];
        doc.id = static_cast<std::uint32_t>(i);
        doc.label = labels[i];
        const int len = rng.uniform_int(config.min_length, config.max_length);
        doc.tokens.resize(len);
        for (auto& tok : doc.tokens) {
            if (rng.bernoulli(config.topic_skew)) {
                tok = doc.label * config.keywords_per_class +
                      static_cast<int>(rng.below(config.keywords_per_class));
            } else {
                const double u = rng.uniform();
                auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
                const auto rank = std::min<std::ptrdiff_t>(it - cdf.begin(), bg_size - 1);
                tok = rank_to_token[rank];
            }
        }
    }
    return corpus;
}

std::pair<std::vector<Document>, std::vector<Document>> split_test_set(
    const std::vector<Document>& corpus, const GeneratorConfig& config) {
    config.validate();
    Rng rng = Rng(config.seed).fork("test-split");
    std::vector<std::vector<std::size_t>> by_class(config.num_classes);
    for (std::size_t i = 0; i < corpus.size(); ++i) by_class.at(corpus[i].label).push_back(i);

    std::vector<bool> is_test(corpus.size(), false);
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        const auto n_test = static_cast<std::size_t>(std::floor(config.test_fraction * idx.size()));
        for (std::size_t j = 0; j < n_test; ++j) is_test[idx[j]] = true;
    }
    std::pair<std::vector<Document>, std::vector<Document>> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        (is_test[i] ? out.second : out.first).push_back(corpus[i]);
    }
    return out;
}

std::vector<ClientDataset> partition_dirichlet(const std::vector<Document>& corpus,
                                               const GeneratorConfig& config) {
    config.validate();
    const int k_clients = config.num_clients;
    if (static_cast<std::size_t>(k_clients) > corpus.size())
        throw ConfigError(fmt::format("corpus.num_clients: {} clients but only {} documents",
                                      k_clients, corpus.size()));

    Rng rng = Rng(config.seed).fork("partition");
    std::vector<std::vector<std::size_t>> by_class(config.num_classes);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const int label = corpus[i].label;
        if (label < 0 || label >= config.num_classes)
            throw DomainError(fmt::format("partition_dirichlet: label {} out of range", label));
        by_class[label].push_back(i);
    }
    for (int c = 0; c < config.num_classes; ++c) {
        if (by_class[c].empty())
            throw ConfigError(fmt::format("partition_dirichlet: class {} has no samples", c));
    }

    std::vector<std::vector<std::size_t>> assigned(k_clients);
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        const std::vector<double> p = rng.dirichlet(config.dirichlet_alpha, k_clients);
        double cum = 0.0;
        std::size_t start = 0;
        for (int k = 0; k < k_clients; ++k) {
            cum += p[k];
            std::size_t stop = k + 1 == k_clients
                                   ? idx.size()
                                   : static_cast<std::size_t>(std::llround(cum * idx.size()));
            stop = std::clamp(stop, start, idx.size());
            assigned[k].insert(assigned[k].end(), idx.begin() + start, idx.begin() + stop);
            start = stop;
        }
    }

    // Every client needs at least one document: take from the largest.
    for (int k = 0; k < k_clients; ++k) {
        if (!assigned[k].empty()) continue;
        auto largest = std::max_element(assigned.begin(), assigned.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
        assigned[k].push_back(largest->back());
        largest->pop_back();
    }

    const int bg_begin = background_begin(config);
    const int bg_size = config.vocab_size - bg_begin;

    std::vector<ClientDataset> out(k_clients);
    for (int k = 0; k < k_clients; ++k) {
        Rng client_rng = rng.fork(static_cast<std::uint64_t>(k));
        ClientDataset& ds = out[k];
        ds.client_id = k;

        // Masked background tokens are rewritten to a fixed unmasked substitute.
        const double mask_share = client_rng.uniform(config.mask_min, config.mask_max);
        std::vector<int> bg(bg_size);
        std::iota(bg.begin(), bg.end(), bg_begin);
        client_rng.shuffle(bg);
        const auto n_masked = static_cast<std::size_t>(std::floor(mask_share * bg_size));
        std::vector<int> remap(bg_size);
        std::iota(remap.begin(), remap.end(), bg_begin);
        const std::size_t n_kept = bg.size() - n_masked;
        for (std::size_t j = 0; j < n_masked; ++j) {
            remap[bg[j] - bg_begin] = bg[n_masked + client_rng.below(n_kept)];
        }

        std::vector<std::vector<Document>> per_class(config.num_classes);
        for (std::size_t idx : assigned[k]) {
            Document doc = corpus[idx];
            for (auto& tok : doc.tokens) {
                if (tok >= bg_begin) tok = remap[tok - bg_begin];
            }
            per_class[doc.label].push_back(std::move(doc));
        }
        for (auto& docs : per_class) {
            const auto n_hold = static_cast<std::size_t>(std::floor(config.held_out_fraction * docs.size()));
            const std::size_t n_train = docs.size() - n_hold;
            for (std::size_t j = 0; j < docs.size(); ++j) {
                (j < n_train ? ds.documents : ds.held_out).push_back(std::move(docs[j]));
            }
        }
    }
    return out;
}

SemanticProfile build_semantic_profile(const ClientDataset& dataset, int num_classes) {
    if (dataset.documents.empty())
        throw DomainError(fmt::format("build_semantic_profile: client {} has no documents", dataset.client_id));
    if (num_classes < 1) throw DomainError("build_semantic_profile: num_classes must be >= 1");

    SemanticProfile profile;
    profile.class_dist.assign(num_classes, 0.0);
    double len_sum = 0.0;
    double len_sq = 0.0;
    for (const Document& doc : dataset.documents) {
        if (doc.label < 0 || doc.label >= num_classes)
            throw DomainError(fmt::format("build_semantic_profile: label {} out of range", doc.label));
        profile.class_dist[doc.label] += 1.0;
        for (int tok : doc.tokens) ++profile.vocab[tok];
        const auto len = static_cast<double>(doc.tokens.size());
        len_sum += len;
        len_sq += len * len;
        profile.seq_len.max = std::max(profile.seq_len.max, len);
    }
    const auto n = static_cast<double>(dataset.documents.size());
    for (auto& p : profile.class_dist) p /= n;
    profile.seq_len.mean = len_sum / n;
    profile.seq_len.std = std::sqrt(std::max(0.0, len_sq / n - profile.seq_len.mean * profile.seq_len.mean));
    return profile;
}

void write_records(const std::filesystem::path& path,
                   const std::vector<std::pair<int, const Document*>>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    std::string line;
    for (const auto& [client, doc] : records) {
        line = fmt::format("{},{},", client, doc->label);
        for (std::size_t i = 0; i < doc->tokens.size(); ++i) {
            if (i) line += ' ';
            line += std::to_string(doc->tokens[i]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

std::vector<std::pair<int, Document>> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    std::vector<std::pair<int, Document>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw IoError(fmt::format("{}:{}: expected client_id,label,tokens", path.string(), line_no));
        Document doc;
        doc.id = static_cast<std::uint32_t>(out.size());
        const int client = std::stoi(line.substr(0, c1));
        doc.label = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
        std::istringstream toks(line.substr(c2 + 1));
        int t;
        while (toks >> t) doc.tokens.push_back(t);
        if (doc.tokens.empty())
            throw IoError(fmt::format("{}:{}: document has no tokens", path.string(), line_no));
        out.emplace_back(client, std::move(doc));
    }
    return out;
}

void export_partition(const std::filesystem::path& dir, const std::vector<ClientDataset>& clients,
                      const std::vector<Document>& test_set) {
    std::filesystem::create_directories(dir);
    std::vector<std::pair<int, const Document*>> train, held, test;
    for (const auto& c : clients) {
        for (const auto& d : c.documents) train.emplace_back(c.client_id, &d);
        for (const auto& d : c.held_out) held.emplace_back(c.client_id, &d);
    }
    for (const auto& d : test_set) test.emplace_back(-1, &d);
    write_records(dir / "train.txt", train);
    write_records(dir / "held_out.txt", held);
    write_records(dir / "test.txt", test);
}

ImportedPartition import_partition(const std::filesystem::path& dir, int num_clients) {
    ImportedPartition out;
    out.clients.resize(num_clients);
    for (int k = 0; k < num_clients; ++k) out.clients[k].client_id = k;
    auto place = [&](const std::filesystem::path& file, bool held) {
        for (auto& [client, doc] : read_records(file)) {
            if (client < 0 || client >= num_clients)
                throw IoError(fmt::format("{}: client id {} out of range", file.string(), client));
            auto& dst = held ? out.clients[client].held_out : out.clients[client].documents;
            dst.push_back(std::move(doc));
        }
    };
    place(dir / "train.txt", false);
    place(dir / "held_out.txt", true);
    for (auto& [client, doc] : read_records(dir / "test.txt")) out.test_set.push_back(std::move(doc));
    return out;
}

}  // namespace semfed
