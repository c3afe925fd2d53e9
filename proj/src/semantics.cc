// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/semantics.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "semfed/errors.h"

namespace semfed {

namespace {

void check_distribution(std::span<const double> p, const char* name) {
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw DomainError(fmt::format("js_divergence: {} has a negative or NaN entry", name));
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw DomainError(fmt::format("js_divergence: {} sums to {}, not 1", name, total));
}

// sum_i a_i log2(a_i / m_i) with 0 log 0 = 0
double kl_to_mixture(std::span<const double> a, std::span<const double> m) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 0.0) s += a[i] * std::log2(a[i] / m[i]);
    }
    return s;
}

std::set<int> key_set(const SemanticProfile& p) {
    std::set<int> keys;
    for (const auto& [tok, count] : p.vocab) keys.insert(keys.end(), tok);
    return keys;
}

}  // namespace

double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw DomainError(fmt::format("js_divergence: length mismatch {} vs {}", p.size(), q.size()));
    check_distribution(p, "p");
    check_distribution(q, "q");
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    const double js = 0.5 * kl_to_mixture(p, m) + 0.5 * kl_to_mixture(q, m);
    return std::clamp(js, 0.0, 1.0);
}

double jaccard(const std::set<int>& a, const std::set<int>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++inter;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double semantic_similarity(const SemanticProfile& k, const SemanticProfile& j, const SimilarityWeights& w) {
    if (k.class_dist.size() != j.class_dist.size())
        throw DomainError(fmt::format("semantic_similarity: class count mismatch {} vs {}",
                                      k.class_dist.size(), j.class_dist.size()));
    if (w.alpha < 0.0 || w.alpha > 1.0) throw DomainError("semantic_similarity: alpha must lie in [0, 1]");
    const double js = js_divergence(k.class_dist, j.class_dist);
    const double jac = jaccard(key_set(k), key_set(j));
    return std::clamp(w.alpha * (1.0 - js) + (1.0 - w.alpha) * jac, 0.0, 1.0);
}

double semantic_diversity(int k, std::span<const int> selected, const SimilarityMatrix& sims) {
    if (selected.empty()) return 1.0;
    double total = 0.0;
    for (int j : selected) {
        if (j == k) throw DomainError(fmt::format("semantic_diversity: client {} is already selected", k));
        total += sims(k, j);
    }
    return std::clamp(1.0 - total / static_cast<double>(selected.size()), 0.0, 1.0);
}

SimilarityMatrix build_similarity_matrix(std::span<const SemanticProfile> profiles, const SimilarityWeights& w) {
    const std::size_t n = profiles.size();
    SimilarityMatrix sims(n);
    std::vector<std::set<int>> keys;
    keys.reserve(n);
    for (const auto& p : profiles) keys.push_back(key_set(p));
    for (std::size_t i = 0; i < n; ++i) {
        sims(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (profiles[i].class_dist.size() != profiles[j].class_dist.size())
                throw DomainError("build_similarity_matrix: class count mismatch");
            const double js = js_divergence(profiles[i].class_dist, profiles[j].class_dist);
            const double v = std::clamp(w.alpha * (1.0 - js) + (1.0 - w.alpha) * jaccard(keys[i], keys[j]), 0.0, 1.0);
            sims(i, j) = v;
            sims(j, i) = v;
        }
    }
    return sims;
}

void write_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& sims) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out << "client";
    for (std::size_t j = 0; j < sims.size(); ++j) out << ",c" << j;
    out << '\n';
    for (std::size_t i = 0; i < sims.size(); ++i) {
        out << i;
        for (std::size_t j = 0; j < sims.size(); ++j) out << fmt::format(",{:.6f}", sims(i, j));
        out << '\n';
    }
    if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

}  // namespace semfed
