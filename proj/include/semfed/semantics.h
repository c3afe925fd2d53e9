// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <vector>

#include "semfed/corpus.h"

namespace semfed {

struct SimilarityWeights {
    double alpha = 0.5;  ///< weight of class-distribution similarity vs vocabulary overlap
};

/// Pairwise semantic similarity over a client fleet.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Jensen-Shannon divergence with base-2 logarithms, so the result lies in [0, 1].
double js_divergence(std::span<const double> p, std::span<const double> q);

/// |A n B| / |A u B|; two empty sets are identical (1).
double jaccard(const std::set<int>& a, const std::set<int>& b);

double semantic_similarity(const SemanticProfile& k, const SemanticProfile& j, const SimilarityWeights& w);

/// 1 - mean similarity to the already-selected clients; 1 when nothing is selected.
double semantic_diversity(int k, std::span<const int> selected, const SimilarityMatrix& sims);

SimilarityMatrix build_similarity_matrix(std::span<const SemanticProfile> profiles, const SimilarityWeights& w);

void write_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& sims);

}  // namespace semfed
