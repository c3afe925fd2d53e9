// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Client-side models. Every tier shares the semantic embedding layer
//
//   s_i = softmax_c(w_i . q_c)          w_i = row of the token table
//   e_i = w_i + sum_c s_{i,c} W_c[c]
//
// and differs only in the feature extractor that pools e_i into a
// feature_dim vector:
//
//   Mobile   mean-pool -> dense(hidden, tanh) -> dense(F, tanh)
//   Laptop   [mean-pool(e) ; max-pool(tanh(bigram conv))] -> dense(F, tanh)
//   Desktop  single-head self-attention, mean over queries -> value
//            projection(hidden) -> dense(F, tanh)
//
// A linear softmax head sits on the feature. All arithmetic is double.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semfed/corpus.h"
#include "semfed/device.h"
#include "semfed/matrix.h"
#include "semfed/rng.h"

namespace semfed {

struct TierConfig {
    Tier tier = Tier::Mobile;
    int vocab_size = 0;
    int embed_dim = 64;
    int hidden_dim = 32;
    int num_clusters = 5;
    int feature_dim = 128;
    int num_classes = 5;
    int attention_dim = 32;         ///< query/key width of the desktop extractor
    bool semantic_clusters = true;  ///< false: e_i = w_i and cluster tables are frozen at zero

    void validate() const;
};

/// Embedding / hidden / cluster sizes per tier (64/32/5, 100/64/8, 128/128/10).
TierConfig default_tier_config(Tier tier, int vocab_size, int num_classes, int feature_dim = 128);

struct EmbeddingParams {
    Matrix token_table;         ///< V x d
    Matrix cluster_embeddings;  ///< C x d
    Matrix cluster_queries;     ///< C x d
};

struct Embedded {
    Matrix vectors;      ///< T x d enhanced embeddings e_i
    Matrix assignments;  ///< T x C soft assignments s_{i,c} (empty when clusters are off)
};

/// Throws DomainError on an out-of-vocabulary token.
Embedded embed(std::span<const int> tokens, const EmbeddingParams& params, bool semantic_clusters = true);

struct ParamBlock {
    std::string name;
    Matrix* value;
};
struct ConstParamBlock {
    std::string name;
    const Matrix* value;
};

struct TierModel {
    TierConfig config;
    EmbeddingParams embedding;
    std::vector<Matrix> extractor;  ///< tier-specific, see extractor_block_names
    Matrix head_w;                  ///< L x F
    Matrix head_b;                  ///< 1 x L

    std::vector<ParamBlock> blocks();
    std::vector<ConstParamBlock> blocks() const;
    /// Trainable scalars (cluster tables excluded when clusters are off).
    std::size_t param_count() const;
};

std::vector<std::string> extractor_block_names(Tier tier);

struct InitOptions {
    double token_range = 1.0;       ///< token table ~ U(-r, r)
    double embedding_range = 0.05;  ///< cluster tables ~ U(-r, r)
    bool glorot_dense = true;       ///< dense layers ~ Glorot-uniform, else U(-embedding_range, embedding_range)
    double bigram_scale = 0.1;      ///< multiplies the laptop bigram filter init; keeps tanh out of saturation
};

/// Zero-valued model with all blocks shaped for `config`.
TierModel zeros_like(const TierConfig& config);
TierModel make_tier_model(const TierConfig& config, Rng& rng, const InitOptions& init = {});

/// Penultimate-layer feature (feature_dim). Throws DomainError for an empty document.
std::vector<double> extract_features(std::span<const int> tokens, const TierModel& model);
inline std::vector<double> extract_features(const Document& doc, const TierModel& model) {
    return extract_features(doc.tokens, model);
}

struct ForwardResult {
    double loss = 0.0;     ///< mean cross-entropy
    Matrix probabilities;  ///< batch x L
};

ForwardResult forward_loss(const TierModel& model, std::span<const Document* const> batch);
ForwardResult forward_loss(const TierModel& model, std::span<const Document> batch);

/// Gradient of the mean cross-entropy; same block layout as the model.
TierModel backward(const TierModel& model, std::span<const Document* const> batch);
TierModel backward(const TierModel& model, std::span<const Document> batch);

std::vector<int> predict(const TierModel& model, std::span<const Document> docs);
double accuracy(const TierModel& model, std::span<const Document> docs);

struct TrainOptions {
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.3;
};

struct TrainStats {
    int epochs = 0;
    double final_loss = 0.0;       ///< mean loss over the last epoch (pre-update values)
    double accuracy = 0.0;         ///< running accuracy over the last epoch
    double compute_seconds = 0.0;  ///< simulated
};

/// Plain mini-batch SGD with a seeded shuffle each epoch.
TrainStats train_local(TierModel& model, std::span<const Document> dataset, const TrainOptions& options, Rng& rng,
                       const ResourceProfile& device, double kappa);

void save_model(const std::filesystem::path& path, const TierModel& model);
TierModel load_model(const std::filesystem::path& path);

}  // namespace semfed
