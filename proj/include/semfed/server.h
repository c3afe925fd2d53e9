// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Server side. Decompressed client features f^ are aligned against frozen
// semantic cluster centers c_c,
//
//   t_c = softmax_c(f^ . c_c / sqrt(F))         (or cosine similarity)
//   g   = W_a[client] f^ + sum_c t_c c_c
//
// then mixed by one attention head whose keys and values are the centers,
//
//   alpha = softmax_c((Wq g) . (Wk c_c) / sqrt(a)),   h = g + sum_c alpha_c Wv c_c
//
// and classified by a linear softmax head. Only features, labels and client
// ids reach this module.

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "semfed/matrix.h"
#include "semfed/rng.h"

namespace semfed {

struct ClusterCenters {
    Matrix centers;  ///< C_s x F
    double temperature = 1.0;

    std::size_t count() const { return centers.rows(); }
};

struct SoftKMeansTrace {
    /// Per iteration: distortion with the current assignments before and after
    /// the center update.
    std::vector<double> distortion_before_update;
    std::vector<double> distortion_after_update;
    /// Free energy sum_i sum_c a_ic (d_ic + tau log a_ic) after each half-step.
    std::vector<double> free_energy;
};

/// Soft assignments a_ic = softmax_c(-||f_i - c_c||^2 / tau); rows are samples.
Matrix soft_assignments(const Matrix& features, const Matrix& centers, double temperature);

/// k-means++ seeding, then alternating soft assignment / weighted-mean updates.
/// Throws DomainError when there are fewer samples than centers.
ClusterCenters fit_soft_kmeans(const Matrix& features, int num_centers, double temperature, int iterations, Rng& rng,
                               SoftKMeansTrace* trace = nullptr);

enum class AlignSimilarity { ScaledDot, Cosine };
const char* align_similarity_name(AlignSimilarity s);
AlignSimilarity parse_align_similarity(const std::string& s);

struct ServerConfig {
    int feature_dim = 128;
    int num_classes = 5;
    int num_centers = 10;
    int attention_dim = 32;
    double temperature = 1.0;
    int kmeans_iterations = 30;
    AlignSimilarity similarity = AlignSimilarity::ScaledDot;

    void validate() const;
};

struct ServerModel {
    ServerConfig config;
    ClusterCenters centers;          ///< frozen after fitting
    std::map<int, Matrix> alignment;  ///< client id -> F x F
    Matrix attn_q;                   ///< a x F
    Matrix attn_k;                   ///< a x F
    Matrix attn_v;                   ///< F x F
    Matrix head_w;                   ///< L x F
    Matrix head_b;                   ///< 1 x L

    struct Block {
        std::string name;
        Matrix* value;
    };
    /// Trainable blocks (centers excluded), alignment matrices in client order.
    std::vector<Block> blocks();
};

/// Alignment matrices start at identity; attention and head are Glorot-uniform.
ServerModel make_server_model(const ServerConfig& config, ClusterCenters centers, std::span<const int> client_ids,
                              Rng& rng);

/// t_c for one feature.
std::vector<double> alignment_weights(std::span<const double> f, const ServerModel& model);
/// Throws ProtocolError for an unknown client id.
std::vector<double> align(std::span<const double> f, int client_id, const ServerModel& model);
/// align with caller-supplied weights t (a frozen-weights evaluation hook).
std::vector<double> align_with_weights(std::span<const double> f, int client_id, const ServerModel& model,
                                       std::span<const double> t);

struct BankSample {
    std::vector<double> feature;
    int label = 0;
    int client_id = 0;
    int round = 0;
};

/// Sliding window over the most recent `window_rounds` rounds, capped at
/// `capacity` samples (oldest dropped first).
class FeatureBank {
public:
    explicit FeatureBank(int window_rounds = 3, std::size_t capacity = 50000);

    /// Rows of `features` pair with `labels`. Throws DomainError on a
    /// dimension mismatch.
    void add(int round, int client_id, const Matrix& features, std::span<const int> labels);

    const std::deque<BankSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t capacity() const { return capacity_; }

private:
    int window_;
    std::size_t capacity_;
    std::size_t feature_dim_ = 0;
    std::deque<BankSample> samples_;
};

/// Class probabilities for one feature as seen from `client_id`.
std::vector<double> server_probabilities(std::span<const double> f, int client_id, const ServerModel& model);
int server_predict(std::span<const double> f, int client_id, const ServerModel& model);
/// Rows of `features` all come from `client_id`; returns rows x L probabilities.
Matrix server_probabilities_batch(const Matrix& features, int client_id, const ServerModel& model);

/// Mean cross-entropy over the batch.
double server_loss(const ServerModel& model, std::span<const BankSample* const> batch);
/// Gradient of server_loss; same layout as the model (centers zero).
ServerModel server_backward(const ServerModel& model, std::span<const BankSample* const> batch);

struct ServerTrainOptions {
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.05;
};

struct ServerTrainStats {
    double final_loss = 0.0;
    double accuracy = 0.0;  ///< running accuracy over the last epoch
};

/// Throws DomainError on an empty bank.
ServerTrainStats train_server(ServerModel& model, const FeatureBank& bank, const ServerTrainOptions& options,
                              Rng& rng);

struct EvalResult {
    double server_accuracy = 0.0;
    double mean_client_accuracy = 0.0;
    double macro_f1 = 0.0;
    double client_server_agreement = 0.0;
};

/// Majority vote per sample, ties to the lowest class id.
std::vector<int> majority_vote(const std::vector<std::vector<int>>& client_predictions, int num_classes);
/// Mean of per-class F1 over classes that occur in labels or predictions.
double macro_f1(std::span<const int> predictions, std::span<const int> labels, int num_classes);
/// Throws DomainError on an empty test set or mismatched lengths.
EvalResult evaluate(std::span<const int> server_predictions, const std::vector<std::vector<int>>& client_predictions,
                    std::span<const int> labels, int num_classes);

void save_server(const std::filesystem::path& path, const ServerModel& model);
ServerModel load_server(const std::filesystem::path& path);

}  // namespace semfed
