// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic text-classification corpus, Dirichlet label-skew partitioning and
// per-client semantic profiles.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

namespace semfed {

struct Document {
    std::uint32_t id = 0;      ///< index in the generated corpus
    std::vector<int> tokens;   ///< ids in [0, vocab_size)
    int label = 0;             ///< class id in [0, num_classes)
};

struct ClientDataset {
    int client_id = 0;
    std::vector<Document> documents;
    std::vector<Document> held_out;
};

struct SequenceLengthStats {
    double mean = 0.0;
    double std = 0.0;
    double max = 0.0;
};

struct SemanticProfile {
    std::map<int, std::int64_t> vocab;  ///< token id -> occurrence count
    std::vector<double> class_dist;     ///< sums to 1
    SequenceLengthStats seq_len;
};

struct GeneratorConfig {
    int total_samples = 10000;
    int num_classes = 5;
    int vocab_size = 12000;
    int keywords_per_class = 40;
    double topic_skew = 0.5;        ///< probability a token comes from the class keyword pool
    double zipf_exponent = 0.8;     ///< background token frequency law
    int min_length = 20;
    int max_length = 120;
    double dirichlet_alpha = 0.5;
    int num_clients = 10;
    double mask_min = 0.2;          ///< per-client masked share of background vocabulary
    double mask_max = 0.5;
    double held_out_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 42;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

std::vector<Document> generate_corpus(const GeneratorConfig& config);

/// Stratified global test split (floor(test_fraction * n_c) per class) taken
/// before partitioning. Returns {remaining, test}.
std::pair<std::vector<Document>, std::vector<Document>> split_test_set(
    const std::vector<Document>& corpus, const GeneratorConfig& config);

/// Non-IID split: per class, client proportions ~ Dirichlet(alpha). Applies the
/// per-client background vocabulary mask and carves a stratified held-out split.
std::vector<ClientDataset> partition_dirichlet(const std::vector<Document>& corpus,
                                               const GeneratorConfig& config);

SemanticProfile build_semantic_profile(const ClientDataset& dataset, int num_classes);

/// Line-delimited records: `client_id,label,t0 t1 t2 ...`.
void write_records(const std::filesystem::path& path,
                   const std::vector<std::pair<int, const Document*>>& records);
std::vector<std::pair<int, Document>> read_records(const std::filesystem::path& path);

/// Writes train.txt, held_out.txt and test.txt (test rows use client id -1).
void export_partition(const std::filesystem::path& dir, const std::vector<ClientDataset>& clients,
                      const std::vector<Document>& test_set);

struct ImportedPartition {
    std::vector<ClientDataset> clients;
    std::vector<Document> test_set;
};
ImportedPartition import_partition(const std::filesystem::path& dir, int num_clients);

}  // namespace semfed
