// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration. Files are sectioned INI ("[section]" then "key = value");
// any field can be overridden with "section.key=value".

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semfed/codec.h"
#include "semfed/corpus.h"
#include "semfed/device.h"
#include "semfed/selection.h"
#include "semfed/semantics.h"
#include "semfed/server.h"

namespace semfed {

enum class ArchitectureMode { Heterogeneous, HomogeneousSmall, HomogeneousLarge, HeterogeneousNoSemantic };
enum class CompressionMode { Semantic, PcaOnly, SparseOnly, None };
/// When client codecs are fitted: every client available in round 1 fits on
/// its round-1 local features, or each client on its first participation.
enum class CodecFitSchedule { Round1, FirstParticipation };

std::string_view architecture_mode_name(ArchitectureMode m);
ArchitectureMode parse_architecture_mode(std::string_view s);
std::string_view compression_mode_name(CompressionMode m);
CompressionMode parse_compression_mode(std::string_view s);
std::string_view codec_fit_schedule_name(CodecFitSchedule s);
CodecFitSchedule parse_codec_fit_schedule(std::string_view s);

struct ModelSettings {
    ArchitectureMode architecture = ArchitectureMode::Heterogeneous;
    int feature_dim = 128;
    int attention_dim = 32;
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.3;
    double lr_decay = 0.9;  ///< per round
    double token_init_range = 1.0;
    double embedding_init_range = 0.05;
    double bigram_init_scale = 0.1;
};

struct CompressionSettings {
    CompressionMode mode = CompressionMode::Semantic;
    CodecFitSchedule fit_schedule = CodecFitSchedule::Round1;
    double ratio = 0.4;
    int bits = 8;
    double pca_only_ratio = 0.35;
    int dictionary_atoms = 64;
    double sparsity_lambda = 0.01;
    int ista_iterations = 50;
    int dictionary_iterations = 15;

    /// Codec settings implied by `mode`.
    CompressionConfig resolve() const;
};

struct EnergySettings {
    EnergyModel model;
    double kappa = 2e-10;             ///< seconds per (document x parameter) at unit compute
    double setup_cost_factor = 12.0;  ///< one-time codec fit, in multiples of that round's training time
};

struct ServerSettings {
    int num_centers = 10;
    double temperature = 1.0;
    int kmeans_iterations = 30;
    int attention_dim = 32;
    AlignSimilarity similarity = AlignSimilarity::ScaledDot;
    int epochs = 1;
    int batch_size = 32;
    double learning_rate = 0.05;
    double lr_decay = 0.9;
    int bank_rounds = 3;
    int bank_capacity = 50000;
};

struct SelectionSettings {
    SelectionMode mode = SelectionMode::Greedy;
    int clients_per_round = 5;
    UtilityWeights lambda;
    SimilarityWeights similarity;
    double bandwidth_budget = 1.0e6;  ///< bytes per second shared by a round's participants
};

struct RunConfig {
    GeneratorConfig corpus;
    FleetSpec fleet;
    SelectionSettings selection;
    EfficiencyWeights efficiency;
    EnergySettings energy;
    ModelSettings model;
    CompressionSettings compression;
    ServerSettings server;
    int rounds = 20;
    std::uint64_t seed = 42;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Applies "section.key=value". Throws ConfigError for unknown keys or bad values.
void apply_override(RunConfig& config, std::string_view assignment);
void set_field(RunConfig& config, const std::string& key, const std::string& value);

/// Reads an INI file over the defaults. Throws IoError / ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Every field as ("section.key", value) in a stable order.
std::vector<std::pair<std::string, std::string>> config_fields(const RunConfig& config);

}  // namespace semfed
