// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Round loop, ablation grids and report files.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "semfed/config.h"
#include "semfed/matrix.h"
#include "semfed/semantics.h"

namespace semfed {

struct ClientRoundRecord {
    int client_id = 0;
    double utility = 0.0;
    std::size_t documents = 0;
    std::size_t raw_bytes = 0;         ///< documents x F x 4
    std::size_t compressed_bytes = 0;  ///< serialized payload
    std::size_t setup_bytes = 0;       ///< codec parameters, first participation only
    double bandwidth_share = 0.0;
    double transmission_seconds = 0.0;
    double compute_seconds = 0.0;      ///< training plus any one-time codec fit
    double energy = 0.0;
    double battery_after = 0.0;
    double train_loss = 0.0;
};

struct RoundRecord {
    int round = 0;
    bool skipped = false;
    int available = 0;
    std::vector<ClientRoundRecord> clients;  ///< selected clients in pick order
    std::size_t raw_bytes = 0;
    std::size_t compressed_bytes = 0;
    std::size_t setup_bytes = 0;
    double compression_ratio = 0.0;  ///< compressed / raw (0 when skipped)
    double savings_pct = 0.0;        ///< 100 (1 - ratio)
    double compute_seconds = 0.0;    ///< sum over participants
    double energy = 0.0;
    double server_accuracy = 0.0;
    double mean_client_accuracy = 0.0;          ///< all clients, global test set
    double mean_client_heldout_accuracy = 0.0;  ///< all clients, own held-out set
    double macro_f1 = 0.0;
    double agreement = 0.0;
    double server_loss = 0.0;
};

struct DeviceTelemetry {
    int round = 0;
    int client_id = 0;
    bool available = false;
    bool selected = false;
    double utility = 0.0;  ///< NaN when unavailable
    double compute_seconds = 0.0;
    std::size_t bytes_sent = 0;
    double energy = 0.0;
    double battery_pct = 0.0;
    double heldout_accuracy = 0.0;  ///< client model on its own held-out set after this round
};

struct ProjectedFeature {
    int client_id = 0;
    int label = 0;
    int round = 0;
    double x = 0.0;
    double y = 0.0;
};

struct RunReport {
    RunConfig config;
    std::vector<RoundRecord> rounds;
    std::vector<DeviceTelemetry> telemetry;  ///< rounds x clients
    SimilarityMatrix similarity;
    std::vector<std::string> client_tiers;
    std::vector<std::size_t> vocab_sizes;
    std::vector<int> selection_counts;
    std::vector<double> final_battery;
    std::vector<ProjectedFeature> projection;

    double mean_savings_pct() const;
    double mean_compression_ratio() const;
    std::size_t total_compressed_bytes() const;
    std::size_t total_setup_bytes() const;
    double total_energy() const;
    double total_compute_seconds() const;
};

/// Throws ConfigError for an invalid configuration.
RunReport run(const RunConfig& config);

struct AblationRow {
    std::string group;    ///< selection | architecture | compression
    std::string variant;
    double server_accuracy = 0.0;
    double mean_client_heldout_accuracy = 0.0;
    double total_energy = 0.0;
    double total_compute_seconds = 0.0;
    double mean_compression_ratio = 0.0;
    std::vector<double> selection_frequency;  ///< per client, fraction of rounds
};

struct AblationGroups {
    bool selection = true;
    bool architecture = true;
    bool compression = true;
};

/// Every variant shares the base seed; the base configuration's own row is
/// computed once and reused across groups.
std::vector<AblationRow> run_ablation_suite(const RunConfig& base, const AblationGroups& groups = {});

/// Writes rounds.csv, selection_trace.csv, device_telemetry.csv, summary.json,
/// similarity_matrix.csv and feature_projection.csv. Throws IoError.
void emit_report(const RunReport& report, const std::filesystem::path& dir);
void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

}  // namespace semfed
