// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-round client selection from a utility that mixes semantic diversity,
// resource efficiency and participation fairness.

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "semfed/rng.h"
#include "semfed/semantics.h"

namespace semfed {

struct UtilityWeights {
    double diversity = 0.4;
    double resource = 0.3;
    double fairness = 0.3;

    void validate() const;
};

struct ParticipationHistory {
    std::vector<int> counts;  ///< rounds each client has been selected so far
    int round = 1;            ///< current round, 1-based

    explicit ParticipationHistory(std::size_t clients = 0) : counts(clients, 0) {}
    void record(std::span<const int> selected);  ///< bumps counts and advances the round
};

enum class SelectionMode {
    Greedy,        ///< re-evaluates diversity after every pick
    Static,        ///< all utilities against an empty selection, top m
    Random,
    ResourceOnly,
    SemanticOnly,
};

std::string_view selection_mode_name(SelectionMode m);
SelectionMode parse_selection_mode(std::string_view name);

struct SelectionOutcome {
    std::vector<int> selected;         ///< in pick order
    std::vector<double> utility;       ///< per client; NaN when unavailable
    std::vector<double> bandwidth;     ///< per selected client, same order as `selected`
    bool skipped = false;              ///< no client was available
};

double fairness(int k, const ParticipationHistory& history);

double utility(int k, std::span<const int> selected_so_far, const SimilarityMatrix& sims, double efficiency,
               const ParticipationHistory& history, const UtilityWeights& w);

/// `available[k]` flags reachable clients. Ties resolve to the lowest client id.
/// `rng` is only used by SelectionMode::Random.
SelectionOutcome select_clients(const std::vector<bool>& available, int m, const SimilarityMatrix& sims,
                                std::span<const double> efficiencies, const ParticipationHistory& history,
                                const UtilityWeights& w, SelectionMode mode, Rng& rng);

/// Shares proportional to the payload estimates; each at most 1, total at most 1.
std::vector<double> allocate_bandwidth(std::span<const double> payload_estimates, double total_budget);

}  // namespace semfed
