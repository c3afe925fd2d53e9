// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "semfed/errors.h"

namespace semfed {

void UtilityWeights::validate() const {
    if (diversity < 0 || resource < 0 || fairness < 0) throw ConfigError("utility weights must be non-negative");
    if (diversity + resource + fairness <= 0) throw ConfigError("utility weights must not all be zero");
}

void ParticipationHistory::record(std::span<const int> selected) {
    for (int k : selected) ++counts.at(k);
    ++round;
}

std::string_view selection_mode_name(SelectionMode m) {
    switch (m) {
        case SelectionMode::Greedy: return "greedy";
        case SelectionMode::Static: return "static";
        case SelectionMode::Random: return "random";
        case SelectionMode::ResourceOnly: return "resource_only";
        case SelectionMode::SemanticOnly: return "semantic_only";
    }
    return "unknown";
}

SelectionMode parse_selection_mode(std::string_view name) {
    for (auto m : {SelectionMode::Greedy, SelectionMode::Static, SelectionMode::Random, SelectionMode::ResourceOnly,
                   SelectionMode::SemanticOnly}) {
        if (selection_mode_name(m) == name) return m;
    }
    throw ConfigError(fmt::format("unknown selection mode '{}'", name));
}

double fairness(int k, const ParticipationHistory& history) {
    if (history.round < 1) throw DomainError("fairness: round index must be >= 1");
    const int count = history.counts.at(k);
    const int past = history.round - 1;
    if (count < 0 || count > past)
        throw std::logic_error(fmt::format("fairness: client {} selected {} times in {} rounds", k, count, past));
    if (past == 0) return 1.0;
    return 1.0 - static_cast<double>(count) / past;
}

double utility(int k, std::span<const int> selected_so_far, const SimilarityMatrix& sims, double efficiency,
               const ParticipationHistory& history, const UtilityWeights& w) {
    if (std::find(selected_so_far.begin(), selected_so_far.end(), k) != selected_so_far.end())
        throw DomainError(fmt::format("utility: client {} is already selected", k));
    return w.diversity * semantic_diversity(k, selected_so_far, sims) + w.resource * efficiency +
           w.fairness * fairness(k, history);
}

namespace {

// Scores within this relative band are ties, so rescaling the weights cannot
// reorder candidates through rounding noise.
bool better(double a, int ka, double b, int kb) {
    const double tol = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(a - b) <= tol) return ka < kb;
    return a > b;
}

std::vector<int> top_m(const std::vector<int>& candidates, const std::vector<double>& score, int m) {
    // repeated argmax: the tolerant comparison is not a strict weak order
    std::vector<int> picked;
    std::vector<bool> used(score.size(), false);
    const int picks = std::min<int>(m, static_cast<int>(candidates.size()));
    for (int step = 0; step < picks; ++step) {
        int best = -1;
        for (int k : candidates) {
            if (used[k]) continue;
            if (best < 0 || better(score[k], k, score[best], best)) best = k;
        }
        used[best] = true;
        picked.push_back(best);
    }
    return picked;
}

}  // namespace

SelectionOutcome select_clients(const std::vector<bool>& available, int m, const SimilarityMatrix& sims,
                                std::span<const double> efficiencies, const ParticipationHistory& history,
                                const UtilityWeights& w, SelectionMode mode, Rng& rng) {
    if (m < 1) throw DomainError("select_clients: m must be >= 1");
    const auto k_clients = available.size();
    if (efficiencies.size() != k_clients || sims.size() != k_clients || history.counts.size() != k_clients)
        throw DomainError("select_clients: per-client inputs disagree on fleet size");

    SelectionOutcome out;
    out.utility.assign(k_clients, std::numeric_limits<double>::quiet_NaN());
    std::vector<int> candidates;
    for (std::size_t k = 0; k < k_clients; ++k)
        if (available[k]) candidates.push_back(static_cast<int>(k));
    if (candidates.empty()) {
        out.skipped = true;
        return out;
    }

    UtilityWeights weights = w;
    if (mode == SelectionMode::ResourceOnly) weights = {0.0, 1.0, 0.0};
    if (mode == SelectionMode::SemanticOnly) weights = {1.0, 0.0, 0.0};

    auto score_all = [&](std::span<const int> selected) {
        std::vector<double> s(k_clients, std::numeric_limits<double>::quiet_NaN());
        for (int k : candidates) {
            if (std::find(selected.begin(), selected.end(), k) != selected.end()) continue;
            s[k] = utility(k, selected, sims, efficiencies[k], history, weights);
        }
        return s;
    };

    switch (mode) {
        case SelectionMode::Random: {
            std::vector<int> pool = candidates;
            rng.shuffle(pool);
            pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(m)));
            out.selected = pool;
            const auto s = score_all({});
            out.utility = s;
            break;
        }
        case SelectionMode::Static:
        case SelectionMode::ResourceOnly: {
            const auto s = score_all({});
            out.selected = top_m(candidates, s, m);
            out.utility = s;
            break;
        }
        case SelectionMode::Greedy:
        case SelectionMode::SemanticOnly: {
            const int picks = std::min<int>(m, static_cast<int>(candidates.size()));
            std::vector<double> s;
            for (int step = 0; step < picks; ++step) {
                s = score_all(out.selected);
                int best = -1;
                for (int k : candidates) {
                    if (std::isnan(s[k])) continue;
                    if (best < 0 || better(s[k], k, s[best], best)) best = k;
                }
                out.utility[best] = s[best];
                out.selected.push_back(best);
            }
            // unpicked candidates report their utility against the final selection
            s = score_all(out.selected);
            for (int k : candidates)
                if (!std::isnan(s[k])) out.utility[k] = s[k];
            break;
        }
    }
    return out;
}

std::vector<double> allocate_bandwidth(std::span<const double> payload_estimates, double total_budget) {
    if (!(total_budget > 0.0)) throw DomainError("allocate_bandwidth: budget must be positive");
    std::vector<double> shares(payload_estimates.size(), 0.0);
    double total = 0.0;
    for (double p : payload_estimates) {
        if (p < 0.0) throw DomainError("allocate_bandwidth: negative payload estimate");
        total += p;
    }
    if (payload_estimates.empty()) return shares;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        shares[i] = total > 0.0 ? std::min(1.0, payload_estimates[i] / total)
                                : 1.0 / static_cast<double>(shares.size());
    }
    return shares;
}

}  // namespace semfed
