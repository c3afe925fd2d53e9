// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Client hardware: static capacities, resource efficiency, and the mutable
// battery / energy state charged once per round.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "semfed/rng.h"

namespace semfed {

enum class Tier { Mobile, Laptop, Desktop };

std::string_view tier_name(Tier t);
Tier parse_tier(std::string_view name);

struct ResourceProfile {
    double memory_mb = 0.0;
    double compute_units = 0.0;       ///< abstract ops/second scale
    double battery_pct = 100.0;
    double network_reliability = 1.0; ///< probability of being reachable in a round
    Tier tier = Tier::Mobile;
};

struct FleetMax {
    double memory_mb = 0.0;
    double compute_units = 0.0;
    double battery_pct = 100.0;
};

struct EfficiencyWeights {
    double memory = 0.25;
    double compute = 0.25;
    double battery = 0.25;
    double network = 0.25;

    void validate() const;
};

struct DeviceState {
    double battery_pct = 100.0;
    double cumulative_energy = 0.0;
    double last_compute_time_s = 0.0;
    bool available_this_round = false;
};

struct EnergyModel {
    double energy_per_compute_second = 0.2;
    double energy_per_kilobyte = 0.001;
    double battery_pct_per_energy_unit = 0.05;
};

/// Per-tier defaults; network reliability is drawn from [reliability_min, reliability_max].
struct TierSpec {
    double memory_mb = 0.0;
    double compute_units = 0.0;
    double battery_pct = 100.0;
    double reliability_min = 1.0;
    double reliability_max = 1.0;
};

struct FleetSpec {
    int mobile = 5;
    int laptop = 3;
    int desktop = 2;
    TierSpec mobile_spec{2048.0, 1.0, 100.0, 0.7, 0.9};
    TierSpec laptop_spec{8192.0, 4.0, 100.0, 0.85, 0.97};
    TierSpec desktop_spec{16384.0, 10.0, 100.0, 0.99, 0.99};
    double jitter = 0.1;  ///< relative +/- jitter on memory and compute

    int total() const { return mobile + laptop + desktop; }
    const TierSpec& spec(Tier t) const;
};

/// Clients are ordered mobile, then laptop, then desktop.
std::vector<ResourceProfile> make_fleet(const FleetSpec& spec, Rng& rng);

FleetMax fleet_max(const std::vector<ResourceProfile>& fleet);

double resource_efficiency(const ResourceProfile& profile, const FleetMax& max, const EfficiencyWeights& w);

bool sample_availability(const ResourceProfile& profile, Rng& rng);

/// Returns the charged state; battery is floored at zero.
DeviceState charge_round_cost(const DeviceState& state, double compute_time_s, double bytes_sent,
                              const EnergyModel& model);

/// doc_count * model_param_count * kappa / compute_units.
double estimate_compute_time(double doc_count, double model_param_count, const ResourceProfile& profile,
                             double kappa);

}  // namespace semfed
