// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/device.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "semfed/errors.h"

namespace semfed {

std::string_view tier_name(Tier t) {
    switch (t) {
        case Tier::Mobile: return "mobile";
        case Tier::Laptop: return "laptop";
        case Tier::Desktop: return "desktop";
    }
    return "unknown";
}

Tier parse_tier(std::string_view name) {
    if (name == "mobile") return Tier::Mobile;
    if (name == "laptop") return Tier::Laptop;
    if (name == "desktop") return Tier::Desktop;
    throw ConfigError(fmt::format("unknown tier '{}'", name));
}

void EfficiencyWeights::validate() const {
    if (memory < 0 || compute < 0 || battery < 0 || network < 0)
        throw ConfigError("efficiency weights must be non-negative");
    if (std::abs(memory + compute + battery + network - 1.0) > 1e-9)
        throw ConfigError("efficiency weights must sum to 1");
}

const TierSpec& FleetSpec::spec(Tier t) const {
    switch (t) {
        case Tier::Mobile: return mobile_spec;
        case Tier::Laptop: return laptop_spec;
        case Tier::Desktop: return desktop_spec;
    }
    return mobile_spec;
}

std::vector<ResourceProfile> make_fleet(const FleetSpec& spec, Rng& rng) {
    if (spec.mobile < 0 || spec.laptop < 0 || spec.desktop < 0 || spec.total() < 1)
        throw ConfigError("fleet: tier counts must be non-negative and sum to at least 1");
    if (spec.jitter < 0.0 || spec.jitter >= 1.0) throw ConfigError("fleet.jitter must lie in [0, 1)");

    std::vector<ResourceProfile> fleet;
    auto add = [&](Tier tier, int count) {
        const TierSpec& ts = spec.spec(tier);
        if (ts.memory_mb <= 0 || ts.compute_units <= 0)
            throw ConfigError(fmt::format("fleet.{}: capacities must be positive", tier_name(tier)));
        if (ts.reliability_min < 0 || ts.reliability_max > 1 || ts.reliability_min > ts.reliability_max)
            throw ConfigError(fmt::format("fleet.{}: need 0 <= reliability_min <= reliability_max <= 1",
                                          tier_name(tier)));
        for (int i = 0; i < count; ++i) {
            ResourceProfile p;
            p.tier = tier;
            p.memory_mb = ts.memory_mb * (1.0 + rng.uniform(-spec.jitter, spec.jitter));
            p.compute_units = ts.compute_units * (1.0 + rng.uniform(-spec.jitter, spec.jitter));
            p.battery_pct = std::clamp(ts.battery_pct, 0.0, 100.0);
            p.network_reliability = rng.uniform(ts.reliability_min, ts.reliability_max);
            fleet.push_back(p);
        }
    };
    add(Tier::Mobile, spec.mobile);
    add(Tier::Laptop, spec.laptop);
    add(Tier::Desktop, spec.desktop);
    return fleet;
}

FleetMax fleet_max(const std::vector<ResourceProfile>& fleet) {
    FleetMax m;
    for (const auto& p : fleet) {
        m.memory_mb = std::max(m.memory_mb, p.memory_mb);
        m.compute_units = std::max(m.compute_units, p.compute_units);
    }
    // battery is already a percentage
    m.battery_pct = 100.0;
    return m;
}

double resource_efficiency(const ResourceProfile& profile, const FleetMax& max, const EfficiencyWeights& w) {
    if (max.memory_mb <= 0 || max.compute_units <= 0 || max.battery_pct <= 0)
        throw DomainError("resource_efficiency: fleet maxima must be positive");
    return w.memory * profile.memory_mb / max.memory_mb + w.compute * profile.compute_units / max.compute_units +
           w.battery * profile.battery_pct / max.battery_pct + w.network * profile.network_reliability;
}

bool sample_availability(const ResourceProfile& profile, Rng& rng) {
    // Always consume one draw so stream positions do not depend on N_k.
    const double u = rng.uniform();
    return u < profile.network_reliability;
}

DeviceState charge_round_cost(const DeviceState& state, double compute_time_s, double bytes_sent,
                              const EnergyModel& model) {
    if (compute_time_s < 0.0 || bytes_sent < 0.0)
        throw DomainError("charge_round_cost: compute time and bytes must be non-negative");
    DeviceState next = state;
    const double energy = model.energy_per_compute_second * compute_time_s +
                          model.energy_per_kilobyte * (bytes_sent / 1024.0);
    next.cumulative_energy += energy;
    next.battery_pct = std::max(0.0, state.battery_pct - model.battery_pct_per_energy_unit * energy);
    return next;
}

double estimate_compute_time(double doc_count, double model_param_count, const ResourceProfile& profile,
                             double kappa) {
    if (profile.compute_units <= 0.0) throw DomainError("estimate_compute_time: compute_units must be positive");
    return doc_count * model_param_count * kappa / profile.compute_units;
}

}  // namespace semfed
