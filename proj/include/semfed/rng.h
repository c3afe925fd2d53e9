// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the distribution transforms live here because the
// std:: distributions are implementation-defined and would make runs differ
// across standard libraries.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace semfed {

/// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    /// Independent child stream; the parent is not advanced.
    Rng fork(std::uint64_t stream) const;
    Rng fork(std::string_view label) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Unbiased (rejection sampling).
    std::uint64_t below(std::uint64_t n);
    int uniform_int(int lo, int hi_inclusive);

    bool bernoulli(double p) { return uniform() < p; }
    double normal();
    double gamma(double shape);
    std::vector<double> dirichlet(double alpha, std::size_t k);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    explicit Rng(std::mt19937_64 engine) : engine_(std::move(engine)) {}

    std::mt19937_64 engine_;
    std::uint64_t seed_material_ = engine_();
};

}  // namespace semfed
