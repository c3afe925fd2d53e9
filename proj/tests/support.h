// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures for the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "semfed/matrix.h"
#include "semfed/rng.h"

namespace semfed::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& x : v) {
        x = rng.uniform();
        total += x;
    }
    for (double& x : v) x /= total;
    return v;
}

struct FdResult {
    double worst_rel = 0.0;
    std::string worst_where;
};

// Central differences over every entry of `param`. Relative error is
// |a - n| / max(|a|, |n|, 1e-6); the floor keeps entries whose true gradient
// is zero from dividing roundoff by roundoff.
inline void check_block(const std::string& name, Matrix& param, const Matrix& analytic,
                        const std::function<double()>& loss, FdResult& out, double h = 1e-5) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        double& x = param.data()[i];
        const double saved = x;
        x = saved + h;
        const double up = loss();
        x = saved - h;
        const double down = loss();
        x = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic.data()[i];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        if (rel > out.worst_rel) {
            out.worst_rel = rel;
            out.worst_where = name + "[" + std::to_string(i) + "] analytic " + std::to_string(a) + " numeric " +
                              std::to_string(numeric);
        }
    }
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        Rng rng(std::hash<std::string>{}(tag));
        path_ = std::filesystem::temp_directory_path() /
                ("semfed_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007ULL));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace semfed::testing
