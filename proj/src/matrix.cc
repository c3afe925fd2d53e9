// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#include "semfed/matrix.h"

#include <algorithm>
#include <cmath>

namespace semfed {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    // four independent partial sums let the compiler vectorize; the
    // summation order is fixed, so results stay reproducible
    const std::size_t n = a.size();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void matvec(const Matrix& a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == a.cols() && y.size() == a.rows());
    const std::size_t rows = a.rows();
    const std::size_t n = a.cols();
    const double* xp = x.data();
    std::size_t r = 0;
    for (; r + 2 <= rows; r += 2) {
        const double* a0 = a.data().data() + r * n;
        const double* a1 = a0 + n;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        double t0 = 0.0, t1 = 0.0, t2 = 0.0, t3 = 0.0;
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            s0 += a0[i] * xp[i];
            s1 += a0[i + 1] * xp[i + 1];
            s2 += a0[i + 2] * xp[i + 2];
            s3 += a0[i + 3] * xp[i + 3];
            t0 += a1[i] * xp[i];
            t1 += a1[i + 1] * xp[i + 1];
            t2 += a1[i + 2] * xp[i + 2];
            t3 += a1[i + 3] * xp[i + 3];
        }
        for (; i < n; ++i) {
            s0 += a0[i] * xp[i];
            t0 += a1[i] * xp[i];
        }
        y[r] = (s0 + s1) + (s2 + s3);
        y[r + 1] = (t0 + t1) + (t2 + t3);
    }
    for (; r < rows; ++r) y[r] = dot(a.row(r), x);
}

void matvec_transposed(const Matrix& a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == a.rows() && y.size() == a.cols());
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) axpy(x[r], a.row(r), y);
}

void add_outer(Matrix& a, double alpha, std::span<const double> u, std::span<const double> v) {
    assert(u.size() == a.rows() && v.size() == a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        if (u[r] != 0.0) axpy(alpha * u[r], v, a.row(r));
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    assert(a.cols() == b.rows());
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik != 0.0) axpy(aik, b.row(k), out);
        }
    }
    return c;
}

void softmax_inplace(std::span<double> v) {
    if (v.empty()) return;
    const double mx = *std::max_element(v.begin(), v.end());
    double total = 0.0;
    for (auto& x : v) {
        x = std::exp(x - mx);
        total += x;
    }
    for (auto& x : v) x /= total;
}

}  // namespace semfed
