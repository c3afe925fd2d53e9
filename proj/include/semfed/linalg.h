// Copyright (c) 2026, The semfed Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "semfed/matrix.h"

namespace semfed {

struct SymmetricEigen {
    std::vector<double> values;  ///< descending
    Matrix vectors;              ///< column i pairs with values[i]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvector signs
/// are normalized so the largest-magnitude entry of each column is positive.
SymmetricEigen symmetric_eigen(const Matrix& a, int max_sweeps = 100);

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration. The Rayleigh quotient approaches from below.
double largest_eigenvalue(const Matrix& a, int iterations = 200);

/// Solves A X = B for symmetric positive definite A (Cholesky).
/// Throws DomainError if A is not positive definite.
Matrix cholesky_solve(const Matrix& a, const Matrix& b);

}  // namespace semfed
