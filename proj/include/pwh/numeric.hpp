#pragma once

#include <Eigen/Dense>

#include "pwh/errors.hpp"

// Dense numeric kernel shared by the other modules. All matrices are small
// (realistic grids stay below ~50 states), so everything runs through full
// dense factorizations.

namespace pwh {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace num {

/// Relative pivot floor used by every positive-definiteness decision:
/// 1e-12 * max(1, largest diagonal entry).
double pd_tolerance(const Mat& a);

struct CholeskyVerdict {
    bool positive_definite = false;
    Mat factor;  // lower triangular; empty unless positive_definite
};

/// Cholesky factorization with an explicit pivot floor: the matrix counts as
/// positive definite only when every pivot exceeds pd_tolerance(a).
/// Requires a symmetric with finite entries.
CholeskyVerdict cholesky_pd(const Mat& a);

struct EigExtremes {
    double min = 0.0;
    double max = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix by full diagonalization.
EigExtremes sym_eig_extremes(const Mat& a);

/// Smallest eigenvalue of a symmetric matrix.
double sym_min_eig(const Mat& a);

/// Solve a x = b for square, numerically nonsingular a. The solution is
/// residual-checked against 1e-10 * (|a| |x| + |b|).
Vec solve_linear(const Mat& a, const Vec& b);

/// Largest real part over the eigenvalues of a square (not necessarily
/// symmetric) matrix. Intended for small dense matrices (n <= ~50).
double spectral_abscissa(const Mat& a);

bool is_finite(const Mat& a);
bool is_symmetric(const Mat& a, double tol = 0.0);

/// True when all off-diagonal entries are at most 1e-14 * max(1, |a|_max).
bool is_diagonal(const Mat& a);

}  // namespace num
}  // namespace pwh
