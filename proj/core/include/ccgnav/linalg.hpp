#pragma once

#include <Eigen/Dense>

namespace ccgnav {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative singular-value threshold below which a direction counts as rank-deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Moore-Penrose pseudoinverse and an orthonormal null-space basis of a matrix.
struct SvdFactors {
    Matrix pinv;       // cols x rows
    Matrix nullspace;  // cols x (cols - rank), orthonormal columns
    Eigen::Index rank = 0;
};

/// SVD-based factorization of `a`. Singular values below kRankTolerance * sigma_max are
/// treated as zero. An empty (0-row) matrix yields an empty pseudoinverse and the identity
/// as null-space basis.
SvdFactors svd_factor(const Matrix& a);

/// Numerical rank with the same relative tolerance as svd_factor.
Eigen::Index numerical_rank(const Matrix& a);

/// Block-diagonal concatenation.
Matrix block_diag(const Matrix& a, const Matrix& b);

/// Stacks `top` over `bottom`; both must have equal column counts.
Matrix vstack(const Matrix& top, const Matrix& bottom);
Vector vstack(const Vector& top, const Vector& bottom);

/// Places `left` next to `right`; both must have equal row counts.
Matrix hstack(const Matrix& left, const Matrix& right);

}  // namespace ccgnav
