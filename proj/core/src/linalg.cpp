#include "ccgnav/linalg.hpp"

#include "ccgnav/errors.hpp"

namespace ccgnav {

SvdFactors svd_factor(const Matrix& a) {
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    SvdFactors out;
    if (rows == 0 || cols == 0) {
        out.pinv = Matrix::Zero(cols, rows);
        out.nullspace = Matrix::Identity(cols, cols);
        return out;
    }

    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cutoff = kRankTolerance * sv(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }

    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    out.rank = rank;
    out.pinv = v.leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal() *
               u.leftCols(rank).transpose();
    out.nullspace = v.rightCols(cols - rank);
    return out;
}

Eigen::Index numerical_rank(const Matrix& a) {
    if (a.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& sv = svd.singularValues();
    const double cutoff = kRankTolerance * sv(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }
    return rank;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.cols() != bottom.cols()) {
        throw DimensionError("vstack: column counts differ");
    }
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

Vector vstack(const Vector& top, const Vector& bottom) {
    Vector out(top.size() + bottom.size());
    out.head(top.size()) = top;
    out.tail(bottom.size()) = bottom;
    return out;
}

Matrix hstack(const Matrix& left, const Matrix& right) {
    if (left.rows() != right.rows()) {
        throw DimensionError("hstack: row counts differ");
    }
    Matrix out(left.rows(), left.cols() + right.cols());
    out.leftCols(left.cols()) = left;
    out.rightCols(right.cols()) = right;
    return out;
}

}  // namespace ccgnav
