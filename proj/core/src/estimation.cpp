#include "ccgnav/estimation.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ccgnav/errors.hpp"

namespace ccgnav {

namespace {

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

bool is_identity(const Matrix& m) {
    return m.rows() == m.cols() && m.isIdentity(0.0);
}

// Generator data of the one-step input term: (Gamma G_w, Gamma c_w, blocks) or the
// overapprox ball.
struct InputTerm {
    Matrix G;
    Vector c;
    BlockList blocks;
};

InputTerm input_term(const ObstacleSystem& sys, const Matrix& gamma) {
    if (sys.mode == InputMode::Exact) {
        return {gamma * sys.W.G(), gamma * sys.W.c(), sys.W.blocks()};
    }
    const OverapproxInput ov = gamma_overapprox(sys.F, sys.Ts, sys.W);
    return {ov.ball.G(), ov.ball.c(), ov.ball.blocks()};
}

}  // namespace

void ObstacleSystem::validate() const {
    const Eigen::Index nn = n();
    if (F.cols() != nn || E.cols() != nn || C.cols() != nn) {
        throw DimensionError("ObstacleSystem: F must be square and E, C must have n columns");
    }
    if (W.dim() != nn) {
        throw DimensionError("ObstacleSystem: W has dimension " + std::to_string(W.dim()) +
                             ", expected " + std::to_string(nn));
    }
    if (V.dim() != C.rows()) {
        throw DimensionError("ObstacleSystem: V has dimension " + std::to_string(V.dim()) +
                             ", expected " + std::to_string(C.rows()));
    }
    if (!W.is_unconstrained() || !V.is_unconstrained()) {
        throw ConfigError("ObstacleSystem: W and V must not carry equality constraints");
    }
    if (!(Ts > 0.0)) {
        throw ConfigError("ObstacleSystem: sampling period must be positive");
    }
}

Matrix transition_matrix(const Matrix& F, double s) {
    if (F.rows() != F.cols()) {
        throw DimensionError("transition_matrix: F must be square");
    }
    if (s < 0.0) {
        throw DimensionError("transition_matrix: negative time");
    }
    const Matrix scaled = F * s;
    return scaled.exp();
}

Matrix gamma_exact(const Matrix& F, double s) {
    if (F.rows() != F.cols()) {
        throw DimensionError("gamma_exact: F must be square");
    }
    if (s < 0.0) {
        throw DimensionError("gamma_exact: negative time");
    }
    const Eigen::Index n = F.rows();
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = F;
    aug.topRightCorner(n, n).setIdentity();
    aug *= s;
    const Matrix e = aug.exp();
    return e.topRightCorner(n, n);
}

double max_norm_bound(const CCG& w) {
    if (!w.is_unconstrained()) {
        throw ConfigError("max_norm_bound: constrained input sets are not supported");
    }
    double bound = w.c().norm();
    Eigen::Index col = 0;
    for (const auto& blk : w.blocks()) {
        bound += spectral_norm(w.G().middleCols(col, blk.dim));
        col += blk.dim;
    }
    return bound;
}

OverapproxRadius overapprox_radius(const Matrix& F, double s, double wmax) {
    const double nf = spectral_norm(F);
    if (nf < 1e-12) {
        return {s * wmax, wmax};
    }
    return {std::expm1(nf * s) / nf * wmax, std::exp(nf * s) * wmax};
}

OverapproxInput gamma_overapprox(const Matrix& F, double s, const CCG& W) {
    const Eigen::Index n = F.rows();
    const double r = overapprox_radius(F, s, max_norm_bound(W)).radius;
    return {r, CCG::ellipsoid(r * Matrix::Identity(n, n), Vector::Zero(n))};
}

CCG conservative_estimate(const Vector& y, const CCG& V) {
    if (y.size() != V.dim()) {
        throw DimensionError("conservative_estimate: measurement and noise set dimensions differ");
    }
    return affine_map(V, -Matrix::Identity(V.dim(), V.dim()), y);
}

CCG conservative_estimate(const Vector& y, const ObstacleSystem& sys) {
    if (!is_identity(sys.C)) {
        throw ConfigError("conservative_estimate: only full-state measurements (C = I) are supported");
    }
    return conservative_estimate(y, sys.V);
}

CCG measurement_update(const CCG& x, const Vector& y, const ObstacleSystem& sys) {
    return generalized_intersection(x, sys.C, conservative_estimate(y, sys.V));
}

CCG recursive_update(const CCG& prev, const Vector& y, const ObstacleSystem& sys) {
    const Matrix phi = transition_matrix(sys.F, sys.Ts);
    const InputTerm in = input_term(sys, gamma_exact(sys.F, sys.Ts));
    const CCG pred = minkowski_sum(linear_map(prev, phi), CCG(in.G, in.c, in.blocks));
    return measurement_update(pred, y, sys);
}

EstimatorParams initial_params(const ObstacleSystem& sys) {
    sys.validate();
    const Eigen::Index n = sys.n();
    EstimatorParams p;
    p.R1 = Matrix::Identity(n, n);
    p.R2 = Matrix::Zero(n, sys.V.num_generators());
    p.R3 = sys.C;
    p.R4 = sys.V.G();
    p.R5 = -sys.C;
    p.t1 = Vector::Zero(n);
    p.t2 = -sys.V.c();
    p.blocks = sys.V.blocks();
    p.N = 0;
    return p;
}

EstimatorParams advance_params(const EstimatorParams& prev, const ObstacleSystem& sys) {
    const Matrix phi = transition_matrix(sys.F, sys.Ts);
    const InputTerm in = input_term(sys, gamma_exact(sys.F, sys.Ts));
    const Matrix& C = sys.C;
    const Matrix& Gv = sys.V.G();
    const Eigen::Index n = sys.n();
    const Eigen::Index nw = in.G.cols();
    const Eigen::Index nv = Gv.cols();

    EstimatorParams next;
    next.R1 = phi * prev.R1;

    const Matrix phiR2 = phi * prev.R2;
    next.R2 = hstack(hstack(phiR2, in.G), Matrix::Zero(n, nv));

    next.R3 = vstack(prev.R3, Matrix(C * next.R1));

    const Matrix top = hstack(prev.R4, Matrix::Zero(prev.R4.rows(), nw + nv));
    const Matrix bottom = hstack(hstack(Matrix(C * phiR2), Matrix(C * in.G)), Gv);
    next.R4 = vstack(top, bottom);

    next.R5 = vstack(prev.R5, Matrix(-C * next.R1));
    next.t1 = phi * prev.t1 + in.c;
    next.t2 = vstack(prev.t2, Vector(-C * next.t1 - sys.V.c()));
    next.blocks = concat(concat(prev.blocks, in.blocks), sys.V.blocks());
    next.N = prev.N + 1;
    return next;
}

EstimatorParams precompute_params(const ObstacleSystem& sys, int N) {
    if (N < 1) {
        throw ConfigError("precompute_params: horizon must be at least 1, got " + std::to_string(N));
    }
    EstimatorParams p = initial_params(sys);
    for (int i = 0; i < N; ++i) {
        p = advance_params(p, sys);
    }
    return p;
}

CCG explicit_estimate(const EstimatorParams& params, const CCG& xbar, const Vector& y_window) {
    if (!xbar.is_unconstrained()) {
        throw ConfigError("explicit_estimate: initial set must be unconstrained");
    }
    if (y_window.size() != params.t2.size()) {
        throw DimensionError("explicit_estimate: measurement window has " +
                             std::to_string(y_window.size()) + " entries, expected " +
                             std::to_string(params.t2.size()));
    }
    if (xbar.dim() != params.R1.cols()) {
        throw DimensionError("explicit_estimate: initial set dimension mismatch");
    }
    Matrix G = hstack(Matrix(params.R1 * xbar.G()), params.R2);
    Vector c = params.R1 * xbar.c() + params.t1;
    Matrix A = hstack(Matrix(params.R3 * xbar.G()), params.R4);
    Vector b = params.R5 * xbar.c() + params.t2 + y_window;
    return CCG(std::move(G), std::move(c), std::move(A), std::move(b),
               concat(xbar.blocks(), params.blocks));
}

FiniteHorizonEstimator::FiniteHorizonEstimator(ObstacleSystem sys, EstimatorParams params)
    : sys_(std::move(sys)), params_(std::move(params)) {
    sys_.validate();
    if (!is_identity(sys_.C)) {
        throw ConfigError("FiniteHorizonEstimator: conservative phase requires C = I");
    }
}

CCG FiniteHorizonEstimator::update(const Vector& y) {
    window_.push_back(y);
    if (static_cast<int>(window_.size()) > params_.N + 1) {
        window_.pop_front();
    }
    if (!steady()) {
        return conservative_estimate(y, sys_.V);
    }
    Vector stacked(static_cast<Eigen::Index>(window_.size()) * y.size());
    Eigen::Index row = 0;
    for (const auto& yi : window_) {
        stacked.segment(row, yi.size()) = yi;
        row += yi.size();
    }
    return explicit_estimate(params_, conservative_estimate(window_.front(), sys_.V), stacked);
}

}  // namespace ccgnav
