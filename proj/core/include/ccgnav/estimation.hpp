#pragma once

#include <deque>

#include "ccgnav/ccg.hpp"

namespace ccgnav {

enum class InputMode {
    Exact,       // w piecewise constant over each sampling interval
    Overapprox,  // w only norm bounded; Gamma W replaced by a scaled Euclidean ball
};

/// Linear obstacle model x' = F x + w, position E x, measurement y = C x + v,
/// w in W and v in V, sampled every Ts seconds.
struct ObstacleSystem {
    Matrix F;
    Matrix E;
    Matrix C;
    CCG W;
    CCG V;
    InputMode mode = InputMode::Exact;
    double Ts = 0.1;

    Eigen::Index n() const { return F.rows(); }
    Eigen::Index p() const { return E.rows(); }
    Eigen::Index y() const { return C.rows(); }

    /// Throws DimensionError / ConfigError when the model is malformed.
    void validate() const;
};

/// exp(F s) by scaling and squaring.
Matrix transition_matrix(const Matrix& F, double s);

/// Integral of exp(F tau) over [0, s], read off exp([[F, I], [0, 0]] s).
Matrix gamma_exact(const Matrix& F, double s);

/// Upper bound of |w| over an unconstrained CCG: |c| + sum of the blocks' largest singular
/// values. Exact for a single ball centered at the origin.
double max_norm_bound(const CCG& w);

/// Radius (exp(|F| s) - 1) / |F| * wmax and its derivative in s, |F| the induced 2-norm.
struct OverapproxRadius {
    double radius = 0.0;
    double rate = 0.0;
};
OverapproxRadius overapprox_radius(const Matrix& F, double s, double wmax);

/// Scaled ball radius * B_n replacing Gamma(s) W in overapprox mode.
struct OverapproxInput {
    double radius = 0.0;
    CCG ball;
};
OverapproxInput gamma_overapprox(const Matrix& F, double s, const CCG& W);

/// y - V. Requires C = identity in `sys` (throws ConfigError otherwise).
CCG conservative_estimate(const Vector& y, const ObstacleSystem& sys);
CCG conservative_estimate(const Vector& y, const CCG& V);

/// X cap_C (y - V).
CCG measurement_update(const CCG& x, const Vector& y, const ObstacleSystem& sys);

/// (Phi X_prev (+) Gamma W) cap_C (y - V), with Gamma W replaced by the overapprox ball in
/// overapprox mode.
CCG recursive_update(const CCG& prev, const Vector& y, const ObstacleSystem& sys);

/// Precomputed affine structure of the N-step estimate.
struct EstimatorParams {
    Matrix R1, R2, R3, R4, R5;
    Vector t1, t2;
    BlockList blocks;  // noise_0, input_1, noise_1, ..., input_N, noise_N
    int N = 0;
};

/// Recursion state before any propagation step (horizon 0).
EstimatorParams initial_params(const ObstacleSystem& sys);

/// One iteration of the parameter recursion.
EstimatorParams advance_params(const EstimatorParams& prev, const ObstacleSystem& sys);

/// N iterations starting from initial_params. Throws ConfigError for N < 1.
EstimatorParams precompute_params(const ObstacleSystem& sys, int N);

/// Estimate from an unconstrained initial set X and the stacked window y_{k-N}, ..., y_k.
CCG explicit_estimate(const EstimatorParams& params, const CCG& xbar, const Vector& y_window);

/// Finite-horizon estimator: conservative estimate while fewer than N+1 measurements are
/// available, explicit N-step estimate afterwards.
class FiniteHorizonEstimator {
public:
    FiniteHorizonEstimator(ObstacleSystem sys, EstimatorParams params);

    /// Feeds y_k and returns the estimate of x_k.
    CCG update(const Vector& y);

    bool steady() const { return static_cast<int>(window_.size()) == params_.N + 1; }
    const EstimatorParams& params() const { return params_; }
    const ObstacleSystem& system() const { return sys_; }

private:
    ObstacleSystem sys_;
    EstimatorParams params_;
    std::deque<Vector> window_;
};

}  // namespace ccgnav
