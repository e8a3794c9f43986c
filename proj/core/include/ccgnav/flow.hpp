#pragma once

#include "ccgnav/ccg.hpp"
#include "ccgnav/estimation.hpp"
#include "ccgnav/unconstrained.hpp"

namespace ccgnav {

/// O (+) (-P): positions of the agent's reference point at which the body P touches O.
CCG enlarge_body(const CCG& obstacle_body, const CCG& agent_body);

/// Flow parameters at one time instant.
struct FlowSample {
    Matrix G;
    Vector c;
    Matrix G_dot;
    Vector c_dot;
    Matrix A;
    Vector b;
    BlockList blocks;

    CCG ccg() const { return CCG(G, c, A, b, blocks); }
};

/// Equality-free form at one time instant together with its time derivatives.
struct ReducedFlowSample {
    UnconstrainedForm form;
    Matrix Gt_dot;
    Vector ct_dot;
};

/// Estimated obstacle over [t_k, t_k + Ts]: E Phi(s) X + E Gamma(s) W (+) O_body, s = t - t_k.
/// Generator order is (estimate, input, body); constraints are block-diagonal in
/// (estimate, body) and constant over the interval, so their factorization is cached.
class ObstacleFlow {
public:
    ObstacleFlow(ObstacleSystem sys, CCG estimate, CCG enlarged_body, double t_k);

    double t_begin() const { return t_k_; }
    double t_end() const { return t_k_ + sys_.Ts; }
    const ObstacleSystem& system() const { return sys_; }
    const CCG& estimate() const { return estimate_; }
    const CCG& body() const { return body_; }

    /// Throws DimensionError when t lies outside [t_k, t_k + Ts].
    FlowSample eval(double t) const;
    ReducedFlowSample reduced(double t) const;
    CCG at(double t) const { return eval(t).ccg(); }

    /// Whether the reduced generator matrix has full row rank at t.
    bool full_row_rank(double t) const;

private:
    ObstacleSystem sys_;
    CCG estimate_;
    CCG body_;
    double t_k_;
    double wmax_ = 0.0;
    Matrix input_shape_;  // overapprox mode: (E E^T)^{1/2}
    Matrix A_;
    Vector b_;
    BlockList blocks_;
    UnconstrainedForm base_;
};

FlowSample flow_eval(const ObstacleFlow& flow, double t);

}  // namespace ccgnav
