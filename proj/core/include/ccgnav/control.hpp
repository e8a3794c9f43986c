#pragma once

#include <functional>

#include "ccgnav/linalg.hpp"

namespace ccgnav {

/// Control-affine agent
///   first order:  p' = f(p) + G(p) z
///   second order: p' = f(p) + G(p) z,  z' = f1(p, z) + G1(p, z) u.
struct AgentModel {
    enum class Order { First, Second };

    Order order = Order::First;
    Eigen::Index p_dim = 2;
    Eigen::Index z_dim = 2;
    Eigen::Index u_dim = 0;
    std::function<Vector(const Vector&)> f;
    std::function<Matrix(const Vector&)> G;
    std::function<Vector(const Vector&, const Vector&)> f1;
    std::function<Matrix(const Vector&, const Vector&)> G1;

    /// p' = z.
    static AgentModel single_integrator(Eigen::Index dim);

    /// p' = z, z' = (|p| + 0.1)^-3 p + u.
    static AgentModel gravity_second_order(Eigen::Index dim);
};

/// (|p| + 0.1)^-3 p.
Vector gravity_drift(const Vector& p);

struct ControlConfig {
    double alpha_bar = 10.0;   // alpha(s) = alpha_bar s
    double alpha1_bar = 10.0;  // alpha_1(s) = alpha1_bar s
    double varsigma = 0.1;     // centroid temperature
    double sigma_bar = 10.0;
};

/// Value and (p, t)-gradient of a barrier at one point.
struct BarrierEval {
    double h = 0.0;
    Vector g_p;
    double g_t = 0.0;
};

using BarrierFn = std::function<BarrierEval(const Vector& p, double t)>;
using ControllerFn = std::function<Vector(const Vector& p, double t)>;

/// Outcome of a single-constraint safety filter.
struct FilterResult {
    Vector value;
    double mu = 0.0;
    bool active = false;
    bool degenerate = false;
};

/// argmin |x - nominal|^2 subject to a^T x >= rhs, in closed form. A violated constraint
/// with |a| < 1e-12 is relaxed: the nominal is returned with `degenerate` set.
FilterResult halfspace_filter(const Vector& nominal, const Vector& a, double rhs);

/// Half-space { z : a^T z >= rhs } encoding h' >= -alpha(h) for a first-order agent.
void first_order_constraint(const BarrierEval& hk, const AgentModel& agent, double alpha_bar,
                            const Vector& p, Vector& a, double& rhs);

FilterResult filter_first_order(const BarrierEval& hk, const AgentModel& agent,
                                const ControlConfig& cfg, const Vector& p, const Vector& k_d);

/// Mean of exp(-|z|^2 / (2 varsigma)) restricted to { z : a^T z >= b_c }.
/// Returns 0 and sets `degenerate` when |a| < 1e-12.
Vector gaussian_centroid(const Vector& a, double b_c, double varsigma, bool* degenerate = nullptr);

struct TopControl {
    Vector z;
    bool degenerate = false;
};

TopControl smooth_top_controller(const BarrierEval& hk, const AgentModel& agent,
                                 const ControlConfig& cfg, const Vector& p);

/// Central differences of k in p and t with step 1e-5 max(1, |x|).
struct ControllerJacobian {
    Matrix dp;
    Vector dt;
};
ControllerJacobian controller_jacobian(const ControllerFn& k, const Vector& p, double t);

/// h1 = h_k - |z - k|^2 / (2 sigma) with its gradients.
struct BacksteppingValue {
    double h1 = 0.0;
    Vector grad_p;
    Vector grad_z;
    double dt = 0.0;
};

BacksteppingValue backstepping_barrier(const BarrierFn& hk, const ControllerFn& kk, double sigma,
                                       const Vector& p, const Vector& z, double t);

/// max(sigma_bar, |z - k|^2 / (2 h_k)). Throws SafetyViolation for h_k <= 0.
double select_sigma(double hk, const Vector& z, const Vector& k, double sigma_bar);

FilterResult filter_second_order(const BacksteppingValue& h1, const AgentModel& agent,
                                 const ControlConfig& cfg, const Vector& p, const Vector& z,
                                 const Vector& k_d1);

}  // namespace ccgnav
