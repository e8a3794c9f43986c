#include "ccgnav/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccgnav/errors.hpp"

namespace ccgnav {

namespace {

constexpr double kDegenerate = 1e-12;

// exp(x^2) erfc(x), with an asymptotic series where erfc underflows.
double erfcx(double x) {
    if (x < 20.0) {
        return std::exp(x * x) * std::erfc(x);
    }
    const double inv2 = 1.0 / (x * x);
    const double series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2;
    return series / (x * std::sqrt(M_PI));
}

double fd_step(double x) {
    return 1e-5 * std::max(1.0, std::abs(x));
}

}  // namespace

Vector gravity_drift(const Vector& p) {
    return std::pow(p.norm() + 0.1, -3.0) * p;
}

AgentModel AgentModel::single_integrator(Eigen::Index dim) {
    AgentModel m;
    m.order = Order::First;
    m.p_dim = dim;
    m.z_dim = dim;
    m.u_dim = 0;
    m.f = [dim](const Vector&) { return Vector::Zero(dim).eval(); };
    m.G = [dim](const Vector&) { return Matrix::Identity(dim, dim).eval(); };
    return m;
}

AgentModel AgentModel::gravity_second_order(Eigen::Index dim) {
    AgentModel m = single_integrator(dim);
    m.order = Order::Second;
    m.u_dim = dim;
    m.f1 = [](const Vector& p, const Vector&) { return gravity_drift(p); };
    m.G1 = [dim](const Vector&, const Vector&) { return Matrix::Identity(dim, dim).eval(); };
    return m;
}

FilterResult halfspace_filter(const Vector& nominal, const Vector& a, double rhs) {
    FilterResult r;
    r.value = nominal;
    const double slack = a.dot(nominal) - rhs;
    if (slack >= 0.0) {
        return r;
    }
    const double nrm2 = a.squaredNorm();
    if (std::sqrt(nrm2) < kDegenerate) {
        r.degenerate = true;
        return r;
    }
    r.mu = -slack / nrm2;
    r.active = true;
    r.value = nominal + r.mu * a;
    return r;
}

void first_order_constraint(const BarrierEval& hk, const AgentModel& agent, double alpha_bar,
                            const Vector& p, Vector& a, double& rhs) {
    a = agent.G(p).transpose() * hk.g_p;
    rhs = -alpha_bar * hk.h - hk.g_p.dot(agent.f(p)) - hk.g_t;
}

FilterResult filter_first_order(const BarrierEval& hk, const AgentModel& agent,
                                const ControlConfig& cfg, const Vector& p, const Vector& k_d) {
    Vector a;
    double rhs = 0.0;
    first_order_constraint(hk, agent, cfg.alpha_bar, p, a, rhs);
    return halfspace_filter(k_d, a, rhs);
}

Vector gaussian_centroid(const Vector& a, double b_c, double varsigma, bool* degenerate) {
    const double na = a.norm();
    if (degenerate != nullptr) {
        *degenerate = na < kDegenerate;
    }
    if (na < kDegenerate) {
        return Vector::Zero(a.size());
    }
    const double s = std::sqrt(varsigma);
    const double tau = b_c / na / s;
    // phi(tau) / Q(tau) = sqrt(2 / pi) / erfcx(tau / sqrt 2)
    const double ratio = std::sqrt(2.0 / M_PI) / erfcx(tau / std::sqrt(2.0));
    return (s * ratio / na) * a;
}

TopControl smooth_top_controller(const BarrierEval& hk, const AgentModel& agent,
                                 const ControlConfig& cfg, const Vector& p) {
    Vector a;
    double b_c = 0.0;
    first_order_constraint(hk, agent, cfg.alpha_bar, p, a, b_c);
    TopControl out;
    out.z = gaussian_centroid(a, b_c, cfg.varsigma, &out.degenerate);
    return out;
}

ControllerJacobian controller_jacobian(const ControllerFn& k, const Vector& p, double t) {
    const Vector k0 = k(p, t);
    ControllerJacobian J;
    J.dp.resize(k0.size(), p.size());
    Vector pp = p;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double h = fd_step(p[i]);
        pp[i] = p[i] + h;
        const Vector kp = k(pp, t);
        pp[i] = p[i] - h;
        const Vector km = k(pp, t);
        pp[i] = p[i];
        J.dp.col(i) = (kp - km) / (2.0 * h);
    }
    const double ht = fd_step(t);
    J.dt = (k(p, t + ht) - k(p, t - ht)) / (2.0 * ht);
    return J;
}

BacksteppingValue backstepping_barrier(const BarrierFn& hk, const ControllerFn& kk, double sigma,
                                       const Vector& p, const Vector& z, double t) {
    const BarrierEval h = hk(p, t);
    const Vector e = z - kk(p, t);
    const ControllerJacobian J = controller_jacobian(kk, p, t);
    BacksteppingValue out;
    out.h1 = h.h - e.squaredNorm() / (2.0 * sigma);
    out.grad_p = h.g_p + J.dp.transpose() * e / sigma;
    out.grad_z = -e / sigma;
    out.dt = h.g_t + e.dot(J.dt) / sigma;
    return out;
}

double select_sigma(double hk, const Vector& z, const Vector& k, double sigma_bar) {
    if (!(hk > 0.0)) {
        throw SafetyViolation("select_sigma: h_k = " + std::to_string(hk) + " is not positive");
    }
    return std::max(sigma_bar, (z - k).squaredNorm() / (2.0 * hk));
}

FilterResult filter_second_order(const BacksteppingValue& h1, const AgentModel& agent,
                                 const ControlConfig& cfg, const Vector& p, const Vector& z,
                                 const Vector& k_d1) {
    const Vector a = agent.G1(p, z).transpose() * h1.grad_z;
    const double rhs = -cfg.alpha1_bar * h1.h1 - h1.grad_p.dot(agent.f(p) + agent.G(p) * z) -
                       h1.grad_z.dot(agent.f1(p, z)) - h1.dt;
    return halfspace_filter(k_d1, a, rhs);
}

}  // namespace ccgnav
