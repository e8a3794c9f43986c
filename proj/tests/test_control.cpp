#include <doctest.h>

#include <cmath>
#include <random>

#include <ccgnav/barrier.hpp>
#include <ccgnav/control.hpp>
#include <ccgnav/errors.hpp>

#include "oracles.hpp"

using namespace ccgnav;
using namespace ccgnav::test;

namespace {

// Drifting, non-identity actuated first-order agent.
AgentModel skewed_agent() {
    AgentModel m = AgentModel::single_integrator(2);
    m.f = [](const Vector& p) { return Vector(Eigen::Vector2d(0.3 * p[1], -0.2 * p[0])); };
    m.G = [](const Vector& p) {
        Matrix g(2, 2);
        g << 1.0, 0.2 * p[0], -0.1, 1.5;
        return g;
    };
    return m;
}

BarrierEval random_eval(std::mt19937_64& rng) {
    return {uniform(rng, -1.0, 1.0), random_vector(2, rng), gaussian(rng)};
}

// Barrier of a ball translating with velocity v, through its linear model at (p, t).
struct MovingBall {
    Vector v = Eigen::Vector2d(0.4, -0.2);
    double r = 0.8;

    BarrierEval operator()(const Vector& p, double t) const {
        const Vector c = v * t;
        const Vector d = p - c;
        // Signed distance to a ball: smooth away from the center.
        return {d.norm() - r, d / d.norm(), -v.dot(d / d.norm())};
    }
};

}  // namespace

TEST_CASE("first-order filter") {
    const AgentModel agent = AgentModel::single_integrator(2);
    ControlConfig cfg;
    SUBCASE("nominal kept when safe") {
        const BarrierEval hk{1.0, Eigen::Vector2d(1, 0), 0.0};
        const Vector kd = Eigen::Vector2d(0.5, -2.0);
        const FilterResult r = filter_first_order(hk, agent, cfg, Vector::Zero(2), kd);
        CHECK(r.value == kd);
        CHECK_FALSE(r.active);
        CHECK(r.mu == 0.0);
    }
    SUBCASE("projection onto the boundary") {
        const BarrierEval hk{0.0, Eigen::Vector2d(1, 0), 0.0};
        const FilterResult r =
            filter_first_order(hk, agent, cfg, Vector::Zero(2), Eigen::Vector2d(-1, 0));
        CHECK(r.value.norm() < 1e-15);
        CHECK(r.active);
    }
    SUBCASE("degenerate gradient is relaxed") {
        const BarrierEval hk{-1.0, Vector::Zero(2), 0.0};
        const Vector kd = Eigen::Vector2d(1, 1);
        const FilterResult r = filter_first_order(hk, agent, cfg, Vector::Zero(2), kd);
        CHECK(r.degenerate);
        CHECK(r.value == kd);
    }
    SUBCASE("equals half-space projection") {
        std::mt19937_64 rng(71);
        const AgentModel skew = skewed_agent();
        for (int i = 0; i < 200; ++i) {
            const BarrierEval hk = random_eval(rng);
            const Vector p = random_vector(2, rng);
            const Vector kd = random_vector(2, rng);
            const Vector a = skew.G(p).transpose() * hk.g_p;
            const double rhs = -cfg.alpha_bar * hk.h - hk.g_p.dot(skew.f(p)) - hk.g_t;
            const FilterResult r = filter_first_order(hk, skew, cfg, p, kd);
            CHECK((r.value - project_halfspace(kd, a, rhs)).norm() <= 1e-10 * std::max(1.0, kd.norm()));
            CHECK(a.dot(r.value) >= rhs - 1e-10 * std::max(1.0, std::abs(rhs)));
        }
    }
}

TEST_CASE("gaussian centroid") {
    SUBCASE("deeply safe") {
        CHECK(gaussian_centroid(Eigen::Vector2d(1, 0), -1e3, 0.1).norm() < 1e-12);
    }
    SUBCASE("half-normal mean") {
        const Vector z = gaussian_centroid(Eigen::Vector2d(1, 0), 0.0, 1.0);
        CHECK(z[0] == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
        CHECK(z[1] == 0.0);
        const Eigen::Vector2d q = quadrature_centroid(Eigen::Vector2d(1, 0), 0.0, 1.0);
        CHECK(std::abs(q[0] - z[0]) <= 1e-6 * z[0]);
    }
    SUBCASE("quadrature oracle") {
        std::mt19937_64 rng(72);
        for (const double vs : {0.1, 1.0}) {
            for (int i = 0; i < 50; ++i) {
                const Eigen::Vector2d a(gaussian(rng), gaussian(rng));
                const double b_c = a.norm() * std::sqrt(vs) * uniform(rng, -3.0, 3.0);
                const Vector z = gaussian_centroid(a, b_c, vs);
                const Eigen::Vector2d q = quadrature_centroid(a, b_c, vs);
                CHECK((z - Vector(q)).norm() <= 1e-6 * q.norm());
                CHECK(a.dot(z) > b_c);
            }
        }
    }
    SUBCASE("degenerate") {
        bool deg = false;
        CHECK(gaussian_centroid(Vector::Zero(2), 1.0, 0.1, &deg).isZero(0.0));
        CHECK(deg);
    }
    SUBCASE("far tail stays finite") {
        const Vector z = gaussian_centroid(Eigen::Vector2d(0, 2), 30.0, 0.1);
        CHECK(z.allFinite());
        CHECK(2.0 * z[1] >= 30.0);
    }
}

TEST_CASE("controller jacobian") {
    const Vector p = Eigen::Vector2d(0.3, -1.2);
    SUBCASE("constant") {
        const ControllerJacobian J =
            controller_jacobian([](const Vector&, double) { return Vector(Eigen::Vector2d(1, 2)); }, p, 0.5);
        CHECK(J.dp.isZero(0.0));
        CHECK(J.dt.isZero(0.0));
    }
    SUBCASE("linear") {
        Matrix K(2, 2);
        K << -1.0, 0.5, 2.0, -3.0;
        const ControllerJacobian J =
            controller_jacobian([&](const Vector& q, double) { return Vector(K * q); }, p, 0.5);
        CHECK((J.dp - K).cwiseAbs().maxCoeff() < 1e-7);
    }
    SUBCASE("Richardson ratio for the top controller") {
        const AgentModel agent = AgentModel::single_integrator(2);
        ControlConfig cfg;
        const MovingBall ball;
        const ControllerFn k = [&](const Vector& q, double t) {
            return smooth_top_controller(ball(q, t), agent, cfg, q).z;
        };
        // Close to the boundary, where the constraint is active.
        const Vector q = Eigen::Vector2d(0.9, -0.04);
        const double t = 0.2;
        const auto D = [&](double h) {
            return Vector((k(q + Eigen::Vector2d(h, 0), t) - k(q - Eigen::Vector2d(h, 0), t)) / (2 * h));
        };
        const double h = 0.01;
        const double ratio = (D(h) - D(h / 2)).norm() / (D(h / 2) - D(h / 4)).norm();
        CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
        const ControllerJacobian J = controller_jacobian(k, q, t);
        CHECK((J.dp.col(0) - D(h / 4)).norm() <= 1e-2 * std::max(1.0, J.dp.norm()));
    }
}

TEST_CASE("backstepping barrier") {
    const MovingBall ball;
    const BarrierFn hk = [&](const Vector& p, double t) { return ball(p, t); };
    const ControllerFn kk = [](const Vector& p, double t) {
        return Vector(Eigen::Vector2d(std::sin(p[0]) + t, p[1] * p[0]));
    };
    const Vector p = Eigen::Vector2d(1.5, -0.5);
    const double t = 0.3;
    SUBCASE("on the controller") {
        const BacksteppingValue v = backstepping_barrier(hk, kk, 2.0, p, kk(p, t), t);
        CHECK(v.h1 == ball(p, t).h);
        CHECK(v.grad_z.isZero(0.0));
    }
    SUBCASE("large sigma") {
        const BacksteppingValue v = backstepping_barrier(hk, kk, 1e8, p, Eigen::Vector2d(3, 3), t);
        CHECK(std::abs(v.h1 - ball(p, t).h) < 1e-6);
    }
    SUBCASE("gradients match finite differences") {
        std::mt19937_64 rng(73);
        for (int i = 0; i < 30; ++i) {
            const Vector q = Eigen::Vector2d(uniform(rng, 1.0, 3.0), uniform(rng, -2.0, 2.0));
            const Vector z = random_vector(2, rng);
            const double s = uniform(rng, 0.0, 1.0);
            const double sigma = uniform(rng, 0.5, 5.0);
            const BacksteppingValue v = backstepping_barrier(hk, kk, sigma, q, z, s);
            const auto h1 = [&](const Vector& qq, const Vector& zz, double ss) {
                return ball(qq, ss).h - (zz - kk(qq, ss)).squaredNorm() / (2 * sigma);
            };
            const double e = 1e-6;
            Vector gp(2), gz(2);
            for (int k = 0; k < 2; ++k) {
                Vector d = Vector::Zero(2);
                d[k] = e;
                gp[k] = (h1(q + d, z, s) - h1(q - d, z, s)) / (2 * e);
                gz[k] = (h1(q, z + d, s) - h1(q, z - d, s)) / (2 * e);
            }
            const double gt = (h1(q, z, s + e) - h1(q, z, s - e)) / (2 * e);
            CHECK((gp - v.grad_p).norm() <= 1e-4 * std::max(1.0, v.grad_p.norm()));
            CHECK((gz - v.grad_z).norm() <= 1e-4 * std::max(1.0, v.grad_z.norm()));
            CHECK(std::abs(gt - v.dt) <= 1e-4 * std::max(1.0, std::abs(v.dt)));
        }
    }
}

TEST_CASE("sigma selection") {
    const Vector k = Eigen::Vector2d(0.2, 0.1);
    CHECK(select_sigma(0.3, k, k, 10.0) == 10.0);
    CHECK(select_sigma(0.5, Eigen::Vector2d(2, 0), Vector::Zero(2), 1.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(select_sigma(0.0, k, k, 10.0), SafetyViolation);

    std::mt19937_64 rng(74);
    for (int i = 0; i < 100; ++i) {
        const double h = uniform(rng, 1e-4, 2.0);
        const Vector z = 3.0 * random_vector(2, rng);
        const double sigma = select_sigma(h, z, k, 10.0);
        CHECK(h - (z - k).squaredNorm() / (2 * sigma) >= -1e-12 * std::max(1.0, h));
    }
}

TEST_CASE("second-order filter") {
    const AgentModel agent = AgentModel::gravity_second_order(2);
    ControlConfig cfg;
    const Vector p = Eigen::Vector2d(1.0, -2.0);
    const Vector z = Eigen::Vector2d(0.3, 0.4);
    SUBCASE("nominal kept when safe") {
        BacksteppingValue h1;
        h1.h1 = 1.0;
        h1.grad_p = Vector::Zero(2);
        h1.grad_z = Eigen::Vector2d(1, 0);
        const Vector kd = Eigen::Vector2d(5, 5);
        const FilterResult r = filter_second_order(h1, agent, cfg, p, z, kd);
        CHECK(r.value == kd);
    }
    SUBCASE("equals half-space projection") {
        std::mt19937_64 rng(75);
        for (int i = 0; i < 200; ++i) {
            BacksteppingValue h1;
            h1.h1 = uniform(rng, -1.0, 1.0);
            h1.grad_p = random_vector(2, rng);
            h1.grad_z = random_vector(2, rng);
            h1.dt = gaussian(rng);
            const Vector q = random_vector(2, rng);
            const Vector zz = random_vector(2, rng);
            const Vector kd = random_vector(2, rng);
            const Vector a = h1.grad_z;
            const double rhs = -cfg.alpha1_bar * h1.h1 - h1.grad_p.dot(zz) -
                               h1.grad_z.dot(gravity_drift(q)) - h1.dt;
            const FilterResult r = filter_second_order(h1, agent, cfg, q, zz, kd);
            CHECK((r.value - project_halfspace(kd, a, rhs)).norm() <= 1e-10 * std::max(1.0, kd.norm()));
        }
    }
}

TEST_CASE("agent models") {
    const AgentModel a = AgentModel::gravity_second_order(2);
    const Vector p = Eigen::Vector2d(3.0, 4.0);
    CHECK((a.f1(p, Vector::Zero(2)) - p / std::pow(5.1, 3.0)).norm() < 1e-15);
    CHECK(a.G1(p, p).isIdentity());
    CHECK(a.order == AgentModel::Order::Second);
    CHECK(AgentModel::single_integrator(3).G(Vector::Zero(3)).isIdentity());
}
