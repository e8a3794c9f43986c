#include <doctest.h>

#include <cmath>
#include <random>

#include <ccgnav/errors.hpp>
#include <ccgnav/estimation.hpp>
#include <ccgnav/io.hpp>
#include <ccgnav/membership.hpp>
#include <ccgnav/sim.hpp>

#include "oracles.hpp"

using namespace ccgnav;
using namespace ccgnav::test;

namespace {

Matrix nilpotent() {
    Matrix F = Matrix::Zero(2, 2);
    F(0, 1) = 1.0;
    return F;
}

// Example-2 style obstacle: position state, full measurement.
ObstacleSystem example2_system() {
    ObstacleSystem sys;
    sys.F = Matrix::Zero(2, 2);
    sys.E = Matrix::Identity(2, 2);
    sys.C = Matrix::Identity(2, 2);
    sys.W = CCG::ellipsoid(0.5 * Matrix::Identity(2, 2), Vector::Zero(2));
    sys.V = CCG::ellipsoid(0.2 * Matrix::Identity(2, 2), Vector::Zero(2));
    sys.Ts = 0.1;
    return sys;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return INFINITY;
    }
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("transition matrix") {
    CHECK(transition_matrix(Matrix::Zero(3, 3), 0.7).isApprox(Matrix::Identity(3, 3)));
    Matrix expect(2, 2);
    expect << 1, 0.1, 0, 1;
    CHECK((transition_matrix(nilpotent(), 0.1) - expect).norm() < 1e-15);

    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix F = random_matrix(3, 3, rng);
        CHECK((transition_matrix(F, 0.1) - rk4_transition(F, 0.1, 1000)).norm() < 1e-8);
        // dPhi/ds = F Phi by central differences.
        const double s = 0.3, h = 1e-5;
        const Matrix d = (transition_matrix(F, s + h) - transition_matrix(F, s - h)) / (2 * h);
        CHECK((d - F * transition_matrix(F, s)).norm() < 1e-7);
    }
}

TEST_CASE("gamma exact") {
    CHECK(gamma_exact(Matrix::Zero(2, 2), 0.4).isApprox(0.4 * Matrix::Identity(2, 2)));
    Matrix expect(2, 2);
    expect << 0.1, 0.005, 0, 0.1;
    CHECK((gamma_exact(nilpotent(), 0.1) - expect).norm() < 1e-15);

    std::mt19937_64 rng(32);
    for (int rep = 0; rep < 3; ++rep) {
        const Matrix F = random_matrix(3, 3, rng);
        CHECK((gamma_exact(F, 0.1) - quadrature_gamma(F, 0.1)).norm() < 1e-8);
    }
}

TEST_CASE("gamma overapprox") {
    const CCG W = CCG::ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(gamma_overapprox(Matrix::Identity(2, 2), 0.0, W).radius == 0.0);
    CHECK(gamma_overapprox(Matrix::Identity(2, 2), std::log(2.0), W).radius ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gamma_overapprox(Matrix::Zero(2, 2), 0.3, W).radius == doctest::Approx(0.3));

    const CCG W5 = CCG::ellipsoid(0.5 * Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(max_norm_bound(W5) == doctest::Approx(0.5));

    // Exact offset Gamma(s) w of a constant input lies in the ball.
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 5; ++rep) {
        const Matrix F = random_matrix(2, 2, rng);
        for (int i = 0; i < 50; ++i) {
            const double s = uniform(rng, 0.0, 0.1);
            const Vector w = sample_uniform_ellipsoid(W5.G(), rng);
            const OverapproxInput in = gamma_overapprox(F, s, W5);
            // x' = F x + w from x = 0, integrated forward.
            const VectorField field = [&](double, const Vector& x) { return Vector(F * x + w); };
            const Vector offset = integrate_rk4(field, Vector::Zero(2), s, 50);
            CHECK(offset.norm() <= in.radius + 1e-12);
            CHECK(contains(in.ball, offset, kMembershipGamma, 1e-9));
        }
    }
}

TEST_CASE("conservative estimate") {
    ObstacleSystem sys = example2_system();
    sys.V = CCG::point(Vector::Zero(2));
    const Vector y = Eigen::Vector2d(1.0, 1.0);
    const CCG single = conservative_estimate(y, sys);
    CHECK(single.num_generators() == 0);
    CHECK(single.c() == y);

    const CCG ball = conservative_estimate(y, example2_system());
    CHECK(support(ball, Eigen::Vector2d(1.0, 0.0)).value == doctest::Approx(1.2).epsilon(1e-7));
    CHECK(support(ball, Eigen::Vector2d(0.0, -1.0)).value == doctest::Approx(-0.8).epsilon(1e-7));

    ObstacleSystem bad = example2_system();
    bad.C = 2.0 * Matrix::Identity(2, 2);
    CHECK_THROWS_AS(conservative_estimate(y, bad), ConfigError);

    std::mt19937_64 rng(34);
    const ObstacleSystem s2 = example2_system();
    for (int i = 0; i < 200; ++i) {
        const Vector x = random_vector(2, rng);
        const Vector yy = x + sample_uniform_ellipsoid(s2.V.G(), rng);
        CHECK(contains(conservative_estimate(yy, s2), x));
    }
}

TEST_CASE("recursive update") {
    SUBCASE("noise-free propagation is a singleton") {
        ObstacleSystem sys;
        sys.F = nilpotent();
        sys.E = Matrix::Identity(2, 2);
        sys.C = Matrix::Identity(2, 2);
        sys.W = CCG::point(Vector::Zero(2));
        sys.V = CCG::point(Vector::Zero(2));
        const Vector x0 = Eigen::Vector2d(0.5, -1.0);
        const Vector x1 = transition_matrix(sys.F, sys.Ts) * x0;
        const CCG out = recursive_update(CCG::point(x0), x1, sys);
        CHECK((out.c() - x1).norm() < 1e-15);
        CHECK(out.num_generators() == 0);
    }
    SUBCASE("one step from the unit ball") {
        ObstacleSystem sys = example2_system();
        const CCG x0 = CCG::ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2));
        const Vector y = Eigen::Vector2d(0.3, 0.2);
        const CCG out = recursive_update(x0, y, sys);
        // Blocks: x0, W, V; constraint rows C (Phi G_x | Gamma G_w) - (-G_v).
        REQUIRE(out.num_blocks() == 3);
        CHECK(out.A().rows() == 2);
        const Matrix gam = gamma_exact(sys.F, sys.Ts);
        CHECK(out.A().leftCols(2).isApprox(Matrix::Identity(2, 2)));
        CHECK(out.A().middleCols(2, 2).isApprox(gam * sys.W.G()));
        CHECK(out.A().rightCols(2).isApprox(sys.V.G()));
        CHECK(out.b().isApprox(y));
    }
    SUBCASE("100-step containment") {
        std::mt19937_64 rng(35);
        const ObstacleSystem sys = example2_system();
        const Matrix phi = transition_matrix(sys.F, sys.Ts);
        const Matrix gam = gamma_exact(sys.F, sys.Ts);
        Vector x = Eigen::Vector2d(0.0, 0.0);
        Vector y = x + sample_uniform_ellipsoid(sys.V.G(), rng);
        CCG est = measurement_update(conservative_estimate(y, sys), y, sys);
        for (int k = 1; k <= 100; ++k) {
            x = phi * x + gam * sample_uniform_ellipsoid(sys.W.G(), rng);
            y = x + sample_uniform_ellipsoid(sys.V.G(), rng);
            est = recursive_update(est, y, sys);
            // The representation grows by one block pair per step; restart to bound it.
            if (k % 10 == 0) {
                CHECK(contains(est, x));
                est = conservative_estimate(y, sys);
            }
        }
    }
}

TEST_CASE("precompute params") {
    SUBCASE("trivial system, N = 1") {
        ObstacleSystem sys;
        sys.F = Matrix::Zero(2, 2);
        sys.E = Matrix::Identity(2, 2);
        sys.C = Matrix::Identity(2, 2);
        sys.W = CCG::point(Vector::Zero(2));
        sys.V = CCG::point(Vector::Zero(2));
        const EstimatorParams p = precompute_params(sys, 1);
        CHECK(p.R1.isApprox(Matrix::Identity(2, 2)));
        CHECK(p.t1.isZero(0.0));
        REQUIRE(p.R5.rows() == 4);
        CHECK(p.R5.topRows(2).isApprox(-Matrix::Identity(2, 2)));
        CHECK(p.R5.bottomRows(2).isApprox(-Matrix::Identity(2, 2)));
    }
    SUBCASE("dimensions") {
        std::mt19937_64 rng(36);
        const ObstacleSystem sys = random_system(rng, 4, InputMode::Exact);
        for (int N = 1; N <= 5; ++N) {
            const EstimatorParams p = precompute_params(sys, N);
            CHECK(p.R4.rows() == (N + 1) * sys.y());
            CHECK(p.t2.size() == (N + 1) * sys.y());
            CHECK(p.blocks.size() == 1 + 2 * static_cast<std::size_t>(N));
            CHECK(p.N == N);
        }
    }
    SUBCASE("N < 1 rejected") {
        CHECK_THROWS_AS(precompute_params(example2_system(), 0), ConfigError);
    }
    SUBCASE("json round trip") {
        std::mt19937_64 rng(37);
        const EstimatorParams p = precompute_params(random_system(rng, 2, InputMode::Exact), 3);
        const EstimatorParams q = params_from_json(Json::parse(params_to_json(p).dump()));
        CHECK(q.R1 == p.R1);
        CHECK(q.R4 == p.R4);
        CHECK(q.t2 == p.t2);
        CHECK(q.blocks == p.blocks);
        CHECK(q.N == 3);
    }
}

TEST_CASE("explicit estimate equals the recursive chain") {
    std::mt19937_64 rng(38);
    for (const InputMode mode : {InputMode::Exact, InputMode::Overapprox}) {
        for (int N = 1; N <= 5; ++N) {
            const ObstacleSystem sys = random_system(rng, 2, mode);
            const EstimatorParams params = precompute_params(sys, N);
            const CCG xbar = CCG::ellipsoid(random_matrix(2, 2, rng), random_vector(2, rng));
            Vector window((N + 1) * 2);
            for (int k = 0; k <= N; ++k) {
                window.segment(2 * k, 2) = random_vector(2, rng);
            }
            CCG chain = measurement_update(xbar, window.head(2), sys);
            for (int k = 1; k <= N; ++k) {
                chain = recursive_update(chain, window.segment(2 * k, 2), sys);
            }
            const CCG expl = explicit_estimate(params, xbar, window);
            CHECK(max_abs_diff(expl.G(), chain.G()) <= 1e-10);
            CHECK(max_abs_diff(expl.c(), chain.c()) <= 1e-10);
            CHECK(max_abs_diff(expl.A(), chain.A()) <= 1e-10);
            CHECK(max_abs_diff(expl.b(), chain.b()) <= 1e-10);
            CHECK(expl.blocks() == chain.blocks());
        }
    }
}

TEST_CASE("explicit estimate base case and errors") {
    std::mt19937_64 rng(39);
    const ObstacleSystem sys = random_system(rng, 2, InputMode::Exact);
    const CCG xbar = CCG::ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2));
    const Vector y = random_vector(2, rng);
    const CCG base = explicit_estimate(initial_params(sys), xbar, y);
    const CCG direct = measurement_update(xbar, y, sys);
    CHECK(max_abs_diff(base.A(), direct.A()) <= 1e-14);
    CHECK(max_abs_diff(base.b(), direct.b()) <= 1e-14);
    CHECK(max_abs_diff(base.G(), direct.G()) <= 1e-14);

    const EstimatorParams p = precompute_params(sys, 2);
    CHECK_THROWS_AS(explicit_estimate(p, xbar, Vector::Zero(4)), DimensionError);
    const CCG constrained = intersection(xbar, xbar);
    CHECK_THROWS_AS(explicit_estimate(p, constrained, Vector::Zero(6)), ConfigError);
}

TEST_CASE("finite-horizon estimator") {
    std::mt19937_64 rng(40);
    const ObstacleSystem sys = example2_system();
    FiniteHorizonEstimator est(sys, precompute_params(sys, 5));
    const Matrix phi = transition_matrix(sys.F, sys.Ts);
    const Matrix gam = gamma_exact(sys.F, sys.Ts);
    Vector x = Eigen::Vector2d(1.0, -1.0);
    Eigen::Index size = -1;
    for (int k = 0; k < 30; ++k) {
        if (k > 0) {
            x = phi * x + gam * sample_uniform_ellipsoid(sys.W.G(), rng);
        }
        const CCG xk = est.update(x + sample_uniform_ellipsoid(sys.V.G(), rng));
        CHECK(est.steady() == (k >= 5));
        CHECK(contains(xk, x));
        if (est.steady()) {
            // Representation size does not grow with k.
            if (size < 0) {
                size = xk.num_generators();
            }
            CHECK(xk.num_generators() == size);
        }
    }
}
