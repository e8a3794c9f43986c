#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <ccgnav/errors.hpp>
#include <ccgnav/estimation.hpp>
#include <ccgnav/scenario.hpp>
#include <ccgnav/sim.hpp>

#include "oracles.hpp"

using namespace ccgnav;
using namespace ccgnav::test;

namespace {

Json empty_scene() {
    return Json::parse(R"({
      "name": "empty",
      "agent": {"model": "single_integrator", "p0": [-2.0, 1.0],
                "body": {"type": "ball", "radius": 0.2, "c": [0.0, 0.0]}},
      "control": {"K": -1.0, "goal": [1.0, 0.0]},
      "run": {"Ts": 0.1, "steps": 30, "substeps": 10, "seed": 3, "snapshots": false}
    })");
}

}  // namespace

TEST_CASE("uniform ellipsoid sampling") {
    std::mt19937_64 rng(81);
    const Matrix G = Eigen::Matrix2d{{2.0, 0.0}, {0.0, 0.5}};
    const int n = 20000;
    Vector mean = Vector::Zero(2);
    int inner = 0;
    for (int i = 0; i < n; ++i) {
        const Vector x = sample_uniform_ellipsoid(G, rng);
        const double r = (G.inverse() * x).norm();
        CHECK(r <= 1.0 + 1e-12);
        inner += r <= std::sqrt(0.5) ? 1 : 0;
        mean += x;
    }
    mean /= n;
    // Coordinate variance of a uniform disc image is G_ii^2 / 4.
    CHECK(std::abs(mean[0]) < 3.0 * 1.0 / std::sqrt(n));
    CHECK(std::abs(mean[1]) < 3.0 * 0.25 / std::sqrt(n));
    // Half the area lies inside radius 1/sqrt(2).
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(inner / double(n) - 0.5) < 4.0 * se);
    CHECK_THROWS_AS(sample_uniform_ellipsoid(Eigen::Matrix2d{{1, 1}, {1, 1}}, rng), DimensionError);
}

TEST_CASE("rk4") {
    SUBCASE("zero field") {
        const Vector x = Eigen::Vector3d(1, 2, 3);
        CHECK(integrate_rk4([](double, const Vector& v) { return Vector(Vector::Zero(v.size())); }, x, 1.0, 7) == x);
    }
    SUBCASE("linear system") {
        const Matrix F = Eigen::Matrix2d{{-0.5, 1.0}, {-1.0, -0.2}};
        const Vector x = Eigen::Vector2d(1.0, -1.0);
        const Vector got = integrate_rk4([&](double, const Vector& v) { return Vector(F * v); }, x, 0.7, 200);
        CHECK((got - transition_matrix(F, 0.7) * x).norm() < 1e-9);
    }
    SUBCASE("fourth-order convergence") {
        const VectorField f = [](double t, const Vector& v) { return Vector(Vector::Constant(1, std::cos(t) * v[0])); };
        const Vector x = Vector::Constant(1, 1.0);
        const double exact = std::exp(std::sin(2.0));
        const double e1 = std::abs(integrate_rk4(f, x, 2.0, 10)[0] - exact);
        const double e2 = std::abs(integrate_rk4(f, x, 2.0, 20)[0] - exact);
        CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
    }
    SUBCASE("rejects empty interval") {
        CHECK_THROWS_AS(integrate_rk4([](double, const Vector& v) { return v; }, Vector::Zero(1), 0.0, 1),
                        DimensionError);
    }
}

TEST_CASE("run without obstacles follows the nominal controller") {
    const ScenarioConfig cfg = scenario_from_json(empty_scene());
    const Trace tr = run_scenario(cfg);
    CHECK(tr.status == RunStatus::Safe);
    REQUIRE(tr.rows.size() == 301);
    for (const TraceRow& r : tr.rows) {
        const Vector expect = cfg.control.goal + (cfg.agent.p0 - cfg.control.goal) * std::exp(-r.t);
        CHECK((r.p - expect).norm() < 1e-8);
        CHECK((r.z + (r.p - cfg.control.goal)).norm() < 1e-12);
        CHECK(r.flags == 0u);
    }
}

TEST_CASE("example 2 run") {
    ScenarioConfig cfg = bundled("example2.cfg");
    cfg.run.snapshots = false;
    const Trace a = run_scenario(cfg);
    CHECK(a.status == RunStatus::Safe);
    CHECK(a.min_h_k >= 0.0);
    CHECK(a.collisions == 0);
    CHECK(a.estimator_misses == 0);
    CHECK(a.final_distance < 0.1 * a.initial_distance);
    REQUIRE(a.steps.size() == static_cast<std::size_t>(cfg.run.steps));
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
        CHECK(a.steps[k].steady == (k >= static_cast<std::size_t>(cfg.horizon)));
    }

    SUBCASE("deterministic") {
        const Trace b = run_scenario(cfg);
        CHECK(trace_csv(a) == trace_csv(b));
    }
    SUBCASE("seed changes the noise") {
        const Trace b = run_scenario(cfg, cfg.run.seed + 1);
        CHECK(trace_csv(a) != trace_csv(b));
    }
    SUBCASE("csv layout") {
        std::istringstream in(trace_csv(a));
        std::string header;
        std::getline(in, header);
        CHECK(header == "t,p_1,p_2,z_1,z_2,h_k,h1,mu,beta_k,sigma_k,flags");
        std::string line;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            CHECK(std::count(line.begin(), line.end(), ',') == 10);
            ++rows;
        }
        CHECK(rows == a.rows.size());
    }
    SUBCASE("meta") {
        const Json m = trace_meta(a, cfg);
        CHECK(m["status"] == "safe");
        CHECK(m["exit_code"] == 0);
        CHECK(m["config_hash"].get<std::string>().size() == 16);
        CHECK(m["steps_completed"] == cfg.run.steps);
    }
}

TEST_CASE("snapshots carry contours") {
    ScenarioConfig cfg = bundled("example2.cfg");
    cfg.run.steps = 3;
    cfg.run.contour_directions = 32;
    const Trace tr = run_scenario(cfg);
    REQUIRE(tr.snapshots.size() == 3);
    const Json& s = tr.snapshots[0];
    CHECK(s["agent"]["contour"].size() == 32);
    REQUIRE(s["obstacles"].size() == 2);
    CHECK(s["obstacles"][0]["contour"].size() == 32);
    CHECK(s["obstacles"][0].contains("true_contour"));
    CHECK(tr.steps[0].obstacles[0].contour_area > 0.0);
}

TEST_CASE("obstacle on the start position") {
    ScenarioConfig cfg = bundled("example2.cfg");
    cfg.run.snapshots = false;
    cfg.obstacles[0].x0 = cfg.agent.p0;
    const Trace tr = run_scenario(cfg);
    CHECK(tr.status == RunStatus::SafetyViolation);
    REQUIRE_FALSE(tr.events.empty());
    CHECK(tr.events.front().kind == "safety_violation");
    CHECK(tr.events.front().step == 0);
}

TEST_CASE("scenario validation") {
    Json j = empty_scene();
    j["run"]["Ts"] = 0.0;
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
    j = empty_scene();
    j["agent"]["model"] = "unicycle";
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
    j = empty_scene();
    j["control"]["goal"] = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(scenario_from_json(j), ConfigError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scene.cfg"), ConfigError);
    CHECK(config_hash(empty_scene()) == config_hash(empty_scene()));
    j = empty_scene();
    j["run"]["seed"] = 4;
    CHECK(config_hash(j) != config_hash(empty_scene()));
}
