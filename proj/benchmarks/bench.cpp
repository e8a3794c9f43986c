#include <random>

#include <benchmark/benchmark.h>

#include <ccgnav/barrier.hpp>
#include <ccgnav/control.hpp>
#include <ccgnav/estimation.hpp>
#include <ccgnav/membership.hpp>
#include <ccgnav/scenario.hpp>

using namespace ccgnav;

namespace {

ScenarioConfig scenario(const char* name) {
    return load_scenario(std::string(CCGNAV_SCENARIO_DIR) + "/" + name);
}

UnconstrainedForm enlarged_obstacle(const ScenarioConfig& cfg, std::size_t i) {
    const ObstacleConfig& o = cfg.obstacles.at(i);
    const CCG placed = affine_map(o.body, Matrix::Identity(2, 2), o.system.E * o.x0);
    return eliminate_constraints(enlarge_body(placed, cfg.agent.body));
}

void BM_BarrierModel(benchmark::State& state) {
    const ScenarioConfig cfg = scenario("example1.cfg");
    const UnconstrainedForm f = enlarged_obstacle(cfg, static_cast<std::size_t>(state.range(0)));
    const Matrix Gd = Matrix::Zero(2, f.eta_dim());
    const Vector p = f.ct + Eigen::Vector2d(2.0, 1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(barrier_linear_model(f, Gd, Vector::Zero(2), p, 0.0, cfg.control.gamma));
    }
}
BENCHMARK(BM_BarrierModel)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_EstimatedBarrier(benchmark::State& state) {
    const ScenarioConfig cfg = scenario("example2.cfg");
    const ObstacleConfig& o = cfg.obstacles[0];
    FiniteHorizonEstimator est(o.system, precompute_params(o.system, cfg.horizon));
    CCG e;
    for (int k = 0; k <= cfg.horizon; ++k) {
        e = est.update(o.x0);
    }
    const ObstacleFlow flow(o.system, e, enlarge_body(o.body, cfg.agent.body), 0.0);
    const Vector p = cfg.agent.p0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(barrier_linear_model(flow, p, 0.0, cfg.control.gamma));
    }
}
BENCHMARK(BM_EstimatedBarrier)->Unit(benchmark::kMicrosecond);

void BM_ExplicitEstimate(benchmark::State& state) {
    const ScenarioConfig cfg = scenario("example2.cfg");
    const ObstacleSystem& sys = cfg.obstacles[0].system;
    const int N = static_cast<int>(state.range(0));
    const EstimatorParams params = precompute_params(sys, N);
    const CCG xbar = conservative_estimate(Vector::Zero(2), sys);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 0.1);
    Vector window(sys.y() * (N + 1));
    for (Eigen::Index i = 0; i < window.size(); ++i) window[i] = n(rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(explicit_estimate(params, xbar, window));
    }
}
BENCHMARK(BM_ExplicitEstimate)->DenseRange(1, 5)->Unit(benchmark::kMicrosecond);

void BM_Contains(benchmark::State& state) {
    const ScenarioConfig cfg = scenario("example1.cfg");
    const UnconstrainedForm f = enlarged_obstacle(cfg, 0);
    std::mt19937_64 rng(2);
    std::vector<Vector> pts;
    for (int i = 0; i < 64; ++i) {
        pts.push_back(sample_point(f, rng));
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(contains(f, pts[i++ % pts.size()]));
    }
}
BENCHMARK(BM_Contains)->Unit(benchmark::kMicrosecond);

void BM_TopController(benchmark::State& state) {
    const AgentModel agent = AgentModel::single_integrator(2);
    ControlConfig cc;
    const BarrierEval hk{0.05, Eigen::Vector2d(0.6, -0.8), 0.1};
    const Vector p = Eigen::Vector2d(1.0, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(smooth_top_controller(hk, agent, cc, p));
    }
}
BENCHMARK(BM_TopController);

}  // namespace

BENCHMARK_MAIN();
