#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ccgnav/barrier.hpp"
#include "ccgnav/io.hpp"
#include "ccgnav/scenario.hpp"

namespace ccgnav {

/// Uniform sample of { G xi : |xi| <= 1 }: normalized Gaussian direction times U^(1/d),
/// d = G.cols(). Throws DimensionError if G is not of full column rank.
Vector sample_uniform_ellipsoid(const Matrix& G, std::mt19937_64& rng);

using VectorField = std::function<Vector(double t, const Vector& x)>;

/// Classical RK4 over [t0, t0 + dt] in `substeps` equal steps. Throws SolverFailure on a
/// non-finite state.
Vector integrate_rk4(const VectorField& field, const Vector& x, double dt, int substeps,
                     double t0 = 0.0);

enum class RunStatus { Safe = 0, SafetyViolation = 2, SolverFailure = 3 };

/// Bits of the per-row `flags` column.
enum TraceFlag : unsigned {
    kFlagActive = 1u,
    kFlagDegenerate = 2u,
    kFlagCollision = 4u,
    kFlagEstimatorMiss = 8u,
};

struct TraceRow {
    double t = 0.0;
    Vector p;
    Vector z;
    Vector u;  // empty for first-order agents
    double h_k = 0.0;
    double h1 = 0.0;
    double mu = 0.0;
    double beta_k = 0.0;
    double sigma_k = 0.0;
    unsigned flags = 0;
};

struct TraceEvent {
    int step = 0;
    double t = 0.0;
    std::string kind;
    std::string message;
};

struct ObstacleStepRecord {
    double h0 = 0.0;
    Vector g_p;
    double g_t = 0.0;
    double solve_ms = 0.0;
    double contour_area = 0.0;
    bool estimate_contains_truth = true;
};

struct StepRecord {
    int k = 0;
    double t = 0.0;
    double beta_k = 0.0;
    double sigma_k = 0.0;
    bool steady = false;  // every finite-horizon estimator past its conservative phase
    std::vector<ObstacleStepRecord> obstacles;
};

struct Trace {
    bool second_order = false;
    Eigen::Index p_dim = 0;
    Eigen::Index z_dim = 0;
    Eigen::Index u_dim = 0;
    std::vector<TraceRow> rows;
    std::vector<StepRecord> steps;
    std::vector<TraceEvent> events;
    Json snapshots = Json::array();
    RunStatus status = RunStatus::Safe;
    double min_h_k = 0.0;
    double min_h1 = 0.0;
    int collisions = 0;
    int estimator_misses = 0;
    double initial_distance = 0.0;
    double final_distance = 0.0;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;

    /// Mean of the per-obstacle barrier solve times over all steps.
    double mean_solve_ms() const;
};

struct RunOptions {
    /// Estimator parameters per obstacle (index-aligned); computed when empty.
    std::vector<EstimatorParams> params;
    /// Check the true obstacle state against every published estimate.
    bool check_estimates = true;
    /// Check agent/obstacle overlap at every substep.
    bool check_collisions = true;
};

/// Runs the closed loop for cfg.run.steps sampling intervals (or until a safety violation or
/// solver failure, recorded as events). `seed` overrides cfg.run.seed.
Trace run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts = {});
Trace run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// trace.csv text (%.17g numbers, fixed column order).
std::string trace_csv(const Trace& trace);

Json trace_meta(const Trace& trace, const ScenarioConfig& cfg);

/// Writes trace.csv, snapshots.json and meta.json into `dir` (created if absent).
void write_trace(const Trace& trace, const ScenarioConfig& cfg, const std::string& dir);

}  // namespace ccgnav
