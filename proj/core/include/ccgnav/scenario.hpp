#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccgnav/ccg.hpp"
#include "ccgnav/control.hpp"
#include "ccgnav/estimation.hpp"
#include "ccgnav/io.hpp"

namespace ccgnav {

enum class AgentKind { SingleIntegrator, GravitySecondOrder };

enum class EstimatorKind {
    FiniteHorizon,  // conservative for k < N, explicit afterwards
    ExactState,     // the true state is known (static, known environments)
};

enum class InputLaw {
    Constant,     // w fixed for the whole run
    UniformHold,  // w drawn uniformly from W at every sampling instant and held
};

struct AgentConfig {
    AgentKind kind = AgentKind::SingleIntegrator;
    CCG body;
    Vector p0;
    Vector z0;  // second order only
};

struct ObstacleConfig {
    std::string name;
    CCG body;  // relative to the obstacle position E x
    ObstacleSystem system;
    Vector x0;
    InputLaw input_law = InputLaw::Constant;
    Vector w;  // constant input
    EstimatorKind estimator = EstimatorKind::FiniteHorizon;
};

struct ControlParams {
    ControlConfig cfg;
    double beta_bar = 10.0;
    double gamma = 10.0;
    double eps = 1.0;
    double b = 0.1;
    double K = -1.0;
    double K1 = -2.0;
    Vector goal;
    // Time slope of each obstacle model: min of the tangent at t_k and the secant over the interval.
    bool secant_time_slope = true;
};

struct RunParams {
    double Ts = 0.1;
    int steps = 100;
    int substeps = 10;
    std::uint64_t seed = 1;
    bool snapshots = true;
    int contour_directions = 128;
};

struct ScenarioConfig {
    std::string name;
    AgentConfig agent;
    std::vector<ObstacleConfig> obstacles;
    int horizon = 5;
    InputMode input_mode = InputMode::Exact;
    ControlParams control;
    RunParams run;
    Json source;  // document the config was parsed from

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Set description used in config files:
///   {"type": "ellipsoid", "G": [[..]], "c": [..]}
///   {"type": "ball", "radius": r, "c": [..]}
///   {"type": "zonotope", "G": [[..]], "c": [..]}
///   {"type": "box", "half_widths": [..], "c": [..]}
///   {"type": "constrained_zonotope", "G", "c", "A", "b"}
///   {"type": "point", "c": [..]}
///   {"type": "intersection", "sets": [set, set, ...]}
///   {"type": "ccg", ...CCG document...}
CCG shape_from_json(const Json& j);

ScenarioConfig scenario_from_json(const Json& j);
ScenarioConfig load_scenario(const std::string& path);

/// 64-bit FNV-1a of the compact dump of a document.
std::uint64_t config_hash(const Json& j);

}  // namespace ccgnav
