#include "ccgnav/scenario.hpp"

#include <fstream>

#include "ccgnav/errors.hpp"

namespace ccgnav {

namespace {

template <typename T>
T value_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Matrix identity(Eigen::Index n) {
    return Matrix::Identity(n, n);
}

ObstacleSystem parse_system(const Json& j, Eigen::Index p, double Ts, InputMode mode) {
    ObstacleSystem sys;
    sys.Ts = Ts;
    sys.mode = mode;
    if (!j.contains("dynamics")) {
        // Static obstacle: x is its position, never moves, measured exactly.
        sys.F = Matrix::Zero(p, p);
        sys.E = identity(p);
        sys.C = identity(p);
        sys.W = CCG::point(Vector::Zero(p));
        sys.V = CCG::point(Vector::Zero(p));
        return sys;
    }
    const Json& d = j.at("dynamics");
    sys.F = matrix_from_json(d.at("F"));
    const Eigen::Index n = sys.F.rows();
    sys.E = d.contains("E") ? matrix_from_json(d.at("E")) : identity(n);
    sys.C = d.contains("C") ? matrix_from_json(d.at("C")) : identity(n);
    sys.W = d.contains("W") ? shape_from_json(d.at("W")) : CCG::point(Vector::Zero(n));
    sys.V = d.contains("V") ? shape_from_json(d.at("V")) : CCG::point(Vector::Zero(sys.C.rows()));
    return sys;
}

}  // namespace

CCG shape_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "ellipsoid") {
        return CCG::ellipsoid(matrix_from_json(j.at("G")), vector_from_json(j.at("c")));
    }
    if (type == "ball") {
        const Vector c = vector_from_json(j.at("c"));
        return CCG::ellipsoid(j.at("radius").get<double>() * identity(c.size()), c);
    }
    if (type == "zonotope") {
        return CCG::zonotope(matrix_from_json(j.at("G")), vector_from_json(j.at("c")));
    }
    if (type == "box") {
        const Vector hw = vector_from_json(j.at("half_widths"));
        return CCG::zonotope(hw.asDiagonal(), vector_from_json(j.at("c")));
    }
    if (type == "constrained_zonotope") {
        const Matrix G = matrix_from_json(j.at("G"));
        return CCG::constrained_zonotope(G, vector_from_json(j.at("c")),
                                         matrix_from_json(j.at("A"), G.cols()),
                                         vector_from_json(j.at("b")));
    }
    if (type == "point") {
        return CCG::point(vector_from_json(j.at("c")));
    }
    if (type == "intersection") {
        const Json& sets = j.at("sets");
        if (sets.empty()) {
            throw ConfigError("intersection needs at least one set");
        }
        CCG out = shape_from_json(sets.at(0));
        for (std::size_t i = 1; i < sets.size(); ++i) {
            out = intersection(out, shape_from_json(sets.at(i)));
        }
        return out;
    }
    if (type == "ccg") {
        return ccg_from_json(j);
    }
    throw ConfigError("unknown set type '" + type + "'");
}

ScenarioConfig scenario_from_json(const Json& j) {
    try {
        ScenarioConfig cfg;
        cfg.source = j;
        cfg.name = value_or<std::string>(j, "name", "scenario");

        const Json& run = j.at("run");
        cfg.run.Ts = value_or(run, "Ts", 0.1);
        cfg.run.steps = value_or(run, "steps", 100);
        cfg.run.substeps = value_or(run, "substeps", 10);
        cfg.run.seed = value_or<std::uint64_t>(run, "seed", 1);
        cfg.run.snapshots = value_or(run, "snapshots", true);
        cfg.run.contour_directions = value_or(run, "contour_directions", 128);

        const Json& agent = j.at("agent");
        const std::string model = value_or<std::string>(agent, "model", "single_integrator");
        if (model == "single_integrator") {
            cfg.agent.kind = AgentKind::SingleIntegrator;
        } else if (model == "gravity_second_order") {
            cfg.agent.kind = AgentKind::GravitySecondOrder;
        } else {
            throw ConfigError("unknown agent model '" + model + "'");
        }
        cfg.agent.p0 = vector_from_json(agent.at("p0"));
        const Eigen::Index p = cfg.agent.p0.size();
        cfg.agent.body = agent.contains("body") ? shape_from_json(agent.at("body"))
                                                : CCG::point(Vector::Zero(p));
        cfg.agent.z0 = agent.contains("z0") ? vector_from_json(agent.at("z0")) : Vector::Zero(p);

        const Json est = j.value("estimator", Json::object());
        cfg.horizon = value_or(est, "N", 5);
        const std::string mode = value_or<std::string>(est, "mode", "exact");
        if (mode == "exact") {
            cfg.input_mode = InputMode::Exact;
        } else if (mode == "overapprox") {
            cfg.input_mode = InputMode::Overapprox;
        } else {
            throw ConfigError("unknown estimator mode '" + mode + "'");
        }

        const Json ctl = j.value("control", Json::object());
        cfg.control.cfg.alpha_bar = value_or(ctl, "alpha_bar", 10.0);
        cfg.control.cfg.alpha1_bar = value_or(ctl, "alpha1_bar", 10.0);
        cfg.control.cfg.varsigma = value_or(ctl, "varsigma", 0.1);
        cfg.control.cfg.sigma_bar = value_or(ctl, "sigma_bar", 10.0);
        cfg.control.beta_bar = value_or(ctl, "beta_bar", 10.0);
        cfg.control.gamma = value_or(ctl, "gamma", 10.0);
        cfg.control.eps = value_or(ctl, "eps", 1.0);
        cfg.control.b = value_or(ctl, "b", 0.1);
        cfg.control.K = value_or(ctl, "K", -1.0);
        cfg.control.K1 = value_or(ctl, "K1", -2.0);
        const std::string slope = value_or<std::string>(ctl, "time_slope", "secant");
        if (slope != "secant" && slope != "tangent") {
            throw ConfigError("unknown control.time_slope '" + slope + "'");
        }
        cfg.control.secant_time_slope = slope == "secant";
        cfg.control.goal = ctl.contains("goal") ? vector_from_json(ctl.at("goal")) : Vector::Zero(p);

        for (const Json& o : j.value("obstacles", Json::array())) {
            ObstacleConfig oc;
            oc.name = value_or<std::string>(o, "name", "obstacle" + std::to_string(cfg.obstacles.size()));
            oc.body = shape_from_json(o.at("body"));
            oc.system = parse_system(o, p, cfg.run.Ts, cfg.input_mode);
            oc.x0 = vector_from_json(o.at("x0"));
            const std::string est_kind =
                value_or<std::string>(o, "estimator", o.contains("dynamics") ? "finite_horizon" : "exact_state");
            if (est_kind == "finite_horizon") {
                oc.estimator = EstimatorKind::FiniteHorizon;
            } else if (est_kind == "exact_state") {
                oc.estimator = EstimatorKind::ExactState;
            } else {
                throw ConfigError("unknown estimator kind '" + est_kind + "'");
            }
            const Json input = o.value("input", Json::object());
            const std::string law = value_or<std::string>(input, "law", "constant");
            if (law == "constant") {
                oc.input_law = InputLaw::Constant;
                oc.w = input.contains("w") ? vector_from_json(input.at("w"))
                                           : Vector::Zero(oc.system.n());
            } else if (law == "uniform_hold") {
                oc.input_law = InputLaw::UniformHold;
            } else {
                throw ConfigError("unknown input law '" + law + "'");
            }
            cfg.obstacles.push_back(std::move(oc));
        }
        cfg.validate();
        return cfg;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed scenario: ") + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("inconsistent scenario: ") + e.what());
    }
}

void ScenarioConfig::validate() const {
    const Eigen::Index p = agent.p0.size();
    if (!(run.Ts > 0.0)) {
        throw ConfigError("run.Ts must be positive");
    }
    if (run.substeps < 1 || run.steps < 0) {
        throw ConfigError("run.substeps must be >= 1 and run.steps >= 0");
    }
    if (agent.body.dim() != p || agent.z0.size() != p || control.goal.size() != p) {
        throw ConfigError("agent body, z0 and goal must match the position dimension");
    }
    if (!(control.beta_bar > 0.0) || !(control.gamma > 0.0) || control.b < 0.0 ||
        control.eps < 0.0) {
        throw ConfigError("control: beta_bar, gamma must be positive, b and eps nonnegative");
    }
    if (!(control.cfg.alpha_bar > 0.0) || !(control.cfg.alpha1_bar > 0.0) ||
        !(control.cfg.varsigma > 0.0) || !(control.cfg.sigma_bar > 0.0)) {
        throw ConfigError("control: alpha_bar, alpha1_bar, varsigma, sigma_bar must be positive");
    }
    for (const auto& o : obstacles) {
        o.system.validate();
        if (o.system.p() != p || o.body.dim() != p) {
            throw ConfigError("obstacle '" + o.name + "': position dimension differs from the agent's");
        }
        if (o.x0.size() != o.system.n()) {
            throw ConfigError("obstacle '" + o.name + "': x0 has the wrong dimension");
        }
        if (o.input_law == InputLaw::Constant && o.w.size() != o.system.n()) {
            throw ConfigError("obstacle '" + o.name + "': w has the wrong dimension");
        }
        if (o.estimator == EstimatorKind::FiniteHorizon) {
            if (horizon < 1) {
                throw ConfigError("estimator.N must be at least 1");
            }
            if (!o.system.C.isIdentity(0.0) || o.system.C.rows() != o.system.n()) {
                throw ConfigError("obstacle '" + o.name + "': finite-horizon estimation needs C = I");
            }
        }
    }
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    Json j;
    try {
        in >> j;
    } catch (const Json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

std::uint64_t config_hash(const Json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace ccgnav
