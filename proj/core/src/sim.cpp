#include "ccgnav/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "ccgnav/control.hpp"
#include "ccgnav/errors.hpp"
#include "ccgnav/estimation.hpp"
#include "ccgnav/flow.hpp"
#include "ccgnav/membership.hpp"

namespace ccgnav {

namespace {

// sigma_k is chosen against a slightly reduced h_k so h1 starts strictly positive.
constexpr double kSigmaHeadroom = 0.9;

constexpr double kBarrierSlack = 1e-9;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json contour_json(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& shift) {
    Json out = Json::array();
    for (const auto& v : poly) {
        out.push_back({v.x() + shift.x(), v.y() + shift.y()});
    }
    return out;
}

std::vector<Eigen::Vector2d> shifted(const std::vector<Eigen::Vector2d>& poly,
                                     const Eigen::Vector2d& shift) {
    std::vector<Eigen::Vector2d> out;
    out.reserve(poly.size());
    for (const auto& v : poly) {
        out.push_back(v + shift);
    }
    return out;
}

Eigen::Vector2d as2d(const Vector& v) {
    return v.size() >= 2 ? Eigen::Vector2d(v[0], v[1]) : Eigen::Vector2d(v.size() ? v[0] : 0.0, 0.0);
}

std::mt19937_64 obstacle_stream(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index + 1), 0x6f627374u};
    return std::mt19937_64(seq);
}

const char* status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Safe:
            return "safe";
        case RunStatus::SafetyViolation:
            return "safety_violation";
        case RunStatus::SolverFailure:
            return "solver_failure";
    }
    return "unknown";
}

// Per-obstacle runtime state.
struct ObstacleState {
    const ObstacleConfig* cfg = nullptr;
    Vector x;
    Vector w;
    std::mt19937_64 rng;
    std::optional<FiniteHorizonEstimator> estimator;
    CCG enlarged;
    UnconstrainedForm enlarged_form;
    std::vector<Eigen::Vector2d> body_contour;
    Vector warm;
};

}  // namespace

Vector sample_uniform_ellipsoid(const Matrix& G, std::mt19937_64& rng) {
    const Eigen::Index d = G.cols();
    if (d == 0) {
        return Vector::Zero(G.rows());
    }
    if (numerical_rank(G) < d) {
        throw DimensionError("sample_uniform_ellipsoid: shape matrix is singular");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector dir(d);
    double nrm = 0.0;
    do {
        for (Eigen::Index i = 0; i < d; ++i) {
            dir[i] = normal(rng);
        }
        nrm = dir.norm();
    } while (nrm == 0.0);
    const double r = std::pow(unif(rng), 1.0 / static_cast<double>(d));
    return G * (dir * (r / nrm));
}

Vector integrate_rk4(const VectorField& field, const Vector& x, double dt, int substeps,
                     double t0) {
    if (!(dt > 0.0) || substeps < 1) {
        throw DimensionError("integrate_rk4: dt must be positive and substeps >= 1");
    }
    const double h = dt / substeps;
    Vector s = x;
    double t = t0;
    for (int i = 0; i < substeps; ++i) {
        const Vector k1 = field(t, s);
        const Vector k2 = field(t + 0.5 * h, s + 0.5 * h * k1);
        const Vector k3 = field(t + 0.5 * h, s + 0.5 * h * k2);
        const Vector k4 = field(t + h, s + h * k3);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (i + 1) * h;
        if (!s.allFinite()) {
            throw SolverFailure("integrate_rk4: non-finite state at t = " + fmt(t));
        }
    }
    return s;
}

double Trace::mean_solve_ms() const {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : steps) {
        for (const auto& o : s.obstacles) {
            total += o.solve_ms;
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

Trace run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    return run_scenario(cfg, cfg.run.seed, opts);
}

Trace run_scenario(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    cfg.validate();
    const auto wall0 = std::chrono::steady_clock::now();

    Trace tr;
    tr.seed = seed;
    tr.second_order = cfg.agent.kind == AgentKind::GravitySecondOrder;
    const AgentModel agent = tr.second_order ? AgentModel::gravity_second_order(cfg.agent.p0.size())
                                             : AgentModel::single_integrator(cfg.agent.p0.size());
    tr.p_dim = agent.p_dim;
    tr.z_dim = agent.z_dim;
    tr.u_dim = agent.u_dim;
    tr.min_h_k = std::numeric_limits<double>::infinity();
    tr.min_h1 = std::numeric_limits<double>::infinity();

    const ControlParams& cp = cfg.control;
    const ControlConfig& cc = cp.cfg;
    const double Ts = cfg.run.Ts;
    const int nsub = cfg.run.substeps;
    const double dt = Ts / nsub;
    const bool planar = cfg.agent.p0.size() == 2;
    const bool want_snapshots = cfg.run.snapshots && planar;
    const int ndir = cfg.run.contour_directions;

    const auto k_d = [&](const Vector& p) -> Vector { return cp.K * (p - cp.goal); };
    const auto k_d1 = [&](const Vector& p, const Vector& z) -> Vector {
        return -gravity_drift(p) + cp.K1 * (z - k_d(p));
    };

    std::vector<Eigen::Vector2d> agent_contour;
    if (want_snapshots) {
        agent_contour = contour(cfg.agent.body, ndir);
    }

    std::vector<ObstacleState> obs;
    obs.reserve(cfg.obstacles.size());
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        const ObstacleConfig& oc = cfg.obstacles[i];
        ObstacleState st;
        st.cfg = &oc;
        st.x = oc.x0;
        st.w = oc.input_law == InputLaw::Constant ? oc.w : Vector::Zero(oc.system.n());
        st.rng = obstacle_stream(seed, i);
        if (oc.estimator == EstimatorKind::FiniteHorizon) {
            EstimatorParams params = i < opts.params.size() ? opts.params[i]
                                                            : precompute_params(oc.system, cfg.horizon);
            st.estimator.emplace(oc.system, std::move(params));
        }
        st.enlarged = enlarge_body(oc.body, cfg.agent.body);
        st.enlarged_form = eliminate_constraints(st.enlarged);
        if (want_snapshots) {
            st.body_contour = contour(oc.body, ndir);
        }
        obs.push_back(std::move(st));
    }

    Vector p = cfg.agent.p0;
    Vector z = cfg.agent.z0;
    tr.initial_distance = (p - cp.goal).norm();

    const auto event = [&](int step, double t, const std::string& kind, const std::string& msg) {
        tr.events.push_back({step, t, kind, msg});
    };

    // Controller evaluation against the frozen models of the current interval.
    std::vector<BarrierModel> models;
    double beta = 0.0;
    double sigma = 0.0;
    const BarrierFn hk_fn = [&](const Vector& pp, double t) {
        if (models.empty()) {
            return BarrierEval{std::numeric_limits<double>::infinity(), Vector::Zero(pp.size()), 0.0};
        }
        const CompositeValue cv = combine(models, beta, cp.b, pp, t);
        return BarrierEval{cv.h, cv.g_p, cv.g_t};
    };
    const ControllerFn kk_fn = [&](const Vector& pp, double t) {
        return smooth_top_controller(hk_fn(pp, t), agent, cc, pp).z;
    };

    // Evaluates the closed loop at (t, p, z): returns the row and the state derivative.
    const auto evaluate = [&](double t, const Vector& pp, const Vector& zz, TraceRow* row) {
        const BarrierEval hk = hk_fn(pp, t);
        Vector pdot;
        Vector zdot;
        if (!tr.second_order) {
            FilterResult fr;
            if (models.empty()) {
                fr.value = k_d(pp);
            } else {
                fr = filter_first_order(hk, agent, cc, pp, k_d(pp));
            }
            pdot = agent.f(pp) + agent.G(pp) * fr.value;
            if (row != nullptr) {
                row->z = fr.value;
                row->mu = fr.mu;
                row->flags |= (fr.active ? kFlagActive : 0u) | (fr.degenerate ? kFlagDegenerate : 0u);
            }
        } else {
            FilterResult fr;
            double h1 = std::numeric_limits<double>::infinity();
            if (models.empty()) {
                fr.value = k_d1(pp, zz);
            } else {
                const BacksteppingValue bv = backstepping_barrier(hk_fn, kk_fn, sigma, pp, zz, t);
                h1 = bv.h1;
                fr = filter_second_order(bv, agent, cc, pp, zz, k_d1(pp, zz));
            }
            pdot = agent.f(pp) + agent.G(pp) * zz;
            zdot = agent.f1(pp, zz) + agent.G1(pp, zz) * fr.value;
            if (row != nullptr) {
                row->z = zz;
                row->u = fr.value;
                row->h1 = h1;
                row->mu = fr.mu;
                row->flags |= (fr.active ? kFlagActive : 0u) | (fr.degenerate ? kFlagDegenerate : 0u);
            }
        }
        if (row != nullptr) {
            row->t = t;
            row->p = pp;
            row->h_k = hk.h;
            row->beta_k = beta;
            row->sigma_k = sigma;
        }
        return tr.second_order ? vstack(pdot, zdot) : pdot;
    };

    const auto pack = [&]() { return tr.second_order ? vstack(p, z) : p; };
    const auto unpack = [&](const Vector& s) {
        p = s.head(agent.p_dim);
        if (tr.second_order) {
            z = s.tail(agent.z_dim);
        }
    };

    bool stop = false;
    int k = 0;
    for (; k < cfg.run.steps && !stop; ++k) {
        const double t_k = k * Ts;
        StepRecord rec;
        rec.k = k;
        rec.t = t_k;
        rec.steady = true;
        Json snap_obs = Json::array();

        try {
            std::vector<ObstacleFlow> flows;
            std::vector<CCG> estimates;
            flows.reserve(obs.size());
            for (std::size_t i = 0; i < obs.size(); ++i) {
                ObstacleState& st = obs[i];
                const ObstacleSystem& sys = st.cfg->system;
                CCG est;
                if (st.estimator) {
                    const Vector v = sample_uniform_ellipsoid(sys.V.G(), st.rng) + sys.V.c();
                    est = st.estimator->update(sys.C * st.x + v);
                    rec.steady = rec.steady && st.estimator->steady();
                } else {
                    est = CCG::point(st.x);
                }
                if (st.cfg->input_law == InputLaw::UniformHold) {
                    st.w = sample_uniform_ellipsoid(sys.W.G(), st.rng) + sys.W.c();
                }
                ObstacleStepRecord orec;
                if (opts.check_estimates && est.num_generators() > 0) {
                    orec.estimate_contains_truth = contains(est, st.x);
                    if (!orec.estimate_contains_truth) {
                        ++tr.estimator_misses;
                        event(k, t_k, "estimator_miss",
                              "true state of '" + st.cfg->name + "' outside its estimate");
                    }
                }
                rec.obstacles.push_back(orec);
                flows.emplace_back(sys, est, st.enlarged, t_k);
                estimates.push_back(std::move(est));
            }

            if (k == 0) {
                for (std::size_t i = 0; i < obs.size(); ++i) {
                    if (contains(flows[i].at(t_k), p, kMembershipGamma, 0.0)) {
                        throw SafetyViolation("agent starts inside the enlarged estimate of '" +
                                              obs[i].cfg->name + "'");
                    }
                }
            }

            models.clear();
            std::vector<double> values;
            for (std::size_t i = 0; i < obs.size(); ++i) {
                ObstacleState& st = obs[i];
                const auto s0 = std::chrono::steady_clock::now();
                BarrierModel m = barrier_linear_model(flows[i], p, t_k, cp.gamma,
                                                      st.warm.size() ? &st.warm : nullptr);
                const auto s1 = std::chrono::steady_clock::now();
                m.obstacle_id = static_cast<int>(i);
                if (cp.secant_time_slope && st.estimator) {
                    const ReducedFlowSample end = flows[i].reduced(t_k + Ts);
                    const double h_end = solve_kkt(end.form, cp.gamma, p).value;
                    m.g_t = std::min(m.g_t, (h_end - m.h0) / Ts);
                }
                if (!st.estimator) {
                    st.warm = m.eta0;
                }
                ObstacleStepRecord& orec = rec.obstacles[i];
                orec.h0 = m.h0;
                orec.g_p = m.g_p;
                orec.g_t = m.g_t;
                orec.solve_ms = std::chrono::duration<double, std::milli>(s1 - s0).count();
                values.push_back(m.h0);
                models.push_back(std::move(m));
            }
            beta = models.empty() ? cp.beta_bar : select_beta(values, cp.beta_bar, cp.eps, cp.b);
            rec.beta_k = beta;

            if (tr.second_order) {
                const double hk0 = hk_fn(p, t_k).h;
                sigma = models.empty() ? cc.sigma_bar
                                       : select_sigma(kSigmaHeadroom * hk0, z, kk_fn(p, t_k),
                                                      cc.sigma_bar);
                rec.sigma_k = sigma;
            }

            if (want_snapshots) {
                for (std::size_t i = 0; i < obs.size(); ++i) {
                    const ObstacleState& st = obs[i];
                    const ObstacleSystem& sys = st.cfg->system;
                    const Eigen::Vector2d pos = as2d(sys.E * st.x);
                    std::vector<Eigen::Vector2d> est_poly;
                    if (estimates[i].num_generators() == 0) {
                        est_poly = shifted(st.body_contour, as2d(sys.E * estimates[i].c()));
                    } else {
                        est_poly = contour(minkowski_sum(linear_map(estimates[i], sys.E), st.cfg->body), ndir);
                    }
                    rec.obstacles[i].contour_area = polygon_area(est_poly);
                    snap_obs.push_back({{"id", i},
                                        {"name", st.cfg->name},
                                        {"estimate", ccg_to_json(estimates[i])},
                                        {"contour", contour_json(est_poly, Eigen::Vector2d::Zero())},
                                        {"true_contour", contour_json(st.body_contour, pos)},
                                        {"position", vector_to_json(sys.E * st.x)},
                                        {"h0", models[i].h0},
                                        {"g_p", vector_to_json(models[i].g_p)},
                                        {"g_t", models[i].g_t}});
                }
                Json snap = {{"k", k},
                             {"t", t_k},
                             {"beta_k", beta},
                             {"steady", rec.steady},
                             {"agent",
                              {{"p", vector_to_json(p)},
                               {"z", vector_to_json(z)},
                               {"contour", contour_json(agent_contour, as2d(p))}}},
                             {"obstacles", snap_obs}};
                if (tr.second_order) {
                    snap["sigma_k"] = sigma;
                }
                tr.snapshots.push_back(std::move(snap));
            }
        } catch (const SafetyViolation& e) {
            event(k, t_k, "safety_violation", e.what());
            tr.status = RunStatus::SafetyViolation;
            tr.steps.push_back(std::move(rec));
            break;
        } catch (const SolverFailure& e) {
            event(k, t_k, "solver_failure", e.what());
            tr.status = RunStatus::SolverFailure;
            tr.steps.push_back(std::move(rec));
            break;
        }
        tr.steps.push_back(std::move(rec));

        // Truth obstacle positions inside the interval use the closed-form solution.
        const auto truth_position = [&](const ObstacleState& st, double s) -> Vector {
            const ObstacleSystem& sys = st.cfg->system;
            return sys.E * (transition_matrix(sys.F, s) * st.x + gamma_exact(sys.F, s) * st.w);
        };

        try {
            for (int s = 0; s < nsub; ++s) {
                const double t = t_k + s * dt;
                TraceRow row;
                evaluate(t, p, z, &row);
                if (row.h_k < -kBarrierSlack || (tr.second_order && row.h1 < -kBarrierSlack)) {
                    event(k, t, "negative_barrier", "barrier value " + fmt(row.h_k) + " / " + fmt(row.h1));
                    tr.status = RunStatus::SafetyViolation;
                    stop = true;
                }
                if (opts.check_collisions) {
                    for (const auto& st : obs) {
                        const Vector rel = p - truth_position(st, t - t_k);
                        if (contains(st.enlarged_form, rel, kMembershipGamma, 0.0)) {
                            row.flags |= kFlagCollision;
                            ++tr.collisions;
                            event(k, t, "collision", "agent overlaps '" + st.cfg->name + "'");
                            tr.status = RunStatus::SafetyViolation;
                            stop = true;
                        }
                    }
                }
                tr.min_h_k = std::min(tr.min_h_k, row.h_k);
                if (tr.second_order) {
                    tr.min_h1 = std::min(tr.min_h1, row.h1);
                }
                tr.rows.push_back(std::move(row));
                if (stop) {
                    break;
                }
                const VectorField field = [&](double tt, const Vector& x) {
                    const Vector pp = x.head(agent.p_dim);
                    const Vector zz = tr.second_order ? Vector(x.tail(agent.z_dim)) : Vector();
                    return evaluate(tt, pp, zz, nullptr);
                };
                unpack(integrate_rk4(field, pack(), dt, 1, t));
            }
        } catch (const SolverFailure& e) {
            event(k, t_k, "solver_failure", e.what());
            tr.status = RunStatus::SolverFailure;
            stop = true;
        }

        for (auto& st : obs) {
            const ObstacleSystem& sys = st.cfg->system;
            st.x = transition_matrix(sys.F, Ts) * st.x + gamma_exact(sys.F, Ts) * st.w;
        }
    }

    if (!stop && tr.status == RunStatus::Safe && cfg.run.steps > 0) {
        TraceRow row;
        evaluate(cfg.run.steps * Ts, p, z, &row);
        tr.min_h_k = std::min(tr.min_h_k, row.h_k);
        if (tr.second_order) {
            tr.min_h1 = std::min(tr.min_h1, row.h1);
        }
        tr.rows.push_back(std::move(row));
    }
    tr.final_distance = (p - cp.goal).norm();
    tr.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return tr;
}

std::string trace_csv(const Trace& trace) {
    std::ostringstream out;
    out << "t";
    for (Eigen::Index i = 0; i < trace.p_dim; ++i) out << ",p_" << i + 1;
    for (Eigen::Index i = 0; i < trace.z_dim; ++i) out << ",z_" << i + 1;
    for (Eigen::Index i = 0; i < trace.u_dim; ++i) out << ",u_" << i + 1;
    out << ",h_k,h1,mu,beta_k,sigma_k,flags\n";
    for (const auto& r : trace.rows) {
        out << fmt(r.t);
        for (Eigen::Index i = 0; i < r.p.size(); ++i) out << ',' << fmt(r.p[i]);
        for (Eigen::Index i = 0; i < r.z.size(); ++i) out << ',' << fmt(r.z[i]);
        for (Eigen::Index i = 0; i < r.u.size(); ++i) out << ',' << fmt(r.u[i]);
        out << ',' << fmt(r.h_k) << ',';
        if (trace.second_order) out << fmt(r.h1);
        out << ',' << fmt(r.mu) << ',' << fmt(r.beta_k) << ',';
        if (trace.second_order) out << fmt(r.sigma_k);
        out << ',' << r.flags << '\n';
    }
    return out.str();
}

Json trace_meta(const Trace& trace, const ScenarioConfig& cfg) {
    Json events = Json::array();
    for (const auto& e : trace.events) {
        events.push_back({{"step", e.step}, {"t", e.t}, {"kind", e.kind}, {"message", e.message}});
    }
    Json per_obstacle = Json::array();
    double max_ms = 0.0;
    for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& s : trace.steps) {
            if (i < s.obstacles.size()) {
                total += s.obstacles[i].solve_ms;
                max_ms = std::max(max_ms, s.obstacles[i].solve_ms);
                ++count;
            }
        }
        per_obstacle.push_back(count ? total / static_cast<double>(count) : 0.0);
    }
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg.source)));
    const auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    return {{"name", cfg.name},
            {"config", cfg.source},
            {"config_hash", hash},
            {"seed", trace.seed},
            {"status", status_name(trace.status)},
            {"exit_code", static_cast<int>(trace.status)},
            {"steps_completed", trace.steps.size()},
            {"min_h_k", finite_or_null(trace.min_h_k)},
            {"min_h1", trace.second_order ? finite_or_null(trace.min_h1) : Json(nullptr)},
            {"collisions", trace.collisions},
            {"estimator_misses", trace.estimator_misses},
            {"initial_distance", trace.initial_distance},
            {"final_distance", trace.final_distance},
            {"events", events},
            {"timing",
             {{"wall_seconds", trace.wall_seconds},
              {"mean_solve_ms", trace.mean_solve_ms()},
              {"max_solve_ms", max_ms},
              {"per_obstacle_mean_ms", per_obstacle}}}};
}

void write_trace(const Trace& trace, const ScenarioConfig& cfg, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto write = [&](const char* name, const std::string& text) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) {
            throw ConfigError(std::string("cannot write ") + (fs::path(dir) / name).string());
        }
        f << text;
    };
    write("trace.csv", trace_csv(trace));
    write("snapshots.json", trace.snapshots.dump() + "\n");
    write("meta.json", trace_meta(trace, cfg).dump(2) + "\n");
}

}  // namespace ccgnav
