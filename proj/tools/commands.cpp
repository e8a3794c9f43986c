#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <spdlog/spdlog.h>

#include <ccgnav/errors.hpp>
#include <ccgnav/io.hpp>
#include <ccgnav/scenario.hpp>
#include <ccgnav/sim.hpp>

namespace ccgnav::cli {

namespace fs = std::filesystem;

namespace {

std::string params_file(std::size_t i) {
    return "params_" + std::to_string(i) + ".json";
}

// Refuses to clobber existing artifacts unless forced.
void prepare_out_dir(const std::string& out, const std::vector<std::string>& files, bool force) {
    if (out.empty()) {
        throw ConfigError("an output directory is required (--out)");
    }
    if (!force) {
        for (const auto& f : files) {
            if (fs::exists(fs::path(out) / f)) {
                throw ConfigError("'" + (fs::path(out) / f).string() +
                                  "' exists; pass --force to overwrite");
            }
        }
    }
    fs::create_directories(out);
}

template <typename Fn>
int guarded(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        spdlog::error("{}: configuration error: {}", what, e.what());
        return kExitConfigError;
    } catch (const DimensionError& e) {
        spdlog::error("{}: configuration error: {}", what, e.what());
        return kExitConfigError;
    } catch (const SafetyViolation& e) {
        spdlog::error("{}: safety violation: {}", what, e.what());
        return kExitSafetyViolation;
    } catch (const Error& e) {
        spdlog::error("{}: solver failure: {}", what, e.what());
        return kExitSolverFailure;
    } catch (const fs::filesystem_error& e) {
        spdlog::error("{}: {}", what, e.what());
        return kExitConfigError;
    }
}

}  // namespace

int cmd_precompute(const std::string& config, const std::string& out, bool force) {
    return guarded("precompute", [&] {
        const ScenarioConfig cfg = load_scenario(config);
        std::vector<std::string> files;
        for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
            files.push_back(params_file(i));
        }
        prepare_out_dir(out, files, force);
        std::size_t written = 0;
        for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
            const ObstacleConfig& o = cfg.obstacles[i];
            if (o.estimator != EstimatorKind::FiniteHorizon) {
                spdlog::info("obstacle '{}' uses the exact state; no parameters", o.name);
                continue;
            }
            const EstimatorParams p = precompute_params(o.system, cfg.horizon);
            std::ofstream f(fs::path(out) / params_file(i));
            f << params_to_json(p).dump(2) << "\n";
            spdlog::info("obstacle '{}': N = {}, R4 {}x{}, {} blocks", o.name, p.N, p.R4.rows(),
                         p.R4.cols(), p.blocks.size());
            ++written;
        }
        spdlog::info("wrote {} parameter file(s) to {}", written, out);
        return static_cast<int>(kExitOk);
    });
}

int cmd_run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
            bool force, const std::string& params_dir) {
    return guarded("run", [&] {
        const ScenarioConfig cfg = load_scenario(config);
        prepare_out_dir(out, {"trace.csv", "snapshots.json", "meta.json"}, force);

        RunOptions opts;
        if (!params_dir.empty()) {
            for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
                const fs::path path = fs::path(params_dir) / params_file(i);
                if (cfg.obstacles[i].estimator != EstimatorKind::FiniteHorizon) {
                    opts.params.push_back(EstimatorParams{});
                    continue;
                }
                std::ifstream f(path);
                if (!f) {
                    throw ConfigError("missing parameter file " + path.string());
                }
                Json j;
                try {
                    f >> j;
                } catch (const Json::exception& e) {
                    throw ConfigError(path.string() + ": " + e.what());
                }
                opts.params.push_back(params_from_json(j));
            }
        }

        const std::uint64_t s = seed.value_or(cfg.run.seed);
        spdlog::info("running '{}' for {} steps (seed {})", cfg.name, cfg.run.steps, s);
        const Trace trace = run_scenario(cfg, s, opts);
        write_trace(trace, cfg, out);
        for (const auto& e : trace.events) {
            spdlog::warn("step {} t={:.3f} {}: {}", e.step, e.t, e.kind, e.message);
        }
        spdlog::info("status {}, min h_k {:.6g}, mean barrier solve {:.3f} ms, {:.2f} s wall",
                     static_cast<int>(trace.status), trace.min_h_k, trace.mean_solve_ms(),
                     trace.wall_seconds);
        return static_cast<int>(trace.status);
    });
}

int cmd_check(const std::string& config, const std::string& params_dir, std::uint64_t seed,
              std::ostream& report) {
    return guarded("check", [&] {
        std::vector<CheckItem> items = run_invariant_suite(seed);
        if (!config.empty()) {
            const ScenarioConfig cfg = load_scenario(config);
            for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
                const ObstacleConfig& o = cfg.obstacles[i];
                if (o.estimator != EstimatorKind::FiniteHorizon) {
                    continue;
                }
                EstimatorParams p;
                if (!params_dir.empty()) {
                    std::ifstream f(fs::path(params_dir) / params_file(i));
                    if (!f) {
                        items.push_back({"params." + o.name, false, "missing " + params_file(i)});
                        continue;
                    }
                    Json j;
                    try {
                        f >> j;
                        p = params_from_json(j);
                    } catch (const std::exception& e) {
                        items.push_back({"params." + o.name, false, e.what()});
                        continue;
                    }
                } else {
                    p = precompute_params(o.system, cfg.horizon);
                }
                CheckItem item = check_params_equivalence(o.system, p, seed);
                item.name = "params." + o.name;
                items.push_back(std::move(item));
            }
        }
        bool ok = true;
        for (const auto& it : items) {
            report << (it.ok ? "PASS " : "FAIL ") << it.name;
            if (!it.detail.empty()) {
                report << "  (" << it.detail << ")";
            }
            report << "\n";
            ok = ok && it.ok;
        }
        report << (ok ? "all checks passed" : "some checks failed") << "\n";
        return ok ? static_cast<int>(kExitOk) : static_cast<int>(kExitCheckFailed);
    });
}

}  // namespace ccgnav::cli
