#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <ccgnav/estimation.hpp>

namespace ccgnav::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitSafetyViolation = 2,
    kExitSolverFailure = 3,
    kExitConfigError = 4,
};

/// Writes params_<i>.json per finite-horizon obstacle into `out`.
int cmd_precompute(const std::string& config, const std::string& out, bool force);

/// Runs the scenario and writes trace.csv, snapshots.json and meta.json into `out`.
/// `params_dir`, when non-empty, supplies precomputed params_<i>.json files.
int cmd_run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
            bool force, const std::string& params_dir = {});

/// Fast invariant suite. With a config and params directory it also verifies the stored
/// estimator parameters against the recursive estimator.
int cmd_check(const std::string& config, const std::string& params_dir, std::uint64_t seed,
              std::ostream& report);

struct CheckItem {
    std::string name;
    bool ok = false;
    std::string detail;
};

/// Individual checks, exposed for testing.
std::vector<CheckItem> run_invariant_suite(std::uint64_t seed);

/// Compares explicit estimation with `params` against the recursive chain on a synthetic
/// measurement window. On mismatch, `detail` names the recursion step whose rows differ.
CheckItem check_params_equivalence(const ObstacleSystem& sys, const EstimatorParams& params,
                                   std::uint64_t seed);

}  // namespace ccgnav::cli
