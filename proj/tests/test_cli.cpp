#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <ccgnav/io.hpp>
#include <ccgnav/scenario.hpp>

#include "commands.hpp"
#include "oracles.hpp"

using namespace ccgnav;
using namespace ccgnav::test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("ccgnav_test_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

Json read_json(const std::string& path) {
    std::ifstream f(path);
    return Json::parse(f);
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream(path) << j.dump(2);
}

// Short copy of the bundled two-obstacle scene.
std::string short_scene(const TempDir& dir, int steps, int N = 5) {
    Json j = read_json(scenario_dir() + "/example2.cfg");
    j["run"]["steps"] = steps;
    j["run"]["contour_directions"] = 16;
    j["estimator"]["N"] = N;
    const std::string path = dir / "scene.cfg";
    write_json(path, j);
    return path;
}

}  // namespace

TEST_CASE("precompute command") {
    TempDir dir;
    const std::string cfg = short_scene(dir, 2);
    REQUIRE(cli::cmd_precompute(cfg, dir / "params", false) == cli::kExitOk);
    CHECK(fs::exists(dir / "params/params_0.json"));
    CHECK(fs::exists(dir / "params/params_1.json"));
    const EstimatorParams p = params_from_json(read_json(dir / "params/params_0.json"));
    CHECK(p.N == 5);

    const std::string first = read_text(dir / "params/params_0.json");
    CHECK(cli::cmd_precompute(cfg, dir / "params", false) == cli::kExitConfigError);
    CHECK(cli::cmd_precompute(cfg, dir / "params", true) == cli::kExitOk);
    CHECK(read_text(dir / "params/params_0.json") == first);

    const std::string bad = short_scene(dir, 2, 0);
    CHECK(cli::cmd_precompute(bad, dir / "p0", false) == cli::kExitConfigError);
    CHECK(cli::cmd_precompute(dir / "missing.cfg", dir / "p1", false) == cli::kExitConfigError);
}

TEST_CASE("run command") {
    TempDir dir;
    const std::string cfg = short_scene(dir, 4);
    REQUIRE(cli::cmd_run(cfg, dir / "out", std::nullopt, false) == cli::kExitOk);
    for (const char* f : {"trace.csv", "snapshots.json", "meta.json"}) {
        CHECK(fs::exists(dir / (std::string("out/") + f)));
    }
    const Json meta = read_json(dir / "out/meta.json");
    CHECK(meta["exit_code"] == 0);
    CHECK(meta["steps_completed"] == 4);
    const Json snaps = read_json(dir / "out/snapshots.json");
    REQUIRE(snaps.is_array());
    CHECK(snaps.size() == 4);
    CHECK(snaps[0]["obstacles"][0].contains("contour"));

    SUBCASE("refuses to overwrite") {
        CHECK(cli::cmd_run(cfg, dir / "out", std::nullopt, false) == cli::kExitConfigError);
        CHECK(cli::cmd_run(cfg, dir / "out", std::nullopt, true) == cli::kExitOk);
    }
    SUBCASE("precomputed parameters give the same trace") {
        REQUIRE(cli::cmd_precompute(cfg, dir / "params", false) == cli::kExitOk);
        REQUIRE(cli::cmd_run(cfg, dir / "out2", std::nullopt, false, dir / "params") == cli::kExitOk);
        CHECK(read_text(dir / "out/trace.csv") == read_text(dir / "out2/trace.csv"));
    }
    SUBCASE("seed override") {
        REQUIRE(cli::cmd_run(cfg, dir / "out3", 99, false) == cli::kExitOk);
        CHECK(read_json(dir / "out3/meta.json")["seed"] == 99);
    }
    SUBCASE("safety violation exit code") {
        Json j = read_json(cfg);
        j["obstacles"][0]["x0"] = j["agent"]["p0"];
        write_json(dir / "bad.cfg", j);
        CHECK(cli::cmd_run(dir / "bad.cfg", dir / "out4", std::nullopt, false) ==
              cli::kExitSafetyViolation);
        CHECK(read_json(dir / "out4/meta.json")["status"] == "safety_violation");
    }
    SUBCASE("malformed config") {
        std::ofstream(dir / "broken.cfg") << "{ not json";
        CHECK(cli::cmd_run(dir / "broken.cfg", dir / "out5", std::nullopt, false) ==
              cli::kExitConfigError);
    }
}

TEST_CASE("check command") {
    SUBCASE("invariant suite") {
        for (const auto& item : cli::run_invariant_suite(5)) {
            INFO(item.name << ": " << item.detail);
            CHECK(item.ok);
        }
    }
    SUBCASE("stored parameters") {
        TempDir dir;
        const std::string cfg = short_scene(dir, 2);
        REQUIRE(cli::cmd_precompute(cfg, dir / "params", false) == cli::kExitOk);
        std::ostringstream report;
        CHECK(cli::cmd_check(cfg, dir / "params", 1, report) == cli::kExitOk);
        CHECK(report.str().find("all checks passed") != std::string::npos);

        const std::string path = dir / "params/params_1.json";
        EstimatorParams p = params_from_json(read_json(path));
        p.R4(p.R4.rows() - 1, 0) += 0.25;
        write_json(path, params_to_json(p));
        std::ostringstream bad;
        CHECK(cli::cmd_check(cfg, dir / "params", 1, bad) == cli::kExitCheckFailed);
        CHECK(bad.str().find("FAIL params.ellipsoid") != std::string::npos);
        CHECK(bad.str().find("recursion step l = ") != std::string::npos);
    }
    SUBCASE("truncated parameters") {
        const ObstacleSystem sys = bundled("example2.cfg").obstacles[0].system;
        EstimatorParams p = precompute_params(sys, 3);
        p.t2.conservativeResize(p.t2.size() - 1);
        const cli::CheckItem item = cli::check_params_equivalence(sys, p, 1);
        CHECK_FALSE(item.ok);
    }
}
