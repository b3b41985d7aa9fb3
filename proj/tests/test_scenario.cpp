#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pcaf/error.hpp"
#include "pcaf/scenario.hpp"

using namespace pcaf;
using namespace pcaf::lab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "pcaf-unit" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(PCAF_LAB_PATH) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json metric_config(const fs::path& out) {
    return {{"kind", "metric"},
            {"output", (out / "m").string()},
            {"parameters",
             {{"model", "BM1D"},
              {"measures",
               json::array({{{"name", "a"}, {"measure", {{"dim", 1}, {"atoms", json::array({json::array({0.0, 1.0})})}}}},
                            {{"name", "b"}, {"measure", {{"dim", 1}, {"atoms", json::array({json::array({1.0, 1.0})})}}}}})}}}};
}

}  // namespace

TEST_SUITE("scenario") {
    TEST_CASE("overrides parse JSON values and fall back to strings") {
        json c = json::object();
        apply_override(c, "parameters.paths=12");
        apply_override(c, "parameters.model=BM1D");
        apply_override(c, "seeds=[1,2]");
        CHECK(c["parameters"]["paths"] == 12);
        CHECK(c["parameters"]["model"] == "BM1D");
        CHECK(c["seeds"] == json::array({1, 2}));
        CHECK_THROWS_AS(apply_override(c, "novalue"), Error);
    }

    TEST_CASE("metric scenario materializes defaults and reruns identically") {
        const auto dir = scratch("metric");
        const auto r1 = run_scenario(metric_config(dir));
        CHECK(r1.passed());
        CHECK(r1.config.contains("formats"));
        CHECK(r1.config["parameters"].contains("alpha"));
        write_artifacts(r1);
        const auto first = slurp(dir / "m.csv");
        const auto r2 = run_scenario(metric_config(dir));
        write_artifacts(r2);
        CHECK(slurp(dir / "m.csv") == first);
        CHECK(first.find("1.0345987528") != std::string::npos);
        CHECK(fs::exists(dir / "m.config.json"));
        CHECK(fs::exists(dir / "m.summary.txt"));
        CHECK(fs::exists(dir / "m.plot.dat"));
    }

    TEST_CASE("configuration errors carry the key path") {
        json c{{"kind", "mc-convergence"}, {"parameters", {{"paths", 0}}}};
        try {
            run_scenario(c);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigInvalid);
            CHECK(std::string(e.what()).find("paths") != std::string::npos);
        }
        CHECK_THROWS_AS(run_scenario(json{{"kind", "nope"}}), Error);
        CHECK_THROWS_AS(run_scenario(json::array()), Error);
    }

    TEST_CASE("unsupported formats and empty results") {
        const auto dir = scratch("empty");
        ScenarioResult empty;
        empty.kind = "metric";
        try {
            emit_report(empty, "xml", (dir / "e").string());
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnsupportedFormat);
        }
        for (const auto* fmt : {"csv", "json", "plotdata"}) CHECK_FALSE(emit_report(empty, fmt, (dir / "e").string()).empty());
        CHECK(fs::exists(dir / "e.csv"));
        CHECK(slurp(dir / "e.csv").empty());
        const auto doc = json::parse(slurp(dir / "e.json"));
        CHECK(doc["pass"] == true);
        CHECK(empty.passed());
    }

    TEST_CASE("conditions scenario reports membership") {
        const auto dir = scratch("cond");
        json c{{"kind", "conditions"},
               {"output", (dir / "c").string()},
               {"parameters", {{"family", {{"corpus", "power_beta"}, {"params", {{"d", 2}, {"beta", 1.0}}}}}}}};
        const auto r = run_scenario(c);
        CHECK(r.passed());
        CHECK(r.summary().find("PASS") != std::string::npos);
        CHECK(r.report.contains("Ac2"));
    }

    TEST_CASE("command line exit codes") {
        const auto dir = scratch("cli");
        {
            std::ofstream f(dir / "metric.json");
            f << metric_config(dir).dump();
        }
        CHECK(run_cli("metric run " + (dir / "metric.json").string()) == 0);
        CHECK(run_cli("metric run " + (dir / "metric.json").string() + " --set formats='[\"xml\"]'") == 2);
        CHECK(run_cli("mc run " + (dir / "metric.json").string()) == 2);
        CHECK(run_cli("mc run " + (dir / "metric.json").string() + " --set kind=mc-convergence --set parameters.paths=0") == 2);
        CHECK(run_cli("metric run " + (dir / "missing.json").string()) == 2);
        // a failing expectation is an assertion failure
        {
            json c{{"kind", "conditions"},
                   {"output", (dir / "c").string()},
                   {"parameters",
                    {{"family", {{"corpus", "counterexample_i"}}}, {"expect", {{"Ac1", "tends-to-zero"}}}}}};
            std::ofstream f(dir / "cond.json");
            f << c.dump();
        }
        CHECK(run_cli("conditions run " + (dir / "cond.json").string()) == 1);
        // a module failure inside a step is a runtime error
        {
            json c{{"kind", "metric"},
                   {"output", (dir / "m3").string()},
                   {"parameters",
                    {{"model", "BM3D"},
                     {"measures",
                      json::array({{{"name", "a"}, {"measure", {{"dim", 3}, {"atoms", json::array({json::array({0, 0, 0, 1.0})})}}}},
                                   {{"name", "b"}, {"measure", {{"dim", 3}, {"atoms", json::array({json::array({1, 0, 0, 1.0})})}}}}})}}}};
            std::ofstream f(dir / "m3.json");
            f << c.dump();
        }
        CHECK(run_cli("metric run " + (dir / "m3.json").string()) == 3);
    }
}
