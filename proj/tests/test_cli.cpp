#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpk/cli.hpp"

using namespace lpk;
using namespace lpk::cli;

namespace {

std::string config_error(const json& j)
{
    try {
        RunConfig::from_json(j);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    return "";
}

std::string write_temp(const std::string& name, const std::string& text)
{
    const auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST_CASE("config round-trips through JSON")
{
    for (const auto& name : scenario_names()) {
        const RunConfig a = RunConfig::from_json(scenario_config(name));
        CHECK(a.scenario == name);
        const RunConfig b = RunConfig::from_json(a.to_json());
        CHECK(a.to_json() == b.to_json());
    }
}

TEST_CASE("config errors name the field")
{
    CHECK(config_error({{"potential", {{"kind", "cube"}}}}).find("potential.kind") != std::string::npos);
    CHECK(config_error({{"budgets", {{"max_n", 0}}}}).find("budgets.max_n") != std::string::npos);
    CHECK(config_error({{"grids", {{"radial", {{"h", -1.0}}}}}}).find("grids.radial") != std::string::npos);
    CHECK(config_error({{"checks", {{"lpnorms", {{"pairs", {{1}}}}}}}}).find("checks.lpnorms.pairs") !=
          std::string::npos);
    CHECK(config_error({{"seed", "abc"}}).find("seed") != std::string::npos);
    CHECK(config_error({{"colour", 1}}).find("colour: unknown field") != std::string::npos);
}

TEST_CASE("thresholds accept auto or numbers")
{
    const RunConfig c = RunConfig::from_json({{"thresholds", {{"N0", "auto"}, {"N1", 4.0}, {"delta", 0.01}}}});
    CHECK(c.N0.automatic);
    CHECK_FALSE(c.N1.automatic);
    CHECK(c.N1.value == 4.0);
    CHECK(*c.delta == 0.01);
    CHECK(config_error({{"thresholds", {{"N1", -1.0}}}}).find("thresholds.N1") != std::string::npos);
}

TEST_CASE("flags override the environment, which overrides the file")
{
    const std::string path = write_temp("lpk_cfg.json", R"({"seed": 5})");
    RunOptions o;
    o.config_path = path;
    CHECK(resolve_config(o).seed == 5);
    setenv("LPK_SEED", "9", 1);
    CHECK(resolve_config(o).seed == 9);
    o.seed = 12;
    CHECK(resolve_config(o).seed == 12);
    unsetenv("LPK_SEED");
}

TEST_CASE("exit codes")
{
    std::ostringstream log;
    RunOptions o;
    o.out = (std::filesystem::temp_directory_path() / "lpk_cli_test").string();
    o.config_path = write_temp("lpk_bad.json", R"({"potential": {"kind": 3}})");
    CHECK(run("kato", o, log) == exit_usage);
    o.config_path = write_temp("lpk_broken.json", "{ not json");
    CHECK(run("kato", o, log) == exit_usage);
    o.config_path.reset();
    CHECK(run("frobnicate", o, log) == exit_usage);
    o.scenario = "large-gaussian";
    CHECK(run("summability", o, log) == exit_usage);
    CHECK(log.str().find("4 pi") != std::string::npos);
    o.scenario = "small-yukawa";
    CHECK(run("kato", o, log) == exit_pass);
    std::ifstream report(*o.out + "/kato.json");
    const json j = json::parse(report);
    CHECK(j["verdict"] == "pass");
    CHECK(j["results"]["value"].get<double>() == doctest::Approx(2 * pi).epsilon(1e-9));
    CHECK(j.contains("config"));
    CHECK(j.contains("threshold_ledger"));
    std::filesystem::remove_all(*o.out);
}
