#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpk/verify.hpp"

namespace lpk::cli {

using json = nlohmann::json;

enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_usage = 2, exit_numeric = 3 };

/// Threshold value or "auto" (resolved through the majorant and N1 search).
struct Threshold {
    bool automatic = true;
    double value = 0.0;
};

struct SummabilityTriple {
    double N = 0.0;
    double t = 0.0;  // N |x - y|
};

struct RunConfig {
    std::string scenario = "small-yukawa";

    std::string potential_kind = "yukawa";  // zero, ball, gaussian, yukawa, smooth_bump
    double amplitude = 0.5;
    double length = 1.0;  // radius, width or range by kind

    std::vector<int> m_list{1, 3};
    std::optional<double> sobolev_s;

    Threshold N0, N1;
    std::optional<double> delta;

    GridSpec quadrature;
    RadialDiscretization radial;
    DecayLattice lattice;

    std::size_t mc_samples = 4000;
    int max_n = 4;
    double term_tolerance = 1e-2;
    int lambda_nodes = 24;

    std::vector<SummabilityTriple> summability{{0.0625, 0.0}, {0.125, 0.25}, {0.25, 0.25}};
    Vec3 summability_point{0.3, 0.1, 0.2};
    int summability_n_max = 4;
    std::size_t summability_samples = 40000;

    int fubini_configs = 10;

    std::vector<double> S_lambdas{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    int domination_pairs = 20;
    std::vector<double> vr0_lambdas;  // empty: 16 values 0, 0.25, ..., 3.75
    std::vector<double> l43_lambdas{1.0, 4.0, 16.0, 64.0};
    int l43_trials = 8;
    bool search_N1 = true;

    int lowfreq_n_max = 8;
    int lowfreq_calibration = 5;
    int lowfreq_samples = 10;

    std::vector<double> lp_N{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<std::pair<double, double>> lp_pairs;  // empty: (2,2) (1,2) (1,inf)
    int lp_trials = 24;

    double sobolev_exponent = 1.0;
    double sobolev_p = 2.0, sobolev_q = 6.0;
    std::vector<int> sobolev_j{-2, -1, 0, 1, 2, 3};
    std::string sobolev_family = "gaussian";

    std::vector<double> compare_N{0.25, 0.5, 1.0, 2.0, 4.0};
    std::vector<double> compare_t{0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 9.0};
    double compare_tolerance = 1e-2;

    std::uint64_t seed = 1;
    std::string output = "out";

    static RunConfig from_json(const json& j);
    json to_json() const;
    PotentialModel potential() const;
    /// Throws Error(config) naming the offending field.
    void validate() const;
};

/// Built-in scenarios: small-yukawa, free, large-gaussian, deep-well, smoke.
std::vector<std::string> scenario_names();
json scenario_config(const std::string& name);

struct RunOptions {
    std::optional<std::string> config_path;
    std::optional<std::string> scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool no_cache = false;
    std::optional<int> jobs;
};

/// Resolves config and environment overrides (LPK_SEED, LPK_JOBS), in that order, below the flags.
RunConfig resolve_config(const RunOptions& options);

std::vector<std::string> subcommands();

/// Runs one subcommand and writes <out>/<subcommand>.json plus CSV tables. Returns an ExitCode.
int run(const std::string& subcommand, const RunOptions& options, std::ostream& log);

int main_entry(int argc, char** argv);

} // namespace lpk::cli
