#include "lpk/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>

namespace lpk::cli {

namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- config reading

class Reader {
public:
    Reader(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
        for (const auto& [key, value] : j_.items())
            if (!allowed.count(key)) fail(field(key), "unknown field");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& at(const std::string& key) const { return j_.at(key); }

    template <class T>
    void get(const std::string& key, T& out) const
    {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(field(key), "wrong type");
        }
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what)
    {
        throw Error(ErrorKind::config, path + ": " + what);
    }

private:
    const json& j_;
    std::string path_;
};

double number_or_inf(const json& v, const std::string& path)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "inf") return inf;
    Reader::fail(path, "expected a number or \"inf\"");
}

json number_json(double v)
{
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    if (std::isnan(v)) return json(nullptr);
    return json(v);
}

Threshold read_threshold(const Reader& r, const std::string& key)
{
    Threshold t;
    if (!r.has(key)) return t;
    const json& v = r.at(key);
    if (v.is_string() && v.get<std::string>() == "auto") return t;
    t.automatic = false;
    t.value = number_or_inf(v, r.field(key));
    return t;
}

json threshold_json(const Threshold& t) { return t.automatic ? json("auto") : number_json(t.value); }

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

} // namespace

RunConfig RunConfig::from_json(const json& j)
{
    RunConfig c;
    const Reader top(j, "",
                     {"scenario", "potential", "profile", "thresholds", "grids", "budgets", "checks", "seed", "output"});
    top.get("scenario", c.scenario);
    top.get("seed", c.seed);
    top.get("output", c.output);
    if (top.has("potential")) {
        const Reader p(top.at("potential"), "potential", {"kind", "amplitude", "length"});
        p.get("kind", c.potential_kind);
        p.get("amplitude", c.amplitude);
        p.get("length", c.length);
    }
    if (top.has("profile")) {
        const Reader p(top.at("profile"), "profile", {"m", "s"});
        p.get("m", c.m_list);
        if (p.has("s")) {
            double s = 0.0;
            p.get("s", s);
            c.sobolev_s = s;
        }
    }
    if (top.has("thresholds")) {
        const Reader t(top.at("thresholds"), "thresholds", {"N0", "N1", "delta"});
        c.N0 = read_threshold(t, "N0");
        c.N1 = read_threshold(t, "N1");
        if (t.has("delta")) {
            double d = 0.0;
            t.get("delta", d);
            c.delta = d;
        }
    }
    if (top.has("grids")) {
        const Reader g(top.at("grids"), "grids", {"quadrature", "radial", "lattice"});
        if (g.has("quadrature")) {
            const Reader q(g.at("quadrature"), "grids.quadrature", {"radius", "panels", "per_panel", "n_theta", "n_phi"});
            q.get("radius", c.quadrature.radius);
            q.get("panels", c.quadrature.panels);
            q.get("per_panel", c.quadrature.per_panel);
            q.get("n_theta", c.quadrature.n_theta);
            q.get("n_phi", c.quadrature.n_phi);
        }
        if (g.has("radial")) {
            const Reader r(g.at("radial"), "grids.radial", {"R_max", "h", "l_max"});
            r.get("R_max", c.radial.R_max);
            r.get("h", c.radial.h);
            r.get("l_max", c.radial.l_max);
        }
        if (g.has("lattice")) {
            const Reader l(g.at("lattice"), "grids.lattice",
                           {"N", "t_near", "t_far", "far_start", "window_samples", "window_ratio"});
            l.get("N", c.lattice.N);
            l.get("t_near", c.lattice.t_near);
            l.get("t_far", c.lattice.t_far);
            l.get("far_start", c.lattice.far_start);
            l.get("window_samples", c.lattice.window_samples);
            l.get("window_ratio", c.lattice.window_ratio);
        }
    }
    if (top.has("budgets")) {
        const Reader b(top.at("budgets"), "budgets", {"mc_samples", "max_n", "term_tolerance", "lambda_nodes"});
        b.get("mc_samples", c.mc_samples);
        b.get("max_n", c.max_n);
        b.get("term_tolerance", c.term_tolerance);
        b.get("lambda_nodes", c.lambda_nodes);
    }
    if (top.has("checks")) {
        const Reader k(top.at("checks"), "checks",
                       {"summability", "fubini", "thresholds", "lowfreq", "lpnorms", "sobolev", "oracle_compare"});
        if (k.has("summability")) {
            const Reader s(k.at("summability"), "checks.summability", {"triples", "point", "n_max", "samples"});
            if (s.has("triples")) {
                c.summability.clear();
                for (const auto& t : s.at("triples")) {
                    if (!t.is_array() || t.size() != 2) Reader::fail(s.field("triples"), "expected [N, N rho] pairs");
                    c.summability.push_back({t[0].get<double>(), t[1].get<double>()});
                }
            }
            if (s.has("point")) {
                std::vector<double> p;
                s.get("point", p);
                if (p.size() != 3) Reader::fail(s.field("point"), "expected 3 coordinates");
                c.summability_point = Vec3(p[0], p[1], p[2]);
            }
            s.get("n_max", c.summability_n_max);
            s.get("samples", c.summability_samples);
        }
        if (k.has("fubini")) {
            const Reader f(k.at("fubini"), "checks.fubini", {"configs"});
            f.get("configs", c.fubini_configs);
        }
        if (k.has("thresholds")) {
            const Reader t(k.at("thresholds"), "checks.thresholds",
                           {"S_lambdas", "domination_pairs", "vr0_lambdas", "l43_lambdas", "l43_trials", "search_N1"});
            t.get("S_lambdas", c.S_lambdas);
            t.get("domination_pairs", c.domination_pairs);
            t.get("vr0_lambdas", c.vr0_lambdas);
            t.get("l43_lambdas", c.l43_lambdas);
            t.get("l43_trials", c.l43_trials);
            t.get("search_N1", c.search_N1);
        }
        if (k.has("lowfreq")) {
            const Reader l(k.at("lowfreq"), "checks.lowfreq", {"n_max", "calibration", "samples"});
            l.get("n_max", c.lowfreq_n_max);
            l.get("calibration", c.lowfreq_calibration);
            l.get("samples", c.lowfreq_samples);
        }
        if (k.has("lpnorms")) {
            const Reader l(k.at("lpnorms"), "checks.lpnorms", {"N", "pairs", "trials"});
            l.get("N", c.lp_N);
            l.get("trials", c.lp_trials);
            if (l.has("pairs")) {
                for (const auto& pq : l.at("pairs")) {
                    if (!pq.is_array() || pq.size() != 2) Reader::fail(l.field("pairs"), "expected [p, q] pairs");
                    c.lp_pairs.emplace_back(number_or_inf(pq[0], l.field("pairs")), number_or_inf(pq[1], l.field("pairs")));
                }
            }
        }
        if (k.has("sobolev")) {
            const Reader s(k.at("sobolev"), "checks.sobolev", {"s", "p", "q", "j", "family"});
            s.get("s", c.sobolev_exponent);
            s.get("p", c.sobolev_p);
            s.get("q", c.sobolev_q);
            s.get("j", c.sobolev_j);
            s.get("family", c.sobolev_family);
        }
        if (k.has("oracle_compare")) {
            const Reader o(k.at("oracle_compare"), "checks.oracle_compare", {"N", "t", "tolerance"});
            o.get("N", c.compare_N);
            o.get("t", c.compare_t);
            o.get("tolerance", c.compare_tolerance);
        }
    }
    c.validate();
    return c;
}

json RunConfig::to_json() const
{
    json j;
    j["scenario"] = scenario;
    j["potential"] = {{"kind", potential_kind}, {"amplitude", amplitude}, {"length", length}};
    j["profile"] = {{"m", m_list}, {"s", sobolev_s ? json(*sobolev_s) : json(nullptr)}};
    j["thresholds"] = {{"N0", threshold_json(N0)},
                       {"N1", threshold_json(N1)},
                       {"delta", delta ? json(*delta) : json(nullptr)}};
    j["grids"]["quadrature"] = {{"radius", quadrature.radius},
                                {"panels", quadrature.panels},
                                {"per_panel", quadrature.per_panel},
                                {"n_theta", quadrature.n_theta},
                                {"n_phi", quadrature.n_phi}};
    j["grids"]["radial"] = {{"R_max", radial.R_max}, {"h", radial.h}, {"l_max", radial.l_max}};
    j["grids"]["lattice"] = {{"N", lattice.N},
                             {"t_near", lattice.t_near},
                             {"t_far", lattice.t_far},
                             {"far_start", lattice.far_start},
                             {"window_samples", lattice.window_samples},
                             {"window_ratio", lattice.window_ratio}};
    j["budgets"] = {{"mc_samples", mc_samples},
                    {"max_n", max_n},
                    {"term_tolerance", term_tolerance},
                    {"lambda_nodes", lambda_nodes}};
    json triples = json::array();
    for (const auto& t : summability) triples.push_back({t.N, t.t});
    j["checks"]["summability"] = {{"triples", triples},
                                  {"point", vec3_json(summability_point)},
                                  {"n_max", summability_n_max},
                                  {"samples", summability_samples}};
    j["checks"]["fubini"] = {{"configs", fubini_configs}};
    j["checks"]["thresholds"] = {{"S_lambdas", S_lambdas},     {"domination_pairs", domination_pairs},
                                 {"vr0_lambdas", vr0_lambdas}, {"l43_lambdas", l43_lambdas},
                                 {"l43_trials", l43_trials},   {"search_N1", search_N1}};
    j["checks"]["lowfreq"] = {
        {"n_max", lowfreq_n_max}, {"calibration", lowfreq_calibration}, {"samples", lowfreq_samples}};
    json pairs = json::array();
    for (const auto& [p, q] : lp_pairs) pairs.push_back({number_json(p), number_json(q)});
    j["checks"]["lpnorms"] = {{"N", lp_N}, {"pairs", pairs}, {"trials", lp_trials}};
    j["checks"]["sobolev"] = {{"s", sobolev_exponent}, {"p", sobolev_p}, {"q", sobolev_q}, {"j", sobolev_j},
                              {"family", sobolev_family}};
    j["checks"]["oracle_compare"] = {{"N", compare_N}, {"t", compare_t}, {"tolerance", compare_tolerance}};
    j["seed"] = seed;
    j["output"] = output;
    return j;
}

PotentialModel RunConfig::potential() const
{
    if (potential_kind == "zero") return PotentialModel::zero();
    if (potential_kind == "ball") return PotentialModel::ball(amplitude, length);
    if (potential_kind == "gaussian") return PotentialModel::gaussian(amplitude, length);
    if (potential_kind == "yukawa") return PotentialModel::yukawa(amplitude, length);
    if (potential_kind == "smooth_bump") return PotentialModel::smooth_bump(amplitude, length);
    throw Error(ErrorKind::config, "potential.kind: unknown kind '" + potential_kind + "'");
}

void RunConfig::validate() const
{
    auto require = [](bool ok, const std::string& path, const std::string& what) {
        if (!ok) Reader::fail(path, what);
    };
    require(!scenario.empty(), "scenario", "must not be empty");
    require(std::set<std::string>{"zero", "ball", "gaussian", "yukawa", "smooth_bump"}.count(potential_kind) == 1,
            "potential.kind", "must be one of zero, ball, gaussian, yukawa, smooth_bump");
    require(length > 0.0, "potential.length", "must be > 0");
    require(!m_list.empty(), "profile.m", "needs at least one order");
    for (int m : m_list) require(m >= 1 && m <= 4, "profile.m", "orders must lie in 1..4");
    require(!sobolev_s || (*sobolev_s > 0.0 && *sobolev_s < 3.0), "profile.s", "must lie in (0, 3)");
    require(N0.automatic || N0.value >= 0.0, "thresholds.N0", "must be >= 0 or \"auto\"");
    require(N1.automatic || N1.value > 0.0, "thresholds.N1", "must be > 0 or \"auto\"");
    require(!delta || *delta > 0.0, "thresholds.delta", "must be > 0");
    require(quadrature.radius > 0.0 && quadrature.panels >= 1 && quadrature.per_panel >= 1 &&
                quadrature.n_theta >= 2 && quadrature.n_phi >= 3,
            "grids.quadrature", "needs radius > 0, panels >= 1, per_panel >= 1, n_theta >= 2, n_phi >= 3");
    try {
        radial.validate();
    } catch (const Error& e) {
        Reader::fail("grids.radial", e.what());
    }
    require(!lattice.N.empty(), "grids.lattice.N", "needs at least one value");
    for (double N : lattice.N) require(N > 0.0, "grids.lattice.N", "values must be > 0");
    require(lattice.window_samples >= 1, "grids.lattice.window_samples", "must be >= 1");
    require(lattice.window_ratio >= 1.0, "grids.lattice.window_ratio", "must be >= 1");
    require(mc_samples >= 1, "budgets.mc_samples", "must be >= 1");
    require(max_n >= 1 && max_n <= 16, "budgets.max_n", "must lie in 1..16");
    require(term_tolerance > 0.0, "budgets.term_tolerance", "must be > 0");
    require(lambda_nodes >= 2, "budgets.lambda_nodes", "must be >= 2");
    require(summability_n_max >= 1 && summability_n_max <= 6, "checks.summability.n_max", "must lie in 1..6");
    for (const auto& t : summability) require(t.N > 0.0 && t.t >= 0.0, "checks.summability.triples", "need N > 0, N rho >= 0");
    require(fubini_configs >= 1, "checks.fubini.configs", "must be >= 1");
    require(!S_lambdas.empty(), "checks.thresholds.S_lambdas", "needs at least one value");
    require(l43_lambdas.size() >= 2, "checks.thresholds.l43_lambdas", "needs at least two values");
    require(lp_N.size() >= 2, "checks.lpnorms.N", "needs at least two values");
    require(sobolev_family == "gaussian" || sobolev_family == "bump", "checks.sobolev.family",
            "must be gaussian or bump");
    require(compare_N.size() >= 1 && compare_t.size() >= 1, "checks.oracle_compare", "needs N and t values");
}

// ---------------------------------------------------------------- scenarios

std::vector<std::string> scenario_names() { return {"small-yukawa", "free", "large-gaussian", "deep-well", "smoke"}; }

json scenario_config(const std::string& name)
{
    if (name == "small-yukawa") return json{{"scenario", name}};
    if (name == "free") return json{{"scenario", name}, {"potential", {{"kind", "zero"}}}};
    if (name == "large-gaussian")
        return json{{"scenario", name},
                    {"potential", {{"kind", "gaussian"}, {"amplitude", 6.0}, {"length", 1.0}}},
                    {"checks", {{"thresholds", {{"search_N1", false}}}}}};
    if (name == "deep-well")
        return json{{"scenario", name}, {"potential", {{"kind", "ball"}, {"amplitude", -10.0}, {"length", 1.0}}}};
    if (name == "smoke")
        return json{
            {"scenario", name},
            {"profile", {{"m", {1}}}},
            {"grids",
             {{"quadrature", {{"radius", 3.0}, {"panels", 2}, {"per_panel", 3}, {"n_theta", 4}, {"n_phi", 8}}},
              {"radial", {{"R_max", 16.0}, {"h", 0.01}, {"l_max", 12}}},
              {"lattice",
               {{"N", {1.0, 2.0}}, {"t_near", {0.0, 1.0}}, {"t_far", {5.0, 10.0, 20.0}}, {"window_samples", 2}}}}},
            {"budgets", {{"mc_samples", 1024}, {"max_n", 2}}},
            {"checks",
             {{"summability", {{"triples", {{0.25, 0.25}}}, {"n_max", 2}, {"samples", 2048}}},
              {"fubini", {{"configs", 2}}},
              {"thresholds",
               {{"S_lambdas", {0.0, 1.0}}, {"domination_pairs", 3}, {"vr0_lambdas", {0.0, 1.0}},
                {"l43_lambdas", {1.0, 4.0}}, {"l43_trials", 2}, {"search_N1", false}}},
              {"lowfreq", {{"n_max", 3}, {"calibration", 2}, {"samples", 2}}},
              {"lpnorms", {{"N", {0.5, 1.0, 2.0, 4.0}}, {"trials", 8}}},
              {"sobolev", {{"j", {-1, 0, 1, 2, 3, 4}}}},
              {"oracle_compare", {{"N", {1.0, 2.0}}, {"t", {0.0, 1.0, 3.0}}}}}}};
    throw Error(ErrorKind::config, "scenario: unknown scenario '" + name + "'");
}

std::vector<std::string> subcommands()
{
    return {"kato", "kernel", "decay", "summability", "lowfreq", "lpnorms", "sobolev", "oracle-compare", "thresholds",
            "all"};
}

RunConfig resolve_config(const RunOptions& options)
{
    json j;
    if (options.config_path) {
        std::ifstream is(*options.config_path);
        if (!is) throw Error(ErrorKind::config, "--config: cannot open " + *options.config_path);
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::config, "--config: " + std::string(e.what()));
        }
    } else {
        j = scenario_config(options.scenario.value_or("small-yukawa"));
    }
    RunConfig cfg = RunConfig::from_json(j);
    if (const char* s = std::getenv("LPK_SEED")) {
        try {
            cfg.seed = std::stoull(s);
        } catch (const std::exception&) {
            throw Error(ErrorKind::config, "LPK_SEED: expected an unsigned integer");
        }
    }
    if (options.seed) cfg.seed = *options.seed;
    if (options.out) cfg.output = *options.out;
    return cfg;
}

// ---------------------------------------------------------------- run context

namespace {

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string fmt(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string write_csv(const Table& t)
{
    std::ostringstream os;
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

struct Outcome {
    json results;
    std::vector<Table> tables;
    bool pass = false;
};

class Context {
public:
    Context(RunConfig cfg, bool use_cache, std::ostream& log)
        : cfg_(std::move(cfg)), V_(cfg_.potential()), use_cache_(use_cache), log_(log)
    {
        kato_ = V_.is_zero() ? 0.0 : kato_norm(V_).value;
    }

    const RunConfig& cfg() const { return cfg_; }
    const PotentialModel& V() const { return V_; }
    double kato() const { return kato_; }
    bool small() const { return kato_ < four_pi; }
    std::ostream& log() { return log_; }

    std::shared_ptr<const QuadratureGrid> grid()
    {
        if (!grid_) grid_ = std::make_shared<QuadratureGrid>(make_ball_grid(cfg_.quadrature));
        return grid_;
    }

    ThresholdOptions threshold_options() const
    {
        ThresholdOptions o;
        o.S_lambdas = cfg_.S_lambdas;
        o.domination_pairs = cfg_.domination_pairs;
        o.seed = cfg_.seed;
        o.search_N1 = cfg_.search_N1;
        return o;
    }

    const ThresholdLedger& ledger()
    {
        if (!ledger_) {
            log_ << "  resolving thresholds (eps, delta, N0" << (cfg_.search_N1 ? ", N1" : "") << ")\n";
            ledger_ = compute_thresholds(V_, grid(), threshold_options());
        }
        return *ledger_;
    }
    bool has_ledger() const { return ledger_.has_value(); }

    SeriesConfig series_config()
    {
        SeriesConfig sc;
        sc.max_n = cfg_.max_n;
        sc.term_tolerance = cfg_.term_tolerance;
        sc.mc_samples = cfg_.mc_samples;
        sc.seed = cfg_.seed;
        sc.m = cfg_.m_list.front();
        sc.lambda_nodes = cfg_.lambda_nodes;
        sc.delta = cfg_.delta;
        if (!small()) {
            sc.grid = grid();
            sc.N0 = cfg_.N0.automatic ? ledger().N0 : cfg_.N0.value;
            if (cfg_.N1.automatic)
                sc.N1 = ledger().N1.found ? ledger().N1.N1 : inf;
            else
                sc.N1 = cfg_.N1.value;
        }
        return sc;
    }

    const SeriesContext& series_context()
    {
        if (!ctx_) ctx_ = std::make_unique<SeriesContext>(V_, make_bump(), series_config());
        return *ctx_;
    }

    ResummedSeries* resummed()
    {
        if (small()) return nullptr;
        if (!resummed_) resummed_ = std::make_unique<ResummedSeries>(V_, make_bump(), grid());
        return resummed_.get();
    }

    /// Spectral data for V with the configured radial grid; l_max overrides the config (0 for radial-only work).
    const SpectralData& spectrum(const PotentialModel& V, int l_max, double lambda_max)
    {
        RadialDiscretization disc = cfg_.radial;
        disc.l_max = l_max;
        const std::string key = spectral_cache_key(V, disc, lambda_max);
        auto it = spectra_.find(key);
        if (it != spectra_.end()) return it->second;
        const fs::path dir = cache_dir();
        const fs::path file = dir / (key + ".spec");
        if (use_cache_) {
            if (auto loaded = load_spectral(file.string(), key)) {
                log_ << "  spectral cache hit " << file.filename().string() << "\n";
                return spectra_.emplace(key, std::move(*loaded)).first->second;
            }
        }
        log_ << "  eigensolves: l_max = " << l_max << ", n = " << disc.interior_points() << "\n";
        SpectralData data = solve_spectrum(V, disc, lambda_max);
        if (use_cache_) {
            fs::create_directories(dir);
            save_spectral(data, file.string());
        }
        return spectra_.emplace(key, std::move(data)).first->second;
    }

    json ledger_json()
    {
        json j;
        j["kato_norm"] = kato_;
        j["q"] = kato_ / four_pi;
        if (!ledger_) {
            j["status"] = small() ? "not required: ||V||_K < 4 pi, the Born series converges at every N"
                                  : "not resolved by this subcommand";
            j["N0"] = threshold_json(cfg_.N0);
            j["N1"] = threshold_json(cfg_.N1);
            return j;
        }
        const ThresholdLedger& l = *ledger_;
        j["status"] = "resolved";
        j["zero_potential"] = l.zero_potential;
        j["S_tilde"] = number_json(l.S_tilde.value);
        j["S_tilde_lambdas"] = l.S_tilde.lambdas;
        j["S_tilde_norms"] = l.S_tilde.norms;
        j["max_inversion_residual"] = l.S_tilde.max_residual;
        j["max_condition"] = number_json(l.S_tilde.max_condition);
        j["eps"] = number_json(l.eps);
        j["delta"] = number_json(l.delta);
        j["N0"] = number_json(cfg_.N0.automatic ? l.N0 : cfg_.N0.value);
        j["N0_source"] = cfg_.N0.automatic ? "auto: delta / 2" : "config";
        j["B_major_l1"] = l.B_major_l1;
        j["V_eps_l1"] = l.V_eps_l1;
        if (cfg_.N1.automatic) {
            j["N1"] = l.N1.found ? number_json(l.N1.N1) : json(nullptr);
            j["N1_source"] = cfg_.search_N1 ? "auto: find_N1" : "auto: search disabled";
            j["N1_message"] = l.N1.message;
            j["N1_resolution_limited"] = l.N1.resolution_limited;
        } else {
            j["N1"] = number_json(cfg_.N1.value);
            j["N1_source"] = "config";
        }
        j["note"] = l.note;
        return j;
    }

private:
    fs::path cache_dir() const
    {
        if (const char* d = std::getenv("LPK_CACHE_DIR")) return fs::path(d);
        return fs::path(cfg_.output) / "cache";
    }

    RunConfig cfg_;
    PotentialModel V_;
    bool use_cache_;
    std::ostream& log_;
    double kato_ = 0.0;
    std::shared_ptr<const QuadratureGrid> grid_;
    std::optional<ThresholdLedger> ledger_;
    std::unique_ptr<SeriesContext> ctx_;
    std::unique_ptr<ResummedSeries> resummed_;
    std::map<std::string, SpectralData> spectra_;
};

std::pair<Vec3, Vec3> lattice_pair(double N, double t)
{
    const Vec3 p(0.25 / N, 0.0, 0.0);
    const double rho = t / N;
    return {p - Vec3(0.0, 0.0, 0.5 * rho), p + Vec3(0.0, 0.0, 0.5 * rho)};
}

// ---------------------------------------------------------------- subcommands

Outcome cmd_kato(Context& c)
{
    Outcome o;
    const PotentialModel& V = c.V();
    json r;
    r["signature"] = V.signature();
    if (V.is_zero()) {
        r["value"] = 0.0;
        r["method"] = "zero potential";
    } else {
        const KatoNormEstimate k = kato_norm(V);
        r["value"] = k.value;
        r["method"] = k.method == KatoNormEstimate::Method::closed_form ? "closed_form" : "numeric_sup";
        r["quadrature_error"] = k.quadrature_error;
        r["argmax"] = vec3_json(k.argmax);
    }
    r["q"] = c.kato() / four_pi;
    r["small_potential"] = c.small();
    r["regime_hint"] = c.small() ? "Born series (||V||_K < 4 pi)"
                                 : "||V||_K >= 4 pi; use thresholds + lowfreq/medfreq";
    o.results = r;
    o.pass = std::isfinite(c.kato());
    return o;
}

Outcome cmd_kernel(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    const SeriesContext& ctx = c.series_context();
    Table t{"kernel", {"N", "N_rho", "value", "free", "mc_stderr", "truncation_bound", "regime", "status"}, {}};
    bool ok = true;
    json failures = json::array();
    for (double N : cfg.lattice.N) {
        std::vector<double> ts = cfg.lattice.t_near;
        ts.insert(ts.end(), cfg.lattice.t_far.begin(), cfg.lattice.t_far.end());
        for (double tt : ts) {
            const auto [x, y] = lattice_pair(N, tt);
            try {
                const KernelEvaluation ev = projection_kernel(N, x, y, ctx, c.resummed());
                t.rows.push_back({fmt(N), fmt(tt), fmt(ev.value), fmt(free_LP_kernel(ctx.transform(), N, x, y)),
                                  fmt(ev.mc_stderr), fmt(ev.truncation_bound), to_string(ev.regime), "ok"});
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::near_resonance || e.kind() == ErrorKind::regime) throw;
                ok = false;
                failures.push_back({{"N", N}, {"N_rho", tt}, {"error", e.what()}});
                t.rows.push_back({fmt(N), fmt(tt), "", "", "", "", "", "error"});
            }
        }
    }
    o.tables.push_back(t);
    json r;
    r["lattice_points"] = t.rows.size();
    r["failures"] = failures;

    json fub = json::array();
    if (c.small() && !c.V().is_zero()) {
        Rng rng(mix_seed(cfg.seed, 0x667562ull));
        Table ft{"fubini", {"N", "x1", "x2", "x3", "y1", "y2", "y3", "route_a", "route_b", "relative"}, {}};
        for (int k = 0; k < cfg.fubini_configs; ++k) {
            const Vec3 x(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
            const Vec3 y(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
            const double N = 0.5 + 1.5 * rng.uniform();
            const FubiniReport l = fubini_consistency(N, x, y, ctx);
            ok = ok && l.pass;
            fub.push_back({{"N", N}, {"relative", l.relative}, {"pass", l.pass}});
            ft.rows.push_back({fmt(N), fmt(x.x()), fmt(x.y()), fmt(x.z()), fmt(y.x()), fmt(y.y()), fmt(y.z()),
                               fmt(l.route_a), fmt(l.route_b), fmt(l.relative)});
        }
        o.tables.push_back(ft);
        r["fubini_tolerance"] = 1e-2;
    } else {
        r["fubini_note"] = c.V().is_zero() ? "zero potential: both routes vanish"
                                           : "two-route check needs ||V||_K < 4 pi";
    }
    r["fubini"] = fub;
    o.results = r;
    o.pass = ok;
    return o;
}

Outcome cmd_decay(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    const DecayTable table = decay_table(c.series_context(), cfg.lattice, cfg.scenario, c.resummed());
    Table t{"decay", {"N", "N_rho", "kernel", "mc_stderr"}, {}};
    std::vector<DecayReport> reps;
    for (int m : cfg.m_list) {
        reps.push_back(evaluate_decay(table, make_bump(), m));
        t.header.push_back("envelope_m" + std::to_string(m));
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const DecayRow& r = table.rows[i];
        std::vector<std::string> row{fmt(r.N), fmt(r.t), fmt(r.kernel), fmt(r.mc_stderr)};
        for (const auto& rep : reps) row.push_back(fmt(rep.envelope[i]));
        t.rows.push_back(row);
    }
    o.tables.push_back(t);
    json arr = json::array();
    o.pass = true;
    for (const auto& rep : reps) {
        arr.push_back({{"m", rep.m},
                       {"regime", to_string(rep.regime)},
                       {"fitted_constant", rep.fitted_constant},
                       {"fitted_slope", rep.fitted_slope},
                       {"target_slope", rep.target_slope},
                       {"slope_tolerance", rep.slope_tolerance},
                       {"margin", rep.margin},
                       {"worst_envelope_ratio", rep.worst_envelope_ratio},
                       {"refit_change", rep.refit_change},
                       {"envelope_pass", rep.envelope_pass},
                       {"slope_pass", rep.slope_pass},
                       {"inconclusive", rep.inconclusive},
                       {"pass", rep.pass},
                       {"note", rep.note}});
        o.pass = o.pass && rep.pass;
    }
    o.results = {{"reports", arr}};
    return o;
}

Outcome cmd_summability(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    if (!c.small()) throw Error(ErrorKind::regime, "summability: ||V||_K = " + fmt(c.kato()) +
                                                       " >= 4 pi; use thresholds + lowfreq/medfreq");
    Table t{"summability", {"N", "N_rho", "n", "magnitude", "stderr", "ratio", "ratio_stderr", "envelope"}, {}};
    json arr = json::array();
    o.pass = true;
    for (std::size_t k = 0; k < cfg.summability.size(); ++k) {
        const auto& tr = cfg.summability[k];
        const Vec3 x = cfg.summability_point;
        const Vec3 y = x + Vec3(0.0, 0.0, tr.t / tr.N);
        const SummabilityReport rep =
            summability_sweep(c.series_context(), tr.N, x, y, cfg.summability_n_max, cfg.summability_samples, k);
        json ratios = json::array();
        for (const auto& r : rep.rows) {
            t.rows.push_back({fmt(tr.N), fmt(tr.t), std::to_string(r.n), fmt(r.magnitude), fmt(r.stderr_),
                              fmt(r.ratio), fmt(r.ratio_stderr), fmt(r.envelope)});
            if (r.n > 0) ratios.push_back({{"n", r.n}, {"ratio", r.ratio}, {"stderr", r.ratio_stderr}});
        }
        arr.push_back({{"N", tr.N}, {"N_rho", tr.t}, {"q", rep.q}, {"band", {rep.lo, rep.hi}}, {"sigmas", rep.sigmas},
                       {"ratios", ratios}, {"pass", rep.pass}, {"note", rep.note}});
        o.pass = o.pass && rep.pass;
    }
    o.tables.push_back(t);
    o.results = {{"triples", arr}};
    return o;
}

Outcome cmd_lowfreq(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    LowFreqOptions lo;
    lo.n_max = cfg.lowfreq_n_max;
    lo.m = cfg.m_list.back();
    lo.calibration_samples = cfg.lowfreq_calibration;
    lo.check_samples = cfg.lowfreq_samples;
    lo.seed = cfg.seed;
    ThresholdOptions topt = c.threshold_options();
    const LowFreqReport rep = lowfreq_majorant_check(c.V(), make_bump(), c.grid(), topt, lo);
    Table nt{"lowfreq_norms", {"n", "norm", "bound"}, {}};
    for (std::size_t n = 0; n < rep.norms.size(); ++n)
        nt.rows.push_back({std::to_string(n), fmt(rep.norms[n]), fmt(rep.bounds[n])});
    Table st{"lowfreq_samples", {"x1", "x2", "x3", "y_node", "lhs", "rhs", "calibration"}, {}};
    for (const auto& s : rep.samples)
        st.rows.push_back({fmt(s.x.x()), fmt(s.x.y()), fmt(s.x.z()), std::to_string(s.y_node), fmt(s.lhs), fmt(s.rhs),
                           s.calibration ? "1" : "0"});
    o.tables = {nt, st};
    o.results = {{"N", rep.N},
                 {"eps", number_json(rep.thresholds.eps)},
                 {"N0", number_json(rep.thresholds.N0)},
                 {"S_tilde", rep.thresholds.S_tilde.value},
                 {"rate", rep.rate},
                 {"bound_rate", rep.bound_rate},
                 {"series_norm", rep.series_norm},
                 {"fitted_constant", rep.fitted_constant},
                 {"summable_pass", rep.summable_pass},
                 {"pointwise_pass", rep.pointwise_pass},
                 {"thresholds_pass", rep.thresholds.pass},
                 {"note", rep.note}};
    o.pass = rep.pass;
    return o;
}

Outcome cmd_lpnorms(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    if (!c.V().radial()) throw Error(ErrorKind::config, "lpnorms: the oracle route needs a radial potential");
    const SpectralData& data = c.spectrum(c.V(), 0, 0.0);
    std::vector<std::pair<double, double>> pairs = cfg.lp_pairs;
    if (pairs.empty()) pairs = {{2.0, 2.0}, {1.0, 2.0}, {1.0, inf}};
    NormScalingOptions opt;
    opt.trials = cfg.lp_trials;
    opt.seed = cfg.seed;
    const SeriesContext* sctx = c.small() ? &c.series_context() : nullptr;
    Table t{"lpnorms", {"p", "q", "N", "norm", "width", "shift", "series_norm"}, {}};
    json arr = json::array();
    o.pass = true;
    for (const auto& [p, q] : pairs) {
        const NormScalingReport rep = lp_lq_scaling(data, make_bump(), p, q, cfg.lp_N, opt, sctx);
        for (const auto& r : rep.rows)
            t.rows.push_back({fmt(p), fmt(q), fmt(r.N), fmt(r.norm), fmt(r.width), fmt(r.shift), fmt(r.series_norm)});
        arr.push_back({{"p", number_json(p)},
                       {"q", number_json(q)},
                       {"s", rep.s},
                       {"fitted_exponent", rep.fitted_exponent},
                       {"series_exponent", rep.has_series_route ? json(rep.series_exponent) : json(nullptr)},
                       {"tolerance", rep.tolerance},
                       {"pass", rep.pass},
                       {"note", rep.note}});
        o.pass = o.pass && rep.pass;
    }
    o.tables.push_back(t);
    o.results = {{"pairs", arr}};
    return o;
}

Outcome cmd_sobolev(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    if (!c.V().radial()) throw Error(ErrorKind::config, "sobolev: the oracle route needs a radial potential");
    const SpectralData& data = c.spectrum(c.V(), 0, 0.0);
    const SobolevReport rep =
        sobolev_check(data, cfg.sobolev_exponent, cfg.sobolev_p, cfg.sobolev_q, cfg.sobolev_j,
                      cfg.sobolev_family == "bump" ? TestFamily::bump : TestFamily::gaussian);
    Table t{"sobolev", {"j", "ratio", "raw_ratio", "skipped"}, {}};
    for (const auto& r : rep.rows)
        t.rows.push_back({std::to_string(r.j), fmt(r.ratio), fmt(r.raw_ratio), r.skipped ? "1" : "0"});
    o.tables.push_back(t);
    o.results = {{"s", rep.s},
                 {"p", rep.p},
                 {"q", rep.q},
                 {"family", rep.family},
                 {"bound_states_l0", rep.bound_states},
                 {"negative_eigenvalues", data.negative_eigenvalues},
                 {"spread", rep.spread},
                 {"raw_spread", rep.raw_spread},
                 {"max_spread", rep.max_spread},
                 {"note", rep.note}};
    o.pass = rep.pass;
    return o;
}

Outcome cmd_oracle_compare(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    const MultiplierProfile prof = make_bump();
    const OddProfileTransform tr(prof);
    double Nmax = 0.0;
    for (double N : cfg.compare_N) Nmax = std::max(Nmax, N);
    const double lambda_max = (2.2 * Nmax) * (2.2 * Nmax);
    const SpectralData& free = c.spectrum(PotentialModel::zero(), cfg.radial.l_max, lambda_max);
    Table t{"oracle_compare", {"N", "N_rho", "closed_form", "oracle", "relative_to_diagonal", "l_tail"}, {}};
    double worst = 0.0;
    json skipped = json::array();
    for (double N : cfg.compare_N)
        for (double tt : cfg.compare_t) {
            const auto [x, y] = lattice_pair(N, tt);
            if (std::max(x.norm(), y.norm()) > free.stored_radius) {
                skipped.push_back({{"N", N}, {"N_rho", tt}, {"reason", "outside R_max / 2"}});
                continue;
            }
            const Vec3 mid = 0.5 * (x + y);
            const double diag = free_LP_kernel(tr, N, mid, mid);
            const double exact = free_LP_kernel(tr, N, x, y);
            const OracleKernel ok = multiplier_kernel(projection_multiplier(prof, N), x, y, free, 1e-2);
            const double rel = std::abs(ok.value - exact) / diag;
            worst = std::max(worst, rel);
            t.rows.push_back({fmt(N), fmt(tt), fmt(exact), fmt(ok.value), fmt(rel), fmt(ok.l_tail)});
        }
    o.tables.push_back(t);
    json r{{"free_worst_relative", worst}, {"tolerance", cfg.compare_tolerance}, {"skipped", skipped}};
    o.pass = worst <= cfg.compare_tolerance;

    if (c.V().radial() && !c.V().is_zero() && c.small()) {
        // series route against the oracle for the configured potential
        const SpectralData& data = c.spectrum(c.V(), cfg.radial.l_max, lambda_max);
        const SeriesContext& ctx = c.series_context();
        Table st{"series_vs_oracle", {"N", "N_rho", "series", "oracle", "difference", "allowed"}, {}};
        bool ok = true;
        for (double N : cfg.compare_N)
            for (double tt : cfg.compare_t) {
                if (tt > 3.0) continue;
                const auto [x, y] = lattice_pair(N, tt);
                if (std::max(x.norm(), y.norm()) > data.stored_radius) continue;
                const KernelEvaluation ev = projection_kernel(N, x, y, ctx);
                const double orc = multiplier_kernel(projection_multiplier(prof, N), x, y, data, 1e-2).value;
                const Vec3 mid = 0.5 * (x + y);
                const double scale =
                    std::abs(multiplier_kernel(projection_multiplier(prof, N), mid, mid, data, 1e-2).value);
                const double allowed = std::max(0.05 * scale, 3.0 * ev.mc_stderr + ev.truncation_bound);
                const double diff = std::abs(ev.value - orc);
                ok = ok && diff <= allowed;
                st.rows.push_back({fmt(N), fmt(tt), fmt(ev.value), fmt(orc), fmt(diff), fmt(allowed)});
            }
        o.tables.push_back(st);
        r["series_vs_oracle_pass"] = ok;
        o.pass = o.pass && ok;
    }
    o.results = r;
    return o;
}

Outcome cmd_thresholds(Context& c)
{
    Outcome o;
    const RunConfig& cfg = c.cfg();
    const ThresholdLedger& led = c.ledger();
    json r;
    r["ledger"] = c.ledger_json();
    Table dt{"domination", {"lambda", "lambda0", "worst_excess", "B_l1"}, {}};
    for (const auto& d : led.domination)
        dt.rows.push_back({fmt(d.lambda), fmt(d.lambda0), fmt(d.worst_excess), fmt(d.B_l1)});
    r["residual_pass"] = led.residual_pass;
    r["majorant_pass"] = led.majorant_pass;

    std::vector<double> lams = cfg.vr0_lambdas;
    if (lams.empty())
        for (int k = 0; k < 16; ++k) lams.push_back(0.25 * k);
    const VR0BoundReport vb = vr0_bound_check(c.V(), lams, c.grid());
    Table vt{"vr0_bound", {"lambda", "l1"}, {}};
    for (const auto& row : vb.rows) vt.rows.push_back({fmt(row.lambda), fmt(row.l1)});
    r["vr0_bound"] = {{"bound", vb.bound}, {"grid_tolerance", vb.grid_tolerance}, {"pass", vb.pass}};

    json kd = json::array();
    bool kd_ok = true;
    for (double l : {0.5, 2.0, 8.0}) {
        const double sup = kernel_diff_sup(l);
        const bool ok = sup <= l / (2.0 * pi) + 1e-9;
        kd_ok = kd_ok && ok;
        kd.push_back({{"lambda", l}, {"sup", sup}, {"bound", l / (2.0 * pi)}, {"pass", ok}});
    }
    r["kernel_difference"] = kd;

    const L43Report l43 = l43_trend(cfg.l43_lambdas, RadialLine{}, cfg.l43_trials, cfg.seed);
    r["l43"] = {{"lambdas", l43.lambdas},
                {"estimates", l43.estimates},
                {"fitted_slope", l43.fitted_slope},
                {"target", l43.target},
                {"tolerance", l43.tolerance},
                {"pass", l43.pass}};
    o.tables = {dt, vt};
    o.results = r;
    o.pass = led.pass && vb.pass && kd_ok && l43.pass;
    return o;
}

using Command = std::function<Outcome(Context&)>;

const std::map<std::string, Command>& commands()
{
    static const std::map<std::string, Command> table{
        {"kato", cmd_kato},         {"kernel", cmd_kernel},   {"decay", cmd_decay},
        {"summability", cmd_summability}, {"lowfreq", cmd_lowfreq}, {"lpnorms", cmd_lpnorms},
        {"sobolev", cmd_sobolev},   {"oracle-compare", cmd_oracle_compare}, {"thresholds", cmd_thresholds},
    };
    return table;
}

std::string timestamp()
{
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::config, "cannot write " + path.string());
    os << text;
}

void emit(Context& c, const std::string& name, const Outcome& o)
{
    const fs::path dir(c.cfg().output);
    fs::create_directories(dir);
    json report;
    report["subcommand"] = name;
    report["generated_at"] = timestamp();
    report["config"] = c.cfg().to_json();
    report["threshold_ledger"] = c.ledger_json();
    report["verdict"] = o.pass ? "pass" : "fail";
    report["results"] = o.results;
    write_text(dir / (name + ".json"), report.dump(2) + "\n");
    for (const Table& t : o.tables) write_text(dir / (name + "_" + t.name + ".csv"), write_csv(t));
}

// Subcommands `all` runs for a potential; the ones a potential cannot support are reported as skipped.
std::vector<std::string> applicable(const Context& c)
{
    std::vector<std::string> out{"kato", "thresholds"};
    if (c.small()) {
        out.push_back("kernel");
        out.push_back("decay");
        out.push_back("summability");
    }
    out.push_back("lowfreq");
    if (c.V().radial() || c.V().is_zero()) {
        out.push_back("lpnorms");
        out.push_back("sobolev");
    }
    out.push_back("oracle-compare");
    return out;
}

} // namespace

int run(const std::string& subcommand, const RunOptions& options, std::ostream& log)
{
    std::optional<Context> ctx;
    try {
        const auto& cmds = commands();
        if (subcommand != "all" && !cmds.count(subcommand)) {
            log << "error: unknown subcommand '" << subcommand << "'\n";
            return exit_usage;
        }
        RunConfig cfg = resolve_config(options);
        int jobs = 0;
        if (const char* j = std::getenv("LPK_JOBS")) {
            try {
                jobs = std::stoi(j);
            } catch (const std::exception&) {
                throw Error(ErrorKind::config, "LPK_JOBS: expected an integer");
            }
        }
        if (options.jobs) jobs = *options.jobs;
        if (jobs < 0) throw Error(ErrorKind::config, "--jobs: must be >= 1");
        if (jobs > 0) omp_set_num_threads(jobs);

        ctx.emplace(std::move(cfg), !options.no_cache, log);
        if (subcommand != "all") {
            log << subcommand << " [" << ctx->cfg().scenario << "]\n";
            const Outcome o = cmds.at(subcommand)(*ctx);
            emit(*ctx, subcommand, o);
            log << "  verdict: " << (o.pass ? "pass" : "fail") << "\n";
            return o.pass ? exit_pass : exit_fail;
        }
        json summary;
        bool all_pass = true;
        const auto run_list = applicable(*ctx);
        for (const std::string& name : subcommands()) {
            if (name == "all") continue;
            if (std::find(run_list.begin(), run_list.end(), name) == run_list.end()) {
                summary[name] = "skipped";
                continue;
            }
            log << name << " [" << ctx->cfg().scenario << "]\n";
            const Outcome o = cmds.at(name)(*ctx);
            emit(*ctx, name, o);
            summary[name] = o.pass ? "pass" : "fail";
            all_pass = all_pass && o.pass;
            log << "  verdict: " << (o.pass ? "pass" : "fail") << "\n";
        }
        Outcome total;
        total.results = {{"verdicts", summary}};
        total.pass = all_pass;
        emit(*ctx, "all", total);
        return all_pass ? exit_pass : exit_fail;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::near_resonance:
            return exit_numeric;
        case ErrorKind::config:
        case ErrorKind::regime:
            return exit_usage;
        default:
            return exit_fail;
        }
    } catch (const fs::filesystem_error& e) {
        log << "error: output directory: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_fail;
    }
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Littlewood-Paley projection kernels for -Delta + V: estimates and oracles"};
    app.require_subcommand(1, 1);
    RunOptions opts;
    std::string config, scenario, out;
    std::uint64_t seed = 0;
    int jobs = 0;
    app.add_option("--config", config, "JSON run configuration");
    app.add_option("--scenario", scenario, "built-in scenario when --config is absent")
        ->check(CLI::IsMember(scenario_names()));
    app.add_option("--seed", seed, "RNG seed (overrides config and LPK_SEED)");
    app.add_option("--out", out, "output directory");
    app.add_flag("--no-cache", opts.no_cache, "ignore and do not write the spectral cache");
    app.add_option("--jobs", jobs, "OpenMP threads (overrides LPK_JOBS)")->check(CLI::PositiveNumber);
    app.fallthrough();
    for (const std::string& name : subcommands()) app.add_subcommand(name, "run " + name);
    app.add_subcommand("config", "print the resolved configuration and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : exit_usage;
    }
    if (app.count("--config")) opts.config_path = config;
    if (app.count("--scenario")) opts.scenario = scenario;
    if (app.count("--seed")) opts.seed = seed;
    if (app.count("--out")) opts.out = out;
    if (app.count("--jobs")) opts.jobs = jobs;
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "config") {
        try {
            std::cout << resolve_config(opts).to_json().dump(2) << "\n";
            return exit_pass;
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_usage;
        }
    }
    return run(name, opts, std::cerr);
}

} // namespace lpk::cli
