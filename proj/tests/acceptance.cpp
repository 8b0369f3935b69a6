// Acceptance gate: one line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lpk/verify.hpp"

using namespace lpk;
namespace fs = std::filesystem;

namespace {

constexpr double kato_rel_tol = 1e-6;
constexpr double kato_time_limit_s = 10.0;
constexpr double free_kernel_rel_tol = 1e-2;
constexpr double free_kernel_time_limit_s = 300.0;
constexpr double decay_slope_slack = 0.3;
constexpr double summability_sigmas = 3.0;
constexpr double fubini_rel_tol = 1e-2;
constexpr int fubini_configs = 10;
constexpr double kernel_diff_tol = 1e-9;
constexpr double l43_slope_max = -0.5 + 0.2;
constexpr double inversion_residual_max = 1e-8;
constexpr int domination_pairs = 20;
constexpr double lowfreq_rate_slack = 0.1;
constexpr int lowfreq_pointwise_samples = 10;
constexpr double lp_tol_22 = 0.2, lp_tol_12 = 0.3, lp_tol_1inf = 0.3;
constexpr double sobolev_max_spread = 3.0;
constexpr int sobolev_scales = 6;
constexpr std::uint64_t seed = 20240611;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string f(const char* fmt, double a, double b = 0, double c = 0, double d = 0)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
    return buf;
}

std::shared_ptr<const QuadratureGrid> default_grid()
{
    static const auto g = std::make_shared<QuadratureGrid>(make_ball_grid(GridSpec{}));
    return g;
}

SeriesConfig series_config()
{
    SeriesConfig c;
    c.max_n = 4;
    c.mc_samples = 4000;
    c.term_tolerance = 1e-2;
    c.seed = seed;
    return c;
}

const PotentialModel yukawa_2pi = PotentialModel::yukawa(0.5, 1.0);

Verdict kato_closed_forms()
{
    const auto t0 = std::chrono::steady_clock::now();
    const double ball = kato_norm(PotentialModel::ball(1.0, 1.0)).value;
    const double yuk = kato_norm(PotentialModel::yukawa(1.0, 1.0)).value;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double eb = std::abs(ball / (2 * pi) - 1), ey = std::abs(yuk / (4 * pi) - 1);
    return {eb <= kato_rel_tol && ey <= kato_rel_tol && secs < kato_time_limit_s,
            f("ball rel err %.1e, yukawa rel err %.1e, %.2f s", eb, ey, secs)};
}

Verdict free_kernel_oracle()
{
    const auto t0 = std::chrono::steady_clock::now();
    const MultiplierProfile chi = make_bump();
    const OddProfileTransform T(chi);
    const std::vector<double> Ns{0.25, 0.5, 1.0, 2.0, 4.0}, ts{0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 9.0};
    const SpectralData s = solve_spectrum(PotentialModel::zero(), RadialDiscretization{}, std::pow(2.2 * 4.0, 2));
    double worst = 0.0;
    for (double N : Ns)
        for (double t : ts) {
            const Vec3 p(0.25 / N, 0, 0);
            const Vec3 x = p - Vec3(0, 0, 0.5 * t / N), y = p + Vec3(0, 0, 0.5 * t / N);
            const double diag = free_LP_kernel(T, N, p, p);
            const double o = multiplier_kernel(projection_multiplier(chi, N), x, y, s, 1e-2).value;
            worst = std::max(worst, std::abs(o - free_LP_kernel(T, N, x, y)) / diag);
        }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst <= free_kernel_rel_tol && secs < free_kernel_time_limit_s,
            f("40 points, worst error / diagonal %.2e, %.1f s", worst, secs)};
}

Verdict decay_exponents()
{
    bool ok = true;
    std::string detail;
    for (const auto& [name, V] : {std::pair{"free", PotentialModel::zero()}, std::pair{"yukawa", yukawa_2pi}}) {
        const SeriesContext ctx(V, make_bump(), series_config());
        const DecayTable table = decay_table(ctx, DecayLattice{}, name);
        for (int m : {1, 3}) {
            const DecayReport r = evaluate_decay(table, make_bump(), m);
            const bool pass = r.fitted_slope <= -(m + 1.0) + decay_slope_slack && r.envelope_pass;
            ok = ok && pass;
            detail += "; " + std::string(name) +
                      f(" m=%.0f slope %.2f envelope ratio %.2f", m, r.fitted_slope, r.worst_envelope_ratio);
        }
    }
    return {ok, detail.substr(2)};
}

Verdict summability()
{
    SeriesConfig c = series_config();
    const SeriesContext ctx(yukawa_2pi, make_bump(), c);
    const Vec3 x(0.3, 0.1, 0.2);
    const std::pair<double, double> triples[] = {{0.0625, 0.0}, {0.125, 0.25}, {0.25, 0.25}};
    bool ok = true;
    std::string detail;
    std::uint64_t stream = 0;
    for (const auto& [N, t] : triples) {
        const SummabilityReport r =
            summability_sweep(ctx, N, x, x + Vec3(0, 0, t / N), 4, 40000, stream++, summability_sigmas);
        ok = ok && r.pass;
        double lo = 1e300, hi = 0;
        for (const auto& row : r.rows)
            if (row.n > 0) lo = std::min(lo, row.ratio), hi = std::max(hi, row.ratio);
        detail += f("; N=%g ratios in [%.2f, %.2f]", N, lo, hi);
    }
    return {ok, "q = 0.5, band [0.25, 1]" + detail};
}

Verdict fubini()
{
    const SeriesContext ctx(yukawa_2pi, make_bump(), series_config());
    Rng rng(mix_seed(seed, 0x667562ull));
    double worst = 0.0;
    for (int k = 0; k < fubini_configs; ++k) {
        const Vec3 x(2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
        const Vec3 y(2 * rng.uniform() - 1, 2 * rng.uniform() - 1, 2 * rng.uniform() - 1);
        const double N = 0.5 + 1.5 * rng.uniform();
        worst = std::max(worst, fubini_consistency(N, x, y, ctx, fubini_rel_tol).relative);
    }
    return {worst <= fubini_rel_tol, f("10 configurations, worst relative disagreement %.2e", worst)};
}

Verdict vr0_bound()
{
    std::vector<double> lams;
    for (int k = 0; k < 16; ++k) lams.push_back(0.25 * k);
    bool ok = true;
    std::string detail;
    for (const auto& [name, V] :
         {std::pair{"yukawa", yukawa_2pi}, std::pair{"gaussian", PotentialModel::gaussian(1.0, 1.0)}}) {
        const VR0BoundReport r = vr0_bound_check(V, lams, default_grid());
        double mx = 0.0;
        for (const auto& row : r.rows) mx = std::max(mx, row.l1);
        ok = ok && r.pass && r.rows.size() == 16;
        detail += std::string("; ") + name + f(" max %.4f <= %.4f", mx, r.bound);
    }
    return {ok, detail.substr(2)};
}

Verdict kernel_difference()
{
    double worst = -1e300;
    for (double l : {0.5, 2.0, 8.0}) worst = std::max(worst, kernel_diff_sup(l) - l / (2 * pi));
    return {worst <= kernel_diff_tol, f("max (sup - lambda/2pi) = %.1e", worst)};
}

Verdict l43()
{
    const L43Report r = l43_trend({1.0, 4.0, 16.0, 64.0}, RadialLine{}, 8, seed);
    return {r.fitted_slope <= l43_slope_max, f("fitted slope %.3f", r.fitted_slope)};
}

Verdict thresholds()
{
    ThresholdOptions o;
    o.domination_pairs = domination_pairs;
    o.seed = seed;
    o.residual_tolerance = inversion_residual_max;
    const ThresholdLedger a = compute_thresholds(yukawa_2pi, default_grid(), o);
    const ThresholdLedger b = compute_thresholds(yukawa_2pi, default_grid(), o);
    bool dominated = a.domination.size() == static_cast<std::size_t>(domination_pairs);
    for (const auto& d : a.domination) dominated = dominated && d.worst_excess <= 1e-12;
    const bool deterministic = a.eps == b.eps && a.delta == b.delta && a.N0 == b.N0 && a.N1.found == b.N1.found &&
                               a.N1.N1 == b.N1.N1 && a.S_tilde.value == b.S_tilde.value;
    const bool ok = a.B_major_l1 < a.eps && dominated && std::isfinite(a.S_tilde.value) &&
                    a.S_tilde.max_residual <= inversion_residual_max && a.N0 == a.delta / 2 && deterministic;
    std::string n1 = a.N1.found ? f("N1 %.3g", a.N1.N1) : "N1 not found (" + a.N1.message + ")";
    return {ok, f("S~ %.4f, eps %.4g, delta %.3g, |B| %.3g; ", a.S_tilde.value, a.eps, a.delta, a.B_major_l1) +
                    f("residual %.1e; ", a.S_tilde.max_residual) + n1 +
                    (deterministic ? "; repeat identical" : "; repeat differs")};
}

Verdict lowfreq()
{
    ThresholdOptions t;
    t.seed = seed;
    t.search_N1 = false;
    LowFreqOptions o;
    o.check_samples = lowfreq_pointwise_samples;
    o.rate_tolerance = lowfreq_rate_slack;
    o.seed = seed;
    const LowFreqReport r = lowfreq_majorant_check(PotentialModel::gaussian(6.0, 1.0), make_bump(), default_grid(), t, o);
    int checked = 0;
    bool pointwise = true;
    for (const auto& s : r.samples)
        if (!s.calibration) ++checked, pointwise = pointwise && s.lhs <= s.rhs;
    const bool ok = r.rate <= 1 / std::sqrt(2 * pi) + lowfreq_rate_slack && std::isfinite(r.series_norm) &&
                    pointwise && checked == lowfreq_pointwise_samples;
    return {ok, f("rate %.4f (bound %.4f), series norm %.3f, ", r.rate, 1 / std::sqrt(2 * pi) + lowfreq_rate_slack,
                  r.series_norm) +
                    std::to_string(checked) + " pointwise samples " + (pointwise ? "hold" : "violated")};
}

Verdict lp_scaling()
{
    RadialDiscretization d;
    d.l_max = 0;
    const SpectralData s = solve_spectrum(yukawa_2pi, d, 0.0);
    const SeriesContext ctx(yukawa_2pi, make_bump(), series_config());
    NormScalingOptions o;
    o.seed = seed;
    const std::vector<double> Ns{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    const double inf = std::numeric_limits<double>::infinity();
    const NormScalingReport a = lp_lq_scaling(s, make_bump(), 2, 2, Ns, o);
    const NormScalingReport b = lp_lq_scaling(s, make_bump(), 1, 2, Ns, o);
    const NormScalingReport c = lp_lq_scaling(s, make_bump(), 1, inf, Ns, o, &ctx);
    const bool ok = std::abs(a.fitted_exponent) <= lp_tol_22 && std::abs(b.fitted_exponent - 1.5) <= lp_tol_12 &&
                    std::abs(c.fitted_exponent - 3.0) <= lp_tol_1inf;
    return {ok, f("(2,2) %.3f, (1,2) %.3f, (1,inf) %.3f [series route %.3f]", a.fitted_exponent, b.fitted_exponent,
                  c.fitted_exponent, c.series_exponent)};
}

Verdict sobolev()
{
    RadialDiscretization d;
    d.l_max = 0;
    const SpectralData s = solve_spectrum(PotentialModel::ball(-10.0, 1.0), d, 0.0);
    const SobolevReport r = sobolev_check(s, 1.0, 2.0, 6.0, {-2, -1, 0, 1, 2, 3});
    int used = 0;
    for (const auto& row : r.rows) used += row.skipped ? 0 : 1;
    const bool ok = r.bound_states >= 1 && used >= sobolev_scales && r.spread <= sobolev_max_spread;
    return {ok, f("%.0f bound state(s), %.0f scales, spread %.3f (unprojected inputs %.2f)", r.bound_states, used,
                  r.spread, r.raw_spread)};
}

std::string strip_timestamps(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line))
        if (line.find("\"generated_at\"") == std::string::npos) os << line << '\n';
    return os.str();
}

Verdict determinism()
{
    const fs::path root = fs::temp_directory_path() / "lpk_acceptance_determinism";
    fs::remove_all(root);
    const fs::path out = root / "out", first = root / "first";
    const std::string cmd = std::string(LPK_EXE) + " all --config " + LPK_SMOKE_CONFIG + " --out " + out.string() +
                            " --jobs 1 2>/dev/null";
    const int rc1 = std::system(cmd.c_str());
    fs::create_directories(first);
    fs::copy(out, first, fs::copy_options::recursive);
    // the second run reads the spectral cache written by the first
    const int rc2 = std::system(cmd.c_str());
    int files = 0, differing = 0;
    for (const auto& e : fs::directory_iterator(first)) {
        if (!e.is_regular_file()) continue;
        ++files;
        if (strip_timestamps(e.path()) != strip_timestamps(out / e.path().filename())) ++differing;
    }
    const bool ok = rc1 == rc2 && files > 0 && differing == 0;
    fs::remove_all(root);
    return {ok, f("%.0f report files, %.0f differ; exit codes %.0f/%.0f", files, differing, rc1, rc2)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"kato-closed-forms", kato_closed_forms}, {"free-kernel-oracle", free_kernel_oracle},
        {"decay-exponents", decay_exponents},     {"born-summability", summability},
        {"fubini-two-route", fubini},             {"vr0-kato-bound", vr0_bound},
        {"kernel-difference-sup", kernel_difference}, {"l43-l4-trend", l43},
        {"threshold-ledger", thresholds},         {"lowfreq-majorant", lowfreq},
        {"lp-lq-scaling", lp_scaling},            {"sobolev-proxy", sobolev},
        {"determinism", determinism},
    };
    int failed = 0, index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += v.pass ? 0 : 1;
        std::printf("[%s] %2d %-22s %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", index, name.c_str(), v.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
