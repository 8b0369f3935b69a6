#include "lpk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lpk {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::invalid_argument, "slope fit needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::invalid_argument, "slope fit needs distinct abscissae");
    return sxy / sxx;
}

namespace {

std::pair<Vec3, Vec3> lattice_points(double N, double t)
{
    const double rho = t / N;
    const Vec3 p(0.25 / N, 0.0, 0.0);
    return {p - Vec3(0.0, 0.0, 0.5 * rho), p + Vec3(0.0, 0.0, 0.5 * rho)};
}

struct Cell {
    double N, t;
    bool far;
};

} // namespace

// ---------------------------------------------------------------- decay

DecayTable decay_table(const SeriesContext& ctx, const DecayLattice& lattice, const std::string& scenario,
                       ResummedSeries* series)
{
    if (lattice.N.empty()) throw Error(ErrorKind::config, "decay lattice needs at least one N");
    if (lattice.window_samples < 1 || !(lattice.window_ratio >= 1.0))
        throw Error(ErrorKind::config, "decay window needs >= 1 sample and ratio >= 1");
    DecayTable table;
    table.scenario = scenario;
    table.regime = ctx.config().regime;
    table.lattice = lattice;

    std::vector<Cell> cells;
    for (double N : lattice.N) {
        for (double t : lattice.t_near) cells.push_back({N, t, t >= lattice.far_start});
        for (double t : lattice.t_far) cells.push_back({N, t, t >= lattice.far_start});
    }
    table.rows.resize(cells.size());
    auto eval = [&](std::size_t c) {
        const Cell& cell = cells[c];
        const int samples = cell.far ? lattice.window_samples : 1;
        DecayRow row{cell.N, cell.t, 0.0, 0.0};
        for (int k = 0; k < samples; ++k) {
            const double t = cell.t * std::pow(lattice.window_ratio, static_cast<double>(k) / samples);
            const auto [x, y] = lattice_points(cell.N, t);
            const KernelEvaluation ev = projection_kernel(cell.N, x, y, ctx, series);
            if (std::abs(ev.value) >= row.kernel) {
                row.kernel = std::abs(ev.value);
                row.mc_stderr = ev.mc_stderr;
            }
        }
        table.rows[c] = row;
    };
    if (series) {
        for (std::size_t c = 0; c < cells.size(); ++c) eval(c);
    } else {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t c = 0; c < cells.size(); ++c) eval(c);
    }
    return table;
}

namespace {

double envelope_norm(const MultiplierProfile& profile, Regime regime, int m)
{
    return regime == Regime::high_frequency ? std::sqrt(sobolev_W_m1_norm(profile, 2 * m))
                                            : sobolev_W_m1_norm(profile, m);
}

double envelope_from_norm(double norm, Regime regime, int m, double N, double t)
{
    const double power = regime == Regime::high_frequency ? 0.5 * (2 * m + 1) : m + 1.0;
    return N * N * N * norm / std::pow(japanese(t), power);
}

} // namespace

double decay_envelope(const MultiplierProfile& profile, Regime regime, int m, double N, double t)
{
    return envelope_from_norm(envelope_norm(profile, regime, m), regime, m, N, t);
}

DecayReport evaluate_decay(const DecayTable& table, const MultiplierProfile& profile, int m, double slope_tolerance,
                           double margin)
{
    if (m < 1) throw Error(ErrorKind::invalid_argument, "decay order m must be >= 1");
    DecayReport rep;
    rep.scenario = table.scenario;
    rep.m = m;
    rep.regime = table.regime;
    rep.rows = table.rows;
    rep.slope_tolerance = slope_tolerance;
    rep.margin = margin;
    rep.target_slope = table.regime == Regime::high_frequency ? -0.5 * (2 * m + 1) : -(m + 1.0);
    const double far = table.lattice.far_start;

    const double norm = envelope_norm(profile, table.regime, m);
    std::vector<double> fx, fy;
    std::vector<double> even, odd;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const DecayRow& r = rep.rows[i];
        const double env = envelope_from_norm(norm, table.regime, m, r.N, r.t);
        rep.envelope.push_back(env);
        const double ratio = r.kernel / env;
        const auto idx = std::find(table.lattice.N.begin(), table.lattice.N.end(), r.N) - table.lattice.N.begin();
        (idx % 2 == 0 ? even : odd).push_back(ratio);
        if (r.t >= far) {
            if (r.mc_stderr > 0.5 * r.kernel && r.kernel > 0.0) rep.inconclusive = true;
            if (r.kernel > 0.0) {
                fx.push_back(std::log(japanese(r.t)));
                fy.push_back(std::log(r.kernel / (r.N * r.N * r.N)));
            }
        }
    }
    // calibrate on the even-indexed N, refit on the disjoint odd-indexed N
    if (!even.empty()) rep.fitted_constant = *std::max_element(even.begin(), even.end());
    if (!even.empty() && !odd.empty()) {
        const double co = *std::max_element(odd.begin(), odd.end());
        rep.refit_change = std::abs(co - rep.fitted_constant) / rep.fitted_constant;
    }
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
        rep.worst_envelope_ratio =
            std::max(rep.worst_envelope_ratio, rep.rows[i].kernel / (rep.fitted_constant * rep.envelope[i]));
    rep.envelope_pass = rep.fitted_constant > 0.0 && std::isfinite(rep.fitted_constant) &&
                        rep.worst_envelope_ratio <= margin;

    std::ostringstream note;
    if (fx.size() >= 2) {
        rep.fitted_slope = fit_slope(fx, fy);
        rep.slope_pass = rep.fitted_slope <= rep.target_slope + slope_tolerance;
    } else {
        note << "fewer than two far-field rows; ";
    }
    if (rep.inconclusive) {
        double worst = 0.0;
        for (const DecayRow& r : rep.rows)
            if (r.t >= far && r.kernel > 0.0) worst = std::max(worst, r.mc_stderr / r.kernel);
        note << "inconclusive: MC error dominates far field, raise mc_samples by about "
             << std::ceil(worst * worst / 0.01) << "x; ";
    }
    rep.pass = rep.envelope_pass && rep.slope_pass && !rep.inconclusive;
    rep.note = note.str();
    return rep;
}

DecayReport decay_sweep(const SeriesContext& ctx, int m, const DecayLattice& lattice, const std::string& scenario,
                        ResummedSeries* series)
{
    return evaluate_decay(decay_table(ctx, lattice, scenario, series), ctx.transform().profile(), m);
}

// ---------------------------------------------------------------- summability

SummabilityReport summability_sweep(const SeriesContext& ctx, double N, const Vec3& x, const Vec3& y, int n_max,
                                    std::size_t samples, std::uint64_t stream, double sigmas)
{
    if (n_max < 1 || n_max > 6) throw Error(ErrorKind::invalid_argument, "summability needs 1 <= n_max <= 6");
    SummabilityReport rep;
    rep.N = N;
    rep.x = x;
    rep.y = y;
    rep.q = ctx.q();
    rep.lo = 0.5 * rep.q;
    rep.hi = 2.0 * rep.q;
    rep.sigmas = sigmas;

    SummabilityRow r0;
    r0.magnitude = std::abs(free_LP_kernel(ctx.transform(), N, x, y));
    r0.envelope = r0.magnitude;
    rep.rows.push_back(r0);
    if (ctx.V().is_zero()) {
        for (int n = 1; n <= n_max; ++n) rep.rows.push_back(SummabilityRow{n, 0.0, 0.0, 0.0, 0.0, 0.0});
        rep.pass = true;
        rep.note = "zero potential: all terms n >= 1 vanish";
        return rep;
    }
    bool ok = true;
    for (int n = 1; n <= n_max; ++n) {
        const KernelEvaluation ev = born_term_mc(n, N, x, y, ctx, samples, stream, true);
        const SummabilityRow& prev = rep.rows.back();
        SummabilityRow row;
        row.n = n;
        row.magnitude = ev.value;
        row.stderr_ = ev.mc_stderr;
        row.envelope = (n + 1) * std::pow(rep.q, n) * r0.magnitude;
        if (prev.magnitude > 0.0 && row.magnitude > 0.0) {
            row.ratio = row.magnitude / prev.magnitude;
            const double a = row.stderr_ / row.magnitude, b = prev.stderr_ / prev.magnitude;
            row.ratio_stderr = row.ratio * std::sqrt(a * a + b * b);
        }
        const double slack = sigmas * row.ratio_stderr;
        if (!(row.ratio >= rep.lo - slack && row.ratio <= rep.hi + slack)) ok = false;
        rep.rows.push_back(row);
    }
    rep.pass = ok;
    return rep;
}

// ---------------------------------------------------------------- thresholds

ThresholdLedger compute_thresholds(const PotentialModel& V, std::shared_ptr<const QuadratureGrid> grid,
                                   const ThresholdOptions& options)
{
    ThresholdLedger led;
    led.kato = V.is_zero() ? 0.0 : kato_norm(V).value;
    if (V.is_zero()) {
        led.zero_potential = true;
        led.eps = std::numeric_limits<double>::infinity();
        led.delta = std::numeric_limits<double>::infinity();
        led.N0 = std::numeric_limits<double>::infinity();
        led.N1.found = true;
        led.N1.N1 = 0.0;
        led.residual_pass = led.majorant_pass = led.pass = true;
        led.note = "zero potential: eps undefined (division by ||V||_K = 0); every frequency is unperturbed";
        return led;
    }
    led.S_tilde = uniform_S_tilde_bound(V, options.S_lambdas, grid);
    led.residual_pass = led.S_tilde.max_residual <= options.residual_tolerance && std::isfinite(led.S_tilde.value);
    led.eps = eps_from_S_tilde(led.S_tilde.value, led.kato);
    const BMajorant bm = build_B_majorant(V, led.eps, grid);
    led.delta = bm.delta;
    led.N0 = bm.N0;
    led.B_major_l1 = bm.B_major.l1_norm();
    led.V_eps_l1 = bm.V_eps_l1;

    const Eigen::MatrixXd major = bm.B_major.matrix().cwiseAbs();
    const double scale = major.maxCoeff();
    Rng rng(mix_seed(options.seed, 0x7468726573ull));
    bool dominated = true;
    for (int k = 0; k < options.domination_pairs; ++k) {
        DominationSample s;
        s.lambda0 = options.lambda0_max * rng.uniform();
        s.lambda = std::max(0.0, s.lambda0 + (2.0 * rng.uniform() - 1.0) * bm.delta);
        const DiscretizedOperator B = B_difference(V, s.lambda, s.lambda0, grid);
        s.B_l1 = B.l1_norm();
        s.worst_excess = ((B.matrix().cwiseAbs() - major).maxCoeff()) / scale;
        if (s.worst_excess > 1e-12 || !(s.B_l1 <= led.B_major_l1 * (1.0 + 1e-12))) dominated = false;
        led.domination.push_back(s);
    }
    led.majorant_pass = dominated && led.B_major_l1 < led.eps;
    if (options.search_N1) led.N1 = find_N1(V, led.eps, grid, options.N1_min);
    led.pass = led.residual_pass && led.majorant_pass;
    if (options.search_N1 && !led.N1.found) led.note = "N1 not reached: " + led.N1.message;
    return led;
}

// ---------------------------------------------------------------- discrete operator checks

VR0BoundReport vr0_bound_check(const PotentialModel& V, const std::vector<double>& lambdas,
                               std::shared_ptr<const QuadratureGrid> grid)
{
    VR0BoundReport rep;
    rep.potential = V.signature();
    rep.grid_tolerance = grid_tolerance(V, *grid);
    const double kato = V.is_zero() ? 0.0 : kato_norm(V).value;
    rep.bound = kato / four_pi + 2.0 * rep.grid_tolerance;
    AssembleOptions opt;
    opt.check_kato_bound = false;
    rep.pass = true;
    for (double lambda : lambdas) {
        VR0BoundRow row{lambda, assemble_VR0(V, lambda, grid, opt).l1_norm()};
        if (!(row.l1 <= rep.bound)) rep.pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

L43Report l43_trend(const std::vector<double>& lambdas, const RadialLine& line, int trials, std::uint64_t seed)
{
    L43Report rep;
    rep.lambdas = lambdas;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double e = estimate_L43_L4_norm(lambdas[i], line, trials, mix_seed(seed, 0x4c3433ull, i));
        rep.estimates.push_back(e);
        lx.push_back(std::log(japanese(lambdas[i])));
        ly.push_back(std::log(e));
    }
    rep.fitted_slope = fit_slope(lx, ly);
    rep.pass = rep.fitted_slope <= rep.target + rep.tolerance;
    return rep;
}

// ---------------------------------------------------------------- low-frequency majorant

namespace {

double real_l1_norm(const Eigen::MatrixXd& A, const std::vector<double>& w)
{
    double best = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < A.rows(); ++i) s += w[i] * std::abs(A(i, j));
        best = std::max(best, s / w[j]);
    }
    return best;
}

} // namespace

LowFreqReport lowfreq_majorant_check(const PotentialModel& V, const MultiplierProfile& profile,
                                     std::shared_ptr<const QuadratureGrid> grid, const ThresholdOptions& thresholds,
                                     const LowFreqOptions& options)
{
    LowFreqReport rep;
    rep.bound_rate = 1.0 / std::sqrt(2.0 * pi);
    ThresholdOptions topt = thresholds;
    topt.search_N1 = false;
    rep.thresholds = compute_thresholds(V, grid, topt);
    if (V.is_zero()) {
        rep.summable_pass = rep.pointwise_pass = rep.pass = true;
        rep.note = "zero potential: left side vanishes";
        return rep;
    }
    const ThresholdLedger& led = rep.thresholds;
    rep.N = options.N_fraction * led.N0;
    const auto& w = grid->weights;
    const Eigen::Index n = static_cast<Eigen::Index>(grid->size());

    ResummedSeries series(V, profile, grid);
    const SInverse& S0 = series.S(0.0);
    AssembleOptions ao;
    ao.check_kato_bound = false;
    const Eigen::MatrixXd IS = Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd(S0.S_tilde.matrix().cwiseAbs());
    const Eigen::MatrixXd VR = 2.0 * assemble_VR0(V, 0.0, grid, ao).matrix().cwiseAbs();
    const Eigen::MatrixXd BM = build_B_majorant(V, led.eps, grid).B_major.matrix().cwiseAbs();
    const Eigen::MatrixXd P1 = VR * IS, P2 = BM * IS;

    Eigen::MatrixXd A1 = IS, A2 = IS;
    Eigen::MatrixXd K = IS;
    rep.norms.push_back(real_l1_norm(IS, w));
    rep.bounds.push_back(led.S_tilde.value + 1.0);
    for (int k = 1; k <= options.n_max; ++k) {
        A1 = (A1 * P1).eval();
        A2 = (A2 * P2).eval();
        const Eigen::MatrixXd term = A1.cwiseProduct(A2).cwiseSqrt();
        K += term;
        rep.norms.push_back(real_l1_norm(term, w));
        rep.bounds.push_back((led.S_tilde.value + 1.0) / std::pow(std::sqrt(2.0 * pi), k));
        const double prev = rep.norms[k - 1];
        if (prev > 0.0) rep.rate = std::max(rep.rate, rep.norms[k] / prev);
    }
    for (double v : rep.norms) rep.series_norm += v;
    rep.summable_pass = std::isfinite(rep.series_norm) && rep.rate <= rep.bound_rate + options.rate_tolerance;

    SeriesConfig cfg;
    cfg.regime = Regime::low_frequency;
    cfg.max_n = options.n_max;
    cfg.N0 = led.N0;
    cfg.grid = grid;
    const double chi2m = std::sqrt(sobolev_W_m1_norm(profile, 2 * options.m));
    const double N = rep.N;
    Rng rng(mix_seed(options.seed, 0x6c6f77ull));
    const int total = options.calibration_samples + options.check_samples;
    for (int k = 0; k < total; ++k) {
        LowFreqSample s;
        s.calibration = k < options.calibration_samples;
        for (;;) {
            Vec3 x;
            do {
                x = Vec3(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
            } while (x.squaredNorm() > 1.0);
            s.x = options.sample_radius * x;
            s.y_node = std::min<std::size_t>(grid->size() - 1, static_cast<std::size_t>(rng.uniform() * grid->size()));
            if ((s.x - grid->nodes[s.y_node]).norm() >= options.min_separation) break;
        }
        const std::size_t j = s.y_node;
        const Vec3& y = grid->nodes[j];
        s.lhs = std::abs(resummed_difference(N, s.x, y, series, cfg).value);
        const double dxy = (s.x - y).norm();
        double acc = 1.0 / (dxy * std::pow(japanese(N * dxy), options.m));  // identity part of K^0
        for (Eigen::Index i = 0; i < n; ++i) {
            const double kij = (K(i, j) - (i == static_cast<Eigen::Index>(j) ? 1.0 : 0.0)) / w[j];
            const double d = (s.x - grid->nodes[i]).norm();
            acc += series.coulomb_weight(s.x, static_cast<std::size_t>(i)) * kij / std::pow(japanese(N * d), options.m);
        }
        s.rhs = N * N * chi2m * acc;
        rep.samples.push_back(s);
    }
    for (const auto& s : rep.samples)
        if (s.calibration && s.rhs > 0.0) rep.fitted_constant = std::max(rep.fitted_constant, s.lhs / s.rhs);
    rep.pointwise_pass = rep.fitted_constant > 0.0;
    for (const auto& s : rep.samples)
        if (!s.calibration && !(s.lhs <= options.margin * rep.fitted_constant * s.rhs)) rep.pointwise_pass = false;
    rep.pass = rep.summable_pass && rep.pointwise_pass && led.pass;
    return rep;
}

// ---------------------------------------------------------------- L^p -> L^q scaling

NormScalingReport lp_lq_scaling(const SpectralData& data, const MultiplierProfile& profile, double p, double q,
                                const std::vector<double>& N_list, const NormScalingOptions& options,
                                const SeriesContext* series_ctx)
{
    const auto in_desk_set = [&] {
        const double inf = std::numeric_limits<double>::infinity();
        const std::pair<double, double> allowed[] = {{1, 1}, {1, 2}, {2, 2}, {1, inf}, {2, inf}};
        return std::any_of(std::begin(allowed), std::end(allowed),
                           [&](const auto& a) { return a.first == p && a.second == q; });
    };
    if (!in_desk_set()) throw Error(ErrorKind::invalid_argument, "(p, q) must be one of (1,1) (1,2) (2,2) (1,inf) (2,inf)");
    if (N_list.size() < 2) throw Error(ErrorKind::invalid_argument, "scaling fit needs >= 2 values of N");
    NormScalingReport rep;
    rep.p = p;
    rep.q = q;
    rep.s = 3.0 * (1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q));
    rep.tolerance = options.tolerance;

    std::vector<double> lx, ly, sx, sy;
    for (std::size_t a = 0; a < N_list.size(); ++a) {
        const double N = N_list[a];
        const SpectralMultiplier m = projection_multiplier(profile, N);
        Rng rng(mix_seed(options.seed, 0x6c70ull, a));
        NormScalingRow row;
        row.N = N;
        for (int k = 0; k < options.trials; ++k) {
            const double c = options.c_lo + (options.c_hi - options.c_lo) * rng.uniform();
            const double shift = options.a_hi * rng.uniform();
            const double width = c / N, center = shift / N;
            const RadialSamples f =
                sample_radial([&](double r) { return std::exp(-(r - center) * (r - center) / (width * width)); }, data);
            const RadialSamples g = apply_radial(m, f, data);
            const double ratio = radial_lp_norm(g, data, q) / radial_lp_norm(f, data, p);
            if (ratio > row.norm) {
                row.norm = ratio;
                row.width = width;
                row.shift = center;
            }
        }
        if (series_ctx && p == 1.0 && std::isinf(q)) {
            for (double u : {0.05, 0.25, 0.5}) {
                const Vec3 x(u / N, 0.0, 0.0);
                row.series_norm = std::max(row.series_norm, std::abs(projection_kernel(N, x, x, *series_ctx).value));
            }
            sx.push_back(std::log(N));
            sy.push_back(std::log(row.series_norm));
        }
        lx.push_back(std::log(N));
        ly.push_back(std::log(row.norm));
        rep.rows.push_back(row);
    }
    rep.fitted_exponent = fit_slope(lx, ly);
    rep.pass = std::abs(rep.fitted_exponent - rep.s) <= rep.tolerance;
    if (!sx.empty()) {
        rep.has_series_route = true;
        rep.series_exponent = fit_slope(sx, sy);
        if (std::abs(rep.series_exponent - rep.fitted_exponent) > rep.tolerance) {
            rep.pass = false;
            rep.note = "oracle and series routes disagree on the exponent";
        }
    }
    return rep;
}

// ---------------------------------------------------------------- Sobolev

SobolevReport sobolev_check(const SpectralData& data, double s, double p, double q, const std::vector<int>& j_list,
                            TestFamily family, double max_spread)
{
    if (!(1.0 < p && p < q && std::isfinite(q)))
        throw Error(ErrorKind::invalid_argument, "sobolev check needs 1 < p < q < inf");
    if (!(s > 0.0 && s < 3.0)) throw Error(ErrorKind::invalid_argument, "sobolev exponent s must lie in (0, 3)");
    if (std::abs(s - 3.0 * (1.0 / p - 1.0 / q)) > 1e-12)
        throw Error(ErrorKind::invalid_argument, "s must equal 3 (1/p - 1/q)");
    SobolevReport rep;
    rep.s = s;
    rep.p = p;
    rep.q = q;
    rep.max_spread = max_spread;
    rep.family = family == TestFamily::gaussian ? "gaussian" : "bump";
    for (const auto& w : data.waves)
        for (double e : w.raw_eigenvalues)
            if (e < 0.0 && w.l == 0) ++rep.bound_states;

    const SpectralMultiplier m = [s](double lambda) { return lambda > 0.0 ? std::pow(lambda, -0.5 * s) : 0.0; };
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    double raw_lo = lo, raw_hi = 0.0;
    for (int j : j_list) {
        SobolevRow row;
        row.j = j;
        const double scale = std::ldexp(1.0, j);
        const double width = 1.0 / scale;
        if (width > data.disc.R_max / 8.0 || width < 5.0 * data.disc.h) {
            row.skipped = true;
            row.note = "scale outside the grid buffer";
            rep.rows.push_back(row);
            continue;
        }
        const auto profile = [&](double r) {
            const double u = scale * r;
            if (family == TestFamily::gaussian) return std::exp(-u * u);
            return u < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
        };
        const RadialSamples f = sample_radial(profile, data);
        const RadialSamples pf = continuous_projection_apply(f, data);
        const double top = radial_lp_norm(apply_radial(m, f, data), data, q);
        row.ratio = top / radial_lp_norm(pf, data, p);
        row.raw_ratio = top / radial_lp_norm(f, data, p);
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
        raw_lo = std::min(raw_lo, row.raw_ratio);
        raw_hi = std::max(raw_hi, row.raw_ratio);
        rep.rows.push_back(row);
    }
    std::size_t used = 0;
    for (const auto& r : rep.rows) used += r.skipped ? 0 : 1;
    rep.spread = used > 0 ? hi / lo : std::numeric_limits<double>::infinity();
    rep.raw_spread = used > 0 ? raw_hi / raw_lo : std::numeric_limits<double>::infinity();
    rep.pass = used >= 6 && rep.spread <= max_spread;
    if (used < 6) rep.note = "fewer than 6 usable scales";
    return rep;
}

// ---------------------------------------------------------------- Fubini check

FubiniReport fubini_consistency(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx, double tolerance)
{
    if (!(ctx.kato() < four_pi)) throw Error(ErrorKind::regime, "two-route check needs ||V||_K < 4 pi");
    FubiniReport rep;
    rep.N = N;
    rep.x = x;
    rep.y = y;
    rep.tolerance = tolerance;
    rep.route_a = born_term(1, N, x, y, ctx).value;
    rep.route_b = born_term1_lambda_first(N, x, y, ctx);
    const double scale = std::max(std::abs(rep.route_a), std::abs(rep.route_b));
    rep.relative = scale > 0.0 ? std::abs(rep.route_a - rep.route_b) / scale : 0.0;
    rep.pass = rep.relative <= tolerance;
    return rep;
}

} // namespace lpk
