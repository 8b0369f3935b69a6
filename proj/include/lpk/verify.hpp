#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lpk/born_series.hpp"
#include "lpk/common.hpp"
#include "lpk/multiplier.hpp"
#include "lpk/oracle.hpp"
#include "lpk/potential.hpp"
#include "lpk/resolvent_ops.hpp"

namespace lpk {

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- decay

struct DecayRow {
    double N = 0.0;
    double t = 0.0;  // N rho at the window start
    double kernel = 0.0;  // max |kernel| over the window
    double mc_stderr = 0.0;
};

/// Kernel magnitudes on an (N, N rho) lattice along the z direction through p = (1/(4N), 0, 0).
/// Far points (t >= far_start) take the max over `window_samples` points in [t, window_ratio * t),
/// so the fit sees the envelope of the oscillating kernel rather than its zeros.
struct DecayLattice {
    std::vector<double> N{0.5, 1.0, 2.0, 4.0};
    std::vector<double> t_near{0.0, 0.5, 1.0, 2.0, 3.0};
    std::vector<double> t_far{5.0, 7.0, 10.0, 14.0, 20.0, 28.0, 40.0, 56.0, 80.0, 112.0, 160.0};
    double far_start = 5.0;
    int window_samples = 4;
    double window_ratio = 1.25;
};

struct DecayTable {
    std::string scenario;
    Regime regime = Regime::small_potential;
    DecayLattice lattice;
    std::vector<DecayRow> rows;
};

DecayTable decay_table(const SeriesContext& ctx, const DecayLattice& lattice, const std::string& scenario,
                       ResummedSeries* series = nullptr);

struct DecayReport {
    std::string scenario;
    int m = 3;
    Regime regime = Regime::small_potential;
    std::vector<DecayRow> rows;
    std::vector<double> envelope;
    double fitted_constant = 0.0;  // max |kernel| / envelope over rows at even-indexed N
    double fitted_slope = 0.0;     // log(|kernel| / N^3) against log<t>, rows with t >= far_start
    double target_slope = 0.0;     // -(m+1), or -(2m+1)/2 in the high regime
    double slope_tolerance = 0.3;
    double margin = 1.25;
    double worst_envelope_ratio = 0.0;  // max |kernel| / (C envelope) over all rows
    double refit_change = 0.0;     // relative change of C when fitted on the odd-indexed N instead
    bool envelope_pass = false;
    bool slope_pass = false;
    bool inconclusive = false;
    bool pass = false;
    std::string note;
};

/// Envelope N^3 ||chi||_{W^{m,1}} / <t>^{m+1}; high regime N^3 ||chi||_{W^{2m,1}}^{1/2} / <t>^{(2m+1)/2}.
double decay_envelope(const MultiplierProfile& profile, Regime regime, int m, double N, double t);

DecayReport evaluate_decay(const DecayTable& table, const MultiplierProfile& profile, int m,
                           double slope_tolerance = 0.3, double margin = 1.25);

DecayReport decay_sweep(const SeriesContext& ctx, int m, const DecayLattice& lattice, const std::string& scenario,
                        ResummedSeries* series = nullptr);

// ---------------------------------------------------------------- summability

struct SummabilityRow {
    int n = 0;
    double magnitude = 0.0;  // majorant estimate, n = 0 is |free kernel|
    double stderr_ = 0.0;
    double ratio = 0.0;      // magnitude_n / magnitude_{n-1}
    double ratio_stderr = 0.0;
    double envelope = 0.0;   // (n + 1) q^n magnitude_0
};

struct SummabilityReport {
    double N = 0.0;
    Vec3 x = Vec3::Zero(), y = Vec3::Zero();
    double q = 0.0;
    double lo = 0.0, hi = 0.0;  // accepted ratio band [q/2, 2q]
    double sigmas = 3.0;
    std::vector<SummabilityRow> rows;
    bool pass = false;
    std::string note;
};

SummabilityReport summability_sweep(const SeriesContext& ctx, double N, const Vec3& x, const Vec3& y, int n_max,
                                    std::size_t samples, std::uint64_t stream = 0, double sigmas = 3.0);

// ---------------------------------------------------------------- thresholds

struct DominationSample {
    double lambda = 0.0, lambda0 = 0.0;
    double worst_excess = 0.0;  // max_ij (|B_ij| - Bmaj_ij) / max Bmaj
    double B_l1 = 0.0;
};

struct ThresholdLedger {
    double kato = 0.0;
    bool zero_potential = false;
    STildeBound S_tilde;
    double eps = 0.0;
    double delta = 0.0;
    double N0 = 0.0;
    double B_major_l1 = 0.0;
    double V_eps_l1 = 0.0;
    std::vector<DominationSample> domination;
    N1Search N1;
    bool residual_pass = false;
    bool majorant_pass = false;
    bool pass = false;
    std::string note;
};

struct ThresholdOptions {
    std::vector<double> S_lambdas{0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    int domination_pairs = 20;
    double lambda0_max = 4.0;
    std::uint64_t seed = 1;
    double residual_tolerance = 1e-8;
    bool search_N1 = true;
    double N1_min = 0.25;
};

ThresholdLedger compute_thresholds(const PotentialModel& V, std::shared_ptr<const QuadratureGrid> grid,
                                   const ThresholdOptions& options);

// ---------------------------------------------------------------- discrete operator checks

struct VR0BoundRow {
    double lambda = 0.0;
    double l1 = 0.0;
};

struct VR0BoundReport {
    std::string potential;
    double bound = 0.0;  // ||V||_K / 4 pi + 2 grid tolerance
    double grid_tolerance = 0.0;
    std::vector<VR0BoundRow> rows;
    bool pass = false;
};

VR0BoundReport vr0_bound_check(const PotentialModel& V, const std::vector<double>& lambdas,
                               std::shared_ptr<const QuadratureGrid> grid);

struct L43Report {
    std::vector<double> lambdas;
    std::vector<double> estimates;
    double fitted_slope = 0.0;
    double target = -0.5;
    double tolerance = 0.2;
    bool pass = false;
};

L43Report l43_trend(const std::vector<double>& lambdas, const RadialLine& line, int trials, std::uint64_t seed);

// ---------------------------------------------------------------- low-frequency majorant

struct LowFreqSample {
    Vec3 x = Vec3::Zero();
    std::size_t y_node = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool calibration = false;
};

struct LowFreqOptions {
    int n_max = 8;
    int m = 3;
    int calibration_samples = 5;
    int check_samples = 10;
    double margin = 1.25;
    double sample_radius = 2.0;
    double min_separation = 0.25;
    std::uint64_t seed = 1;
    /// N as a fraction of N0.
    double N_fraction = 0.5;
    double rate_tolerance = 0.1;
};

struct LowFreqReport {
    ThresholdLedger thresholds;
    double N = 0.0;
    std::vector<double> norms;   // discrete L_y^inf L_x1^1 norm of (K1^n o K2^n)^{1/2}
    std::vector<double> bounds;  // (S~ + 1) / sqrt(2 pi)^n
    double rate = 0.0;           // max successive ratio over n >= 1
    double bound_rate = 0.0;     // 1 / sqrt(2 pi)
    double series_norm = 0.0;
    std::vector<LowFreqSample> samples;
    double fitted_constant = 0.0;
    bool summable_pass = false;
    bool pointwise_pass = false;
    bool pass = false;
    std::string note;
};

LowFreqReport lowfreq_majorant_check(const PotentialModel& V, const MultiplierProfile& profile,
                                     std::shared_ptr<const QuadratureGrid> grid, const ThresholdOptions& thresholds,
                                     const LowFreqOptions& options);

// ---------------------------------------------------------------- L^p -> L^q scaling

struct NormScalingRow {
    double N = 0.0;
    double norm = 0.0;  // best ratio ||P_N f||_q / ||f||_p over the trials
    double width = 0.0;
    double shift = 0.0;
    double series_norm = 0.0;  // series route, (1, inf) only
};

struct NormScalingReport {
    double p = 1.0, q = 1.0, s = 0.0;
    std::vector<NormScalingRow> rows;
    double fitted_exponent = 0.0;
    double series_exponent = 0.0;
    bool has_series_route = false;
    double tolerance = 0.3;
    bool pass = false;
    std::string note;
};

struct NormScalingOptions {
    int trials = 24;
    std::uint64_t seed = 1;
    double tolerance = 0.3;
    /// Bump widths c / N with c in [c_lo, c_hi], shells centered at a / N with a in [0, a_hi].
    double c_lo = 0.5, c_hi = 2.0, a_hi = 2.0;
};

/// Oracle route on radial test functions f = exp(-(r - a/N)^2 / (c/N)^2). With a SeriesContext the (1, inf)
/// case is cross-checked by sup |P_N(x, x)| over a few diagonal points.
NormScalingReport lp_lq_scaling(const SpectralData& data, const MultiplierProfile& profile, double p, double q,
                                const std::vector<double>& N_list, const NormScalingOptions& options,
                                const SeriesContext* series_ctx = nullptr);

// ---------------------------------------------------------------- Sobolev

struct SobolevRow {
    int j = 0;
    double ratio = 0.0;      // ||H^{-s/2} P_c f_j||_q / ||P_c f_j||_p
    double raw_ratio = 0.0;  // same numerator over ||f_j||_p
    bool skipped = false;
    std::string note;
};

struct SobolevReport {
    double s = 0.0, p = 0.0, q = 0.0;
    std::string family;
    std::vector<SobolevRow> rows;
    std::size_t bound_states = 0;
    double spread = 0.0;      // max / min of ratio
    double raw_spread = 0.0;  // max / min of raw_ratio
    double max_spread = 3.0;
    bool pass = false;
    std::string note;
};

enum class TestFamily { gaussian, bump };

/// Test inputs are P_c g_j with g_j(x) = g(2^j x) radial, so the verdict sees the continuous part the
/// operator acts on; the unprojected ratios are reported alongside.
SobolevReport sobolev_check(const SpectralData& data, double s, double p, double q, const std::vector<int>& j_list,
                            TestFamily family = TestFamily::gaussian, double max_spread = 3.0);

// ---------------------------------------------------------------- Fubini check

struct FubiniReport {
    double N = 0.0;
    Vec3 x = Vec3::Zero(), y = Vec3::Zero();
    double route_a = 0.0;  // x1-space quadrature with F_N(sigma_1)
    double route_b = 0.0;  // lambda integral last
    double relative = 0.0;
    double tolerance = 1e-2;
    bool pass = false;
};

FubiniReport fubini_consistency(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                                  double tolerance = 1e-2);

} // namespace lpk
