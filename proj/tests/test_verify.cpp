#include <doctest.h>

#include <cmath>
#include <memory>

#include "lpk/verify.hpp"

using namespace lpk;

namespace {

std::shared_ptr<const QuadratureGrid> small_grid()
{
    GridSpec s;
    s.radius = 3.0;
    s.panels = 3;
    s.per_panel = 3;
    s.n_theta = 4;
    s.n_phi = 8;
    return std::make_shared<QuadratureGrid>(make_ball_grid(s));
}

DecayTable synthetic_table(double power)
{
    DecayTable t;
    t.scenario = "synthetic";
    for (double N : t.lattice.N) {
        std::vector<double> ts = t.lattice.t_near;
        ts.insert(ts.end(), t.lattice.t_far.begin(), t.lattice.t_far.end());
        for (double s : ts) t.rows.push_back({N, s, 0.3 * N * N * N / std::pow(japanese(s), power), 0.0});
    }
    return t;
}

RadialDiscretization disc(double R, double h)
{
    RadialDiscretization d;
    d.R_max = R;
    d.h = h;
    d.l_max = 0;
    return d;
}

} // namespace

TEST_CASE("slope fit is exact on a line")
{
    CHECK(fit_slope({0, 1, 2, 3}, {1, -1, -3, -5}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(fit_slope({1.0}, {2.0}), Error);
}

TEST_CASE("decay envelope")
{
    const auto chi = make_bump();
    const double n3 = sobolev_W_m1_norm(chi, 3);
    CHECK(decay_envelope(chi, Regime::small_potential, 3, 2.0, 1.0) == doctest::Approx(8 * n3 / 4.0));
    const double n6 = std::sqrt(sobolev_W_m1_norm(chi, 6));
    CHECK(decay_envelope(chi, Regime::high_frequency, 3, 1.0, 0.0) == doctest::Approx(n6));
}

TEST_CASE("decay verdicts on synthetic tables")
{
    const auto chi = make_bump();
    const DecayReport fast = evaluate_decay(synthetic_table(4.0), chi, 3);
    CHECK(fast.fitted_slope == doctest::Approx(-4.0).epsilon(1e-9));
    CHECK(fast.worst_envelope_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fast.refit_change <= 1e-9);
    CHECK(fast.pass);
    const DecayReport slow = evaluate_decay(synthetic_table(2.0), chi, 3);
    CHECK_FALSE(slow.slope_pass);
    CHECK_FALSE(slow.pass);
    CHECK(evaluate_decay(synthetic_table(2.0), chi, 1).pass);
}

TEST_CASE("zero potential thresholds")
{
    ThresholdOptions o;
    o.S_lambdas = {0.0, 1.0};
    o.domination_pairs = 2;
    const ThresholdLedger l = compute_thresholds(PotentialModel::zero(), small_grid(), o);
    CHECK(l.zero_potential);
    CHECK(std::isinf(l.eps));
    CHECK(std::isinf(l.N0));
    CHECK(l.pass);
}

TEST_CASE("thresholds are deterministic and consistent")
{
    ThresholdOptions o;
    o.S_lambdas = {0.0, 1.0, 2.0};
    o.domination_pairs = 4;
    o.search_N1 = false;
    const auto g = small_grid();
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    const ThresholdLedger a = compute_thresholds(V, g, o), b = compute_thresholds(V, g, o);
    CHECK(a.eps == b.eps);
    CHECK(a.delta == b.delta);
    CHECK(a.eps == doctest::Approx(eps_from_S_tilde(a.S_tilde.value, a.kato)));
    CHECK(a.N0 == doctest::Approx(a.delta / 2));
    CHECK(a.delta * a.V_eps_l1 <= a.eps * (1 + 1e-12));
    CHECK(a.residual_pass);
    CHECK(a.majorant_pass);
}

TEST_CASE("V R_0 bound check on a small grid")
{
    const VR0BoundReport r = vr0_bound_check(PotentialModel::gaussian(1.0, 1.0), {0.0, 1.0, 2.5}, small_grid());
    CHECK(r.rows.size() == 3);
    CHECK(r.pass);
}

TEST_CASE("Fubini check on one configuration")
{
    SeriesConfig c;
    c.seed = 3;
    const SeriesContext ctx(PotentialModel::gaussian(1.0, 1.0), make_bump(), c);
    const FubiniReport r = fubini_consistency(1.0, Vec3(0.3, 0.1, 0.0), Vec3(-0.2, 0.0, 0.4), ctx);
    CHECK(r.pass);
    CHECK(r.relative <= 1e-2);
}

TEST_CASE("free L2 -> L2 norms do not grow with N")
{
    const SpectralData s = solve_spectrum(PotentialModel::zero(), disc(24.0, 0.01), 0.0);
    NormScalingOptions o;
    o.trials = 6;
    const NormScalingReport r = lp_lq_scaling(s, make_bump(), 2.0, 2.0, {0.5, 1.0, 2.0, 4.0}, o);
    CHECK(r.s == 0.0);
    CHECK(std::abs(r.fitted_exponent) <= 0.3);
    for (const auto& row : r.rows) CHECK(row.norm <= 1.0 + 1e-6);
}

TEST_CASE("free Sobolev ratios are scale invariant")
{
    const SpectralData s = solve_spectrum(PotentialModel::zero(), disc(24.0, 0.01), 0.0);
    const SobolevReport r = sobolev_check(s, 1.0, 2.0, 6.0, {-1, 0, 1, 2, 3, 4});
    CHECK(r.bound_states == 0);
    CHECK(r.spread <= 1.5);
    CHECK(r.spread == doctest::Approx(r.raw_spread).epsilon(1e-9));
    CHECK(r.pass);
}
