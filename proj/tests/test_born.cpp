#include <doctest.h>

#include <cmath>

#include "lpk/born_series.hpp"
#include "lpk/oracle.hpp"

using namespace lpk;

namespace {

SeriesConfig quick_config()
{
    SeriesConfig c;
    c.max_n = 3;
    c.mc_samples = 4096;
    c.term_tolerance = 0.5;
    c.seed = 7;
    return c;
}

} // namespace

TEST_CASE("regime names round-trip")
{
    for (Regime r : {Regime::small_potential, Regime::high_frequency, Regime::low_frequency,
                     Regime::medium_frequency})
        CHECK(regime_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(regime_from_string("sideways"), Error);
}

TEST_CASE("free kernel agrees with the direct k-integral")
{
    const MultiplierProfile chi = make_bump();
    const OddProfileTransform T(chi);
    const Vec3 o(0.2, -0.1, 0.3);
    for (double N : {0.5, 1.0, 3.0})
        for (double t : {0.3, 1.0, 4.0, 9.0}) {
            const Vec3 y = o + Vec3(t / N, 0, 0);
            const double direct = free_radial_multiplier_kernel(projection_multiplier(chi, N), N / 2, 2 * N, t / N);
            CHECK(free_LP_kernel(T, N, o, y) == doctest::Approx(direct).epsilon(1e-6).scale(1e-6 * N * N * N));
        }
}

TEST_CASE("free kernel scales as N^3 P_1(N x, N y)")
{
    const OddProfileTransform T(make_bump());
    const Vec3 x(0.3, 0.0, 0.1), y(-0.2, 0.4, 0.0);
    for (double N : {0.25, 2.0, 5.0})
        CHECK(free_LP_kernel(T, N, x, y) ==
              doctest::Approx(N * N * N * free_LP_kernel(T, 1.0, N * x, N * y)).epsilon(1e-10));
    CHECK(free_LP_kernel(T, 2.0, x, x) ==
          doctest::Approx(8.0 * chi_moment(make_bump(), 2) / (2 * pi * pi)).epsilon(1e-12));
}

TEST_CASE("tail weight of the geometric majorant")
{
    CHECK(born_tail_weight(0.0, 3) == 0.0);
    CHECK(std::isinf(born_tail_weight(1.0, 3)));
    const double q = 0.4;
    double direct = 0.0;
    for (int n = 5; n < 400; ++n) direct += (n + 1) * std::pow(q, n);
    CHECK(born_tail_weight(q, 4) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("zero potential gives the free kernel")
{
    const SeriesContext ctx(PotentialModel::zero(), make_bump(), quick_config());
    const Vec3 x(0.1, 0.2, 0.3), y(0.5, -0.2, 0.0);
    const KernelEvaluation ev = sum_small_potential(1.5, x, y, ctx);
    CHECK(ev.value == doctest::Approx(free_LP_kernel(ctx.transform(), 1.5, x, y)).epsilon(1e-14));
    CHECK(ev.truncation_bound == 0.0);
}

TEST_CASE("n = 1 quadrature is linear in V and matches chain Monte Carlo")
{
    const Vec3 x(0.2, 0.1, -0.1), y(-0.3, 0.2, 0.4);
    const SeriesContext a(PotentialModel::gaussian(0.5, 1.0), make_bump(), quick_config());
    const SeriesContext b(PotentialModel::gaussian(1.0, 1.0), make_bump(), quick_config());
    const double ta = born_term(1, 1.0, x, y, a).value;
    CHECK(born_term(1, 1.0, x, y, b).value == doctest::Approx(2 * ta).epsilon(1e-8));
    const KernelEvaluation mc = born_term_mc(1, 1.0, x, y, a, 200000);
    CHECK(std::abs(mc.value - ta) <= 4 * mc.mc_stderr);
}

TEST_CASE("n = 2 is quadratic in V")
{
    const Vec3 x(0.2, 0.1, -0.1), y(-0.3, 0.2, 0.4);
    const SeriesContext a(PotentialModel::yukawa(0.25, 1.0), make_bump(), quick_config());
    const SeriesContext b(PotentialModel::yukawa(0.5, 1.0), make_bump(), quick_config());
    // same seeds and the same normalized sampler, so the estimates scale exactly
    const double ta = born_term_mc(2, 1.0, x, y, a, 8192).value;
    CHECK(born_term_mc(2, 1.0, x, y, b, 8192).value == doctest::Approx(4 * ta).epsilon(1e-10));
}

TEST_CASE("lambda-last route matches the n = 1 term")
{
    const SeriesContext ctx(PotentialModel::gaussian(1.0, 1.0), make_bump(), quick_config());
    const Vec3 x(0.4, -0.2, 0.1), y(-0.1, 0.3, 0.5);
    const double a = born_term(1, 1.0, x, y, ctx).value;
    const double b = born_term1_lambda_first(1.0, x, y, ctx);
    CHECK(b == doctest::Approx(a).epsilon(1e-2));
}

TEST_CASE("large potential without a resummed series is a regime error")
{
    SeriesConfig c = quick_config();
    c.N0 = 0.01;
    const SeriesContext ctx(PotentialModel::gaussian(6.0, 1.0), make_bump(), c);
    CHECK(ctx.kato() >= four_pi);
    try {
        projection_kernel(0.5, Vec3(0, 0, 0), Vec3(0.5, 0, 0), ctx);
        FAIL("expected a regime error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::regime);
    }
}
