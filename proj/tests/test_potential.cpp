#include <doctest.h>

#include <cmath>

#include "lpk/potential.hpp"

using namespace lpk;

namespace {

Vec3 random_unit(Rng& rng)
{
    const double mu = 2 * rng.uniform() - 1, ph = 2 * pi * rng.uniform();
    const double st = std::sqrt(1 - mu * mu);
    return {st * std::cos(ph), st * std::sin(ph), mu};
}

} // namespace

TEST_CASE("Kato norm closed forms")
{
    CHECK(kato_norm(PotentialModel::zero()).value == 0.0);
    const auto ball = kato_norm(PotentialModel::ball(1.0));
    CHECK(ball.value == doctest::Approx(2 * pi).epsilon(1e-10));
    CHECK(ball.method == KatoNormEstimate::Method::closed_form);
    CHECK(ball.quadrature_error <= 1e-8);
    CHECK(kato_norm(PotentialModel::yukawa(1.0)).value == doctest::Approx(4 * pi).epsilon(1e-10));
    // 4 pi int_0^inf s c e^{-s^2} ds = 2 pi c
    CHECK(kato_norm(PotentialModel::gaussian(3.0)).value == doctest::Approx(6 * pi).epsilon(1e-10));
}

TEST_CASE("Kato integral off-center for the ball")
{
    const auto V = PotentialModel::ball(1.0);
    for (double a : {0.0, 0.3, 0.9, 1.5, 4.0}) {
        const double exact = a <= 1 ? four_pi * (0.5 - a * a / 6) : four_pi / (3 * a);
        CHECK(kato_integral(V, Vec3(0, a, 0), 1e-12) == doctest::Approx(exact).epsilon(1e-10));
    }
}

TEST_CASE("spherical route agrees with the shell theorem")
{
    const auto V = PotentialModel::gaussian(1.5, 0.8);
    for (const Vec3& x : {Vec3(0, 0, 0), Vec3(0.4, 0.1, -0.3), Vec3(2.0, 0, 0)})
        CHECK(kato_integral_spherical(V, x, 1e-11) == doctest::Approx(kato_integral(V, x, 1e-11)).epsilon(1e-8));
}

TEST_CASE("numeric sup over centers for a shifted potential")
{
    const Vec3 c(0.5, -0.25, 0.0);
    const auto V = PotentialModel::general(
        "shifted_gaussian", [c](const Vec3& x) { return std::exp(-(x - c).squaredNorm()); },
        [c](double r) { return std::exp(-std::pow(std::max(0.0, r - c.norm()), 2)); }, 7.0);
    const auto est = kato_norm(V);
    CHECK(est.method == KatoNormEstimate::Method::numeric_sup);
    CHECK(est.candidate_centers > 125);
    CHECK(est.value <= 2 * pi * (1 + 1e-8));
    CHECK(est.value == doctest::Approx(2 * pi).epsilon(1e-3));

    const Vec3 centers[] = {Vec3::Zero(), c};
    const auto at = kato_norm(V, centers, 1e-11);
    CHECK(at.candidate_centers == 2);
    CHECK(at.value == doctest::Approx(2 * pi).epsilon(1e-8));
    CHECK((at.argmax - c).norm() == 0.0);
}

TEST_CASE("homogeneity, monotonicity, triangle inequality")
{
    const auto V = PotentialModel::yukawa(1.0, 0.7);
    const double base = kato_norm(V).value;
    for (double c : {2.0, 1.0 / 3.0, -5.0})
        CHECK(kato_norm(V.scaled(c)).value == doctest::Approx(std::abs(c) * base).epsilon(1e-10));

    CHECK(kato_norm(PotentialModel::ball(1.0, 0.5)).value <= kato_norm(PotentialModel::ball(1.0, 1.0)).value);
    CHECK(kato_norm(PotentialModel::gaussian(1.0)).value <= kato_norm(PotentialModel::gaussian(2.0)).value);

    const auto A = PotentialModel::ball(-2.0, 1.5);
    const auto B = PotentialModel::gaussian(1.0, 0.5);
    const double sum = kato_norm(A + B).value;
    CHECK(sum <= kato_norm(A).value + kato_norm(B).value + 1e-8);
}

TEST_CASE("potential metadata invariants")
{
    Rng rng(7);
    const PotentialModel all[] = {PotentialModel::ball(2.0), PotentialModel::gaussian(-1.0),
                                  PotentialModel::yukawa(0.5), PotentialModel::smooth_bump(3.0, 2.0)};
    for (const auto& V : all) {
        CHECK(V.radial());
        for (int k = 0; k < 20; ++k) {
            const double r = 3 * rng.uniform() + 1e-3;
            const Vec3 x0 = r * random_unit(rng);
            const double v0 = V(x0);
            const double v1 = V(r * random_unit(rng));
            CHECK(std::abs(v0 - v1) <= 1e-12 * std::max(1.0, std::abs(v0)));
            CHECK(std::isfinite(v0));
            CHECK(V.envelope(x0.norm()) >= std::abs(v0));
        }
        if (V.support_radius()) CHECK(V(Vec3(0, 0, *V.support_radius() * 1.0001)) == 0.0);
    }
    const auto [plus, minus] = (PotentialModel::ball(2.0) + PotentialModel::gaussian(-3.0)).sign_split();
    for (double r : {0.2, 0.9, 1.3}) {
        const Vec3 x(r, 0, 0);
        CHECK(plus(x) - minus(x) == doctest::Approx(2.0 * (r <= 1) - 3 * std::exp(-r * r)));
        CHECK(plus(x) >= 0.0);
        CHECK(minus(x) >= 0.0);
    }
    CHECK_THROWS_AS(PotentialModel::ball(1.0, -1.0), Error);
    CHECK_THROWS_AS(PotentialModel::radial_tabulated({0.0}, {1.0}), Error);
}

TEST_CASE("tabulated potential interpolates and integrates")
{
    const auto V = PotentialModel::radial_tabulated({0.0, 1.0, 2.0}, {2.0, 1.0, 0.0});
    CHECK(V(Vec3(0.5, 0, 0)) == doctest::Approx(1.5));
    CHECK(V(Vec3(3, 0, 0)) == 0.0);
    // 4 pi int_0^2 s v(s) ds with v = 2 - s
    CHECK(kato_norm(V).value == doctest::Approx(four_pi * (4.0 - 8.0 / 3.0)).epsilon(1e-10));
}

TEST_CASE("divergent Kato integral is rejected")
{
    const auto V = PotentialModel::general(
        "inverse_square", [](const Vec3& x) { return 1.0 / x.squaredNorm(); },
        [](double r) { return 1.0 / (r * r); }, 5.0);
    CHECK_THROWS_AS(kato_integral(V, Vec3::Zero(), 1e-8), Error);
    try {
        kato_integral(V, Vec3::Zero(), 1e-8);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_kato_class);
    }
}

TEST_CASE("K0 truncation")
{
    const auto ball = PotentialModel::ball(1.0);
    const auto t_ball = truncate_to_K0(ball, 0.1);
    CHECK(t_ball.tail == 0.0);
    CHECK(t_ball.truncated.signature() == ball.signature());

    const auto t_zero = truncate_to_K0(PotentialModel::zero(), 0.3);
    CHECK(t_zero.tail == 0.0);
    CHECK(t_zero.truncated.is_zero());

    const auto Y = PotentialModel::yukawa(1.0);
    const auto t = truncate_to_K0(Y, 0.5);
    CHECK(t.tail <= 0.5);
    CHECK(t.tail > 0.0);
    CHECK(std::isfinite(t.radius));
    CHECK(std::isfinite(t.clip));
    CHECK(t.truncated(Vec3(0, 0, 1.5 * t.radius)) == 0.0);
    CHECK(std::abs(t.truncated(Vec3(0, 0, 1e-6))) <= t.clip);
    // the truncated part and its complement split the norm
    CHECK(kato_norm(t.truncated).value + t.tail >= kato_norm(Y).value - 1e-8);

    CHECK_THROWS_AS(truncate_to_K0(Y, 0.0), Error);
}

TEST_CASE("chain integrals against closed forms")
{
    const auto ball = PotentialModel::ball(1.0);
    CHECK(chain_integral_bound(ball, 0, 0).value == 1.0);
    const auto c1 = chain_integral_bound(ball, 1, 0);
    CHECK(c1.value == doctest::Approx(kato_norm(ball).value / four_pi).epsilon(1e-6));
    CHECK(c1.value == doctest::Approx(0.5).epsilon(1e-10));
    // f_2(0) = int_0^1 s (1/2 - s^2/6) ds = 5/24
    const auto c2 = chain_integral_bound(ball, 2, 40000, 3);
    CHECK(c2.value == doctest::Approx(5.0 / 24.0).epsilon(1e-6));
    CHECK(c2.value <= 0.25);
    CHECK(std::abs(c2.mc_value - c2.value) <= 4 * c2.mc_stderr);

    const auto Y = PotentialModel::yukawa(0.5);
    for (int n = 1; n <= 5; ++n) {
        const auto c = chain_integral_bound(Y, n, 0);
        CHECK(c.value <= c.bound * 1.05);
    }
    CHECK(chain_integral_bound(PotentialModel::zero(), 3, 100).value == 0.0);
    CHECK_THROWS_AS(chain_integral_bound(ball, -1, 0), Error);
}

TEST_CASE("chain sampler reproduces its target density")
{
    // unit ball, |x| = a: kappa = 1/2 - a^2/6, E[|y|^2] and E[y . x/a] from the multipole expansion
    const auto V = PotentialModel::ball(1.0);
    const ChainSampler S(V);
    for (double a : {0.0, 0.5, 2.0}) {
        const Vec3 x(0, a, 0);
        const double kappa = a <= 1 ? 0.5 - a * a / 6 : 1.0 / (3 * a);
        CHECK(S.kappa(x) == doctest::Approx(kappa).epsilon(1e-9));
        Rng rng(mix_seed(11, static_cast<std::uint64_t>(a * 10)));
        const int n = 200000;
        double m2 = 0, m1 = 0, rmax = 0;
        for (int k = 0; k < n; ++k) {
            const Vec3 y = S.sample(x, rng);
            rmax = std::max(rmax, y.norm());
            m2 += y.squaredNorm();
            m1 += y.y();
        }
        CHECK(rmax <= 1.0 + 1e-12);
        m2 /= n;
        m1 /= n;
        const double b = std::min(a, 1.0);
        const double e2 = (a <= 1 ? std::pow(a, 4) / 5 + 0.25 - std::pow(a, 4) / 4 : 1.0 / (5 * a)) / kappa;
        const double e1 =
            (a <= 1 ? (std::pow(b, 3) / 5 + b * (1 - b * b) / 2) / 3 : 1.0 / (15 * a * a)) / kappa;
        CHECK(m2 == doctest::Approx(e2).epsilon(5e-3));
        CHECK(std::abs(m1 - e1) <= 5e-3);
    }
}

TEST_CASE("seed mixing is deterministic and spreads streams")
{
    CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
    CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
    Rng a(5), b(5);
    for (int k = 0; k < 10; ++k) CHECK(a.uniform() == b.uniform());
}
