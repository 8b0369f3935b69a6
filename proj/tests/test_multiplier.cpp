#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lpk/multiplier.hpp"

using namespace lpk;

namespace {

// Independent F_1 via adaptive Gauss-Kronrod on each smooth piece.
double F1_oracle(const MultiplierProfile& p, double t)
{
    auto f = [&](double u) { return 2.0 * u * p.chi(u) * std::sin(u * t); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    double s = 0.0;
    for (int k = 0; k < 48; ++k) s += GK::integrate(f, 0.5 + k / 96.0, 0.5 + (k + 1) / 96.0, 8, 1e-13);
    for (int k = 0; k < 96; ++k) s += GK::integrate(f, 1.0 + k / 96.0, 1.0 + (k + 1) / 96.0, 8, 1e-13);
    return s;
}

} // namespace

TEST_CASE("bump values and support")
{
    const auto chi = make_bump();
    CHECK(chi.chi(1.0) == doctest::Approx(1.0));
    CHECK(chi.chi(0.4) == 0.0);
    CHECK(chi.chi(2.0) == 0.0);
    CHECK(chi.chi(0.5) == 0.0);
    CHECK(chi.phi(-1.3) == doctest::Approx(-chi.phi(1.3)));
    for (double l : {0.6, 0.9, 1.37, 1.9})
        CHECK(chi.chi(l) >= 0.0);
}

TEST_CASE("dyadic partition of unity")
{
    const auto chi = make_bump();
    for (double l : {0.013, 0.9, 1.0, 3.7, 150.0}) {
        double s = 0.0;
        for (int k = -20; k <= 20; ++k) s += chi.chi(l / std::ldexp(1.0, k));
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("jet derivatives match finite differences")
{
    const auto chi = make_bump();
    const double l = 1.3, h = 1e-5;
    const double fd = (chi.chi(l + h) - chi.chi(l - h)) / (2 * h);
    CHECK(chi.chi_derivative(l, 1) == doctest::Approx(fd).epsilon(1e-7));
    const double fd2 = (chi.chi(l + h) - 2 * chi.chi(l) + chi.chi(l - h)) / (h * h);
    CHECK(chi.chi_derivative(l, 2) == doctest::Approx(fd2).epsilon(1e-4));
    CHECK_THROWS_AS(chi.chi_derivative(l, 9), Error);
}

TEST_CASE("W^{m,1} norms are nondecreasing in m")
{
    const auto chi = make_bump();
    double prev = 0.0;
    for (int m = 0; m <= 8; ++m) {
        const double v = sobolev_W_m1_norm(chi, m);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(sobolev_W_m1_norm(chi, 0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(chi_moment(chi, -1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(sobolev_W_m1_norm(chi, 9), Error);
}

TEST_CASE("Sobolev-modified profile")
{
    CHECK_THROWS_AS(MultiplierProfile(1.0, 3.0), Error);
    CHECK_THROWS_AS(MultiplierProfile(1.0, 0.0), Error);
    const MultiplierProfile p(1.0, 1.5);
    CHECK(p.chi(1.0) == doctest::Approx(1.0));
    CHECK(p.chi(1.5) == doctest::Approx(make_bump().chi(1.5) * std::pow(1.5, -1.5)));
}

TEST_CASE("sine transform against adaptive quadrature")
{
    const auto chi = make_bump();
    const OddProfileTransform T(chi);
    for (double t : {0.0, 1e-3, 0.37, 1.0, 4.2, 17.0, 63.3, 200.1, 300.0}) {
        const double ref = F1_oracle(chi, t);
        CHECK(T.F1_direct(t) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        CHECK(std::abs(T.F1(t) - ref) < 1e-9);
    }
    CHECK(T.F1(-2.5) == doctest::Approx(-T.F1(2.5)));
    CHECK(T.F(4.0, 0.3) == doctest::Approx(4.0 * T.F1(1.2)));
}

TEST_CASE("small-argument envelope")
{
    const auto chi = make_bump();
    const OddProfileTransform T(chi);
    const double m2 = chi_moment(chi, 2);
    for (double N : {1.0, 8.0, 64.0})
        for (double sigma : {1e-4, 1e-2, 0.1, 1.0}) {
            const double envelope = 2.0 * N * N * sigma * m2;
            CHECK(std::abs(T.F(N, sigma)) <= envelope * (1 + 1e-12));
        }
    // sharp as sigma -> 0
    const double r = T.F(2.0, 1e-6) / (2.0 * 4.0 * 1e-6 * m2);
    CHECK(r == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cosine moment vanishes and phi_N L1 norm")
{
    const auto chi = make_bump();
    const OddProfileTransform T(chi);
    for (double s : {0.0, 0.4, 3.0}) CHECK(std::abs(T.cosine_moment(8.0, s)) < 1e-13);
    CHECK(T.phi_l1(4.0) == doctest::Approx(8.0 * chi_moment(chi, 1)));
}

TEST_CASE("tail supremum is a nonincreasing envelope")
{
    const auto chi = make_bump();
    const OddProfileTransform T(chi);
    double prev = T.F1_tail_sup(0.0);
    for (double t = 0.0; t < 250.0; t += 0.7) {
        const double e = T.F1_tail_sup(t);
        CHECK(e <= prev);
        CHECK(std::abs(T.F1(t)) <= e * (1 + 1e-9) + 1e-15);
        prev = e;
    }
}

TEST_CASE("translated partition")
{
    const auto P = make_translated_partition(0.25);
    CHECK(P.psi(0.0) == doctest::Approx(1.0));
    CHECK(P.psi(0.25 / 3.0) == doctest::Approx(1.0));
    CHECK(P.psi(0.25) == 0.0);
    CHECK(P.psi(2.0 / 3.0 * 0.25) == 0.0);
    for (double l : {0.0, 0.01, 0.3, 0.625, 2.5 * 0.25, 9.1}) {
        double s = 0.0;
        for (int j = 0; j < 60; ++j) s += P.weight(j, l);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(make_translated_partition(0.0), Error);
}

TEST_CASE("active window covers exactly the overlapping translates")
{
    for (double delta : {0.1, 0.25, 1.0})
        for (double N : {0.5, 1.0, 3.0, 10.0}) {
            const auto P = make_translated_partition(delta);
            const auto [lo, hi] = P.active_window(N);
            for (int j = 0; j < static_cast<int>(4 * N / delta) + 5; ++j) {
                const bool overlaps = j * delta + P.support_radius() > N / 2 && j * delta - P.support_radius() < 2 * N;
                CHECK(overlaps == (j >= lo && j <= hi));
            }
        }
}
