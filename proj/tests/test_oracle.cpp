#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lpk/born_series.hpp"
#include "lpk/oracle.hpp"

using namespace lpk;

namespace {

RadialDiscretization disc(double R, double h, int l_max)
{
    RadialDiscretization d;
    d.R_max = R;
    d.h = h;
    d.l_max = l_max;
    return d;
}

// l = 0 bound state of the well -depth on [0, 1]: k cot k = -kappa, k^2 + kappa^2 = depth
double well_ground_state(double depth)
{
    auto f = [depth](double k) { return k / std::tan(k) + std::sqrt(depth - k * k); };
    double lo = pi / 2 + 1e-12, hi = std::min(pi - 1e-12, std::sqrt(depth) - 1e-12);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0 ? hi : lo) = mid;
    }
    const double k = 0.5 * (lo + hi);
    return k * k - depth;
}

} // namespace

TEST_CASE("dispersion correction inverts the 3-point symbol")
{
    const double h = 0.05;
    CHECK(dispersion_corrected(0.0, h) == 0.0);
    for (double k : {0.3, 2.0, 10.0}) {
        const double E = 4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
        CHECK(dispersion_corrected(E, h) == doctest::Approx(k * k).epsilon(1e-12));
    }
    CHECK(dispersion_corrected(-1.5, h) == -1.5);
}

TEST_CASE("radial Hamiltonian entries")
{
    const auto d = disc(2.0, 0.1, 2);
    const Tridiagonal t = assemble_radial_hamiltonian(2, d, PotentialModel::ball(3.0, 1.0));
    REQUIRE(t.diag.size() == static_cast<std::size_t>(d.interior_points()));
    REQUIRE(t.off.size() + 1 == t.diag.size());
    const double r = 0.5;  // node 4
    CHECK(t.diag[4] == doctest::Approx(2 / (d.h * d.h) + 6 / (r * r) + 3.0));
    CHECK(t.diag.back() == doctest::Approx(2 / (d.h * d.h) + 6 / (1.9 * 1.9)));
    CHECK(t.off[0] == doctest::Approx(-1 / (d.h * d.h)));
}

TEST_CASE("free l = 0 spectrum is exactly (pi k / R)^2 after correction")
{
    const auto d = disc(10.0, 0.05, 0);
    const SpectralData s = solve_spectrum(PotentialModel::zero(), d, 0.0);
    REQUIRE(s.waves.size() == 1);
    const auto& ev = s.waves[0].eigenvalues;
    REQUIRE(ev.size() == static_cast<std::size_t>(d.interior_points()));
    for (std::size_t k = 0; k < ev.size(); k += 37)
        CHECK(ev[k] == doctest::Approx(std::pow(pi * (k + 1) / d.R_max, 2)).epsilon(1e-9));
    CHECK(s.negative_eigenvalues.empty());
}

TEST_CASE("square well ground state")
{
    const double depth = 10.0;
    const SpectralData s = solve_spectrum(PotentialModel::ball(-depth, 1.0), disc(12.0, 0.005, 0), 0.0);
    REQUIRE(s.negative_eigenvalues.size() == 1);
    CHECK(s.negative_eigenvalues[0] == doctest::Approx(well_ground_state(depth)).epsilon(2e-4));
}

TEST_CASE("windowed partial waves keep only eigenvalues below lambda_max")
{
    const SpectralData s = solve_spectrum(PotentialModel::zero(), disc(8.0, 0.04, 4), 9.0);
    REQUIRE(s.waves.size() == 5);
    CHECK(s.waves[0].raw_eigenvalues.size() == static_cast<std::size_t>(s.disc.interior_points()));
    for (std::size_t l = 1; l < s.waves.size(); ++l) {
        CHECK(!s.waves[l].raw_eigenvalues.empty());
        for (double e : s.waves[l].raw_eigenvalues) CHECK(e <= 9.0);
        CHECK(s.waves[l].vectors.rows() == s.stored_rows());
    }
}

TEST_CASE("spectral cache round-trip and key mismatch")
{
    const auto d = disc(6.0, 0.05, 3);
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    const SpectralData s = solve_spectrum(V, d, 16.0);
    CHECK(s.cache_key() == spectral_cache_key(V, d, 16.0));
    CHECK(spectral_cache_key(V, d, 16.0) != spectral_cache_key(PotentialModel::yukawa(0.6, 1.0), d, 16.0));
    const auto path = (std::filesystem::temp_directory_path() / "lpk_test_cache.spec").string();
    save_spectral(s, path);
    const auto loaded = load_spectral(path, s.cache_key());
    REQUIRE(loaded);
    REQUIRE(loaded->waves.size() == s.waves.size());
    for (std::size_t l = 0; l < s.waves.size(); ++l) {
        CHECK(loaded->waves[l].eigenvalues == s.waves[l].eigenvalues);
        CHECK(loaded->waves[l].vectors == s.waves[l].vectors);
    }
    CHECK_FALSE(load_spectral(path, "0000"));
    std::remove(path.c_str());
}

TEST_CASE("free oracle kernel matches the closed form")
{
    const MultiplierProfile chi = make_bump();
    const OddProfileTransform T(chi);
    const SpectralData s = solve_spectrum(PotentialModel::zero(), disc(24.0, 0.02, 24), 25.0);
    const double N = 2.0;
    const Vec3 p(0.25 / N, 0, 0);
    const double diag = free_LP_kernel(T, N, p, p);
    for (double t : {0.0, 1.0, 3.0}) {
        const Vec3 x = p - Vec3(0, 0, 0.5 * t / N), y = p + Vec3(0, 0, 0.5 * t / N);
        const OracleKernel k = multiplier_kernel(projection_multiplier(chi, N), x, y, s, 1e-2);
        CHECK(std::abs(k.value - free_LP_kernel(T, N, x, y)) <= 1e-2 * diag);
    }
}

TEST_CASE("continuous projection is idempotent and removes the bound state")
{
    const SpectralData s = solve_spectrum(PotentialModel::ball(-10.0, 1.0), disc(16.0, 0.02, 0), 0.0);
    REQUIRE(s.negative_eigenvalues.size() == 1);
    const RadialSamples f = sample_radial([](double r) { return std::exp(-r * r); }, s);
    const RadialSamples pf = continuous_projection_apply(f, s);
    const RadialSamples ppf = continuous_projection_apply(pf, s);
    double diff = 0.0, overlap = 0.0;
    const auto& u0 = s.waves[0].vectors.col(0);
    for (std::size_t i = 0; i < pf.size(); ++i) {
        diff = std::max(diff, std::abs(ppf[i] - pf[i]));
        overlap += u0[static_cast<Eigen::Index>(i)] * s.r(static_cast<int>(i)) * pf[i];
    }
    CHECK(diff <= 1e-12);
    CHECK(std::abs(overlap) <= 1e-12);
    CHECK(radial_lp_norm(pf, s, 2.0) < radial_lp_norm(f, s, 2.0));
}

TEST_CASE("radial norms of a Gaussian")
{
    const SpectralData s = solve_spectrum(PotentialModel::zero(), disc(12.0, 0.01, 0), 0.0);
    const RadialSamples f = sample_radial([](double r) { return std::exp(-r * r); }, s);
    // int e^{-p r^2} d^3x = (pi / p)^{3/2}
    CHECK(radial_lp_norm(f, s, 1.0) == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-6));
    CHECK(radial_lp_norm(f, s, 2.0) == doctest::Approx(std::pow(pi / 2, 0.75)).epsilon(1e-6));
    CHECK(radial_lp_norm(f, s, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0).epsilon(1e-3));
}
