#include <doctest.h>

#include <cmath>
#include <memory>

#include "lpk/reference.hpp"

using namespace lpk;

namespace {

std::shared_ptr<const QuadratureGrid> small_grid()
{
    GridSpec s;
    s.radius = 3.0;
    s.panels = 2;
    s.per_panel = 3;
    s.n_theta = 4;
    s.n_phi = 8;
    return std::make_shared<QuadratureGrid>(make_ball_grid(s));
}

RadialDiscretization disc(double R, double h, int l_max)
{
    RadialDiscretization d;
    d.R_max = R;
    d.h = h;
    d.l_max = l_max;
    return d;
}

} // namespace

TEST_CASE("parallel V R_0 assembly matches the serial reference")
{
    const auto g = small_grid();
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    for (double l : {0.0, 1.3}) {
        const Eigen::MatrixXcd a = assemble_VR0(V, l, g).matrix();
        const Eigen::MatrixXcd b = reference::assemble_VR0(V, l, *g);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-14 * b.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("parallel chain Monte Carlo reproduces the serial estimate")
{
    SeriesConfig c;
    c.seed = 11;
    const SeriesContext ctx(PotentialModel::gaussian(1.0, 1.0), make_bump(), c);
    const Vec3 x(0.1, 0.2, 0.0), y(-0.4, 0.1, 0.3);
    for (int n : {1, 3})
        for (bool maj : {false, true}) {
            const KernelEvaluation a = born_term_mc(n, 1.0, x, y, ctx, 5000, 2, maj);
            const KernelEvaluation b = reference::born_term_mc(n, 1.0, x, y, ctx, 5000, 2, maj);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
            CHECK(a.mc_stderr == doctest::Approx(b.mc_stderr).epsilon(1e-12));
        }
}

TEST_CASE("tridiagonal solver matches dense diagonalization")
{
    const auto d = disc(6.0, 0.05, 2);
    const auto V = PotentialModel::ball(-10.0, 1.0);
    const SpectralData s = solve_spectrum(V, d, 1e9);
    for (int l : {0, 2}) {
        const PartialWave w = reference::solve_wave_dense(l, d, V);
        const PartialWave& f = s.waves[l];
        REQUIRE(f.raw_eigenvalues.size() == w.raw_eigenvalues.size());
        for (std::size_t k = 0; k < w.raw_eigenvalues.size(); k += 7) {
            CHECK(f.raw_eigenvalues[k] == doctest::Approx(w.raw_eigenvalues[k]).epsilon(1e-10).scale(1.0));
            const auto kk = static_cast<Eigen::Index>(k);
            const double dev = (f.vectors.col(kk) - w.vectors.col(kk).head(f.vectors.rows())).cwiseAbs().maxCoeff();
            CHECK(dev <= 1e-8);
        }
    }
}

TEST_CASE("partial-wave synthesis matches the Boost Legendre reference")
{
    const SpectralData s = solve_spectrum(PotentialModel::yukawa(0.5, 1.0), disc(16.0, 0.02, 16), 16.0);
    const auto m = projection_multiplier(make_bump(), 1.5);
    for (const auto& [x, y] : {std::pair{Vec3(0.3, 0, 0.1), Vec3(-0.2, 0.5, 0.7)},
                               std::pair{Vec3(1.0, 1.0, 0), Vec3(0.0, -0.3, 0.2)}}) {
        const double a = multiplier_kernel(m, x, y, s, 1.0).value;
        const double b = reference::multiplier_kernel(m, x, y, s);
        CHECK(a == doctest::Approx(b).epsilon(1e-10).scale(1e-12));
    }
}
