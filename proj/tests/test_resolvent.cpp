#include <doctest.h>

#include <cmath>
#include <memory>

#include "lpk/resolvent_ops.hpp"

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

} // namespace

TEST_CASE("free resolvent kernel")
{
    const Vec3 x(0.1, 0.2, -0.3), y(1.0, -0.5, 0.4);
    const double r = (x - y).norm();
    for (double l : {0.0, 0.7, 3.0}) {
        const auto p = free_resolvent_kernel(l, ResolventSign::plus, x, y);
        CHECK(p.real() == doctest::Approx(std::cos(l * r) / (four_pi * r)).epsilon(1e-14));
        CHECK(p.imag() == doctest::Approx(std::sin(l * r) / (four_pi * r)).epsilon(1e-14));
        CHECK(std::abs(free_resolvent_kernel(l, ResolventSign::minus, x, y) - std::conj(p)) < 1e-16);
        CHECK(std::abs(free_resolvent_kernel(l, ResolventSign::plus, y, x) - p) < 1e-16);
    }
    CHECK_THROWS_AS(free_resolvent_kernel(1.0, ResolventSign::plus, x, x), Error);
}

TEST_CASE("ball grid integrates polynomials and the volume")
{
    const auto g = small_grid();
    double vol = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        vol += g->weights[i];
        r2 += g->weights[i] * g->nodes[i].squaredNorm();
    }
    const double R = g->spec.radius;
    CHECK(vol == doctest::Approx(4.0 / 3.0 * pi * R * R * R).epsilon(1e-12));
    CHECK(r2 == doctest::Approx(4.0 / 5.0 * pi * std::pow(R, 5)).epsilon(1e-12));
    CHECK(g->volume() == doctest::Approx(vol).epsilon(1e-12));
}

TEST_CASE("weighted l1 norm is the weighted column-sum maximum")
{
    Eigen::MatrixXcd A(2, 2);
    A << 1.0, -2.0, std::complex<double>(0.0, 3.0), 0.5;
    const std::vector<double> w{1.0, 2.0};
    // column 0: (1*1 + 2*3)/1 = 7; column 1: (1*2 + 2*0.5)/2 = 1.5
    CHECK(weighted_l1_norm(A, w) == doctest::Approx(7.0));
}

TEST_CASE("V R_0^+ stays below the Kato bound for every lambda")
{
    const auto g = small_grid();
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    const double bound = kato_norm(V).value / four_pi + 2.0 * grid_tolerance(V, *g);
    for (double l : {0.0, 0.3, 1.1, 2.5, 4.0}) {
        const auto A = assemble_VR0(V, l, g);
        CHECK(A.l1_norm() <= bound + 1e-12);
    }
}

TEST_CASE("S inverse satisfies (I + V R_0) S = I")
{
    const auto g = small_grid();
    const auto V = PotentialModel::gaussian(1.0, 1.0);
    const SInverse s = invert_S(V, 0.8, g);
    CHECK_FALSE(s.near_resonance);
    CHECK(s.residual <= 1e-10);
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(g->size(), g->size());
    const auto VR = assemble_VR0(V, 0.8, g);
    CHECK(((I + VR.matrix()) * s.S.matrix() - I).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((s.S_tilde.matrix() - (s.S.matrix() - I)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("majorant dominates B for |lambda - lambda0| < delta")
{
    const auto g = small_grid();
    const auto V = PotentialModel::yukawa(0.5, 1.0);
    const BMajorant bm = build_B_majorant(V, 0.1, g);
    CHECK(bm.delta > 0.0);
    CHECK(bm.N0 == doctest::Approx(bm.delta / 2));
    const Eigen::MatrixXd maj = bm.B_major.matrix().cwiseAbs();
    for (double l0 : {0.0, 1.0, 3.0})
        for (double f : {-0.9, 0.5, 0.99}) {
            const double l = std::max(0.0, l0 + f * bm.delta);
            const Eigen::MatrixXd B = B_difference(V, l, l0, g).matrix().cwiseAbs();
            CHECK((B - maj).maxCoeff() <= 1e-12 * maj.maxCoeff());
        }
}

TEST_CASE("eps from S~ and the kernel difference bound")
{
    CHECK(eps_from_S_tilde(1.0, 2.0) == doctest::Approx(1.0 / 8.0));
    for (double l : {0.5, 2.0, 8.0}) {
        const double s = kernel_diff_sup(l);
        CHECK(s <= l / (2 * pi) + 1e-9);
        CHECK(s == doctest::Approx(l / (2 * pi)).epsilon(1e-6));
    }
}

TEST_CASE("L4/3 -> L4 ratio scales like lambda^-1/2 under dilation")
{
    const RadialLine line;
    for (double l : {2.0, 8.0}) {
        const double base = L43_L4_ratio(1.0, 0.7, 1.2, line);
        const double scaled = L43_L4_ratio(l, 0.7 / l, 1.2 / l, line);
        CHECK(scaled == doctest::Approx(base / std::sqrt(l)).epsilon(2e-2));
    }
}
