#include "lpk/reference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/legendre.hpp>

namespace lpk::reference {

Eigen::MatrixXcd assemble_VR0(const PotentialModel& V, double lambda, const QuadratureGrid& grid)
{
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    if (V.is_zero()) return A;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double vi = V(grid.nodes[i]);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j)
                A(i, j) = vi * (grid.self[i] + self_cell_phase(lambda, grid.cell_radius[i]));
            else
                A(i, j) = vi * grid.weights[j] *
                          free_resolvent_kernel(lambda, ResolventSign::plus, grid.nodes[i], grid.nodes[j]);
        }
    }
    return A;
}

KernelEvaluation born_term_mc(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                              std::size_t samples, std::uint64_t stream, bool majorant)
{
    KernelEvaluation ev;
    ev.regime = ctx.config().regime;
    ev.provenance = "reference chain Monte Carlo";
    if (ctx.V().is_zero() || samples == 0) return ev;
    const ChainSampler& sampler = ctx.sampler();
    constexpr std::size_t block = 1024;
    const std::uint64_t base = mix_seed(ctx.config().seed, 0x626f726eu, stream);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b * block < samples; ++b) {
        Rng rng(mix_seed(base, static_cast<std::uint64_t>(n), b));
        double bs1 = 0.0, bs2 = 0.0;
        for (std::size_t s = 0; s < std::min(block, samples - b * block); ++s) {
            Vec3 xk = x;
            double w = 1.0, sigma = 0.0;
            for (int k = 0; k < n; ++k) {
                w *= sampler.kappa(xk);
                const Vec3 next = sampler.sample(xk, rng);
                w *= sampler.ratio(next);
                sigma += (next - xk).norm();
                xk = next;
            }
            const double last = (y - xk).norm();
            sigma += last;
            double f = last > 0.0 ? w * ctx.transform().F(N, sigma) / (four_pi * last) : 0.0;
            if (majorant) f = std::abs(f);
            bs1 += f;
            bs2 += f * f;
        }
        s1 += bs1;
        s2 += bs2;
    }
    const double mean = s1 / samples;
    const double var = std::max(0.0, s2 / samples - mean * mean);
    const double sign = (n % 2 == 0 || majorant) ? 1.0 : -1.0;
    ev.value = sign * (N / pi) * mean;
    ev.mc_stderr = N / pi * std::sqrt(var / samples);
    ev.terms = {ev.value};
    ev.term_stderr = {ev.mc_stderr};
    return ev;
}

PartialWave solve_wave_dense(int l, const RadialDiscretization& disc, const PotentialModel& V)
{
    const Tridiagonal t = assemble_radial_hamiltonian(l, disc, V);
    const auto n = static_cast<Eigen::Index>(t.diag.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        H(i, i) = t.diag[i];
        if (i + 1 < n) H(i, i + 1) = H(i + 1, i) = t.off[i];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    PartialWave pw;
    pw.l = l;
    pw.vectors = es.eigenvectors();
    for (Eigen::Index k = 0; k < n; ++k) {
        pw.raw_eigenvalues.push_back(es.eigenvalues()[k]);
        pw.eigenvalues.push_back(dispersion_corrected(es.eigenvalues()[k], disc.h));
        Eigen::Index first = 0;
        while (first < n && std::abs(pw.vectors(first, k)) <= 1e-12) ++first;
        if (first < n && pw.vectors(first, k) < 0.0) pw.vectors.col(k) *= -1.0;
    }
    return pw;
}

namespace {

// cubic Lagrange through the four nodes nearest r; node -1 is the Dirichlet point r = 0
double radial_value(const Eigen::MatrixXd& U, Eigen::Index k, double r, double h)
{
    const Eigen::Index rows = U.rows();
    const double t = r / h - 1.0;
    const Eigen::Index j0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t)) - 1, -1, rows - 4);
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        const Eigen::Index ja = j0 + a;
        const double ua = ja < 0 ? 0.0 : U(ja, k);
        double L = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) L *= (t - static_cast<double>(j0 + b)) / (a - b);
        out += L * ua;
    }
    return out;
}

} // namespace

double multiplier_kernel(const SpectralMultiplier& m, const Vec3& x, const Vec3& y, const SpectralData& data)
{
    const double rx = x.norm(), ry = y.norm();
    const double c = std::clamp(x.dot(y) / (rx * ry), -1.0, 1.0);
    const double h = data.disc.h;
    double total = 0.0;
    for (const PartialWave& w : data.waves) {
        double radial = 0.0;
        for (std::size_t k = 0; k < w.eigenvalues.size(); ++k) {
            const double mk = m(w.eigenvalues[k]);
            if (mk != 0.0) {
                const auto kk = static_cast<Eigen::Index>(k);
                radial += mk * radial_value(w.vectors, kk, rx, h) * radial_value(w.vectors, kk, ry, h);
            }
        }
        total += (2.0 * w.l + 1.0) / four_pi * boost::math::legendre_p(w.l, c) * radial / (rx * ry * h);
    }
    return total;
}

} // namespace lpk::reference
