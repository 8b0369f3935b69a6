#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpk/common.hpp"
#include "lpk/multiplier.hpp"
#include "lpk/potential.hpp"

namespace lpk {

/// Uniform radial grid r_i = i h, i = 1..n, Dirichlet at r = 0 and r = R_max.
struct RadialDiscretization {
    double R_max = 40.0;
    double h = 0.02;
    int l_max = 60;

    int interior_points() const;
    void validate() const;
};

/// Symmetric tridiagonal matrix of -d^2/dr^2 + l(l+1)/r^2 + V(r) on the interior nodes.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // size n - 1
};

Tridiagonal assemble_radial_hamiltonian(int l, const RadialDiscretization& disc, const PotentialModel& V);

/// Map a 3-point-stencil eigenvalue E >= 0 to the continuum value k_eff^2, k_eff = (2/h) asin(h sqrt(E) / 2).
double dispersion_corrected(double E, double h);

struct PartialWave {
    int l = 0;
    std::vector<double> raw_eigenvalues;  // ascending, as computed
    std::vector<double> eigenvalues;      // dispersion-corrected where >= 0
    /// Orthonormal eigenvectors (columns), rows restricted to r_i <= stored_radius.
    Eigen::MatrixXd vectors;
};

struct SpectralData {
    RadialDiscretization disc;
    std::string key;  // spectral_cache_key of the inputs
    /// Partial waves l >= 1 keep eigenpairs with raw eigenvalue <= lambda_max; l = 0 is complete.
    double lambda_max = 0.0;
    double stored_radius = 0.0;
    std::vector<PartialWave> waves;
    std::vector<double> negative_eigenvalues;  // over all l, with multiplicity 2l + 1 listed once per l

    double r(int i) const { return (i + 1) * disc.h; }
    int stored_rows() const;
    std::string cache_key() const;
};

std::string spectral_cache_key(const PotentialModel& V, const RadialDiscretization& disc, double lambda_max);

/// Per-l eigen-solves (parallel over l); l = 0 complete, l >= 1 windowed to (-inf, lambda_max].
SpectralData solve_spectrum(const PotentialModel& V, const RadialDiscretization& disc, double lambda_max);

void save_spectral(const SpectralData& data, const std::string& path);
std::optional<SpectralData> load_spectral(const std::string& path, const std::string& expected_key);

using SpectralMultiplier = std::function<double(double)>;

struct OracleKernel {
    double value = 0.0;
    double l_tail = 0.0;  // magnitude of the last two partial-wave contributions
    int l_used = 0;
};

/// sum_l (2l+1)/(4 pi) P_l(cos theta) sum_k m(lambda_k) u_k(|x|) u_k(|y|) / (|x| |y| h).
/// Throws grid_refinement if the l-tail exceeds tail_tolerance times the summed magnitudes.
OracleKernel multiplier_kernel(const SpectralMultiplier& m, const Vec3& x, const Vec3& y, const SpectralData& data,
                               double tail_tolerance = 1e-3);

/// m(lambda) = chi_N(sqrt(lambda)) for lambda > 0 and 0 on negative eigenvalues.
SpectralMultiplier projection_multiplier(const MultiplierProfile& profile, double N);

/// m(lambda) = lambda^{-s/2} sum_{N in window} chi_N(sqrt(lambda)) for lambda > 0, 0 otherwise.
SpectralMultiplier sobolev_multiplier(const MultiplierProfile& profile, double s, const std::vector<double>& window);

OracleKernel sobolev_multiplier_kernel(const MultiplierProfile& profile, double s, const std::vector<double>& window,
                                       const Vec3& x, const Vec3& y, const SpectralData& data);

/// Radial functions F(x) = f(|x|) sampled at r_i (full grid, l = 0 channel).
using RadialSamples = std::vector<double>;

RadialSamples sample_radial(const std::function<double(double)>& f, const SpectralData& data);

/// m(H) F for radial F through the l = 0 eigenbasis.
RadialSamples apply_radial(const SpectralMultiplier& m, const RadialSamples& f, const SpectralData& data);

/// P_c F: removes the negative-eigenvalue components (radial F).
RadialSamples continuous_projection_apply(const RadialSamples& f, const SpectralData& data);

/// ||F||_{L^p(R^3)} by the weighted sum 4 pi sum r_i^2 |F_i|^p h; p = inf gives the node max.
double radial_lp_norm(const RadialSamples& f, const SpectralData& data, double p);

/// Free reference: (1 / 2 pi^2 rho) int_0^inf m(k^2) k sin(k rho) dk by panel Gauss on [k_lo, k_hi].
double free_radial_multiplier_kernel(const SpectralMultiplier& m, double k_lo, double k_hi, double rho);

} // namespace lpk
