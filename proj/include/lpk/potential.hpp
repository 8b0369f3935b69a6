#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpk/common.hpp"

namespace lpk {

enum class PotentialKind { zero, radial_analytic, radial_tabulated, general };

/// Evaluable potential V on R^3 (energy units, length^-2).
///
/// Radial potentials carry a profile v(r); every potential carries a radial envelope
/// env(r) >= sup_{|x| = r} |V(x)|, which drives importance sampling of chain integrals.
class PotentialModel {
public:
    PotentialModel();

    static PotentialModel zero();
    /// amplitude * 1_{|x| <= radius}
    static PotentialModel ball(double amplitude, double radius = 1.0);
    /// amplitude * exp(-|x|^2 / width^2)
    static PotentialModel gaussian(double amplitude, double width = 1.0);
    /// amplitude * exp(-|x| / range) / |x|
    static PotentialModel yukawa(double amplitude, double range = 1.0);
    /// amplitude * exp(1 - 1 / (1 - (|x|/radius)^2)) inside the ball, 0 outside
    static PotentialModel smooth_bump(double amplitude, double radius = 1.0);
    /// Piecewise-linear profile through (r_i, v_i), zero beyond the last node.
    static PotentialModel radial_tabulated(std::vector<double> r, std::vector<double> v);
    /// Non-radial V with a user-supplied radial envelope and extent.
    static PotentialModel general(std::string name, std::function<double(const Vec3&)> f,
                                  std::function<double(double)> envelope, double extent,
                                  std::optional<double> support_radius = std::nullopt);

    PotentialKind kind() const;
    const std::string& name() const;
    /// Canonical description, stable across runs (used for cache keys and reports).
    const std::string& signature() const;

    double operator()(const Vec3& x) const;
    /// v(r); only valid for radial potentials.
    double radial_value(double r) const;
    double envelope(double r) const;

    bool radial() const;
    bool is_zero() const;
    std::optional<double> support_radius() const;
    /// Radius beyond which |V| is negligible (or zero).
    double extent() const;
    /// Radii where the profile is not smooth (discontinuities, support edges).
    std::vector<double> breakpoints() const;
    /// True when |v| is nonincreasing in r (radial only).
    bool abs_nonincreasing() const;
    /// sup |V| if bounded, nullopt otherwise.
    std::optional<double> sup_abs() const;

    PotentialModel scaled(double c) const;
    PotentialModel operator+(const PotentialModel& other) const;
    /// V * 1_{|x| <= R} * 1_{|V| <= M}
    PotentialModel truncated(double R, double M) const;
    /// V - other, with metadata merged.
    PotentialModel operator-(const PotentialModel& other) const;

    /// (V_+, V_-) with V = V_+ - V_-.
    std::pair<PotentialModel, PotentialModel> sign_split() const;

    struct Impl;

private:
    explicit PotentialModel(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

struct KatoNormEstimate {
    enum class Method { closed_form, numeric_sup };
    double value = 0.0;
    Method method = Method::closed_form;
    std::size_t candidate_centers = 0;
    double quadrature_error = 0.0;
    Vec3 argmax = Vec3::Zero();
};

/// int |V(y)| / |x - y| dy at a single center, by spherical coordinates about x (radial V uses
/// the shell theorem instead).
double kato_integral(const PotentialModel& V, const Vec3& x, double tol, double* error = nullptr);

/// Same integral by spherical coordinates about x for any V (the integrand r |V| is bounded).
double kato_integral_spherical(const PotentialModel& V, const Vec3& x, double tol, double* error = nullptr);

/// sup over centers of int |V(y)| / |x - y| dy. With no centers given, radial potentials are
/// evaluated at the origin (the shell-theorem Kato function is nonincreasing in |x|), other
/// potentials on a 5^3 lattice refined by compass search. numeric_sup values are lower bounds.
KatoNormEstimate kato_norm(const PotentialModel& V, std::span<const Vec3> centers = {}, double tol = 1e-10);

struct K0Truncation {
    PotentialModel truncated;
    double tail = 0.0;
    double radius = 0.0;
    double clip = 0.0;
};

/// V_eps = V 1_{|x| <= R} 1_{|V| <= M} with kato_norm(V - V_eps) <= eps.
K0Truncation truncate_to_K0(const PotentialModel& V, double eps);

/// Cumulative radial integrals of a nonnegative profile p(r):
///   A(r) = int_0^r s^2 p(s) ds,  B(r) = int_r^inf s p(s) ds,
/// so that int p(|y|) / (4 pi |x - y|) dy = A(|x|)/|x| + B(|x|)  (shell theorem).
class RadialTables {
public:
    RadialTables() = default;
    RadialTables(std::function<double(double)> profile, double extent, std::vector<double> breakpoints,
                 int cells = 8192);

    /// kappa(a) = A(a)/a + B(a) = int p(|y|) / (4 pi |x - y|) dy at |x| = a.
    double kappa(double a) const;
    double A(double r) const;
    double B(double r) const;
    double A_total() const { return a_cum_.empty() ? 0.0 : a_cum_.back(); }
    /// int p(|y|) dy = 4 pi A(inf)
    double l1_norm() const { return four_pi * A_total(); }

    const std::vector<double>& nodes() const { return r_; }

    /// Inverse of A on [0, a] / of B on [a, inf) by cell search + linear interpolation.
    double invert_A(double target) const;
    double invert_B(double target) const;

    /// g(r_i) = A_f(r_i)/r_i + B_f(r_i) with f interpolated linearly between nodes.
    std::vector<double> apply_kato(std::span<const double> f) const;

    bool empty() const { return r_.empty(); }

private:
    double partial_cell(std::size_t cell, double r, bool weight_r2) const;
    std::function<double(double)> profile_;
    std::vector<double> r_;
    std::vector<double> a_cum_;
    std::vector<double> b_cum_;
};

/// Counter-based seeding: independent streams from (seed, stream ids).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

/// Samples y from the density env(|y|) / (4 pi |x - y|) / kappa_env(x): the measure the iterated
/// Kato integrals of the chain expansion integrate against.
class ChainSampler {
public:
    ChainSampler() = default;
    explicit ChainSampler(const PotentialModel& V);

    double kappa(const Vec3& x) const { return tables_.kappa(x.norm()); }
    Vec3 sample(const Vec3& x, Rng& rng) const;
    /// V(y) / env(|y|), the signed correction weight (= sign V for radial potentials).
    double ratio(const Vec3& y) const;
    const RadialTables& tables() const { return tables_; }
    bool empty() const { return tables_.empty(); }

private:
    PotentialModel V_;
    RadialTables tables_;
};

struct ChainIntegralResult {
    int n = 0;
    double value = 0.0;     // deterministic sup over centers (radial iteration)
    double mc_value = 0.0;  // Monte Carlo estimate at the maximizing center
    double mc_stderr = 0.0;
    double bound = 0.0;     // (||V||_K / 4 pi)^n
    Vec3 center = Vec3::Zero();
};

/// sup_{x0} int prod |V(x_k)| / prod 4 pi |x_{k-1} - x_k| dx_1..dx_n, checked against
/// (||V||_K / 4 pi)^n (1 + tolerance). Throws invariant_violation if the bound fails.
ChainIntegralResult chain_integral_bound(const PotentialModel& V, int n, std::size_t samples,
                                         std::uint64_t seed = 1, double tolerance = 0.05);

} // namespace lpk
