#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lpk/common.hpp"
#include "lpk/multiplier.hpp"
#include "lpk/potential.hpp"
#include "lpk/resolvent_ops.hpp"

namespace lpk {

enum class Regime { small_potential, high_frequency, low_frequency, medium_frequency };

const char* to_string(Regime regime) noexcept;
Regime regime_from_string(const std::string& name);

struct SeriesConfig {
    Regime regime = Regime::small_potential;
    int max_n = 8;
    double term_tolerance = 1e-3;  // relative to the leading term
    std::size_t mc_samples = 20000;
    std::uint64_t seed = 1;
    /// Decay order used by envelopes and truncation bounds.
    int m = 3;
    double N0 = 0.0;
    double N1 = std::numeric_limits<double>::infinity();
    std::shared_ptr<const QuadratureGrid> grid;
    /// Gauss nodes on [N/2, 2N] (low) or per partition piece (medium).
    int lambda_nodes = 24;
    /// Partition width for the medium regime; defaults to the majorant's delta.
    std::optional<double> delta;
    int max_partition_pieces = 64;

    void validate() const;
};

struct KernelEvaluation {
    double value = 0.0;
    std::vector<double> terms;
    std::vector<double> term_stderr;
    double mc_stderr = 0.0;
    double truncation_bound = 0.0;
    double imag_residue = 0.0;
    Regime regime = Regime::small_potential;
    std::string provenance;
};

/// P_N(x, y) = N F_N(rho) / (4 pi^2 rho), with the limit N^3 int u^2 chi / (2 pi^2) at rho = 0.
double free_LP_kernel(const OddProfileTransform& transform, double N, const Vec3& x, const Vec3& y);

/// Potential, multiplier transform, chain sampler and Kato data shared by Born-series evaluations.
class SeriesContext {
public:
    SeriesContext(PotentialModel V, MultiplierProfile profile, SeriesConfig config);

    const PotentialModel& V() const { return V_; }
    const OddProfileTransform& transform() const { return *transform_; }
    const ChainSampler& sampler() const { return sampler_; }
    const SeriesConfig& config() const { return config_; }
    SeriesConfig& config() { return config_; }
    double kato() const { return kato_; }
    /// ||V||_K / 4 pi
    double q() const { return kato_ / four_pi; }
    /// ||chi||_{W^{m,1}} for the configured m.
    double chi_norm() const { return chi_norm_; }

    /// N^3 ||chi||_{W^{m,1}} / <N rho>^{m+1}
    double envelope(double N, double rho) const;

private:
    PotentialModel V_;
    std::shared_ptr<const OddProfileTransform> transform_;
    ChainSampler sampler_;
    SeriesConfig config_;
    double kato_ = 0.0;
    double chi_norm_ = 0.0;
};

/// Radial-in-s weight W(s) = int_{-1}^{1} d tau int_0^{2 pi} d phi V(x_1) in prolate spheroidal coordinates
/// with foci x, y (s = |x - x_1| + |x_1 - y|, t = d tau). Then
///   P_N^1(x, y) = -(N / 32 pi^3) int_d^inf F_N(s) W(s) ds.
class SpheroidalShell {
public:
    SpheroidalShell(const PotentialModel& V, const Vec3& x, const Vec3& y, double tol = 1e-8, int n_phi = 48);
    double operator()(double s) const;
    double focal_distance() const { return d_; }
    double s_max() const { return s_max_; }
    /// s values where W is not smooth (V breakpoints and the origin's focal sum).
    std::vector<double> breakpoints() const;

private:
    Vec3 x_, axis_, u_, v_;
    double d_ = 0.0;
    double s_max_ = 0.0;
    double tol_;
    int n_phi_;
    PotentialModel V_;
};

/// Single Born term P_N^n(x, y). n = 0 is free_LP_kernel, n = 1 the spheroidal quadrature, n >= 2 chain MC.
/// Throws budget_exceeded (message carries the partial value) when mc_stderr > term_tolerance * |value|.
KernelEvaluation born_term(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx);

/// Same term by chain Monte Carlo for any n >= 1 (deterministic n = 1 cross-check). With `majorant` the
/// estimator averages |integrand| instead: (N / pi) int prod |V| |F_N(sigma_n)| / prod 4 pi |x_k - x_{k+1}|.
KernelEvaluation born_term_mc(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                              std::size_t samples, std::uint64_t stream = 0, bool majorant = false);

/// Sum of born_term for n <= max_n; requires ||V||_K < 4 pi unless the context is in the high regime.
KernelEvaluation sum_small_potential(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx);

/// sum_{n > M} (n + 1) q^n
double born_tail_weight(double q, int M);

/// The n = 1 term with the lambda integral taken last (bipolar cubature in x_1),
/// -(N / pi) int phi_N(lambda) Im[R_0^+ V R_0^+](x, y) d lambda.
double born_term1_lambda_first(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                               int lambda_nodes = 96);

/// Resolvent data for the resummed (low / medium frequency) series on a Nystrom grid.
class ResummedSeries {
public:
    ResummedSeries(PotentialModel V, MultiplierProfile profile, std::shared_ptr<const QuadratureGrid> grid);

    const PotentialModel& V() const { return V_; }
    const QuadratureGrid& grid() const { return *grid_; }
    const std::shared_ptr<const QuadratureGrid>& grid_ptr() const { return grid_; }
    const OddProfileTransform& transform() const { return *transform_; }
    const std::vector<double>& potential_samples() const { return v_; }

    /// Cached S_{lambda0}.
    const SInverse& S(double lambda0);
    /// V R_0^+(lambda^2) on the grid (uncached).
    DiscretizedOperator VR0(double lambda) const;

    /// V(x_i) e^{i lambda |x_i - y|} / (4 pi |x_i - y|) at grid nodes; the self cell of a node y uses the grid's
    /// self term divided by w_y.
    Eigen::VectorXcd VR0_column(double lambda, const Vec3& y) const;
    /// Columns of S~_{lambda0}(., y) and (B_{lambda,lambda0})(., y) as grid functions (no delta part).
    Eigen::VectorXcd S_tilde_column(double lambda0, const Vec3& y);

    /// int w_i g(x_i) / |x - x_i| with the cell-averaged singular term when x is inside a node's cell.
    double coulomb_weight(const Vec3& x, std::size_t i) const;

    /// {S_{lambda0} (B_{lambda,lambda0} S_{lambda0})^n}(x_1, y) at the grid nodes, for n >= 1,
    /// and S~_{lambda0}(x_1, y) for n = 0.
    std::vector<Eigen::VectorXcd> chain_columns(int n_max, double lambda, double lambda0, const Vec3& y);

private:
    PotentialModel V_;
    std::shared_ptr<const QuadratureGrid> grid_;
    std::shared_ptr<const OddProfileTransform> transform_;
    std::vector<double> v_;
    std::map<double, SInverse> cache_;
};

/// Contribution of order n to P_N - P_N in the low regime (N <= N0), expansion center 0.
KernelEvaluation lowfreq_term(int n, double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                              const SeriesConfig& config);

/// Same for the medium regime: sum over partition pieces with centers lambda_j = j delta.
KernelEvaluation medfreq_term(int n, double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                              const SeriesConfig& config);

/// All orders n <= max_n of the low (or medium) series at once; terms[n] are the per-order contributions.
KernelEvaluation resummed_difference(double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                                     const SeriesConfig& config);

/// n = 0 low-frequency term computed at operator level: (N / pi) int phi_N Im[R_0^+ S~_0](x, y) d lambda
/// with the complex product formed before the imaginary part.
double lowfreq_term0_operator_level(double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                                    int lambda_nodes = 48);

/// Full kernel P_N(x, y) by regime.
KernelEvaluation projection_kernel(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                                   ResummedSeries* series = nullptr);

} // namespace lpk
