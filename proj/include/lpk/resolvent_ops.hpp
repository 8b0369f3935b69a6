#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpk/common.hpp"
#include "lpk/potential.hpp"

namespace lpk {

enum class ResolventSign { plus, minus };

/// e^{+- i lambda |x - y|} / (4 pi |x - y|); throws diagonal_singularity at x = y.
std::complex<double> free_resolvent_kernel(double lambda, ResolventSign sign, const Vec3& x, const Vec3& y);

/// Ball grid: radial Gauss panels (geometric edges R 2^{-k}, plus breakpoints) times a product
/// angular rule (Gauss in cos theta, trapezoid in phi).
struct GridSpec {
    double radius = 4.0;
    int panels = 4;         // geometric radial panels
    int per_panel = 4;      // Gauss nodes per radial panel
    int n_theta = 6;
    int n_phi = 12;
    std::vector<double> breakpoints;
};

struct QuadratureGrid {
    GridSpec spec;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    /// Self term: exact int_{ball} dy / (4 pi |x_i - y|) minus the off-diagonal row sum.
    std::vector<double> self;
    /// Radius of the ball with volume w_i (local cell model for the lambda-dependent diagonal).
    std::vector<double> cell_radius;
    /// Largest angular/radial spacing; kernels oscillating faster than pi / spacing are unresolved.
    double max_spacing = 0.0;

    std::size_t size() const { return nodes.size(); }
    double volume() const;
    double resolution_lambda() const { return pi / max_spacing; }
    std::string describe() const;
};

QuadratureGrid make_ball_grid(const GridSpec& spec);

/// Value-representation Nystrom matrix A_ij = K(x_i, x_j) w_j of an integral operator.
class DiscretizedOperator {
public:
    DiscretizedOperator() = default;
    DiscretizedOperator(Eigen::MatrixXcd matrix, std::shared_ptr<const QuadratureGrid> grid, std::string label);

    static DiscretizedOperator identity(std::shared_ptr<const QuadratureGrid> grid);
    static DiscretizedOperator zero(std::shared_ptr<const QuadratureGrid> grid, std::string label = "0");

    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    const std::shared_ptr<const QuadratureGrid>& grid() const { return grid_; }
    const std::string& label() const { return label_; }

    /// max_j sum_i w_i |A_ij| / w_j: the L^1 -> L^1 norm on the weighted counting measure.
    double l1_norm() const { return l1_norm_; }
    /// Weighted column sums (the discrete x-integral of |K(x, y_j)|).
    Eigen::VectorXd column_sums() const;

    DiscretizedOperator operator*(const DiscretizedOperator& rhs) const;
    DiscretizedOperator operator+(const DiscretizedOperator& rhs) const;
    DiscretizedOperator operator-(const DiscretizedOperator& rhs) const;
    DiscretizedOperator scaled(std::complex<double> c) const;
    /// Entrywise |A_ij| (the operator with kernel |K|).
    DiscretizedOperator abs() const;

private:
    Eigen::MatrixXcd matrix_;
    std::shared_ptr<const QuadratureGrid> grid_;
    std::string label_;
    double l1_norm_ = 0.0;
};

double weighted_l1_norm(const Eigen::MatrixXcd& A, const std::vector<double>& w);

/// int_0^a (e^{i lambda r} - 1) r dr: the lambda-dependent part of the self cell of e^{i lambda r}/(4 pi r).
std::complex<double> self_cell_phase(double lambda, double a);

/// V(x_i) at the grid nodes.
std::vector<double> sample_potential(const PotentialModel& V, const QuadratureGrid& grid);

/// Column-sum accuracy of the grid for |V| at lambda = 0: max_j |colsum_j - kappa(x_j)|, with kappa
/// the exact Kato function of V restricted to the grid ball.
double grid_tolerance(const PotentialModel& V, const QuadratureGrid& grid);

struct AssembleOptions {
    /// Flag grid_refinement when l1_norm exceeds ||V||_K / 4 pi + 2 grid_tolerance + slack.
    bool check_kato_bound = true;
    double slack = 1e-9;
};

/// Nystrom matrix of V R_0^+(lambda^2).
DiscretizedOperator assemble_VR0(const PotentialModel& V, double lambda, std::shared_ptr<const QuadratureGrid> grid,
                                 const AssembleOptions& options = {});

struct SInverse {
    DiscretizedOperator S;
    DiscretizedOperator S_tilde;
    double condition = 1.0;
    double residual = 0.0;
    bool near_resonance = false;
    double lambda = 0.0;
};

inline constexpr double near_resonance_threshold = 1e10;

/// S = (I + V R_0^+(lambda^2))^{-1} by LU; S_tilde = S - I.
SInverse invert_S(const PotentialModel& V, double lambda, std::shared_ptr<const QuadratureGrid> grid);
SInverse invert_S(const DiscretizedOperator& VR0, double lambda);

struct STildeBound {
    double value = 0.0;
    std::vector<double> lambdas;
    std::vector<double> norms;
    double max_residual = 0.0;
    double max_condition = 1.0;
};

/// max over samples of l1_norm(S_tilde_lambda). Throws near_resonance if any sample is flagged.
STildeBound uniform_S_tilde_bound(const PotentialModel& V, const std::vector<double>& lambdas,
                                  std::shared_ptr<const QuadratureGrid> grid);

/// V R_0^+(lambda^2) - V R_0^+(lambda0^2)
DiscretizedOperator B_difference(const PotentialModel& V, double lambda, double lambda0,
                                 std::shared_ptr<const QuadratureGrid> grid);

struct BMajorant {
    DiscretizedOperator B_major;
    double delta = 0.0;  // dyadic, <= eps / ||V_eps||_1
    double N0 = 0.0;     // delta / 2
    double eps = 0.0;
    double V_eps_l1 = 0.0;
    K0Truncation truncation;
};

/// Majorant kernel (|V_eps(x)| delta / 4 pi + |(V - V_eps)(x)| / (2 pi |x - y|)) w_y with the matching
/// self-cell terms, so that |B_{lambda,lambda0}| <= B_major entrywise whenever |lambda - lambda0| < delta.
BMajorant build_B_majorant(const PotentialModel& V, double eps, std::shared_ptr<const QuadratureGrid> grid);

/// eps = 1 / ((S_tilde + 1)^2 ||V||_K)
double eps_from_S_tilde(double S_tilde, double kato);

/// sup_{rho > 0} |sin(lambda rho)| / (2 pi rho) by a log-spaced scan; asserts <= lambda / (2 pi).
double kernel_diff_sup(double lambda);

/// Radial discretization for the L^{4/3} -> L^4 estimate.
struct RadialLine {
    int cells = 400;
};

/// Lower bound for ||R_0^+(lambda^2)||_{L^{4/3} -> L^4} over radial bumps exp(-(|x| - s0)^2 / w^2).
/// Widths range over [0.05, 20] / <lambda>; trials random (w, s0) draws, then local refinement.
double estimate_L43_L4_norm(double lambda, const RadialLine& line, int trials, std::uint64_t seed = 1);

/// ||R_0^+(lambda^2) f||_4 / ||f||_{4/3} for one radial bump.
double L43_L4_ratio(double lambda, double width, double center, const RadialLine& line);

struct N1Search {
    bool found = false;
    double N1 = 0.0;
    double eps = 0.0;
    std::vector<double> N;
    std::vector<double> max_norm_sq;   // max over tested lambda in [N/2, 2N] of l1_norm((V R_0^+)^2)
    std::vector<double> max_norm;      // same for the single factor
    bool resolution_limited = false;   // the scan stopped at the grid resolution
    std::string message;
};

/// Least dyadic N1 with l1_norm((V R_0^+(lambda^2))^2) <= eps^2 at every tested lambda in [N/2, 2N]
/// for all scanned N >= N1. Scans N = N_min, 2 N_min, ... up to 2^15 or the grid resolution.
N1Search find_N1(const PotentialModel& V, double eps, std::shared_ptr<const QuadratureGrid> grid,
                 double N_min = 0.25, int lambdas_per_band = 3);

} // namespace lpk
