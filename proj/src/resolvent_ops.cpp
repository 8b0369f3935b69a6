#include "lpk/resolvent_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lpk/quadrature.hpp"

namespace lpk {

using cd = std::complex<double>;

namespace {

// |V| restricted to the grid ball, as a radial profile (radial V only).
RadialTables restricted_tables(const PotentialModel& V, double R)
{
    auto bp = V.breakpoints();
    bp.push_back(R);
    const double top = std::min(V.extent(), R);
    return RadialTables([V, R](double r) { return r <= R ? std::abs(V.radial_value(r)) : 0.0; }, top, bp, 8192);
}

} // namespace

std::complex<double> free_resolvent_kernel(double lambda, ResolventSign sign, const Vec3& x, const Vec3& y)
{
    const double r = (x - y).norm();
    if (r == 0.0)
        throw Error(ErrorKind::diagonal_singularity,
                    "free resolvent kernel evaluated on the diagonal; use the grid's self-cell term");
    const double s = sign == ResolventSign::plus ? 1.0 : -1.0;
    return std::polar(1.0 / (four_pi * r), s * lambda * r);
}

// ---------------------------------------------------------------------------

double QuadratureGrid::volume() const
{
    double v = 0.0;
    for (double w : weights) v += w;
    return v;
}

std::string QuadratureGrid::describe() const
{
    std::ostringstream os;
    os << "ball(R=" << spec.radius << ", panels=" << spec.panels << "x" << spec.per_panel
       << ", angular=" << spec.n_theta << "x" << spec.n_phi << ", nodes=" << nodes.size() << ")";
    return os.str();
}

QuadratureGrid make_ball_grid(const GridSpec& spec)
{
    if (!(spec.radius > 0.0) || spec.panels < 1 || spec.per_panel < 1 || spec.n_theta < 1 || spec.n_phi < 1)
        throw Error(ErrorKind::invalid_argument, "grid spec needs positive radius and counts");
    QuadratureGrid g;
    g.spec = spec;
    const double R = spec.radius;

    std::vector<double> edges{0.0};
    for (int k = spec.panels - 1; k >= 0; --k) edges.push_back(std::ldexp(R, -k));
    for (double b : spec.breakpoints)
        if (b > 0.0 && b < R) edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                edges.end());
    const PanelRule radial = composite_gauss(std::span<const double>(edges), 1, spec.per_panel);

    const GaussRule& gt = gauss_legendre(spec.n_theta);
    const double dphi = 2.0 * pi / spec.n_phi;
    for (std::size_t s = 0; s < radial.nodes.size(); ++s) {
        const double r = radial.nodes[s];
        for (int i = 0; i < spec.n_theta; ++i) {
            const double ct = gt.nodes[i], st = std::sqrt(1.0 - ct * ct);
            // stagger alternate shells so nodes on neighbouring shells do not align radially
            const double offset = 0.5 * dphi * static_cast<double>((s + i) % 2);
            for (int k = 0; k < spec.n_phi; ++k) {
                const double ph = offset + dphi * k;
                g.nodes.push_back(r * Vec3(st * std::cos(ph), st * std::sin(ph), ct));
                g.weights.push_back(radial.weights[s] * r * r * gt.weights[i] * dphi);
            }
        }
    }

    const std::size_t n = g.nodes.size();
    g.self.assign(n, 0.0);
    g.cell_radius.assign(n, 0.0);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (g.nodes[i] - g.nodes[j]).norm();
            row += g.weights[j] / (four_pi * d);
            nearest[i] = std::min(nearest[i], d);
        }
        const double exact = (3.0 * R * R - g.nodes[i].squaredNorm()) / 6.0;
        g.self[i] = exact - row;
        g.cell_radius[i] = std::cbrt(3.0 * g.weights[i] / four_pi);
    }
    for (std::size_t i = 0; i < n; ++i) g.max_spacing = std::max(g.max_spacing, nearest[i]);
    return g;
}

// ---------------------------------------------------------------------------

double weighted_l1_norm(const Eigen::MatrixXcd& A, const std::vector<double>& w)
{
    double best = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < A.rows(); ++i) s += w[i] * std::abs(A(i, j));
        best = std::max(best, s / w[j]);
    }
    return best;
}

DiscretizedOperator::DiscretizedOperator(Eigen::MatrixXcd matrix, std::shared_ptr<const QuadratureGrid> grid,
                                         std::string label)
    : matrix_(std::move(matrix)), grid_(std::move(grid)), label_(std::move(label))
{
    if (!grid_ || matrix_.rows() != static_cast<Eigen::Index>(grid_->size()) || matrix_.cols() != matrix_.rows())
        throw Error(ErrorKind::invalid_argument, "operator matrix does not match its grid");
    l1_norm_ = weighted_l1_norm(matrix_, grid_->weights);
}

DiscretizedOperator DiscretizedOperator::identity(std::shared_ptr<const QuadratureGrid> grid)
{
    const auto n = static_cast<Eigen::Index>(grid->size());
    return DiscretizedOperator(Eigen::MatrixXcd::Identity(n, n), std::move(grid), "I");
}

DiscretizedOperator DiscretizedOperator::zero(std::shared_ptr<const QuadratureGrid> grid, std::string label)
{
    const auto n = static_cast<Eigen::Index>(grid->size());
    return DiscretizedOperator(Eigen::MatrixXcd::Zero(n, n), std::move(grid), std::move(label));
}

Eigen::VectorXd DiscretizedOperator::column_sums() const
{
    const auto& w = grid_->weights;
    Eigen::VectorXd out(matrix_.cols());
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < matrix_.rows(); ++i) s += w[i] * std::abs(matrix_(i, j));
        out[j] = s / w[j];
    }
    return out;
}

DiscretizedOperator DiscretizedOperator::operator*(const DiscretizedOperator& rhs) const
{
    if (grid_ != rhs.grid_) throw Error(ErrorKind::invalid_argument, "composing operators on different grids");
    return DiscretizedOperator(matrix_ * rhs.matrix_, grid_, "(" + label_ + ")(" + rhs.label_ + ")");
}

DiscretizedOperator DiscretizedOperator::operator+(const DiscretizedOperator& rhs) const
{
    if (grid_ != rhs.grid_) throw Error(ErrorKind::invalid_argument, "adding operators on different grids");
    return DiscretizedOperator(matrix_ + rhs.matrix_, grid_, label_ + "+" + rhs.label_);
}

DiscretizedOperator DiscretizedOperator::operator-(const DiscretizedOperator& rhs) const
{
    if (grid_ != rhs.grid_) throw Error(ErrorKind::invalid_argument, "subtracting operators on different grids");
    return DiscretizedOperator(matrix_ - rhs.matrix_, grid_, label_ + "-" + rhs.label_);
}

DiscretizedOperator DiscretizedOperator::scaled(std::complex<double> c) const
{
    return DiscretizedOperator(c * matrix_, grid_, label_);
}

DiscretizedOperator DiscretizedOperator::abs() const
{
    return DiscretizedOperator(matrix_.cwiseAbs().cast<cd>(), grid_, "|" + label_ + "|");
}

// ---------------------------------------------------------------------------

std::complex<double> self_cell_phase(double lambda, double a)
{
    const double t = lambda * a;
    if (std::abs(t) < 1e-3) {
        // series of int_0^a (e^{i lambda r} - 1) r dr
        const cd it(0.0, t);
        return a * a * (it / 3.0 + it * it / 8.0 + it * it * it / 30.0);
    }
    const cd e = std::polar(1.0, t);
    const cd i(0.0, 1.0);
    const double l2 = lambda * lambda;
    return e * (a / (i * lambda) + 1.0 / l2) - 1.0 / l2 - 0.5 * a * a;
}

std::vector<double> sample_potential(const PotentialModel& V, const QuadratureGrid& grid)
{
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = V(grid.nodes[i]);
    return v;
}

double grid_tolerance(const PotentialModel& V, const QuadratureGrid& grid)
{
    if (V.is_zero()) return 0.0;
    const auto v = sample_potential(V, grid);
    const std::size_t n = grid.size();
    std::vector<double> kappa(n);
    if (V.radial()) {
        const RadialTables tab = restricted_tables(V, grid.spec.radius);
        for (std::size_t j = 0; j < n; ++j) kappa[j] = tab.kappa(grid.nodes[j].norm());
    } else {
        const double R = grid.spec.radius;
        const auto Vr = PotentialModel::general(
            V.name() + "_grid", [V, R](const Vec3& x) { return x.norm() <= R ? V(x) : 0.0; },
            [V, R](double r) { return r <= R ? V.envelope(r) : 0.0; }, std::min(V.extent(), R), R);
        for (std::size_t j = 0; j < n; ++j) kappa[j] = kato_integral(Vr, grid.nodes[j], 1e-8) / four_pi;
    }
    std::vector<double> err(n, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
        double s = std::abs(v[j]) * std::abs(grid.self[j]);
        for (std::size_t i = 0; i < n; ++i)
            if (i != j) s += grid.weights[i] * std::abs(v[i]) / (four_pi * (grid.nodes[i] - grid.nodes[j]).norm());
        err[j] = std::abs(s - kappa[j]);
    }
    return *std::max_element(err.begin(), err.end());
}

DiscretizedOperator assemble_VR0(const PotentialModel& V, double lambda, std::shared_ptr<const QuadratureGrid> grid,
                                 const AssembleOptions& options)
{
    const std::size_t n = grid->size();
    std::ostringstream label;
    label << "VR0(" << lambda << ")";
    if (V.is_zero()) return DiscretizedOperator::zero(grid, label.str());
    const auto v = sample_potential(V, *grid);
    Eigen::MatrixXcd A(n, n);
#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3& y = grid->nodes[j];
        const double wj = grid->weights[j];
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) {
                A(i, j) = v[i] * (grid->self[i] + self_cell_phase(lambda, grid->cell_radius[i]));
                continue;
            }
            const double r = (grid->nodes[i] - y).norm();
            A(i, j) = v[i] * wj * std::polar(1.0 / (four_pi * r), lambda * r);
        }
    }
    DiscretizedOperator op(std::move(A), grid, label.str());
    if (options.check_kato_bound) {
        const double bound = kato_norm(V).value / four_pi;
        if (op.l1_norm() > bound + options.slack) {
            const double tol = grid_tolerance(V, *grid);
            if (op.l1_norm() > bound + 2.0 * tol + options.slack) {
                std::ostringstream msg;
                msg << "discrete ||V R0(" << lambda << ")||_L1 = " << op.l1_norm() << " exceeds ||V||_K/4pi = " << bound
                    << " by more than twice the grid tolerance " << tol << "; refine the grid";
                throw Error(ErrorKind::grid_refinement, msg.str());
            }
        }
    }
    return op;
}

// ---------------------------------------------------------------------------

SInverse invert_S(const DiscretizedOperator& VR0, double lambda)
{
    const auto& grid = VR0.grid();
    const auto I = DiscretizedOperator::identity(grid);
    SInverse out;
    out.lambda = lambda;
    const Eigen::MatrixXcd M = I.matrix() + VR0.matrix();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::MatrixXcd S = lu.inverse();
    // condition in the same weighted L^1 norm the rest of the module uses
    const double cond = weighted_l1_norm(M, grid->weights) * weighted_l1_norm(S, grid->weights);
    out.condition = std::isfinite(cond) ? cond : std::numeric_limits<double>::infinity();
    out.near_resonance = !(out.condition <= near_resonance_threshold);
    out.residual = weighted_l1_norm(M * S - I.matrix(), grid->weights);
    std::ostringstream l;
    l << "S(" << lambda << ")";
    out.S_tilde = DiscretizedOperator(S - I.matrix(), grid, "~" + l.str());
    out.S = DiscretizedOperator(std::move(S), grid, l.str());
    return out;
}

SInverse invert_S(const PotentialModel& V, double lambda, std::shared_ptr<const QuadratureGrid> grid)
{
    return invert_S(assemble_VR0(V, lambda, std::move(grid)), lambda);
}

STildeBound uniform_S_tilde_bound(const PotentialModel& V, const std::vector<double>& lambdas,
                                  std::shared_ptr<const QuadratureGrid> grid)
{
    STildeBound out;
    out.lambdas = lambdas;
    out.norms.assign(lambdas.size(), 0.0);
    if (V.is_zero()) return out;
    std::vector<double> residual(lambdas.size()), condition(lambdas.size());
    std::vector<char> flagged(lambdas.size(), 0);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const SInverse s = invert_S(V, lambdas[k], grid);
        out.norms[k] = s.S_tilde.l1_norm();
        residual[k] = s.residual;
        condition[k] = s.condition;
        flagged[k] = s.near_resonance;
    }
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (flagged[k]) {
            std::ostringstream msg;
            msg << "I + V R0 nearly singular at lambda = " << lambdas[k] << " (condition " << condition[k]
                << "); eigenvalue or resonance near lambda^2 = " << lambdas[k] * lambdas[k];
            throw Error(ErrorKind::near_resonance, msg.str());
        }
        out.value = std::max(out.value, out.norms[k]);
        out.max_residual = std::max(out.max_residual, residual[k]);
        out.max_condition = std::max(out.max_condition, condition[k]);
    }
    return out;
}

DiscretizedOperator B_difference(const PotentialModel& V, double lambda, double lambda0,
                                 std::shared_ptr<const QuadratureGrid> grid)
{
    AssembleOptions opt;
    opt.check_kato_bound = false;
    const auto a = assemble_VR0(V, lambda, grid, opt);
    const auto b = assemble_VR0(V, lambda0, grid, opt);
    std::ostringstream l;
    l << "B(" << lambda << "," << lambda0 << ")";
    return DiscretizedOperator(a.matrix() - b.matrix(), grid, l.str());
}

double eps_from_S_tilde(double S_tilde, double kato)
{
    if (!(kato > 0.0)) throw Error(ErrorKind::invalid_argument, "eps undefined for a zero potential");
    return 1.0 / ((S_tilde + 1.0) * (S_tilde + 1.0) * kato);
}

BMajorant build_B_majorant(const PotentialModel& V, double eps, std::shared_ptr<const QuadratureGrid> grid)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "majorant needs eps > 0");
    BMajorant out;
    out.eps = eps;
    if (V.is_zero()) {
        out.B_major = DiscretizedOperator::zero(grid, "Bmaj");
        out.delta = 1.0;
        out.N0 = 0.5;
        out.truncation.truncated = V;
        return out;
    }
    out.truncation = truncate_to_K0(V, eps);
    const PotentialModel& Ve = out.truncation.truncated;
    if (Ve.radial()) {
        auto bp = Ve.breakpoints();
        double err = 0.0;
        const double top = Ve.support_radius().value_or(Ve.extent());
        std::vector<double> pts{0.0};
        for (double b : bp)
            if (b > 0.0 && b < top) pts.push_back(b);
        pts.push_back(top);
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k)
            s += integrate_adaptive([&](double r) { return r * r * std::abs(Ve.radial_value(r)); }, pts[k], pts[k + 1],
                                    1e-12, &err);
        out.V_eps_l1 = four_pi * s;
    } else {
        for (std::size_t i = 0; i < grid->size(); ++i) out.V_eps_l1 += grid->weights[i] * std::abs(Ve(grid->nodes[i]));
    }
    const double raw = out.V_eps_l1 > 0.0 ? eps / out.V_eps_l1 : 1.0;
    out.delta = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(raw))));

    const std::size_t n = grid->size();
    std::vector<double> ve(n), rest(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = V(grid->nodes[i]);
        ve[i] = std::abs(Ve(grid->nodes[i]));
        rest[i] = std::abs(v - Ve(grid->nodes[i]));
    }
    for (int attempt = 0; attempt < 12; ++attempt) {
        const double delta = out.delta;
        Eigen::MatrixXcd M(n, n);
#pragma omp parallel for schedule(static)
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i == j) {
                    const double a = grid->cell_radius[i];
                    M(i, j) = ve[i] * delta * a * a * a / 3.0 + rest[i] * a * a;
                    continue;
                }
                const double r = (grid->nodes[i] - grid->nodes[j]).norm();
                M(i, j) = (ve[i] * delta / four_pi + rest[i] / (2.0 * pi * r)) * grid->weights[j];
            }
        }
        out.B_major = DiscretizedOperator(std::move(M), grid, "Bmaj");
        if (out.B_major.l1_norm() < eps) break;
        out.delta *= 0.5;
    }
    if (!(out.B_major.l1_norm() < eps)) {
        std::ostringstream msg;
        msg << "majorant norm " << out.B_major.l1_norm() << " stays >= eps = " << eps
            << " after reducing delta; request a smaller eps";
        throw Error(ErrorKind::truncation_failed, msg.str());
    }
    out.N0 = out.delta / 2.0;
    return out;
}

// ---------------------------------------------------------------------------

double kernel_diff_sup(double lambda)
{
    if (lambda < 0.0) throw Error(ErrorKind::invalid_argument, "kernel_diff_sup needs lambda >= 0");
    if (lambda == 0.0) return 0.0;
    double best = 0.0;
    const int points = 4000;
    for (int k = 0; k <= points; ++k) {
        const double rho = std::pow(10.0, -10.0 + 14.0 * k / points) / lambda;
        best = std::max(best, std::abs(std::sin(lambda * rho)) / (2.0 * pi * rho));
    }
    if (best > lambda / (2.0 * pi) * (1.0 + 1e-12))
        throw Error(ErrorKind::invariant_violation, "sup |sin(lambda rho)| / (2 pi rho) exceeds lambda / 2 pi");
    return best;
}

double L43_L4_ratio(double lambda, double width, double center, const RadialLine& line)
{
    const double k = lambda;
    auto f = [&](double s) {
        const double t = (s - center) / width;
        return std::exp(-t * t);
    };
    auto g = [&](double s) { return k > 0.0 ? std::sin(k * s) / k : s; };
    const double r_out = center + 7.0 * width;
    const int cells = line.cells;
    const double h = r_out / cells;
    const GaussRule& gl = gauss_legendre(8);

    // cumulative I1 = int_0^r s f g ds and I2 = int_r^inf s f e^{iks} ds at the cell edges
    std::vector<double> I1(cells + 1, 0.0);
    std::vector<cd> I2(cells + 1, 0.0);
    auto seg1 = [&](double a, double b) {
        double s = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
            s += gl.weights[q] * x * f(x) * g(x);
        }
        return 0.5 * (b - a) * s;
    };
    auto seg2 = [&](double a, double b) {
        cd s = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
            s += gl.weights[q] * x * f(x) * std::polar(1.0, k * x);
        }
        return 0.5 * (b - a) * s;
    };
    for (int c = 0; c < cells; ++c) I1[c + 1] = I1[c] + seg1(c * h, (c + 1) * h);
    for (int c = cells; c-- > 0;) I2[c] = I2[c + 1] + seg2(c * h, (c + 1) * h);

    double u4 = 0.0, f43 = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double a = c * h;
        for (int q = 0; q < 8; ++q) {
            const double r = a + 0.5 * h * (1.0 + gl.nodes[q]);
            const double w = 0.5 * h * gl.weights[q];
            const double i1 = I1[c] + seg1(a, r);
            const cd i2 = I2[c + 1] + seg2(r, a + h);
            const cd u = (std::polar(1.0, k * r) * i1 + g(r) * i2) / r;
            const double m = std::norm(u);
            u4 += w * r * r * m * m;
            f43 += w * r * r * std::pow(f(r), 4.0 / 3.0);
        }
    }
    const double C = I1[cells];
    u4 += C * C * C * C / r_out;
    const double num = std::pow(four_pi * u4, 0.25);
    const double den = std::pow(four_pi * f43, 0.75);
    return num / den;
}

double estimate_L43_L4_norm(double lambda, const RadialLine& line, int trials, std::uint64_t seed)
{
    if (trials < 1) throw Error(ErrorKind::invalid_argument, "estimate_L43_L4_norm needs trials >= 1");
    if (lambda < 0.0) throw Error(ErrorKind::invalid_argument, "lambda must be >= 0");
    const double scale = 1.0 / japanese(lambda);
    const double lw_lo = std::log(0.05), lw_hi = std::log(20.0);
    Rng rng(mix_seed(seed, 0x4c34u, static_cast<std::uint64_t>(lambda * 1024.0)));
    double best = 0.0, best_lw = 0.0, best_c = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double lw = lw_lo + (lw_hi - lw_lo) * rng.uniform();
        const double c = (t % 2 == 0) ? 0.0 : 10.0 * rng.uniform();
        const double v = L43_L4_ratio(lambda, std::exp(lw) * scale, c * scale, line);
        if (v > best) {
            best = v;
            best_lw = lw;
            best_c = c;
        }
    }
    // compass refinement in (log width, center), kept inside the sampling box
    double step_w = 0.5, step_c = 1.0;
    for (int it = 0; it < 40 && (step_w > 1e-3 || step_c > 1e-3); ++it) {
        bool moved = false;
        const double cand[4][2] = {{best_lw + step_w, best_c}, {best_lw - step_w, best_c},
                                   {best_lw, best_c + step_c}, {best_lw, best_c - step_c}};
        for (const auto& p : cand) {
            const double lw = std::clamp(p[0], lw_lo, lw_hi), c = std::clamp(p[1], 0.0, 10.0);
            const double v = L43_L4_ratio(lambda, std::exp(lw) * scale, c * scale, line);
            if (v > best) {
                best = v;
                best_lw = lw;
                best_c = c;
                moved = true;
            }
        }
        if (!moved) {
            step_w *= 0.5;
            step_c *= 0.5;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

N1Search find_N1(const PotentialModel& V, double eps, std::shared_ptr<const QuadratureGrid> grid, double N_min,
                 int lambdas_per_band)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "find_N1 needs eps > 0");
    N1Search out;
    out.eps = eps;
    if (V.is_zero()) {
        out.found = true;
        out.N1 = N_min;
        out.N = {N_min};
        out.max_norm_sq = {0.0};
        out.max_norm = {0.0};
        return out;
    }
    const double cap = std::ldexp(1.0, 15);
    AssembleOptions opt;
    opt.check_kato_bound = false;
    for (double N = N_min; N <= cap; N *= 2.0) {
        if (2.0 * N > grid->resolution_lambda()) {
            out.resolution_limited = true;
            break;
        }
        double worst_sq = 0.0, worst = 0.0;
        for (int k = 0; k < lambdas_per_band; ++k) {
            const double lam = 0.5 * N * std::pow(4.0, (k + 0.5) / lambdas_per_band);
            const auto A = assemble_VR0(V, lam, grid, opt);
            worst = std::max(worst, A.l1_norm());
            worst_sq = std::max(worst_sq, (A * A).l1_norm());
        }
        out.N.push_back(N);
        out.max_norm.push_back(worst);
        out.max_norm_sq.push_back(worst_sq);
    }
    // least N with every scanned N' >= N below eps^2
    for (std::size_t k = out.N.size(); k-- > 0;) {
        if (out.max_norm_sq[k] > eps * eps) break;
        out.found = true;
        out.N1 = out.N[k];
    }
    std::ostringstream msg;
    if (out.found) {
        msg << "N1 = " << out.N1 << " (eps^2 = " << eps * eps << ")";
    } else {
        msg << "no dyadic N1 up to " << (out.N.empty() ? N_min : out.N.back())
            << (out.resolution_limited ? " (grid resolution limit)" : "") << "; smallest achieved norm "
            << (out.max_norm_sq.empty() ? 0.0 : *std::min_element(out.max_norm_sq.begin(), out.max_norm_sq.end()))
            << " vs eps^2 = " << eps * eps;
    }
    out.message = msg.str();
    return out;
}

} // namespace lpk
