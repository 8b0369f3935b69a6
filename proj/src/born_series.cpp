#include "lpk/born_series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lpk/quadrature.hpp"

namespace lpk {

using cd = std::complex<double>;

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Gauss rule on [a, b] mapped from the cached Legendre rule.
PanelRule gauss_on(double a, double b, int order) { return composite_gauss(a, b, 1, order); }

} // namespace

const char* to_string(Regime regime) noexcept
{
    switch (regime) {
    case Regime::small_potential: return "small-potential";
    case Regime::high_frequency: return "high-frequency";
    case Regime::low_frequency: return "low-frequency";
    case Regime::medium_frequency: return "medium-frequency";
    }
    return "unknown";
}

Regime regime_from_string(const std::string& name)
{
    for (Regime r : {Regime::small_potential, Regime::high_frequency, Regime::low_frequency, Regime::medium_frequency})
        if (name == to_string(r)) return r;
    throw Error(ErrorKind::config, "unknown regime '" + name + "'");
}

void SeriesConfig::validate() const
{
    if (max_n < 0) throw Error(ErrorKind::config, "max_n must be >= 0");
    if (!(term_tolerance > 0.0)) throw Error(ErrorKind::config, "term_tolerance must be > 0");
    if (m < 0) throw Error(ErrorKind::config, "decay order m must be >= 0");
    if (lambda_nodes < 2) throw Error(ErrorKind::config, "lambda_nodes must be >= 2");
    if (N0 < 0.0 || !(N1 > 0.0) || N0 >= N1) throw Error(ErrorKind::config, "thresholds need 0 <= N0 < N1");
    if (delta && !(*delta > 0.0)) throw Error(ErrorKind::config, "partition delta must be > 0");
}

double free_LP_kernel(const OddProfileTransform& transform, double N, const Vec3& x, const Vec3& y)
{
    if (!(N > 0.0)) throw Error(ErrorKind::invalid_argument, "frequency N must be > 0");
    const double rho = (x - y).norm();
    const double t = N * rho;
    if (t < 1e-4) {
        const auto& p = transform.profile();
        // F_1(t) = 2 (t m2 - t^3 m4 / 6) + O(t^5)
        const double m2 = chi_moment(p, 2), m4 = chi_moment(p, 4);
        return N * N * N * (m2 - t * t * m4 / 6.0) / (2.0 * pi * pi);
    }
    return N * N * transform.F1(t) / (4.0 * pi * pi * rho);
}

// ---------------------------------------------------------------------------

SeriesContext::SeriesContext(PotentialModel V, MultiplierProfile profile, SeriesConfig config)
    : V_(std::move(V)), config_(std::move(config))
{
    config_.validate();
    transform_ = std::make_shared<const OddProfileTransform>(profile);
    chi_norm_ = sobolev_W_m1_norm(profile, config_.m);
    if (!V_.is_zero()) {
        kato_ = kato_norm(V_).value;
        sampler_ = ChainSampler(V_);
    }
}

double SeriesContext::envelope(double N, double rho) const
{
    return N * N * N * chi_norm_ / std::pow(japanese(N * rho), config_.m + 1);
}

// ---------------------------------------------------------------------------

SpheroidalShell::SpheroidalShell(const PotentialModel& V, const Vec3& x, const Vec3& y, double tol, int n_phi)
    : x_(x), tol_(tol), n_phi_(n_phi), V_(V)
{
    const Vec3 dvec = y - x;
    d_ = dvec.norm();
    axis_ = d_ > 0.0 ? Vec3(dvec / d_) : Vec3(0.0, 0.0, 1.0);
    const Vec3 trial = std::abs(axis_.x()) < 0.9 ? Vec3(1.0, 0.0, 0.0) : Vec3(0.0, 1.0, 0.0);
    u_ = axis_.cross(trial).normalized();
    v_ = axis_.cross(u_);
    const double E = V.support_radius().value_or(V.extent());
    s_max_ = x.norm() + y.norm() + 2.0 * E;
}

double SpheroidalShell::operator()(double s) const
{
    if (s < d_) return 0.0;
    const double dphi = 2.0 * pi / n_phi_;
    const double h = std::sqrt(std::max(0.0, s * s - d_ * d_));
    auto ring = [&](double tau) {
        const double z = 0.5 * (s * tau + d_);
        const double rp = 0.5 * h * std::sqrt(std::max(0.0, 1.0 - tau * tau));
        const Vec3 c = x_ + z * axis_;
        double acc = 0.0;
        for (int k = 0; k < n_phi_; ++k) {
            const double ph = (k + 0.5) * dphi;
            acc += V_(c + rp * (std::cos(ph) * u_ + std::sin(ph) * v_));
        }
        return acc * dphi;
    };
    return integrate_adaptive(ring, -1.0, 1.0, tol_, nullptr, 12);
}

std::vector<double> SpheroidalShell::breakpoints() const
{
    std::vector<double> bp{d_};
    const double s0 = x_.norm() + (x_ + d_ * axis_).norm();
    if (s0 > d_ && s0 < s_max_) bp.push_back(s0);
    bp.push_back(s_max_);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

// ---------------------------------------------------------------------------

namespace {

// s rule for the spheroidal integrals: Gauss panels resolving e^{i 2N s}, clipped where N s leaves the F_1 table
// (beyond it |F_1| is below the table's tail sup).
PanelRule shell_rule(const SpheroidalShell& W, double N, double t_max)
{
    auto bp = W.breakpoints();
    const double s_cap = t_max / N;
    for (double& b : bp) b = std::min(b, s_cap);
    const double panel = std::min(0.25, pi / (4.0 * N));
    PanelRule out;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double a = bp[k], b = bp[k + 1];
        if (!(b > a)) continue;
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
        const PanelRule r = composite_gauss(a, b, panels, 12);
        out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
        out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
    }
    return out;
}

std::vector<double> shell_values(const SpheroidalShell& W, const PanelRule& rule)
{
    std::vector<double> w(rule.nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) w[k] = W(rule.nodes[k]) * rule.weights[k];
    return w;
}

KernelEvaluation born_term1_spheroidal(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx)
{
    KernelEvaluation ev;
    ev.regime = ctx.config().regime;
    ev.provenance = "born n=1 spheroidal quadrature";
    const SpheroidalShell W(ctx.V(), x, y, 1e-9);
    const PanelRule rule = shell_rule(W, N, ctx.transform().t_max());
    const auto w = shell_values(W, rule);
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) total += ctx.transform().F(N, rule.nodes[k]) * w[k];
    ev.value = -N / (32.0 * pi * pi * pi) * total;
    ev.terms = {ev.value};
    ev.term_stderr = {0.0};
    return ev;
}

} // namespace

KernelEvaluation born_term_mc(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                              std::size_t samples, std::uint64_t stream, bool majorant)
{
    if (n < 1) throw Error(ErrorKind::invalid_argument, "chain Monte Carlo needs n >= 1");
    KernelEvaluation ev;
    ev.regime = ctx.config().regime;
    ev.provenance = "born n=" + std::to_string(n) + " chain Monte Carlo";
    if (ctx.V().is_zero() || samples == 0) {
        ev.terms = {0.0};
        ev.term_stderr = {0.0};
        return ev;
    }
    const ChainSampler& sampler = ctx.sampler();
    const OddProfileTransform& tr = ctx.transform();
    constexpr std::size_t block = 1024;
    const std::size_t nblocks = (samples + block - 1) / block;
    const std::uint64_t base = mix_seed(ctx.config().seed, 0x626f726eu, stream);
    std::vector<double> sum(nblocks, 0.0), sum2(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nblocks; ++b) {
        Rng rng(mix_seed(base, static_cast<std::uint64_t>(n), b));
        const std::size_t count = std::min(block, samples - b * block);
        for (std::size_t s = 0; s < count; ++s) {
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
            // F_N(sigma) / (4 pi |x_n - y|); the 1/i of the prefactor cancels against the i in the transform
            double f = last > 0.0 ? w * tr.F(N, sigma) / (four_pi * last) : 0.0;
            if (majorant) f = std::abs(f);
            sum[b] += f;
            sum2[b] += f * f;
        }
    }
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        s1 += sum[b];
        s2 += sum2[b];
    }
    const double mean = s1 / samples;
    const double var = std::max(0.0, s2 / samples - mean * mean);
    const double sign = (n % 2 == 0 || majorant) ? 1.0 : -1.0;
    const cd prefactor = cd(0.0, -1.0) * (N / pi);  // N / (pi i)
    const cd assembled = sign * prefactor * cd(0.0, mean);
    ev.value = assembled.real();
    ev.imag_residue = std::abs(assembled.imag());
    ev.mc_stderr = N / pi * std::sqrt(var / samples);
    ev.terms = {ev.value};
    ev.term_stderr = {ev.mc_stderr};
    return ev;
}

KernelEvaluation born_term(int n, double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx)
{
    if (n < 0) throw Error(ErrorKind::invalid_argument, "Born term order must be >= 0");
    if (!(N > 0.0)) throw Error(ErrorKind::invalid_argument, "frequency N must be > 0");
    if (n == 0) {
        KernelEvaluation ev;
        ev.regime = ctx.config().regime;
        ev.provenance = "free kernel";
        ev.value = free_LP_kernel(ctx.transform(), N, x, y);
        ev.terms = {ev.value};
        ev.term_stderr = {0.0};
        return ev;
    }
    if (ctx.V().is_zero()) {
        KernelEvaluation ev;
        ev.regime = ctx.config().regime;
        ev.terms = {0.0};
        ev.term_stderr = {0.0};
        return ev;
    }
    if (n == 1) return born_term1_spheroidal(N, x, y, ctx);
    KernelEvaluation ev = born_term_mc(n, N, x, y, ctx, ctx.config().mc_samples);
    const double scale = ctx.config().term_tolerance * ctx.envelope(N, (x - y).norm());
    if (ev.mc_stderr > scale)
        throw Error(ErrorKind::budget_exceeded, "Born term n = " + std::to_string(n) + " partial value " +
                                                    num(ev.value) + " +- " + num(ev.mc_stderr) +
                                                    " after " + std::to_string(ctx.config().mc_samples) +
                                                    " samples exceeds tolerance " + num(scale));
    return ev;
}

double born_tail_weight(double q, int M)
{
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return std::numeric_limits<double>::infinity();
    // sum_{n >= 0} (n + 1) q^n = 1 / (1 - q)^2
    double head = 0.0, p = 1.0;
    for (int n = 0; n <= M; ++n, p *= q) head += (n + 1) * p;
    return std::max(0.0, 1.0 / ((1.0 - q) * (1.0 - q)) - head);
}

KernelEvaluation sum_small_potential(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx)
{
    const SeriesConfig& cfg = ctx.config();
    const bool high = cfg.regime == Regime::high_frequency;
    if (!high && ctx.kato() >= four_pi)
        throw Error(ErrorKind::regime, "||V||_K = " + num(ctx.kato()) +
                                           " >= 4 pi; the small-potential series does not apply, use thresholds "
                                           "and the low/medium/high-frequency paths");
    if (high && N < cfg.N1)
        throw Error(ErrorKind::regime, "high-frequency summation needs N >= N1 = " + num(cfg.N1));

    KernelEvaluation out;
    out.regime = high ? Regime::high_frequency : Regime::small_potential;
    out.provenance = high ? "Born series (high frequency)" : "Born series (small potential)";
    double var = 0.0;
    for (int n = 0; n <= cfg.max_n; ++n) {
        const KernelEvaluation t = born_term(n, N, x, y, ctx);
        out.terms.push_back(t.value);
        out.term_stderr.push_back(t.mc_stderr);
        out.value += t.value;
        out.imag_residue = std::max(out.imag_residue, t.imag_residue);
        var += t.mc_stderr * t.mc_stderr;
        if (ctx.V().is_zero()) break;
    }
    out.mc_stderr = std::sqrt(var);

    if (ctx.V().is_zero()) return out;
    const double rho = (x - y).norm();
    const double env = ctx.envelope(N, rho);
    if (!high) {
        // constant fitted on the deterministic orders 0 and 1
        const double q = ctx.q();
        double C = std::abs(out.terms[0]) / env;
        if (out.terms.size() > 1) C = std::max(C, std::abs(out.terms[1]) / (2.0 * q * env));
        out.truncation_bound = C * env * born_tail_weight(q, cfg.max_n);
    } else {
        const std::size_t M = out.terms.size();
        double r = 1.0;
        if (M >= 3) {
            const double a = std::abs(out.terms[M - 1]), b = std::abs(out.terms[M - 2]), c = std::abs(out.terms[M - 3]);
            r = std::max(b > 0.0 ? a / b : 1.0, c > 0.0 ? b / c : 1.0);
        }
        out.truncation_bound =
            r < 1.0 ? std::abs(out.terms.back()) * r / (1.0 - r) : std::numeric_limits<double>::infinity();
    }
    return out;
}

double born_term1_lambda_first(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx, int lambda_nodes)
{
    if (ctx.V().is_zero()) return 0.0;
    const PotentialModel& V = ctx.V();
    // Bipolar coordinates a = |x - x1|, b = |x1 - y| about the x-y axis: dx1 = a b / d da db dphi,
    // which cancels the 1 / (a b) of the two free resolvents.
    const Vec3 axis_raw = y - x;
    const double d = axis_raw.norm();
    const Vec3 e = d > 1e-12 ? Vec3(axis_raw / d) : Vec3(0.0, 0.0, 1.0);
    const Vec3 u = (std::abs(e.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(e).normalized();
    const Vec3 v = e.cross(u);
    const double a_max = x.norm() + V.support_radius().value_or(V.extent());
    const int n_phi = 64;
    const double panel = 0.15;

    struct Node {
        double s, weight;  // s = a + b; weight carries da db (or da) and the phi average
    };
    std::vector<Node> nodes;
    // the origin sits at (a, b) = (|x|, |y|); panels end there so a 1/r potential stays resolved
    auto split_rule = [&](double lo, double hi, double mid) {
        std::vector<double> bp{lo};
        if (mid > lo && mid < hi) bp.push_back(mid);
        bp.push_back(hi);
        PanelRule out;
        for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
            const double len = bp[k + 1] - bp[k];
            const PanelRule r = composite_gauss(bp[k], bp[k + 1], std::max(2, static_cast<int>(std::ceil(len / panel))), 8);
            out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
            out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
        }
        return out;
    };
    const PanelRule ar = split_rule(0.0, a_max, x.norm());
    auto phi_sum = [&](double a, double cos_t) {
        const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
        double acc = 0.0;
        for (int k = 0; k < n_phi; ++k) {
            const double ph = 2.0 * pi * (k + 0.5) / n_phi;
            acc += V(x + a * (cos_t * e + sin_t * (std::cos(ph) * u + std::sin(ph) * v)));
        }
        return acc * 2.0 * pi / n_phi;
    };
    for (std::size_t i = 0; i < ar.nodes.size(); ++i) {
        const double a = ar.nodes[i];
        if (d <= 1e-12) {
            // x = y: b = a and int dOmega V over the sphere of radius a, with dx1 / (a b) = dOmega da
            double sphere = 0.0;
            const PanelRule ct = composite_gauss(-1.0, 1.0, 4, 8);
            for (std::size_t k = 0; k < ct.nodes.size(); ++k) sphere += ct.weights[k] * phi_sum(a, ct.nodes[k]);
            nodes.push_back({2.0 * a, ar.weights[i] * sphere});
            continue;
        }
        const double b_lo = std::abs(a - d), b_hi = a + d;
        const PanelRule br = split_rule(b_lo, b_hi, y.norm());
        for (std::size_t k = 0; k < br.nodes.size(); ++k) {
            const double b = br.nodes[k];
            const double cos_t = std::clamp((a * a + d * d - b * b) / (2.0 * a * d), -1.0, 1.0);
            nodes.push_back({a + b, ar.weights[i] * br.weights[k] * phi_sum(a, cos_t) / d});
        }
    }

    const MultiplierProfile& profile = ctx.transform().profile();
    const PanelRule lam = composite_gauss(std::vector<double>{0.5 * N, N, 2.0 * N}, 1, lambda_nodes / 2);
    double total = 0.0;
    for (std::size_t q = 0; q < lam.nodes.size(); ++q) {
        const double l = lam.nodes[q];
        // Im[R0 V R0](x, y) at lambda = (1 / 16 pi^2) int V sin(lambda (a + b)) / (a b) dx1
        double g = 0.0;
        for (const Node& n : nodes) g += n.weight * std::sin(l * n.s);
        total += lam.weights[q] * profile.phi(l / N) * g / (16.0 * pi * pi);
    }
    // odd phi_N times odd Im[...]: the full line is twice the half line
    return -(N / pi) * 2.0 * total;
}

// ---------------------------------------------------------------------------

ResummedSeries::ResummedSeries(PotentialModel V, MultiplierProfile profile, std::shared_ptr<const QuadratureGrid> grid)
    : V_(std::move(V)), grid_(std::move(grid))
{
    if (!grid_) throw Error(ErrorKind::invalid_argument, "resummed series needs a quadrature grid");
    transform_ = std::make_shared<const OddProfileTransform>(std::move(profile));
    v_ = sample_potential(V_, *grid_);
}

DiscretizedOperator ResummedSeries::VR0(double lambda) const
{
    AssembleOptions opt;
    opt.check_kato_bound = false;
    return assemble_VR0(V_, lambda, grid_, opt);
}

const SInverse& ResummedSeries::S(double lambda0)
{
    auto it = cache_.find(lambda0);
    if (it != cache_.end()) return it->second;
    SInverse inv = invert_S(VR0(lambda0), lambda0);
    if (inv.near_resonance)
        throw Error(ErrorKind::near_resonance, "I + V R0(" + num(lambda0) + ") is near-singular (condition " +
                                                   num(inv.condition) + ")");
    return cache_.emplace(lambda0, std::move(inv)).first->second;
}

Eigen::VectorXcd ResummedSeries::VR0_column(double lambda, const Vec3& y) const
{
    const auto& g = *grid_;
    Eigen::VectorXcd c(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = (g.nodes[i] - y).norm();
        if (r < 1e-12 * g.spec.radius)
            c[i] = v_[i] * (g.self[i] + self_cell_phase(lambda, g.cell_radius[i])) / g.weights[i];
        else
            c[i] = v_[i] * std::polar(1.0 / (four_pi * r), lambda * r);
    }
    return c;
}

Eigen::VectorXcd ResummedSeries::S_tilde_column(double lambda0, const Vec3& y)
{
    return -(S(lambda0).S.matrix() * VR0_column(lambda0, y));
}

double ResummedSeries::coulomb_weight(const Vec3& x, std::size_t i) const
{
    const auto& g = *grid_;
    const double d = (x - g.nodes[i]).norm();
    const double a = g.cell_radius[i];
    if (d >= a) return g.weights[i] / d;
    // average of 1 / |x - z| over the node's ball cell
    return 2.0 * pi * a * a - 2.0 * pi * d * d / 3.0;
}

std::vector<Eigen::VectorXcd> ResummedSeries::chain_columns(int n_max, double lambda, double lambda0, const Vec3& y)
{
    std::vector<Eigen::VectorXcd> out;
    const Eigen::VectorXcd st = S_tilde_column(lambda0, y);
    out.push_back(st);
    if (n_max < 1 || V_.is_zero()) {
        for (int n = 1; n <= n_max; ++n) out.push_back(Eigen::VectorXcd::Zero(st.size()));
        return out;
    }
    const Eigen::MatrixXcd& S = this->S(lambda0).S.matrix();
    const Eigen::MatrixXcd B = VR0(lambda).matrix() - VR0(lambda0).matrix();
    // B S0 delta_y = B(., y) + B S~(., y)
    Eigen::VectorXcd u = VR0_column(lambda, y) - VR0_column(lambda0, y) + B * st;
    for (int n = 1; n <= n_max; ++n) {
        Eigen::VectorXcd t = S * u;
        if (n < n_max) u = B * t;
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct LambdaPiece {
    double center = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;  // quadrature weight times phi_N times partition weight
};

std::vector<LambdaPiece> low_pieces(double N, const MultiplierProfile& profile, int nodes)
{
    LambdaPiece p;
    const PanelRule r = composite_gauss(std::vector<double>{0.5 * N, N, 2.0 * N}, 1, std::max(1, nodes / 2));
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        p.nodes.push_back(r.nodes[k]);
        p.weights.push_back(r.weights[k] * profile.phi(r.nodes[k] / N));
    }
    return {p};
}

std::vector<LambdaPiece> medium_pieces(double N, const MultiplierProfile& profile, const TranslatedPartition& part,
                                       int nodes, int max_pieces)
{
    const auto [j_lo, j_hi] = part.active_window(N);
    if (j_hi - j_lo + 1 > max_pieces)
        throw Error(ErrorKind::budget_exceeded,
                    "medium-frequency partition at N = " + num(N) + " needs " + std::to_string(j_hi - j_lo + 1) +
                        " pieces (limit " + std::to_string(max_pieces) + "); raise delta or the piece budget");
    std::vector<LambdaPiece> out;
    for (int j = j_lo; j <= j_hi; ++j) {
        LambdaPiece p;
        p.center = part.center(j);
        const double a = std::max(0.5 * N, p.center - part.support_radius());
        const double b = std::min(2.0 * N, p.center + part.support_radius());
        if (!(b > a)) continue;
        const PanelRule r = gauss_on(a, b, nodes);
        for (std::size_t k = 0; k < r.nodes.size(); ++k) {
            p.nodes.push_back(r.nodes[k]);
            p.weights.push_back(r.weights[k] * profile.phi(r.nodes[k] / N) * part.weight(j, r.nodes[k]));
        }
        out.push_back(std::move(p));
    }
    return out;
}

KernelEvaluation resummed_sum(double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                              const std::vector<LambdaPiece>& pieces, int n_max, Regime regime)
{
    const auto& g = series.grid();
    const std::size_t m = g.size();
    // inner[n][i] = P_N^n(x, x_i, y)
    std::vector<Eigen::VectorXd> inner(n_max + 1, Eigen::VectorXd::Zero(m));
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) r[i] = (x - g.nodes[i]).norm();

    for (const LambdaPiece& p : pieces) {
        for (std::size_t q = 0; q < p.nodes.size(); ++q) {
            const double l = p.nodes[q];
            const auto cols = series.chain_columns(n_max, l, p.center, y);
            for (int n = 0; n <= n_max; ++n)
                for (std::size_t i = 0; i < m; ++i)
                    // both half lines contribute equally (conjugation symmetry for real V)
                    inner[n][i] += 2.0 * p.weights[q] * (std::polar(1.0, l * r[i]) * cols[n][i]).imag();
        }
    }

    KernelEvaluation ev;
    ev.regime = regime;
    ev.provenance = regime == Regime::low_frequency ? "resummed series about 0" : "partitioned resummed series";
    for (int n = 0; n <= n_max; ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += series.coulomb_weight(x, i) * inner[n][i];
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double term = sign * N / (4.0 * pi * pi) * acc;
        ev.terms.push_back(term);
        ev.term_stderr.push_back(0.0);
        ev.value += term;
    }
    return ev;
}

void check_low(double N, const SeriesConfig& config)
{
    if (!(config.N0 > 0.0) || N > config.N0)
        throw Error(ErrorKind::regime, "low-frequency series needs 0 < N <= N0 (N = " + num(N) +
                                           ", N0 = " + num(config.N0) + "); run thresholds first");
}

double partition_delta(const SeriesConfig& config)
{
    if (config.delta) return *config.delta;
    if (config.N0 > 0.0) return 2.0 * config.N0;
    throw Error(ErrorKind::regime, "medium-frequency setup required: no partition delta or N0 available");
}

void check_medium(double N, const SeriesConfig& config)
{
    if (!(N > config.N0) || !(N < config.N1))
        throw Error(ErrorKind::regime, "medium-frequency series needs N0 < N < N1 (N = " + num(N) + ", N0 = " +
                                           num(config.N0) + ", N1 = " + num(config.N1) + ")");
}

KernelEvaluation single_order(const KernelEvaluation& all, int n)
{
    KernelEvaluation ev = all;
    ev.value = all.terms[n];
    ev.terms = {all.terms[n]};
    ev.term_stderr = {0.0};
    return ev;
}

} // namespace

KernelEvaluation lowfreq_term(int n, double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                              const SeriesConfig& config)
{
    if (n < 0) throw Error(ErrorKind::invalid_argument, "order must be >= 0");
    check_low(N, config);
    const auto pieces = low_pieces(N, series.transform().profile(), config.lambda_nodes);
    return single_order(resummed_sum(N, x, y, series, pieces, n, Regime::low_frequency), n);
}

KernelEvaluation medfreq_term(int n, double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                              const SeriesConfig& config)
{
    if (n < 0) throw Error(ErrorKind::invalid_argument, "order must be >= 0");
    check_medium(N, config);
    const TranslatedPartition part(partition_delta(config));
    const auto pieces =
        medium_pieces(N, series.transform().profile(), part, config.lambda_nodes, config.max_partition_pieces);
    return single_order(resummed_sum(N, x, y, series, pieces, n, Regime::medium_frequency), n);
}

KernelEvaluation resummed_difference(double N, const Vec3& x, const Vec3& y, ResummedSeries& series,
                                     const SeriesConfig& config)
{
    const bool low = N <= config.N0;
    std::vector<LambdaPiece> pieces;
    if (low) {
        check_low(N, config);
        pieces = low_pieces(N, series.transform().profile(), config.lambda_nodes);
    } else {
        check_medium(N, config);
        const TranslatedPartition part(partition_delta(config));
        pieces = medium_pieces(N, series.transform().profile(), part, config.lambda_nodes,
                               config.max_partition_pieces);
    }
    KernelEvaluation ev = resummed_sum(N, x, y, series, pieces, config.max_n,
                                       low ? Regime::low_frequency : Regime::medium_frequency);
    // geometric tail from the last two orders
    const std::size_t M = ev.terms.size();
    if (M >= 2) {
        const double a = std::abs(ev.terms[M - 1]), b = std::abs(ev.terms[M - 2]);
        const double r = b > 0.0 ? a / b : 0.0;
        ev.truncation_bound = r < 1.0 ? a * r / (1.0 - r) : std::numeric_limits<double>::infinity();
    }
    return ev;
}

double lowfreq_term0_operator_level(double N, const Vec3& x, const Vec3& y, ResummedSeries& series, int lambda_nodes)
{
    const auto& g = series.grid();
    const Eigen::VectorXcd st = series.S_tilde_column(0.0, y);
    const MultiplierProfile& profile = series.transform().profile();
    const PanelRule lam = composite_gauss(std::vector<double>{0.5 * N, N, 2.0 * N}, 1, lambda_nodes / 2);
    double total = 0.0;
    for (std::size_t q = 0; q < lam.nodes.size(); ++q) {
        const double l = lam.nodes[q];
        // [R0^+(lambda^2) S~_0](x, y) = int e^{i lambda |x - z|} / (4 pi |x - z|) S~_0(z, y) dz
        cd k = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = (x - g.nodes[i]).norm();
            k += series.coulomb_weight(x, i) / four_pi * std::polar(1.0, l * r) * st[i];
        }
        total += lam.weights[q] * profile.phi(l / N) * k.imag();
    }
    return N / pi * 2.0 * total;
}

KernelEvaluation projection_kernel(double N, const Vec3& x, const Vec3& y, const SeriesContext& ctx,
                                   ResummedSeries* series)
{
    const SeriesConfig& cfg = ctx.config();
    if (ctx.kato() < four_pi) return sum_small_potential(N, x, y, ctx);

    if (N >= cfg.N1) {
        SeriesContext high = ctx;
        high.config().regime = Regime::high_frequency;
        return sum_small_potential(N, x, y, high);
    }
    if (!series)
        throw Error(ErrorKind::regime, "||V||_K = " + num(ctx.kato()) +
                                           " >= 4 pi at N below N1: low/medium-frequency setup required");
    if (N > cfg.N0) {
        const TranslatedPartition part(partition_delta(cfg));
        const auto [j_lo, j_hi] = part.active_window(N);
        if (j_hi - j_lo + 1 > cfg.max_partition_pieces)
            throw Error(ErrorKind::regime, "medium-frequency setup required: N = " + num(N) + " needs " +
                                               std::to_string(j_hi - j_lo + 1) + " partition pieces (limit " +
                                               std::to_string(cfg.max_partition_pieces) +
                                               "); supply a larger delta or an N1 below N");
    }
    KernelEvaluation ev = resummed_difference(N, x, y, *series, cfg);
    const double free = free_LP_kernel(ctx.transform(), N, x, y);
    ev.value += free;
    ev.terms.insert(ev.terms.begin(), free);
    ev.term_stderr.insert(ev.term_stderr.begin(), 0.0);
    ev.provenance = "free kernel + " + ev.provenance;
    return ev;
}

} // namespace lpk
