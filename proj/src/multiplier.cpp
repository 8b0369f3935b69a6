#include "lpk/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "lpk/common.hpp"
#include "lpk/quadrature.hpp"

namespace lpk {

namespace {

double mollifier(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

Jet mollifier(const Jet& t)
{
    if (t.value() <= 0.0) return Jet{};
    return exp(-1.0 * (Jet::constant(1.0) / t));
}

double theta(double lambda) { return smooth_step(2.0 - lambda); }

Jet theta(const Jet& lambda) { return smooth_step(Jet::constant(2.0) - lambda); }

// Panel layout for sine transforms over [1/2, 2] with a breakpoint at 1.
PanelRule transform_rule(double t_max)
{
    const int panels = 8 + static_cast<int>(std::ceil(0.25 * t_max));
    const double bp[3] = {0.5, 1.0, 2.0};
    return composite_gauss(std::span<const double>(bp, 3), panels, 16);
}

} // namespace

double smooth_step(double t)
{
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = mollifier(t);
    const double b = mollifier(1.0 - t);
    return a / (a + b);
}

Jet smooth_step(const Jet& t)
{
    if (t.value() <= 0.0) return Jet{};
    if (t.value() >= 1.0) return Jet::constant(1.0);
    const Jet a = mollifier(t);
    const Jet b = mollifier(Jet::constant(1.0) - t);
    return a / (a + b);
}

MultiplierProfile::MultiplierProfile(double amplitude, std::optional<double> sobolev_s)
    : amplitude_(amplitude), sobolev_s_(sobolev_s)
{
    if (sobolev_s_ && !(*sobolev_s_ > 0.0 && *sobolev_s_ < 3.0))
        throw Error(ErrorKind::invalid_argument, "sobolev exponent s must lie in (0, 3)");
}

double MultiplierProfile::chi(double lambda) const
{
    if (lambda <= 0.5 || lambda >= 2.0) return 0.0;
    double v = theta(lambda) - theta(2.0 * lambda);
    if (sobolev_s_) v *= std::pow(lambda, -*sobolev_s_);
    return amplitude_ * v;
}

Jet MultiplierProfile::chi_jet(double lambda) const
{
    if (lambda <= 0.5 || lambda >= 2.0) return Jet{};
    const Jet x = Jet::variable(lambda);
    Jet v = theta(x) - theta(2.0 * x);
    if (sobolev_s_) v = v * pow(x, -*sobolev_s_);
    return amplitude_ * v;
}

double MultiplierProfile::chi_derivative(double lambda, int k) const
{
    if (k < 0 || k > derivative_order_max_)
        throw Error(ErrorKind::invalid_argument,
                    "derivative order " + std::to_string(k) + " exceeds the stable maximum " +
                        std::to_string(derivative_order_max_) + "; use a lower m");
    return chi_jet(lambda).derivative(k);
}

double MultiplierProfile::phi(double lambda) const
{
    if (lambda < 0.0) return -phi(-lambda);
    return lambda * chi(lambda);
}

std::string MultiplierProfile::describe() const
{
    std::ostringstream os;
    os << "chi(amplitude=" << amplitude_;
    if (sobolev_s_) os << ", s=" << *sobolev_s_;
    os << ")";
    return os.str();
}

MultiplierProfile make_bump() { return MultiplierProfile{}; }

double sobolev_W_m1_norm(const MultiplierProfile& profile, int m)
{
    if (m < 0 || m > profile.derivative_order_max())
        throw Error(ErrorKind::invalid_argument,
                    "W^{m,1} norm requested with m = " + std::to_string(m) +
                        " beyond stable differentiation; use m <= " +
                        std::to_string(profile.derivative_order_max()));
    const double bp[3] = {0.5, 1.0, 2.0};
    const PanelRule rule = composite_gauss(std::span<const double>(bp, 3), 200, 16);
    std::vector<double> sums(m + 1, 0.0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const Jet j = profile.chi_jet(rule.nodes[i]);
        for (int k = 0; k <= m; ++k) sums[k] += rule.weights[i] * std::abs(j.derivative(k));
    }
    double total = 0.0;
    for (double s : sums) total += s;
    return total;
}

double chi_moment(const MultiplierProfile& profile, int p)
{
    const double bp[3] = {0.5, 1.0, 2.0};
    const PanelRule rule = composite_gauss(std::span<const double>(bp, 3), 64, 16);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += rule.weights[i] * std::pow(rule.nodes[i], p) * profile.chi(rule.nodes[i]);
    return s;
}

// ---------------------------------------------------------------------------

OddProfileTransform::OddProfileTransform(MultiplierProfile profile, double t_max, double dt)
    : profile_(std::move(profile)), t_max_(t_max), dt_(dt)
{
    const PanelRule rule = transform_rule(t_max_);
    u_nodes_ = rule.nodes;
    u_weights_.resize(rule.nodes.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        u_weights_[i] = 2.0 * rule.weights[i] * rule.nodes[i] * profile_.chi(rule.nodes[i]);

    const std::size_t count = static_cast<std::size_t>(std::ceil(t_max_ / dt_)) + 1;
    table_f_.assign(count, 0.0);
    table_df_.assign(count, 0.0);

    // Node phases advance by a fixed rotation per table step; restart every block to bound drift.
    constexpr std::size_t block = 256;
    const std::size_t nblocks = (count + block - 1) / block;
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t k0 = b * block;
        const std::size_t k1 = std::min(count, k0 + block);
        std::vector<std::complex<double>> phase(u_nodes_.size()), step(u_nodes_.size());
        for (std::size_t i = 0; i < u_nodes_.size(); ++i) {
            phase[i] = std::polar(1.0, u_nodes_[i] * (k0 * dt_));
            step[i] = std::polar(1.0, u_nodes_[i] * dt_);
        }
        for (std::size_t k = k0; k < k1; ++k) {
            double f = 0.0, df = 0.0;
            for (std::size_t i = 0; i < u_nodes_.size(); ++i) {
                f += u_weights_[i] * phase[i].imag();
                df += u_weights_[i] * u_nodes_[i] * phase[i].real();
                phase[i] *= step[i];
            }
            table_f_[k] = f;
            table_df_[k] = df;
        }
    }

    tail_sup_.assign(count, 0.0);
    double running = 0.0;
    for (std::size_t k = count; k-- > 0;) {
        // bound |F| between nodes by the Hermite extremum estimate |f| + |df| dt / 2
        running = std::max(running, std::abs(table_f_[k]) + 0.5 * dt_ * std::abs(table_df_[k]));
        tail_sup_[k] = running;
    }
}

double OddProfileTransform::F1_direct(double t) const
{
    if (t == 0.0) return 0.0;
    if (t < 0.0) return -F1_direct(-t);
    double s = 0.0;
    if (t <= t_max_) {
        for (std::size_t i = 0; i < u_nodes_.size(); ++i) s += u_weights_[i] * std::sin(u_nodes_[i] * t);
        return s;
    }
    const PanelRule rule = transform_rule(t);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        s += 2.0 * rule.weights[i] * rule.nodes[i] * profile_.chi(rule.nodes[i]) * std::sin(rule.nodes[i] * t);
    return s;
}

double OddProfileTransform::F1(double t) const
{
    if (t < 0.0) return -F1(-t);
    if (t >= t_max_) return F1_direct(t);
    const double x = t / dt_;
    const std::size_t k = static_cast<std::size_t>(x);
    const double s = x - k;
    const double f0 = table_f_[k], f1 = table_f_[k + 1];
    const double d0 = table_df_[k] * dt_, d1 = table_df_[k + 1] * dt_;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * d1;
}

double OddProfileTransform::F1_tail_sup(double t) const
{
    t = std::abs(t);
    if (t >= t_max_) return tail_sup_.back();
    return tail_sup_[static_cast<std::size_t>(t / dt_)];
}

double OddProfileTransform::cosine_moment(double N, double sigma) const
{
    // explicit sum over both half-lines of the odd profile
    double neg = 0.0, pos = 0.0;
    const double t = N * sigma;
    const PanelRule rule = transform_rule(std::max(t_max_, std::abs(t)));
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = rule.nodes[i];
        const double w = rule.weights[i] * N;
        pos += w * profile_.phi(u) * std::cos(u * t);
        neg += w * profile_.phi(-u) * std::cos(-u * t);
    }
    return pos + neg;
}

double OddProfileTransform::phi_l1(double N) const
{
    return 2.0 * N * std::abs(chi_moment(profile_, 1));
}

std::vector<OddProfileTransform::Sample> OddProfileTransform::tabulate(double N) const
{
    std::vector<Sample> out;
    const int per_decade = 40;
    for (int k = 0; k <= 6 * per_decade; ++k) {
        const double t = std::pow(10.0, -3.0 + static_cast<double>(k) / per_decade);
        out.push_back({N, t / N, N * F1_direct(t)});
    }
    return out;
}

// ---------------------------------------------------------------------------

TranslatedPartition::TranslatedPartition(double delta) : delta_(delta)
{
    if (!(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "partition spacing delta must be positive");
}

double TranslatedPartition::psi(double lambda) const
{
    const double t = lambda / delta_;
    auto step = [](double x) { return smooth_step((x + ramp_) / (2.0 * ramp_)); };
    return step(t + 0.5) - step(t - 0.5);
}

std::pair<int, int> TranslatedPartition::active_window(double N) const
{
    const double lo = N / 2.0, hi = 2.0 * N;
    const double r = support_half_width_;
    // j delta - r delta < hi and j delta + r delta > lo
    int j_lo = static_cast<int>(std::floor(lo / delta_ - r)) + 1;
    int j_hi = static_cast<int>(std::ceil(hi / delta_ + r)) - 1;
    j_lo = std::max(j_lo, 0);
    return {j_lo, j_hi};
}

TranslatedPartition make_translated_partition(double delta) { return TranslatedPartition(delta); }

} // namespace lpk
