#include "lpk/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lpk/quadrature.hpp"

namespace lpk {

struct PotentialModel::Impl {
    PotentialKind kind = PotentialKind::zero;
    std::string name;
    std::string signature;
    std::function<double(double)> profile;         // radial only
    std::function<double(const Vec3&)> field;      // general only
    std::function<double(double)> env;
    double extent = 0.0;
    std::optional<double> support;
    std::vector<double> breakpoints;
    bool abs_nonincreasing = false;
    std::optional<double> sup_abs;
};

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<double> merge_breakpoints(std::vector<double> a, const std::vector<double>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

constexpr double kato_overflow_guard = 1e12;

// 8-point Gauss on [a, b] of g.
template <class G>
double gauss8(const G& g, double a, double b)
{
    const GaussRule& rule = gauss_legendre(8);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += rule.weights[i] * g(mid + half * rule.nodes[i]);
    return half * s;
}

// Adaptive integral of g over [a, b] split at the interior breakpoints.
double integrate_split(const std::function<double(double)>& g, double a, double b,
                       const std::vector<double>& breaks, double tol, double* err_out)
{
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    double total = 0.0, err = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        double e = 0.0;
        total += integrate_adaptive(g, pts[k], pts[k + 1], tol, &e);
        err += e;
    }
    if (err_out) *err_out = err;
    return total;
}

void guard_kato(double value, double err)
{
    if (!std::isfinite(value) || value > kato_overflow_guard || !std::isfinite(err) ||
        err > 1e-2 * std::abs(value) + 1e-12)
        throw Error(ErrorKind::not_kato_class,
                    "Kato integral diverges or fails to converge (value " + fmt(value) + ", error " + fmt(err) +
                        "); V is not in the Kato class");
}

// Shell theorem: int |v(|y|)| / |x - y| dy = 4 pi [ (1/a) int_0^a s^2 |v| + int_a^inf s |v| ].
double radial_kato_integral(const PotentialModel& V, double a, double tol, double* err_out)
{
    const double R = V.extent();
    const auto breaks = V.breakpoints();
    double e1 = 0.0, e2 = 0.0, inner = 0.0, outer = 0.0;
    auto absv = [&](double s) { return std::abs(V.radial_value(s)); };
    if (a > 0.0) {
        inner = integrate_split([&](double s) { return s * s * absv(s); }, 0.0, std::min(a, R), breaks, tol, &e1) / a;
        e1 /= a;
    }
    if (a < R) outer = integrate_split([&](double s) { return s * absv(s); }, a, R, breaks, tol, &e2);
    if (err_out) *err_out = four_pi * (e1 + e2);
    return four_pi * (inner + outer);
}

// Spherical coordinates about x: int_0^inf r dr int_{S^2} |V(x + r w)| dw.
double spherical_kato_integral(const PotentialModel& V, const Vec3& x, double tol, double* err_out)
{
    const GaussRule& gt = gauss_legendre(32);
    constexpr int nphi = 64;
    std::vector<Vec3> dirs;
    std::vector<double> wts;
    for (int i = 0; i < 32; ++i) {
        const double ct = gt.nodes[i], st = std::sqrt(1.0 - ct * ct);
        for (int k = 0; k < nphi; ++k) {
            const double ph = 2.0 * pi * k / nphi;
            dirs.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
            wts.push_back(gt.weights[i] * 2.0 * pi / nphi);
        }
    }
    auto shell = [&](double r) {
        double s = 0.0;
        for (std::size_t d = 0; d < dirs.size(); ++d) s += wts[d] * std::abs(V(x + r * dirs[d]));
        return r * s;
    };
    const double a = x.norm();
    std::vector<double> breaks;
    for (double b : V.breakpoints()) {
        breaks.push_back(std::abs(b - a));
        breaks.push_back(b + a);
    }
    if (a > 0.0) breaks.push_back(a);
    std::sort(breaks.begin(), breaks.end());
    return integrate_split(shell, 0.0, a + V.extent(), breaks, tol, err_out);
}

} // namespace

// ---------------------------------------------------------------------------

PotentialModel::PotentialModel() : PotentialModel(zero()) {}

PotentialModel::PotentialModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

PotentialModel PotentialModel::zero()
{
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::zero;
    p->name = "zero";
    p->signature = "zero";
    p->profile = [](double) { return 0.0; };
    p->env = [](double) { return 0.0; };
    p->abs_nonincreasing = true;
    p->sup_abs = 0.0;
    return PotentialModel(p);
}

PotentialModel PotentialModel::ball(double amplitude, double radius)
{
    if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "ball radius must be positive");
    if (amplitude == 0.0) return zero();
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::radial_analytic;
    p->name = "ball";
    p->signature = "ball(" + fmt(amplitude) + "," + fmt(radius) + ")";
    p->profile = [amplitude, radius](double r) { return r <= radius ? amplitude : 0.0; };
    p->env = [amplitude, radius](double r) { return r <= radius ? std::abs(amplitude) : 0.0; };
    p->extent = radius;
    p->support = radius;
    p->breakpoints = {radius};
    p->abs_nonincreasing = true;
    p->sup_abs = std::abs(amplitude);
    return PotentialModel(p);
}

PotentialModel PotentialModel::gaussian(double amplitude, double width)
{
    if (!(width > 0.0)) throw Error(ErrorKind::invalid_argument, "gaussian width must be positive");
    if (amplitude == 0.0) return zero();
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::radial_analytic;
    p->name = "gaussian";
    p->signature = "gaussian(" + fmt(amplitude) + "," + fmt(width) + ")";
    p->profile = [amplitude, width](double r) { return amplitude * std::exp(-(r * r) / (width * width)); };
    p->env = [amplitude, width](double r) { return std::abs(amplitude) * std::exp(-(r * r) / (width * width)); };
    p->extent = 7.0 * width;
    p->abs_nonincreasing = true;
    p->sup_abs = std::abs(amplitude);
    return PotentialModel(p);
}

PotentialModel PotentialModel::yukawa(double amplitude, double range)
{
    if (!(range > 0.0)) throw Error(ErrorKind::invalid_argument, "yukawa range must be positive");
    if (amplitude == 0.0) return zero();
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::radial_analytic;
    p->name = "yukawa";
    p->signature = "yukawa(" + fmt(amplitude) + "," + fmt(range) + ")";
    p->profile = [amplitude, range](double r) { return amplitude * std::exp(-r / range) / r; };
    p->env = [amplitude, range](double r) { return std::abs(amplitude) * std::exp(-r / range) / r; };
    p->extent = 40.0 * range;
    p->abs_nonincreasing = true;
    return PotentialModel(p);
}

PotentialModel PotentialModel::smooth_bump(double amplitude, double radius)
{
    if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "bump radius must be positive");
    if (amplitude == 0.0) return zero();
    auto f = [amplitude, radius](double r) {
        const double t = r / radius;
        return t < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
    };
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::radial_analytic;
    p->name = "smooth_bump";
    p->signature = "smooth_bump(" + fmt(amplitude) + "," + fmt(radius) + ")";
    p->profile = f;
    p->env = [f](double r) { return std::abs(f(r)); };
    p->extent = radius;
    p->support = radius;
    p->breakpoints = {radius};
    p->abs_nonincreasing = true;
    p->sup_abs = std::abs(amplitude);
    return PotentialModel(p);
}

PotentialModel PotentialModel::radial_tabulated(std::vector<double> r, std::vector<double> v)
{
    if (r.size() < 2 || r.size() != v.size())
        throw Error(ErrorKind::invalid_argument, "tabulated potential needs >= 2 matching (r, v) nodes");
    for (std::size_t i = 0; i + 1 < r.size(); ++i)
        if (!(r[i + 1] > r[i]) || r[i] < 0.0)
            throw Error(ErrorKind::invalid_argument, "tabulated radii must be nonnegative and increasing");
    bool decreasing = true;
    double sup = 0.0;
    std::ostringstream sig;
    sig << "tabulated(";
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i + 1 < r.size() && std::abs(v[i + 1]) > std::abs(v[i])) decreasing = false;
        sup = std::max(sup, std::abs(v[i]));
        sig << fmt(r[i]) << ":" << fmt(v[i]) << (i + 1 < r.size() ? ";" : ")");
    }
    auto f = [r, v](double x) {
        if (x > r.back()) return 0.0;
        if (x <= r.front()) return v.front();
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - r.begin()) - 1;
        const double t = (x - r[i]) / (r[i + 1] - r[i]);
        return (1.0 - t) * v[i] + t * v[i + 1];
    };
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::radial_tabulated;
    p->name = "tabulated";
    p->signature = sig.str();
    p->profile = f;
    p->env = [f](double x) { return std::abs(f(x)); };
    p->extent = r.back();
    p->support = r.back();
    p->breakpoints = {r.back()};
    if (r.size() <= 64) p->breakpoints = r;
    p->abs_nonincreasing = decreasing;
    p->sup_abs = sup;
    return PotentialModel(p);
}

PotentialModel PotentialModel::general(std::string name, std::function<double(const Vec3&)> f,
                                       std::function<double(double)> envelope, double extent,
                                       std::optional<double> support_radius)
{
    if (!(extent > 0.0)) throw Error(ErrorKind::invalid_argument, "general potential needs a positive extent");
    auto p = std::make_shared<Impl>();
    p->kind = PotentialKind::general;
    p->name = name;
    p->signature = "general(" + name + ")";
    p->field = std::move(f);
    p->env = std::move(envelope);
    p->extent = extent;
    p->support = support_radius;
    if (support_radius) p->breakpoints = {*support_radius};
    return PotentialModel(p);
}

PotentialKind PotentialModel::kind() const { return impl_->kind; }
const std::string& PotentialModel::name() const { return impl_->name; }
const std::string& PotentialModel::signature() const { return impl_->signature; }

double PotentialModel::operator()(const Vec3& x) const
{
    if (impl_->field) return impl_->field(x);
    return impl_->profile(x.norm());
}

double PotentialModel::radial_value(double r) const
{
    if (!impl_->profile) throw Error(ErrorKind::invalid_argument, "radial_value on a non-radial potential");
    return impl_->profile(r);
}

double PotentialModel::envelope(double r) const { return impl_->env(r); }
bool PotentialModel::radial() const { return static_cast<bool>(impl_->profile); }
bool PotentialModel::is_zero() const { return impl_->kind == PotentialKind::zero; }
std::optional<double> PotentialModel::support_radius() const { return impl_->support; }
double PotentialModel::extent() const { return impl_->extent; }
std::vector<double> PotentialModel::breakpoints() const { return impl_->breakpoints; }
bool PotentialModel::abs_nonincreasing() const { return radial() && impl_->abs_nonincreasing; }
std::optional<double> PotentialModel::sup_abs() const { return impl_->sup_abs; }

PotentialModel PotentialModel::scaled(double c) const
{
    if (c == 0.0 || is_zero()) return zero();
    auto p = std::make_shared<Impl>(*impl_);
    p->signature = "scaled(" + fmt(c) + "," + impl_->signature + ")";
    if (impl_->profile) {
        auto f = impl_->profile;
        p->profile = [f, c](double r) { return c * f(r); };
    }
    if (impl_->field) {
        auto f = impl_->field;
        p->field = [f, c](const Vec3& x) { return c * f(x); };
    }
    auto e = impl_->env;
    p->env = [e, c](double r) { return std::abs(c) * e(r); };
    if (impl_->sup_abs) p->sup_abs = std::abs(c) * *impl_->sup_abs;
    return PotentialModel(p);
}

PotentialModel PotentialModel::operator+(const PotentialModel& o) const
{
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    auto p = std::make_shared<Impl>();
    const auto a = impl_, b = o.impl_;
    p->name = a->name + "+" + b->name;
    p->signature = "sum(" + a->signature + "," + b->signature + ")";
    if (a->profile && b->profile) {
        p->kind = PotentialKind::radial_analytic;
        p->profile = [fa = a->profile, fb = b->profile](double r) { return fa(r) + fb(r); };
    } else {
        p->kind = PotentialKind::general;
        p->field = [a, b](const Vec3& x) {
            const double va = a->field ? a->field(x) : a->profile(x.norm());
            const double vb = b->field ? b->field(x) : b->profile(x.norm());
            return va + vb;
        };
    }
    p->env = [ea = a->env, eb = b->env](double r) { return ea(r) + eb(r); };
    p->extent = std::max(a->extent, b->extent);
    if (a->support && b->support) p->support = std::max(*a->support, *b->support);
    p->breakpoints = merge_breakpoints(a->breakpoints, b->breakpoints);
    if (a->sup_abs && b->sup_abs) p->sup_abs = *a->sup_abs + *b->sup_abs;
    return PotentialModel(p);
}

PotentialModel PotentialModel::operator-(const PotentialModel& o) const { return *this + o.scaled(-1.0); }

PotentialModel PotentialModel::truncated(double R, double M) const
{
    if (!(R > 0.0) || !(M > 0.0)) throw Error(ErrorKind::invalid_argument, "truncation needs R > 0 and M > 0");
    if (is_zero()) return *this;
    auto p = std::make_shared<Impl>(*impl_);
    p->signature = "truncated(" + fmt(R) + "," + fmt(M) + "," + impl_->signature + ")";
    p->name = impl_->name + "_eps";
    if (impl_->profile) {
        auto f = impl_->profile;
        p->profile = [f, R, M](double r) {
            if (r > R) return 0.0;
            const double v = f(r);
            return std::abs(v) <= M ? v : 0.0;
        };
    }
    if (impl_->field) {
        auto f = impl_->field;
        p->field = [f, R, M](const Vec3& x) {
            if (x.norm() > R) return 0.0;
            const double v = f(x);
            return std::abs(v) <= M ? v : 0.0;
        };
    }
    auto e = impl_->env;
    p->env = [e, R, M](double r) { return r > R ? 0.0 : std::min(e(r), M); };
    p->extent = std::min(R, impl_->extent);
    p->support = impl_->support ? std::min(R, *impl_->support) : R;
    std::vector<double> br{R};
    // radii where |v| crosses the clip level, located on a fine scan
    if (impl_->profile) {
        const int scan = 4096;
        const double top = p->extent;
        auto over = [&](double r) { return std::abs(impl_->profile(r)) > M; };
        double prev_r = top * 1e-9;
        bool prev = over(prev_r);
        for (int k = 1; k <= scan; ++k) {
            const double r = top * k / scan;
            const bool cur = over(r);
            if (cur != prev) {
                double lo = prev_r, hi = r;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (over(mid) == prev ? lo : hi) = mid;
                }
                br.push_back(0.5 * (lo + hi));
            }
            prev = cur;
            prev_r = r;
        }
    }
    p->breakpoints.clear();
    for (double b : merge_breakpoints(impl_->breakpoints, br))
        if (b <= p->extent) p->breakpoints.push_back(b);
    p->abs_nonincreasing = false;
    p->sup_abs = impl_->sup_abs ? std::min(M, *impl_->sup_abs) : M;
    return PotentialModel(p);
}

std::pair<PotentialModel, PotentialModel> PotentialModel::sign_split() const
{
    if (is_zero()) return {zero(), zero()};
    auto make = [this](double sgn) {
        auto p = std::make_shared<Impl>(*impl_);
        p->signature = (sgn > 0 ? "positive(" : "negative(") + impl_->signature + ")";
        p->name = impl_->name + (sgn > 0 ? "_plus" : "_minus");
        if (impl_->profile) {
            auto f = impl_->profile;
            p->profile = [f, sgn](double r) { return std::max(sgn * f(r), 0.0); };
        }
        if (impl_->field) {
            auto f = impl_->field;
            p->field = [f, sgn](const Vec3& x) { return std::max(sgn * f(x), 0.0); };
        }
        p->abs_nonincreasing = false;
        return PotentialModel(p);
    };
    return {make(1.0), make(-1.0)};
}

// ---------------------------------------------------------------------------

double kato_integral(const PotentialModel& V, const Vec3& x, double tol, double* error)
{
    if (V.is_zero()) {
        if (error) *error = 0.0;
        return 0.0;
    }
    double err = 0.0;
    const double value =
        V.radial() ? radial_kato_integral(V, x.norm(), tol, &err) : spherical_kato_integral(V, x, tol, &err);
    guard_kato(value, err);
    if (error) *error = err;
    return value;
}

double kato_integral_spherical(const PotentialModel& V, const Vec3& x, double tol, double* error)
{
    double err = 0.0;
    const double value = spherical_kato_integral(V, x, tol, &err);
    guard_kato(value, err);
    if (error) *error = err;
    return value;
}

KatoNormEstimate kato_norm(const PotentialModel& V, std::span<const Vec3> centers, double tol)
{
    KatoNormEstimate est;
    if (V.is_zero()) {
        est.candidate_centers = centers.empty() ? 1 : centers.size();
        return est;
    }
    auto consider = [&](const Vec3& c) {
        double err = 0.0;
        const double v = kato_integral(V, c, tol, &err);
        ++est.candidate_centers;
        est.quadrature_error = std::max(est.quadrature_error, err);
        if (v > est.value || est.candidate_centers == 1) {
            est.value = v;
            est.argmax = c;
        }
        return v;
    };

    if (!centers.empty()) {
        est.method = KatoNormEstimate::Method::numeric_sup;
        for (const Vec3& c : centers) consider(c);
        return est;
    }

    // kappa'(a) = -A(a)/a^2 <= 0 for radial |V|: the sup sits at the origin
    if (V.radial()) {
        est.method = KatoNormEstimate::Method::closed_form;
        consider(Vec3::Zero());
        return est;
    }

    est.method = KatoNormEstimate::Method::numeric_sup;
    // non-radial: 5^3 lattice over the extent, then compass search around the argmax
    const double e = V.extent();
    for (int i = -2; i <= 2; ++i)
        for (int j = -2; j <= 2; ++j)
            for (int k = -2; k <= 2; ++k) consider(Vec3(i, j, k) * (0.5 * e));
    double step = 0.25 * e;
    for (int round = 0; round < 8; ++round) {
        bool improved = true;
        while (improved) {
            improved = false;
            const Vec3 base = est.argmax;
            const double base_v = est.value;
            for (int axis = 0; axis < 3; ++axis)
                for (int sgn : {-1, 1}) {
                    Vec3 c = base;
                    c[axis] += sgn * step;
                    consider(c);
                }
            improved = est.value > base_v;
        }
        step *= 0.5;
    }
    return est;
}

K0Truncation truncate_to_K0(const PotentialModel& V, double eps)
{
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "truncation tolerance eps must be positive");
    K0Truncation out;
    if (V.is_zero()) {
        out.truncated = V;
        return out;
    }
    if (V.support_radius() && V.sup_abs()) {
        out.truncated = V;
        out.radius = *V.support_radius();
        out.clip = *V.sup_abs();
        return out;
    }
    const double inf = std::numeric_limits<double>::infinity();
    auto tail_of = [&](double R, double M) {
        const double Rr = std::isfinite(R) ? R : 2.0 * V.extent() + 1.0;
        const double Mm = std::isfinite(M) ? M : std::numeric_limits<double>::max();
        const PotentialModel rest = V - V.truncated(Rr, Mm);
        return kato_norm(rest, {}, 1e-9).value;
    };

    double R = V.support_radius().value_or(inf);
    if (!V.support_radius()) {
        for (int k = 12; k >= 0; --k) {
            const double cand = V.extent() * std::ldexp(1.0, -k);
            if (tail_of(cand, inf) <= 0.5 * eps) {
                R = cand;
                break;
            }
        }
    }
    double M = V.sup_abs().value_or(inf);
    if (!V.sup_abs()) {
        for (int k = -10; k <= 60; ++k) {
            const double cand = std::ldexp(1.0, k);
            if (tail_of(inf, cand) <= 0.5 * eps) {
                M = cand;
                break;
            }
        }
    }
    if (!std::isfinite(R) || !std::isfinite(M)) {
        const double best = tail_of(std::isfinite(R) ? R : V.extent(), std::isfinite(M) ? M : std::ldexp(1.0, 60));
        throw Error(ErrorKind::truncation_failed,
                    "no (R, M) reaches Kato tail <= " + fmt(eps) + "; best achieved " + fmt(best));
    }
    out.radius = R;
    out.clip = M;
    out.truncated = V.truncated(R, M);
    out.tail = tail_of(R, M);
    if (out.tail > eps)
        throw Error(ErrorKind::truncation_failed,
                    "combined Kato tail " + fmt(out.tail) + " exceeds eps = " + fmt(eps));
    return out;
}

// ---------------------------------------------------------------------------

RadialTables::RadialTables(std::function<double(double)> profile, double extent, std::vector<double> breakpoints,
                           int cells)
    : profile_(std::move(profile))
{
    if (!(extent > 0.0)) return;
    r_.reserve(cells + breakpoints.size() + 1);
    for (int k = 0; k <= cells; ++k) r_.push_back(extent * k / cells);
    for (double b : breakpoints)
        if (b > 0.0 && b < extent) r_.push_back(b);
    std::sort(r_.begin(), r_.end());
    r_.erase(std::unique(r_.begin(), r_.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             r_.end());

    const std::size_t n = r_.size();
    std::vector<double> a_cell(n - 1), b_cell(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        a_cell[i] = gauss8([&](double s) { return s * s * profile_(s); }, r_[i], r_[i + 1]);
        b_cell[i] = gauss8([&](double s) { return s * profile_(s); }, r_[i], r_[i + 1]);
    }
    a_cum_.assign(n, 0.0);
    b_cum_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) a_cum_[i] = a_cum_[i - 1] + a_cell[i - 1];
    for (std::size_t i = n - 1; i-- > 0;) b_cum_[i] = b_cum_[i + 1] + b_cell[i];
}

double RadialTables::partial_cell(std::size_t cell, double r, bool weight_r2) const
{
    if (weight_r2) return gauss8([&](double s) { return s * s * profile_(s); }, r_[cell], r);
    return gauss8([&](double s) { return s * profile_(s); }, r_[cell], r);
}

double RadialTables::A(double r) const
{
    if (r_.empty() || r <= 0.0) return 0.0;
    if (r >= r_.back()) return a_cum_.back();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
    return a_cum_[i] + partial_cell(i, r, true);
}

double RadialTables::B(double r) const
{
    if (r_.empty() || r >= r_.back()) return 0.0;
    if (r <= 0.0) return b_cum_.front();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
    return b_cum_[i] - partial_cell(i, r, false);
}

double RadialTables::kappa(double a) const
{
    if (r_.empty()) return 0.0;
    if (a <= 0.0) return b_cum_.front();
    return A(a) / a + B(a);
}

double RadialTables::invert_A(double target) const
{
    if (target <= 0.0) return 0.0;
    if (target >= a_cum_.back()) return r_.back();
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(a_cum_.begin(), a_cum_.end(), target) - a_cum_.begin()) - 1;
    const double span = a_cum_[i + 1] - a_cum_[i];
    const double t = span > 0.0 ? (target - a_cum_[i]) / span : 0.0;
    return r_[i] + t * (r_[i + 1] - r_[i]);
}

double RadialTables::invert_B(double target) const
{
    if (target <= 0.0) return r_.back();
    if (target >= b_cum_.front()) return 0.0;
    // b_cum_ is nonincreasing: first index with b_cum_ < target
    const auto it = std::upper_bound(b_cum_.begin(), b_cum_.end(), target, std::greater<double>());
    const std::size_t i = static_cast<std::size_t>(it - b_cum_.begin()) - 1;
    const double span = b_cum_[i] - b_cum_[i + 1];
    const double t = span > 0.0 ? (b_cum_[i] - target) / span : 0.0;
    return r_[i] + t * (r_[i + 1] - r_[i]);
}

std::vector<double> RadialTables::apply_kato(std::span<const double> f) const
{
    const std::size_t n = r_.size();
    if (f.size() != n) throw Error(ErrorKind::invalid_argument, "apply_kato: one value per node required");
    std::vector<double> a_cum(n, 0.0), b_cum(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double r0 = r_[i], h = r_[i + 1] - r_[i];
        auto fl = [&](double s) { return f[i] + (f[i + 1] - f[i]) * (s - r0) / h; };
        a_cum[i + 1] = a_cum[i] + gauss8([&](double s) { return s * s * profile_(s) * fl(s); }, r0, r_[i + 1]);
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        const double r0 = r_[i], h = r_[i + 1] - r_[i];
        auto fl = [&](double s) { return f[i] + (f[i + 1] - f[i]) * (s - r0) / h; };
        b_cum[i] = b_cum[i + 1] + gauss8([&](double s) { return s * profile_(s) * fl(s); }, r0, r_[i + 1]);
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (r_[i] > 0.0 ? a_cum[i] / r_[i] : 0.0) + b_cum[i];
    return g;
}

// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
    auto splitmix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    return h;
}

ChainSampler::ChainSampler(const PotentialModel& V) : V_(V)
{
    if (V.is_zero()) return;
    tables_ = RadialTables([V](double r) { return V.envelope(r); }, V.extent(), V.breakpoints());
}

double ChainSampler::ratio(const Vec3& y) const
{
    const double e = V_.envelope(y.norm());
    return e > 0.0 ? V_(y) / e : 0.0;
}

Vec3 ChainSampler::sample(const Vec3& x, Rng& rng) const
{
    const double a = x.norm();
    const double inner = a > 0.0 ? tables_.A(a) / a : 0.0;
    const double outer = tables_.B(a);
    const double u = rng.uniform() * (inner + outer);
    double r;
    if (u < inner) {
        r = std::min(tables_.invert_A(u * a), a);
    } else {
        r = std::max(tables_.invert_B(outer - (u - inner)), a);
    }
    const double phi = 2.0 * pi * rng.uniform();
    if (a == 0.0) {
        const double mu = 2.0 * rng.uniform() - 1.0;
        const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        return r * Vec3(st * std::cos(phi), st * std::sin(phi), mu);
    }
    // |x - y| is uniform on [|r - a|, r + a] under the 1/|x - y| angular weight
    const double s = r + a - rng.uniform() * 2.0 * std::min(r, a);
    const double mu = r > 0.0 ? std::clamp((r * r + a * a - s * s) / (2.0 * r * a), -1.0, 1.0) : 1.0;
    const Vec3 e = x / a;
    const Vec3 helper = std::abs(e.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = e.cross(helper).normalized();
    const Vec3 e2 = e.cross(e1);
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    return r * (mu * e + st * (std::cos(phi) * e1 + std::sin(phi) * e2));
}

ChainIntegralResult chain_integral_bound(const PotentialModel& V, int n, std::size_t samples, std::uint64_t seed,
                                         double tolerance)
{
    if (n < 0) throw Error(ErrorKind::invalid_argument, "chain length n must be >= 0");
    ChainIntegralResult res;
    res.n = n;
    if (n == 0) {
        res.value = res.mc_value = res.bound = 1.0;
        return res;
    }
    if (V.is_zero()) return res;

    const double q = kato_norm(V).value / four_pi;
    res.bound = std::pow(q, n);

    const ChainSampler sampler(V);
    const RadialTables& tab = sampler.tables();
    if (V.radial()) {
        std::vector<double> f(tab.nodes().size(), 1.0);
        for (int k = 0; k < n; ++k) f = tab.apply_kato(f);
        const auto it = std::max_element(f.begin(), f.end());
        res.value = *it;
        res.center = Vec3(0.0, 0.0, tab.nodes()[static_cast<std::size_t>(it - f.begin())]);
    }

    if (samples > 0) {
        constexpr std::size_t block = 1024;
        const std::size_t nblocks = (samples + block - 1) / block;
        std::vector<double> sum(nblocks, 0.0), sum2(nblocks, 0.0);
#pragma omp parallel for schedule(static)
        for (std::size_t b = 0; b < nblocks; ++b) {
            Rng rng(mix_seed(seed, 0x6368u, static_cast<std::uint64_t>(n), b));
            const std::size_t count = std::min(block, samples - b * block);
            for (std::size_t s = 0; s < count; ++s) {
                Vec3 x = res.center;
                double w = 1.0;
                for (int k = 0; k < n; ++k) {
                    w *= sampler.kappa(x);
                    x = sampler.sample(x, rng);
                    w *= std::abs(sampler.ratio(x));
                }
                sum[b] += w;
                sum2[b] += w * w;
            }
        }
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t b = 0; b < nblocks; ++b) {
            s1 += sum[b];
            s2 += sum2[b];
        }
        const double mean = s1 / samples;
        const double var = std::max(0.0, s2 / samples - mean * mean);
        res.mc_value = mean;
        res.mc_stderr = std::sqrt(var / samples);
        if (!V.radial()) res.value = res.mc_value;
    }

    const double limit = res.bound * (1.0 + tolerance);
    if (res.value > limit || res.mc_value > limit + 3.0 * res.mc_stderr)
        throw Error(ErrorKind::invariant_violation,
                    "chain integral n = " + std::to_string(n) + " estimate " + fmt(std::max(res.value, res.mc_value)) +
                        " exceeds (||V||_K / 4 pi)^n = " + fmt(res.bound));
    return res;
}

} // namespace lpk
