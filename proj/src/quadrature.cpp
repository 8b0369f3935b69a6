#include "lpk/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lpk/common.hpp"

namespace lpk {

namespace {

GaussRule build_rule(int n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    if (n < 1) throw Error(ErrorKind::invalid_argument, "gauss_legendre: n must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

PanelRule composite_gauss(double a, double b, int panels, int order)
{
    const double bp[2] = {a, b};
    return composite_gauss(std::span<const double>(bp, 2), panels, order);
}

PanelRule composite_gauss(std::span<const double> breakpoints, int panels_per_interval, int order)
{
    const GaussRule& g = gauss_legendre(order);
    PanelRule out;
    for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
        const double a = breakpoints[k];
        const double b = breakpoints[k + 1];
        if (!(b > a)) continue;
        const double h = (b - a) / panels_per_interval;
        for (int p = 0; p < panels_per_interval; ++p) {
            const double mid = a + (p + 0.5) * h;
            for (int i = 0; i < order; ++i) {
                out.nodes.push_back(mid + 0.5 * h * g.nodes[i]);
                out.weights.push_back(0.5 * h * g.weights[i]);
            }
        }
    }
    return out;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* error, int max_depth)
{
    if (!(b > a)) {
        if (error) *error = 0.0;
        return 0.0;
    }
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, static_cast<unsigned>(max_depth), tol, &err);
    if (error) *error = err;
    return value;
}

double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol, double* error)
{
    auto g = [&](double t) {
        if (t >= 1.0) return 0.0;
        const double s = 1.0 - t;
        return f(a + t / s) / (s * s);
    };
    return integrate_adaptive(g, 0.0, 1.0, tol, error);
}

} // namespace lpk
