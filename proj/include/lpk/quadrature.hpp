#pragma once

#include <functional>
#include <span>
#include <vector>

namespace lpk {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached Gauss-Legendre rule with n nodes (Newton iteration on P_n).
const GaussRule& gauss_legendre(int n);

/// Nodes and weights of a composite rule: `panels` equal panels on [a, b], `order` nodes each.
struct PanelRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

PanelRule composite_gauss(double a, double b, int panels, int order);

/// Composite rule over consecutive breakpoints; each interval gets `panels_per_interval` panels.
PanelRule composite_gauss(std::span<const double> breakpoints, int panels_per_interval, int order);

/// Adaptive Gauss-Kronrod (15-point) on [a, b]; `error` receives the estimate when non-null.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* error = nullptr, int max_depth = 30);

/// Adaptive integral over [a, inf) via the substitution r = a + t / (1 - t).
double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol,
                             double* error = nullptr);

} // namespace lpk
