#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lpk/common.hpp"
#include "lpk/jet.hpp"

namespace lpk {

/// Smooth step h(t): 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);
Jet smooth_step(const Jet& t);

/// Dyadic bump chi(lambda) = Theta(lambda) - Theta(2 lambda) with Theta = h(2 - .),
/// optionally scaled by an amplitude and by lambda^{-s} (Sobolev-modified profile).
///
/// chi vanishes outside [1/2, 2] exactly, and sum_k chi(lambda / 2^k) telescopes to 1.
class MultiplierProfile {
public:
    MultiplierProfile() = default;
    MultiplierProfile(double amplitude, std::optional<double> sobolev_s);

    double amplitude() const { return amplitude_; }
    const std::optional<double>& sobolev_s() const { return sobolev_s_; }
    int derivative_order_max() const { return derivative_order_max_; }

    double chi(double lambda) const;
    /// chi_N(lambda) = chi(lambda / N)
    double chi_scaled(double lambda, double N) const { return chi(lambda / N); }
    Jet chi_jet(double lambda) const;
    double chi_derivative(double lambda, int k) const;

    /// phi(lambda): odd extension of lambda chi(lambda) 1_{lambda >= 0}.
    double phi(double lambda) const;

    std::string describe() const;

private:
    double amplitude_ = 1.0;
    std::optional<double> sobolev_s_;
    int derivative_order_max_ = 8;
};

MultiplierProfile make_bump();

/// sum_{k <= m} int |chi^{(k)}| over [1/2, 2].
double sobolev_W_m1_norm(const MultiplierProfile& profile, int m);

/// int_0^inf u^p chi(u) du
double chi_moment(const MultiplierProfile& profile, int p);

/// Sine transform F_N(sigma) = int phi_N(lambda) sin(lambda sigma) d lambda of the odd profile,
/// so that the (no-2pi) Fourier transform of phi_N is i F_N. Uses F_N(sigma) = N F_1(N sigma).
class OddProfileTransform {
public:
    explicit OddProfileTransform(MultiplierProfile profile, double t_max = 256.0, double dt = 1.0 / 64.0);

    const MultiplierProfile& profile() const { return profile_; }

    /// F_1(t) by panel Gauss quadrature, >= 8 nodes per oscillation period.
    double F1_direct(double t) const;
    /// F_1(t) from the cubic Hermite table (falls back to direct quadrature beyond t_max).
    double F1(double t) const;
    double F(double N, double sigma) const { return N * F1(N * sigma); }
    double F_direct(double N, double sigma) const { return N * F1_direct(N * sigma); }

    /// int phi_N(lambda) cos(lambda sigma) d lambda over the full line (vanishes by oddness).
    double cosine_moment(double N, double sigma) const;
    /// ||phi_N||_{L^1(R)}
    double phi_l1(double N) const;

    /// sup_{t' >= t} |F_1(t')|, monotone nonincreasing envelope.
    double F1_tail_sup(double t) const;

    double t_max() const { return t_max_; }

    struct Sample {
        double N, sigma, F;
    };
    /// Geometric grid N sigma in [1e-3, 1e3], 40 points per decade.
    std::vector<Sample> tabulate(double N) const;

private:
    MultiplierProfile profile_;
    double t_max_;
    double dt_;
    std::vector<double> u_nodes_;   // quadrature nodes on [1/2, 2]
    std::vector<double> u_weights_; // weights times 2 u chi(u)
    std::vector<double> table_f_;
    std::vector<double> table_df_;
    std::vector<double> tail_sup_;
};

/// Translated partition psi(. - j delta), j >= 0, with supp psi in [-2 delta/3, 2 delta/3],
/// psi = 1 on |lambda| <= delta/3 and sum_{j >= 0} psi(lambda - j delta) = 1 on [0, inf).
class TranslatedPartition {
public:
    explicit TranslatedPartition(double delta);

    double delta() const { return delta_; }
    double psi(double lambda) const;
    double center(int j) const { return j * delta_; }
    double weight(int j, double lambda) const { return psi(lambda - center(j)); }
    /// Half-width of supp psi.
    double support_radius() const { return support_half_width_ * delta_; }

    /// Indices j with psi(. - j delta) not identically zero on (N/2, 2N).
    std::pair<int, int> active_window(double N) const;

private:
    double delta_;
    static constexpr double ramp_ = 1.0 / 6.0;
    static constexpr double support_half_width_ = 0.5 + ramp_;
};

TranslatedPartition make_translated_partition(double delta);

} // namespace lpk
