#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/numerics.hpp"
#include "sonar/profile.hpp"

namespace sonar {

struct FractionalOrder {
    double nu = 0;

    explicit FractionalOrder(double v) : nu(v) {
        if (!(v >= 0) || !std::isfinite(v)) throw DomainError("fractional order must be a finite value >= 0");
    }
    // smallest integer >= nu, tolerant of round-off in nu
    int ceil() const { return static_cast<int>(std::ceil(nu - 1e-12)); }
};

// 2 pi^nu / Gamma(nu), the normalisation of I^nu.
inline double frac_constant(double nu) { return 2 * std::pow(std::numbers::pi, nu) / std::tgamma(nu); }

// I^nu[g](y) = (2 pi^nu / Gamma(nu)) y int_0^y (y^2 - s^2)^(nu - 1) g(s) ds,
// for any callable g.
template <class G>
double frac_integral_at(G&& g, double y, FractionalOrder order, const QuadratureSpec& spec = {}) {
    if (order.nu == 0) return g(y);
    if (!(y >= 0)) throw DomainError("frac_integral: y must be >= 0");
    return frac_constant(order.nu) * y * integrate_endpoint_singular(g, y, order.nu - 1, spec);
}

inline RadialProfile frac_integral(const RadialProfile& g, FractionalOrder order, const QuadratureSpec& spec = {}) {
    if (order.nu == 0) return g;
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = frac_integral_at(g, g.grid()[i], order, spec);
    return RadialProfile(g.grid(), std::move(out));
}

// Same operator evaluated off the profile grid.
inline std::vector<double> frac_integral(const RadialProfile& g, FractionalOrder order, const std::vector<double>& at,
                                         const QuadratureSpec& spec = {}) {
    std::vector<double> out(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) out[i] = frac_integral_at(g, at[i], order, spec);
    return out;
}

// D_1[g](y) = (1 / 2 pi) d/dy [g(y) / y].
inline RadialProfile frac_d1(const RadialProfile& g) {
    const auto& y = g.grid();
    const auto& v = g.values();
    const std::size_t n = y.size();
    if (n < 5) throw DomainError("frac_d1: needs at least 5 grid points");
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = y[i] > 0 ? v[i] / y[i] : 0.0;
    if (y[0] == 0) {
        double scale = 0;
        for (double a : v) scale = std::max(scale, std::abs(a));
        if (std::abs(v[0]) > 1e-6 * scale)
            throw DomainError("frac_d1: division at zero (g(0) != 0 on a grid starting at 0)");
        // g/y extends continuously to y = 0 by g'(0)
        q[0] = detail::differentiate(std::span<const double>(y.data(), 5), std::span<const double>(v.data(), 5))[0];
    }
    auto d = detail::differentiate(y, q);
    for (double& a : d) a /= 2 * std::numbers::pi;
    return RadialProfile(y, std::move(d));
}

// D^nu = D_1^ceil(nu) o I^(ceil(nu) - nu).
inline RadialProfile frac_derivative(const RadialProfile& g, FractionalOrder order, const QuadratureSpec& spec = {}) {
    const int m = order.ceil();
    if (m == 0) return g;
    RadialProfile h = frac_integral(g, FractionalOrder(std::max(0.0, m - order.nu)), spec);
    for (int k = 0; k < m; ++k) h = frac_d1(h);
    return h;
}

// V[g](beta) = int_0^beta 2 sin(beta) g(theta) / sqrt(sin^2 beta - sin^2 theta) dtheta,
// computed with sin(theta) = sin(beta) cos(d). In d the integrand is
// g(theta) / cos(theta) with cos^2 theta = cos^2 beta + sin^2 beta sin^2 d, which
// varies on the scale cos(beta) near d = 0; panels are graded to match.
template <class G>
double op_v_at(G&& g, double beta, const QuadratureSpec& spec = {}) {
    const double hp = std::numbers::pi / 2;
    if (!(beta > 0 && beta < hp)) throw DomainError("op_v: beta must lie in (0, pi/2)");
    const double sb = std::sin(beta), cb = std::cos(beta);
    auto integrand = [&](double d) {
        const double sd = std::sin(d);
        const double ct = std::sqrt(cb * cb + sb * sb * sd * sd);
        return g(std::atan2(sb * std::cos(d), ct)) / ct;
    };
    const int nodes = spec.nodes_per_panel;
    const double max_width = hp / spec.panels;
    double total = 0, lo = 0;
    for (double hi = std::min(cb, max_width); lo < hp; hi = std::min({hp, lo + max_width, 2 * hi})) {
        total += integrate_panels(integrand, lo, hi, 1, nodes);
        lo = hi;
    }
    return 2 * sb * total;
}

inline AngularProfile op_v(const AngularProfile& g, const QuadratureSpec& spec = {}) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = op_v_at(g, g.grid()[i], spec);
    return AngularProfile(g.grid(), std::move(out));
}

// W = V^-1 = K o D^(1/2) o Q^-1 with Q[h](beta) = h(sin beta) and
// K[h](beta) = cos(beta) h(sin beta). D^(1/2) = D_1 o I^(1/2) is applied in
// s = sin(beta), where d/ds = (1 / cos beta) d/dbeta and the 1/cos cancels
// against K. The half-integral I^(1/2)[g o asin](sin beta) equals
// V[g cos](beta), which keeps the quadrature in the angle variable.
// g is any callable on (0, pi/2); the result is sampled on beta.
template <class G>
std::vector<double> op_w_on(G&& g, const std::vector<double>& beta, const QuadratureSpec& spec = {}) {
    const std::size_t n = beta.size();
    if (n < 5) throw DomainError("op_w: needs at least 5 grid points");
    RadialProfile::check_increasing(beta, "op_w");
    if (!(beta.front() > 0) || !(beta.back() < std::numbers::pi / 2)) throw DomainError("op_w: beta must lie in (0, pi/2)");
    auto gcos = [&](double t) { return g(t) * std::cos(t); };
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = op_v_at(gcos, beta[i], spec) / std::sin(beta[i]);
    auto d = detail::differentiate(beta, q);
    for (double& a : d) a /= 2 * std::numbers::pi;
    return d;
}

// W[g](beta) from the 5-point stencil beta + j h, j = -2..2.
template <class G>
double op_w_point(G&& g, double beta, double h, const QuadratureSpec& spec = {}) {
    if (!(beta - 2 * h > 0 && beta + 2 * h < std::numbers::pi / 2))
        throw DomainError("op_w: stencil around beta leaves (0, pi/2)");
    auto gcos = [&](double t) { return g(t) * std::cos(t); };
    std::array<double, 5> x{}, q{};
    for (int j = 0; j < 5; ++j) {
        x[j] = beta + (j - 2) * h;
        q[j] = op_v_at(gcos, x[j], spec) / std::sin(x[j]);
    }
    const auto w = detail::derivative_weights(beta, x);
    double d = 0;
    for (int j = 0; j < 5; ++j) d += w[j] * q[j];
    return d / (2 * std::numbers::pi);
}

inline AngularProfile op_w(const AngularProfile& g, const QuadratureSpec& spec = {}) {
    return AngularProfile(g.grid(), op_w_on(g, g.grid(), spec));
}

}  // namespace sonar
