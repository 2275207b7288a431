#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sonar/error.hpp"

namespace sonar {

// Knobs for every integral in the library. Defaults meet the acceptance
// tolerances on the canonical phantoms.
struct QuadratureSpec {
    int panels = 8;                 // Gauss-Legendre panels per unit length
    int nodes_per_panel = 16;
    double truncation = 10.0;       // half-width of generic centerset integrals
    double limit_base = 0.0;        // first radius of the tangent-sphere limit; <= 0 means 8x support radius
    double limit_ratio = 2.0;
    int limit_steps = 4;
    bool singular_substitution = true;
    int angular_points = 128;       // samples across (0, pi/2) for angular profiles
    double profile_spacing = 1.0 / 64.0;  // spacing of radial profiles built internally

    void validate() const {
        if (panels < 1) throw DomainError("quadrature: panels must be >= 1");
        if (nodes_per_panel < 2 || nodes_per_panel > 64)
            throw DomainError("quadrature: nodes_per_panel must be in [2, 64]");
        if (!(truncation > 0)) throw DomainError("quadrature: truncation must be positive");
        if (limit_steps < 2) throw DomainError("quadrature: limit_steps must be >= 2");
        if (!(limit_ratio > 1)) throw DomainError("quadrature: limit_ratio must exceed 1");
        if (angular_points < 8) throw DomainError("quadrature: angular_points must be >= 8");
        if (!(profile_spacing > 0)) throw DomainError("quadrature: profile_spacing must be positive");
    }
};

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

namespace detail {

inline GaussRule make_gauss_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1, p1 = 0;
        for (int j = 0; j < n; ++j) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1) * z * p1 - j * p2) / (j + 1);
        }
        dp = n * (z * p0 - p1) / (z * z - 1);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
    }
    return r;
}

inline std::string node_message(double x) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite integrand value at node " << x;
    return os.str();
}

}  // namespace detail

// Gauss-Legendre rule with n nodes, 1 <= n <= 64. Rules are built once.
inline const GaussRule& gauss_legendre(int n) {
    static const std::array<GaussRule, 65> rules = [] {
        std::array<GaussRule, 65> r;
        for (int k = 1; k <= 64; ++k) r[k] = detail::make_gauss_rule(k);
        return r;
    }();
    if (n < 1 || n > 64) throw DomainError("gauss_legendre: node count must be in [1, 64]");
    return rules[n];
}

inline int panel_count(const QuadratureSpec& spec, double length) {
    double k = std::ceil(spec.panels * length - 1e-9);
    return static_cast<int>(std::clamp(k, 1.0, 1e6));
}

// Composite Gauss-Legendre over [a, b] with a fixed number of equal panels.
template <class F>
double integrate_panels(F&& f, double a, double b, int npanels, int nodes) {
    const GaussRule& rule = gauss_legendre(nodes);
    const double h = (b - a) / npanels;
    double total = 0;
    for (int k = 0; k < npanels; ++k) {
        const double mid = a + (k + 0.5) * h;
        double s = 0;
        for (int i = 0; i < nodes; ++i) {
            const double x = mid + 0.5 * h * rule.x[i];
            const double v = f(x);
            if (!std::isfinite(v)) throw NumericalError(detail::node_message(x));
            s += rule.w[i] * v;
        }
        total += 0.5 * h * s;
    }
    return total;
}

template <class F>
double integrate_1d(F&& f, double a, double b, const QuadratureSpec& spec) {
    if (!(a <= b)) throw DomainError("integrate_1d: requires a <= b");
    if (a == b) return 0;
    return integrate_panels(f, a, b, panel_count(spec, b - a), spec.nodes_per_panel);
}

namespace detail {

// Integral over d in [0, len] of f(d), where f behaves like d^power near 0.
// Panels are graded geometrically toward d = 0 when power is not a
// nonnegative integer. Working in the distance d keeps nodes close to the
// singular endpoint exactly representable.
template <class F>
double integrate_graded(F&& f, double len, double power, int npanels, int nodes) {
    const bool smooth = power >= 0 && std::abs(power - std::round(power)) < 1e-12;
    if (smooth) return integrate_panels(f, 0, len, npanels, nodes);
    const double h = len / npanels;
    double total = npanels > 1 ? integrate_panels(f, h, len, npanels - 1, nodes) : 0.0;
    constexpr double ratio = 0.15;
    // stop once the remaining piece, of order width^(1 + power), is below 1e-17
    const int levels = std::clamp(
        static_cast<int>(std::ceil(std::log(1e-17) / ((1 + power) * std::log(ratio)))) + 1, 1, 200);
    double width = h;
    for (int k = 0; k < levels; ++k) {
        const double next = width * ratio;
        total += integrate_panels(f, next, width, 1, nodes);
        width = next;
    }
    return total;
}

}  // namespace detail

// Computes the integral of (y^2 - s^2)^exponent g(s) over [0, y].
template <class G>
double integrate_endpoint_singular(G&& g, double y, double exponent, const QuadratureSpec& spec) {
    if (!(exponent > -1)) throw DomainError("integrate_endpoint_singular: exponent must exceed -1");
    if (!(y >= 0)) throw DomainError("integrate_endpoint_singular: requires y >= 0");
    if (y == 0) return 0;
    const double half_pi = std::numbers::pi / 2;
    if (spec.singular_substitution) {
        // s = y sin t: (y^2 - s^2)^e ds = y^(2e+1) cos^(2e+1) t dt; with
        // d = pi/2 - t, cos t = sin d and sin t = cos d
        const double power = 2 * exponent + 1;
        const int np = panel_count(spec, half_pi * std::max(y, 1.0));
        auto integrand = [&](double d) {
            const double c = std::sin(d);
            const double w = c > 0 ? std::pow(c, power) : 0.0;
            return w == 0 ? 0.0 : w * g(y * std::cos(d));
        };
        return std::pow(y, power) *
               detail::integrate_graded(integrand, half_pi, power, np, spec.nodes_per_panel);
    }
    // plain form in d = y - s
    auto integrand = [&](double d) {
        const double q = d * (2 * y - d);
        return q > 0 ? std::pow(q, exponent) * g(y - d) : 0.0;
    };
    return detail::integrate_graded(integrand, y, exponent, panel_count(spec, y), spec.nodes_per_panel);
}

// Surface area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
    if (n < 1) throw DimensionError("sphere_area: n must be >= 1");
    return 2 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// Integral of g over S^{n-1}; g receives the point as a span of n coordinates.
template <class G>
double integrate_unit_sphere(G&& g, int n, const QuadratureSpec& spec) {
    const double two_pi = 2 * std::numbers::pi;
    if (n == 2) {
        return integrate_1d(
            [&](double t) {
                const std::array<double, 2> p{std::cos(t), std::sin(t)};
                return g(std::span<const double>(p));
            },
            0, two_pi, spec);
    }
    if (n == 3) {
        return integrate_1d(
            [&](double phi) {
                const double sp = std::sin(phi), cp = std::cos(phi);
                return sp * integrate_1d(
                                [&](double psi) {
                                    const std::array<double, 3> p{sp * std::cos(psi),
                                                                  sp * std::sin(psi), cp};
                                    return g(std::span<const double>(p));
                                },
                                0, two_pi, spec);
            },
            0, std::numbers::pi, spec);
    }
    throw DimensionError("integrate_unit_sphere: unsupported dimension " + std::to_string(n));
}

struct LimitEstimate {
    double value;        // extrapolated limit
    double last_raw;     // last sample
    double uncertainty;  // |last_raw - value|
};

// One Richardson step under v_k = v + c / s_k using the last two samples.
inline LimitEstimate extrapolate_limit(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw DomainError("extrapolate_limit: needs at least 2 samples");
    for (std::size_t k = 0; k < samples.size(); ++k) {
        if (!(samples[k].first > 0)) throw DomainError("extrapolate_limit: s_k must be positive");
        if (k > 0 && !(samples[k].first > samples[k - 1].first))
            throw DomainError("extrapolate_limit: s_k must increase");
    }
    const auto [s1, v1] = samples[samples.size() - 2];
    const auto [s2, v2] = samples[samples.size() - 1];
    const double v = (s2 * v2 - s1 * v1) / (s2 - s1);
    return {v, v2, std::abs(v2 - v)};
}

inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw DomainError("linspace: count must be >= 1");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
    out[n - 1] = b;
    return out;
}

namespace detail {

// Local cubic Lagrange interpolation; the 4-point stencil is clamped at the
// ends, so points outside the grid are extrapolated from the edge cells.
inline double interpolate_cubic(std::span<const double> grid, std::span<const double> values,
                                double x) {
    const std::size_t n = grid.size();
    if (n == 0) return 0;
    if (n == 1) return values[0];
    const std::size_t m = std::min<std::size_t>(4, n);
    std::size_t j = std::upper_bound(grid.begin(), grid.end(), x) - grid.begin();
    std::ptrdiff_t start = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(m / 2);
    start = std::clamp<std::ptrdiff_t>(start, 0, static_cast<std::ptrdiff_t>(n - m));
    double sum = 0;
    for (std::size_t a = 0; a < m; ++a) {
        double l = 1;
        const double xa = grid[start + a];
        for (std::size_t b = 0; b < m; ++b)
            if (b != a) l *= (x - grid[start + b]) / (xa - grid[start + b]);
        sum += l * values[start + a];
    }
    return sum;
}

// First-derivative weights at z: derivative of the Lagrange basis on nodes x.
template <std::size_t N>
std::array<double, N> derivative_weights(double z, const std::array<double, N>& x) {
    std::array<double, N> w{};
    for (std::size_t k = 0; k < N; ++k) {
        double sum = 0;
        for (std::size_t m = 0; m < N; ++m) {
            if (m == k) continue;
            double prod = 1 / (x[k] - x[m]);
            for (std::size_t l = 0; l < N; ++l)
                if (l != k && l != m) prod *= (z - x[l]) / (x[k] - x[l]);
            sum += prod;
        }
        w[k] = sum;
    }
    return w;
}

// d/dx of sampled values: 5-point stencils, centred inside, one-sided at edges.
inline std::vector<double> differentiate(std::span<const double> grid, std::span<const double> values) {
    const std::size_t n = grid.size();
    if (n < 5) throw DomainError("differentiate: needs at least 5 grid points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t s = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 2, 0,
                                                         static_cast<std::ptrdiff_t>(n) - 5);
        std::array<double, 5> x{};
        for (std::size_t k = 0; k < 5; ++k) x[k] = grid[s + k];
        const auto w = derivative_weights(grid[i], x);
        double d = 0;
        for (std::size_t k = 0; k < 5; ++k) d += w[k] * values[s + k];
        out[i] = d;
    }
    return out;
}

}  // namespace detail

}  // namespace sonar
