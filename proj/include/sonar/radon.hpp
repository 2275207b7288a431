#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/format.hpp"
#include "sonar/numerics.hpp"
#include "sonar/phantom.hpp"
#include "sonar/sonar.hpp"

namespace sonar {

// Unit vector in the centerset R^{n-1}: a sign (+-1) when n = 2, a point of
// the unit circle when n = 3.
struct UnitVector {
    int dim = 1;
    std::array<double, 2> c{1, 0};

    static UnitVector sign(double s) {
        if (s != 1 && s != -1) throw DomainError("direction in R^1 must be +1 or -1");
        return {1, {s, 0}};
    }
    static UnitVector angle(double phi) { return {2, {std::cos(phi), std::sin(phi)}}; }
    static UnitVector of(std::span<const double> v) {
        if (v.size() == 1) return sign(v[0]);
        if (v.size() != 2) throw DimensionError("direction must have 1 or 2 components");
        UnitVector u{2, {v[0], v[1]}};
        u.validate();
        return u;
    }

    void validate() const {
        const double n2 = dim == 1 ? c[0] * c[0] : c[0] * c[0] + c[1] * c[1];
        if (!(std::abs(n2 - 1) < 1e-12)) throw DomainError("direction must be a unit vector");
    }
    // Rotation by +90 degrees (n = 3 only).
    UnitVector perp() const { return {2, {-c[1], c[0]}}; }
    double dot(const std::array<double, 2>& x) const { return dim == 1 ? c[0] * x[0] : c[0] * x[0] + c[1] * x[1]; }
    std::vector<double> components() const { return dim == 1 ? std::vector<double>{c[0]} : std::vector<double>{c[0], c[1]}; }
};

struct Horizontal {
    double y;
};
struct Vertical {
    UnitVector omega;
    double p;
};
// Plane {omega . x - cot(beta) y = p}; s is arc length along (cos beta, sin beta).
struct Slanted {
    UnitVector omega;
    double p;
    double beta;
};
using HyperplaneParam = std::variant<Horizontal, Vertical, Slanted>;

inline void validate(const HyperplaneParam& h) {
    if (auto* a = std::get_if<Horizontal>(&h)) {
        if (!(a->y > 0)) throw DomainError("horizontal plane needs y > 0");
    } else if (auto* v = std::get_if<Vertical>(&h)) {
        v->omega.validate();
    } else {
        const auto& s = std::get<Slanted>(h);
        s.omega.validate();
        if (!(s.beta > 0 && s.beta < std::numbers::pi / 2)) throw DomainError("slanted plane needs beta in (0, pi/2)");
    }
}

struct WeightSpec {
    enum class Kind { reciprocal, unit, power } kind = Kind::reciprocal;
    double exponent = -1;

    static WeightSpec reciprocal() { return {Kind::reciprocal, -1}; }
    static WeightSpec unit() { return {Kind::unit, 0}; }
    static WeightSpec power_law(double e) { return {Kind::power, e}; }

    double operator()(double s) const {
        switch (kind) {
            case Kind::reciprocal: return 1 / s;
            case Kind::unit: return 1;
            case Kind::power: return std::pow(s, exponent);
        }
        return 0;
    }
    bool singular_at_zero() const { return kind == Kind::reciprocal || (kind == Kind::power && exponent < 0); }
};

struct CylinderParam {
    UnitVector omega;
    double p;
    double r;
};

namespace detail {

inline std::span<const double> pt2(std::array<double, 3>& a, double x, double y) {
    a = {x, y, 0};
    return {a.data(), 2};
}
inline std::span<const double> pt3(std::array<double, 3>& a, double x1, double x2, double y) {
    a = {x1, x2, y};
    return {a.data(), 3};
}

// Integral of F(u, v) over the disk of radius rho centred at (cu, cv). The
// outer variable is v = cv + rho sin t, which keeps the chord length smooth.
template <class F>
double integrate_disk(double cu, double cv, double rho, F&& fn, const QuadratureSpec& spec) {
    const double hp = std::numbers::pi / 2;
    const int nt = panel_count(spec, std::numbers::pi * rho);
    return integrate_panels(
        [&](double t) {
            const double h = rho * std::cos(t);
            if (h <= 0) return 0.0;
            const double v = cv + rho * std::sin(t);
            return h * integrate_panels([&](double u) { return fn(u, v); }, cu - h, cu + h,
                                        panel_count(spec, 2 * h), spec.nodes_per_panel);
        },
        -hp, hp, nt, spec.nodes_per_panel);
}

}  // namespace detail

// Integral of f over the horizontal hyperplane at height y.
inline double radon_h(const Phantom& f, double y, const QuadratureSpec& spec = {}) {
    if (!(y > 0)) throw DomainError("radon_h: y must be positive");
    double total = 0;
    std::array<double, 3> a{};
    for (const auto& t : f.terms()) {
        const double dy = y - t.y;
        if (!(std::abs(dy) < t.radius)) continue;
        const double h = std::sqrt((t.radius - dy) * (t.radius + dy));
        if (f.dim() == 2) {
            total += integrate_1d([&](double x) { return t.eval(detail::pt2(a, x, y)); }, t.x[0] - h, t.x[0] + h, spec);
        } else {
            total += detail::integrate_disk(
                t.x[0], t.x[1], h, [&](double u, double v) { return t.eval(detail::pt3(a, u, v, y)); }, spec);
        }
    }
    return total;
}

// The (n-1)-dimensional Radon transform in the centerset variable of g(., y):
// the point value g(p omega, y) when n = 2, the line integral over
// {omega . x = p} when n = 3 (over a in [a_lo, a_hi] along omega-perp).
template <class G>
double radon_centerset(G&& g, double y, const UnitVector& omega, double p, double a_lo, double a_hi,
                       const QuadratureSpec& spec) {
    if (omega.dim == 1) {
        const double x[1] = {p * omega.c[0]};
        return g(std::span<const double>(x, 1), y);
    }
    const UnitVector w = omega.perp();
    return integrate_1d(
        [&](double a) {
            const double x[2] = {p * omega.c[0] + a * w.c[0], p * omega.c[1] + a * w.c[1]};
            return g(std::span<const double>(x, 2), y);
        },
        a_lo, a_hi, spec);
}

template <class G>
double radon_centerset(G&& g, double y, const UnitVector& omega, double p, const QuadratureSpec& spec = {}) {
    return radon_centerset(g, y, omega, p, -spec.truncation, spec.truncation, spec);
}

// Integral of f over the vertical hyperplane {omega . x = p}.
inline double radon_v(const Phantom& f, const UnitVector& omega, double p, const QuadratureSpec& spec = {}) {
    omega.validate();
    if (omega.dim != f.dim() - 1) throw DimensionError("radon_v: direction dimension must be n - 1");
    double total = 0;
    std::array<double, 3> a{};
    for (const auto& t : f.terms()) {
        const double d = omega.dot(t.x) - p;
        if (!(std::abs(d) < t.radius)) continue;
        const double rho = std::sqrt((t.radius - d) * (t.radius + d));
        if (f.dim() == 2) {
            const double x0 = p * omega.c[0];
            total += integrate_1d([&](double y) { return t.eval(detail::pt2(a, x0, y)); }, t.y - rho, t.y + rho, spec);
        } else {
            const UnitVector w = omega.perp();
            total += detail::integrate_disk(
                w.dot(t.x), t.y, rho,
                [&](double s, double y) {
                    return t.eval(detail::pt3(a, p * omega.c[0] + s * w.c[0], p * omega.c[1] + s * w.c[1], y));
                },
                spec);
        }
    }
    return total;
}

// Integral of f over the slanted hyperplane {omega . x - cot(beta) y = p},
// parameterized by x = omega (p + s cos beta) + a omega-perp, y = s sin beta.
inline double radon_s(const Phantom& f, const Slanted& plane, const QuadratureSpec& spec = {}) {
    validate(HyperplaneParam(plane));
    if (plane.omega.dim != f.dim() - 1) throw DimensionError("radon_s: direction dimension must be n - 1");
    const double cb = std::cos(plane.beta), sb = std::sin(plane.beta);
    const auto& om = plane.omega;
    double total = 0;
    std::array<double, 3> a{};
    for (const auto& t : f.terms()) {
        const double du = om.dot(t.x) - plane.p;
        const double sc = du * cb + t.y * sb;
        const double dist = du * sb - t.y * cb;
        if (!(std::abs(dist) < t.radius)) continue;
        const double rho = std::sqrt((t.radius - dist) * (t.radius + dist));
        if (f.dim() == 2) {
            total += integrate_1d(
                [&](double s) { return t.eval(detail::pt2(a, om.c[0] * (plane.p + s * cb), s * sb)); },
                sc - rho, sc + rho, spec);
        } else {
            const UnitVector w = om.perp();
            total += detail::integrate_disk(
                sc, w.dot(t.x), rho,
                [&](double s, double q) {
                    const double u = plane.p + s * cb;
                    return t.eval(detail::pt3(a, u * om.c[0] + q * w.c[0], u * om.c[1] + q * w.c[1], s * sb));
                },
                spec);
        }
    }
    return total;
}

// Data on circles of a 2-D cross-section: g(c, r) is an integral over the
// semicircle of radius r centred at (c, 0). The box [u0, u1] x [y0, y1] is
// known to contain every point where the underlying function is nonzero.
struct CircleData {
    std::array<double, 4> support{};  // u0, u1, y0, y1
    std::function<double(double, double)> eval;
};

// 2-D sonar data seen along direction omega = +-1.
inline CircleData circle_data(const SonarData& d, double omega) {
    if (d.dim != 2) throw DimensionError("circle_data: sonar data must be 2-D");
    if (omega != 1 && omega != -1) throw DomainError("circle_data: omega must be +1 or -1");
    CircleData c;
    const Box& b = d.support;
    c.support = omega > 0 ? std::array<double, 4>{b.lo[0], b.hi[0], b.lo[1], b.hi[1]}
                          : std::array<double, 4>{-b.hi[0], -b.lo[0], b.lo[1], b.hi[1]};
    c.eval = [d, omega](double x, double r) { return d(omega * x, r); };
    return c;
}

// Range of the ray parameter s outside of which the circle of radius s sin(beta)
// centred at (p + s, 0) cannot meet the support box. Empty when no circle does.
inline std::optional<std::pair<double, double>> wedge_s_range(const std::array<double, 4>& box, double p, double beta) {
    const double u0 = box[0], u1 = box[1], y0 = std::max(0.0, box[2]), y1 = box[3];
    if (!(u1 > p) || !(y1 >= y0)) return std::nullopt;
    const double theta_min = std::atan2(y0, u1 - p);
    if (theta_min >= beta) return std::nullopt;
    const double dx = std::max({u0 - p, 0.0, p - u1});
    const double dy = y0;
    const double rho_min = std::hypot(dx, dy);
    const double fx = std::max(std::abs(u0 - p), std::abs(u1 - p));
    const double rho_max = std::hypot(fx, y1);
    const double sb = std::sin(beta), st = std::sin(theta_min);
    const double lo = rho_min / (1 + sb);
    const double hi = rho_max / (std::cos(theta_min) - std::sqrt(std::max(0.0, (sb - st) * (sb + st))));
    return std::make_pair(lo, hi);
}

namespace detail {

// Nodes and weights for an integral over s in [lo, hi]: uniform panels in
// log s, plus one linear panel on [0, 1e-3 min(hi, scale)] when the range
// reaches down there. scale is the size of the region where the integrand
// lives, so the log panels resolve it even when hi is far larger.
inline std::vector<std::pair<double, double>> ray_nodes(double lo, double hi, const QuadratureSpec& spec,
                                                        double scale = 1e300) {
    std::vector<std::pair<double, double>> nodes;
    const GaussRule& rule = gauss_legendre(spec.nodes_per_panel);
    auto add_panels = [&](double a, double b, int np, bool logscale) {
        const double h = (b - a) / np;
        for (int k = 0; k < np; ++k) {
            const double mid = a + (k + 0.5) * h;
            for (std::size_t i = 0; i < rule.x.size(); ++i) {
                const double u = mid + 0.5 * h * rule.x[i];
                const double w = 0.5 * h * rule.w[i];
                if (logscale) {
                    const double s = std::exp(u);
                    nodes.emplace_back(s, w * s);
                } else {
                    nodes.emplace_back(u, w);
                }
            }
        }
    };
    if (!(hi > lo)) return nodes;
    double start = lo;
    const double cut = 1e-3 * std::min(hi, scale);
    if (lo < cut) {
        start = cut;
        add_panels(lo, start, 1, false);
    }
    const double len = std::log(hi / start);
    add_panels(std::log(start), std::log(hi), panel_count(spec, len), true);
    return nodes;
}

}  // namespace detail

struct WeightedValue {
    double value = 0;
    bool reliable = true;  // false when a singular weight meets data that does not vanish at s = 0
};

// Integral over s > 0 of g(p + s, s sin beta) sigma(s).
inline WeightedValue radon_weighted(const CircleData& g, double p, double beta, const WeightSpec& weight,
                                    const QuadratureSpec& spec = {}) {
    if (!(beta > 0 && beta < std::numbers::pi / 2)) throw DomainError("radon_weighted: beta must lie in (0, pi/2)");
    const auto r = wedge_s_range(g.support, p, beta);
    if (!r) return {};
    const double sb = std::sin(beta);
    WeightedValue out;
    double peak = 0;
    const auto& b = g.support;
    const double scale = std::hypot(b[1] - b[0], b[3] - std::max(0.0, b[2]));
    for (const auto& [s, w] : detail::ray_nodes(r->first, r->second, spec, scale)) {
        const double v = g.eval(p + s, s * sb);
        peak = std::max(peak, std::abs(v));
        out.value += w * v * weight(s);
    }
    if (weight.singular_at_zero() && r->first < 1e-3 * std::min(r->second, scale)) {
        const double eps = 1e-9 * std::min(r->second, scale);
        const double v0 = g.eval(p + eps, eps * sb);
        if (std::abs(v0) > 1e-6 * std::max(peak, 1e-300) && std::abs(v0) > 1e-14) out.reliable = false;
    }
    if (!std::isfinite(out.value)) throw NumericalError("radon_weighted: non-finite result");
    return out;
}

// Integral of f over the half-cylinder {(omega . x - p)^2 + y^2 = r^2, y > 0}.
// For n = 2 this is the semicircle, i.e. the sonar transform.
inline double cylinder_transform(const Phantom& f, const CylinderParam& cyl, const QuadratureSpec& spec = {}) {
    if (!(cyl.r > 0)) throw DomainError("cylinder_transform: radius must be positive");
    cyl.omega.validate();
    if (cyl.omega.dim != f.dim() - 1) throw DimensionError("cylinder_transform: direction dimension must be n - 1");
    if (f.dim() == 2) return sonar_2d(f, cyl.p * cyl.omega.c[0], cyl.r, spec);
    const UnitVector w = cyl.omega.perp();
    const double r = cyl.r;
    const double hp = std::numbers::pi / 2;
    double total = 0;
    std::array<double, 3> pt{};
    for (const auto& t : f.terms()) {
        const double uc = cyl.omega.dot(t.x) - cyl.p;
        const double ac = w.dot(t.x);
        const double D = std::hypot(uc, t.y);
        const double phic = std::atan2(t.y, uc);
        const double dm = (D * D - r * r) / (D + r);
        if (!(std::abs(dm) < t.radius)) continue;
        const double A = std::sqrt((t.radius - dm) * (t.radius + dm));
        // axis coordinate a = ac + A sin(tau); the cross-section of the ball at a
        // is a disk of radius Ra, met by the circle over an arc of half-angle delta
        total += integrate_panels(
            [&](double tau) {
                const double a = ac + A * std::sin(tau);
                const double da = A * std::cos(tau);
                const double ra2 = t.radius * t.radius - (a - ac) * (a - ac);
                if (ra2 <= 0 || da <= 0) return 0.0;
                double dm2 = 0;
                const double delta = detail::cap_half_angle(D, r, std::sqrt(ra2), dm2);
                if (delta <= 0) return 0.0;
                const double arc = integrate_panels(
                    [&](double al) {
                        const double phi = phic + al;
                        const double u = cyl.p + r * std::cos(phi);
                        return t.eval(detail::pt3(pt, u * cyl.omega.c[0] + a * w.c[0],
                                                  u * cyl.omega.c[1] + a * w.c[1], r * std::sin(phi)));
                    },
                    -delta, delta, panel_count(spec, 2 * r * delta), spec.nodes_per_panel);
                return r * arc * da;
            },
            -hp, hp, panel_count(spec, std::numbers::pi * A), spec.nodes_per_panel);
    }
    return total;
}

// Sinogram text format: one row per plane, "H y value", "V omega.. p value",
// "S omega.. p beta value"; cylinder rows "C omega.. p r value" share the file.
struct SinogramRow {
    char tag = 'H';
    std::vector<double> params;
    double value = 0;
};

inline void write_sinogram(std::ostream& os, const std::vector<SinogramRow>& rows) {
    for (const auto& r : rows) {
        os << r.tag;
        for (double v : r.params) os << " " << fmt17(v);
        os << " " << fmt17(r.value) << "\n";
    }
}

inline std::vector<SinogramRow> read_sinogram(std::istream& in) {
    std::vector<SinogramRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag.size() != 1 || std::string("HVSC").find(tag[0]) == std::string::npos)
            throw ParseError("unknown plane tag '" + tag + "'", line_no);
        SinogramRow r;
        r.tag = tag[0];
        double v;
        std::vector<double> nums;
        while (ls >> v) nums.push_back(v);
        if (!ls.eof() || nums.size() < 2) throw ParseError("malformed sinogram row", line_no);
        r.value = nums.back();
        nums.pop_back();
        r.params = std::move(nums);
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace sonar
