#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/format.hpp"
#include "sonar/fractional.hpp"
#include "sonar/numerics.hpp"
#include "sonar/phantom.hpp"
#include "sonar/radon.hpp"
#include "sonar/sonar.hpp"

namespace sonar {

struct IdentityReport {
    std::string name;  // horizontal, vertical, slanted2d, cylinder, slanted_nd, john, semigroup, inverse
    std::string form;  // which side of an identity is inverted, e.g. "I" or "D"
    std::vector<std::string> columns;
    std::vector<std::vector<double>> grid;
    std::vector<double> lhs, rhs;
    std::string aux_name;  // optional extra column, e.g. the raw last limit sample
    std::vector<double> aux;
    double max_abs_err = 0, max_rel_err = 0, tolerance = 0;
    bool pass = false;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> summary;

    void add(std::vector<double> point, double l, double r) {
        grid.push_back(std::move(point));
        lhs.push_back(l);
        rhs.push_back(r);
    }

    // Sup-norm relative error, absolute when the right side is below 1e-9 everywhere.
    static double sup_error(const std::vector<double>& a, const std::vector<double>& b) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num = std::max(num, std::abs(a[i] - b[i]));
            den = std::max(den, std::abs(b[i]));
        }
        return den < 1e-9 ? num : num / den;
    }

    void finish(double tol) {
        tolerance = tol;
        max_abs_err = 0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (!std::isfinite(lhs[i]) || !std::isfinite(rhs[i]))
                throw NumericalError(name + ": non-finite value at row " + std::to_string(i));
            max_abs_err = std::max(max_abs_err, std::abs(lhs[i] - rhs[i]));
        }
        max_rel_err = sup_error(lhs, rhs);
        pass = max_rel_err <= tolerance;
    }
};

inline void write_report(std::ostream& os, const IdentityReport& r) {
    os << "# identity " << r.name;
    if (!r.form.empty()) os << " form " << r.form;
    os << "\n# tolerance " << fmt17(r.tolerance) << "\n";
    double scale = 0;
    for (double v : r.rhs) scale = std::max(scale, std::abs(v));
    for (const auto& c : r.columns) os << c << " ";
    os << "lhs rhs abs_err rel_err";
    if (!r.aux_name.empty()) os << " " << r.aux_name;
    os << "\n";
    for (std::size_t i = 0; i < r.lhs.size(); ++i) {
        for (double g : r.grid[i]) os << fmt17(g) << " ";
        const double e = std::abs(r.lhs[i] - r.rhs[i]);
        os << fmt17(r.lhs[i]) << " " << fmt17(r.rhs[i]) << " " << fmt17(e) << " "
           << fmt17(scale < 1e-9 ? e : e / scale);
        if (!r.aux_name.empty()) os << " " << fmt17(r.aux[i]);
        os << "\n";
    }
    os << "# max_abs_err " << fmt17(r.max_abs_err) << "\n";
    os << "# max_rel_err " << fmt17(r.max_rel_err) << "\n";
    for (const auto& [k, v] : r.summary) os << "# " << k << " " << fmt17(v) << "\n";
    for (const auto& w : r.warnings) os << "# warning " << w << "\n";
    os << "# result " << (r.pass ? "PASS" : "FAIL") << "\n";
}

namespace detail {

// Projection of the support box on the centerset axes: for n = 3 the u = omega . x
// range and the a = omega-perp . x range, from the four corners.
struct AxisRanges {
    double u0, u1, a0, a1;
};

inline AxisRanges axis_ranges(const Box& b, const UnitVector& omega) {
    AxisRanges r{1e300, -1e300, 1e300, -1e300};
    const UnitVector w = omega.perp();
    for (double x : {b.lo[0], b.hi[0]})
        for (double z : {b.lo[1], b.hi[1]}) {
            const double u = omega.c[0] * x + omega.c[1] * z;
            const double a = w.c[0] * x + w.c[1] * z;
            r.u0 = std::min(r.u0, u);
            r.u1 = std::max(r.u1, u);
            r.a0 = std::min(r.a0, a);
            r.a1 = std::max(r.a1, a);
        }
    return r;
}

inline double gap(double x, double lo, double hi) { return std::max({lo - x, 0.0, x - hi}); }

// Coarser rule for the outer centerset integrals of sonar data, whose
// integrands are smooth on the scale of the support.
inline QuadratureSpec outer_spec(const QuadratureSpec& spec) {
    QuadratureSpec s = spec;
    s.panels = std::max(1, spec.panels / 4);
    return s;
}

// (R_h o S)(y): sonar data integrated over the whole centerset at radius y.
inline double sonar_radon_h(const SonarData& d, double y, const QuadratureSpec& spec) {
    const Box& b = d.support;
    if (b.empty() || !(y > b.ylo())) return 0;
    const double rho = std::sqrt((y - b.ylo()) * (y + b.ylo()));
    if (d.dim == 2)
        return integrate_1d([&](double x) { return d(x, y); }, b.lo[0] - rho, b.hi[0] + rho, spec);
    const QuadratureSpec os = outer_spec(spec);
    return integrate_1d(
        [&](double x1) {
            const double dx = gap(x1, b.lo[0], b.hi[0]);
            if (dx >= rho) return 0.0;
            const double h = std::sqrt((rho - dx) * (rho + dx));
            return integrate_1d([&](double x2) { return d(x1, x2, y); }, b.lo[1] - h, b.hi[1] + h, os);
        },
        b.lo[0] - rho, b.hi[0] + rho, os);
}

// (Rbar o S)(omega, c, r) for n = 3: sonar data integrated along the centerset
// line {omega . x = c} at radius r. Only centres whose sphere can reach the box
// contribute.
inline double sonar_centerset_line(const SonarData& d, const UnitVector& omega, double c, double r,
                                   const QuadratureSpec& spec) {
    const Box& b = d.support;
    if (b.empty()) return 0;
    const AxisRanges ax = axis_ranges(b, omega);
    const double du = gap(c, ax.u0, ax.u1);
    const double rho2 = r * r - du * du - b.ylo() * b.ylo();
    if (rho2 <= 0) return 0;
    const double rho = std::sqrt(rho2);
    return radon_centerset([&](std::span<const double> x, double y) { return d(x, y); }, r, omega, c, ax.a0 - rho,
                           ax.a1 + rho, outer_spec(spec));
}

// Lower bound on the distance from the axis {omega . x = c, y = 0} to the support.
inline double axis_distance(const SonarData& d, const UnitVector& omega, double c) {
    const AxisRanges ax = axis_ranges(d.support, omega);
    return std::hypot(gap(c, ax.u0, ax.u1), d.support.ylo());
}

// S(omega (p + t_k), t_k) for t_k = base ratio^k: spheres tangent to the
// vertical plane {omega . x = p} at the centerset, growing away from it.
inline std::vector<std::pair<double, double>> tangent_sphere_samples(const SonarData& d, const Vertical& v,
                                                                    const QuadratureSpec& spec) {
    const Box& b = d.support;
    double radius = 0;
    for (int i = 0; i < d.dim; ++i) radius = std::max(radius, 0.5 * (b.hi[i] - b.lo[i]));
    const double base = spec.limit_base > 0 ? spec.limit_base : 8 * radius;
    std::vector<std::pair<double, double>> samples;
    double t = base;
    for (int k = 0; k < spec.limit_steps; ++k, t *= spec.limit_ratio) {
        const double x[2] = {v.omega.c[0] * (v.p + t), v.omega.c[1] * (v.p + t)};
        samples.emplace_back(t, d(std::span<const double>(x, d.dim - 1), t));
    }
    return samples;
}

}  // namespace detail

// Cylinder transform C(omega, c, .) recovered from 3-D sonar data as
// D^(1/2) o Rbar o S, sampled on r = r_lo + j dr up to at least r_hi. Zero
// below r_lo, where the cylinder cannot reach the support.
inline RadialProfile cylinder_from_sonar(const SonarData& d, const UnitVector& omega, double c, double r_hi,
                                         const QuadratureSpec& spec = {}) {
    if (d.dim != 3) throw DimensionError("cylinder_from_sonar: sonar data must be 3-D");
    const double dr = spec.profile_spacing;
    const double r_min = detail::axis_distance(d, omega, c);
    const double r0 = std::max(0.0, r_min - 2 * dr);
    const int n = std::max(5, static_cast<int>(std::ceil((r_hi - r0) / dr)) + 3);
    std::vector<double> r(n), h(n);
    for (int j = 0; j < n; ++j) {
        r[j] = r0 + j * dr;
        h[j] = r[j] > 0 ? detail::sonar_centerset_line(d, omega, c, r[j], spec) : 0.0;
    }
    auto hf = [&](double t) { return t < r0 ? 0.0 : detail::interpolate_cubic(r, h, t); };
    std::vector<double> half(n);
    for (int j = 0; j < n; ++j) half[j] = frac_integral_at(hf, r[j], FractionalOrder(0.5), spec);
    return frac_d1(RadialProfile(r, std::move(half)));
}

namespace detail {

// Largest wedge angle at which the line through (p, 0) in the (u, y) plane can
// meet the box [u0, u1] x [y0, y1].
inline double wedge_theta_max(const std::array<double, 4>& box, double p) {
    if (p >= box[0]) return std::numbers::pi / 2;
    return std::atan2(box[3], box[0] - p);
}

// Angular step for tabulating g = R_{1/y}[...] at apex p: g varies on the
// scale of the angle the support subtends from the apex.
inline double angular_step(double theta_max, const QuadratureSpec& spec) {
    return std::min((std::numbers::pi / 2) / spec.angular_points, theta_max / 64);
}

// g(theta) may grow like log(cos theta) near pi/2, so it is tabulated in
// z = -log(pi/2 - theta), where that term is linear; dz ~ dtheta near 0.
inline double z_of(double t) { return -std::log(std::numbers::pi / 2 - t); }

struct ZGrid {
    std::vector<double> z, theta;
};

// Nodes z_0 = z_of(0) < ... covering [0, top] with spacing h / (pi/2).
inline ZGrid z_grid(double top, double h) {
    const double z0 = z_of(0), z1 = z_of(top);
    const double dz = h / (std::numbers::pi / 2);
    const int n = static_cast<int>(std::ceil((z1 - z0) / dz)) + 3;
    ZGrid out{std::vector<double>(n), std::vector<double>(n)};
    for (int j = 0; j < n; ++j) {
        out.z[j] = z0 + j * dz;
        out.theta[j] = j == 0 ? 0.0 : std::numbers::pi / 2 - std::exp(-out.z[j]);
    }
    return out;
}

// Stencil step for W at beta: resolves g and keeps the stencil inside (0, pi/2).
inline double stencil_step(double beta, double tmax, const QuadratureSpec& spec) {
    return std::min({angular_step(tmax, spec), beta / 3, (std::numbers::pi / 2 - beta) / 3});
}

// W o g at beta, given g tabulated on a z grid with g(0) = 0.
inline double w_from_table(const ZGrid& zg, const std::vector<double>& g, double beta, double h,
                           const QuadratureSpec& spec) {
    auto gi = [&](double t) { return interpolate_cubic(zg.z, g, z_of(t)); };
    return op_w_point(gi, beta, h, spec);
}

// g(theta) = (R_{1/y} o C)(omega, p, theta) on a whole angle grid, where C is
// the cylinder transform recovered from 3-D sonar data. All angles share one
// set of ray nodes s_i, so each axis c_i = p + s_i needs one radial profile.
inline std::vector<double> weighted_from_cylinders(const SonarData& d, const UnitVector& omega, double p,
                                                   const std::vector<double>& theta, const QuadratureSpec& spec) {
    std::vector<double> g(theta.size(), 0.0);
    const AxisRanges ax = axis_ranges(d.support, omega);
    const std::array<double, 4> box{ax.u0, ax.u1, d.support.ylo(), d.support.yhi()};
    const auto range = wedge_s_range(box, p, theta.back());
    if (!range) return g;
    const double st_max = std::sin(theta.back());
    const double scale = std::hypot(box[1] - box[0], box[3] - std::max(0.0, box[2]));
    for (const auto& [s, w] : ray_nodes(range->first, range->second, spec, scale)) {
        const double c = p + s;
        if (axis_distance(d, omega, c) >= s * st_max) continue;
        const RadialProfile C = cylinder_from_sonar(d, omega, c, s * st_max, spec);
        const double r0 = C.grid().front();
        for (std::size_t k = 1; k < theta.size(); ++k) {
            const double r = s * std::sin(theta[k]);
            if (r > r0) g[k] += w * C(r) / s;
        }
    }
    return g;
}

}  // namespace detail

// R[f](plane) estimated from sonar data alone:
//   horizontal  D^((n-1)/2) o R_h o S
//   vertical    L o S, the limit over tangent spheres expanding away from the plane
//   slanted     W o R_{1/y} o S (n = 2), W o R_{1/y} o D^(1/2) o Rbar o S (n = 3)
// Warnings, if requested, collect loss-of-accuracy notes.
inline double radon_from_sonar(const SonarData& d, const HyperplaneParam& plane, const QuadratureSpec& spec = {},
                               std::vector<std::string>* warnings = nullptr) {
    spec.validate();
    validate(plane);
    if (d.dim != 2 && d.dim != 3) throw DimensionError("radon_from_sonar: dimension must be 2 or 3");
    auto warn = [&](std::string w) {
        if (warnings) warnings->push_back(std::move(w));
    };
    if (d.support.empty()) return 0;

    if (const auto* h = std::get_if<Horizontal>(&plane)) {
        const double y = h->y;
        if (d.dim == 3) {
            // nu = 1: D_1 from a centred 5-point stencil
            const double dy = std::min(spec.profile_spacing, y / 4);
            std::array<double, 5> x{}, q{};
            for (int j = 0; j < 5; ++j) {
                x[j] = y + (j - 2) * dy;
                q[j] = detail::sonar_radon_h(d, x[j], spec) / x[j];
            }
            const auto w = detail::derivative_weights(y, x);
            double v = 0;
            for (int j = 0; j < 5; ++j) v += w[j] * q[j];
            return v / (2 * std::numbers::pi);
        }
        // nu = 1/2 needs the whole profile from 0
        const int K = std::max(4, static_cast<int>(std::ceil(y / spec.profile_spacing)));
        const double dy = y / K;
        std::vector<double> ys(K + 3), v(K + 3);
        for (int j = 0; j <= K + 2; ++j) {
            ys[j] = j * dy;
            v[j] = j == 0 ? 0.0 : detail::sonar_radon_h(d, ys[j], spec);
        }
        return frac_derivative(RadialProfile(ys, v), FractionalOrder(0.5), spec).values()[K];
    }

    if (const auto* v = std::get_if<Vertical>(&plane)) {
        if (v->omega.dim != d.dim - 1) throw DimensionError("radon_from_sonar: direction dimension must be n - 1");
        const auto samples = detail::tangent_sphere_samples(d, *v, spec);
        const LimitEstimate e = extrapolate_limit(samples);
        double scale = 0;
        for (const auto& sm : samples) scale = std::max(scale, std::abs(sm.second));
        if (e.uncertainty > 1e-2 * scale)
            warn("vertical limit: extrapolation spread " + fmt17(e.uncertainty) + " exceeds 1% of the samples");
        return e.value;
    }

    const auto& sl = std::get<Slanted>(plane);
    if (sl.omega.dim != d.dim - 1) throw DimensionError("radon_from_sonar: direction dimension must be n - 1");
    if (sl.beta < 0.1 || sl.beta > std::numbers::pi / 2 - 0.1)
        warn("slanted plane: beta = " + fmt17(sl.beta) + " lies outside [0.1, pi/2 - 0.1]; W differentiation degrades");
    std::array<double, 4> box{};
    if (d.dim == 2) {
        box = circle_data(d, sl.omega.c[0]).support;
    } else {
        const auto ax = detail::axis_ranges(d.support, sl.omega);
        box = {ax.u0, ax.u1, d.support.ylo(), d.support.yhi()};
    }
    const double tmax = detail::wedge_theta_max(box, sl.p);
    if (sl.beta >= tmax) return 0;
    const double h = detail::stencil_step(sl.beta, tmax, spec);
    const auto zg = detail::z_grid(sl.beta + 2 * h, detail::angular_step(tmax, spec));
    const auto& theta = zg.theta;
    std::vector<double> g(theta.size(), 0.0);
    if (d.dim == 2) {
        const CircleData cd = circle_data(d, sl.omega.c[0]);
        for (std::size_t k = 1; k < theta.size(); ++k) {
            const auto wv = radon_weighted(cd, sl.p, theta[k], WeightSpec::reciprocal(), spec);
            if (!wv.reliable) warn("slanted plane: sonar data do not vanish at the wedge apex");
            g[k] = wv.value;
        }
    } else {
        g = detail::weighted_from_cylinders(d, sl.omega, sl.p, theta, spec);
    }
    return detail::w_from_table(zg, g, sl.beta, h, spec);
}

// ---- identity checks ----

enum class Form { integral, derivative };

namespace detail {

inline std::vector<double> omega_point(const UnitVector& w, std::vector<double> rest) {
    auto out = w.components();
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

inline std::vector<std::string> omega_columns(int n, std::vector<std::string> rest) {
    std::vector<std::string> out = n == 2 ? std::vector<std::string>{"omega"} : std::vector<std::string>{"omega1", "omega2"};
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

inline void check_dim(const Phantom& f, std::initializer_list<int> dims, const char* who) {
    if (std::find(dims.begin(), dims.end(), f.dim()) == dims.end())
        throw DimensionError(std::string(who) + ": unsupported phantom dimension " + std::to_string(f.dim()));
}

}  // namespace detail

// Integral form: (R_h o S)[f] = I^((n-1)/2)[R_h f]. Derivative form:
// D^((n-1)/2)[R_h o S f] = R_h f, i.e. radon_from_sonar on horizontal planes.
inline IdentityReport check_horizontal(const Phantom& f, const std::vector<double>& y_grid,
                                       const QuadratureSpec& spec = {}, Form form = Form::integral,
                                       double tolerance = 0) {
    detail::check_dim(f, {2, 3}, "check_horizontal");
    const int n = f.dim();
    IdentityReport rep;
    rep.name = "horizontal";
    rep.form = form == Form::integral ? "I" : "D";
    rep.columns = {"y"};
    const SonarData d = make_sonar_data(f, spec);
    const FractionalOrder nu(0.5 * (n - 1));
    for (double y : y_grid) {
        if (!(y > 0)) throw DomainError("check_horizontal: y must be positive");
        if (form == Form::integral) {
            const double lhs = detail::sonar_radon_h(d, y, spec);
            const double rhs = frac_integral_at([&](double s) { return s > 0 ? radon_h(f, s, spec) : 0.0; }, y, nu, spec);
            rep.add({y}, lhs, rhs);
        } else {
            rep.add({y}, radon_from_sonar(d, Horizontal{y}, spec, &rep.warnings), radon_h(f, y, spec));
        }
    }
    rep.finish(tolerance > 0 ? tolerance : form == Form::derivative ? 1e-2 : n == 2 ? 1e-3 : 5e-3);
    return rep;
}

// R_v = L o S. The aux column holds the last raw tangent-sphere sample; the
// summary records its sup-norm error next to that of the extrapolated limit.
inline IdentityReport check_vertical(const Phantom& f, const std::vector<Vertical>& planes,
                                     const QuadratureSpec& spec = {}, double tolerance = 0) {
    detail::check_dim(f, {2, 3}, "check_vertical");
    IdentityReport rep;
    rep.name = "vertical";
    rep.columns = detail::omega_columns(f.dim(), {"p"});
    rep.aux_name = "raw_last";
    const SonarData d = make_sonar_data(f, spec);
    for (const auto& v : planes) {
        validate(HyperplaneParam(v));
        const double lhs = radon_v(f, v.omega, v.p, spec);
        const double rhs = radon_from_sonar(d, v, spec, &rep.warnings);
        const double raw = d.support.empty() ? 0.0 : detail::tangent_sphere_samples(d, v, spec).back().second;
        rep.add(detail::omega_point(v.omega, {v.p}), lhs, rhs);
        rep.aux.push_back(raw);
    }
    rep.finish(tolerance > 0 ? tolerance : 1e-2);
    rep.summary.emplace_back("raw_max_rel_err", IdentityReport::sup_error(rep.aux, rep.lhs));
    rep.summary.emplace_back("extrapolated_max_rel_err", IdentityReport::sup_error(rep.rhs, rep.lhs));
    return rep;
}

// V-form: V[beta -> R_s f(p, beta)] = R_{1/y}[S f](p, beta).
// W-form: R_s f = W o R_{1/y} o S f.
inline IdentityReport check_slanted_2d(const Phantom& f, const std::vector<Slanted>& rays,
                                       const QuadratureSpec& spec = {}, Form form = Form::integral,
                                       double tolerance = 0) {
    detail::check_dim(f, {2}, "check_slanted_2d");
    IdentityReport rep;
    rep.name = "slanted2d";
    rep.form = form == Form::integral ? "V" : "W";
    rep.columns = {"omega", "p", "beta"};
    const SonarData d = make_sonar_data(f, spec);
    const double hp = std::numbers::pi / 2;
    for (const auto& r : rays) {
        validate(HyperplaneParam(r));
        if (r.omega.dim != 1) throw DimensionError("check_slanted_2d: direction must be +-1");
        if (r.beta < 0.1 - 1e-12 || r.beta > hp - 0.1 + 1e-12)
            throw DomainError("check_slanted_2d: beta must lie in [0.1, pi/2 - 0.1]");
    }
    if (form == Form::integral) {
        for (const auto& r : rays) {
            const double lhs = op_v_at(
                [&](double b) { return radon_s(f, Slanted{r.omega, r.p, b}, spec); }, r.beta, spec);
            const auto wv = radon_weighted(circle_data(d, r.omega.c[0]), r.p, r.beta, WeightSpec::reciprocal(), spec);
            if (!wv.reliable) rep.warnings.push_back("sonar data do not vanish at the wedge apex, p = " + fmt17(r.p));
            rep.add({r.omega.c[0], r.p, r.beta}, lhs, wv.value);
        }
        rep.finish(tolerance > 0 ? tolerance : 1e-2);
        return rep;
    }
    // rays sharing (omega, p) share one table of R_{1/y} S over the angles
    const double h = hp / spec.angular_points;
    std::vector<std::pair<double, double>> rows;
    for (const auto& r : rays)
        if (std::find(rows.begin(), rows.end(), std::pair{r.omega.c[0], r.p}) == rows.end())
            rows.emplace_back(r.omega.c[0], r.p);
    std::vector<double> lhs(rays.size());
    for (const auto& [om, p] : rows) {
        double top = 0;
        for (const auto& r : rays)
            if (r.omega.c[0] == om && r.p == p) top = std::max(top, r.beta);
        const int K = static_cast<int>(std::ceil(top / h)) + 3;
        std::vector<double> theta(K + 1), g(K + 1, 0.0);
        const CircleData cd = circle_data(d, om);
        for (int k = 0; k <= K; ++k) {
            theta[k] = k * h;
            if (k > 0) g[k] = radon_weighted(cd, p, theta[k], WeightSpec::reciprocal(), spec).value;
        }
        auto gi = [&](double t) { return detail::interpolate_cubic(theta, g, t); };
        for (std::size_t i = 0; i < rays.size(); ++i)
            if (rays[i].omega.c[0] == om && rays[i].p == p) lhs[i] = op_w_point(gi, rays[i].beta, h, spec);
    }
    for (std::size_t i = 0; i < rays.size(); ++i) {
        const auto& r = rays[i];
        rep.add({r.omega.c[0], r.p, r.beta}, lhs[i], radon_s(f, r, spec));
    }
    rep.finish(tolerance > 0 ? tolerance : 2e-2);
    return rep;
}

// Integral form: I^(1/2) o C = Rbar o S (in the radius). Derivative form:
// D^(1/2) o Rbar o S = C. Cylinders with a common axis share one profile
// in r, so list them consecutively.
inline IdentityReport check_cylinder(const Phantom& f, const std::vector<CylinderParam>& cylinders,
                                     const QuadratureSpec& spec = {}, Form form = Form::integral,
                                     double tolerance = 0) {
    detail::check_dim(f, {3}, "check_cylinder");
    IdentityReport rep;
    rep.name = "cylinder";
    rep.form = form == Form::integral ? "I" : "D";
    rep.columns = detail::omega_columns(3, {"p", "r"});
    const SonarData d = make_sonar_data(f, spec);
    // one radial profile per axis, long enough for the largest radius on it
    std::optional<RadialProfile> prof;
    const CylinderParam* axis = nullptr;
    for (const auto& c : cylinders) {
        if (!(c.r > 0)) throw DomainError("check_cylinder: radius must be positive");
        c.omega.validate();
        if (c.omega.dim != 2) throw DimensionError("check_cylinder: direction must lie in R^2");
        if (!axis || axis->omega.c != c.omega.c || axis->p != c.p) {
            double top = 0;
            for (const auto& o : cylinders)
                if (o.omega.c == c.omega.c && o.p == c.p) top = std::max(top, o.r);
            if (form == Form::integral) {
                const double dr = spec.profile_spacing;
                const int n = static_cast<int>(std::ceil(top / dr)) + 3;
                std::vector<double> r(n), v(n, 0.0);
                for (int j = 0; j < n; ++j) {
                    r[j] = j * dr;
                    if (j > 0) v[j] = cylinder_transform(f, CylinderParam{c.omega, c.p, r[j]}, spec);
                }
                prof.emplace(std::move(r), std::move(v));
            } else {
                prof = cylinder_from_sonar(d, c.omega, c.p, top, spec);
            }
            axis = &c;
        }
        double lhs = 0, rhs = 0;
        if (form == Form::integral) {
            lhs = frac_integral_at(*prof, c.r, FractionalOrder(0.5), spec);
            rhs = detail::sonar_centerset_line(d, c.omega, c.p, c.r, spec);
        } else {
            lhs = c.r < prof->grid().front() ? 0.0 : (*prof)(c.r);
            rhs = cylinder_transform(f, c, spec);
        }
        rep.add(detail::omega_point(c.omega, {c.p, c.r}), lhs, rhs);
    }
    rep.finish(tolerance > 0 ? tolerance : form == Form::integral ? 5e-3 : 2e-2);
    return rep;
}

// Sonar-only recovery against the direct transform, any mix of plane classes.
inline IdentityReport check_slanted_nd(const Phantom& f, const std::vector<HyperplaneParam>& planes,
                                       const QuadratureSpec& spec = {}, double tolerance = 0) {
    detail::check_dim(f, {2, 3}, "check_slanted_nd");
    IdentityReport rep;
    rep.name = "slanted_nd";
    rep.columns = {"class", "omega1", "omega2", "p_or_y", "beta"};
    const SonarData d = make_sonar_data(f, spec);
    for (const auto& pl : planes) {
        const double est = radon_from_sonar(d, pl, spec, &rep.warnings);
        if (const auto* h = std::get_if<Horizontal>(&pl)) {
            rep.add({0, 0, 0, h->y, 0}, est, radon_h(f, h->y, spec));
        } else if (const auto* v = std::get_if<Vertical>(&pl)) {
            rep.add({1, v->omega.c[0], v->omega.c[1], v->p, 0}, est, radon_v(f, v->omega, v->p, spec));
        } else {
            const auto& s = std::get<Slanted>(pl);
            rep.add({2, s.omega.c[0], s.omega.c[1], s.p, s.beta}, est, radon_s(f, s, spec));
        }
    }
    rep.finish(tolerance > 0 ? tolerance : 3e-2);
    return rep;
}

struct JohnCase {
    std::string label;
    std::function<double(double)> g;
    std::vector<double> v;  // n components
};

// Five smooth profiles, each paired with a vector v, in dimension n.
inline std::vector<JohnCase> john_cases(int n) {
    auto vec = [n](double a, double b, double c) {
        return n == 2 ? std::vector<double>{a, b} : std::vector<double>{a, b, c};
    };
    return {
        {"one", [](double) { return 1.0; }, vec(0.3, -0.4, 0.5)},
        {"square", [](double p) { return p * p; }, vec(1, 0, 0)},
        {"cos", [](double p) { return std::cos(p); }, vec(0, 2, 0)},
        {"exp", [](double p) { return std::exp(p); }, vec(0.6, 0.8, -0.5)},
        {"rational", [](double p) { return 1 / (1 + p * p); }, vec(-1.2, 0.7, 0.4)},
    };
}

// int_{S^(n-1)} g(v . theta) dtheta = |S^(n-2)| int_{-1}^{1} (1 - p^2)^((n-3)/2) g(|v| p) dp.
inline IdentityReport check_john(int n, const std::vector<JohnCase>& cases, const QuadratureSpec& spec = {},
                                 double tolerance = 0) {
    if (n != 2 && n != 3) throw DimensionError("check_john: n must be 2 or 3");
    IdentityReport rep;
    rep.name = "john";
    rep.columns = {"case", "n", "norm_v"};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        if (static_cast<int>(c.v.size()) != n) throw DimensionError("check_john: v must have n components");
        double norm = 0;
        for (double a : c.v) norm += a * a;
        norm = std::sqrt(norm);
        const double lhs = integrate_unit_sphere(
            [&](std::span<const double> t) {
                double dot = 0;
                for (int k = 0; k < n; ++k) dot += c.v[k] * t[k];
                return c.g(dot);
            },
            n, spec);
        const double rhs =
            sphere_area(n - 1) *
            integrate_endpoint_singular([&](double p) { return c.g(norm * p) + c.g(-norm * p); }, 1.0, 0.5 * (n - 3),
                                        spec);
        rep.add({static_cast<double>(i), static_cast<double>(n), norm}, lhs, rhs);
    }
    rep.finish(tolerance > 0 ? tolerance : 1e-8);
    return rep;
}

struct OrderPair {
    double mu, nu;
};

// I^mu o I^nu = I^(mu + nu) on a sampled profile.
inline IdentityReport check_semigroup(const RadialProfile& g, const std::vector<OrderPair>& pairs,
                                      const QuadratureSpec& spec = {}, double tolerance = 0) {
    IdentityReport rep;
    rep.name = "semigroup";
    rep.columns = {"mu", "nu", "y"};
    for (const auto& [mu, nu] : pairs) {
        const auto lhs = frac_integral(frac_integral(g, FractionalOrder(nu), spec), FractionalOrder(mu), spec);
        const auto rhs = frac_integral(g, FractionalOrder(mu + nu), spec);
        for (std::size_t i = 0; i < g.size(); ++i) rep.add({mu, nu, g.grid()[i]}, lhs.values()[i], rhs.values()[i]);
    }
    rep.finish(tolerance > 0 ? tolerance : 1e-6);
    return rep;
}

// Left inverses: D^nu o I^nu = id on a sampled profile (two points at each end
// excluded, where the derivative stencils are one-sided), and W o V = id.
inline IdentityReport check_inverse(const RadialProfile& g, const std::vector<double>& orders,
                                    const std::function<double(double)>& angular, const std::vector<double>& beta,
                                    const QuadratureSpec& spec = {}, double tolerance = 0) {
    IdentityReport rep;
    rep.name = "inverse";
    rep.columns = {"operator", "order", "point"};
    for (double nu : orders) {
        const auto back = frac_derivative(frac_integral(g, FractionalOrder(nu), spec), FractionalOrder(nu), spec);
        for (std::size_t i = 2; i + 2 < g.size(); ++i) rep.add({0, nu, g.grid()[i]}, back.values()[i], g.values()[i]);
    }
    if (!beta.empty()) {
        const auto back = op_w_on([&](double t) { return op_v_at(angular, t, spec); }, beta, spec);
        for (std::size_t i = 0; i < beta.size(); ++i) rep.add({1, 0.5, beta[i]}, back[i], angular(beta[i]));
    }
    rep.finish(tolerance > 0 ? tolerance : 1e-4);
    return rep;
}

}  // namespace sonar
