#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <istream>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/format.hpp"
#include "sonar/numerics.hpp"
#include "sonar/phantom.hpp"
#include "sonar/profile.hpp"

namespace sonar {

namespace detail {

// Angular half-width of the part of a sphere (radius r, centre at distance D
// from the primitive centre) inside the primitive's support ball of radius R.
// Returns a negative value when they do not meet. dm receives D - r.
inline double cap_half_angle(double D, double r, double R, double& dm) {
    dm = (D * D - r * r) / (D + r);
    if (!(std::abs(dm) < R)) return -1;
    const double arg = std::clamp((R - dm) * (R + dm) / (4 * r * D), 0.0, 1.0);
    return 2 * std::asin(std::sqrt(arg));
}

}  // namespace detail

// Integral of f over the upper semicircle of radius y centred at (x, 0),
// with respect to arc length.
inline double sonar_2d(const Phantom& f, double x, double y, const QuadratureSpec& spec = {}) {
    if (f.dim() != 2) throw DimensionError("sonar_2d: phantom must have dimension 2");
    if (!(y > 0)) throw DomainError("sonar_2d: radius must be positive");
    double total = 0;
    for (const auto& t : f.terms()) {
        const double D = std::hypot(t.x[0] - x, t.y);
        double dm = 0;
        const double delta = detail::cap_half_angle(D, y, t.radius, dm);
        if (delta <= 0) continue;
        // each primitive is radial, so the arc is symmetric about the ray to its centre
        const int np = panel_count(spec, y * delta);
        total += 2 * y *
                 integrate_panels(
                     [&](double a) {
                         const double s = std::sin(0.5 * a);
                         return t.radial(dm * dm + 4 * y * D * s * s);
                     },
                     0, delta, np, spec.nodes_per_panel);
    }
    return total;
}

// Integral of f over the upper hemisphere of radius y centred at (x, 0), with
// respect to surface area.
inline double sonar_3d(const Phantom& f, std::span<const double> x, double y, const QuadratureSpec& spec = {}) {
    if (f.dim() != 3) throw DimensionError("sonar_3d: phantom must have dimension 3");
    if (x.size() != 2) throw DimensionError("sonar_3d: centre must have 2 coordinates");
    if (!(y > 0)) throw DomainError("sonar_3d: radius must be positive");
    double total = 0;
    for (const auto& t : f.terms()) {
        const double D = std::sqrt((t.x[0] - x[0]) * (t.x[0] - x[0]) + (t.x[1] - x[1]) * (t.x[1] - x[1]) + t.y * t.y);
        double dm = 0;
        const double delta = detail::cap_half_angle(D, y, t.radius, dm);
        if (delta <= 0) continue;
        const int np = panel_count(spec, y * delta);
        total += 2 * std::numbers::pi * y * y *
                 integrate_panels(
                     [&](double a) {
                         const double s = std::sin(0.5 * a);
                         return t.radial(dm * dm + 4 * y * D * s * s) * std::sin(a);
                     },
                     0, delta, np, spec.nodes_per_panel);
    }
    return total;
}

// Dispatch on the phantom dimension; x has n - 1 coordinates.
inline double sonar(const Phantom& f, std::span<const double> x, double y, const QuadratureSpec& spec = {}) {
    if (static_cast<int>(x.size()) != f.dim() - 1)
        throw DimensionError("sonar: centre has " + std::to_string(x.size()) + " coordinates, expected " +
                             std::to_string(f.dim() - 1));
    return f.dim() == 2 ? sonar_2d(f, x[0], y, spec) : sonar_3d(f, x, y, spec);
}

struct SonarSample {
    std::vector<double> center;
    double radius = 0;
    double value = 0;
};

// Evaluates S[f] at every (centre, radius) pair, centre-major.
inline std::vector<SonarSample> sonar_grid(const Phantom& f, const std::vector<std::vector<double>>& centers,
                                           const std::vector<double>& radii, const QuadratureSpec& spec = {}) {
    for (std::size_t j = 0; j < radii.size(); ++j)
        if (!(radii[j] > 0))
            throw DomainError("sonar_grid: radius index " + std::to_string(j) + " is not positive (" +
                              fmt17(radii[j]) + ")");
    std::vector<SonarSample> out;
    out.reserve(centers.size() * radii.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = 0; j < radii.size(); ++j) {
            const std::string where =
                " (centre index " + std::to_string(i) + ", radius index " + std::to_string(j) + ")";
            try {
                out.push_back({centers[i], radii[j], sonar(f, centers[i], radii[j], spec)});
            } catch (const DomainError& e) {
                throw DomainError(e.what() + where);
            } catch (const DimensionError& e) {
                throw DimensionError(e.what() + where);
            } catch (const NumericalError& e) {
                throw NumericalError(e.what() + where);
            }
        }
    }
    return out;
}

// Sonar data as seen by the inversion pipeline: an evaluator of S plus an
// a-priori box known to contain the support of the imaged function.
struct SonarData {
    int dim = 2;
    Box support;
    std::function<double(std::span<const double>, double)> eval;

    double operator()(std::span<const double> x, double y) const { return eval(x, y); }
    double operator()(double x, double y) const {
        const double c[1] = {x};
        return eval(std::span<const double>(c, 1), y);
    }
    double operator()(double x1, double x2, double y) const {
        const double c[2] = {x1, x2};
        return eval(std::span<const double>(c, 2), y);
    }
};

inline SonarData make_sonar_data(const Phantom& f, const QuadratureSpec& spec = {}) {
    auto ph = std::make_shared<const Phantom>(f);
    SonarData d;
    d.dim = f.dim();
    d.support = f.support_bounds();
    d.eval = [ph, spec](std::span<const double> x, double y) { return sonar(*ph, x, y, spec); };
    return d;
}

// Sonar table text format: "dim n", optional "support lo_1 hi_1 .. lo_n hi_n",
// then one row "x.. y value" per sample.
struct SonarTable {
    int dim = 2;
    std::optional<Box> support;
    std::vector<SonarSample> samples;
};

inline void write_sonar_table(std::ostream& os, const SonarTable& t) {
    os << "dim " << t.dim << "\n";
    if (t.support && !t.support->empty()) {
        os << "support";
        for (int i = 0; i < t.dim; ++i) os << " " << fmt17(t.support->lo[i]) << " " << fmt17(t.support->hi[i]);
        os << "\n";
    }
    for (const auto& s : t.samples) {
        for (double c : s.center) os << fmt17(c) << " ";
        os << fmt17(s.radius) << " " << fmt17(s.value) << "\n";
    }
}

inline SonarTable read_sonar_table(std::istream& in) {
    SonarTable t;
    t.dim = 0;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "dim") {
            if (t.dim != 0) throw ParseError("duplicate dim header", line_no);
            if (!(ls >> t.dim) || (t.dim != 2 && t.dim != 3)) throw ParseError("dim must be 2 or 3", line_no);
            continue;
        }
        if (t.dim == 0) throw ParseError("expected 'dim n' header", line_no);
        if (first == "support") {
            Box b;
            b.dim = t.dim;
            for (int i = 0; i < t.dim; ++i)
                if (!(ls >> b.lo[i] >> b.hi[i])) throw ParseError("support needs 2n numbers", line_no);
            t.support = b;
            continue;
        }
        std::vector<double> row;
        try {
            row.push_back(std::stod(first));
        } catch (const std::exception&) {
            throw ParseError("bad number '" + first + "'", line_no);
        }
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) throw ParseError("bad number in row", line_no);
        if (static_cast<int>(row.size()) != t.dim + 1)
            throw ParseError("row needs " + std::to_string(t.dim + 1) + " numbers", line_no);
        SonarSample s;
        s.center.assign(row.begin(), row.begin() + (t.dim - 1));
        s.radius = row[t.dim - 1];
        s.value = row[t.dim];
        if (!(s.radius > 0)) throw ParseError("radius must be positive", line_no);
        t.samples.push_back(std::move(s));
    }
    if (t.dim == 0) throw ParseError("missing 'dim n' header", line_no);
    return t;
}

// Sonar data backed by a 2-D table on a tensor grid (centre-major), evaluated
// by bicubic interpolation. Queries outside the tabulated rectangle return 0
// and are counted in *misses.
struct TableSonar {
    SonarData data;
    std::shared_ptr<std::atomic<long>> misses;
};

inline TableSonar sonar_data_from_table(const SonarTable& t) {
    if (t.dim != 2) throw DimensionError("table-backed sonar data is 2-D only");
    if (!t.support) throw ParseError("sonar table lacks a 'support' line");
    std::vector<double> xs, rs;
    for (const auto& s : t.samples) {
        if (xs.empty() || s.center[0] != xs.back()) xs.push_back(s.center[0]);
    }
    if (xs.empty()) throw ParseError("sonar table is empty");
    const std::size_t nr = t.samples.size() / xs.size();
    if (nr * xs.size() != t.samples.size() || nr < 4 || xs.size() < 4)
        throw ParseError("sonar table is not a tensor grid with at least 4x4 samples");
    for (std::size_t j = 0; j < nr; ++j) rs.push_back(t.samples[j].radius);
    auto vals = std::make_shared<std::vector<double>>();
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < nr; ++j) {
            const auto& s = t.samples[i * nr + j];
            if (s.center[0] != xs[i] || s.radius != rs[j])
                throw ParseError("sonar table is not a tensor grid (row " + std::to_string(i * nr + j + 1) + ")");
            vals->push_back(s.value);
        }
    RadialProfile::check_increasing(xs, "sonar table centres");
    RadialProfile::check_increasing(rs, "sonar table radii");
    TableSonar out;
    out.misses = std::make_shared<std::atomic<long>>(0);
    out.data.dim = 2;
    out.data.support = *t.support;
    auto misses = out.misses;
    out.data.eval = [xs, rs, vals, misses](std::span<const double> c, double r) {
        const double x = c[0];
        if (x < xs.front() || x > xs.back() || r < rs.front() || r > rs.back()) {
            ++*misses;
            return 0.0;
        }
        const std::size_t nr = rs.size();
        const std::size_t n = xs.size();
        std::size_t j = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
        const std::size_t s = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - 2, 0,
                                                         static_cast<std::ptrdiff_t>(n) - 4);
        double col[4];
        for (int a = 0; a < 4; ++a)
            col[a] = detail::interpolate_cubic(rs, std::span<const double>(vals->data() + (s + a) * nr, nr), r);
        return detail::interpolate_cubic(std::span<const double>(xs.data() + s, 4), col, x);
    };
    return out;
}

}  // namespace sonar
