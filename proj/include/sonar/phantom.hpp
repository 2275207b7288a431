#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/numerics.hpp"

namespace sonar {

enum class PrimitiveKind { gaussian, ball, poly };

// A radial bump on H^n. Coordinates are (x_1 .. x_{n-1}, y); y is the height
// above the centerset.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::gaussian;
    int dim = 2;
    std::array<double, 2> x{};  // centerset coordinates of the centre (x[1] unused when dim == 2)
    double y = 1;               // height of the centre
    double amplitude = 1;
    double width = 1;           // gaussian only
    double radius = 1;          // support radius (gaussian cutoff, ball/poly radius)
    int power = 2;              // poly only

    // Value as a function of the squared distance to the centre.
    double radial(double d2) const {
        const double r2 = radius * radius;
        if (!(d2 < r2)) return 0;
        switch (kind) {
            case PrimitiveKind::gaussian:
                return amplitude * std::exp(-d2 / (width * width));
            case PrimitiveKind::ball:
                return amplitude;
            case PrimitiveKind::poly:
                return amplitude * std::pow(1 - d2 / r2, power);
        }
        return 0;
    }

    double distance2(std::span<const double> p) const {
        double d2 = 0;
        for (int i = 0; i + 1 < dim; ++i) d2 += (p[i] - x[i]) * (p[i] - x[i]);
        const double dy = p[dim - 1] - y;
        return d2 + dy * dy;
    }

    double eval(std::span<const double> p) const {
        if (p[dim - 1] <= 0) return 0;
        return radial(distance2(p));
    }

    void validate() const {
        if (dim != 2 && dim != 3) throw DimensionError("primitive: dimension must be 2 or 3");
        for (double c : {x[0], x[1], y, amplitude, width, radius})
            if (!std::isfinite(c)) throw DomainError("primitive: non-finite parameter");
        if (!(radius > 0)) throw DomainError("primitive: radius/cutoff must be positive");
        if (kind == PrimitiveKind::gaussian && !(width > 0))
            throw DomainError("primitive: gaussian width must be positive");
        if (kind == PrimitiveKind::poly && power < 2)
            throw DomainError("primitive: poly power must be >= 2");
        // the support may touch the centerset but not cross it
        if (y - radius < -1e-12 * std::max(1.0, radius))
            throw DomainError("primitive: support must lie in the upper half-space");
    }
};

namespace detail {
inline Primitive make_primitive(PrimitiveKind kind, std::span<const double> center) {
    if (center.size() != 2 && center.size() != 3)
        throw DimensionError("primitive: centre must have 2 or 3 coordinates");
    Primitive p;
    p.kind = kind;
    p.dim = static_cast<int>(center.size());
    for (int i = 0; i + 1 < p.dim; ++i) p.x[i] = center[i];
    p.y = center[p.dim - 1];
    return p;
}
}  // namespace detail

inline Primitive gaussian_bump(std::vector<double> center, double width, double amplitude, double cutoff) {
    Primitive p = detail::make_primitive(PrimitiveKind::gaussian, center);
    p.width = width;
    p.amplitude = amplitude;
    p.radius = cutoff;
    p.validate();
    return p;
}

inline Primitive ball_indicator(std::vector<double> center, double radius, double amplitude) {
    Primitive p = detail::make_primitive(PrimitiveKind::ball, center);
    p.radius = radius;
    p.amplitude = amplitude;
    p.validate();
    return p;
}

inline Primitive poly_bump(std::vector<double> center, double radius, double amplitude, int power) {
    Primitive p = detail::make_primitive(PrimitiveKind::poly, center);
    p.radius = radius;
    p.amplitude = amplitude;
    p.power = power;
    p.validate();
    return p;
}

// Axis-aligned box; coordinates ordered (x_1 .. x_{n-1}, y).
struct Box {
    int dim = 2;
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};

    double ylo() const { return lo[dim - 1]; }
    double yhi() const { return hi[dim - 1]; }
    bool empty() const { return !(hi[0] >= lo[0]); }
};

class Phantom {
public:
    explicit Phantom(int dim = 2, std::vector<Primitive> terms = {}) : dim_(dim), terms_(std::move(terms)) {
        if (dim_ != 2 && dim_ != 3) throw DimensionError("phantom: dimension must be 2 or 3");
        for (const auto& t : terms_) {
            t.validate();
            if (t.dim != dim_) throw DimensionError("phantom: primitive dimension differs from phantom");
        }
    }

    int dim() const { return dim_; }
    const std::vector<Primitive>& terms() const { return terms_; }

    Phantom& add(const Primitive& p) {
        p.validate();
        if (p.dim != dim_) throw DimensionError("phantom: primitive dimension differs from phantom");
        terms_.push_back(p);
        return *this;
    }

    double eval(std::span<const double> point) const {
        if (static_cast<int>(point.size()) != dim_)
            throw DimensionError("eval: point has " + std::to_string(point.size()) +
                                 " coordinates, phantom has dimension " + std::to_string(dim_));
        double v = 0;
        for (const auto& t : terms_) v += t.eval(point);
        return v;
    }

    double eval(std::initializer_list<double> point) const {
        return eval(std::span<const double>(point.begin(), point.size()));
    }

    // Smallest box containing every primitive support. Empty phantoms give an
    // empty box (lo > hi).
    Box support_bounds() const {
        Box b;
        b.dim = dim_;
        b.lo.fill(std::numeric_limits<double>::infinity());
        b.hi.fill(-std::numeric_limits<double>::infinity());
        for (const auto& t : terms_) {
            for (int i = 0; i < dim_; ++i) {
                const double c = i + 1 < dim_ ? t.x[i] : t.y;
                b.lo[i] = std::min(b.lo[i], c - t.radius);
                b.hi[i] = std::max(b.hi[i], c + t.radius);
            }
        }
        if (!terms_.empty()) b.lo[dim_ - 1] = std::max(0.0, b.lo[dim_ - 1]);
        return b;
    }

    // Half the largest side of support_bounds.
    double support_radius() const {
        if (terms_.empty()) return 0;
        const Box b = support_bounds();
        double r = 0;
        for (int i = 0; i < dim_; ++i) r = std::max(r, 0.5 * (b.hi[i] - b.lo[i]));
        return r;
    }

    // Integral over R^n, primitive by primitive, with exact chord limits and a
    // sine substitution that removes the square-root behaviour at the poles.
    double mass(const QuadratureSpec& spec = {}) const {
        double total = 0;
        const double hp = std::numbers::pi / 2;
        for (const auto& t : terms_) {
            const double R = t.radius;
            std::array<double, 3> pt{};
            if (dim_ == 2) {
                total += integrate_1d(
                    [&](double u) {
                        const double yy = t.y + R * std::sin(u);
                        const double h = R * std::cos(u);
                        const double inner = integrate_1d(
                            [&](double x) {
                                pt = {x, yy, 0};
                                return t.eval(std::span<const double>(pt.data(), 2));
                            },
                            t.x[0] - h, t.x[0] + h, spec);
                        return inner * R * std::cos(u);
                    },
                    -hp, hp, spec);
            } else {
                total += integrate_1d(
                    [&](double u) {
                        const double yy = t.y + R * std::sin(u);
                        const double rho = R * std::cos(u);
                        const double slice = integrate_1d(
                            [&](double v) {
                                const double x1 = t.x[0] + rho * std::sin(v);
                                const double h = rho * std::cos(v);
                                const double inner = integrate_1d(
                                    [&](double x2) {
                                        pt = {x1, x2, yy};
                                        return t.eval(std::span<const double>(pt.data(), 3));
                                    },
                                    t.x[1] - h, t.x[1] + h, spec);
                                return inner * rho * std::cos(v);
                            },
                            -hp, hp, spec);
                        return slice * R * std::cos(u);
                    },
                    -hp, hp, spec);
            }
        }
        return total;
    }

private:
    int dim_;
    std::vector<Primitive> terms_;
};

// Text format:
//   dim 2
//   primitive gaussian
//   center 0 1
//   width 0.25
//   amplitude 1
//   cutoff 1
//   end
// Kinds: gaussian (width, cutoff), ball (radius), poly (radius, power).
// '#' starts a comment.
inline Phantom parse_phantom(std::istream& in) {
    int dim = 0;
    int line_no = 0;
    std::vector<Primitive> terms;
    std::string line;
    bool in_block = false;
    int block_line = 0;
    std::string kind;
    std::map<std::string, std::vector<double>> fields;

    auto finish_block = [&]() {
        auto need = [&](const std::string& key) -> const std::vector<double>& {
            auto it = fields.find(key);
            if (it == fields.end())
                throw ParseError("primitive '" + kind + "' is missing field '" + key + "'", block_line);
            return it->second;
        };
        auto scalar = [&](const std::string& key) {
            const auto& v = need(key);
            if (v.size() != 1) throw ParseError("field '" + key + "' takes one value", block_line);
            return v[0];
        };
        const auto& c = need("center");
        if (static_cast<int>(c.size()) != dim)
            throw ParseError("center has " + std::to_string(c.size()) + " coordinates, dim is " +
                                 std::to_string(dim),
                             block_line);
        const double amp = fields.count("amplitude") ? scalar("amplitude") : 1.0;
        try {
            if (kind == "gaussian") {
                terms.push_back(gaussian_bump(c, scalar("width"), amp, scalar("cutoff")));
            } else if (kind == "ball") {
                terms.push_back(ball_indicator(c, scalar("radius"), amp));
            } else if (kind == "poly") {
                const double pw = scalar("power");
                if (pw != std::floor(pw)) throw ParseError("field 'power' must be an integer", block_line);
                terms.push_back(poly_bump(c, scalar("radius"), amp, static_cast<int>(pw)));
            } else {
                throw ParseError("unknown primitive kind '" + kind + "'", block_line);
            }
        } catch (const DomainError& e) {
            throw ParseError(e.what(), block_line);
        }
        fields.clear();
        in_block = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "dim") {
            if (dim != 0) throw ParseError("duplicate dim header", line_no);
            if (!(ls >> dim) || (dim != 2 && dim != 3))
                throw ParseError("dim must be 2 or 3", line_no);
            continue;
        }
        if (dim == 0) throw ParseError("expected 'dim n' header before '" + key + "'", line_no);
        if (key == "primitive") {
            if (in_block) throw ParseError("'primitive' inside an open block (missing 'end')", line_no);
            if (!(ls >> kind)) throw ParseError("'primitive' needs a kind", line_no);
            in_block = true;
            block_line = line_no;
            continue;
        }
        if (key == "end") {
            if (!in_block) throw ParseError("'end' without 'primitive'", line_no);
            finish_block();
            continue;
        }
        if (!in_block) throw ParseError("field '" + key + "' outside a primitive block", line_no);
        static const char* known[] = {"center", "width", "amplitude", "cutoff", "radius", "power"};
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ParseError("unknown field '" + key + "'", line_no);
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) {
            try {
                std::size_t used = 0;
                double v = std::stod(tok, &used);
                if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
                vals.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("field '" + key + "': bad number '" + tok + "'", line_no);
            }
        }
        if (vals.empty()) throw ParseError("field '" + key + "' has no value", line_no);
        if (fields.count(key)) throw ParseError("duplicate field '" + key + "'", line_no);
        fields[key] = std::move(vals);
    }
    if (in_block) throw ParseError("unterminated primitive block", block_line);
    if (dim == 0) throw ParseError("missing 'dim n' header", line_no);
    return Phantom(dim, std::move(terms));
}

inline Phantom parse_phantom(const std::string& text) {
    std::istringstream in(text);
    return parse_phantom(in);
}

}  // namespace sonar
