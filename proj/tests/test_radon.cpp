#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "sonar/radon.hpp"

using namespace sonar;

namespace {

const double pi = std::numbers::pi;

// Line integral of a truncated radial Gaussian at perpendicular distance d.
double gauss_line(double amp, double w, double R, double d) {
    if (std::abs(d) >= R) return 0;
    const double h = std::sqrt(R * R - d * d);
    return amp * std::exp(-d * d / (w * w)) * w * std::sqrt(pi) * std::erf(h / w);
}

// Plane integral of a truncated radial Gaussian in R^3 at distance d.
double gauss_plane(double amp, double w, double R, double d) {
    if (std::abs(d) >= R) return 0;
    const double rho2 = R * R - d * d;
    return amp * std::exp(-d * d / (w * w)) * pi * w * w * (1 - std::exp(-rho2 / (w * w)));
}

// Line integral along an explicit direction vector, fine panels.
double line_oracle(const Phantom& f, double x0, double dx, double dy) {
    QuadratureSpec fine;
    fine.panels = 200;
    return integrate_1d([&](double t) { return f.eval({x0 + t * dx, t * dy}); }, 0, 10, fine);
}

// Cylinder transform integrated angle-first with exact chord limits in the axis variable.
double cylinder_oracle(const Phantom& f, const CylinderParam& c) {
    QuadratureSpec fine;
    fine.panels = 64;
    const UnitVector w = c.omega.perp();
    return integrate_1d(
        [&](double phi) {
            const double u = c.p + c.r * std::cos(phi), y = c.r * std::sin(phi);
            double total = 0;
            for (const auto& t : f.terms()) {
                const double q2 = (u - c.omega.dot(t.x)) * (u - c.omega.dot(t.x)) + (y - t.y) * (y - t.y);
                if (q2 >= t.radius * t.radius) continue;
                const double h = std::sqrt(t.radius * t.radius - q2), ac = w.dot(t.x);
                Phantom single(3, {t});
                total += integrate_1d(
                    [&](double a) {
                        return single.eval({u * c.omega.c[0] + a * w.c[0], u * c.omega.c[1] + a * w.c[1], y});
                    },
                    ac - h, ac + h, fine);
            }
            return c.r * total;
        },
        0, pi, fine);
}

const Phantom two_term_2d(2, {gaussian_bump({0, 1}, 0.25, 1, 1.0), poly_bump({0.4, 0.8}, 0.5, -0.6, 3)});
const Phantom two_term_3d(3, {poly_bump({0, 0, 1}, 0.6, 1, 3), gaussian_bump({0.3, -0.2, 0.9}, 0.2, 0.7, 0.8)});

}  // namespace

TEST(RadonH, AboveSupportIsZero) {
    Phantom f(2, {gaussian_bump({0, 1}, 0.25, 1, 1.0)});
    EXPECT_EQ(0.0, radon_h(f, 2.5));
    EXPECT_THROW(radon_h(f, 0), DomainError);
}

TEST(RadonH, GaussianAtCentreHeight) {
    Phantom f(2, {gaussian_bump({0, 1}, 0.25, 1, 1.0)});
    EXPECT_NEAR(0.25 * std::sqrt(pi), radon_h(f, 1.0), 1e-8);
    Phantom g(3, {gaussian_bump({0.2, 0.1, 1}, 0.25, 2, 1.0)});
    EXPECT_NEAR(gauss_plane(2, 0.25, 1.0, 0.0), radon_h(g, 1.0), 1e-12);
}

TEST(RadonH, NearlySeparableGaussian) {
    // exp(-(x^2 + (y - b)^2) / w^2) = g(x) h(y) up to the far cutoff
    const double w = 0.12;
    Phantom f(2, {gaussian_bump({0, 1}, w, 1, 1.0)});
    for (double y : {0.9, 1.05, 1.2}) EXPECT_NEAR(std::exp(-(y - 1) * (y - 1) / (w * w)) * w * std::sqrt(pi), radon_h(f, y), 1e-12);
}

TEST(RadonCenterset, TwoDimensionalIsPointValue) {
    auto g = [](std::span<const double> x, double y) { return x[0] * 10 + y; };
    EXPECT_EQ(-3.0 * 10 + 0.5, radon_centerset(g, 0.5, UnitVector::sign(-1), 3.0));
}

TEST(RadonCenterset, ConstantOnSegment) {
    const double c = 2.5, L = 1.4;
    auto g = [&](std::span<const double> x, double) { return std::abs(x[1]) <= L / 2 ? c : 0.0; };
    EXPECT_NEAR(c * L, radon_centerset(g, 1.0, UnitVector::angle(0), 0.3, -L / 2, L / 2, {}), 1e-13);
}

TEST(RadonCenterset, GaussianMarginal) {
    const double s = 0.4;
    auto g = [&](std::span<const double> x, double) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (s * s)); };
    const UnitVector om = UnitVector::angle(0.7);
    for (double p : {0.0, 0.25, -0.5}) EXPECT_NEAR(std::exp(-p * p / (s * s)) * s * std::sqrt(pi), radon_centerset(g, 1.0, om, p), 1e-12);
}

TEST(RadonV, MissAndChord) {
    Phantom f(2, {ball_indicator({0, 1}, 0.5, 1)});
    EXPECT_EQ(0.0, radon_v(f, UnitVector::sign(1), 0.7));
    EXPECT_NEAR(1.0, radon_v(f, UnitVector::sign(1), 0.0), 1e-14);
}

TEST(RadonV, GaussianMarginal2d) {
    Phantom f(2, {gaussian_bump({0.1, 1.2}, 0.2, 1.5, 1.0)});
    for (double p : {0.0, 0.3, -0.45})
        for (double s : {1.0, -1.0})
            EXPECT_NEAR(gauss_line(1.5, 0.2, 1.0, s * p - 0.1), radon_v(f, UnitVector::sign(s), p), 1e-12);
}

TEST(RadonV, GaussianMarginal3d) {
    Phantom f(3, {gaussian_bump({0.1, -0.2, 1.2}, 0.2, 1.5, 1.0)});
    const UnitVector om = UnitVector::angle(0.9);
    for (double p : {0.0, 0.3, -0.45}) {
        const double d = om.c[0] * 0.1 - om.c[1] * 0.2 - p;
        EXPECT_NEAR(gauss_plane(1.5, 0.2, 1.0, d), radon_v(f, om, p), 1e-11);
    }
}

TEST(RadonS, MissAndDiameter) {
    Phantom f(2, {ball_indicator({0, 1}, 0.5, 1)});
    EXPECT_EQ(0.0, radon_s(f, {UnitVector::sign(1), 3.0, 0.3}));
    // the plane through the centre at angle beta starts at p = -cot(beta)
    const double beta = 0.8;
    EXPECT_NEAR(1.0, radon_s(f, {UnitVector::sign(1), -1 / std::tan(beta), beta}), 1e-13);
}

TEST(RadonS, BallChordMatchesDirectionVectorOracle) {
    Phantom f(2, {ball_indicator({0.2, 1}, 0.5, 1)});
    for (double om : {1.0, -1.0}) {
        for (double beta : {0.4, 1.0, 1.4}) {
            const double p = -0.9;
            const double dist = (om * 0.2 - p) * std::sin(beta) - std::cos(beta);
            const double chord = std::abs(dist) < 0.5 ? 2 * std::sqrt(0.25 - dist * dist) : 0.0;
            const double v = radon_s(f, {UnitVector::sign(om), p, beta});
            EXPECT_NEAR(chord, v, 1e-12);
            EXPECT_NEAR(line_oracle(f, om * p, om * std::cos(beta), std::sin(beta)), v, 1e-3);
        }
    }
}

TEST(RadonS, GaussianRotatedMarginal) {
    Phantom f(2, {gaussian_bump({0.1, 1.2}, 0.2, 1.5, 1.0)});
    for (double beta : {0.3, 0.9, 1.3}) {
        for (double p : {-1.0, 0.0, 0.4}) {
            const double dist = (0.1 - p) * std::sin(beta) - 1.2 * std::cos(beta);
            EXPECT_NEAR(gauss_line(1.5, 0.2, 1.0, dist), radon_s(f, {UnitVector::sign(1), p, beta}), 1e-12);
        }
    }
}

TEST(RadonS, Gaussian3d) {
    Phantom f(3, {gaussian_bump({0.1, -0.2, 1.2}, 0.2, 1.5, 1.0)});
    const UnitVector om = UnitVector::angle(2.0);
    for (double beta : {0.4, 1.1}) {
        const double p = -0.5;
        const double dist = (om.c[0] * 0.1 - om.c[1] * 0.2 - p) * std::sin(beta) - 1.2 * std::cos(beta);
        EXPECT_NEAR(gauss_plane(1.5, 0.2, 1.0, dist), radon_s(f, {om, p, beta}), 1e-11);
    }
}

TEST(RadonS, ApproachesVerticalAsBetaTendsToRightAngle) {
    for (const Phantom* f : {&two_term_2d, &two_term_3d}) {
        const UnitVector om = f->dim() == 2 ? UnitVector::sign(1) : UnitVector::angle(0.3);
        const double p = 0.1;
        const double v = radon_v(*f, om, p);
        double prev = 1e300;
        for (double frac : {0.49, 0.499, 0.4999}) {
            const double err = std::abs(radon_s(*f, {om, p, frac * pi}) - v);
            EXPECT_LT(err, prev);
            prev = err;
        }
        EXPECT_LT(prev, 1e-3);
    }
}

TEST(RadonFamily, Linearity) {
    for (const Phantom* f : {&two_term_2d, &two_term_3d}) {
        Phantom a(f->dim(), {f->terms()[0]}), b(f->dim(), {f->terms()[1]});
        const UnitVector om = f->dim() == 2 ? UnitVector::sign(-1) : UnitVector::angle(1.0);
        EXPECT_NEAR(radon_h(*f, 0.9), radon_h(a, 0.9) + radon_h(b, 0.9), 1e-12);
        EXPECT_NEAR(radon_v(*f, om, 0.1), radon_v(a, om, 0.1) + radon_v(b, om, 0.1), 1e-12);
        const Slanted s{om, -0.7, 0.9};
        EXPECT_NEAR(radon_s(*f, s), radon_s(a, s) + radon_s(b, s), 1e-12);
        const CylinderParam c{om, 0.1, 0.95};
        EXPECT_NEAR(cylinder_transform(*f, c), cylinder_transform(a, c) + cylinder_transform(b, c), 1e-12);
    }
}

TEST(RadonWeighted, ZeroData) {
    CircleData g{{-1, 1, 0, 2}, [](double, double) { return 0.0; }};
    EXPECT_EQ(0.0, radon_weighted(g, 0.0, 0.7, WeightSpec::reciprocal()).value);
}

TEST(RadonWeighted, UnitWeightOnIndicator) {
    const double p = 0.2;
    CircleData g{{p + 0.5, p + 3, 0, 2}, [&](double c, double) { return c >= p + 1 && c <= p + 2 ? 1.0 : 0.0; }};
    EXPECT_NEAR(1.0, radon_weighted(g, p, 0.7, WeightSpec::unit()).value, 2e-2);
}

TEST(RadonWeighted, SmoothDataMatchesPlainRayIntegration) {
    const double p = -0.3, beta = 0.6;
    auto data = [](double c, double r) {
        const double d2 = (c - 0.5) * (c - 0.5) + (r - 0.6) * (r - 0.6);
        return d2 < 0.25 ? std::pow(1 - 4 * d2, 3) : 0.0;
    };
    CircleData g{{-1, 2, 0, 1.5}, data};
    QuadratureSpec fine;
    fine.panels = 200;
    for (const WeightSpec& w : {WeightSpec::unit(), WeightSpec::reciprocal(), WeightSpec::power_law(-0.5)}) {
        const double oracle = integrate_1d([&](double s) { return data(p + s, s * std::sin(beta)) * w(s); }, 1e-9, 20, fine);
        const auto got = radon_weighted(g, p, beta, w);
        EXPECT_NEAR(oracle, got.value, 1e-7);
        EXPECT_TRUE(got.reliable);
    }
}

TEST(RadonWeighted, FlagsNonVanishingDataUnderReciprocalWeight) {
    CircleData g{{-1, 1, 0, 2}, [](double, double) { return 1.0; }};
    EXPECT_FALSE(radon_weighted(g, 0.0, 0.7, WeightSpec::reciprocal()).reliable);
    EXPECT_TRUE(radon_weighted(g, 0.0, 0.7, WeightSpec::unit()).reliable);
}

TEST(RadonWeighted, LinearInData) {
    auto d1 = [](double c, double r) { return std::exp(-c * c - (r - 1) * (r - 1)); };
    auto d2 = [](double c, double r) { return std::sin(c) * r * r; };
    const std::array<double, 4> box{-1, 1, 0, 2};
    CircleData a{box, d1}, b{box, d2}, ab{box, [&](double c, double r) { return 2 * d1(c, r) - 3 * d2(c, r); }};
    const auto w = WeightSpec::unit();
    EXPECT_NEAR(radon_weighted(ab, -0.5, 0.8, w).value,
                2 * radon_weighted(a, -0.5, 0.8, w).value - 3 * radon_weighted(b, -0.5, 0.8, w).value, 1e-12);
}

TEST(Cylinder, MissAndDegenerateCase) {
    Phantom f(3, {poly_bump({0, 0, 1}, 0.6, 1, 3)});
    EXPECT_EQ(0.0, cylinder_transform(f, {UnitVector::angle(0), 3.0, 0.5}));
    EXPECT_THROW(cylinder_transform(f, {UnitVector::angle(0), 0.0, 0.0}), DomainError);
    Phantom g(2, {gaussian_bump({0, 1}, 0.25, 1, 1.0)});
    EXPECT_EQ(sonar_2d(g, -0.3, 1.1), cylinder_transform(g, {UnitVector::sign(-1), 0.3, 1.1}));
}

TEST(Cylinder, BallIndicatorAreaAgainstAngleFirstOrder) {
    Phantom f(3, {ball_indicator({0.1, 0.2, 1.0}, 0.5, 1)});
    const CylinderParam c{UnitVector::angle(0.4), 0.05, 1.0};
    EXPECT_NEAR(cylinder_oracle(f, c), cylinder_transform(f, c), 1e-4);
}

TEST(Cylinder, AxisFirstMatchesAngleFirst) {
    for (const auto& c : {CylinderParam{UnitVector::angle(0.0), 0.0, 1.0}, CylinderParam{UnitVector::angle(0.8), 0.3, 0.8},
                          CylinderParam{UnitVector::angle(2.5), -0.2, 1.3}}) {
        EXPECT_NEAR(cylinder_oracle(two_term_3d, c), cylinder_transform(two_term_3d, c), 1e-8);
    }
}

TEST(SinogramIo, RoundTrip) {
    std::vector<SinogramRow> rows = {{'H', {1.25}, 0.1}, {'V', {1, 0.3}, 1.0 / 3}, {'S', {0.6, 0.8, -0.5, 0.7}, 2.5e-9}};
    std::stringstream ss;
    write_sinogram(ss, rows);
    auto back = read_sinogram(ss);
    ASSERT_EQ(3u, back.size());
    EXPECT_EQ('S', back[2].tag);
    EXPECT_EQ(rows[1].value, back[1].value);
    EXPECT_EQ(rows[2].params, back[2].params);
    std::stringstream bad("X 1 2\n");
    EXPECT_THROW(read_sinogram(bad), ParseError);
}
