#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sonar/numerics.hpp"
#include "sonar/profile.hpp"

using namespace sonar;

namespace {

// erf by its Taylor series, summed until terms vanish.
double erf_series(double x) {
    double term = x, sum = x;
    for (int k = 1; k < 400; ++k) {
        term *= -x * x / k;
        const double add = term / (2 * k + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 2 / std::sqrt(std::numbers::pi) * sum;
}

}  // namespace

TEST(Integrate1d, Constant) {
    EXPECT_DOUBLE_EQ(2.0, integrate_1d([](double) { return 1.0; }, 0, 2, {}));
}

TEST(Integrate1d, QuadraticIsExactForTwoNodes) {
    QuadratureSpec spec;
    spec.nodes_per_panel = 2;
    spec.panels = 1;
    EXPECT_NEAR(1.0 / 3.0, integrate_1d([](double x) { return x * x; }, 0, 1, spec), 1e-15);
}

TEST(Integrate1d, GaussianAgainstErfSeries) {
    // the series is accurate to ~1e-9 at x = 6 because of cancellation, so
    // compare through the complement via std::erfc as well
    const double oracle = std::sqrt(std::numbers::pi) * std::erf(6.0);
    EXPECT_NEAR(std::sqrt(std::numbers::pi), integrate_1d([](double x) { return std::exp(-x * x); }, -6, 6, {}),
                1e-12);
    EXPECT_NEAR(oracle, integrate_1d([](double x) { return std::exp(-x * x); }, -6, 6, {}), 1e-13);
    const double half = std::sqrt(std::numbers::pi) / 2 * erf_series(1.5);
    EXPECT_NEAR(half, integrate_1d([](double x) { return std::exp(-x * x); }, 0, 1.5, {}), 1e-13);
}

TEST(Integrate1d, LinearOnRandomPolynomials) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a(6), b(6);
        for (auto& c : a) c = u(rng);
        for (auto& c : b) c = u(rng);
        const double al = u(rng), be = u(rng);
        auto poly = [](const std::vector<double>& c, double x) {
            double v = 0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
            return v;
        };
        const double lo = -1, hi = 1.7;
        const double lhs = integrate_1d([&](double x) { return al * poly(a, x) + be * poly(b, x); }, lo, hi, {});
        const double rhs = al * integrate_1d([&](double x) { return poly(a, x); }, lo, hi, {}) +
                           be * integrate_1d([&](double x) { return poly(b, x); }, lo, hi, {});
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Integrate1d, NonFiniteSampleNamesTheNode) {
    try {
        integrate_1d([](double x) { return x > 0.5 ? std::nan("") : 1.0; }, 0, 1, {});
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("node"), std::string::npos);
    }
}

TEST(Integrate1d, RejectsReversedInterval) {
    EXPECT_THROW(integrate_1d([](double) { return 1.0; }, 1, 0, {}), DomainError);
}

TEST(EndpointSingular, ArcsineOracle) {
    EXPECT_NEAR(std::numbers::pi / 2, integrate_endpoint_singular([](double) { return 1.0; }, 1, -0.5, {}), 1e-14);
}

TEST(EndpointSingular, PlainIntegralOfOne) {
    EXPECT_NEAR(1.0, integrate_endpoint_singular([](double) { return 1.0; }, 1, 0, {}), 1e-14);
}

TEST(EndpointSingular, LinearTimesInverseRoot) {
    EXPECT_NEAR(2.0, integrate_endpoint_singular([](double s) { return s; }, 2, -0.5, {}), 1e-13);
}

TEST(EndpointSingular, StrongSingularityNeedsGrading) {
    // int_0^1 (1 - s^2)^(-3/4) ds = B(1/2, 1/4) / 2
    const double oracle = std::tgamma(0.5) * std::tgamma(0.25) / (2 * std::tgamma(0.75));
    EXPECT_NEAR(oracle, integrate_endpoint_singular([](double) { return 1.0; }, 1, -0.75, {}), 1e-12);
    // int_0^y (y^2 - s^2)^(-0.3) s ds = y^1.4 / 1.4
    EXPECT_NEAR(std::pow(1.7, 1.4) / 1.4, integrate_endpoint_singular([](double s) { return s; }, 1.7, -0.3, {}),
                1e-12);
}

TEST(EndpointSingular, PositiveExponents) {
    // int_0^y sqrt(y^2 - s^2) ds = pi y^2 / 4
    EXPECT_NEAR(std::numbers::pi * 2.25 / 4,
                integrate_endpoint_singular([](double) { return 1.0; }, 1.5, 0.5, {}), 1e-13);
    // int_0^y (y^2 - s^2)^0.2 s ds = y^2.4 / 2.4
    EXPECT_NEAR(std::pow(0.8, 2.4) / 2.4, integrate_endpoint_singular([](double s) { return s; }, 0.8, 0.2, {}),
                1e-13);
}

TEST(EndpointSingular, WithoutSubstitutionAgrees) {
    QuadratureSpec plain;
    plain.singular_substitution = false;
    for (double e : {-0.5, -0.3, 0.0, 0.4}) {
        auto g = [](double s) { return std::cos(s) + s * s; };
        EXPECT_NEAR(integrate_endpoint_singular(g, 1.3, e, {}), integrate_endpoint_singular(g, 1.3, e, plain), 1e-10)
            << "exponent " << e;
    }
}

TEST(EndpointSingular, ExponentZeroMatchesRegular) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), y = 0.5 + std::abs(u(rng)) * 2;
        auto g = [&](double s) { return a * std::sin(3 * s) + b * std::exp(-s) + c * s * s; };
        EXPECT_NEAR(integrate_1d(g, 0, y, {}), integrate_endpoint_singular(g, y, 0, {}), 1e-12);
    }
}

TEST(EndpointSingular, DivergentKernelRejected) {
    EXPECT_THROW(integrate_endpoint_singular([](double) { return 1.0; }, 1, -1, {}), DomainError);
}

TEST(UnitSphere, Areas) {
    auto one = [](std::span<const double>) { return 1.0; };
    EXPECT_NEAR(2 * std::numbers::pi, integrate_unit_sphere(one, 2, {}), 1e-13);
    EXPECT_NEAR(4 * std::numbers::pi, integrate_unit_sphere(one, 3, {}), 1e-12);
    EXPECT_THROW(integrate_unit_sphere(one, 4, {}), DimensionError);
}

TEST(UnitSphere, SquaredPlaneWave) {
    const double w[3] = {0.48, -0.6, 0.64};
    auto g = [&](std::span<const double> t) {
        const double d = w[0] * t[0] + w[1] * t[1] + w[2] * t[2];
        return d * d;
    };
    EXPECT_NEAR(4 * std::numbers::pi / 3, integrate_unit_sphere(g, 3, {}), 1e-12);
}

TEST(UnitSphere, SurfaceAreaFormula) {
    EXPECT_DOUBLE_EQ(2 * std::numbers::pi, sphere_area(2));
    EXPECT_DOUBLE_EQ(4 * std::numbers::pi, sphere_area(3));
    EXPECT_DOUBLE_EQ(2 * std::numbers::pi * std::numbers::pi, sphere_area(4));
}

TEST(ExtrapolateLimit, Constant) {
    std::vector<std::pair<double, double>> s = {{1, 5}, {2, 5}, {4, 5}};
    EXPECT_DOUBLE_EQ(5.0, extrapolate_limit(s).value);
}

TEST(ExtrapolateLimit, ExactModel) {
    std::vector<std::pair<double, double>> s = {{10, 3 + 0.1}, {20, 3 + 0.05}};
    EXPECT_NEAR(3.0, extrapolate_limit(s).value, 1e-14);
    EXPECT_NEAR(0.05, extrapolate_limit(s).uncertainty, 1e-14);
}

TEST(ExtrapolateLimit, SecondOrderTerm) {
    std::vector<std::pair<double, double>> s;
    for (double x : {10.0, 20.0, 40.0}) s.emplace_back(x, 2 + 1 / x + 1 / (x * x));
    EXPECT_NEAR(2.0, extrapolate_limit(s).value, 5e-3);
}

TEST(ExtrapolateLimit, ExactOnAnyReciprocalSequence) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int k = 0; k < 10; ++k) {
        const double v = u(rng), c = u(rng);
        std::vector<std::pair<double, double>> s;
        for (double x = 3; x < 50; x *= 2) s.emplace_back(x, v + c / x);
        EXPECT_NEAR(v, extrapolate_limit(s).value, 1e-12);
    }
}

TEST(ExtrapolateLimit, NeedsTwoSamples) {
    std::vector<std::pair<double, double>> s = {{1, 1}};
    EXPECT_THROW(extrapolate_limit(s), DomainError);
}

TEST(Interpolation, CubicIsReproduced) {
    std::vector<double> x = {0, 0.1, 0.35, 0.5, 0.9, 1.2, 2.0};
    std::vector<double> v;
    for (double a : x) v.push_back(1 - 2 * a + a * a * a);
    RadialProfile p(x, v);
    for (double t : {0.05, 0.4, 1.0, 1.9, 2.2}) EXPECT_NEAR(1 - 2 * t + t * t * t, p(t), 1e-12);
}

TEST(Interpolation, DerivativeExactOnQuartics) {
    std::vector<double> x = {0.0, 0.2, 0.3, 0.45, 0.7, 0.8, 1.1};
    std::vector<double> v;
    for (double a : x) v.push_back(a * a * a * a - a);
    auto d = detail::differentiate(x, v);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(4 * x[i] * x[i] * x[i] - 1, d[i], 1e-11);
}

TEST(Profiles, InvariantsEnforced) {
    EXPECT_THROW(RadialProfile({0, 0.1, 0.1}, {1, 2, 3}), DomainError);
    EXPECT_THROW(RadialProfile({-0.1, 0.1}, {1, 2}), DomainError);
    EXPECT_THROW(RadialProfile({0, 1}, {1}), DomainError);
    EXPECT_THROW(AngularProfile({0.0, 0.5}, {1, 2}), DomainError);
    EXPECT_THROW(AngularProfile({0.5, std::numbers::pi / 2}, {1, 2}), DomainError);
    EXPECT_NO_THROW(AngularProfile({0.1, 1.2}, {1, 2}));
}

TEST(QuadratureSpecTest, Validation) {
    QuadratureSpec s;
    EXPECT_NO_THROW(s.validate());
    s.limit_steps = 1;
    EXPECT_THROW(s.validate(), DomainError);
    s = {};
    s.limit_ratio = 1;
    EXPECT_THROW(s.validate(), DomainError);
    s = {};
    s.nodes_per_panel = 1;
    EXPECT_THROW(s.validate(), DomainError);
}
