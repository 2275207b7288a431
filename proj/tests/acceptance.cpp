// End-to-end acceptance run: one PASS/FAIL line per criterion, each with an
// accuracy bound and a wall-clock limit. Exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "sonar/reconstruct.hpp"
#include "sonar/relations.hpp"

using namespace sonar;

namespace {

const double pi = std::numbers::pi;

Phantom p2() { return Phantom(2, {gaussian_bump({0, 1}, 0.25, 1, 1.0)}); }
Phantom p3() { return Phantom(3, {poly_bump({0, 0, 1}, 0.6, 1, 3)}); }

RadialProfile test_profile() {
    auto y = linspace(0, 3, 512);
    std::vector<double> v;
    for (double t : y) v.push_back(std::exp(-(t - 1) * (t - 1)) * t * t);
    return RadialProfile(y, v);
}

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// "name err < bound" and whether it holds.
std::pair<bool, std::string> below(const std::string& name, double err, double bound) {
    const bool ok = err < bound;
    return {ok, name + " " + sci(err) + (ok ? " < " : " >= ") + sci(bound)};
}

struct Detail {
    bool ok = true;
    std::string text;
    void add(const std::pair<bool, std::string>& item) {
        ok = ok && item.first;
        text += (text.empty() ? "" : "; ") + item.second;
    }
    Outcome done() const { return {ok, text}; }
};

// Sup-norm error per plane class (column 0 of the slanted_nd grid).
std::map<int, double> per_class_error(const IdentityReport& r) {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by;
    for (std::size_t i = 0; i < r.lhs.size(); ++i) {
        auto& [l, rr] = by[static_cast<int>(r.grid[i][0])];
        l.push_back(r.lhs[i]);
        rr.push_back(r.rhs[i]);
    }
    std::map<int, double> out;
    for (const auto& [k, v] : by) out[k] = IdentityReport::sup_error(v.first, v.second);
    return out;
}

Outcome semigroup() {
    Detail d;
    d.add(below("rel_err", check_semigroup(test_profile(), {{0.7, 0.8}}).max_rel_err, 1e-6));
    return d.done();
}

Outcome fractional_inverse() {
    Detail d;
    for (double nu : {0.5, 1.0, 1.5, 2.0})
        d.add(below("nu=" + fmt17(nu), check_inverse(test_profile(), {nu}, {}, {}).max_rel_err, 1e-4));
    return d.done();
}

Outcome vw_inverse() {
    std::vector<double> beta;
    for (int i = 1; i <= 256; ++i) beta.push_back(i * (pi / 2) / 257);
    const auto r = check_inverse(test_profile(), {}, [](double t) { return std::sin(2 * t); }, beta);
    Detail d;
    d.add(below("rel_err", r.max_rel_err, 1e-4));
    return d.done();
}

Outcome john() {
    Detail d;
    for (int n : {2, 3}) d.add(below("n=" + std::to_string(n), check_john(n, john_cases(n)).max_rel_err, 1e-8));
    const double exact[3] = {2 * pi, 4 * pi, 2 * pi * pi};
    double worst = 0;
    for (int n = 2; n <= 4; ++n) worst = std::max(worst, std::abs(sphere_area(n) - exact[n - 2]) / exact[n - 2]);
    d.add(below("sphere_area", worst, 4 * std::numeric_limits<double>::epsilon()));
    return d.done();
}

Outcome horizontal() {
    Detail d;
    const auto y2 = linspace(0.05, 2.2, 64), y3 = linspace(0.3, 1.8, 32);
    d.add(below("P2 I-form", check_horizontal(p2(), y2).max_rel_err, 1e-3));
    d.add(below("P3 I-form", check_horizontal(p3(), y3).max_rel_err, 5e-3));
    d.add(below("P2 D-form", check_horizontal(p2(), y2, {}, Form::derivative).max_rel_err, 1e-2));
    d.add(below("P3 D-form", check_horizontal(p3(), y3, {}, Form::derivative).max_rel_err, 1e-2));
    return d.done();
}

Outcome vertical() {
    std::vector<Vertical> planes;
    for (double p : linspace(-0.35, 0.35, 8)) planes.push_back({UnitVector::sign(1), p});
    const auto r = check_vertical(p2(), planes);
    double raw = 0, ext = 0;
    for (const auto& [k, v] : r.summary) (k == "raw_max_rel_err" ? raw : ext) = v;
    Detail d;
    d.add(below("rel_err", r.max_rel_err, 1e-2));
    d.add(below("extrapolated", ext, raw));
    return d.done();
}

Outcome slanted2d() {
    std::vector<Slanted> rays;
    for (double p : linspace(-1.5, -0.3, 5))
        for (double b : linspace(0.1, pi / 2 - 0.1, 16)) rays.push_back({UnitVector::sign(1), p, b});
    Detail d;
    d.add(below("V-form", check_slanted_2d(p2(), rays).max_rel_err, 1e-2));
    d.add(below("W-form", check_slanted_2d(p2(), rays, {}, Form::derivative).max_rel_err, 2e-2));
    return d.done();
}

Outcome cylinder() {
    std::vector<CylinderParam> cyl;
    const auto p = linspace(-0.2, 0.2, 8);
    for (std::size_t k = 0; k < p.size(); ++k)
        for (double r : linspace(0.45, 1.6, 32)) cyl.push_back({UnitVector::angle(pi * k / p.size()), p[k], r});
    Detail d;
    d.add(below("I-form", check_cylinder(p3(), cyl).max_rel_err, 5e-3));
    return d.done();
}

Outcome recovery() {
    std::vector<HyperplaneParam> planes2, planes3;
    for (double y : {0.8, 1.0, 1.2}) planes2.push_back(Horizontal{y});
    for (double p : {-0.2, 0.0, 0.2}) planes2.push_back(Vertical{UnitVector::sign(1), p});
    for (double b : {0.3, 0.7, 1.1, 1.4}) planes2.push_back(Slanted{UnitVector::sign(1), -1 / std::tan(b), b});
    planes2.push_back(Slanted{UnitVector::sign(-1), -0.5, 0.9});
    for (double y : {0.8, 1.2}) planes3.push_back(Horizontal{y});
    for (double p : {-0.2, 0.1}) planes3.push_back(Vertical{UnitVector::angle(0.3), p});
    for (double b : {0.5, 1.0}) planes3.push_back(Slanted{UnitVector::angle(0.3), -1 / std::tan(b), b});
    planes3.push_back(Slanted{UnitVector::angle(2.0), -0.9, 0.8});
    Detail d;
    const char* names[3] = {"horizontal", "vertical", "slanted"};
    for (const auto& [label, f, planes] :
         {std::tuple{"P2", p2(), planes2}, std::tuple{"P3", p3(), planes3}}) {
        const auto r = check_slanted_nd(f, planes);
        for (const auto& [k, e] : per_class_error(r)) d.add(below(std::string(label) + " " + names[k], e, 3e-2));
    }
    return d.done();
}

Outcome reconstruction() {
    const Phantom f = p2();
    const SonarData data = make_sonar_data(f);
    ReconstructionOptions o;
    auto r90 = reconstruct_2d(data, Window{}, o);
    attach_reference(r90, f);
    o.angles = 180;
    auto r180 = reconstruct_2d(data, Window{}, o);
    attach_reference(r180, f);
    Detail d;
    d.add(below("90 angles", r90.rel_l2_error, 0.05));
    d.add(below("180 angles", r180.rel_l2_error, 1.1 * r90.rel_l2_error));
    return d.done();
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"fractional semigroup", 5, semigroup},
        {"fractional inversion", 5, fractional_inverse},
        {"V/W inversion", 5, vw_inverse},
        {"John identity and sphere areas", 1, john},
        {"horizontal identity", 60, horizontal},
        {"vertical identity", 30, vertical},
        {"slanted 2-D identity", 120, slanted2d},
        {"cylinder identity", 180, cylinder},
        {"Radon recovery from sonar data", 300, recovery},
        {"2-D reconstruction", 600, reconstruction},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_s;
        const bool pass = o.ok && in_time;
        failed += !pass;
        std::printf("criterion %zu %s: %s | %s; time %.2f s %s %.0f s\n", i + 1, pass ? "PASS" : "FAIL", c.name,
                    o.detail.c_str(), secs, in_time ? "<" : ">=", c.limit_s);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
