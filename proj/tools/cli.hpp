#pragma once

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/format.hpp"
#include "sonar/phantom.hpp"
#include "sonar/radon.hpp"
#include "sonar/reconstruct.hpp"
#include "sonar/relations.hpp"
#include "sonar/sonar.hpp"

namespace sonar::cli {

namespace fs = std::filesystem;

enum ExitCode { exit_ok = 0, exit_verify_failed = 1, exit_usage = 2, exit_domain = 3 };

// Bad flags, missing files, or requests outside the supported scope.
class UsageError : public Error {
public:
    using Error::Error;
};

// Inclusive-endpoint grid "start:stop:count".
inline std::vector<double> parse_grid(const std::string& text, const std::string& what) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError(what + ": bad number '" + item + "' in '" + text + "'");
        parts.push_back(v);
    }
    if (parts.size() != 3) throw UsageError(what + ": expected start:stop:count, got '" + text + "'");
    const double count = parts[2];
    if (!(count >= 1) || count != std::floor(count) || count > 1e7)
        throw UsageError(what + ": count must be a positive integer");
    if (count == 1 && parts[0] != parts[1]) throw UsageError(what + ": a single point needs start == stop");
    return linspace(parts[0], parts[1], static_cast<int>(count));
}

inline void require_input(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError("missing input: " + what);
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw UsageError("missing input: " + what + " '" + path + "' is not a file");
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + what + " '" + path + "'");
}

// The directory that will receive path must already exist.
inline void require_output_parent(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError("missing output path: " + what);
    fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) parent = ".";
    std::error_code ec;
    if (!fs::is_directory(parent, ec)) throw UsageError(what + ": directory '" + parent.string() + "' does not exist");
}

inline void require_output_dir(const std::string& path, const std::string& what) {
    std::error_code ec;
    if (path.empty() || !fs::is_directory(path, ec)) throw UsageError(what + ": directory '" + path + "' does not exist");
}

inline Phantom load_phantom(const std::string& path) {
    std::ifstream in(path);
    try {
        return parse_phantom(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline UnitVector direction(int n, double omega) {
    return n == 2 ? UnitVector::sign(omega) : UnitVector::angle(omega);
}

inline void add_spec_options(CLI::App* c, QuadratureSpec& s) {
    c->add_option("--panels", s.panels, "Gauss-Legendre panels per unit length")->capture_default_str();
    c->add_option("--nodes-per-panel", s.nodes_per_panel, "nodes per panel")->capture_default_str();
    c->add_option("--truncation", s.truncation, "half-width of generic centerset integrals")->capture_default_str();
    c->add_option("--limit-base", s.limit_base, "first tangent-sphere radius, <= 0 for automatic")
        ->capture_default_str();
    c->add_option("--limit-ratio", s.limit_ratio, "growth ratio of tangent-sphere radii")->capture_default_str();
    c->add_option("--limit-steps", s.limit_steps, "number of tangent spheres")->capture_default_str();
    c->add_option("--angular-points", s.angular_points, "samples across (0, pi/2)")->capture_default_str();
    c->add_option("--profile-spacing", s.profile_spacing, "spacing of internal radial profiles")
        ->capture_default_str();
}

// ---- forward ----

struct ForwardConfig {
    std::string transform, phantom, out;
    std::string centers, centers2, radii, y, p, beta;
    double omega = 1;
    QuadratureSpec spec;
};

inline int cmd_forward(const ForwardConfig& c, std::ostream& out) {
    require_input(c.phantom, "--phantom");
    require_output_parent(c.out, "--out");
    auto need = [](const std::string& v, const char* flag) {
        if (v.empty()) throw UsageError(std::string("transform needs ") + flag);
        return v;
    };
    // grids parse before any computation
    std::vector<double> centers, centers2, radii, ys, ps, betas;
    if (c.transform == "sonar") {
        centers = parse_grid(need(c.centers, "--centers"), "--centers");
        radii = parse_grid(need(c.radii, "--radii"), "--radii");
        if (!c.centers2.empty()) centers2 = parse_grid(c.centers2, "--centers2");
    } else if (c.transform == "radon-h") {
        ys = parse_grid(need(c.y, "--y"), "--y");
    } else {
        ps = parse_grid(need(c.p, "--p"), "--p");
        if (c.transform == "radon-s") betas = parse_grid(need(c.beta, "--beta"), "--beta");
        if (c.transform == "cylinder") radii = parse_grid(need(c.radii, "--radii"), "--radii");
    }
    const Phantom f = load_phantom(c.phantom);
    const int n = f.dim();
    std::ostringstream os;
    if (c.transform == "sonar") {
        std::vector<std::vector<double>> pts;
        if (n == 2) {
            if (!centers2.empty()) throw UsageError("--centers2 applies to 3-D phantoms only");
            for (double x : centers) pts.push_back({x});
        } else {
            if (centers2.empty()) throw UsageError("3-D sonar needs --centers2");
            for (double x1 : centers)
                for (double x2 : centers2) pts.push_back({x1, x2});
        }
        SonarTable t;
        t.dim = n;
        t.support = f.support_bounds();
        t.samples = sonar_grid(f, pts, radii, c.spec);
        write_sonar_table(os, t);
    } else {
        os << "# transform " << c.transform << "\n";
        if (c.transform == "radon-h") {
            os << "y value\n";
            for (double y : ys) os << fmt17(y) << " " << fmt17(radon_h(f, y, c.spec)) << "\n";
        } else {
            const UnitVector w = direction(n, c.omega);
            os << "# omega";
            for (double v : w.components()) os << " " << fmt17(v);
            os << "\n";
            if (c.transform == "radon-v") {
                os << "p value\n";
                for (double p : ps) os << fmt17(p) << " " << fmt17(radon_v(f, w, p, c.spec)) << "\n";
            } else if (c.transform == "radon-s") {
                os << "p beta value\n";
                for (double p : ps)
                    for (double b : betas)
                        os << fmt17(p) << " " << fmt17(b) << " " << fmt17(radon_s(f, Slanted{w, p, b}, c.spec)) << "\n";
            } else {
                os << "p r value\n";
                for (double p : ps)
                    for (double r : radii)
                        os << fmt17(p) << " " << fmt17(r) << " "
                           << fmt17(cylinder_transform(f, CylinderParam{w, p, r}, c.spec)) << "\n";
            }
        }
    }
    write_atomic(c.out, os.str());
    out << "wrote " << c.out << "\n";
    return exit_ok;
}

// ---- verify ----

struct VerifyConfig {
    std::vector<std::string> suites;
    std::vector<std::string> phantoms;
    std::string out_dir;
    std::string y, p, beta, radii;
    double tolerance = 0;
    QuadratureSpec spec;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"horizontal", "vertical", "slanted2d", "cylinder", "slanted_nd",
                                                "john", "semigroup", "inverse"};
    return names;
}

inline RadialProfile semigroup_profile() {
    auto y = linspace(0, 3, 512);
    std::vector<double> v;
    for (double t : y) v.push_back(std::exp(-(t - 1) * (t - 1)) * t * t);
    return RadialProfile(y, v);
}

// Default acceptance grids; --y, --p, --beta and --radii replace them.
inline std::vector<HyperplaneParam> recovery_planes(int n) {
    std::vector<HyperplaneParam> out;
    if (n == 2) {
        for (double y : {0.8, 1.0, 1.2}) out.push_back(Horizontal{y});
        for (double p : {-0.2, 0.0, 0.2}) out.push_back(Vertical{UnitVector::sign(1), p});
        for (double b : {0.3, 0.7, 1.1}) out.push_back(Slanted{UnitVector::sign(1), -1 / std::tan(b), b});
        out.push_back(Slanted{UnitVector::sign(-1), -0.5, 0.9});
    } else {
        for (double y : {0.8, 1.2}) out.push_back(Horizontal{y});
        out.push_back(Vertical{UnitVector::angle(0.3), 0.1});
        for (double b : {0.6, 1.0}) out.push_back(Slanted{UnitVector::angle(0.3), -1 / std::tan(b), b});
    }
    return out;
}

inline std::string report_file(const IdentityReport& r, int n) {
    std::string name = r.name;
    if (n > 0) name += "_n" + std::to_string(n);
    if (!r.form.empty()) name += "_" + r.form;
    return name + ".txt";
}

inline int cmd_verify(const VerifyConfig& c, std::ostream& out, std::ostream& err) {
    if (c.suites.empty()) throw UsageError("no suites requested");
    for (const auto& s : c.suites)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw UsageError("unknown suite '" + s + "'");
    for (const auto& p : c.phantoms) require_input(p, "--phantom");
    require_output_dir(c.out_dir, "--out-dir");
    std::optional<std::vector<double>> ys, ps, betas, radii;
    if (!c.y.empty()) ys = parse_grid(c.y, "--y");
    if (!c.p.empty()) ps = parse_grid(c.p, "--p");
    if (!c.beta.empty()) betas = parse_grid(c.beta, "--beta");
    if (!c.radii.empty()) radii = parse_grid(c.radii, "--radii");

    std::vector<Phantom> phantoms;
    for (const auto& p : c.phantoms) phantoms.push_back(load_phantom(p));
    auto with_dim = [&](const std::string& suite, std::initializer_list<int> dims) {
        std::vector<const Phantom*> out;
        for (const auto& f : phantoms)
            if (std::find(dims.begin(), dims.end(), f.dim()) != dims.end()) out.push_back(&f);
        if (out.empty()) throw UsageError("suite " + suite + " needs a phantom of suitable dimension");
        return out;
    };
    const double tol = c.tolerance;
    const QuadratureSpec& spec = c.spec;
    const double hp = std::numbers::pi / 2;

    // (report, phantom dimension or 0)
    std::vector<std::function<std::pair<IdentityReport, int>()>> jobs;
    for (const auto& s : c.suites) {
        if (s == "horizontal") {
            for (const Phantom* f : with_dim(s, {2, 3})) {
                const auto y = ys ? *ys : f->dim() == 2 ? linspace(0.05, 2.2, 64) : linspace(0.3, 1.8, 32);
                for (Form form : {Form::integral, Form::derivative})
                    jobs.push_back([=, &spec] { return std::pair{check_horizontal(*f, y, spec, form, tol), f->dim()}; });
            }
        } else if (s == "vertical") {
            for (const Phantom* f : with_dim(s, {2, 3})) {
                const auto p = ps ? *ps : linspace(-0.35, 0.35, 8);
                std::vector<Vertical> planes;
                for (double q : p) planes.push_back({f->dim() == 2 ? UnitVector::sign(1) : UnitVector::angle(0), q});
                jobs.push_back([=, &spec] { return std::pair{check_vertical(*f, planes, spec, tol), f->dim()}; });
            }
        } else if (s == "slanted2d") {
            for (const Phantom* f : with_dim(s, {2})) {
                const auto p = ps ? *ps : linspace(-1.5, -0.3, 5);
                const auto b = betas ? *betas : linspace(0.1, hp - 0.1, 16);
                std::vector<Slanted> rays;
                for (double q : p)
                    for (double a : b) rays.push_back({UnitVector::sign(1), q, a});
                for (Form form : {Form::integral, Form::derivative})
                    jobs.push_back([=, &spec] { return std::pair{check_slanted_2d(*f, rays, spec, form, tol), 2}; });
            }
        } else if (s == "cylinder") {
            for (const Phantom* f : with_dim(s, {3})) {
                const auto r = radii ? *radii : linspace(0.45, 1.6, 32);
                const auto p = ps ? *ps : linspace(-0.2, 0.2, 8);
                std::vector<CylinderParam> cyl;
                for (std::size_t k = 0; k < p.size(); ++k)
                    for (double rr : r)
                        cyl.push_back({UnitVector::angle(std::numbers::pi * k / p.size()), p[k], rr});
                for (Form form : {Form::integral, Form::derivative})
                    jobs.push_back([=, &spec] { return std::pair{check_cylinder(*f, cyl, spec, form, tol), 3}; });
            }
        } else if (s == "slanted_nd") {
            for (const Phantom* f : with_dim(s, {2, 3})) {
                const auto planes = recovery_planes(f->dim());
                jobs.push_back([=, &spec] { return std::pair{check_slanted_nd(*f, planes, spec, tol), f->dim()}; });
            }
        } else if (s == "john") {
            for (int n : {2, 3})
                jobs.push_back([=, &spec] { return std::pair{check_john(n, john_cases(n), spec, tol), n}; });
        } else if (s == "semigroup") {
            jobs.push_back([=, &spec] {
                return std::pair{check_semigroup(semigroup_profile(), {{0.7, 0.8}, {0.5, 0.5}, {1.0, 1.0}}, spec, tol), 0};
            });
        } else if (s == "inverse") {
            jobs.push_back([=, &spec] {
                std::vector<double> beta;
                for (int i = 1; i <= 256; ++i) beta.push_back(i * hp / 257);
                return std::pair{check_inverse(semigroup_profile(), {0.5, 1.0, 1.5, 2.0},
                                               [](double t) { return std::sin(2 * t); }, beta, spec, tol),
                                 0};
            });
        }
    }

    bool all = true;
    for (const auto& job : jobs) {
        const auto [rep, n] = job();
        std::ostringstream os;
        write_report(os, rep);
        const fs::path path = fs::path(c.out_dir) / report_file(rep, n);
        write_atomic(path, os.str());
        for (const auto& w : rep.warnings) err << "warning: " << rep.name << ": " << w << "\n";
        out << (rep.pass ? "PASS " : "FAIL ") << path.filename().string() << " max_rel_err "
            << fmt17(rep.max_rel_err) << " tolerance " << fmt17(rep.tolerance) << "\n";
        all = all && rep.pass;
    }
    return all ? exit_ok : exit_verify_failed;
}

// ---- reconstruct ----

struct ReconstructConfig {
    std::string phantom, sonar_table, out;
    std::vector<double> window{-1, 1, 0, 2};
    ReconstructionOptions options;
    QuadratureSpec spec;
};

inline int cmd_reconstruct(const ReconstructConfig& c, std::ostream& out, std::ostream& err) {
    if (c.phantom.empty() == c.sonar_table.empty())
        throw UsageError("missing input: give exactly one of --phantom or --sonar-table");
    if (!c.phantom.empty()) require_input(c.phantom, "--phantom");
    if (!c.sonar_table.empty()) require_input(c.sonar_table, "--sonar-table");
    require_output_parent(c.out, "--out");
    if (c.window.size() != 4) throw UsageError("--window needs x0,x1,y0,y1");
    const Window win{c.window[0], c.window[1], c.window[2], c.window[3]};

    const char* scope = "reconstruction is implemented for 2-D data only (n = 2); 3-D inversion is out of scope";
    std::optional<Phantom> phantom;
    SonarData data;
    std::shared_ptr<std::atomic<long>> misses;
    std::optional<std::pair<double, double>> table_x;
    if (!c.phantom.empty()) {
        phantom = load_phantom(c.phantom);
        if (phantom->dim() != 2) throw UsageError(scope);
        data = make_sonar_data(*phantom, c.spec);
    } else {
        std::ifstream in(c.sonar_table);
        SonarTable t;
        try {
            t = read_sonar_table(in);
        } catch (const ParseError& e) {
            throw ParseError(c.sonar_table + ": " + e.what());
        }
        if (t.dim != 2) throw UsageError(scope);
        TableSonar ts = sonar_data_from_table(t);
        data = ts.data;
        misses = ts.misses;
        table_x = std::pair{t.samples.front().center[0], t.samples.back().center[0]};
    }

    ReconstructionResult r = reconstruct_2d(data, win, c.options, c.spec);
    if (phantom) attach_reference(r, *phantom);
    const Box& b = data.support;
    if (b.empty() || win.x1 <= b.lo[0] || win.x0 >= b.hi[0] || win.y1 <= b.ylo() || win.y0 >= b.yhi())
        r.warnings.push_back("coverage: the window does not meet the support of the data");
    if (table_x && (win.x0 < table_x->first || win.x1 > table_x->second))
        r.warnings.push_back("coverage: the window extends beyond the tabulated sphere centres");
    if (misses && *misses > 0)
        r.warnings.push_back("coverage: " + std::to_string(misses->load()) +
                             " sonar queries fell outside the table and were taken as 0");

    std::ostringstream pgm, dump, sino, summary;
    write_pgm16(pgm, r);
    write_value_dump(dump, r);
    sino << "# angle offset value\n";
    for (std::size_t k = 0; k < r.angles.size(); ++k)
        for (std::size_t m = 0; m < r.offsets.size(); ++m)
            sino << fmt17(r.angles[k]) << " " << fmt17(r.offsets[m]) << " "
                 << fmt17(r.sinogram[k * r.offsets.size() + m]) << "\n";
    summary << "# reconstruction\n";
    summary << "resolution " << c.options.resolution << "\nangles " << c.options.angles << "\noffsets "
            << c.options.offsets << "\n";
    summary << "window " << fmt17(win.x0) << " " << fmt17(win.x1) << " " << fmt17(win.y0) << " " << fmt17(win.y1)
            << "\n";
    if (r.rel_l2_error >= 0)
        summary << "rel_l2_error " << fmt17(r.rel_l2_error) << "\n";
    else
        summary << "rel_l2_error unavailable\n";
    for (const auto& w : r.warnings) summary << "warning " << w << "\n";

    write_atomic(c.out + ".pgm", pgm.str());
    write_atomic(c.out + ".txt", dump.str());
    write_atomic(c.out + ".sinogram.txt", sino.str());
    write_atomic(c.out + ".summary.txt", summary.str());
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    out << "wrote " << c.out << ".pgm";
    if (r.rel_l2_error >= 0) out << " rel_l2_error " << fmt17(r.rel_l2_error);
    out << "\n";
    return exit_ok;
}

// ---- entry point ----

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sonar and Radon transforms: forward tables, identity verification, 2-D reconstruction",
                 "sonar_radon"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key = value config file; flags override it")->envname("SONAR_RADON_CONFIG");

    ForwardConfig fc;
    auto* fwd = app.add_subcommand("forward", "tabulate a transform of a phantom");
    fwd->add_option("--transform", fc.transform, "sonar, radon-h, radon-v, radon-s or cylinder")
        ->required()
        ->check(CLI::IsMember({"sonar", "radon-h", "radon-v", "radon-s", "cylinder"}));
    fwd->add_option("--phantom", fc.phantom, "phantom description file")->required();
    fwd->add_option("--out", fc.out, "output table")->required();
    fwd->add_option("--centers", fc.centers, "sphere centres (first coordinate), start:stop:count");
    fwd->add_option("--centers2", fc.centers2, "second centre coordinate for n = 3, start:stop:count");
    fwd->add_option("--radii", fc.radii, "sphere or cylinder radii, start:stop:count");
    fwd->add_option("--y", fc.y, "heights of horizontal planes, start:stop:count");
    fwd->add_option("--p", fc.p, "plane or axis offsets, start:stop:count");
    fwd->add_option("--beta", fc.beta, "slant angles in (0, pi/2), start:stop:count");
    fwd->add_option("--omega", fc.omega, "direction: +1 or -1 for n = 2, an angle in radians for n = 3")
        ->capture_default_str();
    add_spec_options(fwd, fc.spec);

    VerifyConfig vc;
    auto* ver = app.add_subcommand("verify", "run identity suites and write one report per suite");
    ver->add_option("--suites", vc.suites, "comma-separated subset of: horizontal, vertical, slanted2d, cylinder, "
                                           "slanted_nd, john, semigroup, inverse")
        ->delimiter(',');
    ver->add_option("--phantom", vc.phantoms, "phantom description file; repeat for 2-D and 3-D");
    ver->add_option("--out-dir", vc.out_dir, "directory for the reports")->required();
    ver->add_option("--y", vc.y, "horizontal heights, start:stop:count");
    ver->add_option("--p", vc.p, "offsets, start:stop:count");
    ver->add_option("--beta", vc.beta, "slant angles, start:stop:count");
    ver->add_option("--radii", vc.radii, "cylinder radii, start:stop:count");
    ver->add_option("--tolerance", vc.tolerance, "override every suite's tolerance (> 0)");
    add_spec_options(ver, vc.spec);

    ReconstructConfig rc;
    auto* rec = app.add_subcommand("reconstruct", "2-D image from sonar data by filtered back-projection");
    rec->add_option("--phantom", rc.phantom, "2-D phantom; its sonar transform is the data");
    rec->add_option("--sonar-table", rc.sonar_table, "2-D sonar table with a support line");
    rec->add_option("--out", rc.out, "output prefix for .pgm, .txt, .sinogram.txt, .summary.txt")->required();
    rec->add_option("--window", rc.window, "x0,x1,y0,y1")->delimiter(',')->expected(4)->capture_default_str();
    rec->add_option("--resolution", rc.options.resolution, "pixels per side")->capture_default_str();
    rec->add_option("--angles", rc.options.angles, "directions over [0, pi)")->capture_default_str();
    rec->add_option("--offsets", rc.options.offsets, "detector offsets per direction")->capture_default_str();
    add_spec_options(rec, rc.spec);

    if (const char* env = std::getenv("SONAR_RADON_CONFIG"); env && *env) {
        std::error_code ec;
        if (!fs::is_regular_file(env, ec)) {
            err << "error: SONAR_RADON_CONFIG names a missing file '" << env << "'\n";
            return exit_usage;
        }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*fwd) {
            fc.spec.validate();
            return cmd_forward(fc, out);
        }
        if (*ver) {
            vc.spec.validate();
            if (vc.tolerance < 0) throw UsageError("--tolerance must be positive");
            return cmd_verify(vc, out, err);
        }
        rc.spec.validate();
        return cmd_reconstruct(rc, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_domain;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace sonar::cli
