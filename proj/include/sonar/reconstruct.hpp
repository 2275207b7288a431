#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "sonar/error.hpp"
#include "sonar/format.hpp"
#include "sonar/fractional.hpp"
#include "sonar/phantom.hpp"
#include "sonar/radon.hpp"
#include "sonar/relations.hpp"
#include "sonar/sonar.hpp"

namespace sonar {

struct Window {
    double x0 = -1, x1 = 1, y0 = 0, y1 = 2;

    void validate() const {
        if (!(x1 > x0) || !(y1 > y0)) throw DomainError("window: need x0 < x1 and y0 < y1");
        if (y0 < 0) throw DomainError("window: must lie in the upper half-plane");
    }
    double cx() const { return 0.5 * (x0 + x1); }
    double cy() const { return 0.5 * (y0 + y1); }
};

struct ReconstructionOptions {
    int resolution = 128;  // pixels per side
    int angles = 90;       // directions over [0, pi)
    int offsets = 128;     // detector positions per direction
};

struct ReconstructionResult {
    Window window;
    int nx = 0, ny = 0;
    std::vector<double> xs, ys;       // pixel centres
    std::vector<double> image;        // ny rows of nx values, row 0 at y0
    std::vector<double> reference;    // phantom on the same grid, empty if unknown
    double rel_l2_error = -1;         // < 0 when there is no reference
    std::vector<double> angles, offsets;
    std::vector<double> sinogram;     // angles.size() rows of offsets.size() values
    std::vector<std::string> warnings;
};

namespace detail {

// Ram-Lak filtering of each sinogram row: spatial kernel h[0] = 1 / (4 tau^2),
// h[odd n] = -1 / (pi n tau)^2, zero-padded FFT convolution, cosine taper above
// 80% of Nyquist. Returns tau (p * h).
inline std::vector<double> ramp_filter(const std::vector<double>& sino, int rows, int m, double tau) {
    int n = 1;
    while (n < 2 * m) n *= 2;
    const int nc = n / 2 + 1;
    std::vector<double> buf(n);
    std::vector<fftw_complex> freq(nc), kern(nc);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(n, buf.data(), freq.data(), FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(n, freq.data(), buf.data(), FFTW_ESTIMATE);

    std::fill(buf.begin(), buf.end(), 0.0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int k = 0; k < m; ++k) {
        double h = 0;
        if (k == 0) h = 1 / (4 * tau * tau);
        else if (k % 2 == 1) h = -1 / (pi2 * k * k * tau * tau);
        buf[k] = h;
        if (k > 0) buf[n - k] = h;
    }
    fftw_execute(fwd);
    for (int i = 0; i < nc; ++i) {
        const double f = static_cast<double>(i) / (nc - 1);  // fraction of Nyquist
        const double taper = f <= 0.8 ? 1.0 : 0.5 * (1 + std::cos(std::numbers::pi * (f - 0.8) / 0.2));
        kern[i][0] = freq[i][0] * taper;
        kern[i][1] = freq[i][1] * taper;
    }

    std::vector<double> out(sino.size());
    for (int r = 0; r < rows; ++r) {
        std::fill(buf.begin(), buf.end(), 0.0);
        std::copy_n(sino.begin() + static_cast<std::ptrdiff_t>(r) * m, m, buf.begin());
        fftw_execute(fwd);
        for (int i = 0; i < nc; ++i) {
            const double a = freq[i][0], b = freq[i][1];
            freq[i][0] = a * kern[i][0] - b * kern[i][1];
            freq[i][1] = a * kern[i][1] + b * kern[i][0];
        }
        fftw_execute(bwd);
        for (int k = 0; k < m; ++k) out[static_cast<std::size_t>(r) * m + k] = tau * buf[k] / n;
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    return out;
}

// Values of R_s on the slanted lines {omega x - cot(beta) y = p} for one sign
// omega, assembled from sonar data. Rows sit at offsets p_i; each row tabulates
// g = R_{1/y} S over the angle, then applies W at the requested betas. The row
// spacing is fine near the support and grows geometrically away from it.
class SlantedTable {
public:
    SlantedTable(const SonarData& d, double omega, std::vector<double> betas, double p_lo, double p_hi,
                 const QuadratureSpec& spec)
        : cd_(circle_data(d, omega)), betas_(std::move(betas)), spec_(spec) {
        const double u0 = cd_.support[0], u1 = cd_.support[1];
        const double dp0 = 0.04;
        auto step = [&](double p) { return std::max(dp0, 0.025 * (u0 - 1 - p)); };
        double p = std::min(p_hi, u1) + 2 * dp0;
        std::vector<double> rows;
        while (true) {
            rows.push_back(p);
            if (p < p_lo - 2 * step(p) && rows.size() > 4) break;
            p -= step(p);
        }
        std::reverse(rows.begin(), rows.end());
        p_ = rows;
        values_.assign(p_.size() * betas_.size(), 0.0);
        for (std::size_t i = 0; i < p_.size(); ++i) fill_row(i);
    }

    // R_s at offset p and the k-th beta, cubic in p across rows.
    double operator()(double p, std::size_t k) const {
        if (p < p_.front() || p > p_.back()) return 0;
        const std::size_t j = std::upper_bound(p_.begin(), p_.end(), p) - p_.begin();
        const std::size_t s = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) - 2, 0,
                                                         static_cast<std::ptrdiff_t>(p_.size()) - 4);
        std::array<double, 4> x{}, v{};
        for (int a = 0; a < 4; ++a) {
            x[a] = p_[s + a];
            v[a] = values_[(s + a) * betas_.size() + k];
        }
        return interpolate_cubic(x, v, p);
    }

    std::size_t rows() const { return p_.size(); }

private:
    void fill_row(std::size_t i) {
        const double p = p_[i];
        const double tmax = wedge_theta_max(cd_.support, p);
        double top = 0;
        for (double b : betas_)
            if (b < tmax) top = std::max(top, b + 2 * stencil_step(b, tmax, spec_));
        if (top == 0) return;
        const ZGrid zg = z_grid(top, angular_step(tmax, spec_));
        std::vector<double> g(zg.theta.size(), 0.0);
        for (std::size_t j = 1; j < g.size(); ++j)
            g[j] = radon_weighted(cd_, p, zg.theta[j], WeightSpec::reciprocal(), spec_).value;
        for (std::size_t k = 0; k < betas_.size(); ++k) {
            const double b = betas_[k];
            if (b >= tmax) continue;
            values_[i * betas_.size() + k] = w_from_table(zg, g, b, stencil_step(b, tmax, spec_), spec_);
        }
    }

    CircleData cd_;
    std::vector<double> betas_;
    QuadratureSpec spec_;
    std::vector<double> p_;
    std::vector<double> values_;
};

// Whether the line cos(a) x + sin(a) y = q meets the box.
inline bool line_meets_box(double ca, double sa, double q, const Box& b) {
    double lo = 1e300, hi = -1e300;
    for (double x : {b.lo[0], b.hi[0]})
        for (double y : {b.ylo(), b.yhi()}) {
            const double v = ca * x + sa * y;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    return q > lo && q < hi;
}

}  // namespace detail

// Filtered back-projection of a parallel-beam sinogram assembled from sonar
// data alone: slanted lines through W o R_{1/y} o S, the vertical direction
// through the tangent-sphere limit and the horizontal one through D^(1/2) o R_h o S.
inline ReconstructionResult reconstruct_2d(const SonarData& d, const Window& win,
                                           const ReconstructionOptions& opt = {}, const QuadratureSpec& spec = {}) {
    win.validate();
    spec.validate();
    if (d.dim != 2) throw DimensionError("reconstruct_2d: reconstruction is implemented for n = 2 only");
    if (opt.resolution < 2 || opt.angles < 2 || opt.offsets < 8)
        throw DomainError("reconstruct_2d: need resolution >= 2, angles >= 2, offsets >= 8");
    const double pi = std::numbers::pi;
    const Box& box = d.support;
    ReconstructionResult res;
    res.window = win;
    res.nx = res.ny = opt.resolution;

    // offsets reach every corner of the window and of the support box
    const double cx = win.cx(), cy = win.cy();
    double T = std::hypot(win.x1 - cx, win.y1 - cy);
    if (!box.empty())
        for (double x : {box.lo[0], box.hi[0]})
            for (double y : {box.ylo(), box.yhi()}) T = std::max(T, std::hypot(x - cx, y - cy));
    const int K = opt.angles, M = opt.offsets;
    const double tau = 2 * T / (M - 1);
    for (int k = 0; k < K; ++k) res.angles.push_back(k * pi / K);
    for (int m = 0; m < M; ++m) res.offsets.push_back(-T + m * tau);
    res.sinogram.assign(static_cast<std::size_t>(K) * M, 0.0);

    if (!box.empty()) {
        // slanted samples, grouped by the sign of omega
        struct Sample {
            std::size_t index;
            double p;
            std::size_t beta;
        };
        for (double omega : {-1.0, 1.0}) {
            std::vector<double> betas;
            std::vector<Sample> samples;
            double p_lo = 1e300, p_hi = -1e300;
            for (int k = 0; k < K; ++k) {
                const double a = res.angles[k], ca = std::cos(a), sa = std::sin(a);
                if (k == 0 || 2 * k == K) continue;
                if ((ca < 0) != (omega > 0)) continue;
                const double beta = omega < 0 ? pi / 2 - a : a - pi / 2;
                betas.push_back(beta);
                for (int m = 0; m < M; ++m) {
                    const double q = res.offsets[m] + ca * cx + sa * cy;
                    if (!detail::line_meets_box(ca, sa, q, box)) continue;
                    const double p = omega < 0 ? -q / ca : q / ca;
                    samples.push_back({static_cast<std::size_t>(k) * M + m, p, betas.size() - 1});
                    p_lo = std::min(p_lo, p);
                    p_hi = std::max(p_hi, p);
                }
            }
            if (samples.empty()) continue;
            for (double b : betas)
                if (b < 0.1 || b > pi / 2 - 0.1) {
                    res.warnings.push_back("slanted lines with beta outside [0.1, pi/2 - 0.1] are included");
                    break;
                }
            const detail::SlantedTable table(d, omega, betas, p_lo, p_hi, spec);
            for (const auto& s : samples) res.sinogram[s.index] = table(s.p, s.beta);
        }

        // vertical direction, a = 0
        for (int m = 0; m < M; ++m) {
            const double q = res.offsets[m] + cx;
            if (!detail::line_meets_box(1, 0, q, box)) continue;
            res.sinogram[m] = radon_from_sonar(d, Vertical{UnitVector::sign(1), q}, spec);
        }

        // horizontal direction, a = pi/2, from one profile of R_h o S
        if (K % 2 == 0) {
            const std::size_t row = static_cast<std::size_t>(K / 2) * M;
            const double ytop = T + cy;
            const double dy = spec.profile_spacing;
            const int n = static_cast<int>(std::ceil(ytop / dy)) + 3;
            std::vector<double> ys(n), v(n, 0.0);
            for (int j = 0; j < n; ++j) {
                ys[j] = j * dy;
                if (j > 0) v[j] = detail::sonar_radon_h(d, ys[j], spec);
            }
            const RadialProfile rh = frac_derivative(RadialProfile(ys, v), FractionalOrder(0.5), spec);
            for (int m = 0; m < M; ++m) {
                const double q = res.offsets[m] + cy;
                if (q > box.ylo() && q < box.yhi()) res.sinogram[row + m] = rh(q);
            }
        }
    }

    // filter and back-project: f(x) = (pi / K) sum_k q_k((x - c) . theta_k)
    const auto filtered = detail::ramp_filter(res.sinogram, K, M, tau);
    const int N = opt.resolution;
    for (int i = 0; i < N; ++i) res.xs.push_back(win.x0 + (i + 0.5) * (win.x1 - win.x0) / N);
    for (int j = 0; j < N; ++j) res.ys.push_back(win.y0 + (j + 0.5) * (win.y1 - win.y0) / N);
    res.image.assign(static_cast<std::size_t>(N) * N, 0.0);
    for (int k = 0; k < K; ++k) {
        const double ca = std::cos(res.angles[k]), sa = std::sin(res.angles[k]);
        const double* q = filtered.data() + static_cast<std::size_t>(k) * M;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                const double t = (res.xs[i] - cx) * ca + (res.ys[j] - cy) * sa;
                const double u = (t + T) / tau;
                const int m = static_cast<int>(std::floor(u));
                if (m < 0 || m + 1 >= M) continue;
                const double w = u - m;
                res.image[static_cast<std::size_t>(j) * N + i] += (1 - w) * q[m] + w * q[m + 1];
            }
    }
    for (double& v : res.image) v *= pi / K;
    return res;
}

// Fills the reference image from the phantom and the relative L2 error.
inline void attach_reference(ReconstructionResult& r, const Phantom& f) {
    if (f.dim() != 2) throw DimensionError("attach_reference: phantom must be 2-D");
    r.reference.assign(r.image.size(), 0.0);
    double num = 0, den = 0;
    for (int j = 0; j < r.ny; ++j)
        for (int i = 0; i < r.nx; ++i) {
            const std::size_t at = static_cast<std::size_t>(j) * r.nx + i;
            r.reference[at] = f.eval({r.xs[i], r.ys[j]});
            num += (r.image[at] - r.reference[at]) * (r.image[at] - r.reference[at]);
            den += r.reference[at] * r.reference[at];
        }
    r.rel_l2_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Binary 16-bit graymap, top row at the largest y, values scaled linearly
// from [min, max] of the image to [0, 65535].
inline void write_pgm16(std::ostream& os, const ReconstructionResult& r) {
    double lo = 0, hi = 0;
    if (!r.image.empty()) {
        lo = *std::min_element(r.image.begin(), r.image.end());
        hi = *std::max_element(r.image.begin(), r.image.end());
    }
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    os << "P5\n" << r.nx << " " << r.ny << "\n65535\n";
    for (int j = r.ny - 1; j >= 0; --j)
        for (int i = 0; i < r.nx; ++i) {
            const double v = (r.image[static_cast<std::size_t>(j) * r.nx + i] - lo) * scale;
            const auto u = static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, 65535L));
            const char bytes[2] = {static_cast<char>(u >> 8), static_cast<char>(u & 0xff)};
            os.write(bytes, 2);
        }
}

// Plain-text dump: "x y value" or "x y value reference" per pixel.
inline void write_value_dump(std::ostream& os, const ReconstructionResult& r) {
    const bool ref = !r.reference.empty();
    os << (ref ? "# x y value reference\n" : "# x y value\n");
    for (int j = 0; j < r.ny; ++j)
        for (int i = 0; i < r.nx; ++i) {
            const std::size_t at = static_cast<std::size_t>(j) * r.nx + i;
            os << fmt17(r.xs[i]) << " " << fmt17(r.ys[j]) << " " << fmt17(r.image[at]);
            if (ref) os << " " << fmt17(r.reference[at]);
            os << "\n";
        }
}

}  // namespace sonar
