#include "odt/incident.hpp"

#include "odt/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {

constexpr cplx J{0.0, 1.0};

// 1 in the interior, raised cosine over `width` pixels at each border.
double taper_weight(std::size_t i, std::size_t n, std::size_t width) {
    if (width == 0) return 1.0;
    const std::size_t d = std::min(i, n - 1 - i);
    if (d >= width) return 1.0;
    return 0.5 - 0.5 * std::cos(std::numbers::pi * (static_cast<double>(d) + 0.5) / static_cast<double>(width));
}

// Spectrum of an m x m image placed on a finer (q m) x (q m) frequency grid,
// splitting the Nyquist bins so that real-valued band limits stay symmetric.
void upsample_spectrum(const std::vector<cplx>& coarse, std::size_t m, std::vector<cplx>& fine, std::size_t M) {
    std::fill(fine.begin(), fine.end(), cplx{});
    const double scale = static_cast<double>(M) * static_cast<double>(M) / (static_cast<double>(m) * m);
    const long half = static_cast<long>(m / 2);
    for (std::size_t jy = 0; jy < m; ++jy) {
        const long fy = frequency_index(jy, m);
        for (std::size_t jx = 0; jx < m; ++jx) {
            const long fx = frequency_index(jx, m);
            const cplx v = coarse[jy * m + jx] * scale;
            const int ny = (M > m && fy == half) ? 2 : 1;
            const int nx = (M > m && fx == half) ? 2 : 1;
            const double w = 1.0 / (nx * ny);
            for (int a = 0; a < ny; ++a)
                for (int b = 0; b < nx; ++b) {
                    const long gy = a == 0 ? fy : -fy;
                    const long gx = b == 0 ? fx : -fx;
                    fine[wrap_index(gy, M) * M + wrap_index(gx, M)] += w * v;
                }
        }
    }
}

} // namespace

cplx angular_spectrum_transfer(const std::array<double, 2>& omega, double dz, double k_b) {
    const double w2 = omega[0] * omega[0] + omega[1] * omega[1];
    const double d = k_b * k_b - w2;
    if (d >= 0.0) return std::exp(-J * (dz * std::sqrt(d)));
    return std::exp(-std::abs(dz) * std::sqrt(-d));
}

TiltedWaveSpec estimate_tilt(const ComplexField2D& y_in, double k_b) {
    const std::size_t nx = y_in.values().nx();
    const std::size_t ny = y_in.values().ny();
    std::vector<cplx> s(y_in.values().span().begin(), y_in.values().span().end());
    fft::forward2(s.data(), nx, ny);
    std::size_t best = 0;
    double peak = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::abs(s[i]) > peak) {
            peak = std::abs(s[i]);
            best = i;
        }
    if (peak == 0.0) throw std::invalid_argument("estimate_tilt: field is identically zero");
    const std::size_t bx = best % nx;
    const std::size_t by = best / nx;
    auto mag = [&](long dx, long dy) {
        const std::size_t x = wrap_index(static_cast<long>(bx) + dx, nx);
        const std::size_t y = wrap_index(static_cast<long>(by) + dy, ny);
        return std::abs(s[y * nx + x]);
    };
    auto vertex = [](double m1, double c, double p1) {
        const double den = m1 - 2.0 * c + p1;
        return den < 0.0 ? 0.5 * (m1 - p1) / den : 0.0;
    };
    const double ox = vertex(mag(-1, 0), peak, mag(1, 0));
    const double oy = vertex(mag(0, -1), peak, mag(0, 1));
    const double fx = static_cast<double>(frequency_index(bx, nx)) + ox;
    const double fy = static_cast<double>(frequency_index(by, ny)) + oy;
    TiltedWaveSpec t;
    t.k_tilt = {2.0 * std::numbers::pi * fx / (static_cast<double>(nx) * y_in.pitch()),
                2.0 * std::numbers::pi * fy / (static_cast<double>(ny) * y_in.pitch())};
    if (std::hypot(t.k_tilt[0], t.k_tilt[1]) > k_b)
        throw std::invalid_argument("estimate_tilt: evanescent tilt");
    return t;
}

IncidentVolume propagate_tilt_transfer(const ComplexField2D& y_in, const TiltedWaveSpec& tilt,
                                       const Geometry& geometry, const PropagationOptions& options) {
    const Shape3 n = geometry.shape();
    const std::size_t m = y_in.values().nx();
    if (y_in.values().ny() != m) throw std::invalid_argument("propagate_tilt_transfer: detector must be square");
    const double h = geometry.spacing();
    const double kb = geometry.wavenumber();
    const double ratio = y_in.pitch() / h;
    const std::size_t q = static_cast<std::size_t>(std::llround(ratio));
    if (q < 1 || std::abs(ratio - static_cast<double>(q)) > 1e-9 * ratio)
        throw std::invalid_argument("propagate_tilt_transfer: pitch must be an integer multiple of h");
    const std::size_t M = m * q;
    if (M < n.nx || M < n.ny) throw std::invalid_argument("propagate_tilt_transfer: detector smaller than the volume");
    if (std::hypot(tilt.k_tilt[0], tilt.k_tilt[1]) > kb)
        throw std::invalid_argument("propagate_tilt_transfer: evanescent tilt");
    const double k1 = tilt.k_tilt[0], k2 = tilt.k_tilt[1];
    const double pitch = y_in.pitch();
    const double xg = y_in.position();

    ComplexVolume u(n);

    if (!options.tilt_transfer) {
        // Plain angular spectrum of the zero-padded measurement.
        const std::size_t P = 2 * M;
        std::vector<cplx> spec(P * P, cplx{});
        std::vector<cplx> coarse(4 * m * m, cplx{});
        for (std::size_t iy = 0; iy < m; ++iy)
            for (std::size_t ix = 0; ix < m; ++ix)
                coarse[wrap_index(centered_index(iy, m), 2 * m) * 2 * m + wrap_index(centered_index(ix, m), 2 * m)] =
                    y_in.values()(ix, iy) * (taper_weight(ix, m, options.taper) * taper_weight(iy, m, options.taper));
        fft::forward2(coarse.data(), 2 * m, 2 * m);
        const double dw = 2.0 * std::numbers::pi / (static_cast<double>(2 * m) * pitch);
        std::vector<cplx> slice(P * P);
        std::vector<cplx> c2(coarse.size());
        for (std::size_t iz = 0; iz < n.nz; ++iz) {
            const double dz = xg - geometry.coordinate(2, iz);
            for (std::size_t jy = 0; jy < 2 * m; ++jy)
                for (std::size_t jx = 0; jx < 2 * m; ++jx) {
                    const std::array<double, 2> w{dw * static_cast<double>(frequency_index(jx, 2 * m)),
                                                  dw * static_cast<double>(frequency_index(jy, 2 * m))};
                    c2[jy * 2 * m + jx] = coarse[jy * 2 * m + jx] * angular_spectrum_transfer(w, dz, kb);
                }
            upsample_spectrum(c2, 2 * m, slice, P);
            fft::inverse2(slice.data(), P, P);
            for (std::size_t iy = 0; iy < n.ny; ++iy) {
                const std::size_t wy = wrap_index(centered_index(iy, n.ny), P);
                for (std::size_t ix = 0; ix < n.nx; ++ix)
                    u(ix, iy, iz) = slice[wy * P + wrap_index(centered_index(ix, n.nx), P)];
            }
        }
        return IncidentVolume{ComplexField3D(std::move(u), geometry), tilt, xg};
    }

    // Demodulated amplitude a = y exp(-j x.k).
    std::vector<cplx> a(m * m);
    for (std::size_t iy = 0; iy < m; ++iy) {
        const double y = pitch * static_cast<double>(centered_index(iy, m));
        for (std::size_t ix = 0; ix < m; ++ix) {
            const double x = pitch * static_cast<double>(centered_index(ix, m));
            const double w = taper_weight(ix, m, options.taper) * taper_weight(iy, m, options.taper);
            a[iy * m + ix] = y_in.values()(ix, iy) * std::polar(w, -(x * k1 + y * k2));
        }
    }
    fft::forward2(a.data(), m, m);

    // Remodulation on the fine grid, restricted to the crop.
    std::vector<cplx> remod_x(n.nx), remod_y(n.ny);
    for (std::size_t i = 0; i < n.nx; ++i) remod_x[i] = std::polar(1.0, k1 * geometry.coordinate(0, i));
    for (std::size_t i = 0; i < n.ny; ++i) remod_y[i] = std::polar(1.0, k2 * geometry.coordinate(1, i));

    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(m) * pitch);
#pragma omp parallel for schedule(static)
    for (std::size_t iz = 0; iz < n.nz; ++iz) {
        const double dz = xg - geometry.coordinate(2, iz);
        std::vector<cplx> b(m * m);
        for (std::size_t jy = 0; jy < m; ++jy)
            for (std::size_t jx = 0; jx < m; ++jx) {
                const std::array<double, 2> w{dw * static_cast<double>(frequency_index(jx, m)) + k1,
                                              dw * static_cast<double>(frequency_index(jy, m)) + k2};
                b[jy * m + jx] = a[jy * m + jx] * angular_spectrum_transfer(w, dz, kb);
            }
        std::vector<cplx> fine;
        if (q > 1) {
            fine.resize(M * M);
            upsample_spectrum(b, m, fine, M);
        }
        std::vector<cplx>& f = q > 1 ? fine : b;
        fft::inverse2(f.data(), M, M);
        for (std::size_t iy = 0; iy < n.ny; ++iy) {
            const std::size_t wy = wrap_index(centered_index(iy, n.ny), M);
            for (std::size_t ix = 0; ix < n.nx; ++ix)
                u(ix, iy, iz) = f[wy * M + wrap_index(centered_index(ix, n.nx), M)] * (remod_x[ix] * remod_y[iy]);
        }
    }
    return IncidentVolume{ComplexField3D(std::move(u), geometry), tilt, xg};
}

ComplexField2D propagate_plane(const ComplexField2D& field, const TiltedWaveSpec& tilt, double dz, double k_b) {
    const std::size_t nx = field.values().nx();
    const std::size_t ny = field.values().ny();
    const double pitch = field.pitch();
    const double k1 = tilt.k_tilt[0], k2 = tilt.k_tilt[1];
    std::vector<cplx> a(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix)
            a[iy * nx + ix] = field.values()(ix, iy) * std::polar(1.0, -(field.coordinate(0, ix) * k1 +
                                                                         field.coordinate(1, iy) * k2));
    fft::forward2(a.data(), nx, ny);
    const double dwx = 2.0 * std::numbers::pi / (static_cast<double>(nx) * pitch);
    const double dwy = 2.0 * std::numbers::pi / (static_cast<double>(ny) * pitch);
    for (std::size_t jy = 0; jy < ny; ++jy)
        for (std::size_t jx = 0; jx < nx; ++jx) {
            const std::array<double, 2> w{dwx * static_cast<double>(frequency_index(jx, nx)) + k1,
                                          dwy * static_cast<double>(frequency_index(jy, ny)) + k2};
            a[jy * nx + jx] *= angular_spectrum_transfer(w, dz, k_b);
        }
    fft::inverse2(a.data(), nx, ny);
    ComplexImage out(nx, ny);
    for (std::size_t iy = 0; iy < ny; ++iy)
        for (std::size_t ix = 0; ix < nx; ++ix)
            out(ix, iy) = a[iy * nx + ix] *
                          std::polar(1.0, field.coordinate(0, ix) * k1 + field.coordinate(1, iy) * k2);
    return ComplexField2D(std::move(out), pitch, field.position() - dz);
}

} // namespace odt
