#include "odt/green_kernel.hpp"

#include "odt/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {

constexpr cplx J{0.0, 1.0};

// Sorting the squared components makes the result independent of axis order,
// so samples at permuted frequency indices are bitwise equal.
double radial_norm(double a, double b, double c) {
    double s[3] = {a * a, b * b, c * c};
    std::sort(std::begin(s), std::end(s));
    return std::sqrt(s[0] + s[1] + s[2]);
}

std::array<double, 3> frequency_steps(const Geometry& g, int p) {
    std::array<double, 3> d{};
    for (int a = 0; a < 3; ++a) d[static_cast<std::size_t>(a)] = 2.0 * std::numbers::pi / (g.length(a) * p);
    return d;
}

} // namespace

cplx ghat_truncated_radius(double omega_norm, double radius, double k_b) {
    if (!(radius > 0.0) || !(k_b > 0.0)) throw std::invalid_argument("ghat_truncated: R and k_b must be positive");
    if (!(omega_norm >= 0.0)) throw std::invalid_argument("ghat_truncated: negative frequency");
    const cplx e = std::exp(J * (radius * k_b));
    if (std::abs(omega_norm - k_b) < 1e-9 * k_b)
        return J * (radius / (2.0 * k_b) - e * std::sin(radius * k_b) / (2.0 * k_b * k_b));
    const double x = radius * omega_norm;
    const double sinc = x == 0.0 ? 1.0 : std::sin(x) / x;
    const cplx num = 1.0 - e * (std::cos(x) - J * (k_b * radius * sinc));
    return num / ((omega_norm - k_b) * (omega_norm + k_b));
}

cplx ghat_truncated(double omega_norm, double L, double k_b) {
    if (!(L > 0.0)) throw std::invalid_argument("ghat_truncated: L must be positive");
    return ghat_truncated_radius(omega_norm, std::sqrt(3.0) * L, k_b);
}

ConvolutionKernel ConvolutionKernel::from_spectrum(Geometry geometry, Shape3 padded, int p,
                                                   std::vector<cplx> spectrum) {
    if (spectrum.size() != padded.size()) throw std::invalid_argument("from_spectrum: size does not match shape");
    return ConvolutionKernel(std::move(geometry), padded, p,
                             std::make_shared<const std::vector<cplx>>(std::move(spectrum)));
}

SpectralKernel SpectralKernel::build(const Geometry& geometry, int p, std::size_t memory_limit) {
    if (p < 2) throw std::invalid_argument("SpectralKernel: padding factor must be >= 2");
    const Shape3 n = geometry.shape();
    const std::size_t up = static_cast<std::size_t>(p);
    const Shape3 P{n.nx * up, n.ny * up, n.nz * up};
    const double bytes = static_cast<double>(P.nx) * static_cast<double>(P.ny) * static_cast<double>(P.nz) *
                         static_cast<double>(sizeof(cplx));
    if (bytes > static_cast<double>(memory_limit))
        throw std::length_error("SpectralKernel: padded grid exceeds the memory limit; use ReducedKernel");

    const auto d = frequency_steps(geometry, p);
    const double R = geometry.truncation_radius();
    const double kb = geometry.wavenumber();
    auto spec = std::make_shared<std::vector<cplx>>(P.size());
    auto& s = *spec;
#pragma omp parallel for schedule(static)
    for (std::size_t iz = 0; iz < P.nz; ++iz) {
        const double wz = d[2] * static_cast<double>(frequency_index(iz, P.nz));
        for (std::size_t iy = 0; iy < P.ny; ++iy) {
            const double wy = d[1] * static_cast<double>(frequency_index(iy, P.ny));
            for (std::size_t ix = 0; ix < P.nx; ++ix) {
                const double wx = d[0] * static_cast<double>(frequency_index(ix, P.nx));
                s[P.index(ix, iy, iz)] = ghat_truncated_radius(radial_norm(wx, wy, wz), R, kb);
            }
        }
    }
    return SpectralKernel(geometry, P, p, std::move(spec));
}

ReducedKernel ReducedKernel::build(const Geometry& geometry, int p, bool naive) {
    if (p < 2 || p % 2 != 0) throw std::invalid_argument("ReducedKernel: padding factor must be even and >= 2");
    const Shape3 n = geometry.shape();
    const Shape3 P2{2 * n.nx, 2 * n.ny, 2 * n.nz};
    auto acc = std::make_shared<std::vector<cplx>>(P2.size(), cplx{});
    auto& g = *acc;

    if (naive) {
        const SpectralKernel full = SpectralKernel::build(geometry, p, std::size_t{1} << 34);
        std::vector<cplx> spatial = full.spectrum();
        const Shape3 P = full.padded_shape();
        fft::inverse3(spatial.data(), P.nx, P.ny, P.nz);
        for (std::size_t iz = 0; iz < P2.nz; ++iz) {
            const long kz = frequency_index(iz, P2.nz);
            for (std::size_t iy = 0; iy < P2.ny; ++iy) {
                const long ky = frequency_index(iy, P2.ny);
                for (std::size_t ix = 0; ix < P2.nx; ++ix) {
                    const long kx = frequency_index(ix, P2.nx);
                    g[P2.index(ix, iy, iz)] =
                        spatial[P.index(wrap_index(kx, P.nx), wrap_index(ky, P.ny), wrap_index(kz, P.nz))];
                }
            }
        }
        fft::forward3(g.data(), P2.nx, P2.ny, P2.nz);
        return ReducedKernel(geometry, P2, p, std::move(acc));
    }

    const auto d = frequency_steps(geometry, p);
    const double R = geometry.truncation_radius();
    const double kb = geometry.wavenumber();
    const long half = p / 2;
    std::vector<cplx> slice(P2.size());
    const std::array<std::size_t, 3> nn{n.nx, n.ny, n.nz};

    for (long sz = 0; sz < half; ++sz)
        for (long sy = 0; sy < half; ++sy)
            for (long sx = 0; sx < half; ++sx) {
#pragma omp parallel for schedule(static)
                for (std::size_t iz = 0; iz < P2.nz; ++iz) {
                    const double wz = d[2] * static_cast<double>(half * frequency_index(iz, P2.nz) - sz);
                    for (std::size_t iy = 0; iy < P2.ny; ++iy) {
                        const double wy = d[1] * static_cast<double>(half * frequency_index(iy, P2.ny) - sy);
                        for (std::size_t ix = 0; ix < P2.nx; ++ix) {
                            const double wx = d[0] * static_cast<double>(half * frequency_index(ix, P2.nx) - sx);
                            slice[P2.index(ix, iy, iz)] = ghat_truncated_radius(radial_norm(wx, wy, wz), R, kb);
                        }
                    }
                }
                fft::transform(slice.data(), {P2.nx, P2.ny, P2.nz}, fft::Direction::Inverse);
                const long s[3] = {sx, sy, sz};
                // Separable modulation exp(-2 j pi k_i s_i / (n_i p)).
                std::array<std::vector<cplx>, 3> mod;
                for (std::size_t a = 0; a < 3; ++a) {
                    const std::size_t len = 2 * nn[a];
                    mod[a].resize(len);
                    for (std::size_t i = 0; i < len; ++i) {
                        const double ph = -2.0 * std::numbers::pi * static_cast<double>(frequency_index(i, len)) *
                                          static_cast<double>(s[a]) / (static_cast<double>(nn[a]) * p);
                        mod[a][i] = std::polar(1.0, ph);
                    }
                }
#pragma omp parallel for schedule(static)
                for (std::size_t iz = 0; iz < P2.nz; ++iz)
                    for (std::size_t iy = 0; iy < P2.ny; ++iy) {
                        const cplx myz = mod[1][iy] * mod[2][iz];
                        for (std::size_t ix = 0; ix < P2.nx; ++ix) {
                            const std::size_t i = P2.index(ix, iy, iz);
                            g[i] += slice[i] * (mod[0][ix] * myz);
                        }
                    }
            }

    // The inverse transforms carried 1/(2n)^3 and 1/(n p)^3 = (8 / p^3) / (2n)^3.
    const double scale = 8.0 / (static_cast<double>(p) * p * p);
    for (auto& v : g) v *= scale;
    fft::forward3(g.data(), P2.nx, P2.ny, P2.nz);
    return ReducedKernel(geometry, P2, p, std::move(acc));
}

GreenOperator::GreenOperator(const ConvolutionKernel& kernel, Precision precision)
    : kernel_(kernel), precision_(precision) {
    if (precision_ == Precision::Single) {
        const auto& s = kernel_.spectrum();
        auto f = std::make_shared<std::vector<std::complex<float>>>(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) (*f)[i] = std::complex<float>(s[i]);
        spectrum_f_ = std::move(f);
    }
}

namespace {

template <class T, class S>
void padded_convolution(const ComplexVolume& in, ComplexVolume& out, const Shape3& P, const std::vector<S>& spectrum,
                        bool adjoint) {
    const Shape3 n = in.shape();
    std::vector<std::complex<T>> work(P.size(), std::complex<T>{});
    std::vector<std::size_t> wx(n.nx), wy(n.ny), wz(n.nz);
    for (std::size_t i = 0; i < n.nx; ++i) wx[i] = wrap_index(centered_index(i, n.nx), P.nx);
    for (std::size_t i = 0; i < n.ny; ++i) wy[i] = wrap_index(centered_index(i, n.ny), P.ny);
    for (std::size_t i = 0; i < n.nz; ++i) wz[i] = wrap_index(centered_index(i, n.nz), P.nz);

#pragma omp parallel for schedule(static)
    for (std::size_t iz = 0; iz < n.nz; ++iz)
        for (std::size_t iy = 0; iy < n.ny; ++iy)
            for (std::size_t ix = 0; ix < n.nx; ++ix)
                work[P.index(wx[ix], wy[iy], wz[iz])] = std::complex<T>(in(ix, iy, iz));

    fft::transform(work.data(), {P.nx, P.ny, P.nz}, fft::Direction::Forward);
    const std::size_t total = P.size();
    if (adjoint) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < total; ++i) work[i] *= std::conj(spectrum[i]);
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < total; ++i) work[i] *= spectrum[i];
    }
    fft::transform(work.data(), {P.nx, P.ny, P.nz}, fft::Direction::Inverse);

    if (out.shape() != n) out = ComplexVolume(n);
#pragma omp parallel for schedule(static)
    for (std::size_t iz = 0; iz < n.nz; ++iz)
        for (std::size_t iy = 0; iy < n.ny; ++iy)
            for (std::size_t ix = 0; ix < n.nx; ++ix)
                out(ix, iy, iz) = cplx(work[P.index(wx[ix], wy[iy], wz[iz])]);
}

} // namespace

void GreenOperator::run(const ComplexVolume& in, ComplexVolume& out, bool adjoint) const {
    if (in.shape() != kernel_.geometry().shape()) throw std::invalid_argument("GreenOperator: shape mismatch");
    if (precision_ == Precision::Single)
        padded_convolution<float>(in, out, kernel_.padded_shape(), *spectrum_f_, adjoint);
    else
        padded_convolution<double>(in, out, kernel_.padded_shape(), kernel_.spectrum(), adjoint);
}

void GreenOperator::apply(const ComplexVolume& in, ComplexVolume& out) const { run(in, out, false); }
void GreenOperator::apply_adjoint(const ComplexVolume& in, ComplexVolume& out) const { run(in, out, true); }

ComplexVolume GreenOperator::apply(const ComplexVolume& in) const {
    ComplexVolume out;
    run(in, out, false);
    return out;
}

ComplexVolume GreenOperator::apply_adjoint(const ComplexVolume& in) const {
    ComplexVolume out;
    run(in, out, true);
    return out;
}

ComplexField3D convolve_volume(const ConvolutionKernel& kernel, const ComplexField3D& v, Precision precision) {
    if (!kernel.geometry().same_grid(v.geometry()))
        throw std::invalid_argument("convolve_volume: kernel and field geometries differ");
    GreenOperator G(kernel, precision);
    return ComplexField3D(G.apply(v.values()), v.geometry());
}

} // namespace odt
