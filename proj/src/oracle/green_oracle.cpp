#include "odt/green_kernel.hpp"
#include "odt/oracle.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {

// R[d] = sum_{q in [0, N/2]^3} w(q) S(|delta q|) prod_i cos(2 pi q_i d_i / N_i)
// for d in [0, D)^3, where w is the per-axis trapezoid folding weight (1 at 0
// and N/2, 2 inside). Equals the full sum over q in [-N/2+1, N/2]^3 of a
// function that is even in every axis.
std::vector<cplx> radial_cosine_sum(const std::function<cplx(double)>& S, const std::array<std::size_t, 3>& N,
                                    const std::array<double, 3>& delta, const std::array<std::size_t, 3>& D) {
    std::array<std::size_t, 3> Q{};
    std::array<std::vector<double>, 3> table; // w(q) cos(...) laid out [q][d]
    for (std::size_t a = 0; a < 3; ++a) {
        Q[a] = N[a] / 2 + 1;
        table[a].resize(Q[a] * D[a]);
        for (std::size_t q = 0; q < Q[a]; ++q) {
            const double w = (q == 0 || 2 * q == N[a]) ? 1.0 : 2.0;
            for (std::size_t d = 0; d < D[a]; ++d) {
                // Reduce q d modulo N before scaling to keep the argument exact.
                const std::size_t r = (q * d) % N[a];
                table[a][q * D[a] + d] =
                    w * std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(N[a]));
            }
        }
    }

    const std::size_t plane = D[0] * D[1];
    std::vector<cplx> per_q3(Q[2] * plane, cplx{});
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t q3 = 0; q3 < Q[2]; ++q3) {
        std::vector<cplx> row(Q[0]);
        std::vector<cplx> t1(D[0]);
        cplx* t2 = per_q3.data() + q3 * plane;
        const double w3 = delta[2] * static_cast<double>(q3);
        for (std::size_t q2 = 0; q2 < Q[1]; ++q2) {
            const double w2 = delta[1] * static_cast<double>(q2);
            for (std::size_t q1 = 0; q1 < Q[0]; ++q1) {
                const double w1 = delta[0] * static_cast<double>(q1);
                row[q1] = S(std::sqrt(w1 * w1 + w2 * w2 + w3 * w3));
            }
            for (std::size_t d1 = 0; d1 < D[0]; ++d1) {
                cplx acc = 0.0;
                for (std::size_t q1 = 0; q1 < Q[0]; ++q1) acc += row[q1] * table[0][q1 * D[0] + d1];
                t1[d1] = acc;
            }
            for (std::size_t d2 = 0; d2 < D[1]; ++d2) {
                const double c = table[1][q2 * D[1] + d2];
                for (std::size_t d1 = 0; d1 < D[0]; ++d1) t2[d2 * D[0] + d1] += c * t1[d1];
            }
        }
    }

    std::vector<cplx> R(plane * D[2], cplx{});
    for (std::size_t q3 = 0; q3 < Q[2]; ++q3) {
        const cplx* t2 = per_q3.data() + q3 * plane;
        for (std::size_t d3 = 0; d3 < D[2]; ++d3) {
            const double c = table[2][q3 * D[2] + d3];
            for (std::size_t i = 0; i < plane; ++i) R[d3 * plane + i] += c * t2[i];
        }
    }
    return R;
}

void guard(const Geometry& g, int oversample) {
    if (oversample < 4) throw std::invalid_argument("brute_force_green_convolution: oversample must be >= 4");
    for (int a = 0; a < 3; ++a) {
        if (g.samples(a) > 32) throw std::invalid_argument("brute_force_green_convolution: grid too large (n <= 32)");
        if (g.samples(a) * static_cast<std::size_t>(oversample) > 2048)
            throw std::invalid_argument("brute_force_green_convolution: n * oversample exceeds 2048");
    }
}

} // namespace

ComplexField3D brute_force_green_convolution(const ComplexField3D& v, int oversample) {
    const Geometry& g = v.geometry();
    guard(g, oversample);
    const Shape3 n = g.shape();
    const std::size_t os = static_cast<std::size_t>(oversample);
    const std::array<std::size_t, 3> N{n.nx * os, n.ny * os, n.nz * os};
    const std::array<std::size_t, 3> D{n.nx, n.ny, n.nz};
    std::array<double, 3> delta{};
    for (int a = 0; a < 3; ++a)
        delta[static_cast<std::size_t>(a)] = 2.0 * std::numbers::pi / (g.length(a) * oversample);
    const double R = g.truncation_radius();
    const double kb = g.wavenumber();
    std::vector<cplx> kernel = radial_cosine_sum([&](double w) { return ghat_truncated_radius(w, R, kb); }, N, delta, D);
    const double norm = 1.0 / (static_cast<double>(N[0]) * static_cast<double>(N[1]) * static_cast<double>(N[2]));
    for (auto& x : kernel) x *= norm;

    // Direct spatial convolution; the kernel depends on |d_i| only.
    const ComplexVolume& in = v.values();
    ComplexVolume out(n);
    auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
#pragma omp parallel for schedule(static)
    for (std::size_t kz = 0; kz < n.nz; ++kz)
        for (std::size_t ky = 0; ky < n.ny; ++ky)
            for (std::size_t kx = 0; kx < n.nx; ++kx) {
                cplx acc = 0.0;
                for (std::size_t jz = 0; jz < n.nz; ++jz)
                    for (std::size_t jy = 0; jy < n.ny; ++jy) {
                        const cplx* krow = kernel.data() + (dist(kz, jz) * D[1] + dist(ky, jy)) * D[0];
                        for (std::size_t jx = 0; jx < n.nx; ++jx) {
                            const cplx s = in(jx, jy, jz);
                            if (s != cplx{}) acc += krow[dist(kx, jx)] * s;
                        }
                    }
                out(kx, ky, kz) = acc;
            }
    return ComplexField3D(std::move(out), g);
}

ComplexField3D brute_force_gaussian_convolution(const Geometry& g, double amplitude, double sigma, int oversample) {
    guard(g, oversample);
    if (!(sigma > 0.0)) throw std::invalid_argument("brute_force_gaussian_convolution: sigma must be positive");
    const Shape3 n = g.shape();
    const std::size_t os = static_cast<std::size_t>(oversample);
    const std::array<std::size_t, 3> N{n.nx * os, n.ny * os, n.nz * os};
    // Output indices k in [-n/2+1, n/2]; the result is even in each axis.
    const std::array<std::size_t, 3> D{n.nx / 2 + 1, n.ny / 2 + 1, n.nz / 2 + 1};
    std::array<double, 3> delta{};
    for (int a = 0; a < 3; ++a)
        delta[static_cast<std::size_t>(a)] = 2.0 * std::numbers::pi / (g.length(a) * oversample);
    const double R = g.truncation_radius();
    const double kb = g.wavenumber();
    const double v0 = amplitude * std::pow(2.0 * std::numbers::pi * sigma * sigma, 1.5);
    auto S = [&](double w) { return ghat_truncated_radius(w, R, kb) * (v0 * std::exp(-0.5 * sigma * sigma * w * w)); };
    std::vector<cplx> r = radial_cosine_sum(S, N, delta, D);
    const double h = g.spacing();
    const double norm = 1.0 / (static_cast<double>(N[0]) * h * static_cast<double>(N[1]) * h *
                               static_cast<double>(N[2]) * h);
    ComplexVolume out(n);
    for (std::size_t iz = 0; iz < n.nz; ++iz)
        for (std::size_t iy = 0; iy < n.ny; ++iy)
            for (std::size_t ix = 0; ix < n.nx; ++ix) {
                const std::size_t ax = static_cast<std::size_t>(std::labs(centered_index(ix, n.nx)));
                const std::size_t ay = static_cast<std::size_t>(std::labs(centered_index(iy, n.ny)));
                const std::size_t az = static_cast<std::size_t>(std::labs(centered_index(iz, n.nz)));
                out(ix, iy, iz) = norm * r[(az * D[1] + ay) * D[0] + ax];
            }
    return ComplexField3D(std::move(out), g);
}

ComplexField3D bump_function(const Geometry& g, double radius) {
    const Shape3 n = g.shape();
    ComplexVolume out(n);
    for (std::size_t iz = 0; iz < n.nz; ++iz)
        for (std::size_t iy = 0; iy < n.ny; ++iy)
            for (std::size_t ix = 0; ix < n.nx; ++ix) {
                const double x = g.coordinate(0, ix), y = g.coordinate(1, iy), z = g.coordinate(2, iz);
                const double t = (x * x + y * y + z * z) / (radius * radius);
                out(ix, iy, iz) = t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
            }
    return ComplexField3D(std::move(out), g);
}

} // namespace odt
