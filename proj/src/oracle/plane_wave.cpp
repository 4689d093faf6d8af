#include "odt/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {

void check_shell(const Vec3& k, double k_b) {
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (std::abs(kn - k_b) > 1e-9 * k_b) throw std::invalid_argument("plane_wave: |k_in| differs from k_b");
}

} // namespace

ComplexField3D plane_wave(const Vec3& k_in, const Geometry& geometry) {
    check_shell(k_in, geometry.wavenumber());
    const Shape3 s = geometry.shape();
    ComplexVolume u(s);
    for (std::size_t iz = 0; iz < s.nz; ++iz) {
        const double z = geometry.coordinate(2, iz);
        for (std::size_t iy = 0; iy < s.ny; ++iy) {
            const double y = geometry.coordinate(1, iy);
            for (std::size_t ix = 0; ix < s.nx; ++ix)
                u(ix, iy, iz) = std::polar(1.0, k_in[0] * geometry.coordinate(0, ix) + k_in[1] * y + k_in[2] * z);
        }
    }
    return ComplexField3D(std::move(u), geometry);
}

ComplexField2D plane_wave_on_detector(const Vec3& k_in, const Geometry& geometry) {
    check_shell(k_in, geometry.wavenumber());
    const DetectorPlane& d = geometry.detector();
    ComplexImage img(d.m, d.m);
    for (std::size_t iy = 0; iy < d.m; ++iy) {
        const double y = d.pitch * static_cast<double>(centered_index(iy, d.m));
        for (std::size_t ix = 0; ix < d.m; ++ix) {
            const double x = d.pitch * static_cast<double>(centered_index(ix, d.m));
            img(ix, iy) = std::polar(1.0, k_in[0] * x + k_in[1] * y + k_in[2] * d.position);
        }
    }
    return ComplexField2D(std::move(img), d.pitch, d.position);
}

std::vector<Vec3> cone_views(std::size_t count, double half_angle, double k_b) {
    if (count == 0) throw std::invalid_argument("cone_views: need at least one view");
    if (!(half_angle >= 0.0 && half_angle < std::numbers::pi / 2))
        throw std::invalid_argument("cone_views: half-angle must be in [0, pi/2)");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double theta = half_angle * std::sqrt((static_cast<double>(i) + 0.5) / static_cast<double>(count));
        const double phi = golden * static_cast<double>(i);
        out[i] = {k_b * std::sin(theta) * std::cos(phi), k_b * std::sin(theta) * std::sin(phi), k_b * std::cos(theta)};
    }
    return out;
}

} // namespace odt
