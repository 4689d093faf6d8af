#include "odt/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace odt {

namespace {

void check_inside(const Vec3& c, double r, const Geometry& g) {
    for (int a = 0; a < 3; ++a) {
        const double half = g.length(a) / 2.0;
        const double ca = c[static_cast<std::size_t>(a)];
        if (ca - r < -half || ca + r > half) throw std::invalid_argument("make_phantom: object exceeds the volume");
    }
}

// Evans-Fung biconcave profile, thickness coefficients normalized by the
// 7.82 um reference diameter.
bool inside_rbc(const Vec3& p, const RbcSpec& s) {
    const double D = s.diameter;
    // Undo azimuth (about z) then tilt (about x).
    const double x0 = p[0] - s.center[0], y0 = p[1] - s.center[1], z0 = p[2] - s.center[2];
    const double ca = std::cos(s.azimuth), sa = std::sin(s.azimuth);
    const double x1 = ca * x0 + sa * y0, y1 = -sa * x0 + ca * y0, z1 = z0;
    const double ct = std::cos(s.tilt), st = std::sin(s.tilt);
    const double y2 = ct * y1 + st * z1, z2 = -st * y1 + ct * z1;
    const double r2 = 4.0 * (x1 * x1 + y2 * y2) / (D * D);
    if (r2 >= 1.0) return false;
    constexpr double c0 = 0.81 / 7.82, c1 = 7.83 / 7.82, c2 = -4.39 / 7.82;
    const double half = 0.5 * D * std::sqrt(1.0 - r2) * (c0 + c1 * r2 + c2 * r2 * r2);
    return std::abs(z2) <= half;
}

template <class Inside>
void fill(RealVolume& ri, const Geometry& g, double value, bool antialias, Inside inside) {
    const Shape3 s = g.shape();
    const double h = g.spacing();
    const double eta_b = g.background_index();
    for (std::size_t iz = 0; iz < s.nz; ++iz)
        for (std::size_t iy = 0; iy < s.ny; ++iy)
            for (std::size_t ix = 0; ix < s.nx; ++ix) {
                const Vec3 c{g.coordinate(0, ix), g.coordinate(1, iy), g.coordinate(2, iz)};
                if (!antialias) {
                    if (inside(c)) ri(ix, iy, iz) = value;
                    continue;
                }
                int hits = 0;
                for (int k = 0; k < 8; ++k) {
                    const Vec3 p{c[0] + ((k & 1) ? 0.25 : -0.25) * h, c[1] + ((k & 2) ? 0.25 : -0.25) * h,
                                 c[2] + ((k & 4) ? 0.25 : -0.25) * h};
                    hits += inside(p) ? 1 : 0;
                }
                if (hits > 0) ri(ix, iy, iz) = eta_b + (value - eta_b) * hits / 8.0;
            }
}

} // namespace

RealVolume make_phantom(const PhantomSpec& spec, const Geometry& g) {
    RealVolume ri(g.shape(), g.background_index());
    switch (spec.kind) {
    case PhantomKind::Empty: break;
    case PhantomKind::Bead:
    case PhantomKind::MultiBead: {
        if (spec.spheres.empty()) throw std::invalid_argument("make_phantom: no sphere given");
        const std::size_t count = spec.kind == PhantomKind::Bead ? 1 : spec.spheres.size();
        for (std::size_t i = 0; i < count; ++i) {
            const SphereSpec& s = spec.spheres[i];
            if (!(s.radius > 0.0)) throw std::invalid_argument("make_phantom: sphere radius must be positive");
            check_inside(s.center, s.radius, g);
            const double r2 = s.radius * s.radius;
            fill(ri, g, s.ri, spec.antialias, [&](const Vec3& p) {
                const double dx = p[0] - s.center[0], dy = p[1] - s.center[1], dz = p[2] - s.center[2];
                return dx * dx + dy * dy + dz * dz <= r2;
            });
        }
        break;
    }
    case PhantomKind::RbcLike:
        if (!(spec.rbc.diameter > 0.0)) throw std::invalid_argument("make_phantom: cell diameter must be positive");
        check_inside(spec.rbc.center, spec.rbc.diameter / 2.0, g);
        fill(ri, g, spec.rbc.ri, spec.antialias, [&](const Vec3& p) { return inside_rbc(p, spec.rbc); });
        break;
    }
    return ri;
}

} // namespace odt
