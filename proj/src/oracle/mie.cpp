#include "odt/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {

constexpr cplx J{0.0, 1.0};

struct Coefficients {
    std::vector<cplx> interior; // multiplies c_l j_l(k1 r)
    std::vector<cplx> exterior; // multiplies c_l h_l(k r)
    std::vector<cplx> c;        // j^l (2l + 1)
};

double jl(int l, double x) { return std::sph_bessel(static_cast<unsigned>(l), x); }
double yl(int l, double x) { return std::sph_neumann(static_cast<unsigned>(l), x); }

// d/dx f_l(x) = l/x f_l(x) - f_{l+1}(x), valid for j_l and y_l.
double djl(int l, double x) { return l / x * jl(l, x) - jl(l + 1, x); }
double dyl(int l, double x) { return l / x * yl(l, x) - yl(l + 1, x); }

Coefficients solve(double k, double k1, double a, int lmax) {
    Coefficients co;
    co.interior.resize(static_cast<std::size_t>(lmax) + 1);
    co.exterior.resize(co.interior.size());
    co.c.resize(co.interior.size());
    const double x = k * a, x1 = k1 * a;
    cplx jpow = 1.0;
    for (int l = 0; l <= lmax; ++l) {
        const std::size_t i = static_cast<std::size_t>(l);
        co.c[i] = jpow * static_cast<double>(2 * l + 1);
        jpow *= J;
        // A j_l(x1) - B h_l(x) = j_l(x)
        // A k1 j_l'(x1) - B k h_l'(x) = k j_l'(x)
        const cplx h = jl(l, x) + J * yl(l, x);
        const cplx dh = djl(l, x) + J * dyl(l, x);
        const double a11 = jl(l, x1), a21 = k1 * djl(l, x1);
        const cplx a12 = -h, a22 = -k * dh;
        const double b1 = jl(l, x), b2 = k * djl(l, x);
        const cplx det = a11 * a22 - a12 * a21;
        co.interior[i] = (b1 * a22 - a12 * b2) / det;
        co.exterior[i] = (a11 * b2 - a21 * b1) / det;
    }
    return co;
}

} // namespace

int mie_order(double size_parameter) {
    return static_cast<int>(std::ceil(size_parameter + 4.0 * std::cbrt(size_parameter) + 10.0));
}

std::vector<cplx> mie_total_field(const BeadSpec& bead, const Vec3& k_in, const std::vector<Vec3>& points,
                                  int extra_orders) {
    if (!(bead.diameter > 0.0) || !(bead.wavelength > 0.0) || !(bead.eta_b > 0.0) || !(bead.eta_inside > 0.0))
        throw std::invalid_argument("mie_total_field: invalid bead");
    const double k = 2.0 * std::numbers::pi * bead.eta_b / bead.wavelength;
    const double kn = std::sqrt(k_in[0] * k_in[0] + k_in[1] * k_in[1] + k_in[2] * k_in[2]);
    if (std::abs(kn - k) > 1e-9 * k) throw std::invalid_argument("mie_total_field: |k_in| differs from k_b");
    const double k1 = k * bead.eta_inside / bead.eta_b;
    const double a = bead.diameter / 2.0;
    const int lmax = mie_order(k * a) + extra_orders;
    const Coefficients co = solve(k, k1, a, lmax);
    const Vec3 dir{k_in[0] / kn, k_in[1] / kn, k_in[2] / kn};
    // The incident wave is exp(j k_in . x); about the bead center it carries
    // the phase exp(j k_in . c).
    const cplx phase = std::polar(1.0, k_in[0] * bead.center[0] + k_in[1] * bead.center[1] + k_in[2] * bead.center[2]);

    std::vector<cplx> out(points.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Vec3 d{points[p][0] - bead.center[0], points[p][1] - bead.center[1], points[p][2] - bead.center[2]};
        const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        const double mu = r > 0.0 ? (d[0] * dir[0] + d[1] * dir[1] + d[2] * dir[2]) / r : 1.0;
        cplx acc = 0.0;
        double Pm1 = 0.0, P = 1.0; // Legendre P_{l-1}, P_l
        for (int l = 0; l <= lmax; ++l) {
            const std::size_t i = static_cast<std::size_t>(l);
            cplx radial;
            if (r < a) {
                radial = co.interior[i] * jl(l, k1 * r);
            } else {
                // Outside only the scattered part is summed; the incident wave
                // is added in closed form below, since its expansion would
                // need orders well beyond k r.
                const double x = k * r;
                radial = co.exterior[i] * (jl(l, x) + J * yl(l, x));
            }
            acc += co.c[i] * radial * P;
            const double Pn = ((2 * l + 1) * mu * P - l * Pm1) / (l + 1);
            Pm1 = P;
            P = Pn;
        }
        out[p] = phase * acc;
        if (r >= a)
            out[p] += std::polar(1.0, k_in[0] * points[p][0] + k_in[1] * points[p][1] + k_in[2] * points[p][2]);
    }
    return out;
}

ComplexField3D mie_total_field(const BeadSpec& bead, const Vec3& k_in, const Geometry& geometry) {
    const Shape3 s = geometry.shape();
    std::vector<Vec3> pts;
    pts.reserve(s.size());
    for (std::size_t iz = 0; iz < s.nz; ++iz)
        for (std::size_t iy = 0; iy < s.ny; ++iy)
            for (std::size_t ix = 0; ix < s.nx; ++ix)
                pts.push_back({geometry.coordinate(0, ix), geometry.coordinate(1, iy), geometry.coordinate(2, iz)});
    return ComplexField3D(ComplexVolume(s, mie_total_field(bead, k_in, pts)), geometry);
}

} // namespace odt
