#include "odt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace odt {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

std::size_t integer_ratio(double pitch, double h) {
    const double r = pitch / h;
    const double q = std::round(r);
    if (q < 1.0 || std::abs(r - q) > 1e-9 * q)
        throw std::invalid_argument("Geometry: detector pitch must be an integer multiple of h");
    return static_cast<std::size_t>(q);
}

} // namespace

Geometry::Geometry(Shape3 samples, std::array<double, 3> lengths, double wavelength, double background_index,
                   DetectorPlane detector)
    : shape_(samples), lengths_(lengths), wavelength_(wavelength), eta_b_(background_index), detector_(detector) {
    for (int a = 0; a < 3; ++a) {
        require(shape_[a] > 0 && shape_[a] % 2 == 0, "Geometry: sample counts must be even and positive");
        require(std::isfinite(lengths_[a]) && lengths_[a] > 0.0, "Geometry: lengths must be positive");
    }
    require(std::isfinite(wavelength_) && wavelength_ > 0.0, "Geometry: wavelength must be positive");
    require(std::isfinite(eta_b_) && eta_b_ > 0.0, "Geometry: background index must be positive");

    h_ = lengths_[0] / static_cast<double>(shape_.nx);
    for (int a = 1; a < 3; ++a) {
        const double ha = lengths_[a] / static_cast<double>(shape_[a]);
        require(std::abs(ha - h_) <= 1e-12 * h_, "Geometry: anisotropic voxels are not supported");
    }
    k_b_ = 2.0 * std::numbers::pi * eta_b_ / wavelength_;
    require(k_b_ * h_ < std::numbers::pi, "Geometry: grid too coarse, k_b * h must be below pi");

    require(detector_.m > 0 && detector_.m % 2 == 0, "Geometry: detector sample count must be even and positive");
    require(std::isfinite(detector_.pitch) && detector_.pitch > 0.0, "Geometry: detector pitch must be positive");
    stride_ = integer_ratio(detector_.pitch, h_);
    require(detector_.position > lengths_[2] / 2.0, "Geometry: detector plane must lie outside the volume");
    const double transverse = std::max(lengths_[0], lengths_[1]);
    require(detector_.side() >= transverse * (1.0 - 1e-12), "Geometry: detector smaller than the volume");
}

Geometry::Geometry(Shape3 samples, std::array<double, 3> lengths, double wavelength, double background_index)
    : Geometry(samples, lengths, wavelength, background_index,
               DetectorPlane{std::max(samples.nx, samples.ny),
                             samples.nx > 0 ? lengths[0] / static_cast<double>(samples.nx) : 0.0, lengths[2]}) {}

Geometry Geometry::cubic(std::size_t n, double length, double wavelength, double background_index) {
    return Geometry({n, n, n}, {length, length, length}, wavelength, background_index);
}

Geometry Geometry::cubic(std::size_t n, double length, double wavelength, double background_index,
                         DetectorPlane detector) {
    return Geometry({n, n, n}, {length, length, length}, wavelength, background_index, detector);
}

double Geometry::truncation_radius() const {
    return std::sqrt(lengths_[0] * lengths_[0] + lengths_[1] * lengths_[1] + lengths_[2] * lengths_[2]);
}

Geometry Geometry::with_detector(DetectorPlane detector) const {
    return Geometry(shape_, lengths_, wavelength_, eta_b_, detector);
}

bool Geometry::same_grid(const Geometry& other) const {
    if (shape_ != other.shape_) return false;
    for (std::size_t a = 0; a < 3; ++a)
        if (std::abs(lengths_[a] - other.lengths_[a]) > 1e-12 * lengths_[a]) return false;
    return std::abs(k_b_ - other.k_b_) <= 1e-12 * k_b_;
}

bool Geometry::operator==(const Geometry& other) const {
    return same_grid(other) && detector_.m == other.detector_.m &&
           std::abs(detector_.pitch - other.detector_.pitch) <= 1e-12 * detector_.pitch &&
           std::abs(detector_.position - other.detector_.position) <= 1e-12 * std::abs(detector_.position);
}

ScatteringPotential::ScatteringPotential(RealVolume values, Geometry geometry)
    : values_(std::move(values)), geometry_(std::move(geometry)) {
    if (values_.shape() != geometry_.shape())
        throw std::invalid_argument("ScatteringPotential: shape does not match geometry");
    for (double v : values_.span())
        if (!std::isfinite(v)) throw std::invalid_argument("ScatteringPotential: non-finite value");

    const Shape3 s = values_.shape();
    for (std::size_t iz = 0; iz < s.nz && !touches_boundary_; ++iz)
        for (std::size_t iy = 0; iy < s.ny && !touches_boundary_; ++iy)
            for (std::size_t ix = 0; ix < s.nx; ++ix) {
                const bool shell = ix == 0 || iy == 0 || iz == 0 || ix + 1 == s.nx || iy + 1 == s.ny || iz + 1 == s.nz;
                if (shell && values_(ix, iy, iz) != 0.0) {
                    touches_boundary_ = true;
                    break;
                }
            }
}

bool ScatteringPotential::is_zero() const {
    return std::all_of(values_.span().begin(), values_.span().end(), [](double v) { return v == 0.0; });
}

ComplexField3D::ComplexField3D(ComplexVolume values, Geometry geometry)
    : values_(std::move(values)), geometry_(std::move(geometry)) {
    if (values_.shape() != geometry_.shape())
        throw std::invalid_argument("ComplexField3D: shape does not match geometry");
    for (const cplx& v : values_.span())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("ComplexField3D: non-finite value");
}

ComplexField3D ComplexField3D::zeros(const Geometry& geometry) {
    return ComplexField3D(ComplexVolume(geometry.shape()), geometry);
}

ComplexField2D::ComplexField2D(ComplexImage values, double pitch, double position)
    : values_(std::move(values)), pitch_(pitch), position_(position) {
    if (!(pitch_ > 0.0)) throw std::invalid_argument("ComplexField2D: pitch must be positive");
    for (const cplx& v : values_.span())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("ComplexField2D: non-finite value");
}

ScatteringPotential potential_from_ri(const RealVolume& ri, const Geometry& geometry) {
    if (ri.shape() != geometry.shape()) throw std::invalid_argument("potential_from_ri: shape mismatch");
    const double kb2 = geometry.wavenumber() * geometry.wavenumber();
    const double eb2 = geometry.background_index() * geometry.background_index();
    RealVolume f(ri.shape());
    for (std::size_t i = 0; i < ri.size(); ++i) {
        if (!(ri[i] >= 0.0)) throw std::invalid_argument("potential_from_ri: refractive index must be nonnegative");
        f[i] = kb2 * (ri[i] * ri[i] / eb2 - 1.0);
    }
    return ScatteringPotential(std::move(f), geometry);
}

RealVolume ri_from_potential(const ScatteringPotential& f) {
    const Geometry& g = f.geometry();
    const double kb2 = g.wavenumber() * g.wavenumber();
    RealVolume ri(f.values().shape());
    for (std::size_t i = 0; i < ri.size(); ++i) {
        const double arg = f.values()[i] / kb2 + 1.0;
        if (arg < 0.0) {
            // Tolerate the rounding of f = -k_b^2 exactly.
            if (arg < -1e-14) throw std::domain_error("ri_from_potential: potential below -k_b^2");
            ri[i] = 0.0;
            continue;
        }
        ri[i] = g.background_index() * std::sqrt(arg);
    }
    return ri;
}

} // namespace odt
