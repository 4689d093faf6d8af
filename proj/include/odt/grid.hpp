#pragma once

// Geometry, sampled arrays and field containers shared by every module.
//
// Storage order: x (axis 0) varies fastest, the optical axis z (axis 2) is
// the slowest. Grid index i along an axis with n samples maps to the centered
// index k = i - n/2 + 1, k in [-n/2+1, n/2], and to the coordinate x = h*k,
// so the origin is a sample point.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace odt {

using cplx = std::complex<double>;

struct Shape3 {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nz = 0;

    [[nodiscard]] constexpr std::size_t size() const { return nx * ny * nz; }
    [[nodiscard]] constexpr std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return (iz * ny + iy) * nx + ix;
    }
    [[nodiscard]] constexpr std::size_t operator[](int axis) const {
        return axis == 0 ? nx : (axis == 1 ? ny : nz);
    }
    friend constexpr bool operator==(const Shape3&, const Shape3&) = default;
};

template <class T>
class Array3 {
public:
    Array3() = default;
    explicit Array3(Shape3 shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {}
    Array3(Shape3 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.size())
            throw std::invalid_argument("Array3: data size does not match shape");
    }

    [[nodiscard]] const Shape3& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t ix, std::size_t iy, std::size_t iz) { return data_[shape_.index(ix, iy, iz)]; }
    const T& operator()(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return data_[shape_.index(ix, iy, iz)];
    }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::span<T> span() { return data_; }
    [[nodiscard]] std::span<const T> span() const { return data_; }
    [[nodiscard]] T* data() { return data_.data(); }
    [[nodiscard]] const T* data() const { return data_.data(); }
    [[nodiscard]] std::vector<T>& vector() { return data_; }
    [[nodiscard]] const std::vector<T>& vector() const { return data_; }

    friend bool operator==(const Array3&, const Array3&) = default;

private:
    Shape3 shape_;
    std::vector<T> data_;
};

template <class T>
class Array2 {
public:
    Array2() = default;
    Array2(std::size_t nx, std::size_t ny, T fill = T{}) : nx_(nx), ny_(ny), data_(nx * ny, fill) {}
    Array2(std::size_t nx, std::size_t ny, std::vector<T> data) : nx_(nx), ny_(ny), data_(std::move(data)) {
        if (data_.size() != nx_ * ny_)
            throw std::invalid_argument("Array2: data size does not match shape");
    }

    [[nodiscard]] std::size_t nx() const { return nx_; }
    [[nodiscard]] std::size_t ny() const { return ny_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    T& operator()(std::size_t ix, std::size_t iy) { return data_[iy * nx_ + ix]; }
    const T& operator()(std::size_t ix, std::size_t iy) const { return data_[iy * nx_ + ix]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    [[nodiscard]] std::span<T> span() { return data_; }
    [[nodiscard]] std::span<const T> span() const { return data_; }
    [[nodiscard]] T* data() { return data_.data(); }
    [[nodiscard]] const T* data() const { return data_.data(); }

    friend bool operator==(const Array2&, const Array2&) = default;

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<T> data_;
};

using RealVolume = Array3<double>;
using ComplexVolume = Array3<cplx>;
using ComplexImage = Array2<cplx>;

/// Centered index k in [-n/2+1, n/2] of storage index i.
[[nodiscard]] constexpr long centered_index(std::size_t i, std::size_t n) {
    return static_cast<long>(i) - static_cast<long>(n / 2) + 1;
}

/// Storage position of centered index k on a periodic grid of size n (k taken modulo n).
[[nodiscard]] constexpr std::size_t wrap_index(long k, std::size_t n) {
    const long nn = static_cast<long>(n);
    return static_cast<std::size_t>(((k % nn) + nn) % nn);
}

/// Signed frequency index of DFT bin j on a grid of size n, in [-n/2+1, n/2].
[[nodiscard]] constexpr long frequency_index(std::size_t j, std::size_t n) {
    return j <= n / 2 ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
}

/// Measurement plane orthogonal to the optical axis.
struct DetectorPlane {
    std::size_t m = 0;     // samples per side
    double pitch = 0.0;    // meters
    double position = 0.0; // axial position x_Gamma, meters

    [[nodiscard]] double side() const { return static_cast<double>(m) * pitch; }
};

/// Physical and discrete geometry of the region of interest and its detector.
///
/// Each axis carries its own sample count and side length; the spacing h must
/// be the same on all axes.
class Geometry {
public:
    Geometry(Shape3 samples, std::array<double, 3> lengths, double wavelength, double background_index,
             DetectorPlane detector);
    /// Detector defaults to m = max(nx, ny), pitch h, position L_z.
    Geometry(Shape3 samples, std::array<double, 3> lengths, double wavelength, double background_index);

    static Geometry cubic(std::size_t n, double length, double wavelength, double background_index);
    static Geometry cubic(std::size_t n, double length, double wavelength, double background_index,
                          DetectorPlane detector);

    [[nodiscard]] const Shape3& shape() const { return shape_; }
    [[nodiscard]] std::size_t samples(int axis) const { return shape_[axis]; }
    [[nodiscard]] double length(int axis) const { return lengths_[static_cast<std::size_t>(axis)]; }
    [[nodiscard]] const std::array<double, 3>& lengths() const { return lengths_; }
    [[nodiscard]] double spacing() const { return h_; }
    [[nodiscard]] double wavelength() const { return wavelength_; }
    [[nodiscard]] double background_index() const { return eta_b_; }
    /// k_b = 2 pi eta_b / lambda.
    [[nodiscard]] double wavenumber() const { return k_b_; }
    [[nodiscard]] const DetectorPlane& detector() const { return detector_; }
    /// Integer ratio q = detector pitch / h.
    [[nodiscard]] std::size_t detector_stride() const { return stride_; }
    /// Radius of the ball on which the Green function is truncated: the diameter of Omega.
    [[nodiscard]] double truncation_radius() const;
    [[nodiscard]] double coordinate(int axis, std::size_t i) const {
        return h_ * static_cast<double>(centered_index(i, shape_[axis]));
    }

    [[nodiscard]] Geometry with_detector(DetectorPlane detector) const;
    [[nodiscard]] bool same_grid(const Geometry& other) const;
    [[nodiscard]] bool operator==(const Geometry& other) const;

private:
    Shape3 shape_;
    std::array<double, 3> lengths_;
    double h_;
    double wavelength_;
    double eta_b_;
    double k_b_;
    DetectorPlane detector_;
    std::size_t stride_ = 1;
};

class ScatteringPotential {
public:
    ScatteringPotential(RealVolume values, Geometry geometry);

    [[nodiscard]] const RealVolume& values() const { return values_; }
    [[nodiscard]] const Geometry& geometry() const { return geometry_; }
    /// Set when the outermost voxel shell carries nonzero values; the
    /// truncated-kernel equivalence assumes the support lies inside Omega.
    [[nodiscard]] bool touches_boundary() const { return touches_boundary_; }
    [[nodiscard]] bool is_zero() const;

private:
    RealVolume values_;
    Geometry geometry_;
    bool touches_boundary_ = false;
};

class ComplexField3D {
public:
    ComplexField3D(ComplexVolume values, Geometry geometry);
    static ComplexField3D zeros(const Geometry& geometry);

    [[nodiscard]] const ComplexVolume& values() const { return values_; }
    [[nodiscard]] const Geometry& geometry() const { return geometry_; }

private:
    ComplexVolume values_;
    Geometry geometry_;
};

class ComplexField2D {
public:
    ComplexField2D(ComplexImage values, double pitch, double position);

    [[nodiscard]] const ComplexImage& values() const { return values_; }
    [[nodiscard]] double pitch() const { return pitch_; }
    [[nodiscard]] double position() const { return position_; }
    [[nodiscard]] double coordinate(int axis, std::size_t i) const {
        return pitch_ * static_cast<double>(centered_index(i, axis == 0 ? values_.nx() : values_.ny()));
    }

private:
    ComplexImage values_;
    double pitch_;
    double position_;
};

/// f = k_b^2 (ri^2 / eta_b^2 - 1).
[[nodiscard]] ScatteringPotential potential_from_ri(const RealVolume& ri, const Geometry& geometry);
/// eta = eta_b sqrt(f / k_b^2 + 1); throws std::domain_error when f < -k_b^2.
[[nodiscard]] RealVolume ri_from_potential(const ScatteringPotential& f);

} // namespace odt
