#pragma once

// Independent references for tests and acceptance runs: analytic plane waves,
// scalar Mie scattering by a homogeneous sphere, a fine-quadrature Green
// convolution that uses no FFT, phantoms, and illumination cones.

#include "odt/far_field.hpp"
#include "odt/grid.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace odt {

using Vec3 = std::array<double, 3>;

/// exp(j x . k_in) on the volume grid; |k_in| must equal k_b (1e-9 relative).
[[nodiscard]] ComplexField3D plane_wave(const Vec3& k_in, const Geometry& geometry);
/// exp(j x . k_in) on the detector plane of the geometry.
[[nodiscard]] ComplexField2D plane_wave_on_detector(const Vec3& k_in, const Geometry& geometry);

struct BeadSpec {
    Vec3 center{0.0, 0.0, 0.0};
    double diameter = 0.0;
    double eta_inside = 1.0;
    double eta_b = 1.0;
    double wavelength = 0.0;
};

/// Highest partial-wave order used for a sphere of size parameter x = k_b a.
[[nodiscard]] int mie_order(double size_parameter);

/// Total field of a plane wave exp(j x . k_in) scattered by the bead, at the
/// given points. extra_orders raises the truncation order (convergence checks).
[[nodiscard]] std::vector<cplx> mie_total_field(const BeadSpec& bead, const Vec3& k_in,
                                                const std::vector<Vec3>& points, int extra_orders = 0);
[[nodiscard]] ComplexField3D mie_total_field(const BeadSpec& bead, const Vec3& k_in, const Geometry& geometry);

/// Reference for G v: the same truncated-kernel convolution, with the Fourier
/// integral evaluated by a trapezoid rule of step 2 pi / (L oversample) as a
/// separable cosine sum, followed by a direct spatial convolution.
[[nodiscard]] ComplexField3D brute_force_green_convolution(const ComplexField3D& v, int oversample);

/// Truncated-kernel convolution of the continuous Gaussian
/// amplitude * exp(-|x|^2 / (2 sigma^2)), sampled on the grid, with its
/// Fourier transform evaluated analytically.
[[nodiscard]] ComplexField3D brute_force_gaussian_convolution(const Geometry& geometry, double amplitude, double sigma,
                                                              int oversample);

/// Smooth compactly supported bump exp(1 - 1 / (1 - r^2 / a^2)) for r < a.
[[nodiscard]] ComplexField3D bump_function(const Geometry& geometry, double radius);

enum class PhantomKind { Bead, MultiBead, RbcLike, Empty };

struct SphereSpec {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 0.0;
    double ri = 1.0;
};

struct RbcSpec {
    Vec3 center{0.0, 0.0, 0.0};
    double diameter = 7.82e-6;
    double ri = 1.05;
    double tilt = 0.0;    // rotation about the x axis, radians
    double azimuth = 0.0; // rotation about the z axis, radians
};

struct PhantomSpec {
    PhantomKind kind = PhantomKind::Empty;
    std::vector<SphereSpec> spheres; // Bead uses the first entry
    RbcSpec rbc;
    bool antialias = false; // 2x2x2 supersampled membership
};

/// Refractive-index volume; background is the geometry's eta_b. Throws if the
/// object does not fit inside Omega.
[[nodiscard]] RealVolume make_phantom(const PhantomSpec& spec, const Geometry& geometry);

/// Q incident wave vectors on a Fermat spiral inside a cone of the given
/// half-angle (radians) around +z.
[[nodiscard]] std::vector<Vec3> cone_views(std::size_t count, double half_angle, double k_b);

} // namespace odt
