#pragma once

// Incident field inside Omega from a 2D measurement on the detector plane, by
// angular-spectrum propagation. The tilt of the illumination is removed from
// the measurement and moved onto the propagation kernel, so the remaining
// amplitude is smooth and can be treated as periodic.

#include "odt/grid.hpp"

#include <array>
#include <cstddef>

namespace odt {

struct TiltedWaveSpec {
    std::array<double, 2> k_tilt{0.0, 0.0}; // transverse wave vector, rad/m
};

struct IncidentVolume {
    ComplexField3D u_in;
    TiltedWaveSpec tilt;
    double source_position;
};

/// exp(-j dz sqrt(k_b^2 - |w|^2)) for propagating |w| <= k_b, and the decaying
/// exp(-|dz| sqrt(|w|^2 - k_b^2)) beyond.
[[nodiscard]] cplx angular_spectrum_transfer(const std::array<double, 2>& omega, double dz, double k_b);

/// Tilt from the strongest DFT bin of y_in, refined by separable parabolic
/// interpolation. Throws std::invalid_argument for an all-zero field or an
/// evanescent tilt (|k| > k_b).
[[nodiscard]] TiltedWaveSpec estimate_tilt(const ComplexField2D& y_in, double k_b);

struct PropagationOptions {
    bool tilt_transfer = true; // false: zero-padded transform of y_in itself
    std::size_t taper = 0;     // width in pixels of a cosine border taper on the amplitude, 0 = off
};

/// Propagates y_in (on the geometry's detector plane) to every axial slice of Omega.
[[nodiscard]] IncidentVolume propagate_tilt_transfer(const ComplexField2D& y_in, const TiltedWaveSpec& tilt,
                                                     const Geometry& geometry, const PropagationOptions& options = {});

/// Propagates a plane field by dz (positive = toward smaller z) with the same
/// tilt-transfer scheme, keeping its sampling.
[[nodiscard]] ComplexField2D propagate_plane(const ComplexField2D& field, const TiltedWaveSpec& tilt, double dz,
                                             double k_b);

} // namespace odt
