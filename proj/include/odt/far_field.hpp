#pragma once

// Radiation of a contrast source inside Omega to the detector plane: a sum
// over axial slabs of 2D aperiodic convolutions with the free-space Green
// function sampled at the slab-to-plane distance.

#include "odt/grid.hpp"

#include <memory>
#include <vector>

namespace odt {

/// Free-space Green function exp(j k_b |x|) / (4 pi |x|); throws for x = 0.
[[nodiscard]] cplx green_pointwise(const std::array<double, 3>& x, double k_b);

class FarFieldOperator {
public:
    explicit FarFieldOperator(const Geometry& geometry);

    [[nodiscard]] const Geometry& geometry() const { return geometry_; }
    [[nodiscard]] std::size_t detector_samples() const { return geometry_.detector().m; }

    /// Volume source (n^3) to detector field (m x m).
    void apply(const ComplexVolume& source, ComplexImage& out) const;
    /// Detector field to volume.
    void apply_adjoint(const ComplexImage& field, ComplexVolume& out) const;
    [[nodiscard]] ComplexImage apply(const ComplexVolume& source) const;
    [[nodiscard]] ComplexVolume apply_adjoint(const ComplexImage& field) const;

private:
    Geometry geometry_;
    std::size_t fine_ = 0;         // detector samples at spacing h
    std::size_t px_ = 0, py_ = 0;  // FFT sizes
    std::shared_ptr<const std::vector<cplx>> spectra_; // one px*py block per slab
};

/// Field radiated by the source onto the geometry's detector plane.
[[nodiscard]] ComplexField2D radiate_to_plane(const ComplexField3D& source, const Geometry& geometry);

} // namespace odt
