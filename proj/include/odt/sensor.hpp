#pragma once

// Microscope pupil (ideal disk low-pass) and optional refocusing of the field
// recorded on the detector plane.

#include "odt/grid.hpp"

#include <cstddef>
#include <vector>

namespace odt {

enum class PupilKind { IdealDisk, None };

struct SensorModel {
    double numerical_aperture = 1.0;
    double wavelength = 0.0;       // vacuum, meters
    double background_index = 1.0; // medium of the refocus propagation
    double refocus = 0.0;          // signed distance, meters
    PupilKind pupil = PupilKind::IdealDisk;
    std::size_t padding = 2;       // zero-padding factor of the filtering DFT

    /// Cut-off of the ideal disk in rad/m: 2 pi * 2 NA / lambda.
    [[nodiscard]] double cutoff() const;
    void validate() const;
};

/// Sensor model matching a geometry, NA and pupil kind, with no refocus.
[[nodiscard]] SensorModel make_sensor(const Geometry& geometry, double numerical_aperture,
                                      PupilKind pupil = PupilKind::IdealDisk);

class SensorOperator {
public:
    SensorOperator(SensorModel model, std::size_t m, double pitch);

    [[nodiscard]] const SensorModel& model() const { return model_; }
    void apply(const ComplexImage& in, ComplexImage& out) const;
    void apply_adjoint(const ComplexImage& in, ComplexImage& out) const;
    [[nodiscard]] ComplexImage apply(const ComplexImage& in) const;
    [[nodiscard]] ComplexImage apply_adjoint(const ComplexImage& in) const;
    [[nodiscard]] bool is_identity() const { return identity_; }

private:
    void run(const ComplexImage& in, ComplexImage& out, bool adjoint) const;

    SensorModel model_;
    std::size_t m_;
    std::size_t P_;
    bool identity_;
    std::vector<cplx> multiplier_;
};

[[nodiscard]] ComplexField2D apply_sensor(const ComplexField2D& field, const SensorModel& sensor);

} // namespace odt
