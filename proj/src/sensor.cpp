#include "odt/sensor.hpp"

#include "odt/fft.hpp"
#include "odt/incident.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

double SensorModel::cutoff() const { return 2.0 * std::numbers::pi * 2.0 * numerical_aperture / wavelength; }

void SensorModel::validate() const {
    if (!(numerical_aperture > 0.0)) throw std::invalid_argument("SensorModel: NA must be positive");
    if (!(wavelength > 0.0)) throw std::invalid_argument("SensorModel: wavelength must be positive");
    if (!(background_index > 0.0)) throw std::invalid_argument("SensorModel: background index must be positive");
    if (!std::isfinite(refocus)) throw std::invalid_argument("SensorModel: refocus must be finite");
    if (padding < 1) throw std::invalid_argument("SensorModel: padding must be >= 1");
}

SensorModel make_sensor(const Geometry& geometry, double numerical_aperture, PupilKind pupil) {
    SensorModel s;
    s.numerical_aperture = numerical_aperture;
    s.wavelength = geometry.wavelength();
    s.background_index = geometry.background_index();
    s.pupil = pupil;
    return s;
}

SensorOperator::SensorOperator(SensorModel model, std::size_t m, double pitch)
    : model_(model), m_(m), P_(m * model.padding) {
    model_.validate();
    identity_ = model_.pupil == PupilKind::None && model_.refocus == 0.0;
    if (identity_) return;
    const double kb = 2.0 * std::numbers::pi * model_.background_index / model_.wavelength;
    const double cut = model_.cutoff();
    const double dw = 2.0 * std::numbers::pi / (static_cast<double>(P_) * pitch);
    multiplier_.resize(P_ * P_);
    for (std::size_t jy = 0; jy < P_; ++jy)
        for (std::size_t jx = 0; jx < P_; ++jx) {
            const std::array<double, 2> w{dw * static_cast<double>(frequency_index(jx, P_)),
                                          dw * static_cast<double>(frequency_index(jy, P_))};
            cplx v = angular_spectrum_transfer(w, model_.refocus, kb);
            if (model_.pupil == PupilKind::IdealDisk && std::hypot(w[0], w[1]) > cut) v = 0.0;
            multiplier_[jy * P_ + jx] = v;
        }
}

void SensorOperator::run(const ComplexImage& in, ComplexImage& out, bool adjoint) const {
    if (in.nx() != m_ || in.ny() != m_) throw std::invalid_argument("SensorOperator: size mismatch");
    if (identity_) {
        out = in;
        return;
    }
    std::vector<cplx> work(P_ * P_, cplx{});
    for (std::size_t iy = 0; iy < m_; ++iy) {
        const std::size_t wy = wrap_index(centered_index(iy, m_), P_);
        for (std::size_t ix = 0; ix < m_; ++ix) work[wy * P_ + wrap_index(centered_index(ix, m_), P_)] = in(ix, iy);
    }
    fft::forward2(work.data(), P_, P_);
    for (std::size_t i = 0; i < work.size(); ++i) work[i] *= adjoint ? std::conj(multiplier_[i]) : multiplier_[i];
    fft::inverse2(work.data(), P_, P_);
    if (out.nx() != m_ || out.ny() != m_) out = ComplexImage(m_, m_);
    for (std::size_t iy = 0; iy < m_; ++iy) {
        const std::size_t wy = wrap_index(centered_index(iy, m_), P_);
        for (std::size_t ix = 0; ix < m_; ++ix) out(ix, iy) = work[wy * P_ + wrap_index(centered_index(ix, m_), P_)];
    }
}

void SensorOperator::apply(const ComplexImage& in, ComplexImage& out) const { run(in, out, false); }
void SensorOperator::apply_adjoint(const ComplexImage& in, ComplexImage& out) const { run(in, out, true); }

ComplexImage SensorOperator::apply(const ComplexImage& in) const {
    ComplexImage out;
    run(in, out, false);
    return out;
}

ComplexImage SensorOperator::apply_adjoint(const ComplexImage& in) const {
    ComplexImage out;
    run(in, out, true);
    return out;
}

ComplexField2D apply_sensor(const ComplexField2D& field, const SensorModel& sensor) {
    SensorOperator op(sensor, field.values().nx(), field.pitch());
    if (field.values().nx() != field.values().ny()) throw std::invalid_argument("apply_sensor: detector must be square");
    return ComplexField2D(op.apply(field.values()), field.pitch(), field.position());
}

} // namespace odt
