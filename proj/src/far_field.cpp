#include "odt/far_field.hpp"

#include "odt/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

cplx green_pointwise(const std::array<double, 3>& x, double k_b) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r == 0.0) throw std::invalid_argument("green_pointwise: singular at the origin");
    return std::polar(1.0 / (4.0 * std::numbers::pi * r), k_b * r);
}

FarFieldOperator::FarFieldOperator(const Geometry& geometry) : geometry_(geometry) {
    const Shape3 n = geometry_.shape();
    const DetectorPlane& det = geometry_.detector();
    if (det.position <= geometry_.length(2) / 2.0)
        throw std::invalid_argument("FarFieldOperator: detector plane inside the volume");
    fine_ = det.m * geometry_.detector_stride();
    px_ = fft::good_size(fine_ + n.nx - 1);
    py_ = fft::good_size(fine_ + n.ny - 1);

    const double h = geometry_.spacing();
    const double kb = geometry_.wavenumber();
    const double w = h * h * h;
    const long dx_lo = -static_cast<long>(fine_ / 2) + 1 - static_cast<long>(n.nx / 2);
    const long dx_hi = static_cast<long>(fine_ / 2) + static_cast<long>(n.nx / 2) - 1;
    const long dy_lo = -static_cast<long>(fine_ / 2) + 1 - static_cast<long>(n.ny / 2);
    const long dy_hi = static_cast<long>(fine_ / 2) + static_cast<long>(n.ny / 2) - 1;
    const std::size_t block = px_ * py_;
    auto spectra = std::make_shared<std::vector<cplx>>(block * n.nz, cplx{});
    auto& s = *spectra;

#pragma omp parallel for schedule(static)
    for (std::size_t iz = 0; iz < n.nz; ++iz) {
        cplx* k = s.data() + iz * block;
        const double dz = det.position - geometry_.coordinate(2, iz);
        for (long dy = dy_lo; dy <= dy_hi; ++dy)
            for (long dx = dx_lo; dx <= dx_hi; ++dx)
                k[wrap_index(dy, py_) * px_ + wrap_index(dx, px_)] =
                    w * green_pointwise({h * static_cast<double>(dx), h * static_cast<double>(dy), dz}, kb);
        fft::transform(k, {px_, py_}, fft::Direction::Forward);
    }
    spectra_ = std::move(spectra);
}

void FarFieldOperator::apply(const ComplexVolume& source, ComplexImage& out) const {
    const Shape3 n = geometry_.shape();
    if (source.shape() != n) throw std::invalid_argument("FarFieldOperator: shape mismatch");
    const std::size_t block = px_ * py_;
    std::vector<cplx> acc(block, cplx{});
    std::vector<cplx> buf(block);
    const auto& s = *spectra_;
    for (std::size_t iz = 0; iz < n.nz; ++iz) {
        std::fill(buf.begin(), buf.end(), cplx{});
        bool any = false;
        for (std::size_t iy = 0; iy < n.ny; ++iy) {
            const std::size_t wy = wrap_index(centered_index(iy, n.ny), py_);
            for (std::size_t ix = 0; ix < n.nx; ++ix) {
                const cplx v = source(ix, iy, iz);
                if (v != cplx{}) any = true;
                buf[wy * px_ + wrap_index(centered_index(ix, n.nx), px_)] = v;
            }
        }
        if (!any) continue;
        fft::transform(buf.data(), {px_, py_}, fft::Direction::Forward);
        const cplx* k = s.data() + iz * block;
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < block; ++i) acc[i] += k[i] * buf[i];
    }
    fft::transform(acc.data(), {px_, py_}, fft::Direction::Inverse);

    const std::size_t m = geometry_.detector().m;
    const long q = static_cast<long>(geometry_.detector_stride());
    if (out.nx() != m || out.ny() != m) out = ComplexImage(m, m);
    for (std::size_t jy = 0; jy < m; ++jy) {
        const std::size_t wy = wrap_index(q * centered_index(jy, m), py_);
        for (std::size_t jx = 0; jx < m; ++jx)
            out(jx, jy) = acc[wy * px_ + wrap_index(q * centered_index(jx, m), px_)];
    }
}

void FarFieldOperator::apply_adjoint(const ComplexImage& field, ComplexVolume& out) const {
    const Shape3 n = geometry_.shape();
    const std::size_t m = geometry_.detector().m;
    if (field.nx() != m || field.ny() != m) throw std::invalid_argument("FarFieldOperator: detector size mismatch");
    const long q = static_cast<long>(geometry_.detector_stride());
    const std::size_t block = px_ * py_;
    std::vector<cplx> y(block, cplx{});
    for (std::size_t jy = 0; jy < m; ++jy) {
        const std::size_t wy = wrap_index(q * centered_index(jy, m), py_);
        for (std::size_t jx = 0; jx < m; ++jx) y[wy * px_ + wrap_index(q * centered_index(jx, m), px_)] = field(jx, jy);
    }
    fft::transform(y.data(), {px_, py_}, fft::Direction::Forward);

    if (out.shape() != n) out = ComplexVolume(n);
    const auto& s = *spectra_;
    std::vector<cplx> buf(block);
    for (std::size_t iz = 0; iz < n.nz; ++iz) {
        const cplx* k = s.data() + iz * block;
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < block; ++i) buf[i] = std::conj(k[i]) * y[i];
        fft::transform(buf.data(), {px_, py_}, fft::Direction::Inverse);
        for (std::size_t iy = 0; iy < n.ny; ++iy) {
            const std::size_t wy = wrap_index(centered_index(iy, n.ny), py_);
            for (std::size_t ix = 0; ix < n.nx; ++ix)
                out(ix, iy, iz) = buf[wy * px_ + wrap_index(centered_index(ix, n.nx), px_)];
        }
    }
}

ComplexImage FarFieldOperator::apply(const ComplexVolume& source) const {
    ComplexImage out;
    apply(source, out);
    return out;
}

ComplexVolume FarFieldOperator::apply_adjoint(const ComplexImage& field) const {
    ComplexVolume out;
    apply_adjoint(field, out);
    return out;
}

ComplexField2D radiate_to_plane(const ComplexField3D& source, const Geometry& geometry) {
    if (!source.geometry().same_grid(geometry)) throw std::invalid_argument("radiate_to_plane: geometry mismatch");
    FarFieldOperator op(geometry);
    return ComplexField2D(op.apply(source.values()), geometry.detector().pitch, geometry.detector().position);
}

} // namespace odt
