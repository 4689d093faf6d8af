#include "odt/io.hpp"

#include <cstdio>

namespace odt::io {

std::string kernel_cache_name(const Geometry& g, int padding, Precision precision) {
    const Shape3& s = g.shape();
    char buf[256];
    std::snprintf(buf, sizeof buf, "kernel_%zux%zux%zu_p%d_L%.9g_%.9g_%.9g_kb%.12g_%s.odtv", s.nx, s.ny, s.nz, padding,
                  g.length(0), g.length(1), g.length(2), g.wavenumber(),
                  precision == Precision::Single ? "f32" : "f64");
    return buf;
}

void save_kernel(const std::filesystem::path& path, const ConvolutionKernel& kernel) {
    ComplexVolume v(kernel.padded_shape(), kernel.spectrum());
    const Geometry& g = kernel.geometry();
    const double scale = static_cast<double>(kernel.padded_shape().nx) / static_cast<double>(g.shape().nx);
    write_volume(path, v, {g.length(0) * scale, g.length(1) * scale, g.length(2) * scale});
}

ConvolutionKernel load_kernel(const std::filesystem::path& path, const Geometry& geometry, int padding) {
    VolumeHeader h;
    ComplexVolume v = read_complex_volume(path, &h);
    const Shape3 padded{h.dims[0], h.dims[1], h.dims[2]};
    const Shape3& s = geometry.shape();
    if (padded.nx % s.nx != 0 || padded.ny * s.nx != padded.nx * s.ny || padded.nz * s.nx != padded.nx * s.nz)
        throw IoError(ErrorCode::DtypeMismatch, "kernel cache does not match the grid: " + path.string());
    const double scale = static_cast<double>(padded.nx) / static_cast<double>(s.nx);
    for (int a = 0; a < 3; ++a) {
        const double expected = geometry.length(a) * scale;
        if (std::abs(h.lengths[static_cast<std::size_t>(a)] - expected) > 1e-12 * expected)
            throw IoError(ErrorCode::DtypeMismatch, "kernel cache does not match the geometry: " + path.string());
    }
    return ConvolutionKernel::from_spectrum(geometry, padded, padding, std::move(v.vector()));
}

} // namespace odt::io
