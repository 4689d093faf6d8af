#include "odt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace odt::io {

namespace {

// Free axes of a slice: (columns, rows).
std::pair<int, int> free_axes(int axis) {
    switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    case 2: return {0, 1};
    default: throw std::out_of_range("export_slice: axis must be 0, 1 or 2");
    }
}

template <class T, class F>
Array2<double> slice_of(const Array3<T>& v, int axis, std::size_t index, F value) {
    const auto [a, b] = free_axes(axis);
    const Shape3& s = v.shape();
    if (index >= s[axis]) throw std::out_of_range("export_slice: index out of range");
    Array2<double> out(s[a], s[b]);
    for (std::size_t j = 0; j < s[b]; ++j)
        for (std::size_t i = 0; i < s[a]; ++i) {
            std::array<std::size_t, 3> idx{};
            idx[static_cast<std::size_t>(axis)] = index;
            idx[static_cast<std::size_t>(a)] = i;
            idx[static_cast<std::size_t>(b)] = j;
            out(i, j) = value(v(idx[0], idx[1], idx[2]));
        }
    return out;
}

void write_slice(const std::filesystem::path& path, const Array2<double>& img, const SliceOptions& o) {
    if (o.format == SliceFormat::Csv) {
        std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.string().c_str(), "w"), &std::fclose);
        if (!f) throw IoError(ErrorCode::Io, "cannot open " + path.string() + " for writing");
        for (std::size_t j = 0; j < img.ny(); ++j) {
            for (std::size_t i = 0; i < img.nx(); ++i) std::fprintf(f.get(), i ? ",%.9g" : "%.9g", img(i, j));
            std::fputc('\n', f.get());
        }
        if (std::ferror(f.get())) throw IoError(ErrorCode::Io, "write failed: " + path.string());
        return;
    }
    if (!(o.window_max > o.window_min)) throw std::invalid_argument("export_slice: empty value window");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out << "P5\n" << img.nx() << ' ' << img.ny() << "\n255\n";
    std::vector<unsigned char> row(img.nx());
    // Image rows run top to bottom, so the last row of the slice comes first.
    for (std::size_t j = img.ny(); j-- > 0;) {
        for (std::size_t i = 0; i < img.nx(); ++i) {
            const double t = (img(i, j) - o.window_min) / (o.window_max - o.window_min);
            const double c = std::isnan(t) ? 0.0 : std::clamp(t, 0.0, 1.0);
            row[i] = static_cast<unsigned char>(std::lround(255.0 * c));
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw IoError(ErrorCode::Io, "write failed: " + path.string());
}

} // namespace

Array2<double> extract_slice(const RealVolume& v, int axis, std::size_t index) {
    return slice_of(v, axis, index, [](double x) { return x; });
}

void export_slice(const std::filesystem::path& path, const RealVolume& v, const SliceOptions& options) {
    write_slice(path, extract_slice(v, options.axis, options.index), options);
}

void export_slice(const std::filesystem::path& path, const ComplexVolume& v, const SliceOptions& options) {
    const ComplexPart part = options.part;
    const Array2<double> img = slice_of(v, options.axis, options.index, [part](const cplx& z) {
        switch (part) {
        case ComplexPart::Real: return z.real();
        case ComplexPart::Imag: return z.imag();
        case ComplexPart::Phase: return std::arg(z);
        case ComplexPart::Abs: break;
        }
        return std::abs(z);
    });
    write_slice(path, img, options);
}

} // namespace odt::io
