#include "odt/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace odt::io {

namespace {

class Writer {
public:
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void raw(const char* s, std::size_t n) { bytes.insert(bytes.end(), s, s + n); }
    std::vector<unsigned char> bytes;

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
    }
};

std::uint64_t get(const unsigned char* p, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::size_t value_size(Dtype d) {
    switch (d) {
    case Dtype::F32: return 4;
    case Dtype::F64: return 8;
    case Dtype::C64: return 8;
    case Dtype::C128: return 16;
    }
    return 0;
}

std::uint32_t crc(const unsigned char* p, std::size_t n) {
    uLong c = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large payloads in pieces.
    while (n > 0) {
        const std::size_t chunk = std::min<std::size_t>(n, 1u << 30);
        c = crc32(c, p, static_cast<uInt>(chunk));
        p += chunk;
        n -= chunk;
    }
    return static_cast<std::uint32_t>(c);
}

Writer header(Dtype dtype, const Shape3& s, const std::array<double, 3>& lengths) {
    Writer w;
    w.raw("ODTV", 4);
    w.u16(kFormatVersion);
    w.u16(static_cast<std::uint16_t>(dtype));
    for (std::size_t d : {s.nx, s.ny, s.nz}) {
        if (d > 0xffffffffu) throw IoError(ErrorCode::Io, "write_volume: dimension too large");
        w.u32(static_cast<std::uint32_t>(d));
    }
    for (double l : lengths) w.f64(l);
    w.u16(2);
    w.u16(0);
    return w;
}

void finish(const std::filesystem::path& path, Writer& w) {
    const std::uint32_t c = crc(w.bytes.data() + kHeaderSize, w.bytes.size() - kHeaderSize);
    w.u32(c);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(w.bytes.data()), static_cast<std::streamsize>(w.bytes.size()));
    if (!out) throw IoError(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(ErrorCode::Io, "cannot open " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct Parsed {
    VolumeHeader header;
    std::vector<unsigned char> bytes;
    [[nodiscard]] const unsigned char* payload() const { return bytes.data() + kHeaderSize; }
    [[nodiscard]] std::size_t count() const {
        return std::size_t{header.dims[0]} * header.dims[1] * header.dims[2];
    }
};

VolumeHeader parse_header(const std::vector<unsigned char>& b, const std::string& name) {
    if (b.size() < kHeaderSize) throw IoError(ErrorCode::Truncated, "truncated header: " + name);
    if (std::memcmp(b.data(), "ODTV", 4) != 0) throw IoError(ErrorCode::BadMagic, "not an ODTV file: " + name);
    const auto version = static_cast<std::uint16_t>(get(b.data() + 4, 2));
    if (version != kFormatVersion)
        throw IoError(ErrorCode::VersionMismatch, "unsupported ODTV version " + std::to_string(version));
    const auto dt = static_cast<std::uint16_t>(get(b.data() + 6, 2));
    if (dt < 1 || dt > 4) throw IoError(ErrorCode::UnsupportedDtype, "unsupported dtype code " + std::to_string(dt));
    VolumeHeader h;
    h.dtype = static_cast<Dtype>(dt);
    for (int i = 0; i < 3; ++i)
        h.dims[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(get(b.data() + 8 + 4 * i, 4));
    for (int i = 0; i < 3; ++i)
        h.lengths[static_cast<std::size_t>(i)] = std::bit_cast<double>(get(b.data() + 20 + 8 * i, 8));
    h.axial_axis = static_cast<std::uint16_t>(get(b.data() + 44, 2));
    return h;
}

Parsed load(const std::filesystem::path& path) {
    Parsed p;
    p.bytes = slurp(path);
    p.header = parse_header(p.bytes, path.string());
    const std::size_t payload = p.count() * value_size(p.header.dtype);
    if (p.bytes.size() < kHeaderSize + payload + 4) throw IoError(ErrorCode::Truncated, "truncated file: " + path.string());
    const auto stored = static_cast<std::uint32_t>(get(p.bytes.data() + kHeaderSize + payload, 4));
    if (crc(p.payload(), payload) != stored) throw IoError(ErrorCode::CrcMismatch, "CRC mismatch: " + path.string());
    return p;
}

Shape3 shape_of(const VolumeHeader& h) { return {h.dims[0], h.dims[1], h.dims[2]}; }

} // namespace

void write_volume(const std::filesystem::path& path, const RealVolume& v, const std::array<double, 3>& lengths,
                  Dtype dtype) {
    if (dtype != Dtype::F32 && dtype != Dtype::F64)
        throw IoError(ErrorCode::DtypeMismatch, "real volumes are stored as f32 or f64");
    Writer w = header(dtype, v.shape(), lengths);
    w.bytes.reserve(kHeaderSize + v.size() * value_size(dtype) + 4);
    for (double x : v.span()) {
        if (dtype == Dtype::F32)
            w.f32(static_cast<float>(x));
        else
            w.f64(x);
    }
    finish(path, w);
}

void write_volume(const std::filesystem::path& path, const ComplexVolume& v, const std::array<double, 3>& lengths,
                  Dtype dtype) {
    if (dtype != Dtype::C64 && dtype != Dtype::C128)
        throw IoError(ErrorCode::DtypeMismatch, "complex volumes are stored as c64 or c128");
    Writer w = header(dtype, v.shape(), lengths);
    w.bytes.reserve(kHeaderSize + v.size() * value_size(dtype) + 4);
    for (const cplx& x : v.span()) {
        if (dtype == Dtype::C64) {
            w.f32(static_cast<float>(x.real()));
            w.f32(static_cast<float>(x.imag()));
        } else {
            w.f64(x.real());
            w.f64(x.imag());
        }
    }
    finish(path, w);
}

void write_image(const std::filesystem::path& path, const ComplexImage& img, double pitch) {
    const double side = pitch * static_cast<double>(img.nx());
    ComplexVolume v(Shape3{img.nx(), img.ny(), 1}, std::vector<cplx>(img.span().begin(), img.span().end()));
    write_volume(path, v, {side, pitch * static_cast<double>(img.ny()), pitch});
}

VolumeHeader read_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(ErrorCode::Io, "cannot open " + path.string());
    std::vector<unsigned char> b(kHeaderSize);
    in.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(kHeaderSize));
    b.resize(static_cast<std::size_t>(in.gcount()));
    return parse_header(b, path.string());
}

RealVolume read_real_volume(const std::filesystem::path& path, VolumeHeader* header_out) {
    const Parsed p = load(path);
    if (p.header.dtype != Dtype::F32 && p.header.dtype != Dtype::F64)
        throw IoError(ErrorCode::DtypeMismatch, "expected a real volume: " + path.string());
    RealVolume v(shape_of(p.header));
    const unsigned char* s = p.payload();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (p.header.dtype == Dtype::F32)
            v[i] = static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(get(s + 4 * i, 4))));
        else
            v[i] = std::bit_cast<double>(get(s + 8 * i, 8));
    }
    if (header_out) *header_out = p.header;
    return v;
}

ComplexVolume read_complex_volume(const std::filesystem::path& path, VolumeHeader* header_out) {
    const Parsed p = load(path);
    if (p.header.dtype != Dtype::C64 && p.header.dtype != Dtype::C128)
        throw IoError(ErrorCode::DtypeMismatch, "expected a complex volume: " + path.string());
    ComplexVolume v(shape_of(p.header));
    const unsigned char* s = p.payload();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (p.header.dtype == Dtype::C64) {
            const float re = std::bit_cast<float>(static_cast<std::uint32_t>(get(s + 8 * i, 4)));
            const float im = std::bit_cast<float>(static_cast<std::uint32_t>(get(s + 8 * i + 4, 4)));
            v[i] = cplx(re, im);
        } else {
            v[i] = cplx(std::bit_cast<double>(get(s + 16 * i, 8)), std::bit_cast<double>(get(s + 16 * i + 8, 8)));
        }
    }
    if (header_out) *header_out = p.header;
    return v;
}

ComplexImage read_image(const std::filesystem::path& path, VolumeHeader* header_out) {
    VolumeHeader h;
    ComplexVolume v = read_complex_volume(path, &h);
    if (h.dims[2] != 1) throw IoError(ErrorCode::DtypeMismatch, "expected a 2D image: " + path.string());
    if (header_out) *header_out = h;
    return ComplexImage(h.dims[0], h.dims[1], std::move(v.vector()));
}

} // namespace odt::io
