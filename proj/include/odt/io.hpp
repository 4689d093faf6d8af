#pragma once

// Persistence: the ODTV volume container, slice export, and the run
// configuration document.
//
// ODTV layout (all little-endian):
//   0  char[4]  "ODTV"
//   4  u16      version (1)
//   6  u16      dtype: 1 f32, 2 f64, 3 complex f32, 4 complex f64
//   8  u32[3]   dims (x, y, z), x fastest in the payload
//  20  f64[3]   physical side lengths in meters
//  44  u16      index of the optical axis (2)
//  46  u16      reserved (0)
//  48  payload  prod(dims) values; complex as (re, im)
//  ..  u32      CRC-32 of the payload bytes

#include "odt/green_kernel.hpp"
#include "odt/grid.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace odt::io {

enum class Dtype : std::uint16_t { F32 = 1, F64 = 2, C64 = 3, C128 = 4 };

enum class ErrorCode { BadMagic, VersionMismatch, UnsupportedDtype, Truncated, CrcMismatch, Io, DtypeMismatch };

class IoError : public std::runtime_error {
public:
    IoError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

struct VolumeHeader {
    Dtype dtype = Dtype::F64;
    std::array<std::uint32_t, 3> dims{};
    std::array<double, 3> lengths{};
    std::uint16_t axial_axis = 2;
};

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderSize = 48;

void write_volume(const std::filesystem::path& path, const RealVolume& v, const std::array<double, 3>& lengths,
                  Dtype dtype = Dtype::F64);
void write_volume(const std::filesystem::path& path, const ComplexVolume& v, const std::array<double, 3>& lengths,
                  Dtype dtype = Dtype::C128);
/// A detector image is stored with dims (m, m, 1) and lengths (m p, m p, p).
void write_image(const std::filesystem::path& path, const ComplexImage& img, double pitch);

[[nodiscard]] VolumeHeader read_header(const std::filesystem::path& path);
/// f32 payloads are widened exactly; complex payloads raise DtypeMismatch.
[[nodiscard]] RealVolume read_real_volume(const std::filesystem::path& path, VolumeHeader* header = nullptr);
/// c64 payloads are widened exactly; real payloads raise DtypeMismatch.
[[nodiscard]] ComplexVolume read_complex_volume(const std::filesystem::path& path, VolumeHeader* header = nullptr);
[[nodiscard]] ComplexImage read_image(const std::filesystem::path& path, VolumeHeader* header = nullptr);

enum class SliceFormat { Csv, Pgm };
enum class ComplexPart { Abs, Real, Imag, Phase };

struct SliceOptions {
    int axis = 2;             // axis held fixed
    std::size_t index = 0;
    SliceFormat format = SliceFormat::Csv;
    double window_min = 0.0;  // Pgm: values mapped linearly to [0, 255]
    double window_max = 1.0;
    ComplexPart part = ComplexPart::Abs;
};

void export_slice(const std::filesystem::path& path, const RealVolume& v, const SliceOptions& options);
void export_slice(const std::filesystem::path& path, const ComplexVolume& v, const SliceOptions& options);

/// The 2D slice itself (rows = second free axis), as exported.
[[nodiscard]] Array2<double> extract_slice(const RealVolume& v, int axis, std::size_t index);

/// Cache file name for a kernel, unique per (n, p, L, k_b, precision).
[[nodiscard]] std::string kernel_cache_name(const Geometry& geometry, int padding, Precision precision);
void save_kernel(const std::filesystem::path& path, const ConvolutionKernel& kernel);
/// Throws IoError(DtypeMismatch) when the stored kernel does not belong to
/// this geometry and padding.
[[nodiscard]] ConvolutionKernel load_kernel(const std::filesystem::path& path, const Geometry& geometry, int padding);

} // namespace odt::io
