#pragma once

// In-place complex DFTs on contiguous arrays with x fastest. The forward
// transform is unnormalized; the inverse is scaled by 1/size so that
// inverse(forward(v)) == v.
//
// Plans are built with FFTW_ESTIMATE (no timing-dependent choices) and cached
// per (dims, direction, precision, threads), so repeated transforms of equal
// inputs are bitwise reproducible.

#include <complex>
#include <cstddef>
#include <vector>

namespace odt::fft {

enum class Direction { Forward, Inverse };

/// dims are given as (nx, ny, nz) / (nx, ny) / (nx), x fastest in memory.
void transform(std::complex<double>* data, const std::vector<std::size_t>& dims, Direction dir);
void transform(std::complex<float>* data, const std::vector<std::size_t>& dims, Direction dir);

inline void forward3(std::complex<double>* d, std::size_t nx, std::size_t ny, std::size_t nz) {
    transform(d, {nx, ny, nz}, Direction::Forward);
}
inline void inverse3(std::complex<double>* d, std::size_t nx, std::size_t ny, std::size_t nz) {
    transform(d, {nx, ny, nz}, Direction::Inverse);
}
inline void forward2(std::complex<double>* d, std::size_t nx, std::size_t ny) {
    transform(d, {nx, ny}, Direction::Forward);
}
inline void inverse2(std::complex<double>* d, std::size_t nx, std::size_t ny) {
    transform(d, {nx, ny}, Direction::Inverse);
}

/// Smallest size >= n whose prime factors are 2, 3, 5 and 7 only.
[[nodiscard]] std::size_t good_size(std::size_t n);

/// Number of cached plans (diagnostics).
[[nodiscard]] std::size_t cached_plans();

} // namespace odt::fft
