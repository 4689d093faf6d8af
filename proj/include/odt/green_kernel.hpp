#pragma once

// Discretized truncated Green function and the FFT volume convolution G.
//
// The Helmholtz Green function g(x) = exp(j k_b |x|) / (4 pi |x|) is cut off
// outside the ball of radius R = diam(Omega). Its Fourier transform is then
// smooth and known in closed form; sampling it on the frequency grid of a
// p-fold zero-padded DFT gives the spectral kernel. The reduced kernel folds
// the p-fold accurate kernel onto a twofold padded grid.

#include "odt/grid.hpp"

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace odt {

/// Fourier transform of g truncated to the ball of radius R, at |omega|.
[[nodiscard]] cplx ghat_truncated_radius(double omega_norm, double radius, double k_b);
/// Cubic Omega of side L (radius sqrt(3) L).
[[nodiscard]] cplx ghat_truncated(double omega_norm, double L, double k_b);

enum class Precision { Double, Single };

/// A kernel ready for convolution: DFT samples on a padded periodic grid.
/// Spectra are shared immutably between copies.
class ConvolutionKernel {
public:
    [[nodiscard]] const Geometry& geometry() const { return geometry_; }
    [[nodiscard]] const Shape3& padded_shape() const { return padded_; }
    [[nodiscard]] const std::vector<cplx>& spectrum() const { return *spectrum_; }
    [[nodiscard]] int padding() const { return p_; }

    /// Rebuilds a kernel from stored DFT samples (kernel cache).
    static ConvolutionKernel from_spectrum(Geometry geometry, Shape3 padded, int p, std::vector<cplx> spectrum);

protected:
    ConvolutionKernel(Geometry geometry, Shape3 padded, int p, std::shared_ptr<const std::vector<cplx>> spectrum)
        : geometry_(std::move(geometry)), padded_(padded), p_(p), spectrum_(std::move(spectrum)) {}

private:
    Geometry geometry_;
    Shape3 padded_;
    int p_;
    std::shared_ptr<const std::vector<cplx>> spectrum_;
};

/// Samples of ghat on the (n p)^3 frequency grid, stored in DFT layout.
class SpectralKernel : public ConvolutionKernel {
public:
    static constexpr std::size_t kDefaultMemoryLimit = std::size_t{1} << 30;

    /// Throws std::length_error when the sample array would exceed memory_limit
    /// bytes; use ReducedKernel for large grids.
    static SpectralKernel build(const Geometry& geometry, int p = 4,
                                std::size_t memory_limit = kDefaultMemoryLimit);

private:
    using ConvolutionKernel::ConvolutionKernel;
};

/// DFT of the modified kernel on the (2n)^3 grid: applying it with twofold
/// padding reproduces the p-fold padded convolution on Omega.
class ReducedKernel : public ConvolutionKernel {
public:
    /// source_padding must be even and >= 2. With naive = true the full (n p)^3
    /// spatial kernel is formed and cropped instead of summing decimated slices.
    static ReducedKernel build(const Geometry& geometry, int source_padding = 4, bool naive = false);

private:
    using ConvolutionKernel::ConvolutionKernel;
};

/// Applies G (and its adjoint) by zero-padding, FFT, pointwise product and crop.
class GreenOperator {
public:
    explicit GreenOperator(const ConvolutionKernel& kernel, Precision precision = Precision::Double);

    [[nodiscard]] const Geometry& geometry() const { return kernel_.geometry(); }
    [[nodiscard]] Precision precision() const { return precision_; }

    /// out = G in; in and out may alias.
    void apply(const ComplexVolume& in, ComplexVolume& out) const;
    /// out = G^* in.
    void apply_adjoint(const ComplexVolume& in, ComplexVolume& out) const;
    [[nodiscard]] ComplexVolume apply(const ComplexVolume& in) const;
    [[nodiscard]] ComplexVolume apply_adjoint(const ComplexVolume& in) const;

private:
    void run(const ComplexVolume& in, ComplexVolume& out, bool adjoint) const;

    ConvolutionKernel kernel_;
    Precision precision_;
    std::shared_ptr<const std::vector<std::complex<float>>> spectrum_f_;
};

[[nodiscard]] ComplexField3D convolve_volume(const ConvolutionKernel& kernel, const ComplexField3D& v,
                                             Precision precision = Precision::Double);

} // namespace odt
