#pragma once

// Two-step discrete forward model: total field u = (I - G diag(f))^-1 u_in,
// then y_sc = P G~ diag(f) u on the detector. Also the Born variant and the
// adjoint of the Jacobian with respect to f.

#include "odt/far_field.hpp"
#include "odt/green_kernel.hpp"
#include "odt/grid.hpp"
#include "odt/krylov.hpp"
#include "odt/sensor.hpp"

#include <cstddef>
#include <optional>

namespace odt {

enum class SolverMethod { BiCGStab, CGNormal };

struct SolverConfig {
    SolverMethod method = SolverMethod::BiCGStab;
    double tolerance = 1e-6;
    std::size_t max_iterations = 500;
    std::optional<ComplexField3D> warm_start;

    void validate() const;
};

struct ForwardState {
    ComplexField3D total_field;
    ComplexField3D contrast_source; // f . u
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Operators G, G~ and P for one geometry and sensor, shareable across threads.
class ForwardModel {
public:
    ForwardModel(const ConvolutionKernel& kernel, const SensorModel& sensor, Precision precision = Precision::Double);

    [[nodiscard]] const Geometry& geometry() const { return G_.geometry(); }
    [[nodiscard]] const GreenOperator& green() const { return G_; }
    [[nodiscard]] const FarFieldOperator& far_field() const { return Gt_; }
    [[nodiscard]] const SensorOperator& sensor() const { return P_; }

    /// y = P G~ s
    [[nodiscard]] ComplexImage measure(const ComplexVolume& source) const;
    /// G~^* P^* r
    [[nodiscard]] ComplexVolume measure_adjoint(const ComplexImage& residual) const;

private:
    GreenOperator G_;
    FarFieldOperator Gt_;
    SensorOperator P_;
};

[[nodiscard]] ForwardState solve_total_field(const ScatteringPotential& f, const ComplexField3D& u_in,
                                             const ForwardModel& model, const SolverConfig& cfg);

struct ViewResult {
    ComplexField2D y_sc;
    ForwardState state;
};

[[nodiscard]] ViewResult forward_view(const ScatteringPotential& f, const ComplexField3D& u_in,
                                      const ForwardModel& model, const SolverConfig& cfg);

[[nodiscard]] ComplexField2D born_forward_view(const ScatteringPotential& f, const ComplexField3D& u_in,
                                               const ForwardModel& model);

struct AdjointResult {
    RealVolume gradient;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = true;
    ComplexVolume adjoint_solution; // reusable as a warm start
};

/// Re(J^* r) with J the Jacobian of f -> P G~ diag(f) u(f) at the state's f.
[[nodiscard]] AdjointResult jacobian_adjoint_apply(const ScatteringPotential& f, const ForwardState& state,
                                                   const ForwardModel& model, const ComplexImage& residual,
                                                   const SolverConfig& cfg,
                                                   const ComplexVolume* warm_start = nullptr);

/// Re(J_B^* r) for the Born model J_B = P G~ diag(u_in).
[[nodiscard]] RealVolume born_adjoint_apply(const ComplexField3D& u_in, const ForwardModel& model,
                                            const ComplexImage& residual);

} // namespace odt
