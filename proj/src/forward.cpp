#include "odt/forward.hpp"

#include <stdexcept>

namespace odt {

void SolverConfig::validate() const {
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("SolverConfig: tolerance must be in (0, 1)");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
}

ForwardModel::ForwardModel(const ConvolutionKernel& kernel, const SensorModel& sensor, Precision precision)
    : G_(kernel, precision),
      Gt_(kernel.geometry()),
      P_(sensor, kernel.geometry().detector().m, kernel.geometry().detector().pitch) {}

ComplexImage ForwardModel::measure(const ComplexVolume& source) const { return P_.apply(Gt_.apply(source)); }

ComplexVolume ForwardModel::measure_adjoint(const ComplexImage& residual) const {
    return Gt_.apply_adjoint(P_.apply_adjoint(residual));
}

namespace {

void check_geometry(const ScatteringPotential& f, const ComplexField3D& u, const ForwardModel& model) {
    if (!f.geometry().same_grid(model.geometry()) || !u.geometry().same_grid(model.geometry()))
        throw std::invalid_argument("forward model: geometry mismatch");
}

ComplexVolume times(const RealVolume& f, const ComplexVolume& u) {
    ComplexVolume out(u.shape());
    const std::size_t n = u.size();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) out[i] = f[i] * u[i];
    return out;
}

KrylovResult solve(const LinearOperator& A, const LinearOperator& AH, const ComplexVolume& b, ComplexVolume& x,
                   const SolverConfig& cfg) {
    if (cfg.method == SolverMethod::BiCGStab) return bicgstab(A, b, x, cfg.tolerance, cfg.max_iterations);
    return cgnr(A, AH, b, x, cfg.tolerance, cfg.max_iterations);
}

} // namespace

ForwardState solve_total_field(const ScatteringPotential& f, const ComplexField3D& u_in, const ForwardModel& model,
                               const SolverConfig& cfg) {
    cfg.validate();
    check_geometry(f, u_in, model);
    const RealVolume& fv = f.values();
    const GreenOperator& G = model.green();
    const std::size_t n = fv.size();

    // A u = u - G (f . u);  A^* w = w - f . (G^* w)
    const LinearOperator A = [&](const ComplexVolume& x, ComplexVolume& y) {
        ComplexVolume fx = times(fv, x);
        G.apply(fx, fx);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - fx[i];
    };
    const LinearOperator AH = [&](const ComplexVolume& x, ComplexVolume& y) {
        ComplexVolume gx = G.apply_adjoint(x);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - fv[i] * gx[i];
    };

    ComplexVolume u = cfg.warm_start && cfg.warm_start->geometry().same_grid(f.geometry()) ? cfg.warm_start->values()
                                                                                           : u_in.values();
    KrylovResult r;
    if (f.is_zero()) {
        u = u_in.values();
        r.converged = true;
    } else {
        r = solve(A, AH, u_in.values(), u, cfg);
    }
    ComplexVolume source = times(fv, u);
    return ForwardState{ComplexField3D(std::move(u), f.geometry()), ComplexField3D(std::move(source), f.geometry()),
                        r.iterations, r.residual, r.converged};
}

ViewResult forward_view(const ScatteringPotential& f, const ComplexField3D& u_in, const ForwardModel& model,
                        const SolverConfig& cfg) {
    ForwardState state = solve_total_field(f, u_in, model, cfg);
    const DetectorPlane& det = model.geometry().detector();
    ComplexField2D y(model.measure(state.contrast_source.values()), det.pitch, det.position);
    return ViewResult{std::move(y), std::move(state)};
}

ComplexField2D born_forward_view(const ScatteringPotential& f, const ComplexField3D& u_in, const ForwardModel& model) {
    check_geometry(f, u_in, model);
    const DetectorPlane& det = model.geometry().detector();
    return ComplexField2D(model.measure(times(f.values(), u_in.values())), det.pitch, det.position);
}

AdjointResult jacobian_adjoint_apply(const ScatteringPotential& f, const ForwardState& state, const ForwardModel& model,
                                     const ComplexImage& residual, const SolverConfig& cfg,
                                     const ComplexVolume* warm_start) {
    cfg.validate();
    check_geometry(f, state.total_field, model);
    const RealVolume& fv = f.values();
    const GreenOperator& G = model.green();
    const std::size_t n = fv.size();

    // J^* r = conj(u) . (I - G^* F)^-1 z,  z = G~^* P^* r, evaluated as
    // z + G^* w with (I - F G^*) w = F z.
    ComplexVolume z = model.measure_adjoint(residual);
    ComplexVolume fz = times(fv, z);

    const LinearOperator B = [&](const ComplexVolume& x, ComplexVolume& y) {
        ComplexVolume gx = G.apply_adjoint(x);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - fv[i] * gx[i];
    };
    const LinearOperator BH = [&](const ComplexVolume& x, ComplexVolume& y) {
        ComplexVolume fx = times(fv, x);
        G.apply(fx, fx);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - fx[i];
    };

    AdjointResult out;
    ComplexVolume w = warm_start && warm_start->shape() == fz.shape() ? *warm_start : fz;
    if (!f.is_zero()) {
        const KrylovResult r = solve(B, BH, fz, w, cfg);
        out.iterations = r.iterations;
        out.residual = r.residual;
        out.converged = r.converged;
        ComplexVolume gw = G.apply_adjoint(w);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) z[i] += gw[i];
    } else {
        w = ComplexVolume(fz.shape());
    }

    const ComplexVolume& u = state.total_field.values();
    out.gradient = RealVolume(fv.shape());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) out.gradient[i] = (std::conj(u[i]) * z[i]).real();
    out.adjoint_solution = std::move(w);
    return out;
}

RealVolume born_adjoint_apply(const ComplexField3D& u_in, const ForwardModel& model, const ComplexImage& residual) {
    const ComplexVolume z = model.measure_adjoint(residual);
    const ComplexVolume& u = u_in.values();
    RealVolume g(u.shape());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (std::conj(u[i]) * z[i]).real();
    return g;
}

} // namespace odt
