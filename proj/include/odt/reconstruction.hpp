#pragma once

// Accelerated stochastic forward-backward splitting for
//   min_f  sum_q 1/(2 |y_q|^2) |H_q(f) - y_q|^2 + tau R(f) + i_{>=0}(f).

#include "odt/forward.hpp"
#include "odt/incident.hpp"
#include "odt/regularization.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace odt {

struct View {
    ComplexField3D u_in;
    ComplexField2D y_sc;
    TiltedWaveSpec tilt{};

    /// 1 / |y_sc|^2, or 1 when the data are identically zero.
    [[nodiscard]] double weight() const;
};

using ViewSet = std::vector<View>;

enum class ForwardKind { LippmannSchwinger, Born };
/// Where the data gradient is evaluated: at the extrapolated point v^k
/// (standard FISTA) or at the latest iterate f^(k-1).
enum class GradientPoint { Extrapolated, LatestIterate };
enum class StepSchedule { InverseSqrt, Constant };

struct ReconConfig {
    double step0 = 0.0;           // gamma_0; 0 selects 1 / L from a power iteration
    std::size_t subset_size = 0;  // 0 = all views
    std::size_t max_iterations = 100;
    double tau = 0.0;
    ProxConfig prox;              // weight is ignored; gamma_k * tau is used
    SolverConfig solver;
    std::uint64_t seed = 0;
    std::optional<RealVolume> initial; // f^0, zero by default
    bool accelerated = true;           // false: alpha = 1, plain forward-backward
    GradientPoint gradient_point = GradientPoint::Extrapolated;
    StepSchedule schedule = StepSchedule::InverseSqrt;
    ForwardKind model = ForwardKind::LippmannSchwinger;
    double stagnation_tolerance = 1e-6;
    std::size_t stagnation_window = 5;
    bool compute_objective = false;
    std::size_t power_iterations = 20;
    std::string trace_path; // JSON lines, one record per iteration

    void validate(std::size_t view_count) const;
};

struct TraceRecord {
    std::size_t iteration = 0;
    double fidelity = 0.0;  // on the subset
    double objective = std::numeric_limits<double>::quiet_NaN();
    double step = 0.0;
    double relative_change = 0.0;
    std::size_t solver_iterations = 0;
    std::size_t unconverged_solves = 0;
    std::size_t prox_iterations = 0;
    std::vector<std::size_t> subset;
};

struct ReconResult {
    ScatteringPotential f;
    RealVolume ri;
    std::vector<TraceRecord> trace;
    std::string termination;
    double step0 = 0.0;
};

/// Thrown when the iteration produces non-finite values; carries the trace so far.
class ReconAborted : public NumericalError {
public:
    ReconAborted(const std::string& what, std::vector<TraceRecord> trace)
        : NumericalError(what), trace(std::move(trace)) {}
    std::vector<TraceRecord> trace;
};

/// Subsets drawn without replacement within an epoch: the view indices are
/// shuffled once per epoch and consumed in order.
class SubsetSampler {
public:
    SubsetSampler(std::size_t view_count, std::size_t subset_size, std::uint64_t seed);
    std::vector<std::size_t> next();

private:
    std::size_t count_;
    std::size_t size_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_;
};

/// Next subset of the sampler's sequence.
[[nodiscard]] std::vector<std::size_t> select_subset(SubsetSampler& sampler);

/// Per-view solver states reused as warm starts across iterations.
struct WarmStartCache {
    std::vector<std::optional<ComplexVolume>> total;
    std::vector<std::optional<ComplexVolume>> adjoint;
};

struct DataGradient {
    RealVolume gradient;
    double fidelity = 0.0;
    std::size_t solver_iterations = 0;
    std::size_t unconverged_solves = 0;
};

/// Gradient and value of sum_{q in subset} w_q / 2 |H_q(f) - y_q|^2.
[[nodiscard]] DataGradient data_grad(const ScatteringPotential& f, const std::vector<std::size_t>& subset,
                                     const ViewSet& views, const ForwardModel& model, const SolverConfig& cfg,
                                     ForwardKind kind = ForwardKind::LippmannSchwinger,
                                     WarmStartCache* cache = nullptr);

/// Value only of the same sum.
[[nodiscard]] double data_fidelity(const ScatteringPotential& f, const std::vector<std::size_t>& subset,
                                   const ViewSet& views, const ForwardModel& model, const SolverConfig& cfg,
                                   ForwardKind kind = ForwardKind::LippmannSchwinger);

/// Largest eigenvalue of sum_q w_q Re(J_B^* J_B) (Born Jacobians) by power iteration.
[[nodiscard]] double born_lipschitz(const ViewSet& views, const ForwardModel& model, std::size_t iterations,
                                    std::uint64_t seed);

[[nodiscard]] ReconResult fista(const ViewSet& views, const ReconConfig& cfg, const ForwardModel& model);

/// |recon - gt|^2 / |gt|^2; throws for a zero ground truth.
[[nodiscard]] double relative_error(const RealVolume& recon, const RealVolume& gt);

} // namespace odt
