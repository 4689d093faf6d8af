#include "odt/reconstruction.hpp"

#include "odt/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

namespace odt {

double View::weight() const {
    const double n2 = norm2(y_sc.values().span());
    return n2 > 0.0 ? 1.0 / n2 : 1.0;
}

void ReconConfig::validate(std::size_t view_count) const {
    if (view_count == 0) throw std::invalid_argument("ReconConfig: no views");
    if (subset_size > view_count) throw std::invalid_argument("ReconConfig: subset larger than the view count");
    if (!(step0 >= 0.0) || !std::isfinite(step0)) throw std::invalid_argument("ReconConfig: step0 must be >= 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("ReconConfig: tau must be >= 0");
    if (max_iterations < 1) throw std::invalid_argument("ReconConfig: max_iterations must be >= 1");
    if (stagnation_window < 1) throw std::invalid_argument("ReconConfig: stagnation_window must be >= 1");
    prox.validate();
    solver.validate();
}

SubsetSampler::SubsetSampler(std::size_t view_count, std::size_t subset_size, std::uint64_t seed)
    : count_(view_count), size_(subset_size == 0 ? view_count : subset_size), rng_(seed), order_(view_count),
      pos_(view_count) {
    if (view_count == 0) throw std::invalid_argument("SubsetSampler: no views");
    if (size_ > count_) throw std::invalid_argument("SubsetSampler: subset larger than the view count");
}

std::vector<std::size_t> SubsetSampler::next() {
    std::vector<std::size_t> out;
    out.reserve(size_);
    while (out.size() < size_) {
        if (pos_ == count_) {
            std::iota(order_.begin(), order_.end(), std::size_t{0});
            if (size_ < count_) std::shuffle(order_.begin(), order_.end(), rng_);
            // Indices already in this subset move to the back of the new epoch.
            std::stable_partition(order_.begin(), order_.end(), [&](std::size_t q) {
                return std::find(out.begin(), out.end(), q) == out.end();
            });
            pos_ = 0;
        }
        out.push_back(order_[pos_++]);
    }
    return out;
}

std::vector<std::size_t> select_subset(SubsetSampler& sampler) { return sampler.next(); }

namespace {

struct ViewTerm {
    RealVolume gradient;
    double fidelity = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

ViewTerm view_term(const ScatteringPotential& f, std::size_t q, const ViewSet& views, const ForwardModel& model,
                   const SolverConfig& base, ForwardKind kind, WarmStartCache* cache, bool with_gradient) {
    const View& view = views[q];
    const double w = view.weight();
    ViewTerm t;
    ComplexImage residual;
    ForwardState state{view.u_in, view.u_in, 0, 0.0, true};
    if (kind == ForwardKind::Born) {
        residual = born_forward_view(f, view.u_in, model).values();
    } else {
        SolverConfig cfg = base;
        if (cache && cache->total[q]) cfg.warm_start = ComplexField3D(*cache->total[q], f.geometry());
        ViewResult r = forward_view(f, view.u_in, model, cfg);
        t.iterations += r.state.iterations;
        t.converged = t.converged && r.state.converged;
        residual = r.y_sc.values();
        if (cache) cache->total[q] = r.state.total_field.values();
        state = std::move(r.state);
    }
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= view.y_sc.values()[i];
    t.fidelity = 0.5 * w * norm2(residual.span());
    if (!with_gradient) return t;
    for (auto& r : residual.span()) r *= w;
    if (kind == ForwardKind::Born) {
        t.gradient = born_adjoint_apply(view.u_in, model, residual);
    } else {
        const ComplexVolume* warm = cache && cache->adjoint[q] ? &*cache->adjoint[q] : nullptr;
        AdjointResult a = jacobian_adjoint_apply(f, state, model, residual, base, warm);
        t.iterations += a.iterations;
        t.converged = t.converged && a.converged;
        if (cache) cache->adjoint[q] = std::move(a.adjoint_solution);
        t.gradient = std::move(a.gradient);
    }
    return t;
}

// Evaluates the per-view terms in parallel; results are combined in subset order.
std::vector<ViewTerm> view_terms(const ScatteringPotential& f, const std::vector<std::size_t>& subset,
                                 const ViewSet& views, const ForwardModel& model, const SolverConfig& cfg,
                                 ForwardKind kind, WarmStartCache* cache, bool with_gradient) {
    for (std::size_t q : subset)
        if (q >= views.size()) throw std::out_of_range("data_grad: view index out of range");
    if (cache) {
        cache->total.resize(views.size());
        cache->adjoint.resize(views.size());
    }
    std::vector<ViewTerm> terms(subset.size());
    std::vector<std::exception_ptr> errors(subset.size());
    const long count = static_cast<long>(subset.size());
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
    for (long i = 0; i < count; ++i) {
        try {
            terms[static_cast<std::size_t>(i)] =
                view_term(f, subset[static_cast<std::size_t>(i)], views, model, cfg, kind, cache, with_gradient);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return terms;
}

} // namespace

DataGradient data_grad(const ScatteringPotential& f, const std::vector<std::size_t>& subset, const ViewSet& views,
                       const ForwardModel& model, const SolverConfig& cfg, ForwardKind kind, WarmStartCache* cache) {
    std::vector<ViewTerm> terms = view_terms(f, subset, views, model, cfg, kind, cache, true);
    DataGradient out;
    out.gradient = RealVolume(f.values().shape());
    for (const ViewTerm& t : terms) {
        for (std::size_t i = 0; i < out.gradient.size(); ++i) out.gradient[i] += t.gradient[i];
        out.fidelity += t.fidelity;
        out.solver_iterations += t.iterations;
        out.unconverged_solves += t.converged ? 0 : 1;
    }
    return out;
}

double data_fidelity(const ScatteringPotential& f, const std::vector<std::size_t>& subset, const ViewSet& views,
                     const ForwardModel& model, const SolverConfig& cfg, ForwardKind kind) {
    double total = 0.0;
    for (const ViewTerm& t : view_terms(f, subset, views, model, cfg, kind, nullptr, false)) total += t.fidelity;
    return total;
}

double born_lipschitz(const ViewSet& views, const ForwardModel& model, std::size_t iterations, std::uint64_t seed) {
    const Shape3 s = model.geometry().shape();
    RealVolume x(s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    for (auto& v : x.vector()) v = U(rng);
    double lambda = 0.0;
    for (std::size_t it = 0; it < std::max<std::size_t>(iterations, 1); ++it) {
        const double nx = std::sqrt(norm2(x.span()));
        if (nx == 0.0) return 0.0;
        for (auto& v : x.vector()) v /= nx;
        RealVolume y(s);
        for (const View& view : views) {
            ComplexVolume src(s);
            for (std::size_t i = 0; i < src.size(); ++i) src[i] = x[i] * view.u_in.values()[i];
            ComplexImage r = model.measure(src);
            const double w = view.weight();
            for (auto& v : r.span()) v *= w;
            const RealVolume g = born_adjoint_apply(view.u_in, model, r);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += g[i];
        }
        lambda = dot(x.span(), y.span());
        x = std::move(y);
    }
    return lambda;
}

double relative_error(const RealVolume& recon, const RealVolume& gt) {
    if (recon.shape() != gt.shape()) throw std::invalid_argument("relative_error: shape mismatch");
    const double g2 = norm2(gt.span());
    if (g2 == 0.0) throw std::invalid_argument("relative_error: zero ground truth");
    std::vector<double> d(gt.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = recon[i] - gt[i];
    return norm2(d) / g2;
}

namespace {

nlohmann::json to_json(const TraceRecord& r) {
    nlohmann::json j;
    j["iteration"] = r.iteration;
    j["fidelity"] = r.fidelity;
    j["objective"] = std::isfinite(r.objective) ? nlohmann::json(r.objective) : nlohmann::json(nullptr);
    j["step"] = r.step;
    j["relative_change"] = r.relative_change;
    j["solver_iterations"] = r.solver_iterations;
    j["unconverged_solves"] = r.unconverged_solves;
    j["prox_iterations"] = r.prox_iterations;
    j["subset"] = r.subset;
    return j;
}

bool finite(const RealVolume& v) {
    return std::all_of(v.span().begin(), v.span().end(), [](double x) { return std::isfinite(x); });
}

} // namespace

ReconResult fista(const ViewSet& views, const ReconConfig& cfg, const ForwardModel& model) {
    cfg.validate(views.size());
    const Geometry& geom = model.geometry();
    const Shape3 shape = geom.shape();
    for (const View& v : views)
        if (!v.u_in.geometry().same_grid(geom)) throw std::invalid_argument("fista: view geometry mismatch");

    std::ofstream trace_file;
    if (!cfg.trace_path.empty()) {
        trace_file.open(cfg.trace_path);
        if (!trace_file) throw std::runtime_error("fista: cannot open trace file " + cfg.trace_path);
    }

    const std::size_t subset_size = cfg.subset_size == 0 ? views.size() : cfg.subset_size;
    double step0 = cfg.step0;
    if (step0 == 0.0) {
        const double L = born_lipschitz(views, model, cfg.power_iterations, cfg.seed) *
                         static_cast<double>(subset_size) / static_cast<double>(views.size());
        if (!(L > 0.0) || !std::isfinite(L)) throw NumericalError("fista: could not estimate the step size");
        step0 = 1.0 / L;
    }

    RealVolume f_prev = cfg.initial ? *cfg.initial : RealVolume(shape);
    if (f_prev.shape() != shape) throw std::invalid_argument("fista: initial guess shape mismatch");
    RealVolume v = f_prev;
    double alpha = 1.0;
    SubsetSampler sampler(views.size(), subset_size, cfg.seed);
    WarmStartCache cache;
    std::vector<std::size_t> all(views.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    ReconResult result{ScatteringPotential(f_prev, geom), RealVolume(), {}, "max_iterations", step0};
    std::size_t stagnant = 0;

    for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
        TraceRecord rec;
        rec.iteration = k;
        rec.subset = select_subset(sampler);
        const RealVolume& point = cfg.gradient_point == GradientPoint::Extrapolated ? v : f_prev;
        DataGradient d;
        try {
            d = data_grad(ScatteringPotential(point, geom), rec.subset, views, model, cfg.solver, cfg.model, &cache);
        } catch (const NumericalError& e) {
            throw ReconAborted(e.what(), std::move(result.trace));
        }
        rec.fidelity = d.fidelity;
        rec.solver_iterations = d.solver_iterations;
        rec.unconverged_solves = d.unconverged_solves;
        const double gamma =
            cfg.schedule == StepSchedule::InverseSqrt ? step0 / std::sqrt(static_cast<double>(k)) : step0;
        rec.step = gamma;

        RealVolume z = v;
        for (std::size_t i = 0; i < z.size(); ++i) z[i] -= gamma * d.gradient[i];
        ProxConfig pc = cfg.prox;
        pc.weight = gamma * cfg.tau;
        ProxResult pr = prox(z, pc);
        rec.prox_iterations = pr.iterations;
        RealVolume f = std::move(pr.x);
        if (!std::isfinite(d.fidelity) || !finite(f)) {
            result.trace.push_back(rec);
            if (trace_file) trace_file << to_json(rec).dump() << '\n' << std::flush;
            throw ReconAborted("fista: non-finite iterate", std::move(result.trace));
        }

        const double alpha_next = cfg.accelerated ? 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * alpha * alpha)) : 1.0;
        const double momentum = (alpha - 1.0) / alpha_next;
        std::vector<double> diff(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            diff[i] = f[i] - f_prev[i];
            v[i] = f[i] + momentum * diff[i];
        }
        alpha = alpha_next;
        const double dn = std::sqrt(norm2(diff));
        const double fn = std::sqrt(norm2(f.span()));
        rec.relative_change = fn > 0.0 ? dn / fn : dn;

        if (cfg.compute_objective) {
            const ScatteringPotential fk(f, geom);
            rec.objective =
                data_fidelity(fk, all, views, model, cfg.solver, cfg.model) + cfg.tau * regularizer_value(f, cfg.prox);
        }
        result.trace.push_back(rec);
        if (trace_file) trace_file << to_json(rec).dump() << '\n' << std::flush;

        const bool zero_gradient =
            std::all_of(d.gradient.span().begin(), d.gradient.span().end(), [](double g) { return g == 0.0; });
        f_prev = std::move(f);
        if (dn == 0.0 && zero_gradient) {
            result.termination = "fixed_point";
            break;
        }
        stagnant = rec.relative_change < cfg.stagnation_tolerance ? stagnant + 1 : 0;
        if (stagnant >= cfg.stagnation_window) {
            result.termination = "stagnation";
            break;
        }
    }

    result.f = ScatteringPotential(f_prev, geom);
    result.ri = ri_from_potential(result.f);
    return result;
}

} // namespace odt
