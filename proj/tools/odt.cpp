// Command-line front end: phantoms, simulated datasets, forward solves,
// incident-field propagation, reconstruction, tau sweeps, Mie references,
// metrics and slice export.

#include "odt/forward.hpp"
#include "odt/incident.hpp"
#include "odt/io.hpp"
#include "odt/oracle.hpp"
#include "odt/parallel.hpp"
#include "odt/reconstruction.hpp"
#include "odt/run_config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#ifndef ODT_VERSION
#define ODT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace odt;
using io::RunConfig;

namespace {

int verbosity = 0;

template <class... Args>
void log(int level, const char* fmt, Args... args) {
    if (verbosity < level) return;
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

struct Options {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    int threads = 0;
};

std::string view_name(std::size_t q, const char* what) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "view_%03zu_%s.odtv", q, what);
    return buf;
}

fs::path out_dir(const Options& o, const std::string& fallback = ".") {
    fs::path p = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
    fs::create_directories(p);
    return p;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw io::IoError(io::ErrorCode::Io, "cannot write " + path.string());
    f << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw io::IoError(io::ErrorCode::Io, "cannot open " + path.string());
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded()) throw io::ConfigError(path.string() + " is not valid JSON");
    return j;
}

json run_manifest(const RunConfig& c, const std::string& command) {
    return json{{"command", command}, {"version", ODT_VERSION}, {"config_hash", c.hash()}, {"seed", c.seed},
                {"config", c.document}};
}

ConvolutionKernel make_kernel(const RunConfig& c, const Geometry& g) {
    fs::path cached;
    if (!c.kernel.cache_dir.empty()) {
        fs::create_directories(c.kernel.cache_dir);
        cached = fs::path(c.kernel.cache_dir) / io::kernel_cache_name(g, c.kernel.padding, c.kernel.precision);
        if (fs::exists(cached)) {
            try {
                log(1, "kernel: loading %s", cached.string().c_str());
                return io::load_kernel(cached, g, c.kernel.padding);
            } catch (const io::IoError& e) {
                log(0, "kernel cache unusable (%s), rebuilding", e.what());
            }
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    ConvolutionKernel k = c.kernel.type == io::KernelType::Reduced ? ConvolutionKernel(ReducedKernel::build(g, c.kernel.padding))
                                                                  : ConvolutionKernel(SpectralKernel::build(g, c.kernel.padding));
    log(1, "kernel: built in %.2f s",
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!cached.empty()) io::save_kernel(cached, k);
    return k;
}

std::array<double, 3> lengths_of(const Geometry& g) { return g.lengths(); }

Vec3 to_vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw io::ConfigError("manifest: k_in must have three entries");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// --- phantom -----------------------------------------------------------------

int cmd_phantom(const RunConfig& c, const Options& o) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o);
    const RealVolume ri = make_phantom(c.phantom, g);
    const ScatteringPotential f = potential_from_ri(ri, g);
    io::write_volume(dir / "phantom_ri.odtv", ri, lengths_of(g));
    io::write_volume(dir / "phantom_f.odtv", f.values(), lengths_of(g));
    write_json(dir / "run_manifest.json", run_manifest(c, "phantom"));
    std::printf("phantom: %zux%zux%zu, max ri %.6g, boundary contact %s\n", g.shape().nx, g.shape().ny,
                g.shape().nz, *std::max_element(ri.span().begin(), ri.span().end()),
                f.touches_boundary() ? "yes" : "no");
    return 0;
}

// --- simulate ----------------------------------------------------------------

void add_noise(ComplexImage& y, double snr_db, std::mt19937_64& rng) {
    const double power = norm2(y.span()) / static_cast<double>(y.size());
    if (power == 0.0) return;
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);
    std::normal_distribution<double> n(0.0, sigma);
    for (cplx& v : y.span()) {
        const double re = n(rng);
        const double im = n(rng);
        v += cplx(re, im);
    }
}

int cmd_simulate(const RunConfig& c, const Options& o) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o, c.dataset);
    const RealVolume ri = make_phantom(c.phantom, g);
    const ScatteringPotential f = potential_from_ri(ri, g);
    const ConvolutionKernel kernel = make_kernel(c, g);
    const ForwardModel model(kernel, c.sensor(), c.kernel.precision);
    const std::vector<Vec3> ks = cone_views(c.simulation.views, c.simulation.half_angle, g.wavenumber());
    std::mt19937_64 rng(c.seed);

    io::write_volume(dir / "ground_truth_ri.odtv", ri, lengths_of(g));
    json views = json::array();
    for (std::size_t q = 0; q < ks.size(); ++q) {
        try {
            const ComplexField3D u_in = plane_wave(ks[q], g);
            ViewResult r = forward_view(f, u_in, model, c.solver);
            if (!r.state.converged)
                log(0, "view %zu: solver stopped at residual %.3g after %zu iterations", q, r.state.residual,
                    r.state.iterations);
            ComplexImage y = r.y_sc.values();
            if (c.simulation.snr_db) add_noise(y, *c.simulation.snr_db, rng);
            io::write_image(dir / view_name(q, "ysc"), y, g.detector().pitch);
            json v{{"index", q}, {"k_in", {ks[q][0], ks[q][1], ks[q][2]}}, {"y_sc", view_name(q, "ysc")},
                   {"solver_iterations", r.state.iterations}, {"residual", r.state.residual}};
            if (c.simulation.incident == io::IncidentStorage::Propagated) {
                io::write_image(dir / view_name(q, "yin"), plane_wave_on_detector(ks[q], g).values(),
                                g.detector().pitch);
                v["y_in"] = view_name(q, "yin");
            }
            views.push_back(v);
            log(1, "view %zu: %zu iterations, residual %.3g", q, r.state.iterations, r.state.residual);
        } catch (const NumericalError& e) {
            throw NumericalError("view " + std::to_string(q) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("view " + std::to_string(q) + ": " + e.what());
        }
    }
    json m = run_manifest(c, "simulate");
    m["format"] = "odt-dataset";
    m["ground_truth"] = "ground_truth_ri.odtv";
    m["detector"] = {{"samples", g.detector().m}, {"pitch", g.detector().pitch}, {"position", g.detector().position}};
    m["views"] = views;
    write_json(dir / "manifest.json", m);
    std::printf("simulate: %zu views written to %s\n", ks.size(), dir.string().c_str());
    return 0;
}

// --- dataset loading -------------------------------------------------------------

struct Dataset {
    fs::path dir;
    json manifest;
    ViewSet views;
    std::vector<Vec3> k_in;
};

Dataset load_dataset(const fs::path& dir, const RunConfig& c, const Geometry& g) {
    Dataset d;
    d.dir = dir;
    d.manifest = read_json(dir / "manifest.json");
    if (!d.manifest.contains("config") || !d.manifest.contains("views"))
        throw io::ConfigError("manifest.json lacks config or views");
    const Geometry dg = io::parse_run_config(d.manifest["config"]).geometry();
    if (!(dg == g)) throw io::ConfigError("dataset geometry does not match the configuration");
    for (const json& v : d.manifest["views"]) {
        const Vec3 k = to_vec3(v.at("k_in"));
        ComplexImage y = io::read_image(dir / v.at("y_sc").get<std::string>());
        if (y.nx() != g.detector().m || y.ny() != g.detector().m)
            throw io::ConfigError("view data size does not match the detector");
        ComplexField2D y_sc(std::move(y), g.detector().pitch, g.detector().position);
        if (v.contains("y_in")) {
            ComplexField2D y_in(io::read_image(dir / v.at("y_in").get<std::string>()), g.detector().pitch,
                                g.detector().position);
            const TiltedWaveSpec tilt = estimate_tilt(y_in, g.wavenumber());
            IncidentVolume inc = propagate_tilt_transfer(y_in, tilt, g);
            d.views.push_back(View{std::move(inc.u_in), std::move(y_sc), tilt});
        } else {
            d.views.push_back(View{plane_wave(k, g), std::move(y_sc), TiltedWaveSpec{{k[0], k[1]}}});
        }
        d.k_in.push_back(k);
    }
    (void)c;
    if (d.views.empty()) throw io::ConfigError("dataset has no views");
    return d;
}

fs::path dataset_dir(const RunConfig& c, const std::string& flag) { return flag.empty() ? fs::path(c.dataset) : fs::path(flag); }

std::optional<RealVolume> ground_truth(const RunConfig& c, const Dataset& d) {
    fs::path p;
    if (!c.ground_truth.empty())
        p = c.ground_truth;
    else if (d.manifest.contains("ground_truth"))
        p = d.dir / d.manifest["ground_truth"].get<std::string>();
    if (p.empty() || !fs::exists(p)) return std::nullopt;
    return io::read_real_volume(p);
}

// --- reconstruct / sweep-tau ---------------------------------------------------

int cmd_reconstruct(const RunConfig& c, const Options& o, const std::string& data) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o, "recon");
    const Dataset d = load_dataset(dataset_dir(c, data), c, g);
    const ConvolutionKernel kernel = make_kernel(c, g);
    const ForwardModel model(kernel, c.sensor(), c.kernel.precision);

    ReconConfig rc = c.recon;
    rc.seed = c.seed;
    rc.trace_path = (dir / "trace.jsonl").string();
    const auto t0 = std::chrono::steady_clock::now();
    const ReconResult r = fista(d.views, rc, model);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    io::write_volume(dir / "f.odtv", r.f.values(), lengths_of(g));
    io::write_volume(dir / "ri.odtv", r.ri, lengths_of(g));
    json metrics{{"iterations", r.trace.size()},
                 {"termination", r.termination},
                 {"step0", r.step0},
                 {"final_fidelity", r.trace.empty() ? 0.0 : r.trace.back().fidelity},
                 {"seconds", seconds}};
    if (const auto gt = ground_truth(c, d)) metrics["relative_error"] = relative_error(r.ri, *gt);
    write_json(dir / "metrics.json", metrics);
    json m = run_manifest(c, "reconstruct");
    m["dataset"] = d.dir.string();
    write_json(dir / "run_manifest.json", m);
    std::printf("reconstruct: %zu iterations (%s)", r.trace.size(), r.termination.c_str());
    if (metrics.contains("relative_error")) std::printf(", relative error %.6g", metrics["relative_error"].get<double>());
    std::printf("\n");
    return 0;
}

int cmd_sweep(const RunConfig& c, const Options& o, const std::string& data, std::vector<double> taus) {
    if (taus.empty()) throw io::ConfigError("sweep-tau: empty tau list");
    std::sort(taus.begin(), taus.end());
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o, "sweep");
    const Dataset d = load_dataset(dataset_dir(c, data), c, g);
    const auto gt = ground_truth(c, d);
    const ConvolutionKernel kernel = make_kernel(c, g);
    const ForwardModel model(kernel, c.sensor(), c.kernel.precision);
    std::vector<std::size_t> all(d.views.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw io::IoError(io::ErrorCode::Io, "cannot write sweep.csv");
    csv << "tau,relative_error,fidelity\n";
    for (double tau : taus) {
        ReconConfig rc = c.recon;
        rc.seed = c.seed;
        rc.tau = tau;
        const ReconResult r = fista(d.views, rc, model);
        const double fid = data_fidelity(r.f, all, d.views, model, c.solver, rc.model);
        char line[128];
        if (gt)
            std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g", tau, relative_error(r.ri, *gt), fid);
        else
            std::snprintf(line, sizeof line, "%.9g,,%.9g", tau, fid);
        csv << line << '\n';
        std::printf("%s\n", line);
    }
    json m = run_manifest(c, "sweep-tau");
    m["taus"] = taus;
    write_json(dir / "run_manifest.json", m);
    return 0;
}

// --- forward / propagate / mie ---------------------------------------------------

Vec3 config_view(const RunConfig& c, const Geometry& g, std::size_t view) {
    const auto ks = cone_views(c.simulation.views, c.simulation.half_angle, g.wavenumber());
    if (view >= ks.size()) throw io::ConfigError("view index out of range");
    return ks[view];
}

int cmd_forward(const RunConfig& c, const Options& o, std::size_t view, bool born) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o);
    const ScatteringPotential f = potential_from_ri(make_phantom(c.phantom, g), g);
    const ConvolutionKernel kernel = make_kernel(c, g);
    const ForwardModel model(kernel, c.sensor(), c.kernel.precision);
    const ComplexField3D u_in = plane_wave(config_view(c, g, view), g);
    if (born) {
        io::write_image(dir / "y_sc.odtv", born_forward_view(f, u_in, model).values(), g.detector().pitch);
        std::printf("forward (Born): done\n");
    } else {
        const ViewResult r = forward_view(f, u_in, model, c.solver);
        io::write_volume(dir / "total_field.odtv", r.state.total_field.values(), lengths_of(g));
        io::write_image(dir / "y_sc.odtv", r.y_sc.values(), g.detector().pitch);
        std::printf("forward: %zu iterations, residual %.3g%s\n", r.state.iterations, r.state.residual,
                    r.state.converged ? "" : " (not converged)");
    }
    write_json(dir / "run_manifest.json", run_manifest(c, "forward"));
    return 0;
}

int cmd_propagate(const RunConfig& c, const Options& o, const std::string& data, std::size_t view, bool naive) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o);
    Vec3 k{};
    ComplexImage y;
    if (!data.empty()) {
        const json m = read_json(fs::path(data) / "manifest.json");
        const json& views = m.at("views");
        if (view >= views.size()) throw io::ConfigError("view index out of range");
        k = to_vec3(views[view].at("k_in"));
        y = views[view].contains("y_in") ? io::read_image(fs::path(data) / views[view]["y_in"].get<std::string>())
                                         : plane_wave_on_detector(k, g).values();
    } else {
        k = config_view(c, g, view);
        y = plane_wave_on_detector(k, g).values();
    }
    const ComplexField2D y_in(std::move(y), g.detector().pitch, g.detector().position);
    const TiltedWaveSpec tilt = estimate_tilt(y_in, g.wavenumber());
    PropagationOptions po;
    po.tilt_transfer = !naive;
    const IncidentVolume inc = propagate_tilt_transfer(y_in, tilt, g, po);
    const ComplexField3D exact = plane_wave(k, g);
    std::vector<cplx> diff(exact.values().size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = inc.u_in.values()[i] - exact.values()[i];
    const double err = std::sqrt(norm2(diff) / norm2(exact.values().span()));
    io::write_volume(dir / view_name(view, "uin"), inc.u_in.values(), lengths_of(g));
    write_json(dir / "run_manifest.json", run_manifest(c, "propagate"));
    std::printf("propagate: tilt (%.6g, %.6g) rad/m, relative L2 error vs plane wave %.3e\n", tilt.k_tilt[0],
                tilt.k_tilt[1], err);
    return 0;
}

int cmd_mie(const RunConfig& c, const Options& o, std::size_t view) {
    const Geometry g = c.geometry();
    const fs::path dir = out_dir(o);
    if (c.phantom.spheres.empty()) throw io::ConfigError("mie: phantom.spheres is empty");
    const SphereSpec& s = c.phantom.spheres.front();
    const BeadSpec bead{s.center, 2.0 * s.radius, s.ri, g.background_index(), g.wavelength()};
    const ComplexField3D u = mie_total_field(bead, config_view(c, g, view), g);
    io::write_volume(dir / "mie_total.odtv", u.values(), lengths_of(g));
    write_json(dir / "run_manifest.json", run_manifest(c, "mie"));
    std::printf("mie: size parameter %.4g, %d orders\n", g.wavenumber() * s.radius,
                mie_order(g.wavenumber() * s.radius));
    return 0;
}

// --- metrics / export ---------------------------------------------------------

int cmd_metrics(const Options& o, const std::string& recon, const std::string& truth) {
    const RealVolume r = io::read_real_volume(recon);
    const RealVolume t = io::read_real_volume(truth);
    const double e = relative_error(r, t);
    const fs::path dir = out_dir(o);
    write_json(dir / "metrics.json", json{{"recon", recon}, {"truth", truth}, {"relative_error", e}});
    std::printf("relative error %.9g\n", e);
    return 0;
}

int cmd_export(const Options& o, const std::string& input, io::SliceOptions so, const std::string& file,
               const std::vector<double>& window, bool index_given) {
    if (window.size() == 2) {
        so.window_min = window[0];
        so.window_max = window[1];
    } else if (!window.empty()) {
        throw io::ConfigError("--window takes two values");
    }
    const io::VolumeHeader h = io::read_header(input);
    if (!index_given) so.index = h.dims[static_cast<std::size_t>(so.axis)] / 2 - (h.dims[static_cast<std::size_t>(so.axis)] > 1 ? 1 : 0);
    fs::path target = file;
    if (target.empty())
        target = out_dir(o) / (fs::path(input).stem().string() + (so.format == io::SliceFormat::Csv ? ".csv" : ".pgm"));
    if (h.dtype == io::Dtype::C64 || h.dtype == io::Dtype::C128)
        io::export_slice(target, io::read_complex_volume(input), so);
    else
        io::export_slice(target, io::read_real_volume(input), so);
    std::printf("export: %s\n", target.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical diffraction tomography: Lippmann-Schwinger forward model and reconstruction"};
    app.set_version_flag("--version", ODT_VERSION);
    app.require_subcommand(1, 1);
    app.fallthrough();

    Options opt;
    app.add_option("-c,--config", opt.config, "JSON run configuration");
    app.add_option("-s,--set", opt.overrides, "Override a configuration key, e.g. recon.tau=1e-3");
    app.add_option("-o,--out", opt.out, "Output directory");
    app.add_flag("-v,--verbose", verbosity, "More log output (repeatable)");
    app.add_option("-t,--threads", opt.threads, "Thread count (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto* phantom = app.add_subcommand("phantom", "Write the configured phantom (refractive index and potential)");
    auto* simulate = app.add_subcommand("simulate", "Simulate a dataset of tilted plane-wave views");
    auto* propagate = app.add_subcommand("propagate", "Propagate a detector-plane incident field into the volume");
    auto* forward = app.add_subcommand("forward", "Solve the forward problem for one view");
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct from a dataset");
    auto* sweep = app.add_subcommand("sweep-tau", "Reconstruct for a list of regularization weights");
    auto* mie = app.add_subcommand("mie", "Mie total field of the first configured sphere");
    auto* metrics = app.add_subcommand("metrics", "Relative error between two refractive-index volumes");
    auto* exporter = app.add_subcommand("export", "Export a volume slice as CSV or PGM");

    std::string data;
    std::size_t view = 0;
    bool born = false, naive = false;
    std::vector<double> taus;
    for (auto* s : {reconstruct, sweep, propagate}) s->add_option("-d,--dataset", data, "Dataset directory");
    for (auto* s : {forward, propagate, mie}) s->add_option("--view", view, "View index in the illumination cone");
    forward->add_flag("--born", born, "First Born approximation instead of the full model");
    propagate->add_flag("--naive", naive, "Zero-padded transform of the raw field instead of tilt transfer");
    sweep->add_option("--taus", taus, "Comma-separated tau values")->delimiter(',')->required();

    std::string recon_path, truth_path;
    metrics->add_option("recon", recon_path, "Reconstructed refractive index (ODTV)")->required();
    metrics->add_option("truth", truth_path, "Ground-truth refractive index (ODTV)")->required();

    std::string input, file, format = "csv", part = "abs";
    std::vector<double> window;
    io::SliceOptions so;
    exporter->add_option("input", input, "ODTV volume")->required();
    exporter->add_option("--axis", so.axis, "Axis held fixed (0, 1, 2)")->check(CLI::Range(0, 2));
    auto* index_opt = exporter->add_option("--index", so.index, "Slice index (default: center)");
    exporter->add_option("--format", format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
    exporter->add_option("--window", window, "min,max mapped to 0..255 (pgm)")->delimiter(',');
    exporter->add_option("--part", part, "abs, real, imag or phase (complex volumes)")
        ->check(CLI::IsMember({"abs", "real", "imag", "phase"}));
    exporter->add_option("--file", file, "Output file (default: <out>/<input stem>.<ext>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_num_threads(opt.threads);
        if (exporter->parsed()) {
            so.format = format == "pgm" ? io::SliceFormat::Pgm : io::SliceFormat::Csv;
            so.part = part == "real"    ? io::ComplexPart::Real
                      : part == "imag"  ? io::ComplexPart::Imag
                      : part == "phase" ? io::ComplexPart::Phase
                                        : io::ComplexPart::Abs;
            return cmd_export(opt, input, so, file, window, index_opt->count() > 0);
        }
        if (metrics->parsed()) return cmd_metrics(opt, recon_path, truth_path);

        const RunConfig c = io::load_run_config(opt.config, opt.overrides);
        log(1, "config hash %s", c.hash().c_str());
        if (phantom->parsed()) return cmd_phantom(c, opt);
        if (simulate->parsed()) return cmd_simulate(c, opt);
        if (propagate->parsed()) return cmd_propagate(c, opt, data, view, naive);
        if (forward->parsed()) return cmd_forward(c, opt, view, born);
        if (reconstruct->parsed()) return cmd_reconstruct(c, opt, data);
        if (sweep->parsed()) return cmd_sweep(c, opt, data, taus);
        if (mie->parsed()) return cmd_mie(c, opt, view);
    } catch (const io::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const io::IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
