#include "odt/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>

namespace odt::io {

using nlohmann::json;

namespace {

// Splits "12.5um" into its number and suffix.
std::pair<double, std::string> split_unit(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ConfigError("expected a number with a unit, got \"" + text + "\"");
    std::string unit(end);
    while (!unit.empty() && unit.front() == ' ') unit.erase(unit.begin());
    if (!std::isfinite(v)) throw ConfigError("non-finite quantity \"" + text + "\"");
    return {v, unit};
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Recursively overlays user values on the defaults; keys absent from the
// defaults are rejected. A null or array default accepts any value, which
// the typed parse checks afterwards.
void merge(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError(join(path, "") + ": expected an object");
    for (const auto& [key, value] : user.items()) {
        if (!base.contains(key)) throw ConfigError("unknown key \"" + join(path, key) + "\"");
        json& slot = base[key];
        if (slot.is_object() && !slot.empty())
            merge(slot, value, join(path, key));
        else
            slot = value;
    }
}

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where("") + ": expected an object");
    }
    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [key, value] : obj_.items()) {
            bool ok = false;
            for (const char* k : keys) ok = ok || key == k;
            if (!ok) throw ConfigError("unknown key \"" + where(key) + "\"");
        }
    }
    [[nodiscard]] const json& at(const std::string& key) const {
        if (!obj_.contains(key)) throw ConfigError("missing key \"" + where(key) + "\"");
        return obj_.at(key);
    }
    [[nodiscard]] bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
    [[nodiscard]] double number(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where(key) + ": must be finite");
        return d;
    }
    [[nodiscard]] std::size_t count(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(where(key) + ": expected a nonnegative integer");
        return v.get<std::size_t>();
    }
    [[nodiscard]] bool flag(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
        return v.get<bool>();
    }
    [[nodiscard]] std::string text(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
        return v.get<std::string>();
    }
    [[nodiscard]] double length(const std::string& key) const { return length_of(at(key), where(key)); }
    [[nodiscard]] double angle(const std::string& key) const {
        try {
            return parse_angle(text(key));
        } catch (const ConfigError& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }
    [[nodiscard]] Vec3 point(const std::string& key) const {
        const json& v = at(key);
        if (!v.is_array() || v.size() != 3) throw ConfigError(where(key) + ": expected three lengths");
        return {length_of(v[0], where(key)), length_of(v[1], where(key)), length_of(v[2], where(key))};
    }
    template <class E>
    [[nodiscard]] E choice(const std::string& key, std::initializer_list<std::pair<const char*, E>> options) const {
        const std::string s = text(key);
        std::string names;
        for (const auto& [name, value] : options) {
            if (s == name) return value;
            names += names.empty() ? name : std::string(", ") + name;
        }
        throw ConfigError(where(key) + ": \"" + s + "\" is not one of " + names);
    }
    [[nodiscard]] Reader sub(const std::string& key) const { return Reader(at(key), where(key)); }
    [[nodiscard]] std::string where(const std::string& key) const { return join(path_, key); }

private:
    static double length_of(const json& v, const std::string& where) {
        if (!v.is_string()) throw ConfigError(where + ": expected a length with a unit suffix");
        try {
            return parse_length(v.get<std::string>());
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }

    const json& obj_;
    std::string path_;
};

} // namespace

double parse_length(const std::string& text) {
    const auto [v, unit] = split_unit(text);
    if (unit == "m") return v;
    if (unit == "mm") return v * 1e-3;
    if (unit == "um" || unit == "\xC2\xB5m" || unit == "\xCE\xBCm") return v * 1e-6;
    if (unit == "nm") return v * 1e-9;
    throw ConfigError("unknown length unit in \"" + text + "\" (use m, mm, um, nm)");
}

double parse_angle(const std::string& text) {
    const auto [v, unit] = split_unit(text);
    if (unit == "deg") return v * std::numbers::pi / 180.0;
    if (unit == "rad") return v;
    throw ConfigError("unknown angle unit in \"" + text + "\" (use deg, rad)");
}

json default_document() {
    return json{
        {"geometry",
         {{"samples", json::array({32, 32, 32})},
          {"length", json::array({"2.128um", "2.128um", "2.128um"})},
          {"wavelength", "532nm"},
          {"background_index", 1.3388},
          {"detector", nullptr}}},
        {"sensor", {{"numerical_aperture", 1.0}, {"pupil", "disk"}, {"refocus", "0um"}, {"padding", 2}}},
        {"kernel", {{"type", "reduced"}, {"padding", 4}, {"precision", "double"}, {"cache_dir", ""}}},
        {"solver", {{"method", "bicgstab"}, {"tolerance", 1e-6}, {"max_iterations", 500}}},
        {"prox",
         {{"regularizer", "tv"},
          {"nonnegative", true},
          {"inner_iterations", 50},
          {"inner_tolerance", 1e-5},
          {"spacing", "grid"}}},
        {"recon",
         {{"tau", 0.0},
          {"step0", 0.0},
          {"subset_size", 0},
          {"max_iterations", 100},
          {"accelerated", true},
          {"gradient_point", "extrapolated"},
          {"schedule", "inverse_sqrt"},
          {"model", "ls"},
          {"stagnation_tolerance", 1e-6},
          {"stagnation_window", 5},
          {"compute_objective", false},
          {"power_iterations", 20}}},
        {"phantom",
         {{"kind", "bead"},
          {"antialias", false},
          {"spheres", json::array({json{{"center", json::array({"0um", "0um", "0um"})}, {"radius", "0.5um"}, {"ri", 1.36}}})},
          {"rbc",
           {{"center", json::array({"0um", "0um", "0um"})},
            {"diameter", "7.82um"},
            {"ri", 1.05},
            {"tilt", "0deg"},
            {"azimuth", "0deg"}}}}},
        {"simulation", {{"views", 40}, {"half_angle", "45deg"}, {"snr_db", nullptr}, {"incident", "analytic"}}},
        {"paths", {{"dataset", "dataset"}, {"ground_truth", ""}}},
        {"seed", 0},
    };
}

json apply_overrides(json doc, const std::vector<std::string>& overrides) {
    if (doc.is_null()) doc = json::object();
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("override \"" + o + "\" is not key=value");
        const std::string key = o.substr(0, eq);
        const std::string raw = o.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;

        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (part.empty()) throw ConfigError("override \"" + o + "\" has an empty key segment");
            const bool last = dot == std::string::npos;
            if (node->is_array()) {
                char* end = nullptr;
                const unsigned long i = std::strtoul(part.c_str(), &end, 10);
                if (*end != '\0' || i >= node->size())
                    throw ConfigError("override \"" + o + "\": bad array index \"" + part + "\"");
                node = &(*node)[i];
            } else {
                if (node->is_null()) *node = json::object();
                if (!node->is_object()) throw ConfigError("override \"" + o + "\": \"" + part + "\" is not a table");
                node = &(*node)[part];
            }
            if (last) break;
            start = dot + 1;
        }
        *node = value;
    }
    return doc;
}

RunConfig parse_run_config(const json& user) {
    json doc = default_document();
    merge(doc, user.is_null() ? json::object() : user, "");

    RunConfig c;
    const Reader root(doc, "");

    {
        const Reader g = root.sub("geometry");
        const json& s = g.at("samples");
        if (s.is_number_integer()) {
            const std::size_t n = g.count("samples");
            c.samples = {n, n, n};
        } else if (s.is_array() && s.size() == 3 && s[0].is_number_integer() && s[1].is_number_integer() &&
                   s[2].is_number_integer()) {
            c.samples = {s[0].get<std::size_t>(), s[1].get<std::size_t>(), s[2].get<std::size_t>()};
        } else {
            throw ConfigError("geometry.samples: expected an integer or three integers");
        }
        const json& l = g.at("length");
        if (l.is_string()) {
            const double L = g.length("length");
            c.lengths = {L, L, L};
        } else {
            const Vec3 v = g.point("length");
            c.lengths = {v[0], v[1], v[2]};
        }
        c.wavelength = g.length("wavelength");
        c.background_index = g.number("background_index");
        if (g.has("detector")) {
            const Reader d = g.sub("detector");
            d.allow({"samples", "pitch", "position"});
            c.detector = DetectorPlane{d.count("samples"), d.length("pitch"), d.length("position")};
        }
    }
    {
        const Reader s = root.sub("sensor");
        c.numerical_aperture = s.number("numerical_aperture");
        c.pupil = s.choice<PupilKind>("pupil", {{"disk", PupilKind::IdealDisk}, {"none", PupilKind::None}});
        c.refocus = s.length("refocus");
        c.sensor_padding = s.count("padding");
    }
    {
        const Reader k = root.sub("kernel");
        c.kernel.type = k.choice<KernelType>("type", {{"reduced", KernelType::Reduced}, {"spectral", KernelType::Spectral}});
        c.kernel.padding = static_cast<int>(k.count("padding"));
        c.kernel.precision =
            k.choice<Precision>("precision", {{"double", Precision::Double}, {"single", Precision::Single}});
        c.kernel.cache_dir = k.text("cache_dir");
    }
    {
        const Reader s = root.sub("solver");
        c.solver.method = s.choice<SolverMethod>("method", {{"bicgstab", SolverMethod::BiCGStab}, {"cgnr", SolverMethod::CGNormal}});
        c.solver.tolerance = s.number("tolerance");
        c.solver.max_iterations = s.count("max_iterations");
    }
    {
        const Reader p = root.sub("prox");
        ProxConfig& x = c.recon.prox;
        x.kind = p.choice<RegularizerKind>("regularizer", {{"tv", RegularizerKind::TV},
                                                          {"hessian_schatten", RegularizerKind::HessianSchatten},
                                                          {"none", RegularizerKind::None}});
        x.nonnegative = p.flag("nonnegative");
        x.inner_iterations = p.count("inner_iterations");
        x.inner_tolerance = p.number("inner_tolerance");
        x.spacing = p.text("spacing") == "grid" ? 1.0 : p.length("spacing");
    }
    {
        const Reader r = root.sub("recon");
        ReconConfig& x = c.recon;
        x.tau = r.number("tau");
        x.step0 = r.number("step0");
        x.subset_size = r.count("subset_size");
        x.max_iterations = r.count("max_iterations");
        x.accelerated = r.flag("accelerated");
        x.gradient_point = r.choice<GradientPoint>(
            "gradient_point", {{"extrapolated", GradientPoint::Extrapolated}, {"latest", GradientPoint::LatestIterate}});
        x.schedule = r.choice<StepSchedule>("schedule",
                                            {{"inverse_sqrt", StepSchedule::InverseSqrt}, {"constant", StepSchedule::Constant}});
        x.model = r.choice<ForwardKind>("model", {{"ls", ForwardKind::LippmannSchwinger}, {"born", ForwardKind::Born}});
        x.stagnation_tolerance = r.number("stagnation_tolerance");
        x.stagnation_window = r.count("stagnation_window");
        x.compute_objective = r.flag("compute_objective");
        x.power_iterations = r.count("power_iterations");
    }
    {
        const Reader p = root.sub("phantom");
        c.phantom.kind = p.choice<PhantomKind>("kind", {{"bead", PhantomKind::Bead},
                                                        {"multi_bead", PhantomKind::MultiBead},
                                                        {"rbc", PhantomKind::RbcLike},
                                                        {"empty", PhantomKind::Empty}});
        c.phantom.antialias = p.flag("antialias");
        const json& spheres = p.at("spheres");
        if (!spheres.is_array()) throw ConfigError("phantom.spheres: expected a list");
        for (std::size_t i = 0; i < spheres.size(); ++i) {
            const Reader s(spheres[i], "phantom.spheres." + std::to_string(i));
            s.allow({"center", "radius", "ri"});
            c.phantom.spheres.push_back(SphereSpec{s.point("center"), s.length("radius"), s.number("ri")});
        }
        const Reader b = p.sub("rbc");
        c.phantom.rbc = RbcSpec{b.point("center"), b.length("diameter"), b.number("ri"), b.angle("tilt"), b.angle("azimuth")};
    }
    {
        const Reader s = root.sub("simulation");
        c.simulation.views = s.count("views");
        c.simulation.half_angle = s.angle("half_angle");
        if (s.has("snr_db")) c.simulation.snr_db = s.number("snr_db");
        c.simulation.incident = s.choice<IncidentStorage>(
            "incident", {{"analytic", IncidentStorage::Analytic}, {"propagated", IncidentStorage::Propagated}});
    }
    {
        const Reader p = root.sub("paths");
        c.dataset = p.text("dataset");
        c.ground_truth = p.text("ground_truth");
    }
    c.seed = root.count("seed");

    // Fail early on inconsistent physics rather than deep inside a run.
    try {
        (void)c.geometry();
        c.sensor().validate();
        c.solver.validate();
        c.recon.prox.validate();
    } catch (const std::logic_error& e) {
        throw ConfigError(e.what());
    }
    if (c.kernel.padding < 2 || c.kernel.padding % 2 != 0) throw ConfigError("kernel.padding must be even and >= 2");
    if (c.simulation.half_angle < 0.0 || c.simulation.half_angle >= std::numbers::pi / 2)
        throw ConfigError("simulation.half_angle must lie in [0, 90) degrees");
    c.document = std::move(doc);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path.string());
        doc = json::parse(in, nullptr, false, true);
        if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    }
    // Overrides act on the resolved document so list entries from the
    // defaults (phantom.spheres.0...) can be addressed.
    json resolved = default_document();
    merge(resolved, doc, "");
    return parse_run_config(apply_overrides(std::move(resolved), overrides));
}

Geometry RunConfig::geometry() const {
    if (detector) return Geometry(samples, lengths, wavelength, background_index, *detector);
    return Geometry(samples, lengths, wavelength, background_index);
}

SensorModel RunConfig::sensor() const {
    SensorModel s;
    s.numerical_aperture = numerical_aperture;
    s.wavelength = wavelength;
    s.background_index = background_index;
    s.refocus = refocus;
    s.pupil = pupil;
    s.padding = sensor_padding;
    return s;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(document.dump()); }

} // namespace odt::io
