#pragma once

// Run configuration: a strict JSON document. Unknown keys are errors and
// every physical quantity is a string with a unit suffix, e.g. "532nm",
// "6.4um", "45deg". See README.md for the full schema.

#include "odt/forward.hpp"
#include "odt/green_kernel.hpp"
#include "odt/oracle.hpp"
#include "odt/reconstruction.hpp"
#include "odt/sensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace odt::io {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "12.5um" -> 1.25e-5. Accepted suffixes: m, mm, um, µm, nm.
[[nodiscard]] double parse_length(const std::string& text);
/// "45deg" or "0.3rad" -> radians.
[[nodiscard]] double parse_angle(const std::string& text);

enum class KernelType { Reduced, Spectral };

struct KernelConfig {
    KernelType type = KernelType::Reduced;
    int padding = 4;
    Precision precision = Precision::Double;
    std::string cache_dir; // empty = no cache
};

enum class IncidentStorage { Analytic, Propagated };

struct SimulationConfig {
    std::size_t views = 40;
    double half_angle = 0.7853981633974483; // radians
    std::optional<double> snr_db;           // complex Gaussian noise; none by default
    IncidentStorage incident = IncidentStorage::Analytic;
};

struct RunConfig {
    Shape3 samples{32, 32, 32};
    std::array<double, 3> lengths{2.128e-6, 2.128e-6, 2.128e-6};
    double wavelength = 532e-9;
    double background_index = 1.3388;
    std::optional<DetectorPlane> detector; // default: m = max(nx, ny), pitch h, at z = L_z

    double numerical_aperture = 1.0;
    PupilKind pupil = PupilKind::IdealDisk;
    double refocus = 0.0;
    std::size_t sensor_padding = 2;

    KernelConfig kernel;
    SolverConfig solver;
    ReconConfig recon; // recon.prox holds the regularizer settings
    PhantomSpec phantom;
    SimulationConfig simulation;

    std::string dataset = "dataset";
    std::string ground_truth; // ODTV refractive index; empty = none
    std::uint64_t seed = 0;

    /// The resolved document (defaults filled in), as hashed and stored in manifests.
    nlohmann::json document;

    [[nodiscard]] Geometry geometry() const;
    [[nodiscard]] SensorModel sensor() const;
    /// FNV-1a 64-bit hash of the resolved document, as 16 hex digits.
    [[nodiscard]] std::string hash() const;
};

/// Document holding every key at its default value.
[[nodiscard]] nlohmann::json default_document();

/// Applies "a.b.c=value" overrides. The value is read as JSON when it parses,
/// otherwise as a string. Paths must name existing keys.
[[nodiscard]] nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides);

/// Strict parse; missing keys take their defaults. Throws ConfigError.
[[nodiscard]] RunConfig parse_run_config(const nlohmann::json& doc);

/// Reads the file (empty path = defaults only), applies overrides, parses.
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides = {});

[[nodiscard]] std::string fnv1a_hex(const std::string& bytes);

} // namespace odt::io
