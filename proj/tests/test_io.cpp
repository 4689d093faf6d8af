#include "odt/io.hpp"
#include "odt/run_config.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace odt;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("odt_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

std::vector<char> bytes_of(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void put_bytes(const fs::path& p, const std::vector<char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

io::ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const io::IoError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no IoError thrown";
    return io::ErrorCode::Io;
}

} // namespace

using VolumeFile = TempDir;
using Export = TempDir;

TEST_F(VolumeFile, ComplexRoundTripIsBitwise) {
    const ComplexVolume v = odt::testing::random_complex({6, 4, 2}, 1);
    io::write_volume(dir / "c.odtv", v, {1e-6, 2e-6, 3e-6});
    io::VolumeHeader h;
    EXPECT_EQ(io::read_complex_volume(dir / "c.odtv", &h), v);
    EXPECT_EQ(h.dtype, io::Dtype::C128);
    EXPECT_EQ(h.dims, (std::array<std::uint32_t, 3>{6, 4, 2}));
    EXPECT_EQ(h.lengths[2], 3e-6);
    EXPECT_EQ(h.axial_axis, 2);
    EXPECT_EQ(fs::file_size(dir / "c.odtv"), io::kHeaderSize + 48 * 16 + 4);
}

TEST_F(VolumeFile, HeaderBytesAreLittleEndian) {
    io::write_volume(dir / "r.odtv", RealVolume({2, 2, 2}, 1.0), {1.0, 1.0, 1.0});
    const auto b = bytes_of(dir / "r.odtv");
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "ODTV");
    EXPECT_EQ(b[4], 1);
    EXPECT_EQ(b[5], 0);
    EXPECT_EQ(b[6], 2); // f64
    EXPECT_EQ(b[8], 2);
    // 1.0 = 0x3FF0000000000000
    EXPECT_EQ(static_cast<unsigned char>(b[48 + 7]), 0x3F);
    EXPECT_EQ(static_cast<unsigned char>(b[48 + 6]), 0xF0);
}

TEST_F(VolumeFile, FloatPayloadWidensExactly) {
    RealVolume v = odt::testing::random_real({4, 4, 4}, 2);
    io::write_volume(dir / "f.odtv", v, {1, 1, 1}, io::Dtype::F32);
    const RealVolume w = io::read_real_volume(dir / "f.odtv");
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(w[i], static_cast<double>(static_cast<float>(v[i])));
    const ComplexVolume c = odt::testing::random_complex({2, 2, 2}, 3);
    io::write_volume(dir / "c.odtv", c, {1, 1, 1}, io::Dtype::C64);
    const ComplexVolume d = io::read_complex_volume(dir / "c.odtv");
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(d[i].real(), static_cast<double>(static_cast<float>(c[i].real())));
        EXPECT_EQ(d[i].imag(), static_cast<double>(static_cast<float>(c[i].imag())));
    }
}

TEST_F(VolumeFile, DistinctErrorCodes) {
    io::write_volume(dir / "ok.odtv", odt::testing::random_real({4, 4, 4}, 4), {1, 1, 1});
    const auto good = bytes_of(dir / "ok.odtv");

    auto corrupt = good;
    corrupt[100] ^= 0x01;
    put_bytes(dir / "crc.odtv", corrupt);
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "crc.odtv"); }), io::ErrorCode::CrcMismatch);

    auto magic = good;
    magic[0] = 'X';
    put_bytes(dir / "magic.odtv", magic);
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "magic.odtv"); }), io::ErrorCode::BadMagic);

    auto version = good;
    version[4] = 2;
    put_bytes(dir / "version.odtv", version);
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "version.odtv"); }), io::ErrorCode::VersionMismatch);

    auto dtype = good;
    dtype[6] = 9;
    put_bytes(dir / "dtype.odtv", dtype);
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "dtype.odtv"); }), io::ErrorCode::UnsupportedDtype);

    put_bytes(dir / "short.odtv", std::vector<char>(good.begin(), good.end() - 10));
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "short.odtv"); }), io::ErrorCode::Truncated);
    put_bytes(dir / "tiny.odtv", std::vector<char>(good.begin(), good.begin() + 20));
    EXPECT_EQ(code_of([&] { (void)io::read_header(dir / "tiny.odtv"); }), io::ErrorCode::Truncated);

    EXPECT_EQ(code_of([&] { (void)io::read_complex_volume(dir / "ok.odtv"); }), io::ErrorCode::DtypeMismatch);
    EXPECT_EQ(code_of([&] { (void)io::read_real_volume(dir / "missing.odtv"); }), io::ErrorCode::Io);
}

TEST_F(VolumeFile, ImagesUseSingletonAxis) {
    const ComplexImage img = odt::testing::random_image(6, 5);
    io::write_image(dir / "i.odtv", img, 1e-7);
    io::VolumeHeader h;
    EXPECT_EQ(io::read_image(dir / "i.odtv", &h), img);
    EXPECT_EQ(h.dims[2], 1u);
    EXPECT_DOUBLE_EQ(h.lengths[0], 6e-7);
}

TEST_F(VolumeFile, KernelCacheRoundTrip) {
    const Geometry g = odt::testing::small_geometry(4);
    const ReducedKernel k = ReducedKernel::build(g, 4);
    const fs::path p = dir / io::kernel_cache_name(g, 4, Precision::Double);
    io::save_kernel(p, k);
    const ConvolutionKernel back = io::load_kernel(p, g, 4);
    EXPECT_EQ(back.spectrum(), k.spectrum());
    EXPECT_EQ(back.padded_shape(), k.padded_shape());
    EXPECT_THROW((void)io::load_kernel(p, odt::testing::small_geometry(4, 532e-9 / 9), 4), io::IoError);
    EXPECT_NE(io::kernel_cache_name(g, 4, Precision::Double), io::kernel_cache_name(g, 8, Precision::Double));
}

TEST_F(Export, CsvRoundTripsNineDigits) {
    const RealVolume v = odt::testing::random_real({3, 4, 5}, 6);
    io::SliceOptions o;
    o.axis = 1;
    o.index = 2;
    io::export_slice(dir / "s.csv", v, o);
    std::ifstream in(dir / "s.csv");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            const double x = std::stod(cell);
            EXPECT_NEAR(x, v(col, 2, row), 5e-9 * std::abs(v(col, 2, row)));
            ++col;
        }
        EXPECT_EQ(col, 3u);
        ++row;
    }
    EXPECT_EQ(row, 5u);
}

TEST_F(Export, ConstantVolumeGivesUniformImage) {
    io::SliceOptions o;
    o.format = io::SliceFormat::Pgm;
    o.window_min = 1.0;
    o.window_max = 1.05;
    io::export_slice(dir / "c.pgm", RealVolume({5, 4, 3}, 1.02), o);
    const auto b = bytes_of(dir / "c.pgm");
    const std::string header = "P5\n5 4\n255\n";
    ASSERT_EQ(b.size(), header.size() + 20);
    EXPECT_EQ(std::string(b.begin(), b.begin() + header.size()), header);
    for (std::size_t i = header.size(); i < b.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(b[i]), 102);
}

TEST_F(Export, WindowClampsAndComplexParts) {
    ComplexVolume v({2, 2, 1});
    v[0] = cplx(0.0, 1.0);
    v[1] = cplx(-3.0, 0.0);
    v[2] = cplx(2.0, 0.0);
    v[3] = cplx(0.5, 0.0);
    io::SliceOptions o;
    o.format = io::SliceFormat::Pgm;
    o.part = io::ComplexPart::Real;
    io::export_slice(dir / "r.pgm", v, o);
    const auto b = bytes_of(dir / "r.pgm");
    // Rows are written top-down: slice row 1 first.
    const std::size_t off = b.size() - 4;
    EXPECT_EQ(static_cast<unsigned char>(b[off + 0]), 255);
    EXPECT_EQ(static_cast<unsigned char>(b[off + 1]), 128);
    EXPECT_EQ(static_cast<unsigned char>(b[off + 2]), 0);
    EXPECT_EQ(static_cast<unsigned char>(b[off + 3]), 0);
    o.format = io::SliceFormat::Csv;
    o.part = io::ComplexPart::Phase;
    io::export_slice(dir / "p.csv", v, o);
    std::ifstream in(dir / "p.csv");
    double a = 0;
    char comma;
    in >> a >> comma;
    EXPECT_NEAR(a, std::acos(0.0), 1e-8);
}

TEST_F(Export, IndexOutOfRange) {
    io::SliceOptions o;
    o.axis = 2;
    o.index = 3;
    EXPECT_THROW(io::export_slice(dir / "x.csv", RealVolume({2, 2, 3}), o), std::out_of_range);
}

// --- configuration -------------------------------------------------------------

TEST(RunConfig, UnitSuffixes) {
    EXPECT_DOUBLE_EQ(io::parse_length("532nm"), 532e-9);
    EXPECT_DOUBLE_EQ(io::parse_length("6.4um"), 6.4e-6);
    EXPECT_DOUBLE_EQ(io::parse_length("6.4\xC2\xB5m"), 6.4e-6);
    EXPECT_DOUBLE_EQ(io::parse_length("2mm"), 2e-3);
    EXPECT_DOUBLE_EQ(io::parse_length("1e-6m"), 1e-6);
    EXPECT_NEAR(io::parse_angle("45deg"), std::numbers::pi / 4, 1e-15);
    EXPECT_THROW((void)io::parse_length("532"), io::ConfigError);
    EXPECT_THROW((void)io::parse_length("532 furlongs"), io::ConfigError);
    EXPECT_THROW((void)io::parse_length("nm"), io::ConfigError);
}

TEST(RunConfig, DefaultsAreConsistent) {
    const io::RunConfig c = io::parse_run_config(nlohmann::json::object());
    const Geometry g = c.geometry();
    EXPECT_EQ(g.shape(), (Shape3{32, 32, 32}));
    EXPECT_NEAR(g.spacing(), 532e-9 / 8, 1e-20);
    EXPECT_DOUBLE_EQ(g.detector().position, g.length(2));
    EXPECT_EQ(c.recon.prox.kind, RegularizerKind::TV);
}

TEST(RunConfig, StrictKeys) {
    using nlohmann::json;
    EXPECT_THROW((void)io::parse_run_config(json{{"geometry", {{"wavelenght", "532nm"}}}}), io::ConfigError);
    EXPECT_THROW((void)io::parse_run_config(json{{"extra", 1}}), io::ConfigError);
    EXPECT_THROW((void)io::parse_run_config(json{{"geometry", {{"wavelength", 5.32e-7}}}}), io::ConfigError);
    EXPECT_THROW((void)io::parse_run_config(json{{"solver", {{"method", "gmres"}}}}), io::ConfigError);
    EXPECT_THROW((void)io::parse_run_config(
                     json{{"geometry", {{"detector", {{"samples", 32}, {"pitch", "66.5nm"}, {"z", "3um"}}}}}}),
                 io::ConfigError);
    // Physically inconsistent geometry surfaces as a configuration error.
    EXPECT_THROW((void)io::parse_run_config(json{{"geometry", {{"samples", 31}}}}), io::ConfigError);
}

TEST(RunConfig, OverridesAndNesting) {
    const nlohmann::json doc = io::apply_overrides(
        nlohmann::json::object(),
        {"geometry.samples=16", "geometry.length=1.064um", "recon.tau=1e-3", "prox.regularizer=hessian_schatten",
         "geometry.detector={\"samples\": 8, \"pitch\": \"133nm\", \"position\": \"2um\"}"});
    const io::RunConfig c = io::parse_run_config(doc);
    EXPECT_EQ(c.samples, (Shape3{16, 16, 16}));
    EXPECT_DOUBLE_EQ(c.recon.tau, 1e-3);
    EXPECT_EQ(c.recon.prox.kind, RegularizerKind::HessianSchatten);
    ASSERT_TRUE(c.detector.has_value());
    EXPECT_EQ(c.geometry().detector_stride(), 2u);
    EXPECT_THROW((void)io::apply_overrides(nlohmann::json::object(), {"novalue"}), io::ConfigError);
}

TEST(RunConfig, HashTracksContent) {
    const io::RunConfig a = io::parse_run_config(nlohmann::json::object());
    const io::RunConfig b = io::parse_run_config(nlohmann::json{{"seed", 0}});
    const io::RunConfig c = io::parse_run_config(nlohmann::json{{"seed", 1}});
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(io::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(RunConfig, LoadsFileWithOverrides) {
    const fs::path p = fs::temp_directory_path() / "odt_cfg_test.json";
    {
        std::ofstream out(p);
        out << R"({"geometry": {"samples": 16, "length": "1.064um"}, "phantom": {"kind": "empty"}})";
    }
    const io::RunConfig c = io::load_run_config(p, {"phantom.spheres.0.radius=0.2um", "seed=5"});
    EXPECT_EQ(c.samples.nx, 16u);
    EXPECT_EQ(c.phantom.kind, PhantomKind::Empty);
    EXPECT_DOUBLE_EQ(c.phantom.spheres[0].radius, 0.2e-6);
    EXPECT_EQ(c.seed, 5u);
    fs::remove(p);
    EXPECT_THROW((void)io::load_run_config(p), io::ConfigError);
}
