#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "rs2gs/error.h"
#include "rs2gs/io.h"

namespace rs2gs {
namespace {

namespace fs = std::filesystem;

std::optional<ErrorCode> CodeOf(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rs2gs_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path Path(const std::string& name) const { return dir_ / name; }
  fs::path Put(const std::string& name, const std::string& bytes) const {
    std::ofstream(Path(name), std::ios::binary) << bytes;
    return Path(name);
  }
  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  fs::path dir_;
};

TEST_F(IoTest, CorrespondenceSingleLine) {
  const auto c = ReadCorrespondences(Put("a.csv", "u1,v1,u2,v2\n0.1,0.2,-0.1,-0.2\n"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].first.u, 0.1);
  EXPECT_EQ(c[0].first.v, 0.2);
  EXPECT_EQ(c[0].second.u, -0.1);
  EXPECT_EQ(c[0].second.v, -0.2);
}

TEST_F(IoTest, CorrespondenceRoundTripBitwise) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Correspondence> in(1000);
  for (auto& c : in) c = {{n(rng), n(rng)}, {n(rng) * 1e-7, n(rng) * 1e9}};
  WriteCorrespondences(Path("r.csv"), in);
  const auto out = ReadCorrespondences(Path("r.csv"));
  ASSERT_EQ(out.size(), in.size());
  for (size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i].first.u, in[i].first.u);
    EXPECT_EQ(out[i].first.v, in[i].first.v);
    EXPECT_EQ(out[i].second.u, in[i].second.u);
    EXPECT_EQ(out[i].second.v, in[i].second.v);
  }
}

TEST_F(IoTest, CorrespondenceErrorsNameLine) {
  const auto p = Put("bad.csv", "u1,v1,u2,v2\n0,0,0,0\n0.1,abc,0,0\n");
  try {
    ReadCorrespondences(p);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column 2"), std::string::npos) << e.what();
  }
  EXPECT_EQ(CodeOf([&] { ReadCorrespondences(Put("f.csv", "u1,v1,u2,v2\n1,2,3\n")); }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([&] { ReadCorrespondences(Put("h.csv", "x,y\n1,2,3,4\n")); }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([&] { ReadCorrespondences(Put("e.csv", "")); }), ErrorCode::kEmptyFile);
  EXPECT_EQ(CodeOf([&] { ReadCorrespondences(Path("missing.csv")); }), ErrorCode::kIoError);
}

TEST_F(IoTest, FlowFormat) {
  FlowField f(2, 1);
  f.flow[0] = Vec2(1.5, -2.0);
  f.valid[1] = 0;
  WriteFlow(Path("f.flo"), f);
  const std::string bytes = Slurp(Path("f.flo"));
  ASSERT_EQ(bytes.size(), std::string("RSFLOW 2 1\n").size() + 16);
  EXPECT_EQ(bytes.substr(0, 11), "RSFLOW 2 1\n");
  // 1.5f little-endian = 00 00 c0 3f
  EXPECT_EQ(static_cast<unsigned char>(bytes[11 + 3]), 0x3f);
  EXPECT_EQ(static_cast<unsigned char>(bytes[11 + 2]), 0xc0);
  const FlowField g = ReadFlow(Path("f.flo"));
  EXPECT_EQ(g.width, 2);
  EXPECT_EQ(g.height, 1);
  EXPECT_EQ(g.flow[0], Vec2(1.5, -2.0));
  EXPECT_EQ(g.valid[0], 1);
  EXPECT_EQ(g.valid[1], 0);
}

TEST_F(IoTest, FlowRoundTripBitwise) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<float> d(-50.0f, 50.0f);
  FlowField f(17, 9);
  for (size_t i = 0; i < f.flow.size(); ++i) {
    f.flow[i] = Vec2(d(rng), d(rng));
    f.valid[i] = (i % 7) != 0;
    if (!f.valid[i]) f.flow[i].setZero();
  }
  WriteFlow(Path("r.flo"), f);
  const FlowField g = ReadFlow(Path("r.flo"));
  EXPECT_EQ(g.flow, f.flow);
  EXPECT_EQ(g.valid, f.valid);
}

TEST_F(IoTest, FlowErrors) {
  EXPECT_EQ(CodeOf([&] { ReadFlow(Put("a", "PIEH 2 1\n")); }), ErrorCode::kBadMagic);
  EXPECT_EQ(CodeOf([&] { ReadFlow(Put("b", "RSFLOW 2 1\n" + std::string(15, '\0'))); }),
            ErrorCode::kTruncatedData);
  EXPECT_EQ(CodeOf([&] { ReadFlow(Put("c", "RSFLOW two 1\n")); }), ErrorCode::kCorruptHeader);
}

TEST_F(IoTest, ImageP5Sample) {
  const auto p = Put("a.pgm", std::string("P5\n1 1\n255\n") + static_cast<char>(128));
  const Raster r = ReadImage(p);
  EXPECT_EQ(r.channels, 1);
  EXPECT_EQ(r.at(0, 0), static_cast<float>(128.0 / 255.0));
}

TEST_F(IoTest, ImageRoundTrips) {
  std::string bytes = "P6\n# comment\n3 2\n255\n";
  for (int i = 0; i < 18; ++i) bytes.push_back(static_cast<char>(i * 14));
  const auto p = Put("a.ppm", bytes);
  WriteImage(Path("b.ppm"), ReadImage(p));
  const std::string again = Slurp(Path("b.ppm"));
  EXPECT_EQ(again.substr(again.size() - 18), bytes.substr(bytes.size() - 18));
  EXPECT_EQ(ReadImage(Path("b.ppm")).samples, ReadImage(p).samples);

  Raster r(4, 3, 1);
  for (size_t i = 0; i < r.samples.size(); ++i) r.samples[i] = i / 11.0f;
  WriteImage(Path("c.pgm"), r, 65535);
  const Raster s = ReadImage(Path("c.pgm"));
  for (size_t i = 0; i < r.samples.size(); ++i) EXPECT_NEAR(s.samples[i], r.samples[i], 1e-5);
}

TEST_F(IoTest, ImageErrors) {
  EXPECT_EQ(CodeOf([&] { ReadImage(Put("a", "P3\n1 1\n255\n0 0 0\n")); }),
            ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(CodeOf([&] { ReadImage(Put("b", "P5\n1 1\n1023\n\1\1")); }),
            ErrorCode::kUnsupportedFormat);
  EXPECT_EQ(CodeOf([&] { ReadImage(Put("c", "P5\nx 1\n255\n\1")); }),
            ErrorCode::kCorruptHeader);
  EXPECT_EQ(CodeOf([&] { ReadImage(Put("d", "P5\n2 2\n255\n\1")); }),
            ErrorCode::kTruncatedData);
}

TEST_F(IoTest, MotionRoundTrip) {
  WriteMotion(Path("z.txt"), MotionEstimate{});
  const MotionEstimate z = ReadMotion(Path("z.txt"));
  EXPECT_EQ(z.omega, Vec3::Zero());
  EXPECT_EQ(z.t, Vec3::Zero());
  EXPECT_TRUE(z.scale_known);
  EXPECT_EQ(z.model, MotionModel::kSixDof);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    MotionEstimate m;
    m.omega = Vec3(n(rng), n(rng), n(rng)) * 1e-3;
    m.t = Vec3(n(rng), n(rng), n(rng));
    m.scale_known = k % 2;
    m.model = static_cast<MotionModel>(k % 6);
    WriteMotion(Path("m.txt"), m);
    const MotionEstimate r = ReadMotion(Path("m.txt"));
    EXPECT_EQ(r.omega, m.omega);
    EXPECT_EQ(r.t, m.t);
    EXPECT_EQ(r.scale_known, m.scale_known);
    EXPECT_EQ(r.model, m.model);
  }
}

TEST_F(IoTest, MotionErrors) {
  EXPECT_EQ(CodeOf([&] {
              ReadMotion(Put("a", "model WOBBLE\nomega 0 0 0\nt 0 0 0\nscale_known 1\n"));
            }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([&] { ReadMotion(Put("b", "model ROT\nomega 0 0\n")); }),
            ErrorCode::kParseError);
  EXPECT_EQ(CodeOf([&] { ReadMotion(Put("c", "model ROT\nomega 0 0 0\n")); }),
            ErrorCode::kParseError);
}

TEST_F(IoTest, BenchmarkCsvRoundTrip) {
  std::vector<BenchmarkRecord> recs(2);
  recs[0] = {"6dof", "v2", 15.0, 0.1, 0.5, 0.0, 7, 0.31, 0.4, 0.77, 1234.5};
  recs[1] = {"rot", "v1", 30.0, 0.0, 0.5, 0.01, 8, 1.0 / 3.0, 2.0, 3.0, 0.0};
  const Metadata meta = {{"iterations", "200"}, {"threshold_px", "2"}};
  WriteBenchmarkCsv(Path("b.csv"), recs, meta);
  const std::string text = Slurp(Path("b.csv"));
  EXPECT_EQ(text.rfind("# iterations=200\n# threshold_px=2\n", 0), 0u);
  EXPECT_NE(text.find(std::string(kBenchmarkHeader) + "\n"), std::string::npos);
  Metadata got;
  const auto back = ReadBenchmarkCsv(Path("b.csv"), &got);
  EXPECT_EQ(got, meta);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].solver, "rot");
  EXPECT_EQ(back[1].median_px, 1.0 / 3.0);
  EXPECT_EQ(back[0].seed, 7u);
  EXPECT_EQ(back[0].runtime_us, 1234.5);
}

}  // namespace
}  // namespace rs2gs
