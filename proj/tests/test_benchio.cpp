#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"
#include "tvflow/benchio.hpp"

using namespace tvflow;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path dir = fs::temp_directory_path() / "tvflow_benchio_tests";
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<unsigned char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

FlowField constant_flow(int w, int h, double u, double v) {
  FlowField f(w, h);
  f.u = ScalarField(w, h, u);
  f.v = ScalarField(w, h, v);
  return f;
}

}  // namespace

TEST_CASE("flo files round-trip exactly") {
  const fs::path p = tmp_dir() / "roundtrip.flo";
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> val(-50.0, 50.0);
  std::uniform_int_distribution<int> dim(1, 23);
  for (int rep = 0; rep < 50; ++rep) {
    const int w = dim(rng), h = dim(rng);
    FlowField f(w, h);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      f.u.v[i] = static_cast<float>(val(rng));  // float-representable on purpose
      f.v.v[i] = static_cast<float>(val(rng));
    }
    if (rep % 7 == 0) f.u.v[0] = 1.0e9;  // unknown-flow sentinel survives too
    write_flo(p.string(), f);
    const FlowField g = read_flo(p.string());
    REQUIRE(g.w() == w);
    REQUIRE(g.h() == h);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
      CHECK(g.u.v[i] == f.u.v[i]);
      CHECK(g.v.v[i] == f.v.v[i]);
    }
  }
}

TEST_CASE("1x1 flo file matches the 20-byte golden layout") {
  const fs::path p = tmp_dir() / "golden.flo";
  FlowField f(1, 1);
  f.u.v[0] = 1.5;
  f.v.v[0] = -0.25;
  write_flo(p.string(), f);

  const std::vector<unsigned char> b = read_bytes(p);
  REQUIRE(b.size() == 20);
  CHECK(b[0] == 'P');
  CHECK(b[1] == 'I');
  CHECK(b[2] == 'E');
  CHECK(b[3] == 'H');

  std::int32_t w, h;
  std::memcpy(&w, b.data() + 4, 4);
  std::memcpy(&h, b.data() + 8, 4);
  CHECK(w == 1);
  CHECK(h == 1);

  float u, v;
  std::memcpy(&u, b.data() + 12, 4);
  std::memcpy(&v, b.data() + 16, 4);
  CHECK(u == 1.5f);
  CHECK(v == -0.25f);
}

TEST_CASE("malformed flo files raise FormatError with an offset") {
  const fs::path p = tmp_dir() / "bad.flo";

  write_text(p, "XXXXxxxxxxxxxxxxxxxx");
  try {
    (void)read_flo(p.string());
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.byte_offset == 0);
  }

  write_text(p, "PIEH\x01\x00");  // dies inside the dimension header
  CHECK_THROWS_AS((void)read_flo(p.string()), FormatError);

  {
    std::vector<unsigned char> b(20, 0);
    const float magic = 202021.25f;
    std::memcpy(b.data(), &magic, 4);
    const std::int32_t w = -1, h = 4;
    std::memcpy(b.data() + 4, &w, 4);
    std::memcpy(b.data() + 8, &h, 4);
    write_bytes(p, b);
    try {
      (void)read_flo(p.string());
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset == 4);
    }
  }

  {
    // 2x2 header but only 3 of the 8 payload floats present.
    std::vector<unsigned char> b(12 + 12, 0);
    const float magic = 202021.25f;
    std::memcpy(b.data(), &magic, 4);
    const std::int32_t w = 2, h = 2;
    std::memcpy(b.data() + 4, &w, 4);
    std::memcpy(b.data() + 8, &h, 4);
    write_bytes(p, b);
    try {
      (void)read_flo(p.string());
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.byte_offset == 24);
    }
  }

  {
    std::vector<unsigned char> b(12, 0);
    const float magic = 202021.25f;
    std::memcpy(b.data(), &magic, 4);
    const std::int32_t w = 100000, h = 100000;  // pixel count overflow
    std::memcpy(b.data() + 4, &w, 4);
    std::memcpy(b.data() + 8, &h, 4);
    write_bytes(p, b);
    CHECK_THROWS_AS((void)read_flo(p.string()), FormatError);
  }

  CHECK_THROWS_AS((void)read_flo((tmp_dir() / "nonexistent.flo").string()), IngestionError);
}

TEST_CASE("angular error golden values") {
  // (1,0) vs (0,1): the space-time vectors (1,0,1), (0,1,1) meet at 60 deg.
  const FlowField a = constant_flow(2, 2, 1.0, 0.0);
  const FlowField b = constant_flow(2, 2, 0.0, 1.0);
  CHECK(aae(a, b) == doctest::Approx(60.0).epsilon(1e-12));
  // Identical flows are not exactly 0: sqrt(x)*sqrt(x) differs from x by one
  // ulp and acos near 1 amplifies that to ~1e-6 degrees.
  CHECK(aae(a, a) <= 1e-5);

  // Collinear but differently scaled flows still have a nonzero angle.
  const FlowField c = constant_flow(2, 2, 2.0, 0.0);
  const FlowField d = constant_flow(2, 2, 1.0, 0.0);
  const double expect = std::acos(3.0 / std::sqrt(10.0)) * 180.0 / 3.14159265358979323846;
  CHECK(aae(c, d) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("endpoint error golden values") {
  const FlowField a = constant_flow(3, 2, 3.0, 4.0);
  const FlowField z = constant_flow(3, 2, 0.0, 0.0);
  CHECK(epe(a, z) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(epe(a, a) == 0.0);
  CHECK(epe(constant_flow(2, 2, 1.0, 0.0), constant_flow(2, 2, 0.0, 1.0)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("evaluation skips unknown ground-truth pixels") {
  const FlowField est = constant_flow(2, 2, 1.0, 0.0);
  FlowField gt = constant_flow(2, 2, 1.0, 0.0);
  gt.u.at(1, 1) = 1.0e9;  // unknown
  const EvalResult r = evaluate_flow(est, gt);
  CHECK(r.valid_pixel_count == 3);
  CHECK(r.aae_deg <= 1e-5);  // acos amplifies 1-ulp rounding, see above
  CHECK(r.epe_px == 0.0);

  FlowField all_bad = constant_flow(2, 2, 2.0e9, 0.0);
  CHECK_THROWS_AS((void)aae(est, all_bad), EvalError);
  CHECK_THROWS_AS((void)epe(est, all_bad), EvalError);

  CHECK_THROWS_AS((void)epe(est, constant_flow(3, 2, 0.0, 0.0)), DimensionError);
}

TEST_CASE("evaluate_flow agrees with the individual metrics") {
  std::mt19937 rng(32);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  FlowField est(7, 5), gt(7, 5);
  for (std::size_t i = 0; i < est.u.size(); ++i) {
    est.u.v[i] = val(rng);
    est.v.v[i] = val(rng);
    gt.u.v[i] = val(rng);
    gt.v.v[i] = val(rng);
  }
  const EvalResult r = evaluate_flow(est, gt);
  CHECK(r.aae_deg == doctest::Approx(aae(est, gt)).epsilon(1e-13));
  CHECK(r.epe_px == doctest::Approx(epe(est, gt)).epsilon(1e-13));
  CHECK(r.valid_pixel_count == 35);
}

TEST_CASE("flow color coding golden pixels") {
  FlowField f(2, 1);
  f.u.at(0, 0) = 5.0;  // rightward at full saturation: pure red
  f.v.at(0, 0) = 0.0;
  f.u.at(1, 0) = 0.0;  // zero flow: white
  f.v.at(1, 0) = 0.0;
  const RgbImage img = flow_to_color(f);
  CHECK(img.rgb[0] == 255);
  CHECK(img.rgb[1] == 0);
  CHECK(img.rgb[2] == 0);
  CHECK(img.rgb[3] == 255);
  CHECK(img.rgb[4] == 255);
  CHECK(img.rgb[5] == 255);
}

TEST_CASE("leftward flow lands on the cyan-blue arc") {
  FlowField f(1, 1);
  f.u.at(0, 0) = -5.0;
  f.v.at(0, 0) = 0.0;
  const RgbImage img = flow_to_color(f);
  CHECK(img.rgb[0] == 0);
  CHECK(img.rgb[1] == 209);
  CHECK(img.rgb[2] == 255);
}

TEST_CASE("unknown flow pixels are painted black") {
  FlowField f(1, 1);
  f.u.at(0, 0) = 2.0e9;
  f.v.at(0, 0) = 0.0;
  const RgbImage img = flow_to_color(f);
  CHECK(img.rgb[0] == 0);
  CHECK(img.rgb[1] == 0);
  CHECK(img.rgb[2] == 0);
}

TEST_CASE("explicit max magnitude rescales the saturation") {
  FlowField f(1, 1);
  f.u.at(0, 0) = 5.0;
  f.v.at(0, 0) = 0.0;
  // Twice the max magnitude: halfway toward white along the red ray.
  const RgbImage img = flow_to_color(f, 10.0);
  CHECK(img.rgb[0] == 255);
  CHECK(img.rgb[1] == 128);
  CHECK(img.rgb[2] == 128);
}

TEST_CASE("P2 and P5 carry the same samples") {
  const fs::path p2 = tmp_dir() / "img.p2.pgm";
  const fs::path p5 = tmp_dir() / "img.p5.pgm";
  write_text(p2, "P2\n# a comment\n2 2\n255\n0 128 255 64\n");
  std::vector<unsigned char> bin = {'P', '5', '\n', '2', ' ', '2', '\n', '2', '5', '5', '\n',
                                    0, 128, 255, 64};
  write_bytes(p5, bin);

  const ScalarField a = read_gray_image(p2.string());
  const ScalarField b = read_gray_image(p5.string());
  REQUIRE(a.w == 2);
  REQUIRE(a.h == 2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.v[i] == b.v[i]);
  CHECK(a.v[0] == 0.0);
  CHECK(a.v[2] == 1.0);  // maxval maps to exactly 1
  CHECK(a.v[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
}

TEST_CASE("16-bit PGM samples are big-endian") {
  const fs::path p = tmp_dir() / "img16.pgm";
  std::vector<unsigned char> bin = {'P', '5', '\n', '1', ' ', '1', '\n',
                                    '6', '5', '5', '3', '5', '\n', 0x01, 0x00};
  write_bytes(p, bin);
  const ScalarField img = read_gray_image(p.string());
  CHECK(img.v[0] == doctest::Approx(256.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("malformed PGM files raise FormatError") {
  const fs::path p = tmp_dir() / "bad.pgm";
  write_text(p, "P5\n2 2\n255\n\x01\x02");  // payload cut short
  CHECK_THROWS_AS((void)read_gray_image(p.string()), FormatError);

  write_text(p, "P2\n1 1\n255\n300\n");  // sample above maxval
  CHECK_THROWS_AS((void)read_gray_image(p.string()), FormatError);

  write_text(p, "P2\n1 1\n70000\n1\n");  // maxval out of range
  CHECK_THROWS_AS((void)read_gray_image(p.string()), FormatError);

  write_text(p, "P7\n1 1\n255\n0\n");
  CHECK_THROWS_AS((void)read_gray_image(p.string()), FormatError);

  CHECK_THROWS_AS((void)read_gray_image((tmp_dir() / "missing.pgm").string()),
                  IngestionError);
}

TEST_CASE("PGM writing round-trips within quantization") {
  const fs::path p = tmp_dir() / "rt.pgm";
  ScalarField img(3, 2);
  img.v = {0.0, 0.25, 0.5, 0.75, 1.0, 1.4};  // last value clamps to 1
  write_pgm(p.string(), img);
  const ScalarField back = read_gray_image(p.string());
  for (std::size_t i = 0; i < img.size(); ++i)
    CHECK(std::fabs(back.v[i] - std::min(img.v[i], 1.0)) <= 0.5 / 255.0);
}

TEST_CASE("PNG round-trip reduces color by the luma weights") {
  const fs::path p = tmp_dir() / "rt.png";
  RgbImage img(3, 1);
  img.rgb = {255, 0, 0, 0, 255, 0, 128, 128, 128};
  write_png_rgb(p.string(), img);
  const ScalarField gray = read_gray_image(p.string());
  REQUIRE(gray.w == 3);
  REQUIRE(gray.h == 1);
  CHECK(gray.v[0] == doctest::Approx(0.299).epsilon(1e-15));
  CHECK(gray.v[1] == doctest::Approx(0.587).epsilon(1e-15));
  CHECK(gray.v[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("corrupt PNG data raises FormatError") {
  const fs::path p = tmp_dir() / "bad.png";
  std::vector<unsigned char> bytes = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  for (int i = 0; i < 32; ++i) bytes.push_back(static_cast<unsigned char>(i * 7));
  write_bytes(p, bytes);
  CHECK_THROWS_AS((void)read_gray_image(p.string()), FormatError);
}
