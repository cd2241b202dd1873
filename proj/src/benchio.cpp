#include "tvflow/benchio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace tvflow {

namespace {

constexpr float kFloMagic = 202021.25f;  // reads as "PIEH" in little-endian bytes
constexpr long long kMaxFloPixels = 100000000;
constexpr double kPi = 3.14159265358979323846;

bool flow_value_valid(double u, double v) {
  return std::isfinite(u) && std::isfinite(v) && std::fabs(u) < kInvalidFlowThresh &&
         std::fabs(v) < kInvalidFlowThresh;
}

}  // namespace

FlowField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open flow file: " + path);

  char head[12];
  in.read(head, 12);
  if (in.gcount() < 4) throw FormatError("flow file too short for the magic tag: " + path, 0);
  float magic;
  std::memcpy(&magic, head, 4);
  if (magic != kFloMagic)
    throw FormatError("bad magic tag in flow file " + path + " (expected 202021.25)", 0);
  if (in.gcount() < 12)
    throw FormatError("flow file truncated inside the dimension header: " + path,
                      in.gcount());

  std::int32_t w, h;
  std::memcpy(&w, head + 4, 4);
  std::memcpy(&h, head + 8, 4);
  if (w < 1 || h < 1)
    throw FormatError("non-positive dimensions " + std::to_string(w) + "x" +
                          std::to_string(h) + " in flow file " + path,
                      4);
  if (static_cast<long long>(w) * h > kMaxFloPixels)
    throw FormatError("dimension overflow " + std::to_string(w) + "x" + std::to_string(h) +
                          " in flow file " + path,
                      4);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> raw(2 * n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(8 * n));
  if (static_cast<std::size_t>(in.gcount()) != 8 * n)
    throw FormatError("truncated flow payload in " + path + ": expected " +
                          std::to_string(8 * n) + " bytes, got " +
                          std::to_string(in.gcount()),
                      12 + in.gcount());

  FlowField f(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    f.u.v[i] = raw[2 * i];
    f.v.v[i] = raw[2 * i + 1];
  }
  return f;
}

void write_flo(const std::string& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot open flow file for writing: " + path);

  const std::int32_t w = flow.w(), h = flow.h();
  out.write(reinterpret_cast<const char*>(&kFloMagic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> raw(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    raw[2 * i] = static_cast<float>(flow.u.v[i]);
    raw[2 * i + 1] = static_cast<float>(flow.v.v[i]);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(8 * n));
  if (!out) throw IngestionError("short write to flow file: " + path);
}

namespace {

template <typename PerPixel>
long for_valid_pixels(const FlowField& est, const FlowField& gt, PerPixel f) {
  require_same_shape(est.u, gt.u, "flow evaluation");
  long count = 0;
  for (std::size_t i = 0; i < gt.u.size(); ++i) {
    if (!flow_value_valid(gt.u.v[i], gt.v.v[i])) continue;
    f(est.u.v[i], est.v.v[i], gt.u.v[i], gt.v.v[i]);
    ++count;
  }
  if (count == 0) throw EvalError("no valid ground-truth pixels to evaluate");
  return count;
}

}  // namespace

double aae(const FlowField& est, const FlowField& gt) {
  double sum = 0.0;
  const long count = for_valid_pixels(est, gt, [&](double u1, double v1, double u2, double v2) {
    const double num = u1 * u2 + v1 * v2 + 1.0;
    const double den = std::sqrt(u1 * u1 + v1 * v1 + 1.0) * std::sqrt(u2 * u2 + v2 * v2 + 1.0);
    sum += std::acos(std::clamp(num / den, -1.0, 1.0));
  });
  return (sum / count) * (180.0 / kPi);
}

double epe(const FlowField& est, const FlowField& gt) {
  double sum = 0.0;
  const long count = for_valid_pixels(est, gt, [&](double u1, double v1, double u2, double v2) {
    sum += std::sqrt((u1 - u2) * (u1 - u2) + (v1 - v2) * (v1 - v2));
  });
  return sum / count;
}

EvalResult evaluate_flow(const FlowField& est, const FlowField& gt) {
  EvalResult r;
  double aae_sum = 0.0, epe_sum = 0.0;
  r.valid_pixel_count = for_valid_pixels(est, gt, [&](double u1, double v1, double u2, double v2) {
    const double num = u1 * u2 + v1 * v2 + 1.0;
    const double den = std::sqrt(u1 * u1 + v1 * v1 + 1.0) * std::sqrt(u2 * u2 + v2 * v2 + 1.0);
    aae_sum += std::acos(std::clamp(num / den, -1.0, 1.0));
    epe_sum += std::sqrt((u1 - u2) * (u1 - u2) + (v1 - v2) * (v1 - v2));
  });
  r.aae_deg = (aae_sum / r.valid_pixel_count) * (180.0 / kPi);
  r.epe_px = epe_sum / r.valid_pixel_count;
  return r;
}

namespace {

// 55-entry color wheel with smooth transitions over the six arcs
// red-yellow, yellow-green, green-cyan, cyan-blue, blue-magenta, magenta-red.
struct ColorWheel {
  static constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  static constexpr int ncols = RY + YG + GC + CB + BM + MR;
  int col[ncols][3];

  ColorWheel() {
    int k = 0;
    for (int i = 0; i < RY; ++i, ++k) set(k, 255, 255 * i / RY, 0);
    for (int i = 0; i < YG; ++i, ++k) set(k, 255 - 255 * i / YG, 255, 0);
    for (int i = 0; i < GC; ++i, ++k) set(k, 0, 255, 255 * i / GC);
    for (int i = 0; i < CB; ++i, ++k) set(k, 0, 255 - 255 * i / CB, 255);
    for (int i = 0; i < BM; ++i, ++k) set(k, 255 * i / BM, 0, 255);
    for (int i = 0; i < MR; ++i, ++k) set(k, 255, 0, 255 - 255 * i / MR);
  }

  void set(int k, int r, int g, int b) {
    col[k][0] = r;
    col[k][1] = g;
    col[k][2] = b;
  }
};

}  // namespace

RgbImage flow_to_color(const FlowField& flow, double max_mag) {
  static const ColorWheel wheel;
  const int W = flow.w(), H = flow.h();

  if (max_mag <= 0.0) {
    for (std::size_t i = 0; i < flow.u.size(); ++i) {
      if (!flow_value_valid(flow.u.v[i], flow.v.v[i])) continue;
      max_mag = std::max(max_mag,
                         std::sqrt(flow.u.v[i] * flow.u.v[i] + flow.v.v[i] * flow.v.v[i]));
    }
  }
  if (max_mag < 1e-12) max_mag = 1.0;

  RgbImage img(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      unsigned char* px = &img.rgb[3 * i];
      const double u = flow.u.v[i], v = flow.v.v[i];
      if (!flow_value_valid(u, v)) {
        px[0] = px[1] = px[2] = 0;
        continue;
      }
      const double rad = std::min(std::sqrt(u * u + v * v) / max_mag, 1.0);
      const double a = std::atan2(-v, -u) / kPi;  // in [-1, 1]
      const double fk = (a + 1.0) / 2.0 * (ColorWheel::ncols - 1);
      int k0 = static_cast<int>(fk);
      if (k0 >= ColorWheel::ncols) k0 = ColorWheel::ncols - 1;
      const int k1 = (k0 + 1) % ColorWheel::ncols;
      const double f = fk - k0;
      for (int ch = 0; ch < 3; ++ch) {
        const double c0 = wheel.col[k0][ch] / 255.0;
        const double c1 = wheel.col[k1][ch] / 255.0;
        double col = (1.0 - f) * c0 + f * c1;
        col = 1.0 - rad * (1.0 - col);  // desaturate toward white at small magnitude
        px[ch] = static_cast<unsigned char>(std::lround(255.0 * col));
      }
    }
  }
  return img;
}

namespace {

int pnm_next_int(std::istream& in, const std::string& path) {
  while (true) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (ch != EOF && std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
  int val;
  if (!(in >> val))
    throw FormatError("malformed PGM header in " + path,
                      std::max<long long>(0, static_cast<long long>(in.tellg())));
  return val;
}

ScalarField read_pgm(std::ifstream& in, const std::string& path, bool binary) {
  const int w = pnm_next_int(in, path);
  const int h = pnm_next_int(in, path);
  const int maxval = pnm_next_int(in, path);
  if (w < 1 || h < 1)
    throw FormatError("non-positive PGM dimensions in " + path, 2);
  if (maxval < 1 || maxval > 65535)
    throw FormatError("PGM maxval " + std::to_string(maxval) + " out of range in " + path, 2);

  ScalarField img(w, h);
  const std::size_t n = img.size();
  if (binary) {
    in.get();  // the single whitespace byte after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(n * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
      throw FormatError("truncated PGM payload in " + path,
                        std::max<long long>(0, static_cast<long long>(in.tellg())));
    for (std::size_t i = 0; i < n; ++i) {
      const int raw = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
      img.v[i] = static_cast<double>(raw) / maxval;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const int raw = pnm_next_int(in, path);
      if (raw < 0 || raw > maxval)
        throw FormatError("PGM sample " + std::to_string(raw) + " out of range in " + path,
                          std::max<long long>(0, static_cast<long long>(in.tellg())));
      img.v[i] = static_cast<double>(raw) / maxval;
    }
  }
  return img;
}

ScalarField read_png_gray(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IngestionError("cannot open image: " + path);

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, fp) != 8 || png_sig_cmp(sig, 0, 8)) {
    std::fclose(fp);
    throw FormatError("not a PNG file: " + path, 0);
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IngestionError("libpng initialization failed");
  }

  // Heap-backed buffers so the longjmp error path never touches stale
  // automatic storage.
  auto storage = std::make_unique<std::vector<unsigned char>>();
  auto rows = std::make_unique<std::vector<png_bytep>>();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw FormatError("corrupt PNG data in " + path, 8);
  }

  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);

  storage->resize(rowbytes * h);
  rows->resize(h);
  for (int y = 0; y < h; ++y) (*rows)[y] = storage->data() + y * rowbytes;
  png_read_image(png, rows->data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  ScalarField img(w, h);
  for (int y = 0; y < h; ++y) {
    const unsigned char* row = storage->data() + static_cast<std::size_t>(y) * rowbytes;
    for (int x = 0; x < w; ++x) {
      if (channels == 1) {
        img.at(x, y) = row[x] / 255.0;
      } else {
        const unsigned char* px = row + channels * x;
        img.at(x, y) = 0.299 * (px[0] / 255.0) + 0.587 * (px[1] / 255.0) + 0.114 * (px[2] / 255.0);
      }
    }
  }
  return img;
}

}  // namespace

ScalarField read_gray_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open image: " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in) throw FormatError("image file too short: " + path, 0);

  if (m0 == 'P' && (m1 == '2' || m1 == '5')) return read_pgm(in, path, m1 == '5');
  if (static_cast<unsigned char>(m0) == 0x89 && m1 == 'P') {
    in.close();
    return read_png_gray(path);
  }
  throw FormatError("unsupported image format in " + path + " (expected PGM P2/P5 or PNG)", 0);
}

void write_png_rgb(const std::string& path, const RgbImage& img) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IngestionError("cannot open image for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IngestionError("libpng initialization failed");
  }

  auto rows = std::make_unique<std::vector<png_bytep>>();

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IngestionError("PNG write failed: " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  rows->resize(img.h);
  for (int y = 0; y < img.h; ++y)
    (*rows)[y] = const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.w * 3);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_pgm(const std::string& path, const ScalarField& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot open image for writing: " + path);
  out << "P5\n" << img.w << " " << img.h << "\n255\n";
  std::vector<unsigned char> buf(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double c = std::clamp(img.v[i], 0.0, 1.0);
    buf[i] = static_cast<unsigned char>(std::lround(255.0 * c));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IngestionError("short write to image file: " + path);
}

}  // namespace tvflow
