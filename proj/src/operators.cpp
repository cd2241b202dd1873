#include "tvflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tvflow {

void gradient(const ScalarField& f, ScalarField& gx, ScalarField& gy) {
  const int W = f.w, H = f.h;
  gx = ScalarField(W, H);
  gy = ScalarField(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      gx.at(x, y) = (x < W - 1) ? f.at(x + 1, y) - f.at(x, y) : 0.0;
      gy.at(x, y) = (y < H - 1) ? f.at(x, y + 1) - f.at(x, y) : 0.0;
    }
  }
}

VectorField2 gradient(const ScalarField& f) {
  VectorField2 g;
  gradient(f, g.c1, g.c2);
  return g;
}

void divergence(const ScalarField& vx, const ScalarField& vy, ScalarField& out) {
  require_same_shape(vx, vy, "divergence channels");
  const int W = vx.w, H = vx.h;
  out = ScalarField(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const double dxx = ((x < W - 1) ? vx.at(x, y) : 0.0) - ((x > 0) ? vx.at(x - 1, y) : 0.0);
      const double dyy = ((y < H - 1) ? vy.at(x, y) : 0.0) - ((y > 0) ? vy.at(x, y - 1) : 0.0);
      out.at(x, y) = dxx + dyy;
    }
  }
}

ScalarField divergence(const VectorField2& v) {
  ScalarField d;
  divergence(v.c1, v.c2, d);
  return d;
}

ScalarField laplacian_apply(const ScalarField& f, double sigma_tau) {
  VectorField2 g = gradient(f);
  ScalarField d = divergence(g);
  ScalarField out(f.w, f.h);
  for (std::size_t i = 0; i < f.size(); ++i) out.v[i] = f.v[i] - sigma_tau * d.v[i];
  return out;
}

ScalarField warp(const ScalarField& img, const FlowField& flow) {
  require_same_shape(img, flow.u, "warp");
  const int W = img.w, H = img.h;
  ScalarField out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double sx = x + flow.u.at(x, y);
      double sy = y + flow.v.at(x, y);
      sx = std::min(std::max(sx, 0.0), static_cast<double>(W - 1));
      sy = std::min(std::max(sy, 0.0), static_cast<double>(H - 1));
      const int x0 = static_cast<int>(sx);
      const int y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, W - 1);
      const int y1 = std::min(y0 + 1, H - 1);
      const double fx = sx - x0;
      const double fy = sy - y0;
      out.at(x, y) = (1.0 - fx) * (1.0 - fy) * img.at(x0, y0) +
                     fx * (1.0 - fy) * img.at(x1, y0) +
                     (1.0 - fx) * fy * img.at(x0, y1) +
                     fx * fy * img.at(x1, y1);
    }
  }
  return out;
}

ImageData compute_derivatives(const ScalarField& I0, const ScalarField& I1,
                              const FlowField& flow0, double beta) {
  require_same_shape(I0, I1, "frame pair");
  require_same_shape(I0, flow0.u, "frame vs flow");
  const int W = I0.w, H = I0.h;

  const ScalarField Iw = warp(I1, flow0);

  ImageData data;
  data.beta = beta;
  data.Ix = ScalarField(W, H);
  data.Iy = ScalarField(W, H);
  data.It = ScalarField(W, H);
  data.Ms = ScalarField(W, H);

  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double ix = 0.0, iy = 0.0;
      if (W > 1) {
        if (x == 0)
          ix = Iw.at(1, y) - Iw.at(0, y);
        else if (x == W - 1)
          ix = Iw.at(W - 1, y) - Iw.at(W - 2, y);
        else
          ix = 0.5 * (Iw.at(x + 1, y) - Iw.at(x - 1, y));
      }
      if (H > 1) {
        if (y == 0)
          iy = Iw.at(x, 1) - Iw.at(x, 0);
        else if (y == H - 1)
          iy = Iw.at(x, H - 1) - Iw.at(x, H - 2);
        else
          iy = 0.5 * (Iw.at(x, y + 1) - Iw.at(x, y - 1));
      }
      data.Ix.at(x, y) = ix;
      data.Iy.at(x, y) = iy;
      data.It.at(x, y) = Iw.at(x, y) - I0.at(x, y) - ix * flow0.u.at(x, y) - iy * flow0.v.at(x, y);
      data.Ms.at(x, y) = beta * beta + ix * ix + iy * iy;
    }
  }
  return data;
}

ScalarField gaussian_blur(const ScalarField& img, double stddev) {
  if (stddev <= 1e-12) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * stddev)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (stddev * stddev));
    sum += k[i + radius];
  }
  for (double& x : k) x /= sum;

  const int W = img.w, H = img.h;
  ScalarField tmp(W, H), out(W, H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xi = std::min(std::max(x + i, 0), W - 1);
        acc += k[i + radius] * img.at(xi, y);
      }
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yi = std::min(std::max(y + i, 0), H - 1);
        acc += k[i + radius] * tmp.at(x, yi);
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

ScalarField resize_bilinear(const ScalarField& img, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) throw DimensionError("resize target must be at least 1x1");
  const int W = img.w, H = img.h;
  ScalarField out(new_w, new_h);
  const double sx = static_cast<double>(W) / new_w;
  const double sy = static_cast<double>(H) / new_h;
  for (int y = 0; y < new_h; ++y) {
    for (int x = 0; x < new_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      double fy = (y + 0.5) * sy - 0.5;
      fx = std::min(std::max(fx, 0.0), static_cast<double>(W - 1));
      fy = std::min(std::max(fy, 0.0), static_cast<double>(H - 1));
      const int x0 = static_cast<int>(fx);
      const int y0 = static_cast<int>(fy);
      const int x1 = std::min(x0 + 1, W - 1);
      const int y1 = std::min(y0 + 1, H - 1);
      const double ax = fx - x0;
      const double ay = fy - y0;
      out.at(x, y) = (1.0 - ax) * (1.0 - ay) * img.at(x0, y0) +
                     ax * (1.0 - ay) * img.at(x1, y0) +
                     (1.0 - ax) * ay * img.at(x0, y1) +
                     ax * ay * img.at(x1, y1);
    }
  }
  return out;
}

namespace {

int scaled_size(int n, double s) {
  return std::max(1, static_cast<int>(std::lround(n * s)));
}

double decimation_blur_stddev(double factor) {
  return 0.8 * std::sqrt(1.0 / (factor * factor) - 1.0);
}

}  // namespace

ScalarField downsample(const ScalarField& img, double factor) {
  if (!(factor > 0.0 && factor < 1.0))
    throw ConfigError("downsample factor = " + std::to_string(factor) +
                      " outside the admissible range (0, 1)");
  const ScalarField blurred = gaussian_blur(img, decimation_blur_stddev(factor));
  return resize_bilinear(blurred, scaled_size(img.w, factor), scaled_size(img.h, factor));
}

std::vector<ScalarField> build_pyramid(const ScalarField& img, int levels, double factor) {
  if (levels < 1)
    throw ConfigError("pyramid levels = " + std::to_string(levels) + " must be >= 1");
  if (levels > 1 && !(factor > 0.0 && factor < 1.0))
    throw ConfigError("pyramid scale factor = " + std::to_string(factor) +
                      " outside the admissible range (0, 1)");

  std::vector<ScalarField> pyr;
  pyr.reserve(levels);
  pyr.push_back(img);
  double s = 1.0;
  for (int k = 1; k < levels; ++k) {
    s *= factor;
    const int wk = scaled_size(img.w, s);
    const int hk = scaled_size(img.h, s);
    if (wk < 8 || hk < 8)
      throw ConfigError("pyramid levels = " + std::to_string(levels) + " too deep for a " +
                        std::to_string(img.w) + "x" + std::to_string(img.h) +
                        " image (coarsest level must stay >= 8x8)");
    pyr.push_back(resize_bilinear(gaussian_blur(pyr.back(), decimation_blur_stddev(factor)),
                                  wk, hk));
  }
  return pyr;
}

FlowField upsample_flow(const FlowField& flow, int new_w, int new_h) {
  if (new_w < flow.w() || new_h < flow.h())
    throw DimensionError("upsample_flow target " + std::to_string(new_w) + "x" +
                         std::to_string(new_h) + " smaller than source");
  FlowField out;
  out.u = resize_bilinear(flow.u, new_w, new_h);
  out.v = resize_bilinear(flow.v, new_w, new_h);
  const double su = static_cast<double>(new_w) / flow.w();
  const double sv = static_cast<double>(new_h) / flow.h();
  for (double& x : out.u.v) x *= su;
  for (double& x : out.v.v) x *= sv;
  return out;
}

ScalarField upsample_field(const ScalarField& f, int new_w, int new_h) {
  if (new_w < f.w || new_h < f.h)
    throw DimensionError("upsample_field target " + std::to_string(new_w) + "x" +
                         std::to_string(new_h) + " smaller than source");
  return resize_bilinear(f, new_w, new_h);
}

}  // namespace tvflow
