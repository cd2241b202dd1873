#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "tvflow/field.hpp"
#include "tvflow/operators.hpp"

namespace testutil {

inline tvflow::ScalarField random_field(std::mt19937& rng, int w, int h, double lo = -1.0,
                                        double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  tvflow::ScalarField f(w, h);
  for (double& x : f.v) x = dist(rng);
  return f;
}

inline tvflow::VectorField2 random_vfield2(std::mt19937& rng, int w, int h, double lo = -1.0,
                                           double hi = 1.0) {
  tvflow::VectorField2 f(w, h);
  f.c1 = random_field(rng, w, h, lo, hi);
  f.c2 = random_field(rng, w, h, lo, hi);
  return f;
}

// Smooth band-limited texture in [0.1, 0.9]; gradients stay O(0.1) per pixel
// so warp linearization is informative everywhere.
inline tvflow::ScalarField smooth_texture(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  tvflow::ScalarField noise = random_field(rng, w, h, 0.0, 1.0);
  tvflow::ScalarField f = tvflow::gaussian_blur(noise, 1.5);
  double lo = f.v[0], hi = f.v[0];
  for (double x : f.v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& x : f.v) x = 0.1 + 0.8 * (x - lo) / span;
  return f;
}

// Frame pair with exact integer ground truth (dx, dy): both frames are crops
// of one larger texture, so every pixel of frame1 appears shifted in frame0.
inline std::pair<tvflow::ScalarField, tvflow::ScalarField> shifted_pair(int w, int h, int dx,
                                                                        int dy,
                                                                        unsigned seed) {
  const tvflow::ScalarField big = smooth_texture(w + std::abs(dx), h + std::abs(dy), seed);
  tvflow::ScalarField I0(w, h), I1(w, h);
  const int ox0 = std::max(dx, 0), oy0 = std::max(dy, 0);
  const int ox1 = std::max(-dx, 0), oy1 = std::max(-dy, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      I0.at(x, y) = big.at(x + ox0, y + oy0);
      I1.at(x, y) = big.at(x + ox1, y + oy1);
    }
  }
  return {I0, I1};
}

// Synthetic linearized data with Ms bounded well away from zero; used for
// solver convergence studies that do not involve warping.
inline tvflow::ImageData synthetic_image_data(int w, int h, double beta, unsigned seed) {
  std::mt19937 rng(seed);
  tvflow::ImageData data;
  data.beta = beta;
  data.Ix = tvflow::ScalarField(w, h);
  data.Iy = tvflow::ScalarField(w, h);
  data.It = tvflow::ScalarField(w, h);
  data.Ms = tvflow::ScalarField(w, h);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ph = 2.0 * 3.14159265358979323846;
      const double ix = 0.7 + 0.2 * std::sin(ph * x / w + 1.3) * std::cos(ph * y / h) + jitter(rng);
      const double iy = 0.5 + 0.2 * std::cos(ph * (x + y) / (w + h)) + jitter(rng);
      const double it = 0.3 * std::sin(ph * x / w) * std::cos(ph * y / h) - 0.1 + jitter(rng);
      data.Ix.at(x, y) = ix;
      data.Iy.at(x, y) = iy;
      data.It.at(x, y) = it;
      data.Ms.at(x, y) = beta * beta + ix * ix + iy * iy;
    }
  }
  return data;
}

}  // namespace testutil
