#pragma once

#include <cstddef>
#include <vector>

#include "tvflow/errors.hpp"

namespace tvflow {

// Dense scalar function on a regular pixel grid. Storage is row-major with
// (x, y) = (column, row), i.e. v[y*w + x].
struct ScalarField {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0)
      : w(width), h(height), v(static_cast<std::size_t>(width) * height, fill) {}

  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const ScalarField& o) const { return w == o.w && h == o.h; }
};

// Two components per pixel: c1 along x, c2 along y.
struct VectorField2 {
  ScalarField c1, c2;

  VectorField2() = default;
  VectorField2(int width, int height) : c1(width, height), c2(width, height) {}

  int w() const { return c1.w; }
  int h() const { return c1.h; }
};

// Four components per pixel, grouped as two 2-vector blocks (c11, c12) and
// (c21, c22). Pointwise magnitudes couple all four channels.
struct VectorField4 {
  ScalarField c11, c12, c21, c22;

  VectorField4() = default;
  VectorField4(int width, int height)
      : c11(width, height), c12(width, height), c21(width, height), c22(width, height) {}

  int w() const { return c11.w; }
  int h() const { return c11.h; }
};

// Pixel displacement field: u along x, v along y.
struct FlowField {
  ScalarField u, v;

  FlowField() = default;
  FlowField(int width, int height) : u(width, height), v(width, height) {}
  FlowField(ScalarField uu, ScalarField vv);

  int w() const { return u.w; }
  int h() const { return u.h; }
};

// Throws DimensionError when the two fields disagree in shape.
void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what);

// Per-pixel Euclidean magnitude across channels.
ScalarField pointwise_magnitude(const VectorField2& f);
ScalarField pointwise_magnitude(const VectorField4& f);

double inf_norm(const ScalarField& f);   // max |f(x,y)|
double inf_norm(const VectorField2& f);  // max pointwise magnitude
double inf_norm(const VectorField4& f);

double l1_norm(const ScalarField& f);    // sum |f(x,y)|
double l1_norm(const VectorField2& f);   // sum of pointwise magnitudes
double l1_norm(const VectorField4& f);

double inner_product(const ScalarField& a, const ScalarField& b);
double inner_product(const VectorField2& a, const VectorField2& b);
double inner_product(const VectorField4& a, const VectorField4& b);

}  // namespace tvflow
