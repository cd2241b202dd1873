#include "tvflow/field.hpp"

#include <cmath>
#include <string>

namespace tvflow {

FlowField::FlowField(ScalarField uu, ScalarField vv) : u(std::move(uu)), v(std::move(vv)) {
  require_same_shape(u, v, "flow channels");
}

void require_same_shape(const ScalarField& a, const ScalarField& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.w) + "x" +
                         std::to_string(a.h) + " vs " + std::to_string(b.w) + "x" +
                         std::to_string(b.h));
  }
}

ScalarField pointwise_magnitude(const VectorField2& f) {
  require_same_shape(f.c1, f.c2, "vector field channels");
  ScalarField m(f.w(), f.h());
  for (std::size_t i = 0; i < m.size(); ++i)
    m.v[i] = std::sqrt(f.c1.v[i] * f.c1.v[i] + f.c2.v[i] * f.c2.v[i]);
  return m;
}

ScalarField pointwise_magnitude(const VectorField4& f) {
  require_same_shape(f.c11, f.c22, "vector field channels");
  ScalarField m(f.w(), f.h());
  for (std::size_t i = 0; i < m.size(); ++i)
    m.v[i] = std::sqrt(f.c11.v[i] * f.c11.v[i] + f.c12.v[i] * f.c12.v[i] +
                       f.c21.v[i] * f.c21.v[i] + f.c22.v[i] * f.c22.v[i]);
  return m;
}

double inf_norm(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

double inf_norm(const VectorField2& f) { return inf_norm(pointwise_magnitude(f)); }

double inf_norm(const VectorField4& f) { return inf_norm(pointwise_magnitude(f)); }

double l1_norm(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.v) s += std::fabs(x);
  return s;
}

double l1_norm(const VectorField2& f) {
  double s = 0.0;
  const ScalarField m = pointwise_magnitude(f);
  for (double x : m.v) s += x;
  return s;
}

double l1_norm(const VectorField4& f) {
  double s = 0.0;
  const ScalarField m = pointwise_magnitude(f);
  for (double x : m.v) s += x;
  return s;
}

double inner_product(const ScalarField& a, const ScalarField& b) {
  require_same_shape(a, b, "inner product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

double inner_product(const VectorField2& a, const VectorField2& b) {
  return inner_product(a.c1, b.c1) + inner_product(a.c2, b.c2);
}

double inner_product(const VectorField4& a, const VectorField4& b) {
  return inner_product(a.c11, b.c11) + inner_product(a.c12, b.c12) +
         inner_product(a.c21, b.c21) + inner_product(a.c22, b.c22);
}

}  // namespace tvflow
