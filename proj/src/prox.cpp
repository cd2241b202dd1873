#include "tvflow/prox.hpp"

#include <cmath>
#include <string>

namespace tvflow {

void project_s_inplace(ScalarField& s, double lambda) {
  if (!(lambda > 0.0))
    throw ConfigError("projection radius lambda = " + std::to_string(lambda) +
                      " must be > 0");
  for (double& x : s.v) {
    const double scale = std::max(1.0, std::fabs(x) / lambda);
    x /= scale;
  }
}

void project_p_inplace(ScalarField& px, ScalarField& py) {
  require_same_shape(px, py, "projection channels");
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double mag = std::sqrt(px.v[i] * px.v[i] + py.v[i] * py.v[i]);
    const double scale = std::max(1.0, mag);
    px.v[i] /= scale;
    py.v[i] /= scale;
  }
}

void project_q_inplace(ScalarField& q11, ScalarField& q12, ScalarField& q21, ScalarField& q22) {
  require_same_shape(q11, q22, "projection channels");
  for (std::size_t i = 0; i < q11.size(); ++i) {
    const double mag = std::sqrt(q11.v[i] * q11.v[i] + q12.v[i] * q12.v[i] +
                                 q21.v[i] * q21.v[i] + q22.v[i] * q22.v[i]);
    const double scale = std::max(1.0, mag);
    q11.v[i] /= scale;
    q12.v[i] /= scale;
    q21.v[i] /= scale;
    q22.v[i] /= scale;
  }
}

ScalarField project_s(const ScalarField& s, double lambda) {
  ScalarField out = s;
  project_s_inplace(out, lambda);
  return out;
}

VectorField2 project_p(const VectorField2& p) {
  VectorField2 out = p;
  project_p_inplace(out.c1, out.c2);
  return out;
}

VectorField4 project_q(const VectorField4& q) {
  VectorField4 out = q;
  project_q_inplace(out.c11, out.c12, out.c21, out.c22);
  return out;
}

void project_q_pair(VectorField2& q1, VectorField2& q2) {
  require_same_shape(q1.c1, q2.c1, "projection blocks");
  project_q_inplace(q1.c1, q1.c2, q2.c1, q2.c2);
}

ResolventResult resolvent_F(const ScalarField& w, const FlowField& d, double sigma,
                            double lambda, const ImageData& data) {
  if (!(sigma > 0.0))
    throw ConfigError("resolvent step sigma = " + std::to_string(sigma) + " must be > 0");
  if (!(lambda > 0.0))
    throw ConfigError("data weight lambda = " + std::to_string(lambda) + " must be > 0");
  require_same_shape(w, data.It, "resolvent input vs image data");
  require_same_shape(w, d.u, "resolvent input fields");

  ResolventResult out;
  out.w = w;
  out.d = d;
  out.theta = ScalarField(w.w, w.h);

  const double beta = data.beta;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ix = data.Ix.v[i];
    const double iy = data.Iy.v[i];
    const double e2 = data.Ms.v[i];  // |e|^2 = beta^2 + Ix^2 + Iy^2
    const double rho = ix * d.u.v[i] + iy * d.v.v[i] + beta * w.v[i] + data.It.v[i];

    if (e2 < 1e-30) {
      out.theta.v[i] = (rho > 0.0) ? lambda : (rho < 0.0 ? -lambda : 0.0);
      continue;
    }

    const double thresh = sigma * lambda * e2;
    double step;
    if (rho < -thresh) {
      step = -sigma * lambda;
      out.theta.v[i] = -lambda;
    } else if (rho > thresh) {
      step = sigma * lambda;
      out.theta.v[i] = lambda;
    } else {
      step = rho / e2;
      out.theta.v[i] = rho / (sigma * e2);
    }
    out.w.v[i] -= step * beta;
    out.d.u.v[i] -= step * ix;
    out.d.v.v[i] -= step * iy;
  }
  return out;
}

}  // namespace tvflow
