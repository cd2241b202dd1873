#pragma once

#include "tvflow/field.hpp"
#include "tvflow/operators.hpp"

namespace tvflow {

// Pointwise radial projections onto the dual balls: x / max(1, |x|/radius)
// with |x| the per-pixel Euclidean magnitude across the coupled channels.
// Radius is lambda for s and 1 for p and q.
void project_s_inplace(ScalarField& s, double lambda);
void project_p_inplace(ScalarField& px, ScalarField& py);
void project_q_inplace(ScalarField& q11, ScalarField& q12, ScalarField& q21, ScalarField& q22);

ScalarField project_s(const ScalarField& s, double lambda);
VectorField2 project_p(const VectorField2& p);
VectorField4 project_q(const VectorField4& q);
void project_q_pair(VectorField2& q1, VectorField2& q2);

// Output of the data-term resolvent. theta is the bounded multiplier
// attached to the linearized residual; at a fixed point it coincides with
// the dual variable s.
struct ResolventResult {
  ScalarField w;
  FlowField d;
  ScalarField theta;
};

// Pointwise minimizer of  lambda*|rho(w', d')| + (1/(2*sigma))*|(w',d') - (w,d)|^2
// with rho(w', d') = Ix*u' + Iy*v' + beta*w' + It. With e = (beta, Ix, Iy) and
// rho~ = rho(w, d) the closed form shifts along e:
//   rho~ < -sigma*lambda*|e|^2 : add      sigma*lambda*e
//   rho~ >  sigma*lambda*|e|^2 : subtract sigma*lambda*e
//   otherwise                  : subtract (rho~/|e|^2)*e   (rho becomes 0)
// Pixels with |e| = 0 pass through unchanged.
ResolventResult resolvent_F(const ScalarField& w, const FlowField& d, double sigma,
                            double lambda, const ImageData& data);

}  // namespace tvflow
