#pragma once

#include <vector>

#include "tvflow/field.hpp"

namespace tvflow {

// Linearized data-term coefficients at one pyramid level. Ix, Iy are spatial
// derivatives of the warped second frame, It the constant term of the
// linearization, and Ms = beta^2 + Ix^2 + Iy^2 pointwise.
struct ImageData {
  ScalarField Ix, Iy, It, Ms;
  double beta = 0.0;
};

// Forward differences with homogeneous Neumann boundary: the x-derivative is
// zero on the last column, the y-derivative on the last row.
void gradient(const ScalarField& f, ScalarField& gx, ScalarField& gy);
VectorField2 gradient(const ScalarField& f);

// Exact negative adjoint of gradient(): <grad f, v> = -<f, div v> to round-off.
void divergence(const ScalarField& vx, const ScalarField& vy, ScalarField& out);
ScalarField divergence(const VectorField2& v);

// (I + sigma_tau * grad^T grad) f; grad^T grad is the 4-neighbor graph
// Laplacian with boundary-reduced degree.
ScalarField laplacian_apply(const ScalarField& f, double sigma_tau);

// Bilinear sampling of img at (x + u, y + v), coordinates clamped to the
// image rectangle.
ScalarField warp(const ScalarField& img, const FlowField& flow);

// Warps I1 by flow0 and linearizes the residual about flow0:
//   It = warp(I1, flow0) - I0 - Ix*u0 - Iy*v0,
// so that rho(w, d) = Ix*u + Iy*v + beta*w + It holds for the total flow d.
// Ix, Iy are central differences of the warped frame (one-sided at borders).
ImageData compute_derivatives(const ScalarField& I0, const ScalarField& I1,
                              const FlowField& flow0, double beta);

ScalarField gaussian_blur(const ScalarField& img, double stddev);
ScalarField resize_bilinear(const ScalarField& img, int new_w, int new_h);

// Anti-aliased decimation: Gaussian pre-blur with stddev
// 0.8*sqrt(1/factor^2 - 1), then bilinear resampling to the rounded size.
ScalarField downsample(const ScalarField& img, double factor);

// pyr[0] is the input; pyr[k] has size round(size0 * factor^k). Throws
// ConfigError when the coarsest level would fall below 8x8.
std::vector<ScalarField> build_pyramid(const ScalarField& img, int levels, double factor);

// Bilinear enlargement; u is scaled by new_w/w and v by new_h/h so the
// displacements stay metrically consistent.
FlowField upsample_flow(const FlowField& flow, int new_w, int new_h);

// Bilinear enlargement without value scaling (intensity-like fields).
ScalarField upsample_field(const ScalarField& f, int new_w, int new_h);

}  // namespace tvflow
