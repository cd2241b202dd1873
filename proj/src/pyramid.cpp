#include "tvflow/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tvflow/operators.hpp"

namespace tvflow {

namespace {

int auto_levels(int w, int h, double factor) {
  int levels = 1;
  double md = std::min(w, h);
  while (md * factor >= 16.0 - 1e-9) {
    md *= factor;
    ++levels;
  }
  return levels;
}

}  // namespace

FlowResult solve_flow(const ScalarField& I0, const ScalarField& I1, const PyramidConfig& cfg) {
  require_same_shape(I0, I1, "frame pair");
  if (cfg.warps_per_level < 1)
    throw ConfigError("warps_per_level = " + std::to_string(cfg.warps_per_level) +
                      " must be >= 1");
  if (!(cfg.scale_factor > 0.0 && cfg.scale_factor < 1.0))
    throw ConfigError("scale factor = " + std::to_string(cfg.scale_factor) +
                      " outside the admissible range (0, 1)");
  if (I0.w < 8 || I0.h < 8)
    throw ConfigError("image " + std::to_string(I0.w) + "x" + std::to_string(I0.h) +
                      " too small (need at least 8x8)");

  const int levels =
      cfg.levels > 0 ? cfg.levels : auto_levels(I0.w, I0.h, cfg.scale_factor);
  const std::vector<ScalarField> pyr0 = build_pyramid(I0, levels, cfg.scale_factor);
  const std::vector<ScalarField> pyr1 = build_pyramid(I1, levels, cfg.scale_factor);

  SolverState st(pyr0.back().w, pyr0.back().h);
  for (int l = levels - 1; l >= 0; --l) {
    const ScalarField& A = pyr0[l];
    const ScalarField& B = pyr1[l];

    if (l != levels - 1) {
      // Prolongate the primal fields, restart the duals from zero. The pDR
      // reflected primals start at the warm-started values so the first
      // inner solve reproduces them up to the smoothing term.
      SolverState ns(A.w, A.h);
      const FlowField up = upsample_flow(FlowField(st.u, st.v), A.w, A.h);
      ns.u = up.u;
      ns.v = up.v;
      ns.w = upsample_field(st.w, A.w, A.h);
      ns.wb = ns.w;
      ns.ub = ns.u;
      ns.vb = ns.v;
      st = std::move(ns);
    }

    for (int warp = 0; warp < cfg.warps_per_level; ++warp) {
      const ImageData data =
          compute_derivatives(A, B, FlowField(st.u, st.v), cfg.solver.beta);
      run_solver(cfg.kind, st, cfg.solver, data);
    }
  }

  for (std::size_t i = 0; i < st.s.size(); ++i) {
    if (!std::isfinite(st.u.v[i]) || !std::isfinite(st.v.v[i]) || !std::isfinite(st.w.v[i]))
      throw NumericalError("non-finite value in the estimated flow");
  }
  return FlowResult{FlowField(st.u, st.v), st.w};
}

}  // namespace tvflow
