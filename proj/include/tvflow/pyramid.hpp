#pragma once

#include "tvflow/field.hpp"
#include "tvflow/solvers.hpp"

namespace tvflow {

struct PyramidConfig {
  int levels = 0;             // <= 0 picks levels so the coarsest min dimension is ~16 px
  double scale_factor = 0.5;  // in (0, 1)
  int warps_per_level = 5;
  SolverKind kind = SolverKind::pADMM;
  SolverConfig solver;
};

struct FlowResult {
  FlowField flow;
  ScalarField w;  // illumination field; identically zero when beta = 0
};

// Coarse-to-fine estimation. Each level re-linearizes the warp residual
// warps_per_level times and runs the configured solver after each
// linearization. Primal fields are upsampled between levels (flow values
// rescaled, w kept); dual fields restart from zero. Throws ConfigError on
// invalid settings and NumericalError when the result is not finite.
FlowResult solve_flow(const ScalarField& I0, const ScalarField& I1, const PyramidConfig& cfg);

}  // namespace tvflow
