#pragma once

#include <array>
#include <string>
#include <utility>

#include "tvflow/field.hpp"
#include "tvflow/operators.hpp"

namespace tvflow {

// One fixed-point iteration family per kind, all solving the dual of
//   min  |grad w|_1 + |grad d|_1 + lambda*|rho(w, d)|_1
// at a single pyramid level:
//   pADMM     preconditioned ADMM (rpADMMI with r = 1)
//   rpADMMI   relaxed multiplier step, r in (0, (sqrt(5)+1)/2)
//   rpADMMII  relaxed dual step, rho in (0, 2)
//   ZachPADMM beta = 0 model without the w and p fields
//   pDR       preconditioned Douglas-Rachford with SRBGS inner solves
enum class SolverKind { pADMM, rpADMMI, rpADMMII, ZachPADMM, pDR };

const char* solver_kind_name(SolverKind k);
SolverKind parse_solver_kind(const std::string& name);  // ConfigError on unknown names

struct SolverConfig {
  double lambda = 40.0;  // data-term weight, > 0
  double beta = 0.05;    // illumination coupling, >= 0
  double c = 0.05;       // ADMM step size, > 0
  double a = 8.0;        // gradient-block preconditioner weight, >= ||grad div|| = 8
  double a_tilde = 0.0;  // data-block weight, >= max Ms; <= 0 derives it from the data
  double r = 1.618;      // rpADMMI relaxation
  double rho = 1.9;      // rpADMMII relaxation
  double sigma = 2.0;    // pDR primal step, > 0
  double tau = 0.4;      // pDR dual step, > 0
  int srbgs_sweeps = 2;  // symmetric red-black Gauss-Seidel passes per pDR iteration
  int max_iters = 300;
  double tol = 1e-4;     // stop once the max constraint residual drops below tol
};

// Dual iterates plus Lagrangian multipliers. The multipliers (w, u, v)
// converge to the primal solution. Ball feasibility holds after every step:
// |s| <= lambda, |p| <= 1 and |(q1, q2)| <= 1 pointwise. The fields suffixed
// b are the reflected auxiliaries used only by pDR.
struct SolverState {
  ScalarField w, u, v;
  ScalarField s;
  VectorField2 p;
  VectorField2 q1, q2;

  ScalarField wb, ub, vb;
  VectorField2 pb, qb1, qb2;

  SolverState() = default;
  SolverState(int width, int height);

  int width() const { return s.w; }
  int height() const { return s.h; }
};

// (a, a_tilde) = (8, max over pixels of Ms); a_tilde falls back to 1 on
// identically zero Ms so that the s-update stays well defined.
std::pair<double, double> step_size_bounds(const ImageData& data);

// Validates cfg for the kind, resolving a_tilde from the data when it is
// auto and forcing r = 1 for pADMM. Throws ConfigError naming the violated
// bound otherwise.
SolverConfig resolve_config(SolverKind kind, const SolverConfig& cfg, const ImageData& data);

void rpadmm1_step(SolverState& st, const SolverConfig& cfg, const ImageData& data);
void rpadmm2_step(SolverState& st, const SolverConfig& cfg, const ImageData& data);
void zach_padmm_step(SolverState& st, const SolverConfig& cfg, const ImageData& data);
void pdr_step(SolverState& st, const SolverConfig& cfg, const ImageData& data);

// Runs `sweeps` symmetric red-black Gauss-Seidel passes (red, black, black,
// red) on (I + sigma_tau * grad^T grad) x = b starting from x. The induced
// preconditioner M satisfies M >= I + sigma_tau * grad^T grad.
ScalarField srbgs_apply(const ScalarField& x, const ScalarField& b, double sigma_tau,
                        int sweeps);

double primal_energy(const ScalarField& w, const FlowField& d, double lambda,
                     const ImageData& data);
double dual_objective(const ScalarField& s, const ImageData& data);  // <It, s>

// Inf-norms of the three dual constraint fields
//   beta*s - div p,  Ix*s - div q1,  Iy*s - div q2.
std::array<double, 3> residuals(const SolverState& st, const ImageData& data);
double max_residual(const SolverState& st, const ImageData& data);

struct SolveStats {
  int iters = 0;
  double residual = 0.0;
};

SolveStats run_solver(SolverKind kind, SolverState& st, const SolverConfig& cfg,
                      const ImageData& data);

}  // namespace tvflow
