#include "tvflow/solvers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "tvflow/prox.hpp"

namespace tvflow {

namespace {

// Tentative gradient-block update for p followed by its ball projection:
//   p <- Pp[(I - (1/a) grad div) p + (1/a)(grad w / c - beta grad s)]
// using grad div = -grad grad^T on the 2-channel fields.
void update_p(SolverState& st, const SolverConfig& cfg) {
  const ScalarField dp = divergence(st.p);
  const VectorField2 gdp = gradient(dp);
  const VectorField2 gw = gradient(st.w);
  const VectorField2 gs = gradient(st.s);
  const double inv_a = 1.0 / cfg.a;
  const double inv_c = 1.0 / cfg.c;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    st.p.c1.v[i] += inv_a * (gdp.c1.v[i] + inv_c * gw.c1.v[i] - cfg.beta * gs.c1.v[i]);
    st.p.c2.v[i] += inv_a * (gdp.c2.v[i] + inv_c * gw.c2.v[i] - cfg.beta * gs.c2.v[i]);
  }
  project_p_inplace(st.p.c1, st.p.c2);
}

// Tentative updates for the two q blocks, then the joint 4-channel
// projection that couples them:
//   q1 <- (I - (1/a) grad div) q1 + (1/a)(grad u / c - grad(s Ix))
//   q2 <- (I - (1/a) grad div) q2 + (1/a)(grad v / c - grad(s Iy))
void update_q(SolverState& st, const SolverConfig& cfg, const ImageData& data) {
  const ScalarField d1 = divergence(st.q1);
  const ScalarField d2 = divergence(st.q2);
  const VectorField2 g1 = gradient(d1);
  const VectorField2 g2 = gradient(d2);
  const VectorField2 gu = gradient(st.u);
  const VectorField2 gv = gradient(st.v);

  ScalarField sIx(st.width(), st.height());
  ScalarField sIy(st.width(), st.height());
  for (std::size_t i = 0; i < sIx.size(); ++i) {
    sIx.v[i] = st.s.v[i] * data.Ix.v[i];
    sIy.v[i] = st.s.v[i] * data.Iy.v[i];
  }
  const VectorField2 gsx = gradient(sIx);
  const VectorField2 gsy = gradient(sIy);

  const double inv_a = 1.0 / cfg.a;
  const double inv_c = 1.0 / cfg.c;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    st.q1.c1.v[i] += inv_a * (g1.c1.v[i] + inv_c * gu.c1.v[i] - gsx.c1.v[i]);
    st.q1.c2.v[i] += inv_a * (g1.c2.v[i] + inv_c * gu.c2.v[i] - gsx.c2.v[i]);
    st.q2.c1.v[i] += inv_a * (g2.c1.v[i] + inv_c * gv.c1.v[i] - gsy.c1.v[i]);
    st.q2.c2.v[i] += inv_a * (g2.c2.v[i] + inv_c * gv.c2.v[i] - gsy.c2.v[i]);
  }
  project_q_inplace(st.q1.c1, st.q1.c2, st.q2.c1, st.q2.c2);
}

void check_state(const SolverState& st, const ImageData& data) {
  require_same_shape(st.s, data.It, "solver state vs image data");
  require_same_shape(st.s, st.w, "solver state fields");
}

// One half-pass over one color class of the 5-point stencil of
// T = I + st * grad^T grad. Sites of equal color are mutually independent.
void rb_half(ScalarField& x, const ScalarField& b, double st, int color) {
  const int W = x.w, H = x.h;
  for (int y = 0; y < H; ++y) {
    for (int xx = (y + color) % 2; xx < W; xx += 2) {
      double nb = 0.0;
      int deg = 0;
      if (xx > 0) { nb += x.at(xx - 1, y); ++deg; }
      if (xx < W - 1) { nb += x.at(xx + 1, y); ++deg; }
      if (y > 0) { nb += x.at(xx, y - 1); ++deg; }
      if (y < H - 1) { nb += x.at(xx, y + 1); ++deg; }
      x.at(xx, y) = (b.at(xx, y) + st * nb) / (1.0 + st * deg);
    }
  }
}

}  // namespace

SolverState::SolverState(int width, int height)
    : w(width, height), u(width, height), v(width, height), s(width, height),
      p(width, height), q1(width, height), q2(width, height),
      wb(width, height), ub(width, height), vb(width, height),
      pb(width, height), qb1(width, height), qb2(width, height) {}

const char* solver_kind_name(SolverKind k) {
  switch (k) {
    case SolverKind::pADMM: return "pADMM";
    case SolverKind::rpADMMI: return "rpADMMI";
    case SolverKind::rpADMMII: return "rpADMMII";
    case SolverKind::ZachPADMM: return "Zach-pADMM";
    case SolverKind::pDR: return "pDR";
  }
  return "?";
}

SolverKind parse_solver_kind(const std::string& name) {
  std::string s;
  for (char ch : name)
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(ch)));
  if (s == "padmm") return SolverKind::pADMM;
  if (s == "rpadmmi" || s == "rpadmm1") return SolverKind::rpADMMI;
  if (s == "rpadmmii" || s == "rpadmm2") return SolverKind::rpADMMII;
  if (s == "zachpadmm" || s == "zach") return SolverKind::ZachPADMM;
  if (s == "pdr") return SolverKind::pDR;
  throw ConfigError("unknown solver kind \"" + name +
                    "\" (expected pADMM, rpADMMI, rpADMMII, Zach-pADMM, or pDR)");
}

std::pair<double, double> step_size_bounds(const ImageData& data) {
  const double ms = inf_norm(data.Ms);
  return {8.0, ms > 0.0 ? ms : 1.0};
}

SolverConfig resolve_config(SolverKind kind, const SolverConfig& cfg0, const ImageData& data) {
  SolverConfig cfg = cfg0;
  if (!(cfg.lambda > 0.0))
    throw ConfigError("lambda = " + std::to_string(cfg.lambda) +
                      " outside the admissible range (0, inf)");
  if (cfg.beta < 0.0)
    throw ConfigError("beta = " + std::to_string(cfg.beta) + " must be >= 0");
  if (cfg.beta != data.beta)
    throw ConfigError("beta = " + std::to_string(cfg.beta) +
                      " disagrees with the image data (built with beta = " +
                      std::to_string(data.beta) + ")");
  if (cfg.max_iters < 1)
    throw ConfigError("max_iters = " + std::to_string(cfg.max_iters) + " must be >= 1");
  if (!(cfg.tol >= 0.0))
    throw ConfigError("tol = " + std::to_string(cfg.tol) + " must be >= 0");

  if (kind == SolverKind::pDR) {
    if (!(cfg.sigma > 0.0))
      throw ConfigError("sigma = " + std::to_string(cfg.sigma) +
                        " outside the admissible range (0, inf)");
    if (!(cfg.tau > 0.0))
      throw ConfigError("tau = " + std::to_string(cfg.tau) +
                        " outside the admissible range (0, inf)");
    if (cfg.srbgs_sweeps < 1)
      throw ConfigError("srbgs_sweeps = " + std::to_string(cfg.srbgs_sweeps) +
                        " must be >= 1");
    return cfg;
  }

  if (!(cfg.c > 0.0))
    throw ConfigError("step size c = " + std::to_string(cfg.c) +
                      " outside the admissible range (0, inf)");
  const auto [a_min, at_auto] = step_size_bounds(data);
  if (cfg.a < a_min - 1e-12)
    throw ConfigError("preconditioner weight a = " + std::to_string(cfg.a) +
                      " below the operator norm bound " + std::to_string(a_min));
  if (cfg.a_tilde <= 0.0) cfg.a_tilde = at_auto;
  const double ms_max = inf_norm(data.Ms);
  if (cfg.a_tilde < ms_max - 1e-12)
    throw ConfigError("preconditioner weight a_tilde = " + std::to_string(cfg.a_tilde) +
                      " below max Ms = " + std::to_string(ms_max));

  const double golden = 0.5 * (std::sqrt(5.0) + 1.0);
  switch (kind) {
    case SolverKind::pADMM:
      cfg.r = 1.0;
      break;
    case SolverKind::rpADMMI:
      if (!(cfg.r > 0.0 && cfg.r < golden))
        throw ConfigError("relaxation r = " + std::to_string(cfg.r) +
                          " outside the admissible range (0, (sqrt(5)+1)/2)");
      break;
    case SolverKind::rpADMMII:
      if (!(cfg.rho > 0.0 && cfg.rho < 2.0))
        throw ConfigError("relaxation rho = " + std::to_string(cfg.rho) +
                          " outside the admissible range (0, 2)");
      break;
    case SolverKind::ZachPADMM:
      if (cfg.beta != 0.0)
        throw ConfigError("Zach-pADMM requires beta = 0, got beta = " +
                          std::to_string(cfg.beta));
      break;
    default:
      break;
  }
  return cfg;
}

void rpadmm1_step(SolverState& st, const SolverConfig& cfg0, const ImageData& data) {
  const SolverConfig cfg = resolve_config(SolverKind::rpADMMI, cfg0, data);
  check_state(st, data);

  update_p(st, cfg);
  update_q(st, cfg, data);

  const ScalarField dp = divergence(st.p);
  const ScalarField d1 = divergence(st.q1);
  const ScalarField d2 = divergence(st.q2);

  const double at = cfg.a_tilde, c = cfg.c, beta = cfg.beta, lambda = cfg.lambda;
  const double rc = cfg.r * c;
  const double inv_atc = 1.0 / (at * c);
  for (std::size_t i = 0; i < dp.size(); ++i) {
    const double ix = data.Ix.v[i], iy = data.Iy.v[i];
    double s_new = (1.0 - data.Ms.v[i] / at) * st.s.v[i] +
                   inv_atc * (data.It.v[i] + beta * st.w.v[i] + ix * st.u.v[i] +
                              iy * st.v.v[i] +
                              c * (beta * dp.v[i] + ix * d1.v[i] + iy * d2.v[i]));
    s_new = std::clamp(s_new, -lambda, lambda);
    st.s.v[i] = s_new;
    st.w.v[i] -= rc * (beta * s_new - dp.v[i]);
    st.u.v[i] -= rc * (ix * s_new - d1.v[i]);
    st.v.v[i] -= rc * (iy * s_new - d2.v[i]);
  }
}

void rpadmm2_step(SolverState& st, const SolverConfig& cfg0, const ImageData& data) {
  const SolverConfig cfg = resolve_config(SolverKind::rpADMMII, cfg0, data);
  check_state(st, data);

  update_p(st, cfg);
  update_q(st, cfg, data);

  const ScalarField dp = divergence(st.p);
  const ScalarField d1 = divergence(st.q1);
  const ScalarField d2 = divergence(st.q2);

  const double at = cfg.a_tilde, c = cfg.c, beta = cfg.beta, lambda = cfg.lambda;
  const double rho = cfg.rho;
  const double inv_atc = 1.0 / (at * c);
  for (std::size_t i = 0; i < dp.size(); ++i) {
    const double ix = data.Ix.v[i], iy = data.Iy.v[i];
    const double s_old = st.s.v[i];
    double s_new = (1.0 - rho * data.Ms.v[i] / at) * s_old +
                   inv_atc * (data.It.v[i] + beta * st.w.v[i] + ix * st.u.v[i] +
                              iy * st.v.v[i]) +
                   (rho / at) * (beta * dp.v[i] + ix * d1.v[i] + iy * d2.v[i]);
    s_new = std::clamp(s_new, -lambda, lambda);
    st.s.v[i] = s_new;
    st.w.v[i] -= c * (beta * s_new - rho * dp.v[i] - (1.0 - rho) * beta * s_old);
    st.u.v[i] -= c * (ix * s_new - rho * d1.v[i] - (1.0 - rho) * ix * s_old);
    st.v.v[i] -= c * (iy * s_new - rho * d2.v[i] - (1.0 - rho) * iy * s_old);
  }
}

void zach_padmm_step(SolverState& st, const SolverConfig& cfg0, const ImageData& data) {
  const SolverConfig cfg = resolve_config(SolverKind::ZachPADMM, cfg0, data);
  check_state(st, data);

  update_q(st, cfg, data);

  const ScalarField d1 = divergence(st.q1);
  const ScalarField d2 = divergence(st.q2);

  const double at = cfg.a_tilde, c = cfg.c, lambda = cfg.lambda;
  const double inv_atc = 1.0 / (at * c);
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const double ix = data.Ix.v[i], iy = data.Iy.v[i];
    double s_new = (1.0 - data.Ms.v[i] / at) * st.s.v[i] +
                   inv_atc * (data.It.v[i] + ix * st.u.v[i] + iy * st.v.v[i] +
                              c * (ix * d1.v[i] + iy * d2.v[i]));
    s_new = std::clamp(s_new, -lambda, lambda);
    st.s.v[i] = s_new;
    st.u.v[i] -= c * (ix * s_new - d1.v[i]);
    st.v.v[i] -= c * (iy * s_new - d2.v[i]);
  }
}

ScalarField srbgs_apply(const ScalarField& x0, const ScalarField& b, double sigma_tau,
                        int sweeps) {
  require_same_shape(x0, b, "srbgs");
  if (sweeps < 1)
    throw ConfigError("srbgs_sweeps = " + std::to_string(sweeps) + " must be >= 1");
  ScalarField x = x0;
  for (int k = 0; k < sweeps; ++k) {
    rb_half(x, b, sigma_tau, 0);
    rb_half(x, b, sigma_tau, 1);
    rb_half(x, b, sigma_tau, 1);
    rb_half(x, b, sigma_tau, 0);
  }
  return x;
}

void pdr_step(SolverState& st, const SolverConfig& cfg0, const ImageData& data) {
  const SolverConfig cfg = resolve_config(SolverKind::pDR, cfg0, data);
  check_state(st, data);

  const double sg = cfg.sigma, tau = cfg.tau;
  const double st_prod = sg * tau;
  const std::size_t n = st.s.size();

  // Inexact primal solves: x <- x + M^{-1}(xbar + sigma*div(ybar) - T x).
  {
    ScalarField bw = divergence(st.pb);
    ScalarField bu = divergence(st.qb1);
    ScalarField bv = divergence(st.qb2);
    for (std::size_t i = 0; i < n; ++i) {
      bw.v[i] = st.wb.v[i] + sg * bw.v[i];
      bu.v[i] = st.ub.v[i] + sg * bu.v[i];
      bv.v[i] = st.vb.v[i] + sg * bv.v[i];
    }
    st.w = srbgs_apply(st.w, bw, st_prod, cfg.srbgs_sweeps);
    st.u = srbgs_apply(st.u, bu, st_prod, cfg.srbgs_sweeps);
    st.v = srbgs_apply(st.v, bv, st_prod, cfg.srbgs_sweeps);
  }

  // Reflected resolvent of the data term at 2x - xbar; its bounded
  // multiplier is the recovered dual s.
  {
    ScalarField rw(st.width(), st.height());
    FlowField rd(st.width(), st.height());
    for (std::size_t i = 0; i < n; ++i) {
      rw.v[i] = 2.0 * st.w.v[i] - st.wb.v[i];
      rd.u.v[i] = 2.0 * st.u.v[i] - st.ub.v[i];
      rd.v.v[i] = 2.0 * st.v.v[i] - st.vb.v[i];
    }
    ResolventResult res = resolvent_F(rw, rd, sg, cfg.lambda, data);
    for (std::size_t i = 0; i < n; ++i) {
      st.wb.v[i] += res.w.v[i] - st.w.v[i];
      st.ub.v[i] += res.d.u.v[i] - st.u.v[i];
      st.vb.v[i] += res.d.v.v[i] - st.v.v[i];
    }
    st.s = std::move(res.theta);
  }

  // Reflected ball projections of the dual bars at ybar + 2*tau*grad(x);
  // the projected points are the recovered duals p and q.
  {
    const VectorField2 gw = gradient(st.w);
    const VectorField2 gu = gradient(st.u);
    const VectorField2 gv = gradient(st.v);

    VectorField2 ap(st.width(), st.height());
    for (std::size_t i = 0; i < n; ++i) {
      ap.c1.v[i] = st.pb.c1.v[i] + 2.0 * tau * gw.c1.v[i];
      ap.c2.v[i] = st.pb.c2.v[i] + 2.0 * tau * gw.c2.v[i];
    }
    project_p_inplace(ap.c1, ap.c2);
    for (std::size_t i = 0; i < n; ++i) {
      st.pb.c1.v[i] = ap.c1.v[i] - tau * gw.c1.v[i];
      st.pb.c2.v[i] = ap.c2.v[i] - tau * gw.c2.v[i];
    }
    st.p = std::move(ap);

    VectorField2 a1(st.width(), st.height());
    VectorField2 a2(st.width(), st.height());
    for (std::size_t i = 0; i < n; ++i) {
      a1.c1.v[i] = st.qb1.c1.v[i] + 2.0 * tau * gu.c1.v[i];
      a1.c2.v[i] = st.qb1.c2.v[i] + 2.0 * tau * gu.c2.v[i];
      a2.c1.v[i] = st.qb2.c1.v[i] + 2.0 * tau * gv.c1.v[i];
      a2.c2.v[i] = st.qb2.c2.v[i] + 2.0 * tau * gv.c2.v[i];
    }
    project_q_inplace(a1.c1, a1.c2, a2.c1, a2.c2);
    for (std::size_t i = 0; i < n; ++i) {
      st.qb1.c1.v[i] = a1.c1.v[i] - tau * gu.c1.v[i];
      st.qb1.c2.v[i] = a1.c2.v[i] - tau * gu.c2.v[i];
      st.qb2.c1.v[i] = a2.c1.v[i] - tau * gv.c1.v[i];
      st.qb2.c2.v[i] = a2.c2.v[i] - tau * gv.c2.v[i];
    }
    st.q1 = std::move(a1);
    st.q2 = std::move(a2);
  }
}

double primal_energy(const ScalarField& w, const FlowField& d, double lambda,
                     const ImageData& data) {
  require_same_shape(w, data.It, "energy fields vs image data");
  require_same_shape(w, d.u, "energy fields");
  const VectorField2 gw = gradient(w);
  const VectorField2 gu = gradient(d.u);
  const VectorField2 gv = gradient(d.v);
  double tv_w = 0.0, tv_d = 0.0, fid = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    tv_w += std::sqrt(gw.c1.v[i] * gw.c1.v[i] + gw.c2.v[i] * gw.c2.v[i]);
    tv_d += std::sqrt(gu.c1.v[i] * gu.c1.v[i] + gu.c2.v[i] * gu.c2.v[i] +
                      gv.c1.v[i] * gv.c1.v[i] + gv.c2.v[i] * gv.c2.v[i]);
    fid += std::fabs(data.Ix.v[i] * d.u.v[i] + data.Iy.v[i] * d.v.v[i] +
                     data.beta * w.v[i] + data.It.v[i]);
  }
  return tv_w + tv_d + lambda * fid;
}

double dual_objective(const ScalarField& s, const ImageData& data) {
  return inner_product(data.It, s);
}

std::array<double, 3> residuals(const SolverState& st, const ImageData& data) {
  check_state(st, data);
  const ScalarField dp = divergence(st.p);
  const ScalarField d1 = divergence(st.q1);
  const ScalarField d2 = divergence(st.q2);
  std::array<double, 3> r{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < dp.size(); ++i) {
    r[0] = std::max(r[0], std::fabs(data.beta * st.s.v[i] - dp.v[i]));
    r[1] = std::max(r[1], std::fabs(data.Ix.v[i] * st.s.v[i] - d1.v[i]));
    r[2] = std::max(r[2], std::fabs(data.Iy.v[i] * st.s.v[i] - d2.v[i]));
  }
  return r;
}

double max_residual(const SolverState& st, const ImageData& data) {
  const auto r = residuals(st, data);
  return std::max(r[0], std::max(r[1], r[2]));
}

SolveStats run_solver(SolverKind kind, SolverState& st, const SolverConfig& cfg0,
                      const ImageData& data) {
  const SolverConfig cfg = resolve_config(kind, cfg0, data);
  SolveStats stats;
  for (int it = 0; it < cfg.max_iters; ++it) {
    switch (kind) {
      case SolverKind::pADMM:
      case SolverKind::rpADMMI:
        rpadmm1_step(st, cfg, data);
        break;
      case SolverKind::rpADMMII:
        rpadmm2_step(st, cfg, data);
        break;
      case SolverKind::ZachPADMM:
        zach_padmm_step(st, cfg, data);
        break;
      case SolverKind::pDR:
        pdr_step(st, cfg, data);
        break;
    }
    stats.iters = it + 1;
    stats.residual = max_residual(st, data);
    if (stats.residual < cfg.tol) break;
  }
  return stats;
}

}  // namespace tvflow
