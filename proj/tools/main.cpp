// Command-line front end: single-pair estimation (run) and a sequences x
// algorithms benchmark matrix (bench).
//
// Exit codes: 0 success, 2 configuration, 3 ingestion, 4 file format,
// 5 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvflow/benchio.hpp"
#include "tvflow/errors.hpp"
#include "tvflow/pyramid.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
  std::string algorithm = "pADMM";
  double lambda = 40.0;
  double beta = 0.05;
  bool beta_set = false;
  double c = 0.05;
  double r = 1.618;
  double rho = 1.9;
  double sigma = 2.0;
  double tau = 0.4;
  double tol = 1e-4;
  double scale = 0.5;
  int levels = 0;
  int warps = 5;
  int max_iters = 300;
  int sweeps = 2;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--algorithm", o.algorithm,
                  "Solver kind: pADMM, rpADMMI, rpADMMII, Zach-pADMM, pDR")
      ->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Data-term weight")->capture_default_str();
  cmd->add_option("--beta", o.beta, "Illumination coupling (Zach-pADMM defaults to 0)")
      ->capture_default_str();
  cmd->add_option("--c", o.c, "ADMM step size")->capture_default_str();
  cmd->add_option("--r", o.r, "rpADMMI relaxation")->capture_default_str();
  cmd->add_option("--rho", o.rho, "rpADMMII relaxation")->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "pDR primal step")->capture_default_str();
  cmd->add_option("--tau", o.tau, "pDR dual step")->capture_default_str();
  cmd->add_option("--tol", o.tol, "Residual stopping tolerance")->capture_default_str();
  cmd->add_option("--scale", o.scale, "Pyramid scale factor")->capture_default_str();
  cmd->add_option("--levels", o.levels, "Pyramid levels (0 = auto)")->capture_default_str();
  cmd->add_option("--warps", o.warps, "Warps per level")->capture_default_str();
  cmd->add_option("--max-iters", o.max_iters, "Iterations per warp")->capture_default_str();
  cmd->add_option("--sweeps", o.sweeps, "SRBGS sweeps per pDR iteration")
      ->capture_default_str();
}

tvflow::PyramidConfig make_config(const CommonOpts& o) {
  tvflow::PyramidConfig cfg;
  cfg.kind = tvflow::parse_solver_kind(o.algorithm);
  cfg.levels = o.levels;
  cfg.scale_factor = o.scale;
  cfg.warps_per_level = o.warps;
  cfg.solver.lambda = o.lambda;
  cfg.solver.beta =
      (cfg.kind == tvflow::SolverKind::ZachPADMM && !o.beta_set) ? 0.0 : o.beta;
  cfg.solver.c = o.c;
  cfg.solver.r = o.r;
  cfg.solver.rho = o.rho;
  cfg.solver.sigma = o.sigma;
  cfg.solver.tau = o.tau;
  cfg.solver.srbgs_sweeps = o.sweeps;
  cfg.solver.max_iters = o.max_iters;
  cfg.solver.tol = o.tol;
  return cfg;
}

std::string data_root() {
  const char* env = std::getenv("TVFLOW_DATA_ROOT");
  return env ? env : "";
}

// Tries the path as given, then under each base directory.
std::string resolve_path(const std::string& p, const std::vector<std::string>& bases) {
  if (p.empty() || fs::path(p).is_absolute() || fs::exists(p)) return p;
  for (const std::string& base : bases) {
    if (base.empty()) continue;
    const fs::path cand = fs::path(base) / p;
    if (fs::exists(cand)) return cand.string();
  }
  return p;
}

struct RunArgs {
  std::string frame0, frame1, gt;
  std::string out = "flow.flo";
  std::string color, metrics;
  double max_mag = 0.0;
  CommonOpts opts;
};

int cmd_run(const RunArgs& a) {
  const std::vector<std::string> bases = {data_root()};
  const tvflow::ScalarField I0 = tvflow::read_gray_image(resolve_path(a.frame0, bases));
  const tvflow::ScalarField I1 = tvflow::read_gray_image(resolve_path(a.frame1, bases));

  const tvflow::PyramidConfig cfg = make_config(a.opts);

  const auto t0 = std::chrono::steady_clock::now();
  const tvflow::FlowResult fr = tvflow::solve_flow(I0, I1, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  tvflow::write_flo(a.out, fr.flow);
  if (!a.color.empty())
    tvflow::write_png_rgb(a.color, tvflow::flow_to_color(fr.flow, a.max_mag));

  json rec{{"algorithm", tvflow::solver_kind_name(cfg.kind)},
           {"frame0", a.frame0},
           {"frame1", a.frame1},
           {"width", I0.w},
           {"height", I0.h},
           {"lambda", cfg.solver.lambda},
           {"beta", cfg.solver.beta},
           {"seconds", seconds},
           {"flo", a.out}};

  std::cout << "algorithm=" << tvflow::solver_kind_name(cfg.kind) << " size=" << I0.w << "x"
            << I0.h << " seconds=" << std::fixed << std::setprecision(3) << seconds << "\n";

  if (!a.gt.empty()) {
    const tvflow::FlowField gt = tvflow::read_flo(resolve_path(a.gt, bases));
    const tvflow::EvalResult ev = tvflow::evaluate_flow(fr.flow, gt);
    std::cout << "aae_deg=" << std::setprecision(4) << ev.aae_deg
              << " epe_px=" << ev.epe_px << " valid_pixels=" << ev.valid_pixel_count
              << "\n";
    rec["gt"] = a.gt;
    rec["aae_deg"] = ev.aae_deg;
    rec["epe_px"] = ev.epe_px;
    rec["valid_pixels"] = ev.valid_pixel_count;
  }

  if (!a.metrics.empty()) {
    std::ofstream mf(a.metrics);
    if (!mf) throw tvflow::IngestionError("cannot open metrics file for writing: " + a.metrics);
    mf << rec.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// bench: flat key-value config with [global], [sequence NAME] and
// [algorithm NAME] sections.

struct BenchSequence {
  std::string name, frame0, frame1, gt;
};

struct BenchAlgorithm {
  std::string name;
  CommonOpts opts;
};

struct BenchSpec {
  std::vector<BenchSequence> sequences;
  std::vector<BenchAlgorithm> algorithms;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw tvflow::ConfigError("bad numeric value \"" + val + "\" for key " + key);
  }
}

int parse_int(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return x;
  } catch (const std::exception&) {
    throw tvflow::ConfigError("bad integer value \"" + val + "\" for key " + key);
  }
}

void apply_algorithm_key(CommonOpts& o, const std::string& key, const std::string& val) {
  if (key == "solver" || key == "algorithm") o.algorithm = val;
  else if (key == "lambda") o.lambda = parse_double(key, val);
  else if (key == "beta") { o.beta = parse_double(key, val); o.beta_set = true; }
  else if (key == "c") o.c = parse_double(key, val);
  else if (key == "r") o.r = parse_double(key, val);
  else if (key == "rho") o.rho = parse_double(key, val);
  else if (key == "sigma") o.sigma = parse_double(key, val);
  else if (key == "tau") o.tau = parse_double(key, val);
  else if (key == "tol") o.tol = parse_double(key, val);
  else if (key == "scale") o.scale = parse_double(key, val);
  else if (key == "levels") o.levels = parse_int(key, val);
  else if (key == "warps") o.warps = parse_int(key, val);
  else if (key == "max_iters") o.max_iters = parse_int(key, val);
  else if (key == "sweeps") o.sweeps = parse_int(key, val);
  else throw tvflow::ConfigError("unknown key \"" + key + "\" in algorithm section");
}

BenchSpec parse_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tvflow::IngestionError("cannot open benchmark config: " + path);

  BenchSpec spec;
  CommonOpts global;
  enum class Section { None, Global, Sequence, Algorithm };

  // First pass collects section headers and key-value pairs in order; the
  // global section applies to all algorithms, so algorithms are materialized
  // afterwards on top of the final global defaults.
  struct RawSection {
    Section kind;
    std::string name;
    std::vector<std::pair<std::string, std::string>> kv;
  };
  std::vector<RawSection> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw tvflow::ConfigError("unterminated section header at line " +
                                  std::to_string(lineno) + " of " + path);
      const std::string inner = trim(t.substr(1, t.size() - 2));
      if (inner == "global") {
        raw.push_back({Section::Global, "", {}});
      } else if (inner.rfind("sequence ", 0) == 0) {
        raw.push_back({Section::Sequence, trim(inner.substr(9)), {}});
      } else if (inner.rfind("algorithm ", 0) == 0) {
        raw.push_back({Section::Algorithm, trim(inner.substr(10)), {}});
      } else {
        throw tvflow::ConfigError("unknown section [" + inner + "] at line " +
                                  std::to_string(lineno) + " of " + path);
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw tvflow::ConfigError("expected key = value at line " + std::to_string(lineno) +
                                " of " + path);
    if (raw.empty())
      throw tvflow::ConfigError("key outside any section at line " + std::to_string(lineno) +
                                " of " + path);
    raw.back().kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }

  for (const RawSection& rs : raw)
    if (rs.kind == Section::Global)
      for (const auto& [k, v] : rs.kv) apply_algorithm_key(global, k, v);

  for (const RawSection& rs : raw) {
    if (rs.kind == Section::Sequence) {
      BenchSequence seq;
      seq.name = rs.name;
      for (const auto& [k, v] : rs.kv) {
        if (k == "frame0") seq.frame0 = v;
        else if (k == "frame1") seq.frame1 = v;
        else if (k == "gt") seq.gt = v;
        else throw tvflow::ConfigError("unknown key \"" + k + "\" in sequence " + rs.name);
      }
      if (seq.frame0.empty() || seq.frame1.empty())
        throw tvflow::ConfigError("sequence " + rs.name + " needs frame0 and frame1");
      spec.sequences.push_back(std::move(seq));
    } else if (rs.kind == Section::Algorithm) {
      BenchAlgorithm alg;
      alg.name = rs.name;
      alg.opts = global;
      alg.opts.algorithm = rs.name;
      for (const auto& [k, v] : rs.kv) apply_algorithm_key(alg.opts, k, v);
      spec.algorithms.push_back(std::move(alg));
    }
  }
  return spec;
}

struct BenchCell {
  bool ok = false;
  bool evaluated = false;
  double aae = 0.0, epe = 0.0, seconds = 0.0;
  std::string error;
};

int cmd_bench(const std::string& cfg_path, const std::string& report_path) {
  const BenchSpec spec = parse_bench_config(cfg_path);
  const std::string cfg_dir = fs::path(cfg_path).parent_path().string();
  const std::vector<std::string> bases = {data_root(), cfg_dir};

  std::vector<std::vector<BenchCell>> cells(
      spec.sequences.size(), std::vector<BenchCell>(spec.algorithms.size()));

  for (std::size_t si = 0; si < spec.sequences.size(); ++si) {
    const BenchSequence& seq = spec.sequences[si];
    tvflow::ScalarField I0, I1;
    std::optional<tvflow::FlowField> gt;
    try {
      I0 = tvflow::read_gray_image(resolve_path(seq.frame0, bases));
      I1 = tvflow::read_gray_image(resolve_path(seq.frame1, bases));
      if (!seq.gt.empty()) gt = tvflow::read_flo(resolve_path(seq.gt, bases));
    } catch (const std::exception& e) {
      for (auto& cell : cells[si]) cell.error = e.what();
      continue;
    }

    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      BenchCell& cell = cells[si][ai];
      try {
        const tvflow::PyramidConfig cfg = make_config(spec.algorithms[ai].opts);
        const auto t0 = std::chrono::steady_clock::now();
        const tvflow::FlowResult fr = tvflow::solve_flow(I0, I1, cfg);
        cell.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (gt) {
          const tvflow::EvalResult ev = tvflow::evaluate_flow(fr.flow, *gt);
          cell.aae = ev.aae_deg;
          cell.epe = ev.epe_px;
          cell.evaluated = true;
        }
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }

  // Per-sequence best values get a trailing '*'.
  std::ostringstream rep;
  rep << std::left << std::setw(16) << "sequence" << std::setw(12) << "algorithm"
      << std::setw(10) << "aae_deg" << std::setw(10) << "epe_px" << std::setw(10)
      << "seconds" << "status\n";
  for (std::size_t si = 0; si < spec.sequences.size(); ++si) {
    int best_aae = -1, best_epe = -1;
    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      const BenchCell& cell = cells[si][ai];
      if (!cell.ok || !cell.evaluated) continue;
      if (best_aae < 0 || cell.aae < cells[si][best_aae].aae) best_aae = static_cast<int>(ai);
      if (best_epe < 0 || cell.epe < cells[si][best_epe].epe) best_epe = static_cast<int>(ai);
    }
    for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai) {
      const BenchCell& cell = cells[si][ai];
      rep << std::left << std::setw(16) << spec.sequences[si].name << std::setw(12)
          << spec.algorithms[ai].name;
      auto num = [&](double x, bool best) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(3) << x << (best ? "*" : "");
        return os.str();
      };
      if (cell.ok && cell.evaluated) {
        rep << std::setw(10) << num(cell.aae, static_cast<int>(ai) == best_aae)
            << std::setw(10) << num(cell.epe, static_cast<int>(ai) == best_epe);
      } else {
        rep << std::setw(10) << "-" << std::setw(10) << "-";
      }
      if (cell.ok) {
        rep << std::setw(10) << num(cell.seconds, false) << "ok";
      } else {
        rep << std::setw(10) << "-" << "failed: " << cell.error;
      }
      rep << "\n";
    }
  }

  std::cout << rep.str();
  if (!report_path.empty()) {
    std::ofstream rf(report_path);
    if (!rf) throw tvflow::IngestionError("cannot open report file for writing: " + report_path);
    rf << rep.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TV-L1 optical flow with illumination estimation via dual splitting solvers"};
  app.require_subcommand(1);

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Estimate flow for one frame pair");
  run->add_option("--frame0", ra.frame0, "First frame (PGM or PNG)")->required();
  run->add_option("--frame1", ra.frame1, "Second frame (PGM or PNG)")->required();
  run->add_option("--gt", ra.gt, "Ground-truth .flo to evaluate against");
  run->add_option("-o,--out", ra.out, "Output .flo path")->capture_default_str();
  run->add_option("--color", ra.color, "Write a color-coded PNG to this path");
  run->add_option("--metrics", ra.metrics, "Write a JSON metrics record to this path");
  run->add_option("--max-mag", ra.max_mag, "Color-coding magnitude cap (0 = auto)")
      ->capture_default_str();
  add_common_options(run, ra.opts);

  std::string bench_cfg, bench_out;
  CLI::App* bench = app.add_subcommand("bench", "Run a sequences x algorithms matrix");
  bench->add_option("--config", bench_cfg, "Benchmark matrix config file")->required();
  bench->add_option("--out", bench_out, "Also write the report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      ra.opts.beta_set = run->count("--beta") > 0;
      return cmd_run(ra);
    }
    return cmd_bench(bench_cfg, bench_out);
  } catch (const tvflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tvflow::IngestionError& e) {
    std::cerr << "ingestion error: " << e.what() << "\n";
    return 3;
  } catch (const tvflow::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const tvflow::EvalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 5;
  } catch (const tvflow::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 5;
  } catch (const tvflow::DimensionError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
