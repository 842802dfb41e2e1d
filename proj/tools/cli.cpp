#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>

#include "oracles.hpp"
#include "structflow/cur.hpp"
#include "structflow/duality.hpp"
#include "structflow/generator.hpp"
#include "structflow/io.hpp"
#include "structflow/prox.hpp"
#include "structflow/random.hpp"
#include "structflow/solvers.hpp"

namespace structflow::cli {

namespace {

namespace fs = std::filesystem;

// Where a group structure comes from: a file or one of the builders.
struct GroupSource {
  std::string file;
  std::size_t windows = 0;
  std::size_t grid = 0;
  bool cyclic = false;
  bool singletons = false;

  void add_options(CLI::App* app) {
    app->add_option("--groups", file, "Group file ('weight idx...' per line, one-based)");
    app->add_option("--windows", windows, "Sliding windows of this width");
    app->add_option("--grid", grid, "k x k squares on the grid_shape(p) layout");
    app->add_flag("--cyclic", cyclic, "Wrap --grid squares around the borders");
    app->add_flag("--singletons", singletons, "One group per coordinate (l1 norm)");
  }

  GroupStructure build(std::size_t p) const {
    const int chosen = !file.empty() + (windows > 0) + (grid > 0) + singletons;
    if (chosen != 1) {
      throw std::invalid_argument("give exactly one of --groups, --windows, --grid, --singletons");
    }
    if (!file.empty()) return io::read_groups_file(file, p);
    if (windows > 0) return make_sliding_windows(p, windows);
    if (singletons) return make_singletons(p);
    const auto [h, w] = grid_shape(p);
    return make_grid_squares(h, w, grid, cyclic);
  }
};

NormKind parse_norm(const std::string& name) {
  if (name == "linf") return NormKind::kLinf;
  if (name == "l2") return NormKind::kL2;
  throw std::invalid_argument("unknown norm '" + name + "' (linf or l2)");
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <class F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(f);
}

struct GenSpec {
  std::uint64_t seed = 1;
  std::size_t n = 100;
  std::size_t p = 1000;
  std::string family = "windows3";
  double sparsity = 0.2;
  double noise = 0.01;

  void add_options(CLI::App* app) {
    app->add_option("--seed", seed, "Generator seed");
    app->add_option("--n", n, "Number of samples");
    app->add_option("--p", p, "Number of variables");
    app->add_option("--family", family, "windows3 or grid3x3");
    app->add_option("--sparsity", sparsity, "Fraction of non-zero coefficients");
    app->add_option("--noise", noise, "Noise variance as a fraction of ||Xw0||^2");
  }

  GeneratedProblem generate() const {
    return gen_problem(seed, n, p, parse_group_family(family), sparsity, noise);
  }
};

// Problem given either by files or by the generator.
struct ProblemSpec {
  GenSpec gen;
  std::string x_file, y_file, groups_file;
  std::string loss = "square";
  std::string norm = "linf";
  std::optional<double> lambda;
  double lambda_ratio = 0.1;

  void add_options(CLI::App* app) {
    gen.add_options(app);
    app->add_option("--X", x_file, "Design matrix CSV (instead of the generator)");
    app->add_option("--y", y_file, "Response vector");
    app->add_option("--groups", groups_file, "Group file");
    app->add_option("--loss", loss, "square or logistic");
    app->add_option("--norm", norm, "linf or l2");
    app->add_option("--lambda", lambda, "Regularisation weight");
    app->add_option("--lambda-ratio", lambda_ratio,
                    "Regularisation as a fraction of the smallest lambda giving w = 0");
  }

  Problem build() const {
    Eigen::MatrixXd x;
    std::vector<double> y;
    GroupStructure gs;
    if (!x_file.empty()) {
      if (y_file.empty() || groups_file.empty()) {
        throw std::invalid_argument("--X needs --y and --groups");
      }
      x = io::read_matrix_file(x_file);
      y = io::read_vector_file(y_file);
      gs = io::read_groups_file(groups_file, static_cast<std::size_t>(x.cols()));
    } else {
      if (!y_file.empty() || !groups_file.empty()) {
        throw std::invalid_argument("--y and --groups need --X; otherwise the generator is used");
      }
      auto g = gen.generate();
      x = std::move(g.X);
      y = std::move(g.y);
      gs = std::move(g.groups);
    }
    Loss l;
    if (loss == "square") {
      l = Loss::square(std::move(y));
    } else if (loss == "logistic") {
      for (double& v : y) v = v >= 0.0 ? 1.0 : -1.0;
      l = Loss::logistic(std::move(y));
    } else {
      throw std::invalid_argument("unknown loss '" + loss + "' (square or logistic)");
    }
    Problem pr{DesignMatrix(std::move(x)), std::move(l), 0.0, std::move(gs), parse_norm(norm)};
    pr.lambda = lambda ? *lambda : lambda_ratio * zero_threshold(pr);
    check_problem(pr);
    return pr;
  }
};

struct SolverSpec {
  std::string solver = "fista";
  double gap = 1e-6;
  double gamma = 1.0;
  double delta = 0.0;
  double a = 1.0;
  double b = 100.0;
  std::size_t max_iter = 10000;
  double tol = 1e-8;

  void add_options(CLI::App* app) {
    app->add_option("--gap", gap, "Duality-gap target");
    app->add_option("--gamma", gamma, "ADMM augmented-Lagrangian weight");
    app->add_option("--delta", delta, "Lin-ADMM proximity weight (0: automatic)");
    app->add_option("--a", a, "Subgradient step numerator");
    app->add_option("--b", b, "Subgradient step offset");
    app->add_option("--max-iter", max_iter, "Iteration budget");
    app->add_option("--tol", tol, "ADMM residual tolerance");
  }

  SolverResult run(const std::string& name, const Problem& pr, double seconds) const {
    if (name == "fista") {
      FistaOptions o;
      o.gap_tol = gap;
      o.max_iter = max_iter;
      o.max_seconds = seconds;
      return fista(pr, o);
    }
    if (name == "admm" || name == "lin-admm") {
      AdmmOptions o;
      o.gamma = gamma;
      o.delta = delta;
      o.max_iter = max_iter;
      o.tol = tol;
      o.gap_tol = gap;
      o.gap_every = 10;
      o.max_seconds = seconds;
      return name == "admm" ? admm_loss_split(pr, o) : admm_linearized(pr, o);
    }
    if (name == "sg") {
      SubgradientOptions o;
      o.a = a;
      o.b = b;
      o.max_iter = max_iter;
      o.max_seconds = seconds;
      o.gap_every = 10;
      return subgradient(pr, o);
    }
    throw std::invalid_argument("unknown solver '" + name + "' (fista, admm, lin-admm, sg)");
  }
};

void gen_command(const GenSpec& spec, const std::string& dir, std::ostream& out) {
  auto g = spec.generate();
  fs::create_directories(dir);
  const fs::path d(dir);
  io::write_matrix_file((d / "X.csv").string(), g.X);
  io::write_vector_file((d / "y.txt").string(), g.y);
  io::write_vector_file((d / "w0.txt").string(), g.w0);
  io::write_groups_file((d / "groups.txt").string(), g.groups);
  out << "wrote X.csv (" << g.X.rows() << "x" << g.X.cols() << "), y.txt, w0.txt, groups.txt ("
      << g.groups.size() << " groups) to " << dir << '\n';
}

void prox_command(const std::string& u_file, const GroupSource& src, double lambda,
                  const std::string& norm_name, bool certify, const std::string& out_file,
                  std::ostream& out, std::ostream& err) {
  const auto u = io::read_vector_file(u_file);
  const auto gs = src.build(u.size());
  const NormKind norm = parse_norm(norm_name);
  std::vector<double> w;
  if (norm == NormKind::kLinf) {
    ProxOptions o;
    o.certify = certify;
    auto r = prox_overlapping_linf(u, gs, lambda, o);
    if (r.certificate) {
      err << "certificate: " << (r.certificate->passed ? "passed" : "FAILED")
          << " (complementarity " << r.certificate->max_complementarity << ", reconstruction "
          << r.certificate->reconstruction_error << ")\n";
    }
    w = std::move(r.w);
  } else {
    w = prox_exact(u, gs, lambda, norm);
  }
  emit(out_file, out, [&](std::ostream& o) { io::write_vector(o, w); });
}

void solve_command(const ProblemSpec& ps, const SolverSpec& ss, const std::string& trace_file,
                   const std::string& w_file, std::ostream& out, std::ostream& err) {
  const Problem pr = ps.build();
  auto res = ss.run(ss.solver, pr, std::numeric_limits<double>::infinity());
  emit(trace_file, out, [&](std::ostream& o) { res.trace.write_csv(o); });
  if (!w_file.empty()) io::write_vector_file(w_file, res.w);
  err << ss.solver << ": " << to_string(res.trace.status) << " after " << res.trace.iterations
      << " iterations, objective " << io::format_double(objective(pr, res.w)) << ", gap "
      << io::format_double(res.trace.final_gap) << '\n';
}

void bench_command(const ProblemSpec& ps, const SolverSpec& ss, const std::vector<std::string>& solvers,
                   double budget, const std::string& out_file, std::ostream& out) {
  if (!(budget > 0.0)) throw std::invalid_argument("--budget must be positive");
  const Problem pr = ps.build();
  std::vector<std::pair<std::string, SolverResult>> runs;
  for (const auto& name : solvers) runs.emplace_back(name, ss.run(name, pr, budget));
  // Optimum proxy: the best objective seen, lowered to the best certified
  // dual value (objective minus gap) when one is available.
  double best = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  for (const auto& [name, r] : runs) {
    for (const auto& rec : r.trace.records) {
      best = std::min(best, rec.objective);
      if (!std::isnan(rec.gap) && std::isfinite(rec.gap)) lower = std::max(lower, rec.objective - rec.gap);
    }
  }
  const double opt = std::isfinite(lower) ? std::min(best, lower) : best;
  emit(out_file, out, [&](std::ostream& o) {
    o << "solver,iter,seconds,objective,distance\n";
    for (const auto& [name, r] : runs) {
      for (const auto& rec : r.trace.records) {
        o << name << ',' << rec.iter << ',' << io::format_double(rec.seconds) << ','
          << io::format_double(rec.objective) << ',' << io::format_double(rec.objective - opt) << '\n';
      }
    }
  });
}

struct CurSpec {
  std::string x_file;
  std::size_t n = 20, p = 15, rank = 2;
  double noise = 0.01;
  std::uint64_t seed = 1;
  std::vector<double> lrow, lcol;
  std::size_t grid = 0;
  double decades = 2.0;
};

void cur_command(const CurSpec& spec, const std::string& out_file, std::ostream& out) {
  const Eigen::MatrixXd x = spec.x_file.empty()
                                ? planted_cur_matrix(spec.n, spec.p, spec.rank, spec.noise, spec.seed).X
                                : io::read_matrix_file(spec.x_file);
  std::vector<double> rows = spec.lrow, cols = spec.lcol;
  if (spec.grid > 0) {
    if (!rows.empty() || !cols.empty()) throw std::invalid_argument("--grid replaces --lrow/--lcol");
    auto g = cur_grid(normalize_cur_input(x), spec.grid, spec.decades);
    rows = g.rows;
    cols = g.cols;
  }
  if (rows.empty() || cols.empty()) throw std::invalid_argument("give --lrow and --lcol, or --grid");
  emit(out_file, out, [&](std::ostream& o) {
    o << "lambda_row,lambda_col,rows,cols,variance\n";
    for (double lr : rows) {
      for (double lc : cols) {
        auto r = cur_solve(x, lr, lc);
        o << io::format_double(lr) << ',' << io::format_double(lc) << ',' << r.rows.size() << ','
          << r.cols.size() << ',' << io::format_double(r.refit_variance) << '\n';
      }
    }
  });
}

// Random covered overlapping groups drawn with SplitMix64 so golden files
// can be regenerated from the seed alone.
GroupStructure golden_groups(SplitMix64& rng, std::size_t p, std::size_t ng) {
  std::vector<std::vector<Index>> groups(ng);
  for (auto& g : groups) {
    const std::size_t size = 1 + rng.below(std::min<std::size_t>(6, p));
    while (g.size() < size) {
      const auto j = static_cast<Index>(rng.below(p));
      if (std::find(g.begin(), g.end(), j) == g.end()) g.push_back(j);
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    bool seen = false;
    for (const auto& g : groups) seen |= std::find(g.begin(), g.end(), static_cast<Index>(j)) != g.end();
    if (!seen) groups[rng.below(ng)].push_back(static_cast<Index>(j));
  }
  std::vector<double> weights(ng);
  for (double& w : weights) w = rng.uniform(0.5, 2.0);
  return GroupStructure(p, groups, weights);
}

nlohmann::json groups_json(const GroupStructure& gs) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t g = 0; g < gs.size(); ++g) {
    out.push_back({{"weight", gs.weight(g)},
                   {"members", std::vector<Index>(gs.group(g).begin(), gs.group(g).end())}});
  }
  return out;
}

void oracle_command(const std::string& dir, std::size_t count, std::uint64_t seed, std::ostream& out) {
  SplitMix64 rng(seed);
  nlohmann::json prox = nlohmann::json::array(), dual = nlohmann::json::array();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t p = 5 + rng.below(26), ng = 2 + rng.below(11);
    const auto gs = golden_groups(rng, p, ng);
    std::vector<double> u(p);
    for (double& x : u) x = rng.normal();
    const double lambda = std::pow(10.0, rng.uniform(-1.5, 0.5));
    const auto ref = oracle::prox_dual(u, gs, lambda);
    prox.push_back({{"p", p}, {"groups", groups_json(gs)}, {"u", u}, {"lambda", lambda}, {"w", ref.w}});
    dual.push_back({{"p", p}, {"groups", groups_json(gs)}, {"kappa", u},
                    {"value", oracle::dual_norm_bisect(u, gs)}});
  }
  fs::create_directories(dir);
  const fs::path d(dir);
  std::ofstream(d / "prox_golden.json") << prox.dump(1) << '\n';
  std::ofstream(d / "dual_norm_golden.json") << dual.dump(1) << '\n';
  out << "wrote " << count << " prox and dual-norm cases to " << dir << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured sparsity with overlapping l-infinity groups", "structflow"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic regression problem");
  GenSpec gen_spec;
  std::string gen_dir = ".";
  gen_spec.add_options(gen);
  gen->add_option("--out-dir", gen_dir, "Output directory");

  auto* prox = app.add_subcommand("prox", "Proximal operator of lambda * Omega");
  std::string u_file, prox_out, prox_norm = "linf";
  double prox_lambda = 0.0;
  bool certify = false;
  GroupSource prox_src;
  prox->add_option("--u", u_file, "Input vector")->required();
  prox->add_option("--lambda", prox_lambda, "Regularisation weight")->required();
  prox->add_option("--norm", prox_norm, "linf or l2");
  prox->add_option("--out", prox_out, "Output vector (stdout by default)");
  prox->add_flag("--certify", certify, "Check the optimality conditions (linf only)");
  prox_src.add_options(prox);

  auto* dn = app.add_subcommand("dualnorm", "Dual norm of a vector");
  std::string kappa_file, dn_norm = "linf";
  GroupSource dn_src;
  dn->add_option("--kappa", kappa_file, "Input vector")->required();
  dn->add_option("--norm", dn_norm, "linf or l2");
  dn_src.add_options(dn);

  auto* solve = app.add_subcommand("solve", "Solve a regularised regression problem");
  ProblemSpec solve_problem;
  SolverSpec solve_solver;
  std::string trace_file, w_file;
  solve_problem.add_options(solve);
  solve_solver.add_options(solve);
  solve->add_option("--solver", solve_solver.solver, "fista, admm, lin-admm or sg");
  solve->add_option("--trace", trace_file, "Trace CSV (stdout by default)");
  solve->add_option("--out", w_file, "Solution vector");

  auto* bench = app.add_subcommand("bench", "Objective-versus-time comparison of solvers");
  ProblemSpec bench_problem;
  SolverSpec bench_solver;
  std::vector<std::string> bench_solvers{"fista", "sg"};
  double budget = 1.0;
  std::string bench_out;
  bench_problem.add_options(bench);
  bench_solver.add_options(bench);
  bench_solver.gap = 1e-10;
  bench_solver.max_iter = std::numeric_limits<std::size_t>::max();
  bench->add_option("--solvers", bench_solvers, "Solvers to run")->delimiter(',');
  bench->add_option("--budget", budget, "Wall-clock seconds per solver");
  bench->add_option("--out", bench_out, "Report CSV (stdout by default)");

  auto* cur = app.add_subcommand("cur", "CUR factorisation path");
  CurSpec cur_spec;
  std::string cur_out;
  cur->add_option("--X", cur_spec.x_file, "Matrix CSV (default: planted test matrix)");
  cur->add_option("--n", cur_spec.n, "Planted matrix rows");
  cur->add_option("--p", cur_spec.p, "Planted matrix columns");
  cur->add_option("--rank", cur_spec.rank, "Planted rank");
  cur->add_option("--noise", cur_spec.noise, "Planted noise level");
  cur->add_option("--seed", cur_spec.seed, "Planted matrix seed");
  cur->add_option("--lrow", cur_spec.lrow, "Row penalties")->delimiter(',');
  cur->add_option("--lcol", cur_spec.lcol, "Column penalties")->delimiter(',');
  cur->add_option("--grid", cur_spec.grid, "Sweep a K x K log-spaced grid");
  cur->add_option("--decades", cur_spec.decades, "Decades spanned by --grid");
  cur->add_option("--out", cur_out, "CSV output (stdout by default)");

  auto* orc = app.add_subcommand("oracle", "Regenerate golden files from the reference oracles");
  std::string oracle_dir = "testdata";
  std::size_t oracle_count = 20;
  std::uint64_t oracle_seed = 2024;
  orc->add_option("--out-dir", oracle_dir, "Output directory");
  orc->add_option("--count", oracle_count, "Number of instances");
  orc->add_option("--seed", oracle_seed, "Instance seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) {
      gen_command(gen_spec, gen_dir, out);
    } else if (*prox) {
      prox_command(u_file, prox_src, prox_lambda, prox_norm, certify, prox_out, out, err);
    } else if (*dn) {
      const auto k = io::read_vector_file(kappa_file);
      out << io::format_double(dual_norm(k, dn_src.build(k.size()), parse_norm(dn_norm))) << '\n';
    } else if (*solve) {
      solve_command(solve_problem, solve_solver, trace_file, w_file, out, err);
    } else if (*bench) {
      bench_command(bench_problem, bench_solver, bench_solvers, budget, bench_out, out);
    } else if (*cur) {
      cur_command(cur_spec, cur_out, out);
    } else if (*orc) {
      oracle_command(oracle_dir, oracle_count, oracle_seed, out);
    }
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace structflow::cli
