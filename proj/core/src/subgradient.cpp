#include <cmath>
#include <stdexcept>

#include "solver_util.hpp"
#include "structflow/solvers.hpp"

namespace structflow {

SolverResult subgradient(const Problem& problem, const SubgradientOptions& options) {
  check_problem(problem);
  if (!(options.a > 0.0) || !(options.b >= 0.0)) {
    throw std::invalid_argument("subgradient: need a > 0 and b >= 0");
  }
  const std::size_t n = problem.x.rows(), p = problem.x.cols();
  detail::Stopwatch clock;
  SolverResult res;
  std::vector<double>& w = res.w;
  w.assign(p, 0.0);
  std::vector<double> z(n), gz(n), grad(p);
  SolverTrace& trace = res.trace;

  auto record = [&](std::size_t k, bool last) {
    const double obj = objective(problem, w);
    if (!std::isfinite(obj)) throw std::runtime_error("subgradient: non-finite objective; step too large");
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (options.gap_every > 0 && (k % options.gap_every == 0 || last)) {
      gap = detail::gap_of(problem, w);
      trace.final_gap = gap;
    }
    trace.records.push_back({k, obj, gap, clock.seconds()});
    trace.iterations = k;
  };

  record(0, options.max_iter == 0);
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    problem.x.apply(w, z);
    problem.loss.gradient(z, gz);
    problem.x.apply_transpose(gz, grad);
    const std::vector<double> s = omega_subgradient(w, problem.groups, problem.norm);
    const double step = options.a / (static_cast<double>(k) + options.b);
    for (std::size_t j = 0; j < p; ++j) w[j] -= step * (grad[j] + problem.lambda * s[j]);
    const bool last = k == options.max_iter || clock.seconds() >= options.max_seconds;
    record(k, last);
    if (last) break;
  }
  trace.status = SolverStatus::kIterBudget;
  return res;
}

}  // namespace structflow
