#include <cmath>
#include <stdexcept>

#include "solver_util.hpp"
#include "structflow/duality.hpp"
#include "structflow/solvers.hpp"

namespace structflow {

namespace {

void prox_step(const Problem& problem, std::span<const double> v, double t, const ProxOptions& opt,
               std::vector<double>& out) {
  if (t == 0.0 || problem.groups.empty()) {
    out.assign(v.begin(), v.end());
    return;
  }
  out = prox_exact(v, problem.groups, t, problem.norm, opt);
}

}  // namespace

SolverResult fista(const Problem& problem, const FistaOptions& options) {
  check_problem(problem);
  if (!(options.L0 > 0.0) || !(options.nu > 1.0)) {
    throw std::invalid_argument("fista: need L0 > 0 and nu > 1");
  }
  if (!problem.groups.empty() && !has_exact_prox(problem.groups, problem.norm)) {
    throw std::invalid_argument("fista: no exact prox for overlapping l2 groups outside a tree");
  }
  const std::size_t n = problem.x.rows(), p = problem.x.cols();
  const double lambda = problem.lambda;
  const std::size_t gap_every = std::max<std::size_t>(options.gap_every, 1);
  detail::Stopwatch clock;

  SolverResult res;
  std::vector<double>& w = res.w;
  w = options.w0.empty() ? std::vector<double>(p, 0.0) : options.w0;
  if (w.size() != p) throw std::invalid_argument("fista: w0 has the wrong length");
  SolverTrace& trace = res.trace;

  auto finish = [&](std::size_t iter, double obj, double gap, SolverStatus status) {
    trace.records.push_back({iter, obj, gap, clock.seconds()});
    trace.final_gap = gap;
    trace.status = status;
    trace.iterations = iter;
  };

  double obj = objective(problem, w);
  double gap = detail::gap_of(problem, w);
  if (gap <= options.gap_tol) {
    finish(0, obj, gap, SolverStatus::kGapReached);
    return res;
  }
  trace.records.push_back({0, obj, gap, clock.seconds()});
  trace.final_gap = gap;

  std::vector<double> w_prev = w, y = w, z, v(p), grad(p), zy(n), gz(n), zz(n);
  double t = 1.0, L = options.L0;
  std::size_t quiet = 0;
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    problem.x.apply(y, zy);
    const double fy = problem.loss.value(zy);
    problem.loss.gradient(zy, gz);
    problem.x.apply_transpose(gz, grad);

    // Smallest L = L_k ν^s for which the quadratic model majorises f at the
    // prox point. The slack absorbs rounding once f barely changes.
    double fz = 0.0;
    while (true) {
      for (std::size_t j = 0; j < p; ++j) v[j] = y[j] - grad[j] / L;
      prox_step(problem, v, lambda / L, options.prox, z);
      double lin = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double d = z[j] - y[j];
        lin += d * grad[j];
        sq += d * d;
      }
      problem.x.apply(z, zz);
      fz = problem.loss.value(zz);
      if (!std::isfinite(fz)) throw std::runtime_error("fista: non-finite loss; try a larger L0");
      if (fz <= fy + lin + 0.5 * L * sq + 1e-13 * (1.0 + std::abs(fy))) break;
      L *= options.nu;
      if (L > 1e300) throw std::runtime_error("fista: Lipschitz estimate overflowed");
    }

    w_prev.swap(w);
    w = z;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    double moved = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      y[j] = w[j] + momentum * (w[j] - w_prev[j]);
      moved = std::max(moved, std::abs(w[j] - w_prev[j]));
    }
    t = t_next;
    obj = fz + (lambda > 0.0 ? lambda * omega(w, problem.groups, problem.norm) : 0.0);
    if (!std::isfinite(obj)) throw std::runtime_error("fista: non-finite objective");

    quiet = moved <= 1e-15 * (1.0 + detail::sup_norm(w)) ? quiet + 1 : 0;
    const bool out_of_time = clock.seconds() >= options.max_seconds;
    const bool last = k == options.max_iter || out_of_time || quiet >= 20;
    if (k % gap_every == 0 || last) {
      gap = detail::gap_of(problem, w);
      if (gap <= options.gap_tol) {
        finish(k, obj, gap, SolverStatus::kGapReached);
        return res;
      }
      if (last) {
        finish(k, obj, gap, quiet >= 20 ? SolverStatus::kStalled : SolverStatus::kIterBudget);
        return res;
      }
      trace.records.push_back({k, obj, gap, clock.seconds()});
      trace.final_gap = gap;
    } else {
      trace.records.push_back({k, obj, std::numeric_limits<double>::quiet_NaN(), clock.seconds()});
    }
  }
  // max_iter == 0
  finish(0, obj, gap, SolverStatus::kIterBudget);
  return res;
}

}  // namespace structflow
