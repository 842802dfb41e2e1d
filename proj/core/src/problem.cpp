#include <cmath>
#include <ostream>
#include <stdexcept>

#include "solver_util.hpp"
#include "structflow/duality.hpp"
#include "structflow/solvers.hpp"

namespace structflow {

void check_problem(const Problem& problem) {
  if (problem.x.rows() != problem.loss.size()) {
    throw std::invalid_argument("problem: X has " + std::to_string(problem.x.rows()) +
                                " rows but the loss has " + std::to_string(problem.loss.size()) +
                                " samples");
  }
  if (problem.x.cols() != problem.groups.dimension()) {
    throw std::invalid_argument("problem: X has " + std::to_string(problem.x.cols()) +
                                " columns but the groups live in dimension " +
                                std::to_string(problem.groups.dimension()));
  }
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda)) {
    throw std::invalid_argument("problem: lambda must be finite and non-negative");
  }
}

double objective(const Problem& problem, std::span<const double> w) {
  std::vector<double> z(problem.x.rows());
  problem.x.apply(w, z);
  double value = problem.loss.value(z);
  if (problem.lambda > 0.0) value += problem.lambda * omega(w, problem.groups, problem.norm);
  return value;
}

double zero_threshold(const Problem& problem) {
  check_problem(problem);
  std::vector<double> z(problem.x.rows(), 0.0), g(problem.x.rows()), xt(problem.x.cols());
  problem.loss.gradient(z, g);
  problem.x.apply_transpose(g, xt);
  return dual_norm(xt, problem.groups, problem.norm);
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kGapReached: return "gap_reached";
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kIterBudget: return "iter_budget";
    case SolverStatus::kStalled: return "stalled";
  }
  return "unknown";
}

void SolverTrace::write_csv(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "iter,objective,gap,seconds\n";
  for (const TraceRecord& r : records) {
    out << r.iter << ',' << r.objective << ',';
    if (!std::isnan(r.gap)) out << r.gap;
    out << ',' << r.seconds << '\n';
  }
  out.precision(old_precision);
}

std::vector<double> omega_subgradient(std::span<const double> w, const GroupStructure& gs,
                                      NormKind norm) {
  if (w.size() != gs.dimension()) throw std::invalid_argument("omega_subgradient: dimension mismatch");
  std::vector<double> s(w.size(), 0.0);
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const auto members = gs.group(g);
    const double eta = gs.weight(g);
    if (norm == NormKind::kLinf) {
      // Members are sorted, so the first maximum is the lowest index.
      Index best = -1;
      double top = 0.0;
      for (Index j : members) {
        if (std::abs(w[j]) > top) {
          top = std::abs(w[j]);
          best = j;
        }
      }
      if (best >= 0) s[best] += eta * (w[best] > 0.0 ? 1.0 : -1.0);
    } else {
      double sq = 0.0;
      for (Index j : members) sq += w[j] * w[j];
      if (sq == 0.0) continue;
      const double scale = eta / std::sqrt(sq);
      for (Index j : members) s[j] += scale * w[j];
    }
  }
  return s;
}

}  // namespace structflow
