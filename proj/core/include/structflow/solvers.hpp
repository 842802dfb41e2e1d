#pragma once

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "structflow/groups.hpp"
#include "structflow/linear_map.hpp"
#include "structflow/loss.hpp"
#include "structflow/prox.hpp"

namespace structflow {

/// min_w f(Xw) + λ Σ_g η_g ‖w_g‖.
struct Problem {
  DesignMatrix x;
  Loss loss;
  double lambda = 0.0;
  GroupStructure groups;
  NormKind norm = NormKind::kLinf;
};

/// Throws std::invalid_argument on inconsistent dimensions or λ < 0.
void check_problem(const Problem& problem);

double objective(const Problem& problem, std::span<const double> w);

/// Ω*(Xᵀ∇f(0)): w = 0 is optimal exactly when λ is at least this value.
double zero_threshold(const Problem& problem);

enum class SolverStatus {
  kGapReached,  // certified duality gap below the target
  kConverged,   // ADMM residuals below the tolerance
  kIterBudget,  // iteration or time budget exhausted
  kStalled,     // iterates stopped moving before reaching the target
};

const char* to_string(SolverStatus status);

struct TraceRecord {
  std::size_t iter = 0;
  double objective = 0.0;
  /// NaN when the gap was not evaluated at this iteration.
  double gap = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  SolverStatus status = SolverStatus::kIterBudget;
  /// Last evaluated duality gap (NaN if never evaluated).
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;

  /// `iter,objective,gap,seconds`, gap left empty when not evaluated.
  void write_csv(std::ostream& out) const;
};

struct SolverResult {
  std::vector<double> w;
  SolverTrace trace;
};

struct FistaOptions {
  double gap_tol = 1e-6;
  double L0 = 1.0;
  double nu = 1.5;
  std::size_t max_iter = 10000;
  /// Evaluate the duality gap every this many iterations (and at the end).
  std::size_t gap_every = 10;
  double max_seconds = std::numeric_limits<double>::infinity();
  /// Starting point; zero when empty.
  std::vector<double> w0;
  ProxOptions prox{};
};

/// Accelerated proximal gradient with backtracking on the Lipschitz
/// estimate, stopped by the duality gap. Requires an exact prox: ℓ∞ groups,
/// or ℓ2 groups forming a partition or a tree.
SolverResult fista(const Problem& problem, const FistaOptions& options = {});

struct AdmmOptions {
  double gamma = 1.0;
  /// Lin-ADMM only: weight of the proximity term Q = δI − XᵀX. 0 picks
  /// 1.01 times the power-iteration estimate of ‖X‖₂².
  double delta = 0.0;
  std::size_t max_iter = 10000;
  /// Stop when max(primal residual, dual residual) < tol (sup norms).
  double tol = 1e-8;
  /// Also stop when an evaluated duality gap drops below gap_tol (0: never).
  double gap_tol = 0.0;
  /// Evaluate the duality gap every this many iterations (0: never).
  std::size_t gap_every = 0;
  double max_seconds = std::numeric_limits<double>::infinity();
};

/// ADMM on copies v^i = w (one per sample) and z^g = w_g (one per group).
/// Needs an explicit design matrix.
SolverResult admm_loss_split(const Problem& problem, const AdmmOptions& options = {});

/// ADMM on v = Xw and z^g = w_g with the w-step linearised by the proximity
/// term ½γ‖w − w_k‖²_Q, Q = δI − XᵀX. Throws when δ < ‖X‖₂².
SolverResult admm_linearized(const Problem& problem, const AdmmOptions& options = {});

struct SubgradientOptions {
  double a = 1.0;
  double b = 100.0;
  std::size_t max_iter = 1000;
  double max_seconds = std::numeric_limits<double>::infinity();
  /// Evaluate the duality gap every this many iterations (0: never).
  std::size_t gap_every = 0;
};

/// w ← w − a/(k + b)·(Xᵀ∇f + λs), s ∈ ∂Ω(w).
SolverResult subgradient(const Problem& problem, const SubgradientOptions& options = {});

/// The subgradient of Ω used by `subgradient`: per ℓ∞ group, η_g sign(w_j)
/// on the lowest-index coordinate of largest magnitude; per ℓ2 group,
/// η_g w_g/‖w_g‖. Zero blocks contribute zero.
std::vector<double> omega_subgradient(std::span<const double> w, const GroupStructure& gs,
                                      NormKind norm);

}  // namespace structflow
