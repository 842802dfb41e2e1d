#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "solver_util.hpp"
#include "structflow/solvers.hpp"

namespace structflow {

namespace {

// z^g and ν^g for every group, stored back to back in group order.
struct GroupCopies {
  explicit GroupCopies(const GroupStructure& gs) : gs(gs) {
    offset.resize(gs.size() + 1, 0);
    for (std::size_t g = 0; g < gs.size(); ++g) offset[g + 1] = offset[g] + gs.group_size(g);
    z.assign(offset.back(), 0.0);
    nu.assign(offset.back(), 0.0);
  }

  // Σ_{g∋j} (z^g_j + ν^g_j/γ), accumulated into acc.
  void accumulate(double gamma, std::vector<double>& acc) const {
    for (std::size_t g = 0; g < gs.size(); ++g) {
      const auto members = gs.group(g);
      for (std::size_t k = 0; k < members.size(); ++k) {
        acc[members[k]] += z[offset[g] + k] + nu[offset[g] + k] / gamma;
      }
    }
  }

  // z^g ← prox_{λη_g/γ‖·‖}(w_g − ν^g/γ), then ν^g ← ν^g + γ(z^g − w_g).
  // Returns (max |z − w_g|, max |Δz|).
  std::pair<double, double> update(std::span<const double> w, double lambda, double gamma,
                                   NormKind norm) {
    double primal = 0.0, change = 0.0;
    for (std::size_t g = 0; g < gs.size(); ++g) {
      const auto members = gs.group(g);
      block.resize(members.size());
      for (std::size_t k = 0; k < members.size(); ++k) {
        block[k] = w[members[k]] - nu[offset[g] + k] / gamma;
      }
      prox_single_group(block, lambda * gs.weight(g) / gamma, norm, scratch);
      for (std::size_t k = 0; k < members.size(); ++k) {
        double& zk = z[offset[g] + k];
        change = std::max(change, std::abs(block[k] - zk));
        zk = block[k];
        const double r = zk - w[members[k]];
        primal = std::max(primal, std::abs(r));
        nu[offset[g] + k] += gamma * r;
      }
    }
    return {primal, change};
  }

  const GroupStructure& gs;
  std::vector<std::size_t> offset;
  std::vector<double> z, nu, block, scratch;
};

void check_admm(const Problem& problem, const AdmmOptions& options) {
  check_problem(problem);
  if (!(options.gamma > 0.0)) throw std::invalid_argument("admm: gamma must be positive");
}

// Shared bookkeeping: objective every iteration, gap on schedule.
class AdmmTrace {
 public:
  AdmmTrace(const Problem& problem, const AdmmOptions& options, SolverResult& res)
      : problem_(problem), options_(options), res_(res) {}

  // Returns true when the run should stop.
  bool record(std::size_t k, double residual, bool last) {
    const double obj = objective(problem_, res_.w);
    if (!std::isfinite(obj)) throw std::runtime_error("admm: non-finite objective");
    double gap = std::numeric_limits<double>::quiet_NaN();
    const bool converged = residual < options_.tol;
    const bool out_of_time = clock_.seconds() >= options_.max_seconds;
    const bool scheduled = options_.gap_every > 0 && k % options_.gap_every == 0;
    if (scheduled || ((converged || last || out_of_time) && options_.gap_every > 0)) {
      gap = detail::gap_of(problem_, res_.w);
      res_.trace.final_gap = gap;
    }
    res_.trace.records.push_back({k, obj, gap, clock_.seconds()});
    res_.trace.iterations = k;
    if (converged) {
      res_.trace.status = SolverStatus::kConverged;
      return true;
    }
    if (options_.gap_tol > 0.0 && gap <= options_.gap_tol) {
      res_.trace.status = SolverStatus::kGapReached;
      return true;
    }
    if (last || out_of_time) {
      res_.trace.status = SolverStatus::kIterBudget;
      return true;
    }
    return false;
  }

 private:
  const Problem& problem_;
  const AdmmOptions& options_;
  SolverResult& res_;
  detail::Stopwatch clock_;
};

}  // namespace

SolverResult admm_loss_split(const Problem& problem, const AdmmOptions& options) {
  check_admm(problem, options);
  if (!problem.x.is_explicit()) throw std::invalid_argument("admm: needs an explicit design matrix");
  const std::size_t n = problem.x.rows(), p = problem.x.cols();
  const double gamma = options.gamma;
  const Eigen::MatrixXd x = problem.x.dense() ? *problem.x.dense() : Eigen::MatrixXd(*problem.x.sparse());
  const Eigen::VectorXd row_sq = x.rowwise().squaredNorm();
  const std::vector<double> cover = detail::cover_counts(problem.groups);

  SolverResult res;
  res.w.assign(p, 0.0);
  Eigen::Map<Eigen::VectorXd> w(res.w.data(), static_cast<Eigen::Index>(p));
  // Column i holds v^i and its multiplier μ^i.
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd mu = v;
  GroupCopies copies(problem.groups);
  std::vector<double> acc(p);
  Eigen::VectorXd a(static_cast<Eigen::Index>(p));

  AdmmTrace trace(problem, options, res);
  trace.record(0, std::numeric_limits<double>::infinity(), false);
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    // w-step: each coordinate averages its n + c_j copies.
    std::fill(acc.begin(), acc.end(), 0.0);
    copies.accumulate(gamma, acc);
    const Eigen::VectorXd consensus = (v + mu / gamma).rowwise().sum();
    for (std::size_t j = 0; j < p; ++j) {
      w[static_cast<Eigen::Index>(j)] =
          (consensus[static_cast<Eigen::Index>(j)] + acc[j]) / (static_cast<double>(n) + cover[j]);
    }

    // v-steps: prox of φ_i(x_i·v) reduces to a scalar prox along x_i.
    double primal = 0.0, change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      a = w - mu.col(ii) / gamma;
      Eigen::VectorXd next = a;
      if (row_sq[ii] > 0.0) {
        const double xa = x.row(ii).dot(a);
        const double r = problem.loss.prox_scalar(i, xa, row_sq[ii] / gamma);
        next += x.row(ii).transpose() * ((r - xa) / row_sq[ii]);
      }
      change = std::max(change, (next - v.col(ii)).cwiseAbs().maxCoeff());
      v.col(ii) = next;
      const Eigen::VectorXd r = next - w;
      primal = std::max(primal, r.cwiseAbs().maxCoeff());
      mu.col(ii) += gamma * r;
    }
    const auto [zp, zc] = copies.update(res.w, problem.lambda, gamma, problem.norm);
    primal = std::max(primal, zp);
    change = std::max(change, zc);
    if (trace.record(k, std::max(primal, gamma * change), k == options.max_iter)) break;
  }
  return res;
}

SolverResult admm_linearized(const Problem& problem, const AdmmOptions& options) {
  check_admm(problem, options);
  const std::size_t n = problem.x.rows(), p = problem.x.cols();
  const double gamma = options.gamma;
  const double norm_sq = problem.x.spectral_norm_sq();
  double delta = options.delta;
  if (delta == 0.0) {
    delta = norm_sq > 0.0 ? 1.01 * norm_sq : 1.0;
  } else if (!(delta > 0.0) || delta < norm_sq * (1.0 - 1e-8)) {
    throw std::invalid_argument("lin-admm: delta = " + std::to_string(delta) +
                                " is below ||X||^2 = " + std::to_string(norm_sq) +
                                ", so delta*I - X'X is not positive semidefinite");
  }
  const std::vector<double> cover = detail::cover_counts(problem.groups);

  SolverResult res;
  std::vector<double>& w = res.w;
  w.assign(p, 0.0);
  std::vector<double> v(n, 0.0), kappa(n, 0.0), xw(n, 0.0), resid(n), back(p), acc(p), v_new(n);
  GroupCopies copies(problem.groups);

  AdmmTrace trace(problem, options, res);
  trace.record(0, std::numeric_limits<double>::infinity(), false);
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    // w-step under the proximity term: XᵀX w_k cancels, leaving a diagonal system.
    for (std::size_t i = 0; i < n; ++i) resid[i] = xw[i] - v[i] - kappa[i] / gamma;
    problem.x.apply_transpose(resid, back);
    std::fill(acc.begin(), acc.end(), 0.0);
    copies.accumulate(gamma, acc);
    for (std::size_t j = 0; j < p; ++j) w[j] = (delta * w[j] - back[j] + acc[j]) / (delta + cover[j]);
    problem.x.apply(w, xw);

    // v ← prox_{f/γ}(Xw − κ/γ), then κ ← κ + γ(v − Xw).
    for (std::size_t i = 0; i < n; ++i) resid[i] = xw[i] - kappa[i] / gamma;
    problem.loss.prox(resid, 1.0 / gamma, v_new);
    double primal = 0.0, change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      change = std::max(change, std::abs(v_new[i] - v[i]));
      v[i] = v_new[i];
      const double r = v[i] - xw[i];
      primal = std::max(primal, std::abs(r));
      kappa[i] += gamma * r;
    }
    const auto [zp, zc] = copies.update(w, problem.lambda, gamma, problem.norm);
    primal = std::max(primal, zp);
    change = std::max(change, zc);
    if (trace.record(k, std::max(primal, gamma * change), k == options.max_iter)) break;
  }
  return res;
}

}  // namespace structflow
