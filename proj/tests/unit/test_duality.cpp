#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "instances.hpp"
#include "oracles.hpp"
#include "structflow/duality.hpp"
#include "structflow/prox.hpp"

using namespace structflow;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DesignMatrix random_design(fixture::Rng& rng, std::size_t n, std::size_t p) {
  Eigen::MatrixXd x(n, p);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  return DesignMatrix(x);
}

}  // namespace

TEST(Omega, LinfAndL2) {
  GroupStructure gs(3, {{0, 1}, {1, 2}}, {1.0, 2.0});
  std::vector<double> w{3, -4, 0};
  EXPECT_DOUBLE_EQ(omega(w, gs, NormKind::kLinf), 4.0 + 2.0 * 4.0);
  EXPECT_DOUBLE_EQ(omega(w, gs, NormKind::kL2), 5.0 + 2.0 * 4.0);
  fixture::Rng rng(40);
  auto r = fixture::random_groups(rng, 20, 8, 5);
  auto v = fixture::random_vector(rng, 20);
  EXPECT_NEAR(omega(v, r, NormKind::kLinf), oracle::omega_linf(v, r), 1e-12);
}

TEST(DualNorm, ClosedForms) {
  std::vector<double> k{1.0, -2.0, 0.5};
  GroupStructure one(3, {{0, 1, 2}}, {2.0});
  EXPECT_NEAR(dual_norm(k, one), 3.5 / 2.0, 1e-12);
  EXPECT_NEAR(dual_norm(k, make_singletons(3)), 2.0, 1e-12);
  GroupStructure part(3, {{0}, {1, 2}}, {1.0, 5.0});
  EXPECT_NEAR(dual_norm(k, part), 1.0, 1e-12);
  EXPECT_NEAR(dual_norm(k, part, NormKind::kL2), 1.0, 1e-12);
  EXPECT_NEAR(dual_norm(k, one, NormKind::kL2), std::sqrt(5.25) / 2.0, 1e-12);
}

TEST(DualNorm, TwoChainedGroups) {
  // g = {1,2}, h = {2,3} must share coordinate 2: 2τ >= 3.
  GroupStructure gs(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
  EXPECT_NEAR(dual_norm(std::vector<double>{1, 1, 1}, gs), 1.5, 1e-12);
  // A heavy end coordinate dominates.
  EXPECT_NEAR(dual_norm(std::vector<double>{0, 0.1, 4}, gs), 4.0, 1e-12);
}

TEST(DualNorm, UncoveredAndErrors) {
  GroupStructure gs(3, {{0, 1}}, {1.0});
  EXPECT_EQ(dual_norm(std::vector<double>{1, 1, 1}, gs), kInf);
  EXPECT_NEAR(dual_norm(std::vector<double>{1, 1, 0}, gs), 2.0, 1e-12);
  EXPECT_EQ(dual_norm(std::vector<double>{0, 0, 0}, gs), 0.0);
  EXPECT_THROW(dual_norm(std::vector<double>{1, 1}, gs), std::invalid_argument);
  EXPECT_THROW(dual_norm(std::vector<double>{1, NAN, 1}, gs), std::invalid_argument);
  EXPECT_THROW(dual_norm(std::vector<double>{1, 1, 1}, make_sliding_windows(3, 2), NormKind::kL2),
               std::invalid_argument);
}

TEST(DualNorm, MatchesBisectionOracle) {
  fixture::Rng rng(41);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 40);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 15), 6);
    auto k = fixture::random_vector(rng, p);
    const double ref = oracle::dual_norm_bisect(k, gs);
    EXPECT_NEAR(dual_norm(k, gs), ref, 1e-9 * (1.0 + ref)) << "trial " << trial;
  }
}

TEST(DualNorm, HomogeneousAndCauchySchwarz) {
  fixture::Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 30);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 10), 5);
    auto k = fixture::random_vector(rng, p);
    auto w = fixture::random_vector(rng, p);
    const double d = dual_norm(k, gs);
    std::vector<double> scaled(k);
    for (double& x : scaled) x *= -3.0;
    EXPECT_NEAR(dual_norm(scaled, gs), 3.0 * d, 1e-9 * (1.0 + d));
    double dot = 0.0;
    for (std::size_t j = 0; j < p; ++j) dot += w[j] * k[j];
    EXPECT_LE(dot, omega(w, gs, NormKind::kLinf) * d + 1e-9);
  }
}

TEST(DualNorm, ProxVanishesExactlyAboveIt) {
  fixture::Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 30);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 10), 5);
    auto u = fixture::random_vector(rng, p);
    const double d = dual_norm(u, gs);
    EXPECT_LE(fixture::max_abs(prox_overlapping_linf(u, gs, d * (1 + 1e-7)).w), 1e-6);
    EXPECT_GT(fixture::max_abs(prox_overlapping_linf(u, gs, d * (1 - 1e-3)).w), 0.0);
  }
}

TEST(DualNorm, TreeL2MatchesProxThreshold) {
  fixture::Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = fixture::uniform_index(rng, 2, 25);
    auto gs = make_tree(fixture::random_parents(rng, p));
    auto k = fixture::random_vector(rng, p);
    const double d = dual_norm(k, gs, NormKind::kL2);
    EXPECT_LE(fixture::max_abs(prox_tree(k, gs, d * (1 + 1e-7), NormKind::kL2)), 1e-9);
    EXPECT_GT(fixture::max_abs(prox_tree(k, gs, d * (1 - 1e-4), NormKind::kL2)), 0.0);
  }
}

TEST(Conjugate, SquareAndLogistic) {
  Loss sq = Loss::square({1.0, -2.0});
  std::vector<double> k{0.5, 0.25};
  EXPECT_NEAR(sq.conjugate(k), 0.5 * (0.25 + 0.0625) + 0.5 - 0.5, 1e-15);
  Loss lg = Loss::logistic({1.0, -1.0});
  EXPECT_EQ(lg.conjugate(std::vector<double>{0.5, 0.0}), kInf);
  EXPECT_NEAR(lg.conjugate(std::vector<double>{0.0, 0.0}), 0.0, 1e-15);
  // sup_z κz − log(1 + e^{−z}) by a fine grid search for y = 1.
  Loss one = Loss::logistic({1.0});
  for (double kappa : {-0.9, -0.5, -0.1}) {
    double best = -kInf;
    for (double z = -30.0; z <= 30.0; z += 1e-4) {
      best = std::max(best, kappa * z - std::log1p(std::exp(-z)));
    }
    EXPECT_NEAR(one.conjugate(std::vector<double>{kappa}), best, 1e-6);
  }
  EXPECT_THROW(Loss::logistic({0.5}), std::invalid_argument);
}

TEST(Gap, NonNegativeAtRandomPoints) {
  fixture::Rng rng(45);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = fixture::uniform_index(rng, 3, 15), p = fixture::uniform_index(rng, 3, 20);
    auto gs = fixture::random_groups(rng, p, fixture::uniform_index(rng, 1, 8), 4);
    DesignMatrix x = random_design(rng, n, p);
    auto w = fixture::random_vector(rng, p);
    Loss loss = Loss::square(fixture::random_vector(rng, n));
    std::vector<double> labels(n);
    for (double& l : labels) l = fixture::uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
    const double lambda = fixture::uniform(rng, 0.01, 2.0);
    auto ev = evaluate_gap(w, x, loss, lambda, gs);
    EXPECT_GE(ev.gap, -1e-10);
    EXPECT_NEAR(ev.gap, ev.primal - ev.dual, 1e-9 * (1 + std::abs(ev.primal)));
    EXPECT_GE(ev.rho, 1.0);
    EXPECT_GE(duality_gap(w, x, Loss::logistic(labels), lambda, gs), -1e-10);
  }
}

TEST(Gap, ZeroAtOptimalOrigin) {
  fixture::Rng rng(46);
  const std::size_t n = 10, p = 12;
  auto gs = make_sliding_windows(p, 3);
  DesignMatrix x = random_design(rng, n, p);
  auto y = fixture::random_vector(rng, n);
  Loss loss = Loss::square(y);
  std::vector<double> grad(n), xtg(p), zero(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) grad[i] = -y[i];
  x.apply_transpose(grad, xtg);
  const double threshold = dual_norm(xtg, gs);
  EXPECT_NEAR(duality_gap(zero, x, loss, threshold * 1.5, gs), 0.0, 1e-10);
  EXPECT_GT(duality_gap(zero, x, loss, threshold * 0.5, gs), 1e-3);
}

TEST(Gap, OverlappingL2IsUnavailable) {
  fixture::Rng rng(47);
  DesignMatrix x = random_design(rng, 4, 5);
  auto gs = make_sliding_windows(5, 2);
  EXPECT_EQ(duality_gap(std::vector<double>(5, 0.1), x, Loss::square(fixture::random_vector(rng, 4)),
                        0.5, gs, NormKind::kL2),
            kInf);
}
