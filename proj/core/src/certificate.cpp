#include "structflow/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace structflow {

ProxCertificate certify_prox(std::span<const double> u, const GroupStructure& gs, double lambda,
                             std::span<const double> w,
                             const std::vector<std::vector<double>>& flows, double tol) {
  const auto p = static_cast<std::size_t>(gs.dimension());
  if (u.size() != p || w.size() != p || flows.size() != gs.size()) {
    throw std::invalid_argument("certify_prox: sizes do not match the group structure");
  }
  double u_inf = 0.0;
  for (double x : u) u_inf = std::max(u_inf, std::abs(x));
  ProxCertificate cert;
  cert.tolerance = tol >= 0.0 ? tol : 1e-8 * (1.0 + u_inf);

  std::vector<double> xi_bar(p, 0.0);
  cert.groups.reserve(gs.size());
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const auto members = gs.group(static_cast<Index>(g));
    const auto& xi = flows[g];
    if (xi.size() != members.size()) {
      throw std::invalid_argument("certify_prox: flow of a group has the wrong length");
    }
    GroupCheck check;
    check.group = static_cast<Index>(g);
    double dot = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Index j = members[k];
      check.w_inf = std::max(check.w_inf, std::abs(w[j]));
      check.flow_l1 += std::abs(xi[k]);
      dot += w[j] * xi[k];
      xi_bar[j] += xi[k];
      // ξ^g_j carries the sign of u_j (non-negative in the flipped instance).
      if (u[j] * xi[k] < 0.0) {
        cert.max_infeasibility = std::max(cert.max_infeasibility, std::abs(xi[k]));
      }
    }
    const double cap = lambda * gs.weight(static_cast<Index>(g));
    check.complementarity = std::abs(dot - check.w_inf * check.flow_l1);
    check.capacity_gap = std::abs(check.flow_l1 - cap);
    cert.max_infeasibility = std::max(cert.max_infeasibility, check.flow_l1 - cap);
    if (check.w_inf <= cert.tolerance) {
      check.ok = true;
    } else {
      check.ok = check.complementarity <= cert.tolerance && check.capacity_gap <= cert.tolerance;
      cert.max_complementarity = std::max(cert.max_complementarity, check.complementarity);
      cert.max_capacity_gap = std::max(cert.max_capacity_gap, check.capacity_gap);
    }
    cert.groups.push_back(check);
  }
  for (std::size_t j = 0; j < p; ++j) {
    cert.reconstruction_error = std::max(cert.reconstruction_error, std::abs(u[j] - xi_bar[j] - w[j]));
  }
  cert.passed = cert.max_infeasibility <= cert.tolerance &&
                cert.reconstruction_error <= cert.tolerance &&
                std::all_of(cert.groups.begin(), cert.groups.end(),
                            [](const GroupCheck& c) { return c.ok; });
  return cert;
}

}  // namespace structflow
