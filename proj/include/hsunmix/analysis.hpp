#pragma once

#include "hsunmix/synthgen.hpp"
#include "hsunmix/types.hpp"
#include "hsunmix/unmixer.hpp"

#include <vector>

namespace hsu {

struct ProbeResult {
  double mu = 0.0;
  bool converged = false;
  bool degenerate = false;  // mu == 0: trivially stable, zero progress
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double tail_movement = 0.0;  // max RMS per-pixel abundance movement, last 10 sweeps
};

/// Step-size stability diagnostics. mu_bound = 2 / (max_eigen + 2*eta -
/// lambda) with max_eigen = max_k lambda_max(R_k); in the single-node-cluster
/// reduction R_k = A^T A for every pixel. max_eigen_neighbor_sum carries the
/// alternative reading R_k = |N_k^-| * A^T A (per-neighbor covariance summed
/// literally); both are reported, the bound uses the reduction.
struct StabilityReport {
  double mu_bound = 0.0;
  double max_eigen = 0.0;
  double max_eigen_neighbor_sum = 0.0;
  double mu_bound_neighbor_sum = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  std::vector<ProbeResult> empirical;
};

/// The mean-error convergence bound 2 / (max_k lambda_max(R_k) + 2*eta -
/// lambda). Throws Error("nonpositive-denominator") reporting the three
/// terms when the denominator is not positive. The graph may be empty when
/// only the single-node-cluster bound is wanted.
double step_size_bound(const SignatureMatrix& A, const NeighborGraph& graph,
                       double eta, double lambda);

/// Runs a short unmix (T = 100) per step size and labels it converged when
/// the final cost is finite and below the initial cost, the last 10
/// iterations' costs vary by less than 1% of the initial cost, and the
/// abundance iterates have settled (RMS per-pixel movement below 0.01 over
/// the last 10 sweeps). The movement test is what separates a genuinely
/// unstable step size from one whose oscillation the simplex projection
/// merely keeps bounded. mu = 0 is flagged degenerate (stable, no progress).
StabilityReport convergence_probe(const SynthScene& scene, const UnmixConfig& cfg,
                                  const std::vector<double>& mu_list);

}  // namespace hsu
