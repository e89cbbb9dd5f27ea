#pragma once

#include "hsunmix/types.hpp"
#include "hsunmix/weights.hpp"

#include <string>
#include <vector>

namespace hsu {

enum class StopReason { kMaxIter, kCostDelta };

std::string to_string(StopReason reason);

struct UnmixResult {
  SignatureMatrix A;
  AbundanceMatrix S;
  int iterations_run = 0;
  std::vector<double> cost_trace;  // one objective value per iteration
  StopReason stop_reason = StopReason::kMaxIter;
};

/// Combined objective
///   |Y - A S|_F^p
///   + eta * sum_k sum_{j in N_k^-} rho_kj |s_k - s_j|_q1
///   + lambda * sum_k |s_k|_q2
/// Throws Error("non-finite-objective") when an intermediate overflows.
double objective(const HyperCube& Y, const SignatureMatrix& A,
                 const AbundanceMatrix& S, const WeightSet& weights,
                 const UnmixConfig& cfg);

/// One synchronous (Jacobi) sweep of the projected distributed-LMP abundance
/// recursion: every pixel reads iteration-i values, writes iteration-i+1.
///
///   s_k <- P+[ s_k + mu * A^T (|e_k|^(p-2) . e_k)
///              - mu*eta * sum_j rho_kj (s_k - s_j).|s_k - s_j|^(q1-2)
///                         / |s_k - s_j|_q1^(q1-1)
///              - mu*lambda * s_k.|s_k|^(q2-2) / |s_k|_q2^(q2-1) ]
///
/// with e_k = y_k - A s_k and |.|^a taken elementwise. Magnitudes inside
/// |.|^(q-2) and the norm denominators are floored at 1e-12 so the update is
/// defined at exact zeros (expected under sparsity) and coincident neighbors.
AbundanceMatrix abundance_step(const HyperCube& Y, const SignatureMatrix& A,
                               const AbundanceMatrix& S, const WeightSet& weights,
                               const UnmixConfig& cfg);

/// Multiplicative signature update A <- A .* (Y S^T) ./ (A S S^T), with the
/// denominator floored at 1e-12. Keeps A entrywise nonnegative and preserves
/// exact zeros; a perfect factorization Y = A S is a fixed point.
SignatureMatrix signature_step(const HyperCube& Y, const SignatureMatrix& A,
                               const AbundanceMatrix& S);

/// Stopping rule |J_new - J_old| < eps.
bool should_stop(double J_new, double J_old, double eps);

/// Random or VCA-FCLS initialization of (A, S), seeded.
std::pair<SignatureMatrix, AbundanceMatrix> initialize(const HyperCube& Y,
                                                       const UnmixConfig& cfg);

/// Full alternating loop: initialize, compute lambda and rho once, then
/// iterate signature and abundance updates until max_iter or the cost-delta
/// rule fires. The cost trace records the objective after each full sweep.
UnmixResult unmix(const HyperCube& Y, const UnmixConfig& cfg);

/// As unmix but with precomputed weights and initial factors; the building
/// block shared by unmix and the convergence probes.
UnmixResult unmix_from(const HyperCube& Y, const UnmixConfig& cfg,
                       const WeightSet& weights, SignatureMatrix A,
                       AbundanceMatrix S);

}  // namespace hsu
