#pragma once

#include "hsunmix/types.hpp"
#include "hsunmix/unmixer.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace hsu {

struct NmfResult {
  SignatureMatrix A;
  AbundanceMatrix S;  // columns normalized to the simplex on packaging
  std::vector<double> residual_trace;  // |Y - A S|_F^2 after each iteration
  int iterations_run = 0;
};

/// Plain multiplicative-update NMF for |Y - A S|_F^2. The Frobenius residual
/// is non-increasing across iterations. Returned abundances are the raw
/// nonnegative factor with columns normalized to sum 1 (angle metrics are
/// scale-invariant, and the simplex invariant is required of the type).
NmfResult nmf(const HyperCube& Y, int c, int max_iter, double eps,
              std::uint64_t seed);

/// NMF plus a lambda * |S|_1/2 sparsity penalty in the abundance update.
/// lambda < 0 means "compute from the data" (sparsity_lambda). With
/// lambda = 0 the trajectory is identical to nmf for the same seed.
NmfResult l_half_nmf(const HyperCube& Y, int c, int max_iter, double eps,
                     std::uint64_t seed, double lambda = -1.0);

/// Multiplicative updates from caller-supplied nonnegative factors; the
/// entry point the experiment harness uses to start every method from the
/// same VCA-FCLS initialization.
NmfResult nmf_from(const HyperCube& Y, Matrix A0, Matrix S0, int max_iter,
                   double eps, double lambda = 0.0);

/// The distributed-only baseline: the unmixer with the sparsity weight
/// forced to zero. Bit-identical to unmix(cfg with lambda = 0).
UnmixResult distributed_unmix(const HyperCube& Y, const UnmixConfig& cfg);

/// Vertex component analysis endmember extraction (projection onto a
/// (c-1)-dimensional principal subspace, then iterative orthogonal-direction
/// argmax over pixels). Deterministic for a fixed seed. c = 1 reduces to the
/// pixel with the largest projection on the first principal direction.
/// Throws Error("degenerate-data") when the data has zero variance.
SignatureMatrix vca(const HyperCube& Y, int c, std::uint64_t seed);

/// Fully constrained least squares: per pixel, argmin |y_k - A s|_2 subject
/// to s >= 0 and sum s = 1, solved by active-set nonnegative least squares
/// on the sum-to-one-augmented system (augmentation weight 1e3 relative to
/// the data scale), then exact cleanup of rounding on the support.
AbundanceMatrix fcls(const HyperCube& Y, const SignatureMatrix& A);

/// Single-pixel FCLS; building block of the above.
Vector fcls_pixel(const Vector& y, const Matrix& A);

}  // namespace hsu
