#pragma once

#include "hsunmix/types.hpp"

#include <vector>

namespace hsu {

/// Evaluation of an estimated (A, S) pair against ground truth, after
/// optimal endmember matching.
struct EvalReport {
  std::vector<double> per_endmember_sad;  // radians, truth order
  std::vector<double> per_pixel_aad;      // radians
  double rms_sad = 0.0;
  double rms_aad = 0.0;
  double mean_sad = 0.0;
  double mean_aad = 0.0;
  std::vector<int> matching;  // matching[est index] = true index
};

/// Spectral angle cos^-1( a.a_hat / (|a||a_hat|) ), clamped into [0, pi]
/// against rounding. Throws Error("zero-vector") for zero inputs.
double sad(const Vector& a, const Vector& a_hat);

/// Same formula on abundance vectors.
double aad(const Vector& s, const Vector& s_hat);

/// Permutation minimizing total SAD between estimated and true endmember
/// columns (Hungarian assignment; exact). Returns perm with
/// perm[est index] = true index.
std::vector<int> match_endmembers(const SignatureMatrix& A_true,
                                  const SignatureMatrix& A_est);

/// Applies match_endmembers, then per-endmember SAD on signature columns and
/// per-pixel AAD on abundance columns (same permutation), with rms and mean
/// aggregates. rms_* is the acceptance-facing aggregate.
EvalReport evaluate(const SignatureMatrix& A_true, const AbundanceMatrix& S_true,
                    const SignatureMatrix& A_est, const AbundanceMatrix& S_est);

/// Exact solution of the square min-cost assignment problem; returns
/// assignment[row] = column. O(n^3) potentials method.
std::vector<int> hungarian(const Matrix& cost);

double rms(const std::vector<double>& values);

}  // namespace hsu
