#pragma once

#include "hsunmix/types.hpp"

namespace hsu {

/// Data-driven sparsity weight plus the spectral-similarity neighbor graph.
/// Both are computed once from the observed cube before iterating.
struct WeightSet {
  double lambda = 0.0;
  NeighborGraph graph;
};

/// Sparsity weight computed from the band vectors of Y:
///   lambda = (1/sqrt(L)) * sum_l (sqrt(N) - |x_l|_1/|x_l|_2) / sqrt(N-1)
/// with x_l the l-th band across pixels. Each band summand lies in [0, 1],
/// so the result lies in [0, sqrt(L)].
///
/// Throws Error("too-few-pixels") when N < 2 and Error("zero-band") when a
/// band vector is identically zero.
double sparsity_lambda(const HyperCube& Y);

/// Cosine similarity of two spectra, in [-1, 1]. Not clamped and not
/// defined for zero vectors (Error("zero-vector")).
double spectral_similarity(const Vector& yk, const Vector& yj);

/// Per-pixel similarity weights rho_kj = theta(y_k, y_j) normalized over the
/// grid neighbors of k. If a normalizer is <= 0 (possible only for signed
/// synthetic inputs) that pixel falls back to uniform weights and a warning
/// is written to stderr. Requires grid geometry and nonzero pixel spectra.
NeighborGraph similarity_weights(const HyperCube& Y, Adjacency adjacency);

/// Convenience: lambda (auto or fixed per cfg) plus the rho graph.
WeightSet compute_weights(const HyperCube& Y, const UnmixConfig& cfg);

}  // namespace hsu
