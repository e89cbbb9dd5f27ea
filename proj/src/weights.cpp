#include "hsunmix/weights.hpp"

#include <cmath>
#include <iostream>

namespace hsu {

double sparsity_lambda(const HyperCube& Y) {
  const int L = Y.bands();
  const int N = Y.pixels();
  if (N < 2) {
    throw Error("too-few-pixels", "sparsity weight needs N >= 2 pixels, got " +
                                      std::to_string(N));
  }
  const double sqrt_n = std::sqrt(static_cast<double>(N));
  const double denom = std::sqrt(static_cast<double>(N) - 1.0);
  double sum = 0.0;
  for (int l = 0; l < L; ++l) {
    const double l1 = Y.data().row(l).cwiseAbs().sum();
    const double l2 = Y.data().row(l).norm();
    if (l2 == 0.0) {
      throw Error("zero-band", "band " + std::to_string(l) + " is identically zero");
    }
    sum += (sqrt_n - l1 / l2) / denom;
  }
  return sum / std::sqrt(static_cast<double>(L));
}

double spectral_similarity(const Vector& yk, const Vector& yj) {
  const double nk = yk.norm();
  const double nj = yj.norm();
  if (nk == 0.0 || nj == 0.0) {
    throw Error("zero-vector", "spectral similarity of a zero vector");
  }
  return yk.dot(yj) / (nk * nj);
}

NeighborGraph similarity_weights(const HyperCube& Y, Adjacency adjacency) {
  if (!Y.has_geometry()) {
    throw Error("invalid-config", "similarity weights need grid geometry");
  }
  const int n = Y.pixels();
  for (int k = 0; k < n; ++k) {
    if (Y.data().col(k).norm() == 0.0) {
      throw Error("zero-vector", "pixel " + std::to_string(k) + " spectrum is zero");
    }
  }
  NeighborGraph graph = grid_neighbors(Y.width(), Y.height(), adjacency);
  for (int k = 0; k < n; ++k) {
    const auto& nbrs = graph.neighbors[k];
    auto& wts = graph.weights[k];
    wts.resize(nbrs.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      wts[i] = spectral_similarity(Y.data().col(k), Y.data().col(nbrs[i]));
      total += wts[i];
    }
    bool any_negative = false;
    for (double w : wts) any_negative = any_negative || w < 0.0;
    if (total > 0.0 && !any_negative) {
      for (double& w : wts) w /= total;
    } else if (!nbrs.empty()) {
      // Possible only for signed synthetic inputs; keep the recursion
      // defined (and the weights nonnegative) rather than aborting a run.
      std::cerr << "hsunmix: warning: degenerate similarity normalizer at pixel "
                << k << ", falling back to uniform weights\n";
      const double u = 1.0 / static_cast<double>(nbrs.size());
      for (double& w : wts) w = u;
    }
  }
  graph.validate();
  return graph;
}

WeightSet compute_weights(const HyperCube& Y, const UnmixConfig& cfg) {
  WeightSet ws;
  ws.lambda = cfg.fixed_lambda ? *cfg.fixed_lambda : sparsity_lambda(Y);
  if (cfg.eta > 0.0) {
    ws.graph = similarity_weights(Y, cfg.adjacency);
  } else {
    // neighbor term off: no coupling, and no geometry required
    ws.graph.neighbors.resize(Y.pixels());
    ws.graph.weights.resize(Y.pixels());
  }
  return ws;
}

}  // namespace hsu
