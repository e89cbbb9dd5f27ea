#include "hsunmix/unmixer.hpp"

#include "hsunmix/baselines.hpp"
#include "hsunmix/rng.hpp"
#include "hsunmix/simplex.hpp"

#include <cmath>
#include <string>

namespace hsu {

namespace {

/// Floor applied inside every |.|^(q-2) magnitude and norm denominator so
/// updates stay defined at exact zeros and coincident neighbors.
constexpr double kMagnitudeFloor = 1e-12;

/// Sign of the neighbor-coupling term. Descending the weighted
/// neighbor-distance penalty moves s_k toward its neighbors, i.e. the term
/// enters as -mu*eta*(s_k - s_j)(...); the mean-error stability analysis
/// behind the step-size bound assumes the same attraction.
constexpr double kNeighborTermSign = -1.0;

double lq_norm(const Vector& v, double q) {
  if (q == 2.0) return v.norm();
  if (q == 1.0) return v.cwiseAbs().sum();
  return std::pow(v.cwiseAbs().array().pow(q).sum(), 1.0 / q);
}

/// Elementwise v .* max(|v|, floor)^(q-2).
Vector signed_power(const Vector& v, double q) {
  if (q == 2.0) return v;
  return v.array() * v.cwiseAbs().cwiseMax(kMagnitudeFloor).array().pow(q - 2.0);
}

}  // namespace

std::string to_string(StopReason reason) {
  return reason == StopReason::kMaxIter ? "max-iter" : "cost-delta";
}

double objective(const HyperCube& Y, const SignatureMatrix& A,
                 const AbundanceMatrix& S, const WeightSet& weights,
                 const UnmixConfig& cfg) {
  validate_dimensions(Y, A, S);
  const Matrix E = Y.data() - A.data() * S.data();
  double value = std::pow(E.norm(), cfg.p);

  if (cfg.eta > 0.0 && !weights.graph.neighbors.empty()) {
    double nbr = 0.0;
    for (int k = 0; k < S.pixels(); ++k) {
      const auto& nbrs = weights.graph.neighbors[k];
      const auto& wts = weights.graph.weights[k];
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        nbr += wts[i] * lq_norm(S.data().col(k) - S.data().col(nbrs[i]), cfg.q1);
      }
    }
    value += cfg.eta * nbr;
  }

  if (weights.lambda > 0.0) {
    double sp = 0.0;
    for (int k = 0; k < S.pixels(); ++k) {
      sp += lq_norm(S.data().col(k), cfg.q2);
    }
    value += weights.lambda * sp;
  }

  if (!std::isfinite(value)) {
    throw Error("non-finite-objective", "objective overflowed");
  }
  return value;
}

AbundanceMatrix abundance_step(const HyperCube& Y, const SignatureMatrix& A,
                               const AbundanceMatrix& S, const WeightSet& weights,
                               const UnmixConfig& cfg) {
  validate_dimensions(Y, A, S);
  const int n = Y.pixels();
  const int c = A.endmembers();

  // Data term for all pixels at once: mu * A^T (|E|^(p-2) .* E).
  Matrix E = Y.data() - A.data() * S.data();
  if (cfg.p != 2.0) {
    E.array() *= E.cwiseAbs().cwiseMax(kMagnitudeFloor).array().pow(cfg.p - 2.0);
  }
  const Matrix G = cfg.mu * (A.data().transpose() * E);

  const bool use_graph = cfg.eta > 0.0 && !weights.graph.neighbors.empty();
  const bool use_sparsity = weights.lambda > 0.0;

  Matrix S_new(c, n);
  Vector r(c);
  for (int k = 0; k < n; ++k) {
    r = S.data().col(k) + G.col(k);

    if (use_graph) {
      const auto& nbrs = weights.graph.neighbors[k];
      const auto& wts = weights.graph.weights[k];
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const Vector d = S.data().col(k) - S.data().col(nbrs[i]);
        const double denom =
            std::pow(std::max(lq_norm(d, cfg.q1), kMagnitudeFloor), cfg.q1 - 1.0);
        r += (kNeighborTermSign * cfg.mu * cfg.eta * wts[i] / denom) *
             signed_power(d, cfg.q1);
      }
    }

    if (use_sparsity) {
      const Vector sk = S.data().col(k);
      const double denom =
          std::pow(std::max(lq_norm(sk, cfg.q2), kMagnitudeFloor), cfg.q2 - 1.0);
      r -= (cfg.mu * weights.lambda / denom) * signed_power(sk, cfg.q2);
    }

    if (!r.allFinite()) {
      throw Error("non-finite-update",
                  "abundance update for pixel " + std::to_string(k) + " is not finite");
    }
    S_new.col(k) = project_simplex(r);
  }
  return AbundanceMatrix(std::move(S_new));
}

SignatureMatrix signature_step(const HyperCube& Y, const SignatureMatrix& A,
                               const AbundanceMatrix& S) {
  validate_dimensions(Y, A, S);
  const Matrix St = S.data().transpose();
  const Matrix numer = Y.data() * St;
  const Matrix denom = (A.data() * (S.data() * St)).cwiseMax(kMagnitudeFloor);
  return SignatureMatrix(A.data().cwiseProduct(numer.cwiseQuotient(denom)));
}

bool should_stop(double J_new, double J_old, double eps) {
  return std::abs(J_new - J_old) < eps;
}

std::pair<SignatureMatrix, AbundanceMatrix> initialize(const HyperCube& Y,
                                                       const UnmixConfig& cfg) {
  const int c = cfg.c;
  if (cfg.init == InitMode::kVcaFcls) {
    SignatureMatrix A = vca(Y, c, cfg.seed);
    AbundanceMatrix S = fcls(Y, A);
    return {std::move(A), std::move(S)};
  }

  Rng rng(derive_seed(cfg.seed, "init-random"));
  const double scale = Y.data().maxCoeff();
  Matrix A(Y.bands(), c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < Y.bands(); ++i) {
      A(i, j) = rng.uniform() * scale;
    }
  }
  Matrix S(c, Y.pixels());
  for (int k = 0; k < Y.pixels(); ++k) {
    double total = 0.0;
    for (int i = 0; i < c; ++i) {
      // exponential draws normalized -> uniform on the simplex
      S(i, k) = -std::log(1.0 - rng.uniform());
      total += S(i, k);
    }
    S.col(k) = project_simplex(S.col(k) / total);
  }
  return {SignatureMatrix(std::move(A)), AbundanceMatrix(std::move(S))};
}

UnmixResult unmix_from(const HyperCube& Y, const UnmixConfig& cfg,
                       const WeightSet& weights, SignatureMatrix A,
                       AbundanceMatrix S) {
  std::vector<double> trace;
  trace.reserve(cfg.max_iter);
  StopReason reason = StopReason::kMaxIter;
  double J_prev = 0.0;

  for (int t = 0; t < cfg.max_iter; ++t) {
    A = signature_step(Y, A, S);
    S = abundance_step(Y, A, S, weights, cfg);
    double J = 0.0;
    try {
      J = objective(Y, A, S, weights, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at iteration " + std::to_string(t + 1));
    }
    trace.push_back(J);
    if (t > 0 && should_stop(J, J_prev, cfg.epsilon)) {
      reason = StopReason::kCostDelta;
      break;
    }
    J_prev = J;
  }

  UnmixResult result{std::move(A), std::move(S), static_cast<int>(trace.size()),
                     std::move(trace), reason};
  return result;
}

UnmixResult unmix(const HyperCube& Y, const UnmixConfig& cfg) {
  cfg.validate();
  if (cfg.c > std::min(Y.bands(), Y.pixels())) {
    throw Error("invalid-config", "endmember count exceeds min(bands, pixels)");
  }
  const WeightSet weights = compute_weights(Y, cfg);
  auto [A, S] = initialize(Y, cfg);
  return unmix_from(Y, cfg, weights, std::move(A), std::move(S));
}

}  // namespace hsu
