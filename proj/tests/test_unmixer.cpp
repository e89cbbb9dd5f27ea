#include "hsunmix/unmixer.hpp"

#include "hsunmix/metrics.hpp"
#include "hsunmix/rng.hpp"
#include "hsunmix/simplex.hpp"
#include "hsunmix/synthgen.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace hsu;

namespace {

Matrix random_signatures(int bands, int c, Rng& rng, double scale = 1.0) {
  Matrix A(bands, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < bands; ++i) A(i, j) = (0.05 + rng.uniform()) * scale;
  }
  return A;
}

Matrix random_simplex_columns(int c, int n, Rng& rng) {
  Matrix S(c, n);
  for (int k = 0; k < n; ++k) {
    double total = 0.0;
    for (int i = 0; i < c; ++i) {
      S(i, k) = -std::log(1.0 - rng.uniform());
      total += S(i, k);
    }
    S.col(k) = project_simplex(S.col(k) / total);
  }
  return S;
}

WeightSet empty_weights(int pixels) {
  WeightSet w;
  w.lambda = 0.0;
  w.graph.neighbors.resize(pixels);
  w.graph.weights.resize(pixels);
  return w;
}

}  // namespace

TEST_CASE("objective is zero for an exact factorization") {
  Rng rng(1);
  Matrix Am = random_signatures(4, 2, rng);
  Matrix Sm = random_simplex_columns(2, 6, rng);
  HyperCube Y(Am * Sm, 3, 2);
  UnmixConfig cfg;
  cfg.c = 2;
  cfg.eta = 0.0;
  cfg.fixed_lambda = 0.0;
  const double J = objective(Y, SignatureMatrix(Am), AbundanceMatrix(Sm),
                             empty_weights(6), cfg);
  CHECK(J == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("objective of a unit scalar sparsity term is one") {
  // single pixel, c=1, S=[1], lambda=1, q2=1, eta=0, Y=A
  Matrix Am = Matrix::Constant(3, 1, 0.4);
  Matrix Sm = Matrix::Ones(1, 1);
  HyperCube Y(Am * Sm, 1, 1);
  UnmixConfig cfg;
  cfg.c = 1;
  cfg.eta = 0.0;
  cfg.q2 = 1.0;
  WeightSet w = empty_weights(1);
  w.lambda = 1.0;
  CHECK(objective(Y, SignatureMatrix(Am), AbundanceMatrix(Sm), w, cfg) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("objective matches a straight-line recomputation") {
  Rng rng(2);
  const int c = 3, w = 3, h = 2, n = w * h, L = 5;
  Matrix Am = random_signatures(L, c, rng);
  Matrix Sm = random_simplex_columns(c, n, rng);
  Matrix noise(L, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < L; ++i) noise(i, j) = 0.01 * rng.normal();
  }
  HyperCube Y((Am * Sm + noise).cwiseMax(0.01), w, h);

  UnmixConfig cfg;
  cfg.c = c;
  cfg.p = 1.75;
  cfg.q1 = 2.0;
  cfg.q2 = 1.0;
  cfg.eta = 0.1;
  const WeightSet weights = compute_weights(Y, cfg);

  const double J = objective(Y, SignatureMatrix(Am), AbundanceMatrix(Sm), weights, cfg);
  const double ref = oracle::objective_ref(Y.data(), Am, Sm, weights.graph,
                                           weights.lambda, cfg.p, cfg.q1, cfg.q2,
                                           cfg.eta);
  CHECK(J == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("eta=0, lambda=0, p=2 reduces to a projected gradient step") {
  Rng rng(3);
  const int c = 3, n = 8, L = 6;
  Matrix Am = random_signatures(L, c, rng);
  Matrix Sm = random_simplex_columns(c, n, rng);
  Matrix Ym = random_signatures(L, n, rng, 0.5);
  HyperCube Y(Ym, 4, 2);

  UnmixConfig cfg;
  cfg.c = c;
  cfg.p = 2.0;
  cfg.eta = 0.0;
  cfg.fixed_lambda = 0.0;
  cfg.mu = 0.05;

  const AbundanceMatrix out = abundance_step(Y, SignatureMatrix(Am),
                                             AbundanceMatrix(Sm), empty_weights(n), cfg);
  for (int k = 0; k < n; ++k) {
    const Vector step = Sm.col(k) + cfg.mu * Am.transpose() * (Ym.col(k) - Am * Sm.col(k));
    const Vector ref = oracle::project_simplex_enum(step);
    CHECK((out.data().col(k) - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mu=0 leaves projected abundances untouched") {
  Rng rng(4);
  Matrix Am = random_signatures(5, 3, rng);
  Matrix Sm = random_simplex_columns(3, 6, rng);
  HyperCube Y(Matrix(Am * Sm), 3, 2);
  UnmixConfig cfg;
  cfg.c = 3;
  cfg.mu = 0.0;
  cfg.eta = 0.1;
  const WeightSet weights = compute_weights(Y, cfg);
  const AbundanceMatrix out =
      abundance_step(Y, SignatureMatrix(Am), AbundanceMatrix(Sm), weights, cfg);
  for (int k = 0; k < 6; ++k) {
    for (int i = 0; i < 3; ++i) CHECK(out.data()(i, k) == Sm(i, k));
  }
}

TEST_CASE("abundance step matches the term-by-term reference") {
  // the documented closed form on a 2-pixel c=2 instance with p=q1=q2=2,
  // then random 3x3-grid instances with the benchmark exponents
  Rng rng(5);
  struct Case {
    int w, h, c, L;
    double p, q1, q2;
  };
  const Case cases[] = {{2, 1, 2, 4, 2.0, 2.0, 2.0},
                        {3, 3, 3, 6, 2.0, 2.0, 2.0},
                        {3, 3, 4, 8, 1.75, 2.0, 1.0},
                        {3, 3, 3, 5, 1.5, 1.0, 0.5}};
  for (const auto& tc : cases) {
    const int n = tc.w * tc.h;
    Matrix Am = random_signatures(tc.L, tc.c, rng);
    Matrix Sm = random_simplex_columns(tc.c, n, rng);
    Matrix Ym = random_signatures(tc.L, n, rng, 0.4);
    HyperCube Y(Ym, tc.w, tc.h);

    UnmixConfig cfg;
    cfg.c = tc.c;
    cfg.p = tc.p;
    cfg.q1 = tc.q1;
    cfg.q2 = tc.q2;
    cfg.mu = 0.03;
    cfg.eta = 0.1;
    const WeightSet weights = compute_weights(Y, cfg);

    const AbundanceMatrix out =
        abundance_step(Y, SignatureMatrix(Am), AbundanceMatrix(Sm), weights, cfg);
    const Matrix pre = oracle::abundance_update_ref(Ym, Am, Sm, weights.graph,
                                                    weights.lambda, tc.p, tc.q1,
                                                    tc.q2, cfg.mu, cfg.eta);
    for (int k = 0; k < n; ++k) {
      const Vector ref = oracle::project_simplex_enum(pre.col(k));
      CHECK((out.data().col(k) - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("p=2 data term equals the finite-difference gradient") {
  // d/ds ||y - A s||^2 = -2 A^T e; the update direction A^T e must match
  // central differences of f(s) = 0.5 ||y - A s||^2 up to the sign
  Rng rng(6);
  const int c = 4, L = 7;
  Matrix Am = random_signatures(L, c, rng);
  Vector s = random_simplex_columns(c, 1, rng).col(0);
  Vector y = random_signatures(L, 1, rng, 0.5).col(0);

  const Vector analytic = Am.transpose() * (y - Am * s);
  const double h = 1e-6;
  for (int i = 0; i < c; ++i) {
    Vector sp = s, sm = s;
    sp[i] += h;
    sm[i] -= h;
    const double fp = 0.5 * (y - Am * sp).squaredNorm();
    const double fm = 0.5 * (y - Am * sm).squaredNorm();
    const double fd = (fp - fm) / (2 * h);
    CHECK(std::abs(-fd - analytic[i]) / std::max(1.0, std::abs(analytic[i])) < 1e-5);
  }
}

TEST_CASE("signature step fixes exact factorizations and absorbs zeros") {
  Rng rng(7);
  Matrix Am = random_signatures(4, 2, rng);
  Am(2, 0) = 0.0;
  Matrix Sm = random_simplex_columns(2, 6, rng);
  HyperCube Y(Matrix(Am * Sm), 3, 2);
  const SignatureMatrix next = signature_step(Y, SignatureMatrix(Am), AbundanceMatrix(Sm));
  CHECK((next.data() - Am).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(next.data()(2, 0) == 0.0);
}

TEST_CASE("signature step decreases the residual on perturbed instances") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix Am = random_signatures(4, 2, rng);
    Matrix Sm = random_simplex_columns(2, 6, rng);
    Matrix Ym = Am * Sm;
    for (int j = 0; j < Ym.cols(); ++j) {
      for (int i = 0; i < Ym.rows(); ++i) Ym(i, j) += 0.01 * rng.normal();
    }
    Ym = Ym.cwiseMax(1e-6);
    HyperCube Y(Ym, 3, 2);
    const double before = (Ym - Am * Sm).squaredNorm();
    const SignatureMatrix next =
        signature_step(Y, SignatureMatrix(Am), AbundanceMatrix(Sm));
    const double after = (Ym - next.data() * Sm).squaredNorm();
    CHECK(after < before);
  }
}

TEST_CASE("stopping rule") {
  CHECK(should_stop(1.0, 1.0, 1e-8));
  CHECK_FALSE(should_stop(1.0, 2.0, 1e-8));
  CHECK(should_stop(1.0, 1.0 + 5e-9, 1e-8));
}

TEST_CASE("unmix runs exactly one iteration when T = 1") {
  Rng rng(9);
  Matrix Am = random_signatures(5, 2, rng);
  Matrix Sm = random_simplex_columns(2, 4, rng);
  HyperCube Y(Matrix(Am * Sm), 2, 2);
  UnmixConfig cfg;
  cfg.c = 2;
  cfg.max_iter = 1;
  cfg.init = InitMode::kRandom;
  cfg.seed = 3;
  const UnmixResult res = unmix(Y, cfg);
  CHECK(res.iterations_run == 1);
  CHECK(res.cost_trace.size() == 1);
  CHECK(res.stop_reason == StopReason::kMaxIter);
}

TEST_CASE("unmix result invariants hold and the cost-delta stop fires") {
  Rng rng(10);
  Matrix Am = random_signatures(6, 2, rng);
  Matrix Sm = random_simplex_columns(2, 9, rng);
  HyperCube Y(Matrix(Am * Sm), 3, 3);
  UnmixConfig cfg;
  cfg.c = 2;
  cfg.max_iter = 3000;
  cfg.epsilon = 1e-7;
  cfg.init = InitMode::kRandom;
  cfg.seed = 4;
  const UnmixResult res = unmix(Y, cfg);
  CHECK(res.iterations_run <= cfg.max_iter);
  CHECK(res.cost_trace.size() == static_cast<std::size_t>(res.iterations_run));
  CHECK(res.stop_reason == StopReason::kCostDelta);
  CHECK(res.iterations_run < cfg.max_iter);
  for (int k = 0; k < res.S.pixels(); ++k) {
    CHECK(res.S.data().col(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.S.data().col(k).minCoeff() >= 0.0);
  }
  CHECK(res.A.data().minCoeff() >= 0.0);
}

TEST_CASE("unmix improves on its initialization for a noiseless c=2 scene") {
  Rng rng(11);
  Matrix Am = random_signatures(8, 2, rng);
  Matrix Sm = random_simplex_columns(2, 16, rng);
  HyperCube Y(Matrix(Am * Sm), 4, 4);

  UnmixConfig cfg;
  cfg.c = 2;
  cfg.p = 2.0;
  cfg.q1 = 2.0;
  cfg.q2 = 2.0;
  cfg.mu = 0.02;
  cfg.eta = 0.1;
  cfg.max_iter = 150;
  cfg.init = InitMode::kRandom;
  cfg.seed = 12;

  const auto [A0, S0] = initialize(Y, cfg);
  const SignatureMatrix truth(Am);
  const double before = evaluate(truth, AbundanceMatrix(Sm), A0, S0).rms_sad;
  const UnmixResult res = unmix(Y, cfg);
  const double after = evaluate(truth, AbundanceMatrix(Sm), res.A, res.S).rms_sad;
  CHECK(after < before);
}

TEST_CASE("eta = 0 runs without grid geometry") {
  Rng rng(15);
  Matrix Am = random_signatures(5, 2, rng);
  Matrix Sm = random_simplex_columns(2, 7, rng);
  HyperCube Y(Matrix(Am * Sm));  // no geometry
  UnmixConfig cfg;
  cfg.c = 2;
  cfg.eta = 0.0;
  cfg.max_iter = 5;
  cfg.init = InitMode::kRandom;
  cfg.seed = 15;
  CHECK_NOTHROW(unmix(Y, cfg));
}

TEST_CASE("without neighbor coupling the sweep is pixel-order equivariant") {
  Rng rng(12);
  const int c = 3, n = 6, L = 5;
  Matrix Am = random_signatures(L, c, rng);
  Matrix Sm = random_simplex_columns(c, n, rng);
  Matrix Ym = random_signatures(L, n, rng, 0.5);

  UnmixConfig cfg;
  cfg.c = c;
  cfg.p = 1.75;
  cfg.q2 = 1.0;
  cfg.mu = 0.03;
  cfg.eta = 0.1;  // eta on, but the graph below carries no neighbors
  WeightSet w = empty_weights(n);
  w.lambda = 0.2;

  const AbundanceMatrix out = abundance_step(HyperCube(Ym, 3, 2), SignatureMatrix(Am),
                                             AbundanceMatrix(Sm), w, cfg);

  // reverse the pixel order and repeat
  Matrix Yr(L, n), Sr(c, n);
  for (int k = 0; k < n; ++k) {
    Yr.col(k) = Ym.col(n - 1 - k);
    Sr.col(k) = Sm.col(n - 1 - k);
  }
  const AbundanceMatrix out_r = abundance_step(HyperCube(Yr, 3, 2), SignatureMatrix(Am),
                                               AbundanceMatrix(Sr), w, cfg);
  for (int k = 0; k < n; ++k) {
    CHECK((out.data().col(k) - out_r.data().col(n - 1 - k)).cwiseAbs().maxCoeff() == 0.0);
  }
}
