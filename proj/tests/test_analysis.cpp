#include "hsunmix/analysis.hpp"

#include "hsunmix/io.hpp"
#include "hsunmix/rng.hpp"
#include "hsunmix/weights.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace hsu;

namespace {

SpectralLibrary bundled_library() {
  return read_library_csv(std::filesystem::path(HSUNMIX_DATA_DIR) / "usgs_subset.csv");
}

NeighborGraph no_neighbors() {
  NeighborGraph g;
  g.neighbors.resize(1);
  g.weights.resize(1);
  return g;
}

}  // namespace

TEST_CASE("identity signatures with no regularization give bound 2") {
  const SignatureMatrix A(Matrix::Identity(2, 2));
  CHECK(step_size_bound(A, no_neighbors(), 0.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("bound matches an independent eigensolver") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix Am(6, 3);
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 6; ++i) Am(i, j) = rng.uniform(0.05, 1.0);
    }
    const double eta = rng.uniform(0.0, 0.3);
    const double lambda = rng.uniform(0.0, 0.2);
    const double bound = step_size_bound(SignatureMatrix(Am), no_neighbors(), eta, lambda);
    const double lam_max = oracle::max_eigen_power(Am.transpose() * Am);
    CHECK(bound == doctest::Approx(2.0 / (lam_max + 2 * eta - lambda)).epsilon(1e-9));
  }
}

TEST_CASE("nonpositive denominator reports all three terms") {
  const SignatureMatrix A(Matrix::Constant(2, 1, 1e-9));
  CHECK_THROWS_WITH_AS(step_size_bound(A, no_neighbors(), 0.0, 1.0),
                       doctest::Contains("lambda"), Error);
}

TEST_CASE("bound is monotone decreasing in eta and increasing in lambda") {
  Rng rng(42);
  Matrix Am(5, 3);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 5; ++i) Am(i, j) = rng.uniform(0.1, 1.0);
  }
  const SignatureMatrix A(Am);
  double prev = step_size_bound(A, no_neighbors(), 0.0, 0.0);
  for (double eta : {0.1, 0.2, 0.4}) {
    const double cur = step_size_bound(A, no_neighbors(), eta, 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
  prev = step_size_bound(A, no_neighbors(), 0.1, 0.0);
  for (double lambda : {0.05, 0.1, 0.2}) {
    const double cur = step_size_bound(A, no_neighbors(), 0.1, lambda);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("bound scales inversely with the squared signature scale") {
  Rng rng(43);
  Matrix Am(5, 2);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 5; ++i) Am(i, j) = rng.uniform(0.1, 1.0);
  }
  const double base = step_size_bound(SignatureMatrix(Am), no_neighbors(), 0.0, 0.0);
  const double scaled = step_size_bound(SignatureMatrix(Matrix(2.0 * Am)),
                                        no_neighbors(), 0.0, 0.0);
  CHECK(scaled == doctest::Approx(base / 4.0).epsilon(1e-12));
}

TEST_CASE("convergence probes label the canonical step sizes") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene scene = make_scene(lib, 3, 12, 12, 3, 30.0, 21);
  UnmixConfig cfg;
  cfg.c = 3;
  cfg.p = 2.0;
  cfg.q1 = 2.0;
  cfg.q2 = 1.0;
  cfg.eta = 0.1;
  cfg.init = InitMode::kVcaFcls;
  cfg.seed = 21;

  const WeightSet w = compute_weights(scene.cube, cfg);
  const double bound = step_size_bound(scene.true_A, w.graph, cfg.eta, w.lambda);
  const StabilityReport rep =
      convergence_probe(scene, cfg, {0.0, 0.5 * bound, 10.0 * bound});

  CHECK(rep.mu_bound == doctest::Approx(bound));
  CHECK(rep.mu_bound == doctest::Approx(2.0 / (rep.max_eigen + 2 * rep.eta - rep.lambda)));
  REQUIRE(rep.empirical.size() == 3);

  CHECK(rep.empirical[0].degenerate);
  CHECK(rep.empirical[0].converged);
  CHECK(rep.empirical[0].final_cost == rep.empirical[0].initial_cost);

  CHECK(rep.empirical[1].converged);
  CHECK_FALSE(rep.empirical[1].degenerate);

  CHECK_FALSE(rep.empirical[2].converged);
}

TEST_CASE("neighbor-sum reading is reported alongside the reduction") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene scene = make_scene(lib, 3, 8, 8, 3, 30.0, 5);
  UnmixConfig cfg;
  cfg.c = 3;
  cfg.init = InitMode::kRandom;
  cfg.seed = 5;
  const StabilityReport rep = convergence_probe(scene, cfg, {});
  // interior pixels of an 8x8 4-connected grid have four neighbors
  CHECK(rep.max_eigen_neighbor_sum == doctest::Approx(4.0 * rep.max_eigen));
  CHECK(rep.mu_bound_neighbor_sum < rep.mu_bound);
}
