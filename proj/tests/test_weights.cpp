#include "hsunmix/weights.hpp"

#include "hsunmix/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace hsu;

namespace {

HyperCube random_cube(int bands, int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  Matrix data(bands, width * height);
  for (int j = 0; j < data.cols(); ++j) {
    for (int i = 0; i < bands; ++i) data(i, j) = 0.05 + rng.uniform();
  }
  return HyperCube(std::move(data), width, height);
}

}  // namespace

TEST_CASE("lambda vanishes when every band is constant") {
  HyperCube Y(Matrix::Constant(5, 12, 0.7), 4, 3);
  CHECK(sparsity_lambda(Y) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("lambda of a one-hot single band matches the closed form") {
  // L=1, N=4, x = (1,0,0,0): |x|_1/|x|_2 = 1 -> (2-1)/sqrt(3)
  Matrix data = Matrix::Zero(1, 4);
  data(0, 0) = 1.0;
  HyperCube Y(std::move(data), 4, 1);
  CHECK(sparsity_lambda(Y) == doctest::Approx(0.57735026918962576).epsilon(1e-12));
}

TEST_CASE("lambda equals the reference formula on a random cube") {
  const HyperCube Y = random_cube(5, 4, 4, 99);
  const int L = Y.bands();
  const int N = Y.pixels();
  double expected = 0.0;
  for (int l = 0; l < L; ++l) {
    double l1 = 0.0, l2 = 0.0;
    for (int k = 0; k < N; ++k) {
      l1 += std::abs(Y.data()(l, k));
      l2 += Y.data()(l, k) * Y.data()(l, k);
    }
    expected += (std::sqrt(double(N)) - l1 / std::sqrt(l2)) / std::sqrt(double(N) - 1);
  }
  expected /= std::sqrt(double(L));
  CHECK(sparsity_lambda(Y) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(sparsity_lambda(Y) >= 0.0);
  CHECK(sparsity_lambda(Y) <= std::sqrt(double(L)));
}

TEST_CASE("lambda error paths") {
  Matrix one_pixel = Matrix::Ones(3, 1);
  CHECK_THROWS_WITH_AS(sparsity_lambda(HyperCube(one_pixel)),
                       doctest::Contains("N >= 2"), Error);
  Matrix zero_band = Matrix::Ones(2, 4);
  zero_band.row(1).setZero();
  CHECK_THROWS_WITH_AS(sparsity_lambda(HyperCube(zero_band, 2, 2)),
                       doctest::Contains("band 1"), Error);
}

TEST_CASE("spectral similarity basics") {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << -3, 0, 1;  // orthogonal to a
  CHECK(spectral_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spectral_similarity(a, b) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(spectral_similarity(a, Vector(2 * a)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spectral_similarity(a, b) == spectral_similarity(b, a));
  CHECK_THROWS_AS(spectral_similarity(a, Vector(Vector::Zero(3))), Error);
}

TEST_CASE("two identical pixels weight each other fully") {
  Matrix data(3, 2);
  data << 0.2, 0.2, 0.4, 0.4, 0.1, 0.1;
  const NeighborGraph g = similarity_weights(HyperCube(data, 2, 1),
                                             Adjacency::kFourConnected);
  REQUIRE(g.neighbors[0] == std::vector<int>{1});
  CHECK(g.weights[0][0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("interior pixel of an identical row splits weight evenly") {
  Matrix data = Matrix::Constant(4, 3, 0.3);
  const NeighborGraph g = similarity_weights(HyperCube(data, 3, 1),
                                             Adjacency::kFourConnected);
  REQUIRE(g.neighbors[1] == std::vector<int>{0, 2});
  CHECK(g.weights[1][0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.weights[1][1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("weight rows sum to one on random cubes") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const HyperCube Y = random_cube(5, 4, 4, seed);
    const NeighborGraph g = similarity_weights(Y, Adjacency::kFourConnected);
    for (int k = 0; k < g.pixels(); ++k) {
      double total = 0.0;
      for (double w : g.weights[k]) total += w;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("rho is invariant to uniform positive scaling of the cube") {
  const HyperCube Y = random_cube(4, 3, 3, 5);
  const NeighborGraph g1 = similarity_weights(Y, Adjacency::kFourConnected);
  const NeighborGraph g2 = similarity_weights(HyperCube(Matrix(3.7 * Y.data()), 3, 3),
                                              Adjacency::kFourConnected);
  for (int k = 0; k < g1.pixels(); ++k) {
    for (std::size_t i = 0; i < g1.weights[k].size(); ++i) {
      CHECK(g1.weights[k][i] == doctest::Approx(g2.weights[k][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate normalizer falls back to uniform weights") {
  // two pixels with opposite spectra: theta = -1 for the single neighbor
  Matrix data(2, 2);
  data << 1.0, -1.0, 0.5, -0.5;
  const NeighborGraph g = similarity_weights(HyperCube(data, 2, 1),
                                             Adjacency::kFourConnected);
  CHECK(g.weights[0][0] == doctest::Approx(1.0));
  CHECK(g.weights[1][0] == doctest::Approx(1.0));
}

TEST_CASE("zero-spectrum pixel is reported") {
  Matrix data(2, 2);
  data << 1.0, 0.0, 0.5, 0.0;
  CHECK_THROWS_WITH_AS(similarity_weights(HyperCube(data, 2, 1),
                                          Adjacency::kFourConnected),
                       doctest::Contains("pixel 1"), Error);
}
