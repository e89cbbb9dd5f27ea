#include "hsunmix/synthgen.hpp"

#include "hsunmix/io.hpp"
#include "hsunmix/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace hsu;

namespace {

SpectralLibrary bundled_library() {
  return read_library_csv(std::filesystem::path(HSUNMIX_DATA_DIR) / "usgs_subset.csv");
}

}  // namespace

TEST_CASE("single-class mosaic is all ones") {
  const AbundanceMatrix S = generate_pure_mosaic(1, 3, 2, 0);
  for (int k = 0; k < 6; ++k) CHECK(S.data()(0, k) == 1.0);
}

TEST_CASE("mosaic columns are indicators and every class appears") {
  const int c = 4;
  const AbundanceMatrix S = generate_pure_mosaic(c, 64, 64, 42);
  std::vector<int> counts(c, 0);
  for (int k = 0; k < S.pixels(); ++k) {
    double sum = 0.0;
    int ones = 0;
    for (int i = 0; i < c; ++i) {
      const double v = S.data()(i, k);
      CHECK((v == 0.0 || v == 1.0));
      sum += v;
      if (v == 1.0) {
        ++ones;
        ++counts[i];
      }
    }
    CHECK(sum == 1.0);
    CHECK(ones == 1);
  }
  // binomial concentration: each class within 4 sigma of N/c
  const double n = 64.0 * 64.0;
  const double sigma = std::sqrt(n * (1.0 / c) * (1.0 - 1.0 / c));
  for (int i = 0; i < c; ++i) {
    CHECK(std::abs(counts[i] - n / c) <= 4.0 * sigma);
  }
}

TEST_CASE("coverage is impossible when classes outnumber pixels") {
  CHECK_THROWS_AS(generate_pure_mosaic(7, 2, 3, 0), Error);
}

TEST_CASE("unit filter is the identity") {
  const AbundanceMatrix S = generate_pure_mosaic(3, 4, 4, 7);
  const AbundanceMatrix M = lowpass_mix(S, 4, 4, 1);
  CHECK((M.data() - S.data()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant field is unchanged by mixing") {
  Matrix one_hot = Matrix::Zero(3, 9);
  one_hot.row(1).setOnes();
  const AbundanceMatrix M = lowpass_mix(AbundanceMatrix(one_hot), 3, 3, 3);
  CHECK((M.data() - one_hot).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("center pixel of a 3x3 image averages all nine columns") {
  const AbundanceMatrix S = generate_pure_mosaic(3, 3, 3, 11);
  const AbundanceMatrix M = lowpass_mix(S, 3, 3, 3);
  Vector mean = Vector::Zero(3);
  for (int k = 0; k < 9; ++k) mean += S.data().col(k);
  mean /= 9.0;
  CHECK((M.data().col(4) - mean).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mixing preserves the simplex and rejects even windows") {
  const AbundanceMatrix S = generate_pure_mosaic(4, 8, 8, 3);
  const AbundanceMatrix M = lowpass_mix(S, 8, 8, 5);
  for (int k = 0; k < M.pixels(); ++k) {
    CHECK(M.data().col(k).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(M.data().col(k).minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(lowpass_mix(S, 8, 8, 2), Error);
}

TEST_CASE("no-noise sentinel returns the input untouched") {
  Matrix X = Matrix::Constant(3, 4, 0.2);
  const Matrix noisy = add_noise(X, kNoNoise, 5);
  CHECK((noisy - X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("0 dB means noise power equals signal power") {
  Matrix X = Matrix::Constant(40, 500, 0.3);
  const Matrix noisy = add_noise(X, 0.0, 8);
  const double signal = X.squaredNorm() / X.size();
  const double noise = (noisy - X).squaredNorm() / X.size();
  const double realized_db = 10.0 * std::log10(signal / noise);
  CHECK(std::abs(realized_db) < 0.2);
}

TEST_CASE("noise variance matches the target within 1% over 1e6 draws") {
  Matrix X = Matrix::Constant(1000, 1000, 0.5);
  const double snr_db = 25.0;
  const Matrix noisy = add_noise(X, snr_db, 9);
  const double power = X.squaredNorm() / X.size();
  const double target_var = power / std::pow(10.0, snr_db / 10.0);
  const double sample_var = (noisy - X).squaredNorm() / X.size();
  CHECK(std::abs(sample_var - target_var) / target_var < 0.01);
}

TEST_CASE("realized scene SNR is within 0.2 dB of target on 64x64") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene scene = make_scene(lib, 6, 64, 64, 3, 25.0, 1);
  const Matrix clean = scene.true_A.data() * scene.true_S.data();
  const double signal = clean.squaredNorm();
  const double noise = (scene.cube.data() - clean).squaredNorm();
  const double realized = 10.0 * std::log10(signal / noise);
  CHECK(std::abs(realized - 25.0) < 0.2);
}

TEST_CASE("paper-default scene composes cleanly") {
  const SpectralLibrary lib = bundled_library();
  REQUIRE(lib.materials() >= 12);
  REQUIRE(lib.bands() == 224);
  const SynthScene scene = make_scene(lib, 6, 64, 64, 3, 25.0, 2);
  CHECK(scene.cube.pixels() == 64 * 64);
  CHECK(scene.cube.bands() == 224);
  CHECK(scene.true_A.endmembers() == 6);

  // mixed image carries no pure pixels
  int indicators = 0;
  for (int k = 0; k < scene.true_S.pixels(); ++k) {
    if (scene.true_S.data().col(k).maxCoeff() >= 1.0 - 1e-12) ++indicators;
  }
  CHECK(indicators == 0);

  // and a healthy share of columns mix two or more materials
  int mixed = 0;
  for (int k = 0; k < scene.true_S.pixels(); ++k) {
    int nz = 0;
    for (int i = 0; i < 6; ++i) nz += scene.true_S.data()(i, k) > 0.0 ? 1 : 0;
    mixed += nz >= 2 ? 1 : 0;
  }
  CHECK(mixed > 0);
}

TEST_CASE("w=1 without noise passes the library spectra through") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene scene = make_scene(lib, 3, 5, 4, 1, kNoNoise, 6, false);
  for (int k = 0; k < scene.cube.pixels(); ++k) {
    int cls = -1;
    for (int i = 0; i < 3; ++i) {
      if (scene.true_S.data()(i, k) == 1.0) cls = i;
    }
    REQUIRE(cls >= 0);
    CHECK((scene.cube.data().col(k) - scene.true_A.data().col(cls))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("scenes are byte-identical across calls with one seed") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene a = make_scene(lib, 4, 10, 10, 3, 20.0, 77);
  const SynthScene b = make_scene(lib, 4, 10, 10, 3, 20.0, 77);
  CHECK((a.cube.data() - b.cube.data()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.material_indices == b.material_indices);
  const SynthScene c = make_scene(lib, 4, 10, 10, 3, 20.0, 78);
  CHECK((a.cube.data() - c.cube.data()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("clean cube equals true_A * true_S before noise") {
  const SpectralLibrary lib = bundled_library();
  const SynthScene scene = make_scene(lib, 4, 8, 8, 3, kNoNoise, 13);
  CHECK((scene.cube.data() - scene.true_A.data() * scene.true_S.data())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}
