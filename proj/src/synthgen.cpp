#include "hsunmix/synthgen.hpp"

#include "hsunmix/rng.hpp"

#include <cmath>
#include <vector>

namespace hsu {

namespace {

bool column_is_indicator(const Eigen::Ref<const Vector>& col) {
  return col.maxCoeff() >= 1.0 - 1e-12;
}

Matrix draw_mosaic(int c, int n, Rng& rng) {
  Matrix S = Matrix::Zero(c, n);
  std::vector<int> counts(c, 0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    S.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int k = 0; k < n; ++k) {
      const int cls = rng.uniform_int(c);
      S(cls, k) = 1.0;
      ++counts[cls];
    }
    bool covered = true;
    for (int i = 0; i < c; ++i) covered = covered && counts[i] > 0;
    if (covered) return S;
  }
  throw Error("impossible-coverage", "could not place every class at least once");
}

}  // namespace

AbundanceMatrix generate_pure_mosaic(int c, int width, int height,
                                     std::uint64_t seed) {
  const int n = width * height;
  if (c < 1 || width < 1 || height < 1) {
    throw Error("invalid-config", "mosaic needs c >= 1 and a positive grid");
  }
  if (c > n) {
    throw Error("impossible-coverage",
                std::to_string(c) + " classes cannot all appear in " +
                    std::to_string(n) + " pixels");
  }
  Rng rng(derive_seed(seed, "mosaic"));
  return AbundanceMatrix(draw_mosaic(c, n, rng));
}

AbundanceMatrix lowpass_mix(const AbundanceMatrix& S, int width, int height,
                            int filter_size) {
  if (filter_size < 1 || filter_size % 2 == 0) {
    throw Error("even-filter-size",
                "filter size must be odd and >= 1, got " + std::to_string(filter_size));
  }
  if (width * height != S.pixels()) {
    throw Error("dimension-mismatch", "grid does not match abundance pixel count");
  }
  if (filter_size == 1) return S;

  const int c = S.endmembers();
  const int half = filter_size / 2;
  Matrix out(c, S.pixels());
  Vector acc(c);
  for (int r = 0; r < height; ++r) {
    for (int col = 0; col < width; ++col) {
      acc.setZero();
      int count = 0;
      const int r0 = std::max(r - half, 0);
      const int r1 = std::min(r + half, height - 1);
      const int c0 = std::max(col - half, 0);
      const int c1 = std::min(col + half, width - 1);
      for (int rr = r0; rr <= r1; ++rr) {
        for (int cc = c0; cc <= c1; ++cc) {
          acc += S.data().col(rr * width + cc);
          ++count;
        }
      }
      out.col(r * width + col) = acc / static_cast<double>(count);
    }
  }
  return AbundanceMatrix(std::move(out));
}

Matrix add_noise(const Matrix& X, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db)) return X;
  const double power = X.squaredNorm() / static_cast<double>(X.size());
  if (power <= 0.0) {
    throw Error("invalid-config", "cannot scale noise against an all-zero signal");
  }
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  Rng rng(derive_seed(seed, "noise"));
  Matrix noisy = X;
  for (int j = 0; j < noisy.cols(); ++j) {
    for (int i = 0; i < noisy.rows(); ++i) {
      noisy(i, j) += sigma * rng.normal();
    }
  }
  return noisy;
}

SynthScene make_scene(const SpectralLibrary& library, int c, int width,
                      int height, int filter_size, double snr_db,
                      std::uint64_t seed, bool forbid_pure_pixels) {
  if (library.materials() < c) {
    throw Error("invalid-config", "library holds fewer than c materials");
  }

  // c distinct library columns via partial Fisher-Yates
  Rng pick_rng(derive_seed(seed, "select"));
  std::vector<int> order(library.materials());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (int i = 0; i < c; ++i) {
    const int j = i + pick_rng.uniform_int(static_cast<int>(order.size()) - i);
    std::swap(order[i], order[j]);
  }
  std::vector<int> chosen(order.begin(), order.begin() + c);

  Matrix A(library.bands(), c);
  for (int i = 0; i < c; ++i) A.col(i) = library.spectra.col(chosen[i]);
  SignatureMatrix true_A(std::move(A));

  const bool check_purity = forbid_pure_pixels && filter_size > 1;
  AbundanceMatrix mixed = AbundanceMatrix(Matrix::Ones(1, 1));
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    AbundanceMatrix mosaic =
        generate_pure_mosaic(c, width, height, derive_seed(seed, "mosaic-attempt", attempt));
    mixed = lowpass_mix(mosaic, width, height, filter_size);
    ok = true;
    if (check_purity) {
      for (int k = 0; k < mixed.pixels() && ok; ++k) {
        ok = !column_is_indicator(mixed.data().col(k));
      }
    }
  }
  if (!ok) {
    throw Error("impossible-coverage",
                "could not generate a scene free of pure pixels; "
                "enlarge the grid or the filter");
  }

  const Matrix clean = true_A.data() * mixed.data();
  Matrix noisy = add_noise(clean, snr_db, derive_seed(seed, "noise-apply"));
  HyperCube cube(std::move(noisy), width, height, library.wavelengths);

  return SynthScene{std::move(cube), std::move(true_A), std::move(mixed),
                    snr_db, filter_size, std::move(chosen)};
}

}  // namespace hsu
