#pragma once

#include "hsunmix/types.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hsu {

/// Columns of named reference spectra sampled on a common wavelength axis.
struct SpectralLibrary {
  std::vector<std::string> names;   // M materials
  Matrix spectra;                   // L x M
  std::vector<double> wavelengths;  // length L, micrometers

  int bands() const noexcept { return static_cast<int>(spectra.rows()); }
  int materials() const noexcept { return static_cast<int>(spectra.cols()); }
};

struct SynthScene {
  HyperCube cube;
  SignatureMatrix true_A;
  AbundanceMatrix true_S;
  double snr_db = 0.0;
  int filter_size = 1;
  std::vector<int> material_indices;  // library columns used, in true_A order
};

/// Sentinel for "no noise".
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// One-hot abundance mosaic: each pixel is assigned one of c classes
/// uniformly at random; resampled until every class appears at least once.
/// Throws Error("impossible-coverage") when c > width*height.
AbundanceMatrix generate_pure_mosaic(int c, int width, int height,
                                     std::uint64_t seed);

/// w x w box filter over the abundance grid, window clipped at the image
/// boundary (mean over in-image columns). Averages of simplex points stay on
/// the simplex. Throws Error("even-filter-size") unless w is odd, w >= 1.
AbundanceMatrix lowpass_mix(const AbundanceMatrix& S, int width, int height,
                            int filter_size);

/// Adds i.i.d. zero-mean Gaussian noise with variance
/// sigma^2 = mean(X.^2) / 10^(snr_db/10) (global mean-square signal power).
/// snr_db = kNoNoise returns X unchanged.
Matrix add_noise(const Matrix& X, double snr_db, std::uint64_t seed);

/// Full synthetic protocol: draw c distinct library signatures, build a pure
/// mosaic, mix with the w x w low-pass filter, add noise at snr_db. When
/// forbid_pure_pixels is set and w > 1, mosaics whose mixed image still
/// contains an indicator column are regenerated (bounded retries).
SynthScene make_scene(const SpectralLibrary& library, int c, int width,
                      int height, int filter_size, double snr_db,
                      std::uint64_t seed, bool forbid_pure_pixels = true);

}  // namespace hsu
