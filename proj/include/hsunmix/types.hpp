#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hsu {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column sums of an abundance matrix must equal 1 within this tolerance.
inline constexpr double kAscTolerance = 1e-9;

/// Error with a stable machine-readable code alongside the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// L bands x N pixels observation matrix, optionally tied to a pixel grid.
///
/// Pixel linearization over the grid is row-major: pixel k sits at grid row
/// k / width, column k % width. Grid geometry (width, height) is required for
/// neighborhood construction but optional otherwise; width == height == 0
/// means "no geometry".
class HyperCube {
 public:
  HyperCube(Matrix data, int width = 0, int height = 0,
            std::vector<double> band_wavelengths = {});

  const Matrix& data() const noexcept { return data_; }
  int bands() const noexcept { return static_cast<int>(data_.rows()); }
  int pixels() const noexcept { return static_cast<int>(data_.cols()); }

  bool has_geometry() const noexcept { return width_ > 0; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }

 private:
  Matrix data_;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> wavelengths_;
};

/// L bands x c endmembers spectral signature matrix. Entries are nonnegative
/// finite reflectances; an all-zero column is rejected as degenerate.
class SignatureMatrix {
 public:
  explicit SignatureMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  int bands() const noexcept { return static_cast<int>(data_.rows()); }
  int endmembers() const noexcept { return static_cast<int>(data_.cols()); }

 private:
  Matrix data_;
};

/// c endmembers x N pixels fractional abundances. Every column lies on the
/// probability simplex: entries in [0, 1], sum 1 within kAscTolerance.
class AbundanceMatrix {
 public:
  explicit AbundanceMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  int endmembers() const noexcept { return static_cast<int>(data_.rows()); }
  int pixels() const noexcept { return static_cast<int>(data_.cols()); }

 private:
  Matrix data_;
};

/// Per-pixel neighbor sets N_k^- (self excluded) with similarity weights
/// rho_kj aligned index-for-index with the neighbor lists. Neighbors are
/// listed in increasing linear pixel index.
struct NeighborGraph {
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<double>> weights;

  int pixels() const noexcept { return static_cast<int>(neighbors.size()); }

  /// Throws Error("invariant-violation", ...) if any weight list is negative
  /// or a nonempty list does not sum to 1 within kAscTolerance, or if the
  /// lists are misaligned.
  void validate() const;
};

enum class InitMode { kRandom, kVcaFcls };
enum class Adjacency { kFourConnected, kEightConnected };

/// All scalars of the unmixing recursion plus initialization and stopping
/// policy. Defaults follow the reference experiments: mu = 0.02, eta = 0.1.
struct UnmixConfig {
  double p = 2.0;    // LMP error power
  double q1 = 2.0;   // neighbor-distance norm order
  double q2 = 1.0;   // sparsity norm order
  double mu = 0.02;  // step size
  double eta = 0.1;  // neighborhood regularization weight

  /// Unset: compute the sparsity weight from the data once before iterating.
  std::optional<double> fixed_lambda;

  int c = 1;           // endmember count
  int max_iter = 200;  // T
  double epsilon = 1e-8;

  InitMode init = InitMode::kVcaFcls;
  Adjacency adjacency = Adjacency::kFourConnected;
  std::uint64_t seed = 0;

  /// Throws Error("invalid-config", ...) on any range violation.
  void validate() const;
};

/// Checks that A is LxC and S is cxN matching Y, on top of the per-type
/// invariants already enforced at construction. Throws
/// Error("dimension-mismatch", ...) naming the offending dimensions.
void validate_dimensions(const HyperCube& Y, const SignatureMatrix& A,
                         const AbundanceMatrix& S);

/// Grid adjacency lists for a width x height image, 4- or 8-connected,
/// neighbors in increasing linear pixel index. Weights are left empty.
NeighborGraph grid_neighbors(int width, int height, Adjacency adjacency);

}  // namespace hsu
