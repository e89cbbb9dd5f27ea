#include "hsunmix/types.hpp"

#include <cmath>
#include <sstream>

namespace hsu {

namespace {

std::string dim_string(long rows, long cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

}  // namespace

HyperCube::HyperCube(Matrix data, int width, int height,
                     std::vector<double> band_wavelengths)
    : data_(std::move(data)),
      width_(width),
      height_(height),
      wavelengths_(std::move(band_wavelengths)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw Error("invariant-violation",
                "HyperCube needs at least one band and one pixel, got " +
                    dim_string(data_.rows(), data_.cols()));
  }
  if (!data_.allFinite()) {
    throw Error("invariant-violation", "HyperCube contains non-finite entries");
  }
  if (width_ < 0 || height_ < 0 || (width_ > 0) != (height_ > 0)) {
    throw Error("invariant-violation", "HyperCube grid geometry must give both width and height");
  }
  if (width_ > 0 &&
      static_cast<long>(width_) * static_cast<long>(height_) != data_.cols()) {
    throw Error("invariant-violation",
                "HyperCube width*height = " + std::to_string(width_) + "*" +
                    std::to_string(height_) + " does not match pixel count " +
                    std::to_string(data_.cols()));
  }
  if (!wavelengths_.empty() &&
      wavelengths_.size() != static_cast<std::size_t>(data_.rows())) {
    throw Error("invariant-violation",
                "HyperCube wavelength list length does not match band count");
  }
}

SignatureMatrix::SignatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw Error("invariant-violation", "SignatureMatrix must be nonempty");
  }
  if (!data_.allFinite()) {
    throw Error("invariant-violation", "SignatureMatrix contains non-finite entries");
  }
  if ((data_.array() < 0.0).any()) {
    throw Error("invariant-violation", "SignatureMatrix contains negative entries");
  }
  for (int j = 0; j < data_.cols(); ++j) {
    if (data_.col(j).maxCoeff() <= 0.0) {
      throw Error("invariant-violation",
                  "SignatureMatrix column " + std::to_string(j) + " is all zero");
    }
  }
}

AbundanceMatrix::AbundanceMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw Error("invariant-violation", "AbundanceMatrix must be nonempty");
  }
  if (!data_.allFinite()) {
    throw Error("invariant-violation", "AbundanceMatrix contains non-finite entries");
  }
  for (int k = 0; k < data_.cols(); ++k) {
    for (int n = 0; n < data_.rows(); ++n) {
      const double v = data_(n, k);
      if (v < 0.0 || v > 1.0) {
        throw Error("invariant-violation",
                    "ANC: abundance (" + std::to_string(n) + ", " + std::to_string(k) +
                        ") = " + std::to_string(v) + " outside [0, 1]");
      }
    }
    const double sum = data_.col(k).sum();
    if (std::abs(sum - 1.0) > kAscTolerance) {
      throw Error("invariant-violation",
                  "ASC: abundance column " + std::to_string(k) + " sums to " +
                      std::to_string(sum));
    }
  }
}

void NeighborGraph::validate() const {
  if (neighbors.size() != weights.size()) {
    throw Error("invariant-violation", "NeighborGraph neighbor/weight lists misaligned");
  }
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    if (neighbors[k].size() != weights[k].size()) {
      throw Error("invariant-violation",
                  "NeighborGraph pixel " + std::to_string(k) +
                      " neighbor/weight lengths differ");
    }
    if (weights[k].empty()) continue;
    double sum = 0.0;
    for (double w : weights[k]) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw Error("invariant-violation",
                    "NeighborGraph pixel " + std::to_string(k) + " has a negative weight");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kAscTolerance) {
      throw Error("invariant-violation",
                  "NeighborGraph pixel " + std::to_string(k) + " weights sum to " +
                      std::to_string(sum));
    }
  }
}

void UnmixConfig::validate() const {
  if (!(p > 0.0)) throw Error("invalid-config", "p must be > 0");
  if (!(q1 > 0.0)) throw Error("invalid-config", "q1 must be > 0");
  if (!(q2 > 0.0)) throw Error("invalid-config", "q2 must be > 0");
  if (!(mu > 0.0)) throw Error("invalid-config", "mu must be > 0");
  if (!(eta >= 0.0)) throw Error("invalid-config", "eta must be >= 0");
  if (fixed_lambda && !(*fixed_lambda >= 0.0)) {
    throw Error("invalid-config", "fixed lambda must be >= 0");
  }
  if (c < 1) throw Error("invalid-config", "c must be >= 1");
  if (max_iter < 1) throw Error("invalid-config", "max_iter must be >= 1");
  if (!(epsilon > 0.0)) throw Error("invalid-config", "epsilon must be > 0");
}

void validate_dimensions(const HyperCube& Y, const SignatureMatrix& A,
                         const AbundanceMatrix& S) {
  if (A.bands() != Y.bands()) {
    throw Error("dimension-mismatch",
                "signature matrix has " + std::to_string(A.bands()) +
                    " bands but cube has " + std::to_string(Y.bands()));
  }
  if (S.pixels() != Y.pixels()) {
    throw Error("dimension-mismatch",
                "abundance matrix has " + std::to_string(S.pixels()) +
                    " pixels but cube has " + std::to_string(Y.pixels()));
  }
  if (S.endmembers() != A.endmembers()) {
    throw Error("dimension-mismatch",
                "abundance matrix has " + std::to_string(S.endmembers()) +
                    " endmembers but signature matrix has " +
                    std::to_string(A.endmembers()));
  }
}

NeighborGraph grid_neighbors(int width, int height, Adjacency adjacency) {
  if (width < 1 || height < 1) {
    throw Error("invalid-config", "grid_neighbors needs positive width and height");
  }
  const int n = width * height;
  NeighborGraph graph;
  graph.neighbors.resize(n);
  graph.weights.resize(n);
  const bool diag = adjacency == Adjacency::kEightConnected;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      auto& list = graph.neighbors[r * width + c];
      // offsets in lexicographic (dr, dc) order = increasing linear index
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (!diag && dr != 0 && dc != 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= height || cc < 0 || cc >= width) continue;
          list.push_back(rr * width + cc);
        }
      }
    }
  }
  return graph;
}

}  // namespace hsu
