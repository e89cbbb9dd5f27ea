#include "hsunmix/baselines.hpp"

#include "hsunmix/rng.hpp"
#include "hsunmix/simplex.hpp"
#include "hsunmix/weights.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace hsu {

namespace {

constexpr double kDenomFloor = 1e-12;

Matrix random_nonneg(int rows, int cols, double scale, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform() * scale;
  }
  return m;
}

/// Shared multiplicative-update loop; lambda > 0 adds the L_1/2 penalty term
/// (lambda/2) * S^(-1/2) to the abundance-update denominator.
NmfResult nmf_core(const HyperCube& Y, Matrix A, Matrix S, int max_iter,
                   double eps, double lambda) {
  std::vector<double> trace;
  trace.reserve(max_iter);

  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int t = 0; t < max_iter; ++t) {
    // A <- A .* (Y S^T) ./ (A S S^T)
    {
      const Matrix St = S.transpose();
      const Matrix denom = (A * (S * St)).cwiseMax(kDenomFloor);
      A = A.cwiseProduct((Y.data() * St).cwiseQuotient(denom));
    }
    // S <- S .* (A^T Y) ./ (A^T A S [+ penalty])
    {
      Matrix denom = A.transpose() * (A * S);
      if (lambda > 0.0) {
        denom += (lambda / 2.0) * S.cwiseMax(kDenomFloor).array().rsqrt().matrix();
      }
      S = S.cwiseProduct((A.transpose() * Y.data()).cwiseQuotient(denom.cwiseMax(kDenomFloor)));
    }

    const double residual = (Y.data() - A * S).squaredNorm();
    trace.push_back(residual);
    if (t > 0 && std::abs(residual - prev) < eps) break;
    prev = residual;
  }

  // Degenerate all-zero signature columns get a tiny uniform spectrum so the
  // type invariant holds; zero-sum abundance columns become uniform.
  for (int j = 0; j < A.cols(); ++j) {
    if (A.col(j).maxCoeff() <= 0.0) A.col(j).setConstant(kDenomFloor);
  }
  for (int k = 0; k < S.cols(); ++k) {
    const double total = S.col(k).sum();
    if (total > 0.0) {
      S.col(k) /= total;
    } else {
      S.col(k).setConstant(1.0 / static_cast<double>(S.rows()));
    }
    S.col(k) = project_simplex(S.col(k));
  }

  const int iterations = static_cast<int>(trace.size());
  return NmfResult{SignatureMatrix(std::move(A)), AbundanceMatrix(std::move(S)),
                   std::move(trace), iterations};
}

}  // namespace

NmfResult nmf_from(const HyperCube& Y, Matrix A0, Matrix S0, int max_iter,
                   double eps, double lambda) {
  return nmf_core(Y, std::move(A0), std::move(S0), max_iter, eps, lambda);
}

NmfResult nmf(const HyperCube& Y, int c, int max_iter, double eps,
              std::uint64_t seed) {
  return l_half_nmf(Y, c, max_iter, eps, seed, 0.0);
}

NmfResult l_half_nmf(const HyperCube& Y, int c, int max_iter, double eps,
                     std::uint64_t seed, double lambda) {
  if (c > std::min(Y.bands(), Y.pixels())) {
    throw Error("invalid-config", "endmember count exceeds min(bands, pixels)");
  }
  const double resolved = lambda < 0.0 ? sparsity_lambda(Y) : lambda;
  Rng rng(derive_seed(seed, "nmf-init"));
  Matrix A = random_nonneg(Y.bands(), c, std::max(Y.data().maxCoeff(), kDenomFloor), rng);
  Matrix S = random_nonneg(c, Y.pixels(), 1.0, rng);
  return nmf_core(Y, std::move(A), std::move(S), max_iter, eps, resolved);
}

UnmixResult distributed_unmix(const HyperCube& Y, const UnmixConfig& cfg) {
  UnmixConfig lambda_off = cfg;
  lambda_off.fixed_lambda = 0.0;
  return unmix(Y, lambda_off);
}

SignatureMatrix vca(const HyperCube& Y, int c, std::uint64_t seed) {
  const int L = Y.bands();
  const int N = Y.pixels();
  if (c < 1 || c > std::min(L, N)) {
    throw Error("invalid-config", "endmember count exceeds min(bands, pixels)");
  }

  const Vector mean = Y.data().rowwise().mean();
  const Matrix Z = Y.data().colwise() - mean;
  const Matrix cov = (Z * Z.transpose()) / static_cast<double>(N);
  if (cov.trace() <= 1e-30) {
    throw Error("degenerate-data", "data has zero variance");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error("degenerate-data", "eigendecomposition failed");
  }

  if (c == 1) {
    // pixel with the largest projection on the first principal direction
    const Vector u = eig.eigenvectors().col(L - 1);
    int best = 0;
    double best_val = -1.0;
    for (int k = 0; k < N; ++k) {
      const double v = std::abs(u.dot(Z.col(k)));
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    return SignatureMatrix(Y.data().col(best).cwiseMax(0.0));
  }

  // project onto the top c-1 principal directions (eigenvalues ascending in
  // Eigen; take the tail in descending order)
  const int d = c - 1;
  Matrix Ud(L, d);
  for (int j = 0; j < d; ++j) Ud.col(j) = eig.eigenvectors().col(L - 1 - j);

  const Matrix X = Ud.transpose() * Z;                     // d x N
  const Matrix recon = (Ud * X).colwise() + mean;          // L x N

  double span = 0.0;
  for (int k = 0; k < N; ++k) span = std::max(span, X.col(k).norm());
  Matrix aug(c, N);
  aug.topRows(d) = X;
  aug.row(d).setConstant(span);

  // iterative orthogonal-direction argmax
  Matrix basis = Matrix::Zero(c, c);
  basis(c - 1, 0) = 1.0;
  std::vector<int> picked(c, 0);
  Rng rng(derive_seed(seed, "vca"));
  Vector w(c), f(c);
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < c; ++j) w[j] = rng.normal();
    // f = (I - basis basis^+) w, via least squares against current columns
    const Vector coef = basis.completeOrthogonalDecomposition().solve(w);
    f = w - basis * coef;
    const double fn = f.norm();
    if (fn <= 1e-30) {
      throw Error("degenerate-data", "could not find an orthogonal direction");
    }
    f /= fn;
    int best = 0;
    double best_val = -1.0;
    for (int k = 0; k < N; ++k) {
      const double v = std::abs(f.dot(aug.col(k)));
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    picked[i] = best;
    basis.col(i) = aug.col(best);
  }

  Matrix A(L, c);
  for (int i = 0; i < c; ++i) A.col(i) = recon.col(picked[i]).cwiseMax(0.0);
  for (int i = 0; i < c; ++i) {
    if (A.col(i).maxCoeff() <= 0.0) {
      throw Error("degenerate-data", "extracted endmember is all zero");
    }
  }
  return SignatureMatrix(std::move(A));
}

namespace {

/// Lawson-Hanson NNLS on the sum-to-one-augmented system, then an exact
/// KKT polish on the identified support. The augmentation finds the active
/// set; the polish solves min |y - A s| s.t. sum s = 1 on that support
/// exactly, with primal/dual exchanges until the KKT conditions hold.
Vector fcls_solve(const Vector& y, const Matrix& A, const Matrix& AtA,
                  const Vector& Aty_base, double aug_weight) {
  const int L = static_cast<int>(A.rows());
  const int c = static_cast<int>(A.cols());

  Matrix M(L + 1, c);
  M.topRows(L) = A;
  M.row(L).setConstant(aug_weight);
  Vector b(L + 1);
  b.head(L) = y;
  b[L] = aug_weight;

  std::vector<bool> passive(c, false);
  Vector s = Vector::Zero(c);
  const double tol = 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff());

  for (int outer = 0; outer < 3 * c + 10; ++outer) {
    const Vector grad = M.transpose() * (b - M * s);
    int best = -1;
    double best_val = tol;
    for (int i = 0; i < c; ++i) {
      if (!passive[i] && grad[i] > best_val) {
        best_val = grad[i];
        best = i;
      }
    }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < 3 * c + 10; ++inner) {
      std::vector<int> idx;
      for (int i = 0; i < c; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Matrix Mp(L + 1, idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) Mp.col(j) = M.col(idx[j]);
      const Vector z = Mp.colPivHouseholderQr().solve(b);

      bool all_pos = true;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        all_pos = all_pos && z[j] > 0.0;
      }
      if (all_pos) {
        s.setZero();
        for (std::size_t j = 0; j < idx.size(); ++j) s[idx[j]] = z[j];
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (z[j] <= 0.0) {
          const double cur = s[idx[j]] / (s[idx[j]] - z[j]);
          alpha = std::min(alpha, cur);
        }
      }
      for (std::size_t j = 0; j < idx.size(); ++j) {
        s[idx[j]] += alpha * (z[j] - s[idx[j]]);
        if (s[idx[j]] <= 1e-14) {
          s[idx[j]] = 0.0;
          passive[idx[j]] = false;
        }
      }
    }
  }

  // Exact equality-constrained polish on the support: solve
  //   [AtA_P  1][s_P]   [Aty_P]
  //   [1^T    0][nu ] = [  1  ]
  // dropping negative entries and admitting dual-infeasible coordinates
  // until the full KKT system is satisfied.
  std::vector<int> support;
  for (int i = 0; i < c; ++i) {
    if (passive[i] && s[i] > 0.0) support.push_back(i);
  }
  if (support.empty()) {
    // numerically everything hit the boundary; fall back to the best vertex
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c; ++i) {
      const double r = (y - A.col(i)).squaredNorm();
      if (r < best_val) {
        best_val = r;
        best = i;
      }
    }
    support.push_back(best);
  }

  const double dual_tol = 1e-11 * std::max(1.0, AtA.cwiseAbs().maxCoeff());
  for (int rounds = 0; rounds < 4 * c + 10; ++rounds) {
    const int m = static_cast<int>(support.size());
    Matrix kkt = Matrix::Zero(m + 1, m + 1);
    Vector rhs(m + 1);
    for (int a = 0; a < m; ++a) {
      for (int bcol = 0; bcol < m; ++bcol) kkt(a, bcol) = AtA(support[a], support[bcol]);
      kkt(a, m) = 1.0;
      kkt(m, a) = 1.0;
      rhs[a] = Aty_base[support[a]];
    }
    rhs[m] = 1.0;
    const Vector sol = kkt.colPivHouseholderQr().solve(rhs);

    int drop = -1;
    double most_negative = -1e-14;
    for (int a = 0; a < m; ++a) {
      if (sol[a] < most_negative) {
        most_negative = sol[a];
        drop = a;
      }
    }
    if (drop >= 0 && m > 1) {
      support.erase(support.begin() + drop);
      continue;
    }

    s.setZero();
    for (int a = 0; a < m; ++a) s[support[a]] = std::max(sol[a], 0.0);
    const double nu = sol[m];

    // dual feasibility: (AtA s - Aty)_i + nu >= 0 off the support
    const Vector lagr = AtA * s - Aty_base;
    int admit = -1;
    double worst = -dual_tol;
    for (int i = 0; i < c; ++i) {
      if (std::find(support.begin(), support.end(), i) != support.end()) continue;
      const double r = lagr[i] + nu;
      if (r < worst) {
        worst = r;
        admit = i;
      }
    }
    if (admit < 0) break;
    support.push_back(admit);
  }

  return project_simplex(s);
}

}  // namespace

Vector fcls_pixel(const Vector& y, const Matrix& A) {
  const Matrix AtA = A.transpose() * A;
  const Vector Aty = A.transpose() * y;
  const double aug_weight =
      1e3 * std::max(1.0, std::max(A.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()));
  return fcls_solve(y, A, AtA, Aty, aug_weight);
}

AbundanceMatrix fcls(const HyperCube& Y, const SignatureMatrix& A) {
  if (A.bands() != Y.bands()) {
    throw Error("dimension-mismatch", "signature bands do not match cube bands");
  }
  const Matrix& Am = A.data();
  const Matrix AtA = Am.transpose() * Am;
  const double aug_weight =
      1e3 * std::max(1.0, std::max(Am.cwiseAbs().maxCoeff(), Y.data().cwiseAbs().maxCoeff()));
  Matrix S(A.endmembers(), Y.pixels());
  for (int k = 0; k < Y.pixels(); ++k) {
    const Vector y = Y.data().col(k);
    S.col(k) = fcls_solve(y, Am, AtA, Am.transpose() * y, aug_weight);
  }
  return AbundanceMatrix(std::move(S));
}

}  // namespace hsu
