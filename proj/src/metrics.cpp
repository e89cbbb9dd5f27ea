#include "hsunmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsu {

namespace {

double angle(const Vector& a, const Vector& b, const char* kind) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error("zero-vector", std::string(kind) + " of a zero vector");
  }
  const double ratio = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(ratio);
}

}  // namespace

double sad(const Vector& a, const Vector& a_hat) { return angle(a, a_hat, "SAD"); }

double aad(const Vector& s, const Vector& s_hat) { return angle(s, s_hat, "AAD"); }

double rms(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

std::vector<int> hungarian(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) {
    throw Error("dimension-mismatch", "assignment cost matrix must be square");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // potentials method, 1-indexed internally
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

std::vector<int> match_endmembers(const SignatureMatrix& A_true,
                                  const SignatureMatrix& A_est) {
  if (A_true.bands() != A_est.bands() || A_true.endmembers() != A_est.endmembers()) {
    throw Error("dimension-mismatch", "signature matrices must share shape");
  }
  const int c = A_true.endmembers();
  Matrix cost(c, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < c; ++i) {
      cost(j, i) = sad(A_est.data().col(j), A_true.data().col(i));
    }
  }
  return hungarian(cost);
}

EvalReport evaluate(const SignatureMatrix& A_true, const AbundanceMatrix& S_true,
                    const SignatureMatrix& A_est, const AbundanceMatrix& S_est) {
  if (S_true.pixels() != S_est.pixels() ||
      S_true.endmembers() != S_est.endmembers() ||
      S_true.endmembers() != A_true.endmembers()) {
    throw Error("dimension-mismatch", "evaluation inputs must share shape");
  }

  EvalReport report;
  report.matching = match_endmembers(A_true, A_est);
  const int c = A_true.endmembers();
  const int n = S_true.pixels();

  report.per_endmember_sad.assign(c, 0.0);
  for (int j = 0; j < c; ++j) {
    report.per_endmember_sad[report.matching[j]] =
        sad(A_true.data().col(report.matching[j]), A_est.data().col(j));
  }

  report.per_pixel_aad.resize(n);
  Vector permuted(c);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < c; ++j) permuted[report.matching[j]] = S_est.data()(j, k);
    report.per_pixel_aad[k] = aad(S_true.data().col(k), permuted);
  }

  report.rms_sad = rms(report.per_endmember_sad);
  report.rms_aad = rms(report.per_pixel_aad);
  double acc = 0.0;
  for (double x : report.per_endmember_sad) acc += x;
  report.mean_sad = acc / static_cast<double>(c);
  acc = 0.0;
  for (double x : report.per_pixel_aad) acc += x;
  report.mean_aad = acc / static_cast<double>(n);
  return report;
}

}  // namespace hsu
