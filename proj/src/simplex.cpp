#include "hsunmix/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hsu {

namespace {

// Sorted-descending floating-point sum; the canonical order used both by the
// feasibility fast path and by the exact-sum correction below, so a vector
// this function has produced is recognized as already feasible.
double sorted_sum(const std::vector<double>& sorted_desc) {
  double s = 0.0;
  for (double x : sorted_desc) s += x;
  return s;
}

}  // namespace

Vector project_simplex(const Vector& v) {
  const int c = static_cast<int>(v.size());
  if (c < 1) throw Error("non-finite-input", "empty vector");
  if (!v.allFinite()) throw Error("non-finite-input", "vector has NaN or Inf");
  if (c == 1) {
    Vector w(1);
    w[0] = 1.0;
    return w;
  }

  std::vector<double> u(v.data(), v.data() + c);
  std::sort(u.begin(), u.end(), std::greater<double>());

  // Already on the simplex (in canonical summation order): the projection is
  // the identity, bit for bit.
  if (u.back() >= 0.0 && sorted_sum(u) == 1.0) {
    return v;
  }

  // Largest k with v_(k) > (sum_{i<=k} v_(i) - 1)/k. The comparison is done
  // on the cleared-denominator form k*v_(k) - running + 1 > 0, which is
  // invariant under v -> v + t*1 whenever the inputs carry the shift
  // exactly; the threshold is unique so sort ties cannot change the result.
  double running = 0.0;
  double support_running = 0.0;
  int support = 0;
  for (int k = 0; k < c; ++k) {
    running += u[k];
    const double kk = static_cast<double>(k + 1);
    if (kk * u[k] - running + 1.0 > 0.0) {
      support = k + 1;
      support_running = running;
    }
  }

  const double rho = static_cast<double>(support);
  Vector w(c);
  for (int i = 0; i < c; ++i) {
    const double numer = rho * v[i] - support_running + 1.0;
    w[i] = numer > 0.0 ? numer / rho : 0.0;
  }

  // Pin the canonical-order sum to exactly 1 by recomputing the smallest
  // surviving entry as 1 - (sum of the others), so reprojection takes the
  // fast path above. Skipped at knife edges where it would reorder entries.
  std::vector<double> ws(w.data(), w.data() + c);
  std::sort(ws.begin(), ws.end(), std::greater<double>());
  double prefix = 0.0;
  for (int k = 0; k + 1 < support; ++k) prefix += ws[k];
  const double corrected = 1.0 - prefix;
  const double upper = support >= 2 ? ws[support - 2] : 1.0;
  if (corrected > 0.0 && corrected <= upper) {
    int arg = -1;
    int count = 0;
    for (int i = 0; i < c; ++i) {
      if (w[i] <= 0.0) continue;
      if (arg < 0 || w[i] < w[arg]) {
        arg = i;
        count = 1;
      } else if (w[i] == w[arg]) {
        ++count;
      }
    }
    // a tied smallest entry is left alone so equal inputs keep equal outputs
    if (arg >= 0 && count == 1) w[arg] = corrected;
  }
  return w;
}

void project_columns_simplex(Matrix& S) {
  for (int k = 0; k < S.cols(); ++k) {
    S.col(k) = project_simplex(S.col(k));
  }
}

}  // namespace hsu
