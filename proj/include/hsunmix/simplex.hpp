#pragma once

#include "hsunmix/types.hpp"

namespace hsu {

/// Exact Euclidean projection of v onto the probability simplex
/// { w : w >= 0, sum w = 1 } by sort-and-threshold, O(c log c).
///
/// The threshold tau is the unique value such that sum max(v_i - tau, 0) = 1;
/// sorting descending, tau = (sum of the rho largest entries - 1) / rho where
/// rho is the largest k with v_(k) - (sum_{i<=k} v_(i) - 1)/k > 0. Ties are
/// broken by index; the result does not depend on the tie order.
///
/// Throws Error("non-finite-input") if v has a NaN or infinity.
Vector project_simplex(const Vector& v);

/// In-place column-wise projection of a c x N matrix.
void project_columns_simplex(Matrix& S);

}  // namespace hsu
