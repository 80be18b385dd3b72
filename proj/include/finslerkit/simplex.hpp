#pragma once

#include "finslerkit/common.hpp"

namespace finslerkit {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;
  double value = 0.0;
  int pivots = 0;
};

/// min c^T x subject to A x <= b, x free. Dense two-phase tableau simplex
/// with Bland's rule, meant for the small programs of polyhedral norms.
LpResult solve_lp(const Vec& c, const Mat& A, const Vec& b, int max_pivots = 50000);

}  // namespace finslerkit
