#include "finslerkit/simplex.hpp"

#include <limits>
#include <vector>

namespace finslerkit {

namespace {

constexpr double kPivotTol = 1e-12;

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(Mat::Zero(rows + 1, cols + 1)), basis_(rows, -1), rows_(rows), cols_(cols) {}

  double& a(int i, int j) { return t_(i, j); }
  double& rhs(int i) { return t_(i, cols_); }
  double& cost(int j) { return t_(rows_, j); }
  double objective() const { return -t_(rows_, cols_); }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  /// Sets the cost row from raw costs, eliminating basic columns.
  void set_costs(const Vec& raw) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(raw.size()) = raw.transpose();
    for (int i = 0; i < rows_; ++i) {
      const double f = t_(rows_, basis_[i]);
      if (f != 0.0) t_.row(rows_) -= f * t_.row(i);
    }
  }

  // Bland's rule; `allowed` masks columns that may enter.
  LpStatus run(const std::vector<char>& allowed, int& pivots, int max_pivots) {
    while (pivots < max_pivots) {
      int enter = -1;
      for (int j = 0; j < cols_; ++j) {
        if (allowed[j] && t_(rows_, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        if (t_(i, enter) <= kPivotTol) continue;
        const double ratio = t_(i, cols_) / t_(i, enter);
        if (leave < 0 || ratio < best - 1e-14) {
          leave = i;
          best = ratio;
        } else if (ratio <= best + 1e-14 && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      pivot(leave, enter);
      ++pivots;
    }
    throw NumericError("simplex: pivot limit reached");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  Mat t_;
  std::vector<int> basis_;
  int rows_, cols_;
};

}  // namespace

LpResult solve_lp(const Vec& c, const Mat& A, const Vec& b, int max_pivots) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m) throw InputError("solve_lp: dimension mismatch");

  // Columns: x+ (n), x- (n), slacks (m), artificials (one per row with b < 0).
  std::vector<int> art_row;
  for (int i = 0; i < m; ++i)
    if (b[i] < 0.0) art_row.push_back(i);
  const int n_art = static_cast<int>(art_row.size());
  const int cols = 2 * n + m + n_art;
  Tableau tab(m, cols);
  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      tab.a(i, j) = sign * A(i, j);
      tab.a(i, n + j) = -sign * A(i, j);
    }
    tab.a(i, 2 * n + i) = sign;
    tab.rhs(i) = sign * b[i];
    if (b[i] < 0.0) {
      tab.a(i, 2 * n + m + art) = 1.0;
      tab.basis()[i] = 2 * n + m + art;
      ++art;
    } else {
      tab.basis()[i] = 2 * n + i;
    }
  }

  LpResult result;
  std::vector<char> allowed(cols, 1);
  if (n_art > 0) {
    Vec phase1 = Vec::Zero(cols);
    phase1.tail(n_art).setOnes();
    tab.set_costs(phase1);
    tab.run(allowed, result.pivots, max_pivots);
    if (tab.objective() > 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      result.status = LpStatus::infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (tab.basis()[i] < 2 * n + m) continue;
      for (int j = 0; j < 2 * n + m; ++j) {
        if (std::abs(tab.a(i, j)) > 1e-9) {
          tab.pivot(i, j);
          ++result.pivots;
          break;
        }
      }
    }
    for (int j = 2 * n + m; j < cols; ++j) allowed[j] = 0;
  }

  Vec phase2 = Vec::Zero(cols);
  phase2.head(n) = c;
  phase2.segment(n, n) = -c;
  tab.set_costs(phase2);
  result.status = tab.run(allowed, result.pivots, max_pivots);
  if (result.status != LpStatus::optimal) return result;

  Vec z = Vec::Zero(cols);
  for (int i = 0; i < m; ++i) z[tab.basis()[i]] = tab.rhs(i);
  result.x = z.head(n) - z.segment(n, n);
  result.value = c.dot(result.x);
  return result;
}

}  // namespace finslerkit
