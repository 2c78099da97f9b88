#include "uqmpc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uqmpc/errors.hpp"

namespace uqmpc {

namespace {

constexpr double kReducedCostTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr double kPivotTol = 1e-9;  // rows are equilibrated to unit scale

// Every variable is split z = p - q with p, q >= 0 and all bounds are turned
// into explicit rows. That costs a factor of two in columns, which is
// irrelevant at the sizes used here, and keeps exactly one code path.
struct Standardised {
  int n_orig = 0;
  int n_split = 0;            // 2 * n_orig
  std::vector<Vector> rows;   // coefficients over split variables
  Vector rhs;                 // all >= 0 after sign normalisation
  std::vector<int> slack_sign;  // +1 slack basic, -1 needs artificial
  double b_scale = 1.0;
};

Standardised standardise(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.c.size());
  const int m = lp.A.empty() ? 0 : lp.A.rows();
  if (m > 0 && lp.A.cols() != n) throw DimensionMismatch("solve_lp: A/c");
  if (static_cast<int>(lp.b.size()) != m) throw DimensionMismatch("solve_lp: A/b");
  if (!lp.lower.empty() && static_cast<int>(lp.lower.size()) != n)
    throw DimensionMismatch("solve_lp: lower");
  if (!lp.upper.empty() && static_cast<int>(lp.upper.size()) != n)
    throw DimensionMismatch("solve_lp: upper");

  Standardised s;
  s.n_orig = n;
  s.n_split = 2 * n;

  auto add_row = [&s](const Vector& coef_orig, double rhs) {
    Vector coef(static_cast<size_t>(s.n_split), 0.0);
    double scale = 0.0;
    for (int j = 0; j < s.n_orig; ++j) scale = std::max(scale, std::abs(coef_orig[j]));
    const double inv = scale > 0.0 ? 1.0 / scale : 1.0;  // row equilibration
    for (int j = 0; j < s.n_orig; ++j) {
      coef[2 * j] = inv * coef_orig[j];
      coef[2 * j + 1] = -inv * coef_orig[j];
    }
    rhs *= inv;
    if (rhs < 0.0) {
      for (double& v : coef) v = -v;
      s.rows.push_back(std::move(coef));
      s.rhs.push_back(-rhs);
      s.slack_sign.push_back(-1);
    } else {
      s.rows.push_back(std::move(coef));
      s.rhs.push_back(rhs);
      s.slack_sign.push_back(+1);
    }
  };

  for (int i = 0; i < m; ++i) add_row(lp.A.row(i), lp.b[i]);
  for (int j = 0; j < n; ++j) {
    Vector e(static_cast<size_t>(n), 0.0);
    if (!lp.upper.empty() && lp.upper[j]) {
      e[j] = 1.0;
      add_row(e, *lp.upper[j]);
      e[j] = 0.0;
    }
    if (!lp.lower.empty() && lp.lower[j]) {
      e[j] = -1.0;
      add_row(e, -*lp.lower[j]);
    }
  }

  s.b_scale = 1.0 + inf_norm(lp.b);
  return s;
}

class Tableau {
 public:
  Tableau(const Standardised& s, int pivot_cap)
      : m_(static_cast<int>(s.rows.size())), n_split_(s.n_split), pivot_cap_(pivot_cap) {
    n_art_ = 0;
    for (int sign : s.slack_sign)
      if (sign < 0) ++n_art_;
    n_cols_ = n_split_ + m_ + n_art_;
    t_.assign(static_cast<size_t>(m_) * n_cols_, 0.0);
    rhs_ = s.rhs;
    basis_.assign(m_, -1);

    int art = 0;
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_split_; ++j) at(i, j) = s.rows[i][j];
      at(i, n_split_ + i) = static_cast<double>(s.slack_sign[i]);
      if (s.slack_sign[i] > 0) {
        basis_[i] = n_split_ + i;
      } else {
        const int col = n_split_ + m_ + art++;
        at(i, col) = 1.0;
        basis_[i] = col;
      }
    }
  }

  int artificial_count() const { return n_art_; }
  bool is_artificial(int col) const { return col >= n_split_ + m_; }

  // Phase 1: minimise the sum of artificial variables.
  double run_phase1() {
    Vector cost(static_cast<size_t>(n_cols_), 0.0);
    for (int j = n_split_ + m_; j < n_cols_; ++j) cost[j] = 1.0;
    load_objective(cost, /*ban_artificials=*/false);
    if (!iterate()) throw InternalError("solve_lp: phase-1 problem reported unbounded");
    double art_sum = 0.0;
    for (int i = 0; i < m_; ++i)
      if (is_artificial(basis_[i])) art_sum += rhs_[i];
    return art_sum;
  }

  // Pivot artificials that remained basic at level zero out of the basis
  // where possible; rows with no eligible column are redundant and inert.
  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      for (int j = 0; j < n_split_ + m_; ++j) {
        if (std::abs(at(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2: minimise cost over split variables. Returns false if unbounded.
  bool run_phase2(const Vector& split_cost) {
    Vector cost(static_cast<size_t>(n_cols_), 0.0);
    for (int j = 0; j < n_split_; ++j) cost[j] = split_cost[j];
    load_objective(cost, /*ban_artificials=*/true);
    return iterate();
  }

  double variable_value(int col) const {
    for (int i = 0; i < m_; ++i)
      if (basis_[i] == col) return rhs_[i];
    return 0.0;
  }

 private:
  double& at(int i, int j) { return t_[static_cast<size_t>(i) * n_cols_ + j]; }
  double at(int i, int j) const { return t_[static_cast<size_t>(i) * n_cols_ + j]; }

  void load_objective(const Vector& cost, bool ban_artificials) {
    ban_artificials_ = ban_artificials;
    z_ = cost;
    // Price out the basic columns so reduced costs are consistent.
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < n_cols_; ++j) z_[j] -= cb * at(i, j);
    }
  }

  // Dantzig pricing with lowest-index tie-breaking, and a deterministic
  // switch to Bland's rule while a degenerate streak lasts (guards against
  // cycling without paying Bland's tiny-pivot instability on every step).
  // Returns false on unbounded.
  bool iterate() {
    int degenerate_streak = 0;
    for (int pivots = 0; pivots < pivot_cap_; ++pivots) {
      const bool bland = degenerate_streak >= 40;

      int enter = -1;
      double most_negative = -kReducedCostTol;
      for (int j = 0; j < n_cols_; ++j) {
        if (ban_artificials_ && is_artificial(j)) continue;
        if (z_[j] >= most_negative) continue;
        most_negative = z_[j];
        enter = j;
        if (bland) break;  // lowest eligible index
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = 0.0;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = std::max(rhs_[i], 0.0) / a;
        if (leave < 0 || ratio < best_ratio - 1e-10 * (1.0 + best_ratio)) {
          best_ratio = ratio;
          best_pivot = a;
          leave = i;
        } else if (ratio <= best_ratio + 1e-10 * (1.0 + best_ratio)) {
          // Near-tie: prefer the numerically strongest pivot, except under
          // Bland's rule where the lowest basic index decides.
          if (bland ? basis_[i] < basis_[leave] : a > best_pivot) {
            best_ratio = std::min(best_ratio, ratio);
            best_pivot = a;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded

      degenerate_streak = best_ratio <= 1e-12 ? degenerate_streak + 1 : 0;
      pivot(leave, enter);
    }
    throw IterationLimit("solve_lp: pivot cap reached");
  }

  void pivot(int row, int col) {
    const double p = at(row, col);
    for (int j = 0; j < n_cols_; ++j) at(row, j) /= p;
    rhs_[row] /= p;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n_cols_; ++j) at(i, j) -= f * at(row, j);
      rhs_[i] -= f * rhs_[row];
    }
    const double fz = z_[col];
    if (fz != 0.0)
      for (int j = 0; j < n_cols_; ++j) z_[j] -= fz * at(row, j);
    basis_[row] = col;
  }

  int m_, n_split_, n_art_ = 0, n_cols_ = 0;
  int pivot_cap_;
  bool ban_artificials_ = false;
  std::vector<double> t_;
  Vector rhs_;
  Vector z_;
  std::vector<int> basis_;
};

// Sanity gate against solver bugs. Deliberately looser than the phase-1
// acceptance threshold: a feasibility LP whose optimum sits exactly on the
// boundary can legitimately return a point a few multiples of the phase-1
// tolerance outside a row.
void recheck_feasibility(const LinearProgram& lp, const Vector& x, double scale) {
  const double tol = 100.0 * kFeasTol * scale;
  if (!lp.A.empty()) {
    const Vector ax = lp.A * x;
    for (size_t i = 0; i < ax.size(); ++i)
      if (ax[i] > lp.b[i] + tol)
        throw InternalError("solve_lp: optimal point violates row " + std::to_string(i) + " by " +
                            std::to_string(ax[i] - lp.b[i]));
  }
  for (size_t j = 0; j < x.size(); ++j) {
    if (!lp.lower.empty() && lp.lower[j] && x[j] < *lp.lower[j] - tol)
      throw InternalError("solve_lp: optimal point violates a lower bound");
    if (!lp.upper.empty() && lp.upper[j] && x[j] > *lp.upper[j] + tol)
      throw InternalError("solve_lp: optimal point violates an upper bound");
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const Standardised s = standardise(lp);
  const int m = static_cast<int>(s.rows.size());
  const int pivot_cap = 10 * (m + s.n_orig + 2) * (m + s.n_orig + 2);

  Tableau tab(s, pivot_cap);
  if (tab.artificial_count() > 0) {
    const double art_sum = tab.run_phase1();
    if (art_sum > kFeasTol * s.b_scale) return {LpStatus::Infeasible, {}, 0.0};
    tab.expel_artificials();
  }

  // maximise c'z == minimise (-c)'(p - q)
  Vector split_cost(static_cast<size_t>(s.n_split), 0.0);
  for (int j = 0; j < s.n_orig; ++j) {
    split_cost[2 * j] = -lp.c[j];
    split_cost[2 * j + 1] = lp.c[j];
  }
  if (!tab.run_phase2(split_cost)) return {LpStatus::Unbounded, {}, 0.0};

  Vector x(static_cast<size_t>(s.n_orig), 0.0);
  for (int j = 0; j < s.n_orig; ++j)
    x[j] = tab.variable_value(2 * j) - tab.variable_value(2 * j + 1);

  recheck_feasibility(lp, x, s.b_scale);
  return {LpStatus::Optimal, x, dot(lp.c, x)};
}

}  // namespace uqmpc
