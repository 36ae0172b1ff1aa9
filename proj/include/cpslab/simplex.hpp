#pragma once

// Small dense simplex solver, generic over the arithmetic kernel.
// Bland's rule throughout (no cycling; exact termination with
// rationals). Two phases with artificial variables. Intended for the
// modest LPs this project builds (hundreds of variables at most), not
// as a general-purpose solver.
//
// Problem form:  maximize c.x  s.t.  A x (<=|=|>=) b,  x >= 0.
// Results: optimal (point + value), infeasible, or unbounded (feasible
// point + improving ray).

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cpslab/arith.hpp"

namespace cpslab {

struct LpNumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

enum class RowSense { kLe, kEq, kGe };

template <class F>
struct LpRow {
  std::vector<std::pair<int, F>> coeffs;  // (variable, coefficient)
  RowSense sense = RowSense::kLe;
  F rhs = F(0);
};

template <class F>
struct LpProblem {
  int num_vars = 0;
  std::vector<F> objective;  // size num_vars, maximize
  std::vector<LpRow<F>> rows;

  int add_var(const F& obj_coeff = F(0)) {
    objective.push_back(obj_coeff);
    return num_vars++;
  }
  void add_row(std::vector<std::pair<int, F>> coeffs, RowSense sense, F rhs) {
    rows.push_back({std::move(coeffs), sense, std::move(rhs)});
  }
};

template <class F>
struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  F objective = F(0);
  std::vector<F> x;    // feasible point (optimal if kOptimal)
  std::vector<F> ray;  // improving direction if kUnbounded
  long pivots = 0;
};

template <class F>
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem<F>& p) : prob_(p) {}

  LpResult<F> solve() {
    build();
    LpResult<F> res;
    if (!phase1()) {
      res.status = LpStatus::kInfeasible;
      res.pivots = pivots_;
      return res;
    }
    int ray_col = phase2();
    res.pivots = pivots_;
    res.x = extract_point();
    if (ray_col >= 0) {
      res.status = LpStatus::kUnbounded;
      res.ray = extract_ray(ray_col);
      return res;
    }
    res.status = LpStatus::kOptimal;
    res.objective = F(0);
    for (int j = 0; j < prob_.num_vars; ++j) res.objective += prob_.objective[j] * res.x[j];
    return res;
  }

 private:
  const F tol_ = arith_traits<F>::tol();

  void build() {
    const int m = static_cast<int>(prob_.rows.size());
    // columns: structural | slacks | artificials
    n_struct_ = prob_.num_vars;
    std::vector<int> slack_of(m, -1), art_of(m, -1);
    int n = n_struct_;
    for (int i = 0; i < m; ++i) {
      RowSense s = prob_.rows[i].sense;
      bool flip = prob_.rows[i].rhs < F(0);
      if (s == RowSense::kLe && !flip) slack_of[i] = n++;
      if (s == RowSense::kLe && flip) slack_of[i] = n++;  // becomes >= after flip
      if (s == RowSense::kGe) slack_of[i] = n++;
      flips_.push_back(flip);
    }
    int first_art = n;
    for (int i = 0; i < m; ++i) {
      RowSense s = prob_.rows[i].sense;
      bool flip = flips_[i];
      bool needs_art = s == RowSense::kEq || (s == RowSense::kGe && !flip) ||
                       (s == RowSense::kLe && flip);
      if (needs_art) art_of[i] = n++;
    }
    n_total_ = n;
    first_art_ = first_art;
    tab_.assign(m, std::vector<F>(n_total_ + 1, F(0)));
    basis_.assign(m, -1);
    for (int i = 0; i < m; ++i) {
      const auto& row = prob_.rows[i];
      F sign = flips_[i] ? F(-1) : F(1);
      for (const auto& [j, a] : row.coeffs) tab_[i][j] += sign * a;
      tab_[i][n_total_] = sign * row.rhs;
      RowSense eff = row.sense;
      if (flips_[i]) eff = eff == RowSense::kLe ? RowSense::kGe
                         : eff == RowSense::kGe ? RowSense::kLe
                                                : RowSense::kEq;
      if (slack_of[i] >= 0) tab_[i][slack_of[i]] = eff == RowSense::kLe ? F(1) : F(-1);
      if (art_of[i] >= 0) {
        tab_[i][art_of[i]] = F(1);
        basis_[i] = art_of[i];
      } else {
        basis_[i] = slack_of[i];  // effective <= row: slack feasible basis
      }
    }
  }

  /// Price out the objective row z (length n_total_+1) against the basis.
  void price_out(std::vector<F>& z) {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const F& coef = z[basis_[i]];
      if (coef == F(0)) continue;
      F c = coef;  // copy; z mutates below
      for (int j = 0; j <= n_total_; ++j) z[j] -= c * tab_[i][j];
    }
  }

  /// Bland: entering column with negative reduced cost (we keep the
  /// objective row as costs-to-reduce, i.e. row = c_B B^-1 A - c).
  int choose_entering(const std::vector<F>& z, int limit) const {
    for (int j = 0; j < limit; ++j)
      if (z[j] < -tol_) return j;
    return -1;
  }

  /// Bland leaving row: min ratio, smallest basis variable on ties.
  int choose_leaving(int col) const {
    int leave = -1;
    F best(0);
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (!(tab_[i][col] > tol_)) continue;
      F ratio = tab_[i][n_total_] / tab_[i][col];
      if (leave < 0 || ratio < best ||
          (ratio == best && basis_[i] < basis_[leave])) {
        leave = static_cast<int>(i);
        best = ratio;
      }
    }
    return leave;
  }

  void pivot(int row, int col) {
    ++pivots_;
    F piv = tab_[row][col];
    for (int j = 0; j <= n_total_; ++j) tab_[row][j] /= piv;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (static_cast<int>(i) == row) continue;
      const F factor = tab_[i][col];
      if (factor == F(0)) continue;
      for (int j = 0; j <= n_total_; ++j) tab_[i][j] -= factor * tab_[row][j];
    }
    F zf = zrow_[col];
    if (zf != F(0))
      for (int j = 0; j <= n_total_; ++j) zrow_[j] -= zf * tab_[row][j];
    basis_[row] = col;
  }

  /// Run simplex on zrow_; returns -1 at optimum, else the unbounded
  /// entering column.
  int iterate(int col_limit) {
    for (;;) {
      if (pivots_ > pivot_budget())
        throw LpNumericalFailure("pivot budget exceeded");
      int col = choose_entering(zrow_, col_limit);
      if (col < 0) return -1;
      int row = choose_leaving(col);
      if (row < 0) return col;
      pivot(row, col);
    }
  }

  long pivot_budget() const {
    // Bland terminates finitely; this is a guard against float stalls.
    long n = static_cast<long>(n_total_ + 1) * static_cast<long>(tab_.size() + 1);
    return 2000 + 40 * n;
  }

  bool phase1() {
    if (first_art_ == n_total_) return true;  // no artificials needed
    zrow_.assign(n_total_ + 1, F(0));
    for (int j = first_art_; j < n_total_; ++j) zrow_[j] = F(1);  // minimize sum
    price_out(zrow_);
    int ray = iterate(n_total_);
    assert(ray < 0);  // phase-1 objective is bounded below by 0
    (void)ray;
    if (zrow_[n_total_] < -tol_) return false;  // leftover infeasibility
    // Pivot remaining artificials out of the basis where possible.
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i] < first_art_) continue;
      int col = -1;
      for (int j = 0; j < first_art_; ++j)
        if (tab_[i][j] > tol_ || tab_[i][j] < -tol_) {
          col = j;
          break;
        }
      if (col >= 0) {
        pivot(static_cast<int>(i), col);
      } else {
        // redundant row: clear it; artificial stays basic at zero
        for (int j = 0; j <= n_total_; ++j) tab_[i][j] = F(0);
        tab_[i][basis_[i]] = F(1);
      }
    }
    return true;
  }

  int phase2() {
    zrow_.assign(n_total_ + 1, F(0));
    for (int j = 0; j < n_struct_; ++j) zrow_[j] = -prob_.objective[j];
    price_out(zrow_);
    return iterate(first_art_);  // artificials stay out
  }

  std::vector<F> extract_point() const {
    std::vector<F> x(n_struct_, F(0));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < n_struct_) x[basis_[i]] = tab_[i][n_total_];
    return x;
  }

  std::vector<F> extract_ray(int col) const {
    std::vector<F> d(n_struct_, F(0));
    if (col < n_struct_) d[col] = F(1);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < n_struct_) d[basis_[i]] = -tab_[i][col];
    return d;
  }

  const LpProblem<F>& prob_;
  std::vector<std::vector<F>> tab_;
  std::vector<F> zrow_;
  std::vector<int> basis_;
  std::vector<bool> flips_;
  int n_struct_ = 0;
  int n_total_ = 0;
  int first_art_ = 0;
  long pivots_ = 0;
};

template <class F>
LpResult<F> solve_lp(const LpProblem<F>& p) {
  return SimplexSolver<F>(p).solve();
}

/// Residual check used to re-validate solver output independently.
/// Returns the largest constraint violation (0 means exactly feasible).
template <class F>
F lp_feasibility_residual(const LpProblem<F>& p, const std::vector<F>& x) {
  F worst(0);
  auto bump = [&](const F& v) {
    if (v > worst) worst = v;
  };
  for (int j = 0; j < p.num_vars; ++j) bump(F(-x[j]));
  for (const auto& row : p.rows) {
    F lhs(0);
    for (const auto& [j, a] : row.coeffs) lhs += a * x[j];
    F diff = lhs - row.rhs;
    if (row.sense == RowSense::kLe) bump(diff);
    if (row.sense == RowSense::kGe) bump(F(-diff));
    if (row.sense == RowSense::kEq) {
      bump(diff);
      bump(F(-diff));
    }
  }
  return worst;
}

}  // namespace cpslab
