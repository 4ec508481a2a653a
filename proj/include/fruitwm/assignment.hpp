#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

namespace fruitwm {

/// Result of a rectangular assignment: matched (row, col) pairs in row order
/// plus the rows and columns left unmatched, both ascending.
struct Assignment
{
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

namespace detail {

/// Dense square Hungarian solver (shortest augmenting paths with potentials).
/// Returns the column assigned to each row and leaves the dual potentials in
/// `u`, `v` so that cost(i,j) - u[i] - v[j] >= 0 with equality on the matching.
inline std::vector<std::size_t> hungarian_square(const Eigen::MatrixXd& c, std::vector<double>& u,
                                                 std::vector<double>& v)
{
  const std::size_t n = static_cast<std::size_t>(c.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based internals, index 0 is the virtual source column.
  u.assign(n + 1, 0.0);
  v.assign(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        const double cur = c(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of(n);
  for (std::size_t j = 1; j <= n; ++j)
    col_of[row_of[j] - 1] = j - 1;
  u.erase(u.begin());
  v.erase(v.begin());
  return col_of;
}

}  // namespace detail

/// Minimum-cost one-to-one assignment restricted to admissible entries.
///
/// Objective, in order: maximize the number of admissible pairs, minimize
/// their total cost. Inadmissible entries are replaced by a sentinel larger
/// than any admissible total, the padded square problem is solved, and pairs
/// landing on a sentinel are reported unmatched. Among equal-cost optima, rows
/// are visited in ascending order and each takes the smallest column index
/// still compatible with optimality (an unmatched row ranks after every column).
template <class AdmissibleFn>
Assignment solve_assignment_if(const Eigen::MatrixXd& cost, AdmissibleFn&& admissible)
{
  const std::size_t rows = static_cast<std::size_t>(cost.rows());
  const std::size_t cols = static_cast<std::size_t>(cost.cols());
  Assignment out;
  if (rows == 0 || cols == 0) {
    for (std::size_t i = 0; i < rows; ++i)
      out.unmatched_rows.push_back(i);
    for (std::size_t j = 0; j < cols; ++j)
      out.unmatched_cols.push_back(j);
    return out;
  }

  const std::size_t n = std::max(rows, cols);
  Eigen::Matrix<char, Eigen::Dynamic, Eigen::Dynamic> ok(rows, cols);
  double abs_sum = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const bool a = std::isfinite(c) && admissible(i, j, c);
      ok(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a;
      if (a) {
        abs_sum += std::abs(c);
        max_abs = std::max(max_abs, std::abs(c));
      }
    }
  const double sentinel = 1.0 + 2.0 * abs_sum;

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      c(ii, jj) = ok(ii, jj) ? cost(ii, jj) : sentinel;
    }

  std::vector<double> u, v;
  std::vector<std::size_t> col_of = detail::hungarian_square(c, u, v);
  std::vector<std::size_t> row_of(n);
  for (std::size_t i = 0; i < n; ++i)
    row_of[col_of[i]] = i;

  // Tie-break on the equality subgraph of the optimal duals: every optimal
  // assignment is a perfect matching there, so a row can move to column j
  // iff an alternating path closes the cycle through (row, j).
  const double tol = 1e-10 * (1.0 + std::max(max_abs, sentinel));
  auto tight = [&](std::size_t i, std::size_t j) {
    return c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - u[i] - v[j] <= tol;
  };
  auto real_match = [&](std::size_t i, std::size_t j) {
    return i < rows && j < cols && ok(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  // Padding columns are interchangeable; any of them closes a cycle for a
  // row that currently sits on one.
  auto is_goal = [&](std::size_t j, std::size_t target) { return j == target || (target >= cols && j >= cols); };

  std::vector<char> fixed(n, 0);
  std::vector<std::size_t> pred_row(n);
  std::vector<char> seen_row(n);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t current = col_of[i];
    const std::size_t effective = real_match(i, current) ? current : cols;
    for (std::size_t j = 0; j < effective; ++j) {
      if (!real_match(i, j) || !tight(i, j))
        continue;
      const std::size_t r0 = row_of[j];
      if (fixed[r0] || r0 == i)
        continue;
      // BFS over rows that must give up their column; pred_row[x] is the row
      // taking x's current column.
      std::fill(seen_row.begin(), seen_row.end(), 0);
      std::deque<std::size_t> queue{r0};
      seen_row[r0] = 1;
      pred_row[r0] = i;
      std::size_t end_row = n, end_col = n;
      while (!queue.empty() && end_row == n) {
        const std::size_t r = queue.front();
        queue.pop_front();
        for (std::size_t cc = 0; cc < n; ++cc) {
          if (cc == j || cc == col_of[r] || !tight(r, cc))
            continue;
          if (is_goal(cc, current)) {
            end_row = r;
            end_col = cc;
            break;
          }
          const std::size_t owner = row_of[cc];
          if (owner == i || fixed[owner] || seen_row[owner])
            continue;
          seen_row[owner] = 1;
          pred_row[owner] = r;
          queue.push_back(owner);
        }
      }
      if (end_row == n)
        continue;

      const std::size_t goal_owner = row_of[end_col];
      std::size_t x = end_row;
      std::size_t new_col = end_col;
      while (true) {
        const std::size_t old = col_of[x];
        col_of[x] = new_col;
        row_of[new_col] = x;
        if (x == r0)
          break;
        new_col = old;
        x = pred_row[x];
      }
      if (end_col != current) {
        // Landed on another padding column; its owner takes ours.
        col_of[goal_owner] = current;
        row_of[current] = goal_owner;
      }
      col_of[i] = j;
      row_of[j] = i;
      break;
    }
    fixed[i] = 1;
  }

  for (std::size_t i = 0; i < rows; ++i) {
    if (real_match(i, col_of[i]))
      out.pairs.emplace_back(i, col_of[i]);
    else
      out.unmatched_rows.push_back(i);
  }
  std::vector<char> col_used(cols, 0);
  for (const auto& [i, j] : out.pairs)
    col_used[j] = 1;
  for (std::size_t j = 0; j < cols; ++j)
    if (!col_used[j])
      out.unmatched_cols.push_back(j);
  return out;
}

/// Gated assignment: an entry is admissible iff it is finite and <= gate.
inline Assignment solve_assignment(const Eigen::MatrixXd& cost, double gate)
{
  return solve_assignment_if(cost, [gate](std::size_t, std::size_t, double c) { return c <= gate; });
}

inline double assignment_cost(const Eigen::MatrixXd& cost, const Assignment& a)
{
  double total = 0.0;
  for (const auto& [i, j] : a.pairs)
    total += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return total;
}

}  // namespace fruitwm
