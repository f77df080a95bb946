// Copyright 2026 The Metapen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Two-player zero-sum matrix games. The row player maximizes.
//
// The simplex route shifts the matrix so every entry is at least one and
// solves
//
//   max 1'y  s.t.  B y <= 1,  y >= 0
//
// whose optimum W gives the shifted value 1/W. The column mix is y/W and the
// row mix comes from the duals of the slack rows. Pivoting uses Bland's rule,
// so the method terminates on degenerate games too. The tableau is kept in
// long double so textbook games come back with exact mixes after rounding.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metapen/solvers.h"

namespace metapen {
namespace {

using Real = long double;

constexpr Real kPivotEpsilon = 1e-15L;

double DualityGap(const Eigen::MatrixXd& a, const std::vector<double>& x,
                  const std::vector<double>& y) {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), x.size());
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), y.size());
  const double upper = (a * yv).maxCoeff();             // best row vs y
  const double lower = (xv.transpose() * a).minCoeff();  // worst col vs x
  return std::max(0.0, upper - lower);
}

std::vector<double> Normalize(std::vector<Real> w) {
  Real total = 0;
  for (Real& v : w) {
    if (v < 0) v = 0;
    total += v;
  }
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = static_cast<double>(w[i] / total);
  }
  return out;
}

ZeroSumSolution SolveBySimplex(const Eigen::MatrixXd& a) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  const Real shift = 1.0L - static_cast<Real>(a.minCoeff());

  // Tableau rows: m constraints; columns: n structural, m slack, rhs.
  const int width = n + m + 1;
  std::vector<Real> tab(static_cast<std::size_t>(m) * width, 0.0L);
  auto at = [&](int i, int j) -> Real& {
    return tab[static_cast<std::size_t>(i) * width + j];
  };
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = static_cast<Real>(a(i, j)) + shift;
    at(i, n + i) = 1.0L;
    at(i, width - 1) = 1.0L;
  }
  std::vector<Real> reduced(n + m, 0.0L);
  std::fill(reduced.begin(), reduced.begin() + n, 1.0L);
  std::vector<int> basis(m);
  std::iota(basis.begin(), basis.end(), n);

  const int pivot_cap = 50 * (n + m) + 1000;
  int pivots = 0;
  while (true) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (reduced[j] > kPivotEpsilon) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    int leave = -1;
    Real best_ratio = 0;
    for (int i = 0; i < m; ++i) {
      if (at(i, enter) <= kPivotEpsilon) continue;
      const Real ratio = at(i, width - 1) / at(i, enter);
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave < 0) {
      // Cannot happen with a strictly positive shifted matrix.
      throw SolverError("simplex: unbounded program");
    }
    if (++pivots > pivot_cap) throw SolverError("simplex: pivot cap exceeded");

    const Real p = at(leave, enter);
    for (int j = 0; j < width; ++j) at(leave, j) /= p;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const Real f = at(i, enter);
      if (f == 0) continue;
      for (int j = 0; j < width; ++j) at(i, j) -= f * at(leave, j);
    }
    const Real f = reduced[enter];
    for (int j = 0; j < n + m; ++j) reduced[j] -= f * at(leave, j);
    basis[leave] = enter;
  }

  std::vector<Real> y(n, 0.0L);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) y[basis[i]] = at(i, width - 1);
  }
  std::vector<Real> x(m);
  for (int i = 0; i < m; ++i) x[i] = -reduced[n + i];
  const Real total = std::accumulate(y.begin(), y.end(), 0.0L);

  ZeroSumSolution solution;
  solution.col_mix = Normalize(std::move(y));
  solution.row_mix = Normalize(std::move(x));
  solution.value = static_cast<double>(1.0L / total - shift);
  solution.iterations = pivots;
  solution.duality_gap = DualityGap(a, solution.row_mix, solution.col_mix);
  return solution;
}

ZeroSumSolution SolveByFictitiousPlay(const Eigen::MatrixXd& a,
                                      const SolverOptions& options) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  std::vector<double> row_counts(m, 0.0);
  std::vector<double> col_counts(n, 0.0);
  // Running payoffs of each pure strategy against the opponent's history.
  Eigen::VectorXd row_payoff = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd col_payoff = Eigen::VectorXd::Zero(n);
  int row = 0;
  int col = 0;
  for (int t = 1; t <= options.max_iterations; ++t) {
    row_counts[row] += 1.0;
    col_counts[col] += 1.0;
    row_payoff += a.col(col);
    col_payoff += a.row(row).transpose();
    const double upper = row_payoff.maxCoeff() / t;
    const double lower = col_payoff.minCoeff() / t;
    if (upper - lower <= options.tolerance) {
      ZeroSumSolution solution;
      for (double& c : row_counts) c /= t;
      for (double& c : col_counts) c /= t;
      solution.row_mix = std::move(row_counts);
      solution.col_mix = std::move(col_counts);
      solution.value = 0.5 * (upper + lower);
      solution.duality_gap = upper - lower;
      solution.iterations = t;
      return solution;
    }
    row_payoff.maxCoeff(&row);  // first maximizer
    col_payoff.minCoeff(&col);
  }
  throw SolverError("fictitious play did not reach gap " +
                    std::to_string(options.tolerance) + " within " +
                    std::to_string(options.max_iterations) + " rounds");
}

}  // namespace

ZeroSumSolution SolveZeroSum(const Eigen::MatrixXd& matrix,
                             const SolverOptions& options) {
  if (matrix.rows() == 0 || matrix.cols() == 0) {
    throw InputError("zero-sum game with an empty strategy set");
  }
  if (!matrix.allFinite()) {
    throw InputError("zero-sum game has non-finite payoffs");
  }
  ZeroSumSolution solution = options.method == ZeroSumMethod::kSimplex
                                 ? SolveBySimplex(matrix)
                                 : SolveByFictitiousPlay(matrix, options);
  if (solution.duality_gap > options.tolerance) {
    throw SolverError("zero-sum solve left a duality gap of " +
                      std::to_string(solution.duality_gap));
  }
  return solution;
}

}  // namespace metapen
