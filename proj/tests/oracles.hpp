#pragma once

// Test-only reference computations. These deliberately avoid the library's
// QR path: plain normal equations solved by Gauss-Jordan elimination.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // row-major

inline std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

// columns: column-major predictor list; returns beta of y on columns.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
  const std::size_t p = columns.size();
  Matrix xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t r = 0; r < y.size(); ++r) xtx[i][j] += columns[i][r] * columns[j][r];
    for (std::size_t r = 0; r < y.size(); ++r) xty[i] += columns[i][r] * y[r];
  }
  return solve(xtx, xty);
}

inline double r_squared(const std::vector<std::vector<double>>& predictors, const std::vector<double>& y) {
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - my) * (v - my);
  if (predictors.empty()) return 0.0;
  std::vector<std::vector<double>> cols{std::vector<double>(y.size(), 1.0)};
  cols.insert(cols.end(), predictors.begin(), predictors.end());
  const auto beta = normal_equations(cols, y);
  double ssr = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    double f = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) f += beta[j] * cols[j][r];
    ssr += (y[r] - f) * (y[r] - f);
  }
  return 1.0 - ssr / sst;
}

// LMG by explicit enumeration of every entry ordering.
inline std::vector<double> lmg_by_orderings(const std::vector<std::vector<double>>& predictors,
                                            const std::vector<double>& y) {
  const std::size_t p = predictors.size();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> shares(p, 0.0);
  std::size_t count = 0;
  do {
    std::vector<std::vector<double>> in_model;
    double prev = 0.0;
    for (std::size_t k : order) {
      in_model.push_back(predictors[k]);
      const double now = r_squared(in_model, y);
      shares[k] += now - prev;
      prev = now;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& s : shares) s /= static_cast<double>(count);
  return shares;
}

// Benjamini-Hochberg by the textbook definition: q_i = min over j with
// p_j >= p_i of p_j * m / rank_j.
inline std::vector<double> bh_by_definition(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<double> q(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (p[j] < p[i]) continue;
      // rank of p_j = number of p-values <= p_j
      std::size_t rank = 0;
      for (double v : p)
        if (v <= p[j]) ++rank;
      best = std::min(best, p[j] * static_cast<double>(m) / static_cast<double>(rank));
    }
    q[i] = best;
  }
  return q;
}

}  // namespace oracle
