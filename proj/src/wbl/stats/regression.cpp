#include "wbl/stats/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "wbl/error.hpp"
#include "wbl/stats/distributions.hpp"

namespace wbl::stats {

DesignMatrix& DesignMatrix::add_intercept() { return add_column(std::string(kIntercept), std::vector<double>(rows_, 1.0)); }

DesignMatrix& DesignMatrix::add_column(std::string name, std::vector<double> values) {
  if (values.size() != rows_)
    fail(Errc::LengthMismatch, "column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                                   std::to_string(rows_));
  if (std::find(names_.begin(), names_.end(), name) != names_.end())
    fail(Errc::InvalidArgument, "duplicate column name '" + name + "'");
  for (double v : values) {
    if (!std::isfinite(v)) fail(Errc::NonFinite, "column '" + name + "' has a non-finite entry");
  }
  names_.push_back(std::move(name));
  columns_.push_back(std::move(values));
  return *this;
}

DesignMatrix& DesignMatrix::set_clusters(std::vector<std::string> ids) {
  if (ids.size() != rows_) fail(Errc::LengthMismatch, "cluster ids must have one entry per row");
  clusters_ = std::move(ids);
  return *this;
}

const std::vector<double>& DesignMatrix::column(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) fail(Errc::InvalidArgument, "no column named '" + std::string(name) + "'");
  return columns_[static_cast<std::size_t>(it - names_.begin())];
}

bool DesignMatrix::has_intercept() const noexcept {
  for (const auto& col : columns_) {
    if (!col.empty() && col.front() != 0.0 &&
        std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); }))
      return true;
  }
  return false;
}

Eigen::MatrixXd DesignMatrix::to_matrix() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t j = 0; j < columns_.size(); ++j)
    for (std::size_t i = 0; i < rows_; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns_[j][i];
  return m;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
  DesignMatrix out(rows.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    std::vector<double> col;
    col.reserve(rows.size());
    for (std::size_t r : rows) col.push_back(columns_[j].at(r));
    out.add_column(names_[j], std::move(col));
  }
  if (clusters_) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (std::size_t r : rows) ids.push_back(clusters_->at(r));
    out.set_clusters(std::move(ids));
  }
  return out;
}

std::size_t RegressionFit::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(Errc::InvalidArgument, "fit has no coefficient '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool RegressionFit::has(std::string_view name) const noexcept {
  return std::find(names.begin(), names.end(), name) != names.end();
}

double RegressionFit::se_of_sum(std::string_view a, std::string_view b) const {
  const auto i = static_cast<Eigen::Index>(index_of(a));
  const auto j = static_cast<Eigen::Index>(index_of(b));
  return std::sqrt(std::max(0.0, covariance(i, i) + covariance(j, j) + 2.0 * covariance(i, j)));
}

double RegressionFit::rmse() const {
  if (residuals.empty()) return 0.0;
  double ss = 0.0;
  for (double r : residuals) ss += r * r;
  return std::sqrt(ss / static_cast<double>(residuals.size()));
}

namespace {

constexpr double kRankThreshold = 1e-12;

struct FitInput {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  const std::vector<std::string>* clusters = nullptr;
  bool centered_total = true;
  long df_reduction = 0;
};

void fill_inference(RegressionFit& fit) {
  const std::size_t p = fit.coefficients.size();
  fit.std_errors.resize(p);
  fit.t_values.resize(p);
  fit.p_values.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double var = fit.covariance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    const double se = std::sqrt(std::max(0.0, var));
    const double b = fit.coefficients[j];
    fit.std_errors[j] = se;
    // an exact fit leaves no sampling error; report it as t = +-inf (or 0)
    if (se == 0.0) {
      fit.t_values[j] = b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b);
      fit.p_values[j] = b == 0.0 ? 1.0 : 0.0;
    } else {
      fit.t_values[j] = b / se;
      fit.p_values[j] = student_t_two_sided_p(fit.t_values[j], static_cast<double>(fit.df));
    }
  }
}

RegressionFit fit_least_squares(const FitInput& in) {
  const auto n = in.A.rows();
  const auto p = in.A.cols();
  if (p == 0) fail(Errc::InvalidArgument, "design matrix has no columns");
  if (!in.A.allFinite() || !in.y.allFinite()) fail(Errc::NonFinite, "design matrix or response has non-finite entries");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(in.A);
  qr.setThreshold(kRankThreshold);
  const auto rank = qr.rank();
  if (rank < p) {
    std::string dependent;
    for (Eigen::Index k = rank; k < p; ++k) {
      if (!dependent.empty()) dependent += ", ";
      dependent += in.names[static_cast<std::size_t>(qr.colsPermutation().indices()(k))];
    }
    fail(Errc::RankDeficient, "design matrix is rank deficient; dependent columns: " + dependent, dependent);
  }
  const long df = static_cast<long>(n) - static_cast<long>(p) - in.df_reduction;
  if (df <= 0)
    fail(Errc::TooFewObservations, "not enough observations: " + std::to_string(n) + " rows for " +
                                       std::to_string(p) + " coefficients");

  const Eigen::VectorXd beta = qr.solve(in.y);
  const Eigen::VectorXd fitted = in.A * beta;
  const Eigen::VectorXd resid = in.y - fitted;

  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const auto& P = qr.colsPermutation();
  const Eigen::MatrixXd bread = P * (Rinv * Rinv.transpose()) * P.transpose();

  RegressionFit fit;
  fit.names = in.names;
  fit.n = static_cast<std::size_t>(n);
  fit.df = df;
  fit.coefficients.assign(beta.data(), beta.data() + p);
  fit.fitted.assign(fitted.data(), fitted.data() + n);
  fit.residuals.assign(resid.data(), resid.data() + n);

  const double ssr = resid.squaredNorm();
  const double sst = in.centered_total ? (in.y.array() - in.y.mean()).matrix().squaredNorm() : in.y.squaredNorm();
  // no variation to explain: report R^2 = 0 rather than 0/0
  fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;

  if (in.clusters) {
    std::unordered_map<std::string, Eigen::Index> group_of;
    std::vector<Eigen::VectorXd> scores;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& id = (*in.clusters)[static_cast<std::size_t>(i)];
      auto [it, inserted] = group_of.emplace(id, static_cast<Eigen::Index>(scores.size()));
      if (inserted) scores.emplace_back(Eigen::VectorXd::Zero(p));
      scores[static_cast<std::size_t>(it->second)] += in.A.row(i).transpose() * resid(i);
    }
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
    for (const auto& s : scores) meat.noalias() += s * s.transpose();
    fit.covariance = bread * meat * bread;
    fit.se_kind = SeKind::cluster_robust;
    fit.n_clusters = scores.size();
  } else {
    const double sigma2 = ssr / static_cast<double>(df);
    fit.covariance = sigma2 * bread;
    fit.se_kind = SeKind::classical;
  }
  fill_inference(fit);
  return fit;
}

}  // namespace

RegressionFit ols_fit(const DesignMatrix& X, std::span<const double> y) {
  if (y.size() != X.rows())
    fail(Errc::LengthMismatch, "response has " + std::to_string(y.size()) + " rows, design has " +
                                   std::to_string(X.rows()));
  FitInput in;
  in.A = X.to_matrix();
  in.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  in.names = X.names();
  if (X.clusters()) in.clusters = &*X.clusters();
  in.centered_total = X.has_intercept();
  return fit_least_squares(in);
}

RegressionFit fe_ols_fit(const DesignMatrix& X, std::span<const double> y, std::span<const std::string> subject_ids,
                         FixedEffectsOptions options) {
  const std::size_t n = X.rows();
  if (y.size() != n || subject_ids.size() != n)
    fail(Errc::LengthMismatch, "response, design and subject ids must have the same number of rows");

  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::size_t> group(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, _] = group_of.emplace(subject_ids[i], group_of.size());
    group[i] = it->second;
  }
  const std::size_t G = group_of.size();
  if (G < 2) fail(Errc::SingleSubject, "fixed-effects fit needs at least two subjects");

  std::vector<double> counts(G, 0.0);
  for (std::size_t g : group) counts[g] += 1.0;
  auto demean = [&](std::span<const double> v) {
    std::vector<double> sums(G, 0.0);
    for (std::size_t i = 0; i < n; ++i) sums[group[i]] += v[i];
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = v[i] - sums[group[i]] / counts[group[i]];
    return out;
  };

  std::vector<std::string> absorbed;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    const auto& name = X.names()[j];
    if (name == kIntercept) continue;
    const auto& raw = X.column(j);
    auto within = demean(raw);
    double scale = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale += raw[i] * raw[i];
      norm += within[i] * within[i];
    }
    if (std::sqrt(norm) <= 1e-10 * (1.0 + std::sqrt(scale))) {
      if (!options.drop_constant_columns)
        fail(Errc::NoWithinVariation, "regressor '" + name + "' has no within-subject variation", name);
      absorbed.push_back(name);
      continue;
    }
    names.push_back(name);
    columns.push_back(std::move(within));
  }
  if (columns.empty()) fail(Errc::NoWithinVariation, "no regressor varies within subjects");

  FitInput in;
  in.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (std::size_t i = 0; i < n; ++i)
      in.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = columns[j][i];
  const auto y_within = demean(y);
  in.y = Eigen::Map<const Eigen::VectorXd>(y_within.data(), static_cast<Eigen::Index>(n));
  in.names = std::move(names);
  const std::vector<std::string> clusters(subject_ids.begin(), subject_ids.end());
  in.clusters = &clusters;
  in.centered_total = false;  // within R^2
  in.df_reduction = static_cast<long>(G);
  RegressionFit fit = fit_least_squares(in);
  fit.absorbed_groups = G;
  fit.absorbed_columns = std::move(absorbed);
  return fit;
}

double r_squared_with_intercept(const DesignMatrix& X, std::span<const std::size_t> columns, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(X.rows());
  if (columns.empty()) return 0.0;
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(columns.size()) + 1);
  A.col(0).setOnes();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const auto& col = X.column(columns[k]);
    for (Eigen::Index i = 0; i < n; ++i) A(i, static_cast<Eigen::Index>(k) + 1) = col[static_cast<std::size_t>(i)];
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd resid = yv - A * qr.solve(yv);
  const double sst = (yv.array() - yv.mean()).matrix().squaredNorm();
  if (sst <= 0.0) return 0.0;
  return 1.0 - resid.squaredNorm() / sst;
}

LmgShares lmg_shares(const DesignMatrix& X, std::span<const double> y) {
  const std::size_t p = X.cols();
  if (p > 8) fail(Errc::TooManyPredictors, "LMG enumeration supports at most 8 predictors, got " + std::to_string(p));
  if (p < 2) fail(Errc::InvalidArgument, "LMG needs at least 2 predictors");
  if (y.size() != X.rows()) fail(Errc::LengthMismatch, "response length differs from design rows");

  // full-rank check on the full model (throws RankDeficient with names)
  {
    DesignMatrix full(X.rows());
    full.add_intercept();
    for (std::size_t j = 0; j < p; ++j) full.add_column(X.names()[j], X.column(j));
    (void)ols_fit(full, y);
  }

  const std::size_t n_subsets = std::size_t{1} << p;
  std::vector<double> r2(n_subsets, 0.0);
  std::vector<std::size_t> cols;
  for (std::size_t mask = 1; mask < n_subsets; ++mask) {
    cols.clear();
    for (std::size_t j = 0; j < p; ++j)
      if (mask & (std::size_t{1} << j)) cols.push_back(j);
    r2[mask] = r_squared_with_intercept(X, cols, y);
  }

  std::vector<double> factorial(p + 1, 1.0);
  for (std::size_t k = 1; k <= p; ++k) factorial[k] = factorial[k - 1] * static_cast<double>(k);

  LmgShares out;
  out.names = X.names();
  out.shares.assign(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
      const double weight = factorial[s] * factorial[p - s - 1] / factorial[p];
      out.shares[k] += weight * (r2[mask | bit] - r2[mask]);
    }
  }
  out.r_squared = r2[n_subsets - 1];
  out.percentages.resize(p);
  for (std::size_t k = 0; k < p; ++k)
    out.percentages[k] = out.r_squared > 0.0 ? 100.0 * out.shares[k] / out.r_squared : 0.0;
  return out;
}

}  // namespace wbl::stats
