#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wbl::stats {

inline constexpr std::string_view kIntercept = "(Intercept)";

// Named regressor columns plus optional per-row cluster labels.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  explicit DesignMatrix(std::size_t rows) : rows_(rows) {}

  DesignMatrix& add_intercept();
  DesignMatrix& add_column(std::string name, std::vector<double> values);
  DesignMatrix& set_clusters(std::vector<std::string> ids);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& column(std::size_t j) const { return columns_.at(j); }
  const std::vector<double>& column(std::string_view name) const;
  bool has_intercept() const noexcept;
  const std::optional<std::vector<std::string>>& clusters() const noexcept { return clusters_; }

  Eigen::MatrixXd to_matrix() const;
  // Row subset, clusters included.
  DesignMatrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::optional<std::vector<std::string>> clusters_;
};

enum class SeKind { classical, cluster_robust };

struct RegressionFit {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;
  Eigen::MatrixXd covariance;
  double r_squared = 0.0;
  std::vector<double> residuals;
  std::vector<double> fitted;
  std::size_t n = 0;
  long df = 0;
  SeKind se_kind = SeKind::classical;
  std::size_t n_clusters = 0;
  // fixed-effects fits only
  std::size_t absorbed_groups = 0;
  std::vector<std::string> absorbed_columns;

  std::size_t index_of(std::string_view name) const;
  bool has(std::string_view name) const noexcept;
  double coef(std::string_view name) const { return coefficients[index_of(name)]; }
  double se(std::string_view name) const { return std_errors[index_of(name)]; }
  double p(std::string_view name) const { return p_values[index_of(name)]; }
  // Standard error of coef(a) + coef(b).
  double se_of_sum(std::string_view a, std::string_view b) const;
  double rmse() const;
};

// Least squares through column-pivoted Householder QR. Classical standard
// errors, or CR0 cluster-robust ones when X carries cluster ids.
RegressionFit ols_fit(const DesignMatrix& X, std::span<const double> y);

struct FixedEffectsOptions {
  // Drop regressors with no within-subject variation instead of failing;
  // dropped names are recorded in RegressionFit::absorbed_columns.
  bool drop_constant_columns = false;
};

// Absorbs one intercept per subject by within-subject demeaning, then fits
// OLS on the demeaned data with CR0 standard errors clustered on subject.
// An intercept column in X, if present, is dropped (absorbed).
RegressionFit fe_ols_fit(const DesignMatrix& X, std::span<const double> y, std::span<const std::string> subject_ids,
                         FixedEffectsOptions options = {});

struct LmgShares {
  std::vector<std::string> names;
  std::vector<double> shares;       // sum to r_squared
  std::vector<double> percentages;  // shares / r_squared * 100
  double r_squared = 0.0;
};

// R^2 of y on the given predictor columns plus an intercept.
double r_squared_with_intercept(const DesignMatrix& X, std::span<const std::size_t> columns, std::span<const double> y);

// LMG decomposition: each predictor's incremental R^2 averaged over all
// orderings, computed over subsets with the Shapley weights. X holds the
// predictors only (an intercept is always added).
LmgShares lmg_shares(const DesignMatrix& X, std::span<const double> y);

}  // namespace wbl::stats
