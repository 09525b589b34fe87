#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wbl/rng.hpp"

namespace wbl::stats {

enum class TestKind { one_sample_t, welch_t, paired_t, anova_F, z, pearson_r };

std::string_view to_string(TestKind k) noexcept;

struct TestResult {
  TestKind kind = TestKind::z;
  double statistic = 0.0;
  double df = 0.0;
  double df2 = 0.0;  // denominator df for F
  double p_value = 1.0;
  std::optional<double> p_one_sided;
  std::optional<double> effect_size;  // Cohen's d where defined
  double estimate = 0.0;              // mean difference, r, or b1 - b2
  std::size_t n = 0;
};

double mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n - 1 denominator

// One-sample t of `a` against the scalar `mu`. Cohen's d = (mean - mu) / sd.
TestResult one_sample_t(std::span<const double> a, double mu = 0.0);
// Welch t with Welch-Satterthwaite df; d uses the pooled SD.
TestResult welch_t(std::span<const double> a, std::span<const double> b);
// Paired t on a - b; d = mean(a - b) / sd(a - b).
TestResult paired_t(std::span<const double> a, std::span<const double> b);

TestResult one_way_anova(const std::vector<std::vector<double>>& groups);

// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> bh_adjust(std::span<const double> p_values);

TestResult pearson_r(std::span<const double> x, std::span<const double> y);

// z = (b1 - b2) / sqrt(se1^2 + se2^2); two-sided p plus its half as the
// one-sided value.
TestResult coeff_difference_z(double b1, double se1, double b2, double se2);

// A permutation of the exchangeable labels drawn from the given stream.
using Shuffler = std::function<std::vector<std::size_t>(Rng&)>;
// Statistic recomputed under a label permutation.
using PermutedStatistic = std::function<double(std::span<const std::size_t>)>;

Shuffler uniform_shuffler(std::size_t n_labels);
// Shuffles labels only within each block (block_of[i] gives the block of label i).
Shuffler blocked_shuffler(std::vector<std::size_t> block_of);

// p = (1 + #{permuted >= observed}) / (n_perms + 1). Permutation i draws from
// Rng::substream(seed, i), so the result does not depend on evaluation order.
double permutation_pvalue(double observed, const PermutedStatistic& statistic, const Shuffler& shuffler, int n_perms,
                          std::uint64_t seed);

}  // namespace wbl::stats
