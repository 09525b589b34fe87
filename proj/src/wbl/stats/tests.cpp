#include "wbl/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wbl/error.hpp"
#include "wbl/stats/distributions.hpp"

namespace wbl::stats {

std::string_view to_string(TestKind k) noexcept {
  switch (k) {
    case TestKind::one_sample_t: return "one_sample_t";
    case TestKind::welch_t: return "welch_t";
    case TestKind::paired_t: return "paired_t";
    case TestKind::anova_F: return "anova_F";
    case TestKind::z: return "z";
    case TestKind::pearson_r: return "pearson_r";
  }
  return "z";
}

double mean(std::span<const double> x) {
  if (x.empty()) fail(Errc::TooFewObservations, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) fail(Errc::TooFewObservations, "variance needs at least two observations");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

TestResult one_sample_t(std::span<const double> a, double mu) {
  if (a.size() < 2) fail(Errc::TooFewObservations, "one-sample t needs at least two observations");
  const double m = mean(a);
  const double sd = std::sqrt(sample_variance(a));
  if (sd == 0.0) fail(Errc::ZeroVariance, "one-sample t: sample has zero variance");
  TestResult r;
  r.kind = TestKind::one_sample_t;
  r.n = a.size();
  r.df = static_cast<double>(a.size() - 1);
  r.estimate = m - mu;
  r.statistic = (m - mu) / (sd / std::sqrt(static_cast<double>(a.size())));
  r.p_value = student_t_two_sided_p(r.statistic, r.df);
  r.effect_size = (m - mu) / sd;
  return r;
}

TestResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) fail(Errc::TooFewObservations, "Welch t needs at least two observations per group");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = sample_variance(a), vb = sample_variance(b);
  const double qa = va / na, qb = vb / nb;
  const double se2 = qa + qb;
  if (se2 == 0.0) fail(Errc::ZeroVariance, "Welch t: both samples have zero variance");
  TestResult r;
  r.kind = TestKind::welch_t;
  r.n = a.size() + b.size();
  r.estimate = ma - mb;
  r.statistic = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.statistic, r.df);
  const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  r.effect_size = (ma - mb) / pooled;
  return r;
}

TestResult paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::LengthMismatch, "paired t: samples differ in length");
  if (a.size() < 2) fail(Errc::TooFewObservations, "paired t needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double m = mean(d);
  const double sd = std::sqrt(sample_variance(d));
  if (sd == 0.0) fail(Errc::ZeroVariance, "paired t: differences have zero variance");
  TestResult r;
  r.kind = TestKind::paired_t;
  r.n = d.size();
  r.df = static_cast<double>(d.size() - 1);
  r.estimate = m;
  r.statistic = m / (sd / std::sqrt(static_cast<double>(d.size())));
  r.p_value = student_t_two_sided_p(r.statistic, r.df);
  r.effect_size = m / sd;
  return r;
}

TestResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) fail(Errc::TooFewGroups, "ANOVA needs at least two groups");
  double grand = 0.0;
  std::size_t N = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) fail(Errc::TooFewGroups, "every ANOVA group needs at least two observations");
    grand += std::accumulate(g.begin(), g.end(), 0.0);
    N += g.size();
  }
  grand /= static_cast<double>(N);
  double ss_between = 0.0, ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }
  if (ss_within == 0.0) fail(Errc::ZeroWithinVariance, "ANOVA: zero within-group variance");
  const double k = static_cast<double>(groups.size());
  TestResult r;
  r.kind = TestKind::anova_F;
  r.n = N;
  r.df = k - 1.0;
  r.df2 = static_cast<double>(N) - k;
  r.statistic = (ss_between / r.df) / (ss_within / r.df2);
  r.p_value = f_survival(r.statistic, r.df, r.df2);
  return r;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) fail(Errc::OutOfRange, "p-values must lie in [0,1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double scaled = p_values[order[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running = std::min(running, scaled);
    // rounding in p * m / m can land one ulp below p
    adjusted[order[k]] = std::max(std::min(running, 1.0), p_values[order[k]]);
  }
  return adjusted;
}

TestResult pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(Errc::LengthMismatch, "pearson r: vectors differ in length");
  if (x.size() < 3) fail(Errc::TooFewObservations, "pearson r needs at least three pairs");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) fail(Errc::ZeroVariance, "pearson r: a vector is constant");
  TestResult res;
  res.kind = TestKind::pearson_r;
  res.n = x.size();
  res.df = static_cast<double>(x.size() - 2);
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  res.statistic = r;
  res.estimate = r;
  if (std::fabs(r) == 1.0) {
    res.p_value = 0.0;
  } else {
    const double t = r * std::sqrt(res.df / (1.0 - r * r));
    res.p_value = student_t_two_sided_p(t, res.df);
  }
  return res;
}

TestResult coeff_difference_z(double b1, double se1, double b2, double se2) {
  if (!(se1 > 0.0) || !(se2 > 0.0)) fail(Errc::NonPositiveSE, "standard errors must be positive");
  TestResult r;
  r.kind = TestKind::z;
  r.estimate = b1 - b2;
  r.statistic = (b1 - b2) / std::sqrt(se1 * se1 + se2 * se2);
  r.p_value = normal_two_sided_p(r.statistic);
  r.p_one_sided = 0.5 * r.p_value;
  r.df = std::numeric_limits<double>::infinity();
  return r;
}

Shuffler uniform_shuffler(std::size_t n_labels) {
  return [n_labels](Rng& rng) { return rng.permutation(n_labels); };
}

Shuffler blocked_shuffler(std::vector<std::size_t> block_of) {
  return [block_of = std::move(block_of)](Rng& rng) {
    std::vector<std::size_t> perm(block_of.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::size_t n_blocks = 0;
    for (std::size_t b : block_of) n_blocks = std::max(n_blocks, b + 1);
    for (std::size_t b = 0; b < n_blocks; ++b) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < block_of.size(); ++i)
        if (block_of[i] == b) members.push_back(i);
      auto shuffled = members;
      rng.shuffle(std::span<std::size_t>(shuffled));
      for (std::size_t k = 0; k < members.size(); ++k) perm[members[k]] = shuffled[k];
    }
    return perm;
  };
}

double permutation_pvalue(double observed, const PermutedStatistic& statistic, const Shuffler& shuffler, int n_perms,
                          std::uint64_t seed) {
  if (n_perms < 99) fail(Errc::TooFewPermutations, "need at least 99 permutations, got " + std::to_string(n_perms));
  // recomputing an invariant statistic can differ from `observed` in the last
  // bits, so ties are judged with a small relative tolerance
  const double tol = 1e-12 * std::max(1.0, std::fabs(observed));
  long exceed = 0;
  for (int i = 0; i < n_perms; ++i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    const auto perm = shuffler(rng);
    if (statistic(perm) >= observed - tol) ++exceed;
  }
  return static_cast<double>(1 + exceed) / static_cast<double>(n_perms + 1);
}

}  // namespace wbl::stats
