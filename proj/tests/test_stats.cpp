#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "wbl/error.hpp"
#include "wbl/rng.hpp"
#include "wbl/stats/distributions.hpp"
#include "wbl/stats/regression.hpp"
#include "wbl/stats/tests.hpp"

using namespace wbl;
using namespace wbl::stats;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected wbl::Error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("incomplete beta agrees with boost to 1e-12") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const double a = rng.uniform(0.05, 1200.0);
      const double b = rng.uniform(0.05, 60.0);
      const double x = rng.uniform();
      CHECK(std::fabs(incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-12);
    }
  }

  TEST_CASE("t and F tails agree with boost") {
    for (double df : {1.0, 2.5, 9.695737210619734, 207.0, 399.0, 2112.0}) {
      boost::math::students_t dist(df);
      for (double t : {0.0, 0.3, 1.0, 2.77, 5.32, 9.26, 30.0}) {
        const double expected = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
        CHECK(std::fabs(student_t_two_sided_p(t, df) - expected) < 1e-12);
        CHECK(std::fabs(student_t_cdf(-t, df) - boost::math::cdf(dist, -t)) < 1e-12);
      }
    }
    boost::math::fisher_f fdist(11.0, 2112.0);
    for (double f : {0.0, 0.5, 1.7, 3.0, 73.53}) {
      CHECK(std::fabs(f_survival(f, 11.0, 2112.0) - boost::math::cdf(boost::math::complement(fdist, f))) < 1e-12);
    }
  }

  TEST_CASE("normal tails") {
    CHECK(normal_two_sided_p(0.0) == doctest::Approx(1.0));
    CHECK(normal_two_sided_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  }
}

TEST_SUITE("ols") {
  TEST_CASE("exact linear fit") {
    DesignMatrix X(5);
    X.add_intercept().add_column("x", {1, 2, 3, 4, 5});
    const std::vector<double> y = {2, 4, 6, 8, 10};
    auto fit = ols_fit(X, y);
    CHECK(fit.coef("x") == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.coef(kIntercept) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.df == 3);
  }

  TEST_CASE("intercept-only model estimates the mean") {
    DesignMatrix X(4);
    X.add_intercept();
    const std::vector<double> y = {1.0, 2.0, 4.0, 9.0};
    CHECK(ols_fit(X, y).coef(kIntercept) == doctest::Approx(4.0));
  }

  TEST_CASE("random designs match normal equations and residuals are orthogonal") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
      const std::size_t n = 20;
      std::vector<std::vector<double>> cols(3, std::vector<double>(n));
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        cols[0][i] = 1.0;
        cols[1][i] = rng.normal();
        cols[2][i] = rng.uniform(-3, 3);
        y[i] = 1.0 + 0.5 * cols[1][i] - 2.0 * cols[2][i] + rng.normal();
      }
      DesignMatrix X(n);
      X.add_column("a", cols[0]).add_column("b", cols[1]).add_column("c", cols[2]);
      auto fit = ols_fit(X, y);
      auto beta = oracle::normal_equations(cols, y);
      double ynorm = 0.0;
      for (double v : y) ynorm += v * v;
      ynorm = std::sqrt(ynorm);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::fabs(fit.coefficients[j] - beta[j]) < 1e-8);
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += cols[j][i] * fit.residuals[i];
        CHECK(std::fabs(dot) < 1e-8 * ynorm);
      }
    }
  }

  TEST_CASE("rank deficiency names the dependent column") {
    DesignMatrix X(4);
    X.add_intercept().add_column("x", {1, 2, 3, 4}).add_column("x2", {2, 4, 6, 8});
    const std::vector<double> y = {1, 2, 3, 5};
    try {
      ols_fit(X, y);
      FAIL("expected RankDeficient");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::RankDeficient);
      CHECK((e.detail() == "x2" || e.detail() == "x" || e.detail() == "(Intercept)"));
    }
  }

  TEST_CASE("non-finite input is rejected") {
    DesignMatrix X(2);
    CHECK(code_of([&] { X.add_column("x", {1.0, std::nan("")}); }) == Errc::NonFinite);
  }

  TEST_CASE("CR0 cluster-robust standard errors match the sandwich formula") {
    // two-column design, three clusters; hand-expanded sandwich
    DesignMatrix X(6);
    X.add_intercept().add_column("x", {0, 1, 2, 0, 1, 3});
    X.set_clusters({"a", "a", "b", "b", "c", "c"});
    const std::vector<double> y = {1.0, 2.5, 2.9, 0.7, 2.2, 4.4};
    auto fit = ols_fit(X, y);
    CHECK(fit.se_kind == SeKind::cluster_robust);
    CHECK(fit.n_clusters == 3);

    std::vector<std::vector<double>> cols = {std::vector<double>(6, 1.0), X.column("x")};
    auto beta = oracle::normal_equations(cols, y);
    oracle::Matrix xtx(2, std::vector<double>(2, 0.0));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int r = 0; r < 6; ++r) xtx[i][j] += cols[i][r] * cols[j][r];
    const double det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0];
    const oracle::Matrix inv = {{xtx[1][1] / det, -xtx[0][1] / det}, {-xtx[1][0] / det, xtx[0][0] / det}};
    oracle::Matrix meat(2, std::vector<double>(2, 0.0));
    for (int g = 0; g < 3; ++g) {
      double s[2] = {0, 0};
      for (int r = 2 * g; r < 2 * g + 2; ++r) {
        const double e = y[r] - beta[0] - beta[1] * cols[1][r];
        s[0] += cols[0][r] * e;
        s[1] += cols[1][r] * e;
      }
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) meat[i][j] += s[i] * s[j];
    }
    double v11 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) v11 += inv[1][i] * meat[i][j] * inv[j][1];
    CHECK(fit.se("x") == doctest::Approx(std::sqrt(v11)).epsilon(1e-10));
  }
}

TEST_SUITE("fixed effects") {
  TEST_CASE("subject offsets are absorbed and the slope recovered exactly") {
    const std::vector<std::string> ids = {"s1", "s1", "s1", "s2", "s2", "s2", "s3", "s3"};
    const std::vector<double> x = {0, 1, 2, 0, 2, 5, 1, 3};
    const std::vector<double> offset = {10, 10, 10, -4, -4, -4, 33, 33};
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = offset[i] + 1.5 * x[i];
    DesignMatrix X(x.size());
    X.add_intercept().add_column("x", x);
    auto fit = fe_ols_fit(X, y, ids);
    CHECK(fit.coef("x") == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.absorbed_groups == 3);
    CHECK(fit.df == static_cast<long>(x.size()) - 1 - 3);
    CHECK_FALSE(fit.has(kIntercept));
  }

  TEST_CASE("slope invariant to per-subject constants") {
    Rng rng(5);
    std::vector<std::string> ids;
    std::vector<double> x, y, y_shift;
    for (int s = 0; s < 20; ++s) {
      const double c = rng.uniform(-50, 50);
      for (int k = 0; k < 4; ++k) {
        ids.push_back("p" + std::to_string(s));
        x.push_back(rng.normal());
        y.push_back(2.0 * x.back() + rng.normal());
        y_shift.push_back(y.back() + c);
      }
    }
    DesignMatrix X(x.size());
    X.add_column("x", x);
    auto a = fe_ols_fit(X, y, ids);
    auto b = fe_ols_fit(X, y_shift, ids);
    CHECK(a.coef("x") == doctest::Approx(b.coef("x")).epsilon(1e-10));
    CHECK(a.se("x") == doctest::Approx(b.se("x")).epsilon(1e-8));
  }

  TEST_CASE("regressor constant within every subject") {
    const std::vector<std::string> ids = {"a", "a", "b", "b"};
    DesignMatrix X(4);
    X.add_column("group_level", {1, 1, 2, 2}).add_column("x", {0, 1, 0, 1});
    const std::vector<double> y = {1, 2, 3, 5};
    CHECK(code_of([&] { fe_ols_fit(X, y, ids); }) == Errc::NoWithinVariation);
    FixedEffectsOptions opt;
    opt.drop_constant_columns = true;
    // 4 rows, 1 coefficient, 2 absorbed groups leaves df = 1
    auto fit = fe_ols_fit(X, y, ids, opt);
    CHECK(fit.absorbed_columns == std::vector<std::string>{"group_level"});
  }

  TEST_CASE("single subject") {
    const std::vector<std::string> ids = {"a", "a", "a"};
    DesignMatrix X(3);
    X.add_column("x", {0, 1, 2});
    const std::vector<double> y = {1, 2, 3};
    CHECK(code_of([&] { fe_ols_fit(X, y, ids); }) == Errc::SingleSubject);
  }

  TEST_CASE("random-intercept simulation: slope covered by 3 SEs in >= 95 of 100 runs") {
    int covered = 0;
    for (int run = 0; run < 100; ++run) {
      Rng rng = Rng::substream(1234, static_cast<std::uint64_t>(run));
      std::vector<std::string> ids;
      std::vector<double> x, y;
      for (int s = 0; s < 60; ++s) {
        const double intercept = rng.normal(50.0, 10.0);
        for (int k = 0; k < 5; ++k) {
          ids.push_back("s" + std::to_string(s));
          x.push_back(rng.uniform(1, 12));
          y.push_back(intercept + 1.44 * x.back() + rng.normal(0.0, 5.0));
        }
      }
      DesignMatrix X(x.size());
      X.add_intercept().add_column("x", x);
      auto fit = fe_ols_fit(X, y, ids);
      if (std::fabs(fit.coef("x") - 1.44) <= 3.0 * fit.se("x")) ++covered;
    }
    CHECK(covered >= 95);
  }
}

TEST_SUITE("classical tests") {
  TEST_CASE("welch against frozen scipy values") {
    const std::vector<double> a = {4.1, 5.3, 6.2, 3.9, 5.5, 7.0, 4.8};
    const std::vector<double> b = {6.0, 7.2, 5.9, 8.1, 6.6};
    auto r = welch_t(a, b);
    CHECK(r.statistic == doctest::Approx(-2.5689067819086286).epsilon(1e-10));
    CHECK(r.df == doctest::Approx(9.695737210619734).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(0.028587134144931536).epsilon(1e-10));
    CHECK(*r.effect_size == doctest::Approx(-1.4522465178553399).epsilon(1e-10));
  }

  TEST_CASE("welch of a sample with itself") {
    const std::vector<double> a = {1, 2, 3, 4};
    auto r = welch_t(a, a);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(1.0));
  }

  TEST_CASE("paired and one-sample against frozen scipy values") {
    auto p = paired_t(std::vector<double>{5, 6, 7, 8, 6.5}, std::vector<double>{4, 6.2, 5.1, 7.7, 5.0});
    CHECK(p.statistic == doctest::Approx(2.347382389307854).epsilon(1e-10));
    CHECK(p.p_value == doctest::Approx(0.07874022061460667).epsilon(1e-10));
    auto o = one_sample_t(std::vector<double>{1.2, 0.4, 2.2, 1.9, 0.8, 1.1}, 0.5);
    CHECK(o.statistic == doctest::Approx(2.785067008254776).epsilon(1e-10));
    CHECK(o.p_value == doctest::Approx(0.038669670514015715).epsilon(1e-10));
  }

  TEST_CASE("paired test of identical vectors has zero variance") {
    const std::vector<double> a = {1, 2, 3};
    CHECK(code_of([&] { paired_t(a, a); }) == Errc::ZeroVariance);
    CHECK(code_of([&] { paired_t(a, std::vector<double>{1, 2}); }) == Errc::LengthMismatch);
  }

  TEST_CASE("anova against frozen scipy values") {
    auto r = one_way_anova({{1, 2, 3, 4.5}, {2, 3.5, 4, 5, 6}, {5, 6, 7.5, 8}});
    CHECK(r.statistic == doctest::Approx(7.612532311257689).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(0.009791259535223286).epsilon(1e-10));
    CHECK(r.df == 2.0);
    CHECK(r.df2 == 10.0);
  }

  TEST_CASE("anova with equal means gives F = 0") {
    auto r = one_way_anova({{1, 3}, {0, 4}, {2, 2.5, 1.5}});
    CHECK(r.statistic == doctest::Approx(0.0).scale(1.0));
    CHECK(r.p_value == doctest::Approx(1.0));
  }

  TEST_CASE("two-group anova equals the squared pooled t") {
    const std::vector<double> a = {3.1, 4.4, 5.0, 2.8, 4.1};
    const std::vector<double> b = {5.5, 6.1, 4.9, 7.2};
    const double ma = mean(a), mb = mean(b);
    const double sp2 = (4 * sample_variance(a) + 3 * sample_variance(b)) / 7.0;
    const double t = (ma - mb) / std::sqrt(sp2 * (1.0 / 5 + 1.0 / 4));
    CHECK(one_way_anova({a, b}).statistic == doctest::Approx(t * t).epsilon(1e-12));
  }

  TEST_CASE("anova degenerate inputs") {
    CHECK(code_of([] { one_way_anova({{1, 2}}); }) == Errc::TooFewGroups);
    CHECK(code_of([] { one_way_anova({{2, 2}, {3, 3}}); }) == Errc::ZeroWithinVariance);
  }

  TEST_CASE("pearson") {
    const std::vector<double> x = {1.0, 2.0, 3.5, 4.0, 5.5, 7.0};
    const std::vector<double> y = {2.1, 2.9, 4.2, 4.1, 6.3, 6.9};
    auto r = pearson_r(x, y);
    CHECK(r.statistic == doctest::Approx(0.9861633108959789).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.0002858564035437875).epsilon(1e-9));
    CHECK(pearson_r(x, x).statistic == doctest::Approx(1.0));
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    CHECK(pearson_r(x, neg).statistic == doctest::Approx(-1.0));
    CHECK(code_of([&] { pearson_r(x, std::vector<double>(6, 1.0)); }) == Errc::ZeroVariance);
  }

  TEST_CASE("coefficient difference z") {
    CHECK(coeff_difference_z(0.35, 0.03, 0.35, 0.01).statistic == 0.0);
    auto r = coeff_difference_z(0.21, 0.02, 0.18, 0.01);
    CHECK(r.statistic == doctest::Approx(0.03 / std::sqrt(0.0005)).epsilon(1e-12));
    CHECK(*r.p_one_sided == doctest::Approx(r.p_value / 2));
    CHECK(code_of([] { coeff_difference_z(1, 0, 1, 1); }) == Errc::NonPositiveSE);
    // a -0.2 difference in z reproduces the reported one-sided p = .42
    CHECK(coeff_difference_z(0.35 - 0.2 * std::sqrt(0.001), std::sqrt(0.0009), 0.35, std::sqrt(0.0001))
              .p_one_sided.value() == doctest::Approx(0.42).epsilon(0.01));
  }
}

TEST_SUITE("bh") {
  TEST_CASE("worked example and degenerate cases") {
    auto q = bh_adjust(std::vector<double>{0.01, 0.02, 0.03, 0.04});
    for (double v : q) CHECK(v == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(bh_adjust(std::vector<double>{0.37}) == std::vector<double>{0.37});
    CHECK(bh_adjust(std::vector<double>{0, 0, 0}) == std::vector<double>{0, 0, 0});
    CHECK(code_of([] { bh_adjust(std::vector<double>{0.5, 1.2}); }) == Errc::OutOfRange);
  }

  TEST_CASE("random vectors match the definition; output dominates input and is monotone") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
      std::vector<double> p(1 + rng.below(30));
      for (double& v : p) v = rng.uniform();
      auto q = bh_adjust(p);
      auto expected = oracle::bh_by_definition(p);
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(q[i] == doctest::Approx(expected[i]).epsilon(1e-14));
        CHECK(q[i] >= p[i]);
        for (std::size_t j = 0; j < p.size(); ++j)
          if (p[i] < p[j]) CHECK(q[i] <= q[j]);
      }
    }
  }
}

TEST_SUITE("lmg") {
  TEST_CASE("three predictors match the six-ordering enumeration") {
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 40;
      std::vector<std::vector<double>> preds(3, std::vector<double>(n));
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        preds[0][i] = rng.normal();
        preds[1][i] = 0.6 * preds[0][i] + rng.normal();
        preds[2][i] = rng.uniform(-1, 1);
        y[i] = preds[0][i] + 0.5 * preds[1][i] - preds[2][i] + rng.normal();
      }
      DesignMatrix X(n);
      X.add_column("a", preds[0]).add_column("b", preds[1]).add_column("c", preds[2]);
      auto shares = lmg_shares(X, y);
      auto expected = oracle::lmg_by_orderings(preds, y);
      double sum = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(std::fabs(shares.shares[k] - expected[k]) < 1e-10);
        sum += shares.shares[k];
      }
      CHECK(std::fabs(sum - oracle::r_squared(preds, y)) < 1e-10);
    }
  }

  TEST_CASE("orthogonal predictors receive their marginal R^2") {
    const std::vector<double> a = {1, -1, 1, -1, 1, -1, 1, -1};
    const std::vector<double> b = {1, 1, -1, -1, 1, 1, -1, -1};
    const std::vector<double> y = {3.0, 0.5, 1.0, -1.5, 2.2, 0.1, 0.8, -2.0};
    DesignMatrix X(8);
    X.add_column("a", a).add_column("b", b);
    auto shares = lmg_shares(X, y);
    CHECK(shares.shares[0] == doctest::Approx(oracle::r_squared({a}, y)).epsilon(1e-12));
    CHECK(shares.shares[1] == doctest::Approx(oracle::r_squared({b}, y)).epsilon(1e-12));
  }

  TEST_CASE("symmetric predictors receive equal shares") {
    // every row (a, b, y) has a mirror row (b, a, y), so swapping the two
    // predictors leaves the data unchanged
    Rng rng(4);
    std::vector<double> x1, x2, y;
    for (int i = 0; i < 15; ++i) {
      const double a = rng.normal(), b = rng.normal(), target = a + b + rng.normal();
      x1.insert(x1.end(), {a, b});
      x2.insert(x2.end(), {b, a});
      y.insert(y.end(), {target, target});
    }
    DesignMatrix X(30);
    X.add_column("x1", x1).add_column("x2", x2);
    auto shares = lmg_shares(X, y);
    CHECK(shares.shares[0] == doctest::Approx(shares.shares[1]).epsilon(1e-10));
    CHECK(shares.percentages[0] + shares.percentages[1] == doctest::Approx(100.0));
  }

  TEST_CASE("predictor limits") {
    DesignMatrix X(20);
    Rng rng(1);
    for (int k = 0; k < 9; ++k) {
      std::vector<double> col(20);
      for (double& v : col) v = rng.normal();
      X.add_column("x" + std::to_string(k), col);
    }
    CHECK(code_of([&] { lmg_shares(X, std::vector<double>(20, 1.0)); }) == Errc::TooManyPredictors);
  }
}

TEST_SUITE("permutation") {
  TEST_CASE("shuffle-invariant statistic gives p = 1") {
    const std::vector<double> values = {1, 2, 3, 4, 5};
    auto stat = [&](std::span<const std::size_t> perm) {
      double s = 0.0;
      for (std::size_t i : perm) s += values[i];
      return s / 3.0;
    };
    const std::vector<std::size_t> id = {0, 1, 2, 3, 4};
    CHECK(permutation_pvalue(stat(id), stat, uniform_shuffler(5), 199, 42) == 1.0);
  }

  TEST_CASE("strictly maximal observed statistic gives 1/(n+1)") {
    auto stat = [](std::span<const std::size_t>) { return 0.0; };
    CHECK(permutation_pvalue(1.0, stat, uniform_shuffler(10), 99, 1) == doctest::Approx(0.01));
  }

  TEST_CASE("fixed seed reproduces bit-exactly") {
    const std::vector<double> x = {0.3, 1.2, -0.5, 2.2, 0.9, -1.1, 0.4, 1.8};
    const std::vector<double> y = {0.1, 1.0, -0.2, 1.9, 0.4, -0.8, 0.9, 1.1};
    auto stat = [&](std::span<const std::size_t> perm) {
      double s = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) s += x[i] * y[perm[i]];
      return s;
    };
    const std::vector<std::size_t> id = {0, 1, 2, 3, 4, 5, 6, 7};
    const double p1 = permutation_pvalue(stat(id), stat, uniform_shuffler(8), 999, 2024);
    const double p2 = permutation_pvalue(stat(id), stat, uniform_shuffler(8), 999, 2024);
    CHECK(p1 == p2);
    CHECK(p1 < 0.1);
    CHECK(code_of([&] { permutation_pvalue(0.0, stat, uniform_shuffler(8), 98, 1); }) == Errc::TooFewPermutations);
  }

  TEST_CASE("blocked shuffler keeps labels inside their block") {
    auto shuffler = blocked_shuffler({0, 0, 1, 1, 1});
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
      auto perm = shuffler(rng);
      CHECK(perm[0] < 2);
      CHECK(perm[1] < 2);
      CHECK(perm[2] >= 2);
    }
  }
}
