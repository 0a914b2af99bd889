#include "doctest.h"

#include <cmath>
#include <random>

#include "hcb/bounds.hpp"

using namespace hcb;

namespace {

DiscreteDistribution point(std::vector<double> p) { return DiscreteDistribution({{0, {0.0}}}, {1.0}, {p}); }

Hypothesis random_scalar(std::mt19937_64& rng, std::size_t k, double sigma = 1.5) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> s(k);
  for (auto& v : s) v = n(rng);
  return Hypothesis::tabular_scalar(s);
}

Hypothesis random_sum_zero(std::mt19937_64& rng, std::size_t k, int labels, double sigma = 1.0) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<std::vector<double>> t(k, std::vector<double>(labels));
  for (auto& row : t) {
    double m = 0;
    for (auto& v : row) m += (v = n(rng));
    for (auto& v : row) v -= m / labels;
  }
  return Hypothesis::tabular(t, true);
}

}  // namespace

TEST_CASE("transform gamma and psi are inverse") {
  TransformSpec t = TransformSpec::root(2.0, std::sqrt(2.0));
  for (double x : {0.0, 0.01, 0.3, 2.0}) CHECK(t.psi(t.gamma(x)) == doctest::Approx(x));
  CHECK(TransformSpec::linear(3.0).gamma(0.5) == 1.5);
  CHECK_THROWS_AS(TransformSpec::root(0.5).validate(), InputError);
}

TEST_CASE("reflexive pointwise assumption") {
  auto d = sample_distribution(4, 5, 2);
  std::mt19937_64 rng(1);
  auto h = random_scalar(rng, 5);
  LossSpec L = loss::Margin{PhiSpec::exp()};
  auto r = check_pointwise_assumption(L, L, h, d, hset::Complete{}, TransformSpec::linear(), factor::One{},
                                      factor::One{}, ToolMode::Concave);
  for (double v : r) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("binary table transforms hold pointwise") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 100; ++k) {
    auto d = sample_distribution(rng(), 3, 2);
    auto h = random_scalar(rng, 3);
    auto hinge = check_pointwise_assumption(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d,
                                            hset::Complete{}, TransformSpec::linear(), factor::One{}, factor::One{},
                                            ToolMode::Concave);
    auto ex = check_pointwise_assumption(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::exp()}, h, d,
                                         hset::Complete{}, TransformSpec::root(2.0, std::sqrt(2.0)), factor::One{},
                                         factor::One{}, ToolMode::Concave);
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(hinge[i] >= -1e-12);
      CHECK(ex[i] >= -1e-12);
    }
  }
}

TEST_CASE("constant factors give gamma one") {
  auto d = sample_distribution(8, 4, 2);
  std::mt19937_64 rng(2);
  auto h = random_scalar(rng, 4);
  auto rep = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d, hset::Complete{},
                                 TransformSpec::linear(), factor::One{}, factor::One{}, ToolMode::Concave,
                                 GammaForm::Sup);
  CHECK(rep.gamma_h == doctest::Approx(1.0));
  CHECK(rep.applicable);
  CHECK(rep.rhs == doctest::Approx(expected_regret(loss::Margin{PhiSpec::hinge()}, h, d, hset::Complete{})));
}

TEST_CASE("point mass with an equality hypothesis is tight") {
  for (double eta : {0.6, 0.75, 0.99}) {
    auto d = point({eta, 1 - eta});
    auto h = Hypothesis::tabular_scalar({-1.0});
    auto rep = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::rho_margin(1.0)}, h, d,
                                   hset::Complete{}, TransformSpec::linear(), factor::One{}, factor::One{},
                                   ToolMode::Concave, GammaForm::Sup);
    CHECK(rep.applicable);
    CHECK(std::fabs(rep.slack) <= 1e-9);
    CHECK(rep.lhs == doctest::Approx(2 * eta - 1));
  }
}

TEST_CASE("fkg gamma never exceeds the sup gamma") {
  std::mt19937_64 rng(99);
  int compared = 0;
  for (int k = 0; k < 1000; ++k) {
    auto d = sample_distribution(rng(), 3, 2);
    auto h = random_scalar(rng, 3);
    for (auto beta : {FactorSpec{factor::DisagreementPlusEps{}}, FactorSpec{factor::UMax{}}}) {
      auto sup = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d, hset::Complete{},
                                     TransformSpec::linear(), factor::One{}, beta, ToolMode::Concave, GammaForm::Sup);
      try {
        auto fkg = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d,
                                       hset::Complete{}, TransformSpec::linear(), factor::One{}, beta,
                                       ToolMode::Concave, GammaForm::Fkg);
        CHECK(fkg.gamma_h <= sup.gamma_h + 1e-12);
        ++compared;
      } catch (const PreconditionError&) {
      }
    }
  }
  CHECK(compared > 50);
}

TEST_CASE("power bound") {
  std::mt19937_64 rng(5);
  SUBCASE("s = 1 reduces to the linear concave bound") {
    auto d = sample_distribution(3, 4, 2);
    auto h = random_scalar(rng, 4);
    auto p = evaluate_power_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d, hset::Complete{},
                                  1.0, factor::One{}, factor::One{});
    auto c = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::hinge()}, h, d, hset::Complete{},
                                 TransformSpec::linear(), factor::One{}, factor::One{}, ToolMode::Concave,
                                 GammaForm::Sup);
    CHECK(p.rhs == doctest::Approx(c.rhs).epsilon(1e-14));
    CHECK(p.lhs == doctest::Approx(c.lhs).epsilon(1e-14));
  }
  SUBCASE("massart instances") {
    SampleConstraints sc;
    sc.massart_floor = 0.3;
    for (int k = 0; k < 100; ++k) {
      auto d = sample_distribution(rng(), 4, 2, sc);
      auto h = random_scalar(rng, 4);
      auto rep = evaluate_power_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::logistic()}, h, d,
                                      hset::Complete{}, 2.0, factor::ExpectationPower{2.0, 1e-6},
                                      factor::DisagreementPlusEps{1e-6}, std::sqrt(2.0));
      if (rep.applicable) CHECK(rep.slack >= -1e-9);
      CHECK(rep.gamma_limit.has_value());
    }
  }
  SUBCASE("failing hypothesis is inapplicable, never violated") {
    auto d = point({0.9, 0.1});
    auto h = Hypothesis::tabular_scalar({-0.2});
    auto rep = evaluate_power_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::exp()}, h, d, hset::Complete{},
                                    2.0, factor::One{}, factor::One{}, 0.01);
    CHECK_FALSE(rep.applicable);
    CHECK_FALSE(rep.violated);
  }
}

TEST_CASE("lambda of a hypothesis") {
  DiscreteDistribution d({{0, {}}, {1, {}}}, {0.5, 0.5}, {{0.5, 0.5}, {0.2, 0.8}});
  CHECK(lambda_of(Hypothesis::tabular({{0.5, -0.5}, {1.2, -1.2}}, true), d) == doctest::Approx(0.5));
  CHECK(lambda_of(Hypothesis::tabular({{0.0, 0.0}, {0.0, 0.0}}, true), d) == 0.0);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    auto e = sample_distribution(rng(), 3, 4);
    CHECK(lambda_of(random_sum_zero(rng, 3, 4), e) >= 0.0);
  }
}

TEST_CASE("constrained enhanced bound") {
  SUBCASE("zero hypothesis matches the baseline") {
    auto d = sample_distribution(2, 3, 3);
    auto h = Hypothesis::tabular(std::vector<std::vector<double>>(3, std::vector<double>(3, 0.0)), true);
    for (auto phi : {PhiSpec::exp(), PhiSpec::hinge(), PhiSpec::sq_hinge()}) {
      auto r = constrained_enhanced_bound(phi, h, d);
      CHECK(r.lambda == 0.0);
      CHECK(r.enhanced.rhs == r.baseline.rhs);
    }
  }
  SUBCASE("hinge with lambda one halves the rhs") {
    DiscreteDistribution d({{0, {}}, {1, {}}}, {0.5, 0.5}, {{0.2, 0.5, 0.3}, {0.6, 0.3, 0.1}});
    auto h = Hypothesis::tabular({{1.0, 0.5, -1.5}, {-1.5, 1.5, 0.0}}, true);
    auto r = constrained_enhanced_bound(PhiSpec::hinge(), h, d);
    CHECK(r.lambda == doctest::Approx(1.0));
    CHECK(r.enhanced.rhs == doctest::Approx(0.5 * r.baseline.rhs));
  }
  SUBCASE("random sum-zero hypotheses over three labels") {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 500; ++k) {
      auto d = sample_distribution(rng(), 3, 3);
      auto h = random_sum_zero(rng, 3, 3);
      for (auto phi : {PhiSpec::exp(), PhiSpec::hinge(), PhiSpec::sq_hinge()}) {
        auto r = constrained_enhanced_bound(phi, h, d);
        CHECK(r.enhanced.slack >= -1e-9);
        CHECK(r.enhanced.rhs <= r.baseline.rhs + 1e-15);
        auto c = constrained_enhanced_bound(phi, h, d, GammaConstants::Corrected);
        CHECK(c.enhanced.slack >= -1e-9);
      }
    }
  }
  SUBCASE("point mass separating the published exp constant") {
    DiscreteDistribution d({{0, {}}}, {1.0}, {{0.036, 0.612, 0.352}});
    auto h = Hypothesis::tabular({{0.053, 0.035, -0.088}}, true);
    auto pub = constrained_enhanced_bound(PhiSpec::exp(), h, d, GammaConstants::Published);
    auto cor = constrained_enhanced_bound(PhiSpec::exp(), h, d, GammaConstants::Corrected);
    CHECK(pub.enhanced.violated);
    CHECK(cor.enhanced.slack >= 0.0);
  }
  SUBCASE("non sum-zero hypothesis is rejected") {
    auto d = sample_distribution(1, 2, 3);
    CHECK_THROWS_AS(constrained_enhanced_bound(PhiSpec::exp(), Hypothesis::tabular({{1, 0, 0}, {0, 1, 0}}), d),
                    ContractError);
  }
}

TEST_CASE("partial regret closed forms against a brute-force line search") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (auto fam : {PhiFamily::Exp, PhiFamily::Hinge, PhiFamily::SqHinge}) {
    LossSpec L = loss::Constrained{PhiSpec{fam, 1.0}};
    for (int k = 0; k < 30; ++k) {
      auto d = sample_distribution(rng(), 1, 3);
      auto p = d.conditional(0);
      std::vector<double> s{u(rng), u(rng), 0.0};
      s[2] = -s[0] - s[1];
      std::size_t ym = argmax_highest(p), yh = argmax_highest(s);
      double closed = constrained_partial_regret(fam, p, s);
      if (ym == yh) {
        CHECK(closed == 0.0);
        continue;
      }
      auto along = [&](double mu) {
        auto t = s;
        t[yh] = s[ym] + mu;
        t[ym] = s[yh] - mu;
        return conditional_error_scores(L, t, p);
      };
      // Grid over the exchange then repeated zoom around the best cell.
      double lo = -20, hi = 20, best = along(0.0), arg = 0.0;
      for (int round = 0; round < 5; ++round) {
        double h = (hi - lo) / 8000;
        for (int j = 0; j <= 8000; ++j) {
          double v = along(lo + j * h);
          if (v < best) best = v, arg = lo + j * h;
        }
        lo = arg - 2 * h;
        hi = arg + 2 * h;
      }
      CHECK(closed == doctest::Approx(conditional_error_scores(L, s, p) - best).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("tsybakov exponent") {
  CHECK(tsybakov_exponent(2.0, 0.0) == 0.5);
  CHECK(tsybakov_exponent(2.0, 1.0) == 1.0);
  CHECK(tsybakov_exponent(2.0, 0.5) == doctest::Approx(1.0 / 1.5));
}

TEST_CASE("tsybakov bound on massart instances") {
  std::mt19937_64 rng(12);
  SampleConstraints sc;
  sc.massart_floor = 0.3;
  int applicable = 0;
  for (int k = 0; k < 200; ++k) {
    auto d = sample_distribution(rng(), 4, 2, sc);
    auto noise = fit_tsybakov_envelope(d, 0.5);
    auto h = random_scalar(rng, 4);
    auto tr = table_transform(loss::Margin{PhiSpec::logistic()}, 2);
    auto rep = tsybakov_bound(NoiseSetting::Binary, loss::Margin{PhiSpec::logistic()}, h, d, hset::Complete{}, tr.s,
                              tr.scale, noise);
    if (rep.applicable) {
      ++applicable;
      CHECK(rep.slack >= -1e-9);
    }
  }
  CHECK(applicable > 150);
}

TEST_CASE("tsybakov lemma chain") {
  SUBCASE("bayes classifier") {
    DiscreteDistribution d({{0, {}}, {1, {}}}, {0.4, 0.6}, {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}});
    auto h = Hypothesis::tabular({{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}});
    auto r = tsybakov_lemma_check(d, 0.5, h);
    CHECK(r.disagreement == 0.0);
    CHECK(r.margin_mass == 0.0);
    CHECK(r.excess == doctest::Approx(0.0).scale(1.0));
    CHECK(r.c == doctest::Approx(std::pow(r.B, 0.5) / std::pow(0.5, 0.5)));
  }
  SUBCASE("random hypotheses") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
      SampleConstraints sc;
      sc.massart_floor = 0.1;
      auto d = sample_distribution(rng(), 4, 3, sc);
      std::vector<std::vector<double>> t(4, std::vector<double>(3));
      for (auto& row : t)
        for (auto& v : row) v = n(rng);
      auto r = tsybakov_lemma_check(d, 0.4, Hypothesis::tabular(t));
      CHECK(r.first >= -1e-9);
      CHECK(r.second >= -1e-9);
    }
  }
}

TEST_CASE("factor values must be positive") {
  auto d = point({0.5, 0.5});
  auto h = Hypothesis::tabular_scalar({0.0});
  CHECK_THROWS_AS(factor_values(factor::Const{0.0}, h, d), ContractError);
  CHECK(factor_values(factor::UMax{}, h, d)[0] == doctest::Approx(0.5));
}
