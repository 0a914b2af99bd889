#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hcb/dist.hpp"

using namespace hcb;

namespace {

DiscreteDistribution binary(std::vector<double> etas, std::vector<double> marginal) {
  std::vector<SupportPoint> pts;
  std::vector<std::vector<double>> cond;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    pts.push_back({static_cast<int>(i), {static_cast<double>(i)}});
    cond.push_back({etas[i], 1.0 - etas[i]});
  }
  return DiscreteDistribution(pts, marginal, cond);
}

void check_invariants(const DiscreteDistribution& d) {
  double total = std::accumulate(d.marginals().begin(), d.marginals().end(), 0.0);
  CHECK(std::fabs(total - 1.0) <= 1e-12);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.marginal(i) >= 0.0);
    double s = 0.0;
    for (double p : d.conditional(i)) {
      CHECK(p >= 0.0);
      s += p;
    }
    CHECK(std::fabs(s - 1.0) <= 1e-12);
    CHECK(d.point(i).features.size() == d.feature_dim());
  }
}

}  // namespace

TEST_CASE("distribution constructor validates its invariants") {
  CHECK_THROWS_AS(binary({0.5, 0.5}, {0.6, 0.6}), InputError);
  CHECK_THROWS_AS(binary({1.2}, {1.0}), InputError);
  CHECK_THROWS_AS(DiscreteDistribution({{0, {}}, {0, {}}}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}),
                  InputError);
  CHECK_THROWS_AS(DiscreteDistribution({{0, {1.0}}, {1, {1.0, 2.0}}}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}),
                  InputError);
  CHECK_NOTHROW(binary({0.3, 0.9}, {0.25, 0.75}));
}

TEST_CASE("json round trip keeps the distribution") {
  auto d = sample_distribution(3, 4, 3);
  auto e = DiscreteDistribution::from_json(d.to_json());
  REQUIRE(e.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(e.marginal(i) == d.marginal(i));
    CHECK(e.conditional(i) == d.conditional(i));
    CHECK(e.id(i) == d.id(i));
  }
}

TEST_CASE("argmax ties go to the highest index") {
  CHECK(argmax_highest({0.2, 0.4, 0.4}) == 2);
  CHECK(argmax_highest({1.0, 1.0}) == 1);
  CHECK(argmax_highest({3.0, 1.0, 2.0}) == 0);
  CHECK(bayes_label({0.5, 0.5}) == 0);
  CHECK(bayes_label({0.3, 0.35, 0.35}) == 2);
}

TEST_CASE("sign rule predicts +1 at zero score") {
  auto d = binary({0.2}, {1.0});
  CHECK(predict(Hypothesis::tabular_scalar({0.0}), d, 0) == 0);
  CHECK(predict(Hypothesis::tabular_scalar({-1e-12}), d, 0) == 1);
}

TEST_CASE("sum-zero hypotheses enforce their constraint") {
  CHECK_THROWS_AS(Hypothesis::tabular({{1.0, 0.0}}, true), ContractError);
  auto h = Hypothesis::tabular({{1.0, -0.25, -0.75}}, true);
  auto d = sample_distribution(1, 1, 3);
  auto s = h.scores(d, 0);
  CHECK(std::fabs(s[0] + s[1] + s[2]) <= 1e-10);
}

TEST_CASE("margin gamma") {
  DiscreteDistribution d({{0, {}}, {1, {}}}, {0.5, 0.5}, {{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}});
  CHECK(margin_gamma(d, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(margin_gamma(d, 1) == doctest::Approx(0.2).epsilon(1e-15));
  auto e = binary({1.0, 0.5}, {0.5, 0.5});
  CHECK(margin_gamma(e, 0) == 1.0);
  CHECK(margin_gamma(e, 1) == 0.0);
  CHECK_THROWS_AS(margin_gamma(e, 7), InputError);
}

TEST_CASE("tsybakov envelope") {
  SUBCASE("two point step function") {
    auto d = binary({0.7, 0.9}, {0.5, 0.5});
    auto np = fit_tsybakov_envelope(d, 0.5);
    CHECK(np.B == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(np.c == doctest::Approx(std::sqrt(1.25) / std::sqrt(0.5)).epsilon(1e-12));
  }
  SUBCASE("massart floor is recorded") {
    auto d = binary({0.65, 0.9, 0.1}, {0.2, 0.3, 0.5});
    auto np = fit_tsybakov_envelope(d, 0.999);
    REQUIRE(np.gamma_floor);
    CHECK(*np.gamma_floor == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("mass at zero margin") {
    CHECK_THROWS_AS(fit_tsybakov_envelope(binary({0.5}, {1.0}), 0.5), EnvelopeError);
  }
  SUBCASE("alpha range") {
    CHECK_THROWS_AS(fit_tsybakov_envelope(binary({0.9}, {1.0}), 1.0), InputError);
  }
}

TEST_CASE("envelope holds at every attained margin") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto d = sample_distribution(seed, 6, 3);
    NoiseProfile np;
    try {
      np = fit_tsybakov_envelope(d, 0.4);
    } catch (const EnvelopeError&) {
      continue;
    }
    double a = 0.4 / 0.6;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double t = margin_at(d, i), mass = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j)
        if (margin_at(d, j) <= t) mass += d.marginal(j);
      CHECK(mass <= np.B * std::pow(t, a) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("sample_distribution contracts") {
  SUBCASE("unconstrained") {
    auto d = sample_distribution(1, 5, 3);
    CHECK(d.size() == 5);
    CHECK(d.label_count() == 3);
    check_invariants(d);
  }
  SUBCASE("same seed, same distribution") {
    auto a = sample_distribution(9, 4, 2), b = sample_distribution(9, 4, 2);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.conditional(i) == b.conditional(i));
  }
  SUBCASE("massart floor") {
    SampleConstraints c;
    c.massart_floor = 0.4;
    for (std::uint64_t s = 0; s < 20; ++s) {
      auto d = sample_distribution(s, 6, 4, c);
      check_invariants(d);
      for (std::size_t i = 0; i < d.size(); ++i) CHECK(margin_at(d, i) >= 0.4 - 1e-12);
    }
  }
  SUBCASE("deterministic") {
    SampleConstraints c;
    c.deterministic = true;
    auto d = sample_distribution(2, 7, 3, c);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto p = d.conditional(i);
      CHECK(*std::max_element(p.begin(), p.end()) == 1.0);
    }
  }
  SUBCASE("tsybakov constraint") {
    SampleConstraints c;
    c.tsybakov = std::pair{0.5, 2.0};
    auto d = sample_distribution(4, 6, 2, c);
    CHECK(fit_tsybakov_envelope(d, 0.5).B <= 2.0 + 1e-12);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(sample_distribution(0, 0, 2), InputError);
    SampleConstraints c;
    c.massart_floor = 1.5;
    CHECK_THROWS_AS(sample_distribution(0, 3, 2, c), GenerationError);
  }
}

TEST_CASE("empirical distribution of a sample") {
  auto d = sample_distribution(5, 4, 2);
  auto sample = draw_sample(d, 500, 11);
  auto e = empirical_distribution(d, sample);
  check_invariants(e);
  CHECK(e.size() <= d.size());
  CHECK(draw_sample(d, 50, 3) == draw_sample(d, 50, 3));
}
