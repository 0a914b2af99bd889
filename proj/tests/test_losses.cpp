#include "doctest.h"

#include <cmath>
#include <random>

#include "hcb/losses.hpp"

using namespace hcb;

namespace {

DiscreteDistribution one_point(int labels) {
  std::vector<double> p(labels, 1.0 / labels);
  return DiscreteDistribution({{0, {}}}, {1.0}, {p});
}

}  // namespace

TEST_CASE("phi values") {
  CHECK(phi_eval(PhiSpec::hinge(), 1.0) == 0.0);
  CHECK(phi_eval(PhiSpec::hinge(), -1.0) == 2.0);
  CHECK(phi_eval(PhiSpec::exp(), 0.0) == 1.0);
  CHECK(phi_eval(PhiSpec::logistic(), 0.0) == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(phi_eval(PhiSpec::sq_hinge(), -1.0) == 4.0);
  CHECK(phi_eval(PhiSpec::sq_hinge(), 2.0) == 0.0);
  CHECK(phi_eval(PhiSpec::rho_margin(2.0), 1.0) == doctest::Approx(0.5));
  CHECK(phi_eval(PhiSpec::rho_margin(2.0), -1.0) == 1.0);
  CHECK(phi_eval(PhiSpec::rho_margin(2.0), 3.0) == 0.0);
}

TEST_CASE("logistic phi matches its series for small arguments") {
  // log(1 + e^-u) = log 2 - u/2 + u^2/8 - u^4/192 + O(u^6)
  for (double u : {-0.01, 0.0, 0.003, 0.02}) {
    double series = std::log(2.0) - u / 2 + u * u / 8 - std::pow(u, 4) / 192;
    CHECK(phi_eval(PhiSpec::logistic(), u) == doctest::Approx(series).epsilon(1e-12));
  }
}

TEST_CASE("logistic phi is stable for large arguments") {
  CHECK(std::isfinite(phi_eval(PhiSpec::logistic(), -800.0)));
  CHECK(phi_eval(PhiSpec::logistic(), -800.0) == doctest::Approx(800.0));
  CHECK(phi_eval(PhiSpec::logistic(), 800.0) >= 0.0);
}

TEST_CASE("phi derivative agrees with central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (auto phi : {PhiSpec::exp(), PhiSpec::logistic(), PhiSpec::sq_hinge(), PhiSpec::sigmoid()}) {
    for (int k = 0; k < 20; ++k) {
      double x = u(rng);
      if (phi.family == PhiFamily::SqHinge && std::fabs(x - 1.0) < 1e-3) continue;
      double h = 1e-6;
      double fd = (phi_eval(phi, x + h) - phi_eval(phi, x - h)) / (2 * h);
      CHECK(phi_derivative(phi, x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("loss_eval examples") {
  SUBCASE("zero-one at a zero score predicts +1") {
    auto d = DiscreteDistribution({{0, {}}}, {1.0}, {{0.5, 0.5}});
    auto h = Hypothesis::tabular_scalar({0.0});
    CHECK(loss_eval(loss::ZeroOneBinary{}, h, d, 0, 0) == 0.0);
    CHECK(loss_eval(loss::ZeroOneBinary{}, h, d, 0, 1) == 1.0);
  }
  SUBCASE("constrained exp at zero scores") {
    auto d = one_point(3);
    auto h = Hypothesis::tabular({{0.0, 0.0, 0.0}}, true);
    for (std::size_t y = 0; y < 3; ++y)
      CHECK(loss_eval(loss::Constrained{PhiSpec::exp()}, h, d, 0, y) == doctest::Approx(2.0));
  }
  SUBCASE("mae at uniform scores") {
    auto d = one_point(4);
    auto h = Hypothesis::tabular({{0.3, 0.3, 0.3, 0.3}});
    for (std::size_t y = 0; y < 4; ++y)
      CHECK(loss_eval(loss::CompSum{CompSumFamily::MAE}, h, d, 0, y) == doctest::Approx(0.75));
  }
  SUBCASE("margin loss uses y h") {
    auto d = DiscreteDistribution({{0, {}}}, {1.0}, {{0.5, 0.5}});
    auto h = Hypothesis::tabular_scalar({0.5});
    CHECK(loss_eval(loss::Margin{PhiSpec::hinge()}, h, d, 0, 0) == doctest::Approx(0.5));
    CHECK(loss_eval(loss::Margin{PhiSpec::hinge()}, h, d, 0, 1) == doctest::Approx(1.5));
  }
}

TEST_CASE("comp-sum losses on fixed scores") {
  std::vector<double> s{1.0, 0.0, -1.0};
  auto q = softmax(s);
  CHECK(q[0] + q[1] + q[2] == doctest::Approx(1.0));
  CHECK(loss_on_scores(loss::CompSum{CompSumFamily::MultinomialLogistic}, s, 1) ==
        doctest::Approx(-std::log(q[1])));
  CHECK(loss_on_scores(loss::CompSum{CompSumFamily::SumExp}, s, 0) ==
        doctest::Approx(std::exp(-1.0) + std::exp(-2.0)));
  CHECK(loss_on_scores(loss::CompSum{CompSumFamily::GCE, 0.5}, s, 2) ==
        doctest::Approx((1.0 - std::sqrt(q[2])) / 0.5));
  // softmax survives large scores
  auto big = softmax({1000.0, 0.0});
  CHECK(big[0] == doctest::Approx(1.0));
}

TEST_CASE("pair losses") {
  LossSpec z = loss::RankingZeroOne{};
  CHECK(pair_loss_on_scores(z, 0.3, 0.3, 1, -1) == 0.5);
  CHECK(pair_loss_on_scores(z, 0.4, 0.3, 1, -1) == 0.0);
  CHECK(pair_loss_on_scores(z, 0.2, 0.3, 1, -1) == 1.0);
  CHECK(pair_loss_on_scores(loss::RankingPair{PhiSpec::exp()}, 0.7, 0.7, 1, -1) == 1.0);
  CHECK(pair_loss_on_scores(loss::RankingPair{PhiSpec::exp()}, 0.7, 0.2, -1, 1) ==
        doctest::Approx(std::exp(0.5)));
  for (auto L : {LossSpec{loss::RankingZeroOne{}}, LossSpec{loss::RankingPair{PhiSpec::logistic()}}})
    for (int y : {1, -1}) CHECK(pair_loss_on_scores(L, 0.1, -0.4, y, y) == 0.0);
}

TEST_CASE("loss json round trip") {
  std::vector<LossSpec> all = {loss::ZeroOneBinary{},
                               loss::ZeroOneMulti{},
                               loss::Margin{PhiSpec::rho_margin(0.5)},
                               loss::Constrained{PhiSpec::sq_hinge()},
                               loss::CompSum{CompSumFamily::GCE, 0.3},
                               loss::RankingPair{PhiSpec::exp()},
                               loss::RankingZeroOne{}};
  for (const auto& L : all) CHECK(loss_name(loss_from_json(loss_to_json(L))) == loss_name(L));
  CHECK_THROWS_AS(loss_from_json(json{{"kind", "nope"}}), InputError);
  CHECK_THROWS_AS(loss_from_json(json{{"kind", "comp_sum"}, {"family", "gce"}, {"a", 1.5}}), InputError);
}

TEST_CASE("loss classification helpers") {
  CHECK(is_pair_loss(loss::RankingZeroOne{}));
  CHECK_FALSE(is_pair_loss(loss::ZeroOneMulti{}));
  CHECK(is_zero_one(loss::ZeroOneBinary{}));
  CHECK(is_convex_loss(loss::Margin{PhiSpec::exp()}));
  CHECK_FALSE(is_convex_loss(loss::Margin{PhiSpec::sigmoid()}));
  CHECK(phi_convex(PhiSpec::hinge()));
  CHECK_FALSE(phi_convex(PhiSpec::rho_margin()));
}
