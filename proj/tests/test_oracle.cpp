#include "doctest.h"

#include <cmath>
#include <limits>

#include "hcb/oracle.hpp"

using namespace hcb;

TEST_CASE("one-dimensional grid infimum") {
  double v = oracle::grid_infimum([](double t) { return 0.36 * std::exp(-t) + 0.06 * std::exp(t); });
  CHECK(v == doctest::Approx(2 * std::sqrt(0.36 * 0.06)).epsilon(1e-10));
  // the minimiser sits at log(6) / 2; the grid must find the value there
  double at = 0.36 * std::exp(-0.5 * std::log(6.0)) + 0.06 * std::exp(0.5 * std::log(6.0));
  CHECK(v == doctest::Approx(at).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.293939).epsilon(1e-6));
  double h = oracle::grid_infimum(
      [](double t) { return 0.5 * std::max(0.0, 1 - t) + 0.5 * std::max(0.0, 1 + t); });
  CHECK(h == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::grid_infimum([](double) { return 0.25; }) == 0.25);
  oracle::Domain1D box{2.0, 3.0};
  CHECK(oracle::grid_infimum([](double t) { return t * t; }, box) == doctest::Approx(4.0));
  CHECK_THROWS_AS(oracle::grid_infimum([](double t) { return t > 1 ? NAN : t; }), ContractError);
}

TEST_CASE("multi-dimensional grid infimum") {
  oracle::DomainND dom;
  dom.lo = {-5, -5};
  dom.hi = {5, 5};
  auto f = [](const std::vector<double>& x) {
    return (x[0] - 1) * (x[0] - 1) + 2 * (x[1] + 0.5) * (x[1] + 0.5) + 0.5 * x[0] * x[1] + 3;
  };
  // stationary point of the quadratic
  double x0 = (4 * 2 - 0.5 * (-2)) / (2 * 4 - 0.25), x1 = (-2 - 0.5 * x0) / 4;
  CHECK(oracle::grid_infimum(f, dom) == doctest::Approx(f({x0, x1})).epsilon(1e-10));
  dom.directions = {{1, 1}, {1, -1}};
  CHECK(oracle::grid_infimum(f, dom) == doctest::Approx(f({x0, x1})).epsilon(1e-10));
}

TEST_CASE("every closed form agrees with its oracle") {
  auto ids = oracle::closed_form_ids();
  CHECK(ids.size() >= 20);
  for (const auto& id : ids) {
    CAPTURE(id);
    auto r = oracle::closed_form_equivalence(id, 40, 11);
    CHECK(r.draws == 40);
    CHECK(r.max_discrepancy <= 1e-8);
  }
  CHECK_THROWS_AS(oracle::closed_form_equivalence("nope", 1, 0), InputError);
}

TEST_CASE("closed form equivalence is reproducible") {
  auto a = oracle::closed_form_equivalence("pair-logistic", 20, 3);
  auto b = oracle::closed_form_equivalence("pair-logistic", 20, 3, 2);
  CHECK(a.max_discrepancy == b.max_discrepancy);
}

TEST_CASE("constrained exp audit and its negative control") {
  oracle::AuditConfig c;
  c.trials = 1000;
  auto r = oracle::audit_bound(c, "constrained-exp");
  CHECK(r.trials == 1000);
  CHECK(r.violations == 0);
  c.conclusion_scale = 0.5;
  auto neg = oracle::audit_bound(c, "constrained-exp");
  CHECK(neg.violations > 0);
}

TEST_CASE("tightness instance meets the bound with equality") {
  oracle::AuditConfig c;
  c.trials = 200;
  auto r = oracle::audit_bound(c, "tool-tightness");
  CHECK(r.applicable == 200);
  CHECK(r.violations == 0);
  CHECK(std::fabs(r.worst_slack) <= 1e-9);
}

TEST_CASE("audit bookkeeping") {
  oracle::AuditConfig c;
  c.trials = 30;
  c.seed = 4;
  auto a = oracle::audit_bound(c, "tsybakov-lemma");
  auto b = oracle::audit_bound(c, "tsybakov-lemma");
  CHECK(a.csv() == b.csv());
  CHECK(a.csv().rfind("trial,seed,applicable,violated,lhs,rhs,slack,note\n", 0) == 0);
  CHECK(a.applicable + a.inapplicable == a.trials);
  CHECK(static_cast<int>(a.records.size()) == a.trials);
  auto j = a.to_json();
  CHECK(j.at("bound_id") == "tsybakov-lemma");
  for (const auto& id : oracle::registered_bounds()) CHECK(oracle::is_registered(id));
  CHECK_FALSE(oracle::is_registered("nope"));
  CHECK_THROWS_AS(oracle::audit_bound(c, "nope"), InputError);
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
  oracle::AuditResult empty;
  empty.worst_slack = std::numeric_limits<double>::infinity();
  CHECK(empty.to_json().at("worst_slack").is_null());
}

TEST_CASE("every registered bound holds at full scale") {
  oracle::AuditConfig c;
  c.trials = 100;
  for (const auto& id : oracle::registered_bounds()) {
    CAPTURE(id);
    auto r = oracle::audit_bound(c, id);
    CHECK(r.violations == 0);
  }
}
