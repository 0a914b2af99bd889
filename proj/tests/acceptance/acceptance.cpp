// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hcb/bounds.hpp"
#include "hcb/experiments.hpp"
#include "hcb/oracle.hpp"
#include "hcb/ranking.hpp"

using namespace hcb;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] " << what << "; ";
    }
  }
  void note(const std::string& what) { detail << what << "; "; }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

unsigned workers() { return default_workers(); }

DiscreteDistribution random_binary(std::mt19937_64& rng, std::size_t k) {
  return sample_distribution(rng(), k, 2);
}

Hypothesis random_scalar(std::mt19937_64& rng, std::size_t k) {
  std::normal_distribution<double> n(0.0, std::uniform_real_distribution<double>(0.1, 2.0)(rng));
  std::vector<double> s(k);
  for (auto& v : s) v = n(rng);
  return Hypothesis::tabular_scalar(s);
}

// 1. Every closed form against its grid oracle over 1000 draws.
void criterion_oracle(Outcome& o) {
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_id;
  for (const auto& id : oracle::closed_form_ids()) {
    auto r = oracle::closed_form_equivalence(id, 1000, 1, workers());
    if (r.max_discrepancy > worst) worst = r.max_discrepancy, worst_id = id;
    o.require(r.max_discrepancy <= 1e-6, id + " discrepancy " + fmt(r.max_discrepancy));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  o.note(std::to_string(oracle::closed_form_ids().size()) + " closed forms, worst " + fmt(worst) + " (" +
         worst_id + ")");
}

// 2. Tool bounds, tightness and FKG <= Sup.
void criterion_tools(Outcome& o) {
  oracle::AuditConfig c;
  c.trials = 1000;
  c.workers = workers();
  int ids = 0;
  double worst = INFINITY;
  for (const auto& id : oracle::registered_bounds()) {
    if (id.rfind("tool-", 0) != 0) continue;
    ++ids;
    auto r = oracle::audit_bound(c, id);
    o.require(r.violations == 0, id + " violations " + std::to_string(r.violations));
    worst = std::min(worst, r.worst_slack);
    if (id == "tool-tightness") {
      o.require(r.applicable == r.trials, "tightness probe not applicable everywhere");
      o.require(std::fabs(r.worst_slack) <= 1e-9, "tightness slack " + fmt(r.worst_slack));
    }
  }
  // FKG versus Sup on one-dimensional binary instances.
  std::mt19937_64 rng(2);
  const std::vector<FactorSpec> factors = {factor::One{}, factor::Const{1.5}, factor::DisagreementPlusEps{},
                                           factor::ConditionalErrorOf{loss::Margin{PhiSpec::exp()}},
                                           factor::UMax{}};
  int fkg = 0;
  for (int t = 0; t < 1000; ++t) {
    std::size_t k = 1 + rng() % 5;
    auto d = random_binary(rng, k);
    auto h = random_scalar(rng, k);
    const auto& a = factors[rng() % factors.size()];
    const auto& b = factors[rng() % factors.size()];
    LossSpec sur = loss::Margin{PhiSpec::hinge()};
    try {
      auto sup = evaluate_tool_bound(loss::ZeroOneBinary{}, sur, h, d, hset::Complete{}, TransformSpec::linear(),
                                     a, b, ToolMode::Concave, GammaForm::Sup);
      auto f = evaluate_tool_bound(loss::ZeroOneBinary{}, sur, h, d, hset::Complete{}, TransformSpec::linear(),
                                   a, b, ToolMode::Concave, GammaForm::Fkg);
      if (!f.applicable) continue;
      ++fkg;
      o.require(f.gamma_h <= sup.gamma_h * (1 + 1e-12), "FKG gamma above Sup gamma at trial " + std::to_string(t));
      o.require(!f.violated, "FKG form violated at trial " + std::to_string(t));
    } catch (const PreconditionError&) {
    } catch (const ContractError&) {
    }
  }
  o.require(fkg > 0, "no FKG-applicable instance");
  o.note(std::to_string(ids) + " tool ids, worst slack " + fmt(worst) + ", " + std::to_string(fkg) +
         " FKG instances");
}

// 3. Constrained enhanced bounds with published constants.
void criterion_constrained(Outcome& o) {
  std::mt19937_64 rng(3);
  int violations = 0, above = 0, eq_mismatch = 0, lambda_zero = 0, cases = 0;
  for (int t = 0; t < 500; ++t) {
    std::size_t k = 1 + rng() % 5;
    int n = 2 + static_cast<int>(rng() % 4);
    auto d = sample_distribution(rng(), k, n);
    std::normal_distribution<double> nd(0.0, std::uniform_real_distribution<double>(0.1, 2.0)(rng));
    std::vector<std::vector<double>> tab(k, std::vector<double>(n));
    for (auto& row : tab) {
      double mean = 0.0;
      for (auto& v : row) mean += (v = nd(rng));
      for (auto& v : row) v -= mean / n;
    }
    // every fifth hypothesis has a zero row, giving Lambda = 0
    if (t % 5 == 0) {
      auto& row = tab[rng() % k];
      std::fill(row.begin(), row.end(), 0.0);
    }
    auto h = Hypothesis::tabular(tab, true);
    for (auto phi : {PhiSpec::exp(), PhiSpec::hinge(), PhiSpec::sq_hinge()}) {
      ++cases;
      auto r = constrained_enhanced_bound(phi, h, d);
      if (r.enhanced.violated) ++violations;
      if (r.enhanced.rhs > r.baseline.rhs * (1 + 1e-12)) ++above;
      bool zero = r.lambda == 0.0;
      if (zero) ++lambda_zero;
      bool equal = r.enhanced.rhs == r.baseline.rhs;
      if (r.baseline.rhs > 0.0 && equal != zero) ++eq_mismatch;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " violations with published constants");
  o.require(above == 0, std::to_string(above) + " enhanced rhs above baseline");
  o.require(eq_mismatch == 0, std::to_string(eq_mismatch) + " equality/Lambda mismatches");
  o.note(std::to_string(cases) + " cases, " + std::to_string(lambda_zero) + " with Lambda = 0");
}

// 4. Noise-adaptive bounds and the lemma chain.
void criterion_tsybakov(Outcome& o) {
  oracle::AuditConfig c;
  c.trials = 200;
  c.seed = 4;
  c.workers = workers();
  int settings = 0;
  for (const auto& id : oracle::registered_bounds()) {
    if (id.rfind("tsybakov-", 0) != 0 || id == "tsybakov-lemma") continue;
    ++settings;
    auto r = oracle::audit_bound(c, id);
    o.require(r.violations == 0, id + " violations " + std::to_string(r.violations));
    o.require(r.applicable > 0, id + " never applicable");
  }
  c.trials = 500;
  auto lemma = oracle::audit_bound(c, "tsybakov-lemma");
  o.require(lemma.violations == 0 && lemma.worst_slack >= -1e-9, "lemma worst residual " + fmt(lemma.worst_slack));
  o.note(std::to_string(settings) + " settings, lemma worst residual " + fmt(lemma.worst_slack));
}

// 5. Ranking pair inequalities, trajectories and calibration.
void criterion_ranking(Outcome& o) {
  std::mt19937_64 rng(5);
  int exp_bad = 0, log_bad = 0, pairs = 0;
  double log_worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    std::size_t k = 1 + rng() % 5;
    auto d = random_binary(rng, k);
    auto h = random_scalar(rng, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        ++pairs;
        if (exp_pair_inequality(h, d, i, j).residual < -1e-9) ++exp_bad;
        double r = log_pair_inequality(h, d, i, j).residual;
        if (r < -1e-9) ++log_bad;
        log_worst = std::min(log_worst, r);
      }
  }
  o.require(exp_bad == 0, "exp pair inequality fails at " + std::to_string(exp_bad) + " pairs");
  o.require(log_bad == 0, "log pair inequality fails at " + std::to_string(log_bad) + "/" + std::to_string(pairs) +
                              " pairs, worst residual " + fmt(log_worst));
  double worst_traj = INFINITY;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto d = sample_distribution(seed, 20, 2);
    auto b = audit_trajectory(train_boosting(d, make_stump_pool(d, true), 50, seed), d, TrajectoryBound::ExpBound);
    auto l = audit_trajectory(train_logistic(d, 50), d, TrajectoryBound::LogBound);
    for (const auto& rows : {b, l})
      for (const auto& r : rows) worst_traj = std::min(worst_traj, r.slack);
  }
  o.require(worst_traj >= -1e-9, "trajectory slack " + fmt(worst_traj));
  auto ce = calibration_family_check(PhiSpec::exp());
  auto cl = calibration_family_check(PhiSpec::logistic());
  auto ch = calibration_family_check(PhiSpec::hinge());
  o.require(ce.calibrated && std::fabs(*ce.nu - 2.0) <= 1e-5, "exp calibration");
  o.require(cl.calibrated && std::fabs(*cl.nu - 1.0) <= 1e-5, "log calibration");
  o.require(!ch.calibrated, "hinge not rejected");
  o.note(std::to_string(pairs) + " pairs, trajectory worst slack " + fmt(worst_traj));
}

// 6. Hinge construction.
void criterion_hinge(Outcome& o) {
  int tested = 0;
  for (double e0 : {0.6, 0.75, 0.9, 0.99, 1.0})
    for (double e1 : {0.501, 0.55, 0.59}) {
      if (!(e0 > e1)) continue;
      ++tested;
      auto c = hinge_counterexample(e0, e1);
      o.require(std::fabs(c.point_regret_x0) <= 1e-12 && std::fabs(c.point_regret_x0p) <= 1e-12,
                "non-zero point regret at (" + fmt(e0) + ", " + fmt(e1) + ")");
      o.require(std::fabs(c.pair_regret - (e0 - e1)) <= 1e-12, "pair regret at (" + fmt(e0) + ", " + fmt(e1) + ")");
    }
  // (1 - 10^-k, 1/2 + 10^-k) walks through (0.999, 0.501) towards the corner.
  std::vector<std::pair<double, double>> queries;
  for (int k = 1; k <= 5; ++k) queries.push_back({1.0 - std::pow(10.0, -k), 0.5 + std::pow(10.0, -k)});
  double floor = hinge_implied_floor(queries);
  o.require(std::fabs(floor - 0.5) <= 1e-3, "floor " + fmt(floor));
  o.note(std::to_string(tested) + " parameter pairs, floor " + fmt(floor));
}

// 7. Halved conclusion Gamma must be caught for every registered bound.
void criterion_negative(Outcome& o) {
  oracle::AuditConfig c;
  c.trials = 1000;
  c.conclusion_scale = 0.5;
  c.workers = workers();
  int caught = 0, total = 0;
  std::string missed;
  for (const auto& id : oracle::registered_bounds()) {
    ++total;
    auto r = oracle::audit_bound(c, id);
    if (r.violations > 0) ++caught;
    else missed += (missed.empty() ? "" : ", ") + id;
  }
  o.require(missed.empty(), "no violation for " + missed);
  o.note(std::to_string(caught) + "/" + std::to_string(total) + " bounds caught");
}

// 8. Generalization assembly and Rademacher audits.
void criterion_generalization(Outcome& o) {
  for (auto s : {GenSetting::RankExp, GenSetting::RankLog, GenSetting::TsybakovBinary}) {
    GeneralizationAuditConfig c;
    c.setting = s;
    c.seeds = 100;
    c.delta = 0.05;
    c.workers = workers();
    auto r = generalization_audit(c);
    o.require(r.fraction <= 0.07, gen_setting_name(s) + " violation fraction " + fmt(r.fraction));
    o.note(gen_setting_name(s) + " fraction " + fmt(r.fraction) + " (" + std::to_string(r.inapplicable) +
           " inapplicable)");
  }
  auto d = sample_distribution(8, 10, 2);
  auto sample = draw_sample(d, 200, 1);
  RademacherOptions ro;
  ro.trials = 10000;
  ro.workers = workers();
  auto single = estimate_rademacher(PhiSpec::logistic(), rclass::Singleton{Hypothesis::tabular_scalar(
                                                             std::vector<double>(10, 0.3))},
                                    d, sample, ro);
  o.require(std::fabs(single.value) <= 3 * single.std_error, "singleton estimate " + fmt(single.value));
  ro.trials = 300;
  auto pool = make_stump_pool(d);
  double prev = 0.0;
  for (double A : {0.5, 1.0, 2.0}) {
    auto e = estimate_rademacher(PhiSpec::exp(), rclass::StumpSpan{pool, A}, d, sample, ro);
    o.require(e.min_trial >= 0.0, "negative complexity trial");
    o.require(e.value >= prev, "complexity not nested in A");
    prev = e.value;
  }
  prev = 0.0;
  for (double W : {0.5, 1.0, 2.0}) {
    auto e = estimate_rademacher(PhiSpec::logistic(), rclass::Linear{W, true}, d, sample, ro);
    o.require(e.min_trial >= 0.0, "negative linear complexity trial");
    o.require(e.value >= prev, "complexity not nested in W");
    prev = e.value;
  }
}

// 9. Gradients and optimizer tolerances.
void criterion_hygiene(Outcome& o) {
  auto d = sample_distribution(9, 20, 2);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> w(d.feature_dim() + 1);
    for (auto& v : w) v = n(rng);
    auto g = logistic_gradient(d, w);
    for (std::size_t j = 0; j < w.size(); ++j) {
      double h = 1e-6 * std::max(1.0, std::fabs(w[j]));
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      double fd = (logistic_objective(d, wp) - logistic_objective(d, wm)) / (2 * h);
      worst = std::max(worst, std::fabs(g[j] - fd) / std::max(1.0, std::fabs(fd)));
    }
  }
  o.require(worst <= 1e-6, "gradient relative error " + fmt(worst));

  auto traj = train_logistic(d, 50000, {}, 1e-9);
  double gn = 0.0;
  for (double v : logistic_gradient(d, traj.back().weights().at(0))) gn += v * v;
  gn = std::sqrt(gn);
  bool stopped_early = traj.size() < 50001;
  o.require(!stopped_early || gn <= 1e-9, "logistic descent stopped above its tolerance");

  auto fit = minimize_linear_risk(PhiSpec::logistic(), d, hset::LinearClass{1, 2.0, true});
  o.require(fit.gradient_norm <= 1e-9, "linear risk gradient norm " + fmt(fit.gradient_norm));

  auto span = fit_stump_span(PhiSpec::exp(), d, make_stump_pool(d), 2.0);
  o.require(span.converged, "stump span fit reported no convergence");
  auto rank = ranking_best_in_class_error(PhiSpec::exp(), sample_distribution(10, 6, 2));
  o.require(rank.converged, "ranking optimum reported no convergence");
  try {
    oracle::grid_infimum([](double t) { return t > 0 ? NAN : t * t; });
    o.require(false, "non-finite objective not reported");
  } catch (const ContractError&) {
  }
  o.note("gradient worst " + fmt(worst) + ", logistic final gradient " + fmt(gn));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", criterion_oracle},
      {2, "fundamental tools", criterion_tools},
      {3, "constrained enhanced bounds", criterion_constrained},
      {4, "noise-adaptive bounds", criterion_tsybakov},
      {5, "ranking", criterion_ranking},
      {6, "hinge negative result", criterion_hinge},
      {7, "negative controls", criterion_negative},
      {8, "generalization bounds", criterion_generalization},
      {9, "numerical hygiene", criterion_hygiene},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
