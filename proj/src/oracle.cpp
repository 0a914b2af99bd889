#include "hcb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "hcb/bounds.hpp"
#include "hcb/ranking.hpp"
#include "hcb/regret.hpp"

namespace hcb::oracle {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;

double finite(double v) {
  if (!std::isfinite(v)) throw ContractError("oracle objective returned a non-finite value");
  return v;
}

// Golden section on [a, b]; returns the best evaluated point.
std::pair<double, double> golden(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = finite(f(c)), fd = finite(f(d));
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = finite(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = finite(f(d));
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Grid plus golden refinement; returns (argmin, min).
std::pair<double, double> line_min(const std::function<double(double)>& f, double lo, double hi,
                                   int grid, double tol) {
  if (hi <= lo) return {lo, finite(f(lo))};
  int n = std::max(grid, 3);
  double h = (hi - lo) / (n - 1);
  int best = 0;
  double bv = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double v = finite(f(lo + i * h));
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  double a = lo + std::max(best - 1, 0) * h, b = lo + std::min(best + 1, n - 1) * h;
  auto g = golden(f, a, b, tol);
  if (g.second < bv) return g;
  return {lo + best * h, bv};
}

}  // namespace

double grid_infimum(const std::function<double(double)>& f, const Domain1D& dom) {
  if (!(dom.hi >= dom.lo)) throw InputError("grid_infimum: empty interval");
  return line_min(f, dom.lo, dom.hi, dom.grid, dom.tol).second;
}

double grid_infimum(const std::function<double(const std::vector<double>&)>& f,
                    const DomainND& dom) {
  const std::size_t n = dom.lo.size();
  if (dom.hi.size() != n || n == 0) throw InputError("grid_infimum: box dimensions disagree");
  for (std::size_t k = 0; k < n; ++k)
    if (!(dom.hi[k] >= dom.lo[k])) throw InputError("grid_infimum: empty box");
  auto dirs = dom.directions;
  if (dirs.empty())
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> e(n, 0.0);
      e[k] = 1.0;
      dirs.push_back(e);
    }
  std::vector<double> x = dom.start.empty() ? std::vector<double>(n, 0.0) : dom.start;
  for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(x[k], dom.lo[k], dom.hi[k]);
  double fx = finite(f(x));
  double radius = std::numeric_limits<double>::infinity();
  std::vector<double> y(n);
  for (int sweep = 0; sweep < dom.max_sweeps; ++sweep) {
    double before = fx, largest = 0.0;
    for (const auto& dir : dirs) {
      // Feasible step interval along dir.
      double tlo = -std::numeric_limits<double>::infinity(), thi = -tlo;
      for (std::size_t k = 0; k < n; ++k) {
        if (dir[k] == 0.0) continue;
        double a = (dom.lo[k] - x[k]) / dir[k], b = (dom.hi[k] - x[k]) / dir[k];
        tlo = std::max(tlo, std::min(a, b));
        thi = std::min(thi, std::max(a, b));
      }
      tlo = std::max(tlo, -radius);
      thi = std::min(thi, radius);
      auto along = [&](double t) {
        for (std::size_t k = 0; k < n; ++k) y[k] = std::clamp(x[k] + t * dir[k], dom.lo[k], dom.hi[k]);
        return f(y);
      };
      auto [t, v] = line_min(along, tlo, thi, sweep == 0 ? dom.first_grid : dom.local_grid, dom.tol);
      if (v < fx) {
        for (std::size_t k = 0; k < n; ++k) x[k] = std::clamp(x[k] + t * dir[k], dom.lo[k], dom.hi[k]);
        fx = v;
        largest = std::max(largest, std::fabs(t));
      }
    }
    if (before - fx <= 1e-15 * std::max(1.0, std::fabs(fx)) && largest <= 1e-9) break;
    radius = std::max(4.0 * largest, 1e-7);
  }
  return fx;
}

json EquivalenceResult::to_json() const {
  return {{"id", id}, {"draws", draws}, {"max_discrepancy", max_discrepancy}};
}

namespace {

std::vector<double> dirichlet(std::mt19937_64& rng, int n) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += (v = g(rng));
  for (auto& v : p) v /= s;
  return p;
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

ClosedFormCase scalar_case(const LossSpec& L, double eta) {
  std::vector<double> p{eta, 1.0 - eta};
  double closed = best_in_class_conditional(L, p, hset::Complete{}).value;
  double orc = grid_infimum([&](double s) { return conditional_error_scores(L, {s}, p); });
  return {closed, orc};
}

// Sum-zero parameterisation: free coordinates 0..n-2, the last score is minus
// their sum. Directions cover single coordinates and pairwise exchanges.
ClosedFormCase constrained_case(const LossSpec& L, const std::vector<double>& p) {
  const std::size_t n = p.size();
  const std::size_t m = n - 1;
  double closed = best_in_class_conditional(L, p, hset::SumZeroComplete{}).value;
  DomainND dom;
  dom.lo.assign(m, -25.0);
  dom.hi.assign(m, 25.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> e(m, 0.0);
    e[i] = 1.0;
    dom.directions.push_back(e);
    for (std::size_t j = i + 1; j < m; ++j) {
      std::vector<double> d(m, 0.0);
      d[i] = 1.0;
      d[j] = -1.0;
      dom.directions.push_back(d);
    }
  }
  auto f = [&](const std::vector<double>& z) {
    std::vector<double> s(z);
    double sum = 0.0;
    for (double v : z) sum += v;
    s.push_back(-sum);
    return conditional_error_scores(L, s, p);
  };
  return {closed, grid_infimum(f, dom)};
}

// The most likely label is pinned at 0 so every optimal score difference is
// non-positive; the box reaches far enough down for steep GCE exponents.
ClosedFormCase comp_sum_case(const LossSpec& L, const std::vector<double>& p) {
  const std::size_t n = p.size();
  const std::size_t top = argmax_highest(p);
  double closed = best_in_class_conditional(L, p, hset::Complete{}).value;
  DomainND dom;
  dom.lo.assign(n - 1, -150.0);
  dom.hi.assign(n - 1, 5.0);
  auto f = [&](const std::vector<double>& z) {
    std::vector<double> s(z);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(top), 0.0);
    return conditional_error_scores(L, s, p);
  };
  // Non-convex families have plateaus, so also start with the pinned label on top.
  double best = grid_infimum(f, dom);
  dom.start.assign(n - 1, -40.0);
  best = std::min(best, grid_infimum(f, dom));
  return {closed, best};
}

ClosedFormCase pair_case(const LossSpec& L, std::mt19937_64& rng) {
  double e1 = uniform(rng, 0.0, 1.0), e2 = uniform(rng, 0.0, 1.0);
  double a = e1 * (1.0 - e2), b = e2 * (1.0 - e1);
  double closed = pair_best_in_class(L, a, b).value;
  double orc = grid_infimum([&](double d) { return pair_conditional_error_ab(L, d, a, b); });
  return {closed, orc};
}

ClosedFormCase partial_case(PhiFamily fam, std::mt19937_64& rng) {
  int n = std::uniform_int_distribution<int>(2, 5)(rng);
  auto p = dirichlet(rng, n);
  std::normal_distribution<double> normal(0.0, uniform(rng, 0.1, 2.0));
  std::vector<double> s(n);
  double mean = 0.0;
  for (auto& v : s) mean += (v = normal(rng));
  mean /= n;
  for (auto& v : s) v -= mean;
  std::size_t ym = argmax_highest(p), yh = argmax_highest(s);
  if (ym == yh) {
    // Force a disagreement by swapping scores.
    std::size_t other = ym == 0 ? 1 : 0;
    s[other] = *std::max_element(s.begin(), s.end()) + 0.5;
    mean = 0.0;
    for (double v : s) mean += v;
    mean /= n;
    for (auto& v : s) v -= mean;
    yh = argmax_highest(s);
  }
  double closed = constrained_partial_regret(fam, p, s);
  LossSpec L = loss::Constrained{PhiSpec{fam, 1.0}};
  double c0 = conditional_error_scores(L, s, p);
  double orc_inf = grid_infimum([&](double mu) {
    std::vector<double> t(s);
    t[yh] = s[ym] + mu;
    t[ym] = s[yh] - mu;
    return conditional_error_scores(L, t, p);
  });
  return {closed, c0 - orc_inf};
}

using CaseFn = std::function<ClosedFormCase(std::mt19937_64&)>;

const std::map<std::string, CaseFn>& case_table() {
  static const std::map<std::string, CaseFn> table = [] {
    std::map<std::string, CaseFn> t;
    t["zero-one-binary"] = [](std::mt19937_64& r) {
      return scalar_case(loss::ZeroOneBinary{}, uniform(r, 0.0, 1.0));
    };
    t["zero-one-multi"] = [](std::mt19937_64& r) {
      int n = std::uniform_int_distribution<int>(2, 5)(r);
      auto p = dirichlet(r, n);
      LossSpec L = loss::ZeroOneMulti{};
      double closed = best_in_class_conditional(L, p, hset::Complete{}).value;
      DomainND dom;
      dom.lo.assign(n, -50.0);
      dom.hi.assign(n, 50.0);
      double orc = grid_infimum([&](const std::vector<double>& s) { return conditional_error_scores(L, s, p); }, dom);
      return ClosedFormCase{closed, orc};
    };
    for (auto fam : {PhiFamily::Exp, PhiFamily::Logistic, PhiFamily::Hinge, PhiFamily::SqHinge})
      t["margin-" + phi_name(PhiSpec{fam, 1.0})] = [fam](std::mt19937_64& r) {
        return scalar_case(loss::Margin{PhiSpec{fam, 1.0}}, uniform(r, 0.0, 1.0));
      };
    for (auto fam : {PhiFamily::Exp, PhiFamily::Hinge, PhiFamily::SqHinge, PhiFamily::RhoMargin})
      t["constrained-" + phi_name(PhiSpec{fam, 1.0})] = [fam](std::mt19937_64& r) {
        int n = std::uniform_int_distribution<int>(2, 4)(r);
        return constrained_case(loss::Constrained{PhiSpec{fam, 1.0}}, dirichlet(r, n));
      };
    t["comp-sum-logistic"] = [](std::mt19937_64& r) {
      int n = std::uniform_int_distribution<int>(2, 4)(r);
      return comp_sum_case(loss::CompSum{CompSumFamily::MultinomialLogistic, 0.5}, dirichlet(r, n));
    };
    t["comp-sum-sum_exp"] = [](std::mt19937_64& r) {
      int n = std::uniform_int_distribution<int>(2, 4)(r);
      return comp_sum_case(loss::CompSum{CompSumFamily::SumExp, 0.5}, dirichlet(r, n));
    };
    t["comp-sum-mae"] = [](std::mt19937_64& r) {
      int n = std::uniform_int_distribution<int>(2, 4)(r);
      return comp_sum_case(loss::CompSum{CompSumFamily::MAE, 0.5}, dirichlet(r, n));
    };
    t["comp-sum-gce"] = [](std::mt19937_64& r) {
      int n = std::uniform_int_distribution<int>(2, 4)(r);
      double a = uniform(r, 0.1, 0.9);
      return comp_sum_case(loss::CompSum{CompSumFamily::GCE, a}, dirichlet(r, n));
    };
    for (auto fam : {PhiFamily::Exp, PhiFamily::Hinge, PhiFamily::Logistic, PhiFamily::SqHinge})
      t["pair-" + phi_name(PhiSpec{fam, 1.0})] = [fam](std::mt19937_64& r) {
        return pair_case(loss::RankingPair{PhiSpec{fam, 1.0}}, r);
      };
    t["pair-zero_one"] = [](std::mt19937_64& r) { return pair_case(loss::RankingZeroOne{}, r); };
    for (auto fam : {PhiFamily::Exp, PhiFamily::Hinge, PhiFamily::SqHinge})
      t["partial-" + phi_name(PhiSpec{fam, 1.0})] = [fam](std::mt19937_64& r) { return partial_case(fam, r); };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> closed_form_ids() {
  std::vector<std::string> ids;
  for (const auto& [k, _] : case_table()) ids.push_back(k);
  return ids;
}

EquivalenceResult closed_form_equivalence(const std::string& id, int draws, std::uint64_t seed,
                                          unsigned workers) {
  auto it = case_table().find(id);
  if (it == case_table().end()) throw InputError("unknown closed form: " + id);
  if (draws < 1) throw InputError("draws must be positive");
  std::vector<double> disc(draws, 0.0);
  parallel_for(static_cast<std::size_t>(draws), std::max(1u, workers), [&](std::size_t k) {
    std::mt19937_64 rng(mix_seed(seed, k));
    auto c = it->second(rng);
    disc[k] = std::fabs(c.closed - c.oracle);
  });
  EquivalenceResult r;
  r.id = id;
  r.draws = draws;
  r.max_discrepancy = *std::max_element(disc.begin(), disc.end());
  return r;
}

void AuditConfig::validate() const {
  if (trials < 1) throw InputError("trials must be >= 1");
  if (!(tolerance > 0.0)) throw InputError("tolerance must be > 0");
  if (support_min < 1 || support_max < support_min) throw InputError("bad support size range");
  if (labels_min < 2 || labels_max < labels_min) throw InputError("bad label count range");
  if (!(conclusion_scale > 0.0)) throw InputError("conclusion_scale must be > 0");
}

json AuditResult::to_json() const {
  json j = {{"bound_id", bound_id},     {"trials", trials},         {"applicable", applicable},
            {"inapplicable", inapplicable}, {"violations", violations}};
  j["worst_slack"] = std::isfinite(worst_slack) ? json(worst_slack) : json(nullptr);
  return j;
}

std::string AuditResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "trial,seed,applicable,violated,lhs,rhs,slack,note\n";
  for (const auto& r : records)
    os << r.trial << ',' << r.seed << ',' << r.applicable << ',' << r.violated << ',' << r.lhs << ','
       << r.rhs << ',' << r.slack << ",\"" << r.note << "\"\n";
  return os.str();
}

namespace {

struct Instance {
  std::mt19937_64 rng;
  const AuditConfig& cfg;

  std::size_t support() {
    return std::uniform_int_distribution<std::size_t>(cfg.support_min, cfg.support_max)(rng);
  }
  int labels() { return std::uniform_int_distribution<int>(cfg.labels_min, cfg.labels_max)(rng); }
  double sigma() { return uniform(rng, 0.1, 2.0); }

  DiscreteDistribution dist(std::size_t k, int n, const SampleConstraints& c = {}) {
    return sample_distribution(rng(), k, n, c);
  }
  Hypothesis scalar(std::size_t k) {
    std::normal_distribution<double> normal(0.0, sigma());
    std::vector<double> s(k);
    for (auto& v : s) v = normal(rng);
    return Hypothesis::tabular_scalar(s);
  }
  Hypothesis vector(std::size_t k, int n, bool sum_zero) {
    std::normal_distribution<double> normal(0.0, sigma());
    std::vector<std::vector<double>> t(k, std::vector<double>(n));
    for (auto& row : t) {
      double mean = 0.0;
      for (auto& v : row) mean += (v = normal(rng));
      mean /= n;
      if (sum_zero)
        for (auto& v : row) v -= mean;
    }
    return Hypothesis::tabular(t, sum_zero);
  }
  // Scores kappa * log p plus small noise: regrets near zero, where the
  // transforms are tightest.
  Hypothesis near_bayes(const DiscreteDistribution& d, bool scalar, bool sum_zero) {
    double kappa = uniform(rng, 0.2, 1.5);
    std::normal_distribution<double> noise(0.0, uniform(rng, 0.01, 0.5));
    std::vector<std::vector<double>> t;
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> row;
      for (double p : d.conditional(i)) row.push_back(kappa * std::log(std::max(p, 1e-9)) + noise(rng));
      if (scalar) {
        t.push_back({0.5 * (row[0] - row[1])});
        continue;
      }
      if (sum_zero) {
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= row.size();
        for (auto& v : row) v -= mean;
      }
      t.push_back(row);
    }
    if (scalar) {
      std::vector<double> col;
      for (auto& r : t) col.push_back(r[0]);
      return Hypothesis::tabular_scalar(col);
    }
    return Hypothesis::tabular(t, sum_zero);
  }
};

using TrialFn = std::function<BoundReport(Instance&, const BoundOptions&)>;

FactorSpec factor_by_name(const std::string& n) {
  if (n == "one") return factor::One{};
  if (n == "const") return factor::Const{1.5};
  if (n == "dis") return factor::DisagreementPlusEps{};
  if (n == "cerr") return factor::ConditionalErrorOf{loss::Margin{PhiSpec::exp()}};
  return factor::UMax{};
}

const std::vector<std::string> kFactors = {"one", "const", "dis", "cerr", "umax"};

const std::map<std::string, TrialFn>& trial_table() {
  static const std::map<std::string, TrialFn> table = [] {
    std::map<std::string, TrialFn> t;
    // Fundamental tools over binary instances: linear Gamma with the hinge
    // surrogate, square-root Gamma with the exponential surrogate.
    for (const std::string kind : {"concave-linear", "concave-sqrt", "convex-sqrt"})
      for (const auto& a : kFactors)
        for (const auto& b : kFactors) {
          std::string id = "tool-" + kind + "-" + a + "-" + b;
          t[id] = [kind, a, b, id](Instance& in, const BoundOptions& o) {
            std::size_t k = in.support();
            auto d = in.dist(k, 2);
            auto h = in.scalar(k);
            bool lin = kind == "concave-linear";
            LossSpec sur = lin ? LossSpec{loss::Margin{PhiSpec::hinge()}} : LossSpec{loss::Margin{PhiSpec::exp()}};
            TransformSpec tr = lin ? TransformSpec::linear() : TransformSpec::root(2.0, std::sqrt(2.0));
            ToolMode mode = kind == "convex-sqrt" ? ToolMode::Convex : ToolMode::Concave;
            auto rep = evaluate_tool_bound(loss::ZeroOneBinary{}, sur, h, d, hset::Complete{}, tr,
                                           factor_by_name(a), factor_by_name(b), mode, GammaForm::Sup, o);
            rep.bound_id = id;
            return rep;
          };
        }
    // Point mass where the rho-margin hypothesis is an equality.
    t["tool-tightness"] = [](Instance& in, const BoundOptions& o) {
      double eta = uniform(in.rng, 0.55, 1.0);
      DiscreteDistribution d({{0, {0.0}}}, {1.0}, {{eta, 1.0 - eta}});
      auto h = Hypothesis::tabular_scalar({-1.0});
      auto rep = evaluate_tool_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::rho_margin(1.0)}, h, d,
                                     hset::Complete{}, TransformSpec::linear(), factor::One{}, factor::One{},
                                     ToolMode::Concave, GammaForm::Sup, o);
      rep.bound_id = "tool-tightness";
      return rep;
    };
    t["tool-power-massart"] = [](Instance& in, const BoundOptions& o) {
      std::size_t k = in.support();
      SampleConstraints c;
      c.massart_floor = 0.3;
      auto d = in.dist(k, 2, c);
      auto h = in.scalar(k);
      auto rep = evaluate_power_bound(loss::ZeroOneBinary{}, loss::Margin{PhiSpec::logistic()}, h, d,
                                      hset::Complete{}, 2.0, factor::ExpectationPower{2.0, 1e-6},
                                      factor::DisagreementPlusEps{1e-6}, std::sqrt(2.0), o);
      rep.bound_id = "tool-power-massart";
      return rep;
    };
    for (auto fam : {PhiFamily::Exp, PhiFamily::Hinge, PhiFamily::SqHinge})
      for (auto consts : {GammaConstants::Published, GammaConstants::Corrected}) {
        if (fam == PhiFamily::Hinge && consts == GammaConstants::Corrected) continue;
        std::string id = "constrained-" + phi_name(PhiSpec{fam, 1.0}) +
                         (consts == GammaConstants::Corrected ? "-corrected" : "");
        t[id] = [fam, consts, id](Instance& in, const BoundOptions& o) {
          std::size_t k = in.support();
          int n = in.labels();
          auto d = in.dist(k, n);
          auto h = in.vector(k, n, true);
          auto rep = constrained_enhanced_bound(PhiSpec{fam, 1.0}, h, d, consts, o).enhanced;
          rep.bound_id = id;
          return rep;
        };
      }
    for (auto fam : {PhiFamily::Logistic, PhiFamily::Exp, PhiFamily::SqHinge})
      for (bool binary : {true, false}) {
        std::string id = std::string("tsybakov-") + (binary ? "binary-" : "multi-") + phi_name(PhiSpec{fam, 1.0});
        t[id] = [fam, binary, id](Instance& in, const BoundOptions& o) {
          std::size_t k = in.support();
          int n = binary ? 2 : std::max(3, in.labels());
          SampleConstraints c;
          c.massart_floor = 0.3;
          auto d = in.dist(k, n, c);
          auto noise = fit_tsybakov_envelope(d, 0.5);
          LossSpec sur;
          HypothesisSet H = hset::Complete{};
          bool sz = !binary && fam == PhiFamily::SqHinge;
          Hypothesis h = std::bernoulli_distribution(0.5)(in.rng) ? in.near_bayes(d, binary, sz)
                         : binary                                 ? in.scalar(k)
                                                                  : in.vector(k, n, sz);
          if (binary) {
            sur = loss::Margin{PhiSpec{fam, 1.0}};
          } else if (fam == PhiFamily::Logistic) {
            sur = loss::CompSum{CompSumFamily::MultinomialLogistic, 0.5};
          } else if (fam == PhiFamily::Exp) {
            sur = loss::CompSum{CompSumFamily::SumExp, 0.5};
          } else {
            sur = loss::Constrained{PhiSpec::sq_hinge()};
            H = hset::SumZeroComplete{};
          }
          auto tr = table_transform(sur, n);
          auto rep = tsybakov_bound(binary ? NoiseSetting::Binary : NoiseSetting::Multiclass, sur, h, d, H,
                                    tr.s, tr.scale, noise, o);
          rep.bound_id = id;
          return rep;
        };
      }
    t["tsybakov-lemma"] = [](Instance& in, const BoundOptions& o) {
      std::size_t k = in.support();
      int n = std::max(3, in.labels());
      SampleConstraints c;
      c.massart_floor = uniform(in.rng, 0.05, 0.5);
      auto d = in.dist(k, n, c);
      double alpha = uniform(in.rng, 0.1, 0.9);
      auto h = in.vector(k, n, false);
      auto r = tsybakov_lemma_check(d, alpha, h, o.conclusion_scale);
      BoundReport rep;
      rep.bound_id = "tsybakov-lemma";
      rep.lhs = r.disagreement;
      rep.rhs = r.disagreement + std::min(r.first, r.second);
      rep.gamma_h = r.c;
      rep.finalize(o.tol);
      return rep;
    };
    auto rank_instance = [](Instance& in) {
      std::size_t k = std::max<std::size_t>(2, in.support());
      auto d = in.dist(k, 2);
      auto h = in.scalar(k);
      return std::pair{d, h};
    };
    t["rank-exp"] = [rank_instance](Instance& in, const BoundOptions& o) {
      auto [d, h] = rank_instance(in);
      return exp_ranking_bound(h, d, o);
    };
    t["rank-log"] = [rank_instance](Instance& in, const BoundOptions& o) {
      auto [d, h] = rank_instance(in);
      return log_ranking_bound(h, d, o);
    };
    for (bool is_exp : {true, false}) {
      std::string id = is_exp ? "rank-exp-pair" : "rank-log-pair";
      t[id] = [rank_instance, is_exp, id](Instance& in, const BoundOptions& o) {
        auto [d, h] = rank_instance(in);
        BoundReport rep;
        rep.bound_id = id;
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.size(); ++i)
          for (std::size_t j = 0; j < d.size(); ++j) {
            auto r = is_exp ? exp_pair_inequality(h, d, i, j) : log_pair_inequality(h, d, i, j);
            double res = o.conclusion_scale * r.rhs - r.lhs;
            if (res < worst) {
              worst = res;
              rep.lhs = r.lhs;
              rep.rhs = o.conclusion_scale * r.rhs;
              rep.worst_point = d.id(i);
            }
          }
        rep.finalize(o.tol);
        return rep;
      };
    }
    t["rank-tool-exp"] = [rank_instance](Instance& in, const BoundOptions& o) {
      auto [d, h] = rank_instance(in);
      FactorSpec a = factor::ConditionalErrorOf{loss::Margin{PhiSpec::exp()}};
      auto rep = ranking_tool_bound(TransformSpec::linear(), TransformSpec::linear(), a, a,
                                    loss::RankingPair{PhiSpec::exp()}, loss::Margin{PhiSpec::exp()}, h, d, o);
      rep.bound_id = "rank-tool-exp";
      return rep;
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> registered_bounds() {
  std::vector<std::string> ids;
  for (const auto& [k, _] : trial_table()) ids.push_back(k);
  return ids;
}

bool is_registered(const std::string& id) { return trial_table().count(id) > 0; }

AuditResult audit_bound(const AuditConfig& config, const std::string& bound_id) {
  config.validate();
  auto it = trial_table().find(bound_id);
  if (it == trial_table().end()) throw InputError("unknown bound id: " + bound_id);
  BoundOptions opts;
  opts.conclusion_scale = config.conclusion_scale;
  opts.tol = config.tolerance;
  AuditResult res;
  res.bound_id = bound_id;
  res.records.resize(config.trials);
  parallel_for(static_cast<std::size_t>(config.trials), std::max(1u, config.workers), [&](std::size_t k) {
    std::uint64_t seed = mix_seed(config.seed, k);
    Instance in{std::mt19937_64(seed), config};
    TrialRecord rec;
    rec.trial = static_cast<int>(k);
    rec.seed = seed;
    try {
      auto rep = it->second(in, opts);
      rec.applicable = rep.applicable;
      rec.violated = rep.applicable && rep.violated;
      rec.lhs = rep.lhs;
      rec.rhs = rep.rhs;
      rec.slack = rep.slack;
      rec.note = rep.note;
    } catch (const PreconditionError& e) {
      rec.applicable = false;
      rec.note = e.what();
    } catch (const EnvelopeError& e) {
      rec.applicable = false;
      rec.note = e.what();
    }
    res.records[k] = rec;
  });
  res.trials = config.trials;
  res.worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : res.records) {
    if (!r.applicable) {
      ++res.inapplicable;
      continue;
    }
    ++res.applicable;
    if (r.violated) ++res.violations;
    res.worst_slack = std::min(res.worst_slack, r.slack);
  }
  return res;
}

}  // namespace hcb::oracle
