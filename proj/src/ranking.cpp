#include "hcb/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "hcb/common.hpp"
#include "hcb/optimize.hpp"

namespace hcb {

namespace {

const PhiSpec* pair_phi(const LossSpec& L) {
  if (auto* r = std::get_if<loss::RankingPair>(&L)) return &r->phi;
  return nullptr;
}

void require_pair_loss(const LossSpec& L) {
  if (!is_pair_loss(L)) throw ContractError(loss_name(L) + " is not a pair loss");
}

void require_binary(const DiscreteDistribution& d) {
  if (!d.is_binary()) throw ContractError("ranking needs a binary distribution");
}

}  // namespace

PairWeights pair_weights(const DiscreteDistribution& d, std::size_t i, std::size_t j) {
  require_binary(d);
  return {d.eta(i) * (1.0 - d.eta(j)), d.eta(j) * (1.0 - d.eta(i))};
}

double pair_conditional_error_ab(const LossSpec& L, double delta, double a, double b) {
  require_pair_loss(L);
  double c = 0.0;
  if (a > 0.0) c += a * pair_loss_on_scores(L, delta, 0.0, 1, -1);
  if (b > 0.0) c += b * pair_loss_on_scores(L, delta, 0.0, -1, 1);
  return c;
}

double pair_conditional_error(const LossSpec& L, const Hypothesis& h,
                              const DiscreteDistribution& d, std::size_t i, std::size_t j) {
  auto w = pair_weights(d, i, j);
  return pair_conditional_error_ab(L, h.score(d, i) - h.score(d, j), w.a, w.b);
}

BestInClass pair_best_in_class_numeric(const LossSpec& L, double a, double b) {
  require_pair_loss(L);
  auto f = [&](double delta) { return pair_conditional_error_ab(L, delta, a, b); };
  auto r = opt::grid_golden(f, -kScoreBracket, kScoreBracket);
  return {r.value, Method::GridRefined, r.at_boundary};
}

BestInClass pair_best_in_class(const LossSpec& L, double a, double b) {
  require_pair_loss(L);
  if (std::holds_alternative<loss::RankingZeroOne>(L))
    return {std::min(a, b), Method::ClosedForm, false};
  const PhiSpec* phi = pair_phi(L);
  if (phi->family == PhiFamily::Exp) return {2.0 * std::sqrt(a * b), Method::ClosedForm, false};
  if (phi->family == PhiFamily::Hinge) return {2.0 * std::min(a, b), Method::ClosedForm, false};
  if (phi->family == PhiFamily::Logistic) {
    // Minimiser delta = log(a / b).
    double v = 0.0;
    if (a > 0.0 && b > 0.0) v = a * std::log1p(b / a) + b * std::log1p(a / b);
    return {v, Method::ClosedForm, false};
  }
  if (phi->family == PhiFamily::SqHinge) {
    double v = a + b > 0.0 ? 4.0 * a * b / (a + b) : 0.0;
    return {v, Method::ClosedForm, false};
  }
  return pair_best_in_class_numeric(L, a, b);
}

BestInClass pair_best_in_class(const LossSpec& L, const DiscreteDistribution& d, std::size_t i,
                               std::size_t j, const HypothesisSet& H) {
  if (!std::holds_alternative<hset::Complete>(H))
    throw UnsupportedError("pair best-in-class is defined for the complete set only");
  auto w = pair_weights(d, i, j);
  return pair_best_in_class(L, w.a, w.b);
}

PairRegretRecord pair_regret(const LossSpec& L, const Hypothesis& h,
                             const DiscreteDistribution& d, std::size_t i, std::size_t j) {
  PairRegretRecord r;
  r.x = d.id(i);
  r.x_prime = d.id(j);
  r.cond_error = pair_conditional_error(L, h, d, i, j);
  r.best_in_class = pair_best_in_class(L, d, i, j, hset::Complete{}).value;
  r.regret = r.cond_error - r.best_in_class;
  return r;
}

double ranking_generalization_error(const LossSpec& L, const Hypothesis& h,
                                    const DiscreteDistribution& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      double w = d.marginal(i) * d.marginal(j);
      if (w > 0.0) e += w * pair_conditional_error(L, h, d, i, j);
    }
  return e;
}

double ranking_expected_regret(const LossSpec& L, const Hypothesis& h,
                               const DiscreteDistribution& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      double w = d.marginal(i) * d.marginal(j);
      if (w > 0.0) e += w * pair_regret(L, h, d, i, j).regret;
    }
  return e;
}

std::vector<double> default_calibration_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 50; ++k) g.push_back(0.1 * k);
  return g;
}

CalibrationResult calibration_family_check(const PhiSpec& phi, const std::vector<double>& grid,
                                           double tol) {
  constexpr double h = 1e-6;
  auto dphi = [&](double t) { return (phi_eval(phi, t + h) - phi_eval(phi, t - h)) / (2.0 * h); };
  CalibrationResult res;
  std::vector<double> nus;
  for (double t : grid) {
    if (t <= 0.0) throw InputError("calibration grid needs positive points");
    double up = dphi(t), down = dphi(-t);
    if (up >= 0.0 || down >= 0.0) {
      std::ostringstream os;
      os << "derivative is not negative at t = " << (up >= 0.0 ? t : -t);
      res.reason = os.str();
      return res;
    }
    nus.push_back(-std::log(up / down) / t);
  }
  auto [lo, hi] = std::minmax_element(nus.begin(), nus.end());
  res.spread = *hi - *lo;
  double mean = 0.0;
  for (double v : nus) mean += v;
  mean /= static_cast<double>(nus.size());
  if (res.spread > tol) {
    res.reason = "derivative ratio is not exponential in t";
    return res;
  }
  if (!(mean > tol)) {
    res.reason = "fitted exponent is not positive";
    return res;
  }
  res.calibrated = true;
  res.nu = mean;
  return res;
}

namespace {

PairResidual pair_inequality(PhiFamily family, const Hypothesis& h, const DiscreteDistribution& d,
                             std::size_t i, std::size_t j) {
  PhiSpec phi{family, 1.0};
  LossSpec pair = loss::RankingPair{phi};
  LossSpec point = loss::Margin{phi};
  HypothesisSet H = hset::Complete{};
  PairResidual r;
  r.lhs = pair_regret(pair, h, d, i, j).regret;
  double ri = conditional_regret(point, h, d, i, H).regret;
  double rj = conditional_regret(point, h, d, j, H).regret;
  double ai, aj;
  if (family == PhiFamily::Exp) {
    ai = conditional_error(point, h, d, i);
    aj = conditional_error(point, h, d, j);
  } else {
    ai = std::max(d.eta(i), 1.0 - d.eta(i));
    aj = std::max(d.eta(j), 1.0 - d.eta(j));
  }
  r.rhs = aj * ri + ai * rj;
  r.residual = r.rhs - r.lhs;
  return r;
}

}  // namespace

PairResidual exp_pair_inequality(const Hypothesis& h, const DiscreteDistribution& d, std::size_t i,
                                 std::size_t j) {
  return pair_inequality(PhiFamily::Exp, h, d, i, j);
}

PairResidual log_pair_inequality(const Hypothesis& h, const DiscreteDistribution& d, std::size_t i,
                                 std::size_t j) {
  return pair_inequality(PhiFamily::Logistic, h, d, i, j);
}

BoundReport ranking_tool_bound(const TransformSpec& g1, const TransformSpec& g2,
                               const FactorSpec& a1, const FactorSpec& a2, const LossSpec& target,
                               const LossSpec& surrogate, const Hypothesis& h,
                               const DiscreteDistribution& d, const BoundOptions& options) {
  require_pair_loss(target);
  g1.validate();
  g2.validate();
  HypothesisSet H = hset::Complete{};
  auto f1 = factor_values(a1, h, d);
  auto f2 = factor_values(a2, h, d);
  std::vector<double> r(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) r[i] = conditional_regret(surrogate, h, d, i, H).regret;

  BoundReport rep;
  rep.bound_id = "ranking-tool";
  rep.gamma_offset = g1.offset + g2.offset;
  rep.per_point.assign(d.size(), std::numeric_limits<double>::infinity());
  double lhs = 0.0, e1 = 0.0, e2 = 0.0, D = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.marginal(i) <= 0.0) continue;
    e1 += d.marginal(i) * f1[i];
    e2 += d.marginal(i) * f2[i];
    D += d.marginal(i) * r[i];
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (d.marginal(j) <= 0.0) continue;
      double pr = pair_regret(target, h, d, i, j).regret;
      lhs += d.marginal(i) * d.marginal(j) * pr;
      double res = g1.gamma(f1[j] * r[i]) + g2.gamma(f2[i] * r[j]) - pr;
      // Per-point diagnostic: worst residual over pairs involving x.
      rep.per_point[i] = std::min(rep.per_point[i], res);
      rep.per_point[j] = std::min(rep.per_point[j], res);
    }
  }
  rep.applicable = true;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.marginal(i) <= 0.0) continue;
    if (rep.per_point[i] < worst) {
      worst = rep.per_point[i];
      rep.worst_point = d.id(i);
    }
    if (rep.per_point[i] < -1e-12) rep.applicable = false;
  }
  TransformSpec c1 = g1, c2 = g2;
  c1.scale *= options.conclusion_scale;
  c2.scale *= options.conclusion_scale;
  rep.gamma_h = e1 + e2;
  rep.lhs = lhs;
  rep.rhs = c1.gamma(e1 * D) + c2.gamma(e2 * D);
  if (!rep.applicable) rep.note = "pointwise pair hypothesis fails; bound not asserted";
  else if (rep.gamma_offset > 0.0) rep.note = "Gamma(0) offset makes the bound non-vanishing";
  rep.finalize(options.tol);
  return rep;
}

namespace {

BoundReport aggregate_bound(PhiFamily family, const Hypothesis& h, const DiscreteDistribution& d,
                            const BoundOptions& options) {
  require_binary(d);
  PhiSpec phi{family, 1.0};
  LossSpec pair = loss::RankingPair{phi};
  LossSpec point = loss::Margin{phi};
  BoundReport rep;
  rep.bound_id = family == PhiFamily::Exp ? "rank-exp" : "rank-log";
  double factor = 0.0;
  if (family == PhiFamily::Exp) {
    factor = generalization_error(point, h, d);
  } else {
    for (std::size_t i = 0; i < d.size(); ++i)
      factor += d.marginal(i) * std::max(d.eta(i), 1.0 - d.eta(i));
  }
  rep.gamma_h = 2.0 * factor;
  double D = expected_regret(point, h, d, hset::Complete{});
  rep.lhs = ranking_expected_regret(pair, h, d);
  rep.rhs = options.conclusion_scale * rep.gamma_h * D;
  rep.applicable = true;
  rep.finalize(options.tol);
  return rep;
}

}  // namespace

BoundReport exp_ranking_bound(const Hypothesis& h, const DiscreteDistribution& d,
                              const BoundOptions& options) {
  return aggregate_bound(PhiFamily::Exp, h, d, options);
}

BoundReport log_ranking_bound(const Hypothesis& h, const DiscreteDistribution& d,
                              const BoundOptions& options) {
  return aggregate_bound(PhiFamily::Logistic, h, d, options);
}

std::vector<PairRegretRecord> pair_audit(PhiFamily family, const Hypothesis& h,
                                         const DiscreteDistribution& d) {
  LossSpec pair = loss::RankingPair{PhiSpec{family, 1.0}};
  std::vector<PairRegretRecord> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      auto rec = pair_regret(pair, h, d, i, j);
      rec.residual = pair_inequality(family, h, d, i, j).residual;
      out.push_back(rec);
    }
  return out;
}

std::string pair_audit_csv(const std::vector<PairRegretRecord>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "x,x_prime,cond_error,best_in_class,regret,residual\n";
  for (const auto& r : rows)
    os << r.x << ',' << r.x_prime << ',' << r.cond_error << ',' << r.best_in_class << ','
       << r.regret << ',' << r.residual << '\n';
  return os.str();
}

HingeCounterexample hinge_counterexample(double eta0, double eta0p) {
  if (!(eta0 <= 1.0 && eta0 > eta0p && eta0p > 0.5))
    throw InputError("counterexample needs 1 >= eta0 > eta0p > 1/2");
  DiscreteDistribution d({{0, {0.0}}, {1, {1.0}}}, {0.5, 0.5},
                         {{eta0, 1.0 - eta0}, {eta0p, 1.0 - eta0p}});
  auto h0 = Hypothesis::tabular_scalar({1.0, 1.0});
  LossSpec point = loss::Margin{PhiSpec::hinge()};
  LossSpec pair = loss::RankingPair{PhiSpec::hinge()};
  HingeCounterexample out{d, 0.0, 0.0, 0.0};
  out.point_regret_x0 = conditional_regret(point, h0, d, 0, hset::Complete{}).regret;
  out.point_regret_x0p = conditional_regret(point, h0, d, 1, hset::Complete{}).regret;
  out.pair_regret = pair_regret(pair, h0, d, 0, 1).regret;
  return out;
}

double hinge_implied_floor(const std::vector<std::pair<double, double>>& queries) {
  double floor = 0.0;
  for (const auto& [e0, e1] : queries) floor = std::max(floor, hinge_counterexample(e0, e1).pair_regret);
  return floor;
}

RankingOptimum ranking_best_in_class_error(const PhiSpec& phi, const DiscreteDistribution& d) {
  require_binary(d);
  const std::size_t k = d.size();
  LossSpec L = loss::RankingPair{phi};
  std::vector<double> w(k * k), a(k * k), b(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      auto pw = pair_weights(d, i, j);
      w[i * k + j] = d.marginal(i) * d.marginal(j);
      a[i * k + j] = pw.a;
      b[i * k + j] = pw.b;
    }
  auto f = [&](const std::vector<double>& s) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double ww = w[i * k + j];
        if (ww > 0.0) v += ww * pair_conditional_error_ab(L, s[i] - s[j], a[i * k + j], b[i * k + j]);
      }
    return v;
  };
  auto g = [&](const std::vector<double>& s) {
    std::vector<double> gr(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        double ww = w[i * k + j];
        if (ww <= 0.0 || i == j) continue;
        double delta = s[i] - s[j];
        double dt = a[i * k + j] * phi_derivative(phi, delta) - b[i * k + j] * phi_derivative(phi, -delta);
        gr[i] += ww * dt;
        gr[j] -= ww * dt;
      }
    gr[0] = 0.0;
    return gr;
  };
  opt::DescentOptions o;
  o.gradient_tol = 1e-10;
  o.project = [](std::vector<double>& s) {
    s[0] = 0.0;
    for (auto& v : s) v = std::clamp(v, -kScoreBracket, kScoreBracket);
  };
  bool smooth = phi.family == PhiFamily::Logistic || phi.family == PhiFamily::Exp ||
                phi.family == PhiFamily::SqHinge;
  int starts = smooth ? 1 : 20;
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  RankingOptimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < starts; ++r) {
    std::vector<double> s0(k, 0.0);
    if (r > 0)
      for (auto& v : s0) v = normal(rng);
    auto res = opt::gradient_descent(f, g, s0, o);
    if (res.value < best.value) {
      best.value = res.value;
      best.scores = res.x;
      best.converged = res.converged;
    }
  }
  best.approximate = !smooth;
  return best;
}

double ranking_minimizability_gap(const PhiSpec& phi, const DiscreteDistribution& d) {
  auto opt = ranking_best_in_class_error(phi, d);
  LossSpec L = loss::RankingPair{phi};
  double pointwise = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      double w = d.marginal(i) * d.marginal(j);
      if (w > 0.0) pointwise += w * pair_best_in_class(L, d, i, j, hset::Complete{}).value;
    }
  return opt.value - pointwise;
}

}  // namespace hcb
