#include "hcb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hcb/common.hpp"

namespace hcb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kHypothesisTol = 1e-12;

std::vector<double> point_regrets(const LossSpec& loss, const Hypothesis& h,
                                  const DiscreteDistribution& d, const HypothesisSet& H) {
  std::vector<double> r(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) r[i] = conditional_regret(loss, h, d, i, H).regret;
  return r;
}

double expect(const DiscreteDistribution& d, const std::vector<double>& v) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0) e += d.marginal(i) * v[i];
  return e;
}

double ess_sup(const DiscreteDistribution& d, const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0) m = std::max(m, v[i]);
  return m;
}

// Index of the smallest residual among positive-mass points.
int worst_id(const DiscreteDistribution& d, const std::vector<double>& residuals) {
  int best = -1;
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0 && residuals[i] < v) {
      v = residuals[i];
      best = static_cast<int>(i);
    }
  return best < 0 ? -1 : d.id(static_cast<std::size_t>(best));
}

bool all_hold(const DiscreteDistribution& d, const std::vector<double>& residuals) {
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0 && residuals[i] < -kHypothesisTol) return false;
  return true;
}

std::vector<std::size_t> disagreement(const Hypothesis& h, const DiscreteDistribution& d) {
  std::vector<std::size_t> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out[i] = predict(h, d, i) != bayes_label(d.conditional(i)) ? 1 : 0;
  return out;
}

}  // namespace

double TransformSpec::gamma(double x) const {
  return offset + scale * std::pow(std::max(x, 0.0), 1.0 / s);
}

double TransformSpec::psi(double x) const {
  if (x <= offset) return 0.0;
  return std::pow((x - offset) / scale, s);
}

void TransformSpec::validate() const {
  if (!(s >= 1.0) || !(scale > 0.0) || !(offset >= 0.0))
    throw InputError("transform needs s >= 1, scale > 0 and offset >= 0");
}

TransformSpec table_transform(const LossSpec& loss, int n_labels) {
  const double r2 = std::sqrt(2.0);
  const double n = static_cast<double>(n_labels);
  if (auto* m = std::get_if<loss::Margin>(&loss)) {
    switch (m->phi.family) {
      case PhiFamily::Hinge:
      case PhiFamily::Sigmoid:
      case PhiFamily::RhoMargin:
        return TransformSpec::linear();
      case PhiFamily::Logistic:
      case PhiFamily::Exp:
        return TransformSpec::root(2.0, r2);
      case PhiFamily::SqHinge:
        return TransformSpec::root(2.0, 1.0);
    }
  }
  if (auto* c = std::get_if<loss::Constrained>(&loss)) {
    switch (c->phi.family) {
      case PhiFamily::Hinge:
      case PhiFamily::RhoMargin:
        return TransformSpec::linear();
      case PhiFamily::Exp:
        return TransformSpec::root(2.0, n_labels == 2 ? r2 : 2.0);
      case PhiFamily::SqHinge:
        return TransformSpec::root(2.0, n_labels == 2 ? 1.0 : r2);
      default:
        break;
    }
  }
  if (auto* c = std::get_if<loss::CompSum>(&loss)) {
    switch (c->family) {
      case CompSumFamily::MultinomialLogistic:
      case CompSumFamily::SumExp:
        return TransformSpec::root(2.0, r2);
      case CompSumFamily::MAE:
        return TransformSpec::linear(n);
      case CompSumFamily::GCE:
        return TransformSpec::root(2.0, std::sqrt(2.0 * std::pow(n, c->a)));
    }
  }
  throw UnsupportedError("no transform entry for " + loss_name(loss));
}

std::string factor_name(const FactorSpec& f) {
  return std::visit(
      overloaded{
          [](const factor::One&) -> std::string { return "one"; },
          [](const factor::Const& c) { return "const(" + std::to_string(c.v) + ")"; },
          [](const factor::DisagreementPlusEps&) -> std::string { return "disagreement_eps"; },
          [](const factor::ExpectationPower& e) { return "expectation_power(" + std::to_string(e.s) + ")"; },
          [](const factor::ConditionalErrorOf& c) { return "cond_error(" + loss_name(c.loss) + ")"; },
          [](const factor::UMax&) -> std::string { return "umax"; },
      },
      f);
}

std::vector<double> factor_values(const FactorSpec& f, const Hypothesis& h,
                                  const DiscreteDistribution& d) {
  std::vector<double> v(d.size(), 1.0);
  std::visit(
      overloaded{
          [&](const factor::One&) {},
          [&](const factor::Const& c) { std::fill(v.begin(), v.end(), c.v); },
          [&](const factor::DisagreementPlusEps& e) {
            auto dis = disagreement(h, d);
            for (std::size_t i = 0; i < d.size(); ++i) v[i] = static_cast<double>(dis[i]) + e.eps;
          },
          [&](const factor::ExpectationPower& e) {
            auto dis = disagreement(h, d);
            std::vector<double> beta(d.size());
            for (std::size_t i = 0; i < d.size(); ++i) beta[i] = static_cast<double>(dis[i]) + e.eps;
            std::fill(v.begin(), v.end(), std::pow(expect(d, beta), e.s));
          },
          [&](const factor::ConditionalErrorOf& c) {
            for (std::size_t i = 0; i < d.size(); ++i) v[i] = conditional_error(c.loss, h, d, i);
          },
          [&](const factor::UMax&) {
            for (std::size_t i = 0; i < d.size(); ++i) v[i] = std::max(d.eta(i), 1.0 - d.eta(i));
          },
      },
      f);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!(v[i] > 0.0))
      throw ContractError("factor " + factor_name(f) + " is not strictly positive at support id " +
                          std::to_string(d.id(i)));
  return v;
}

void BoundReport::finalize(double tol) {
  slack = rhs - lhs;
  violated = applicable && slack < -tol;
}

json BoundReport::to_json() const {
  json j = {{"lhs", lhs},         {"rhs", rhs},
            {"slack", slack},     {"gamma_h", gamma_h},
            {"applicable", applicable}, {"worst_point", worst_point}};
  if (!bound_id.empty()) j["bound_id"] = bound_id;
  j["violated"] = violated;
  if (gamma_limit) j["gamma_limit"] = *gamma_limit;
  if (gamma_offset != 0.0) j["gamma_offset"] = gamma_offset;
  if (!note.empty()) j["note"] = note;
  return j;
}

std::vector<double> check_pointwise_assumption(const LossSpec& target, const LossSpec& surrogate,
                                               const Hypothesis& h, const DiscreteDistribution& d,
                                               const HypothesisSet& H,
                                               const TransformSpec& transform,
                                               const FactorSpec& alpha, const FactorSpec& beta,
                                               ToolMode mode) {
  transform.validate();
  if (mode == ToolMode::Convex && transform.offset != 0.0)
    throw InputError("convex tool needs Psi(0) = 0");
  auto a = factor_values(alpha, h, d);
  auto b = factor_values(beta, h, d);
  auto r1 = point_regrets(surrogate, h, d, H);
  auto r2 = point_regrets(target, h, d, H);
  double eb = expect(d, b);
  std::vector<double> res(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    double scaled = r2[i] * eb / b[i];
    res[i] = mode == ToolMode::Convex ? a[i] * r1[i] - transform.psi(scaled)
                                      : transform.gamma(a[i] * r1[i]) - scaled;
  }
  return res;
}

namespace {

void check_fkg(const DiscreteDistribution& d, const std::vector<double>& r1,
               const std::vector<double>& ab) {
  if (d.feature_dim() != 1) throw PreconditionError("FKG form needs one-dimensional features");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return d.point(x).features[0] < d.point(y).features[0];
  });
  auto first_failure = [&](int dir) -> std::size_t {
    for (std::size_t k = 1; k < idx.size(); ++k) {
      double dr = r1[idx[k]] - r1[idx[k - 1]];
      double dab = ab[idx[k]] - ab[idx[k - 1]];
      if (dir * dr < -kHypothesisTol || dir * dab > kHypothesisTol) return k;
    }
    return 0;
  };
  std::size_t up = first_failure(1);
  if (up == 0) return;
  std::size_t down = first_failure(-1);
  if (down == 0) return;
  std::size_t k = std::max(up, down);
  throw PreconditionError("FKG monotonicity fails between support ids " +
                          std::to_string(d.id(idx[k - 1])) + " and " +
                          std::to_string(d.id(idx[k])));
}

}  // namespace

BoundReport evaluate_tool_bound(const LossSpec& target, const LossSpec& surrogate,
                                const Hypothesis& h, const DiscreteDistribution& d,
                                const HypothesisSet& H, const TransformSpec& transform,
                                const FactorSpec& alpha, const FactorSpec& beta, ToolMode mode,
                                GammaForm form, const BoundOptions& options) {
  BoundReport rep;
  rep.bound_id = std::string(mode == ToolMode::Convex ? "tool-convex" : "tool-concave") +
                 (form == GammaForm::Fkg ? "-fkg" : "-sup");
  rep.per_point =
      check_pointwise_assumption(target, surrogate, h, d, H, transform, alpha, beta, mode);
  rep.worst_point = worst_id(d, rep.per_point);
  rep.applicable = all_hold(d, rep.per_point);

  auto a = factor_values(alpha, h, d);
  auto b = factor_values(beta, h, d);
  std::vector<double> ab(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) ab[i] = a[i] * b[i];
  double eb = expect(d, b);
  auto r1 = point_regrets(surrogate, h, d, H);
  double D1 = expected_regret(surrogate, h, d, H);
  double D2 = expected_regret(target, h, d, H);
  if (form == GammaForm::Fkg) {
    check_fkg(d, r1, ab);
    rep.gamma_h = expect(d, ab) / eb;
  } else {
    rep.gamma_h = ess_sup(d, ab) / eb;
  }
  TransformSpec conclusion = transform;
  conclusion.scale *= options.conclusion_scale;
  if (mode == ToolMode::Convex) {
    rep.lhs = conclusion.psi(D2);
    rep.rhs = rep.gamma_h * D1;
  } else {
    rep.lhs = D2;
    rep.rhs = conclusion.gamma(rep.gamma_h * D1);
  }
  if (!rep.applicable) rep.note = "pointwise hypothesis fails; bound not asserted";
  rep.finalize(options.tol);
  return rep;
}

BoundReport evaluate_power_bound(const LossSpec& target, const LossSpec& surrogate,
                                 const Hypothesis& h, const DiscreteDistribution& d,
                                 const HypothesisSet& H, double s, const FactorSpec& alpha,
                                 const FactorSpec& beta, double scale,
                                 const BoundOptions& options) {
  if (!(s >= 1.0) || !(scale > 0.0)) throw InputError("power bound needs s >= 1 and scale > 0");
  BoundReport rep;
  rep.bound_id = "tool-power";
  auto a = factor_values(alpha, h, d);
  auto b = factor_values(beta, h, d);
  auto r1 = point_regrets(surrogate, h, d, H);
  auto r2 = point_regrets(target, h, d, H);
  double eb = expect(d, b);
  rep.per_point.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    rep.per_point[i] = scale * std::pow(a[i] * r1[i], 1.0 / s) - r2[i] * eb / b[i];
  rep.worst_point = worst_id(d, rep.per_point);
  rep.applicable = all_hold(d, rep.per_point);

  std::vector<double> w(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) w[i] = std::pow(a[i], 1.0 / s) * b[i] / eb;
  if (s == 1.0) {
    // Conjugate exponent t = infinity: the Hoelder norm becomes a sup.
    rep.gamma_h = ess_sup(d, w);
  } else {
    double t = s / (s - 1.0);
    std::vector<double> wt(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) wt[i] = std::pow(w[i], t);
    rep.gamma_h = std::pow(expect(d, wt), 1.0 / t);
  }
  if (std::holds_alternative<factor::DisagreementPlusEps>(beta) &&
      std::holds_alternative<factor::ExpectationPower>(alpha)) {
    auto dis = disagreement(h, d);
    std::vector<double> ind(dis.begin(), dis.end());
    double m = expect(d, ind);
    rep.gamma_limit = s == 1.0 ? (m > 0.0 ? 1.0 : 0.0) : std::pow(m, (s - 1.0) / s);
  }
  double D1 = expected_regret(surrogate, h, d, H);
  rep.lhs = expected_regret(target, h, d, H);
  rep.rhs = scale * options.conclusion_scale * rep.gamma_h * std::pow(D1, 1.0 / s);
  if (!rep.applicable) rep.note = "pointwise hypothesis fails; bound not asserted";
  rep.finalize(options.tol);
  return rep;
}

double lambda_of(const Hypothesis& h, const DiscreteDistribution& d) {
  double lam = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto s = h.scores(d, i);
    lam = std::min(lam, *std::max_element(s.begin(), s.end()));
  }
  return lam;
}

double constrained_gamma(PhiFamily family, double x, double lambda, GammaConstants constants) {
  x = std::max(x, 0.0);
  bool corrected = constants == GammaConstants::Corrected;
  switch (family) {
    case PhiFamily::Exp:
      return (corrected ? 2.0 : std::sqrt(2.0)) * std::sqrt(x) * std::exp(-lambda / 2.0);
    case PhiFamily::Hinge:
      return x / (1.0 + lambda);
    case PhiFamily::SqHinge:
      return (corrected ? std::sqrt(2.0) : 1.0) * std::sqrt(x) / (1.0 + lambda);
    default:
      throw UnsupportedError("enhanced constrained bound covers exp, hinge and sq_hinge");
  }
}

double constrained_partial_regret(PhiFamily family, const std::vector<double>& p,
                                  const std::vector<double>& scores) {
  if (p.size() != scores.size() || p.size() < 2) throw InputError("partial regret needs matching p and scores");
  std::size_t ym = argmax_highest(p);
  std::size_t yh = argmax_highest(scores);
  if (ym == yh) return 0.0;
  double a = 1.0 - p[yh], b = 1.0 - p[ym];
  double u = scores[yh], v = scores[ym];
  switch (family) {
    case PhiFamily::Exp: {
      double r = std::sqrt(a * std::exp(u)) - std::sqrt(b * std::exp(v));
      return r * r;
    }
    case PhiFamily::Hinge: {
      double T = std::max(0.0, 2.0 + u + v);
      return a * std::max(0.0, 1.0 + u) + b * std::max(0.0, 1.0 + v) - std::min(a, b) * T;
    }
    case PhiFamily::SqHinge: {
      double T = std::max(0.0, 2.0 + u + v);
      double pu = std::max(0.0, 1.0 + u), pv = std::max(0.0, 1.0 + v);
      double inf = a + b > 0.0 ? a * b * T * T / (a + b) : 0.0;
      return a * pu * pu + b * pv * pv - inf;
    }
    default:
      throw UnsupportedError("partial regret covers exp, hinge and sq_hinge");
  }
}

ConstrainedReport constrained_enhanced_bound(const PhiSpec& phi, const Hypothesis& h,
                                             const DiscreteDistribution& d,
                                             GammaConstants constants,
                                             const BoundOptions& options) {
  if (!h.sum_zero()) throw ContractError("constrained bound needs a sum-zero hypothesis");
  HypothesisSet H = hset::SumZeroComplete{};
  LossSpec target = loss::ZeroOneMulti{};
  LossSpec surrogate = loss::Constrained{phi};
  ConstrainedReport out;
  out.lambda = lambda_of(h, d);
  auto r1 = point_regrets(surrogate, h, d, H);
  auto r2 = point_regrets(target, h, d, H);
  double D1 = expect(d, r1);
  double D2 = expect(d, r2);
  std::string suffix = constants == GammaConstants::Corrected ? "-corrected" : "";
  for (int k = 0; k < 2; ++k) {
    BoundReport& rep = k == 0 ? out.enhanced : out.baseline;
    double lam = k == 0 ? out.lambda : 0.0;
    rep.bound_id = "constrained-" + phi_name(phi) + (k == 0 ? "" : "-baseline") + suffix;
    rep.gamma_h = 1.0;
    rep.per_point.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      rep.per_point[i] = constrained_gamma(phi.family, r1[i], lam, constants) - r2[i];
    rep.worst_point = worst_id(d, rep.per_point);
    rep.applicable = true;
    rep.lhs = D2;
    rep.rhs = options.conclusion_scale * constrained_gamma(phi.family, D1, lam, constants);
    rep.finalize(options.tol);
  }
  return out;
}

double tsybakov_exponent(double s, double alpha) { return 1.0 / (s - alpha * (s - 1.0)); }

BoundReport tsybakov_bound(NoiseSetting setting, const LossSpec& surrogate, const Hypothesis& h,
                           const DiscreteDistribution& d, const HypothesisSet& H, double s,
                           double scale, const NoiseProfile& noise,
                           const BoundOptions& options) {
  if (!(s >= 1.0) || !(scale > 0.0)) throw InputError("tsybakov bound needs s >= 1 and scale > 0");
  BoundReport rep;
  rep.bound_id = std::string("tsybakov-") + (setting == NoiseSetting::Binary ? "binary-" : "multi-") +
                 loss_name(surrogate);
  LossSpec target = setting == NoiseSetting::Binary ? LossSpec{loss::ZeroOneBinary{}}
                                                    : LossSpec{loss::ZeroOneMulti{}};
  if (!is_decoupled(H) || std::holds_alternative<hset::Bounded>(H)) {
    rep.applicable = false;
    rep.note = "Bayes classifier membership not established for this hypothesis set";
    rep.finalize(options.tol);
    return rep;
  }
  try {
    auto fit = fit_tsybakov_envelope(d, noise.alpha);
    if (fit.log_B > noise.log_B + 1e-12) {
      rep.applicable = false;
      rep.note = "noise envelope does not hold with the supplied B";
    }
  } catch (const EnvelopeError& e) {
    rep.applicable = false;
    rep.note = e.what();
  }
  auto r1 = point_regrets(surrogate, h, d, H);
  auto r2 = point_regrets(target, h, d, H);
  rep.per_point.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    rep.per_point[i] = scale * std::pow(std::max(r1[i], 0.0), 1.0 / s) - r2[i];
  rep.worst_point = worst_id(d, rep.per_point);
  if (rep.applicable && !all_hold(d, rep.per_point)) {
    rep.applicable = false;
    rep.note = "pointwise Gamma assumption fails";
  }
  double D = std::max(expect(d, r1), 0.0);
  double e = tsybakov_exponent(s, noise.alpha);
  double sc = scale * options.conclusion_scale;
  rep.gamma_h = std::pow(noise.c, (s - 1.0) * e);
  rep.lhs = expect(d, r2);
  rep.rhs = rep.gamma_h * std::pow(std::pow(sc, s) * D, e);
  rep.finalize(options.tol);
  return rep;
}

LemmaResiduals tsybakov_lemma_check(const DiscreteDistribution& d, double alpha,
                                    const Hypothesis& h, double c_scale) {
  auto np = fit_tsybakov_envelope(d, alpha);
  LemmaResiduals r;
  r.B = np.B;
  r.c = np.c * c_scale;
  LossSpec zo = h.outputs() == 1 ? LossSpec{loss::ZeroOneBinary{}} : LossSpec{loss::ZeroOneMulti{}};
  auto dis = disagreement(h, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.marginal(i) <= 0.0) continue;
    double m = d.marginal(i);
    r.disagreement += m * dis[i];
    r.margin_mass += m * dis[i] * margin_at(d, i);
    r.excess += m * conditional_regret(zo, h, d, i, hset::Complete{}).regret;
  }
  r.first = r.c * std::pow(r.margin_mass, alpha) - r.disagreement;
  r.second = r.c * std::pow(r.excess, alpha) - r.c * std::pow(r.margin_mass, alpha);
  return r;
}

}  // namespace hcb
