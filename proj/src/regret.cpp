#include "hcb/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "hcb/common.hpp"
#include "hcb/optimize.hpp"

namespace hcb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_scalar_loss(const LossSpec& loss) {
  return std::holds_alternative<loss::ZeroOneBinary>(loss) ||
         std::holds_alternative<loss::Margin>(loss);
}

bool complete_like(const HypothesisSet& H) {
  return std::holds_alternative<hset::Complete>(H) ||
         std::holds_alternative<hset::SymmetricComplete>(H) ||
         std::holds_alternative<hset::SumZeroComplete>(H);
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double pmax(const std::vector<double>& p) { return *std::max_element(p.begin(), p.end()); }

void check_conditional(const LossSpec& loss, const std::vector<double>& p) {
  if (p.size() < 2) throw InputError("conditional vector needs at least two labels");
  if (is_scalar_loss(loss) && p.size() != 2)
    throw ContractError(loss_name(loss) + " is a binary loss but the distribution has " +
                        std::to_string(p.size()) + " labels");
}

std::optional<double> closed_form(const LossSpec& loss, const std::vector<double>& p,
                                  const HypothesisSet& H) {
  const std::size_t n = p.size();
  if (std::holds_alternative<loss::ZeroOneBinary>(loss)) {
    if (auto* b = std::get_if<hset::Bounded>(&H); b && b->B == 0.0) return 1.0 - p[0];
    return std::min(p[0], p[1]);
  }
  if (std::holds_alternative<loss::ZeroOneMulti>(loss)) {
    if (auto* b = std::get_if<hset::Bounded>(&H); b && b->B == 0.0) return 1.0 - p[n - 1];
    return 1.0 - pmax(p);
  }
  if (!complete_like(H)) return std::nullopt;
  if (auto* m = std::get_if<loss::Margin>(&loss)) {
    double eta = p[0];
    switch (m->phi.family) {
      case PhiFamily::Exp:
        return 2.0 * std::sqrt(eta * (1.0 - eta));
      case PhiFamily::Logistic:
        return entropy(p);
      case PhiFamily::Hinge:
        return 2.0 * std::min(eta, 1.0 - eta);
      case PhiFamily::SqHinge:
        return 4.0 * eta * (1.0 - eta);
      default:
        return std::nullopt;
    }
  }
  if (auto* c = std::get_if<loss::Constrained>(&loss)) {
    double nn = static_cast<double>(n);
    switch (c->phi.family) {
      case PhiFamily::Exp: {
        double log_prod = 0.0;
        for (double v : p) {
          if (1.0 - v <= 0.0) return 0.0;
          log_prod += std::log(1.0 - v);
        }
        return nn * std::exp(log_prod / nn);
      }
      case PhiFamily::Hinge:
        return nn * (1.0 - pmax(p));
      case PhiFamily::SqHinge: {
        double inv = 0.0;
        for (double v : p) {
          if (1.0 - v <= 0.0) return 0.0;
          inv += 1.0 / (1.0 - v);
        }
        return nn * nn / inv;
      }
      case PhiFamily::RhoMargin:
        return 1.0 - pmax(p);
      default:
        return std::nullopt;
    }
  }
  if (auto* c = std::get_if<loss::CompSum>(&loss)) {
    switch (c->family) {
      case CompSumFamily::MultinomialLogistic:
        return entropy(p);
      case CompSumFamily::SumExp: {
        double s = 0.0;
        for (double v : p) s += std::sqrt(v);
        return s * s - 1.0;
      }
      case CompSumFamily::MAE:
        return 1.0 - pmax(p);
      case CompSumFamily::GCE: {
        double s = 0.0;
        for (double v : p) s += std::pow(v, 1.0 / (1.0 - c->a));
        return (1.0 - std::pow(s, 1.0 - c->a)) / c->a;
      }
    }
  }
  return std::nullopt;
}

constexpr int kCoordGrid = 201;
constexpr int kMaxSweeps = 5000;

// Coordinate descent over a box; coordinate `pinned` (if any) stays fixed.
opt::ScalarMin coordinate_descent(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> x, double lo, double hi,
                                  std::optional<std::size_t> pinned) {
  double fx = f(x);
  bool boundary = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double before = fx;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (pinned && *pinned == k) continue;
      auto g = [&](double v) {
        double keep = x[k];
        x[k] = v;
        double r = f(x);
        x[k] = keep;
        return r;
      };
      auto r = opt::grid_golden(g, lo, hi, kCoordGrid, 1e-12);
      if (r.value <= fx) {
        x[k] = r.x;
        fx = r.value;
      }
    }
    if (before - fx <= 1e-16) break;
  }
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!(pinned && *pinned == k) && (x[k] <= lo + 1e-6 || x[k] >= hi - 1e-6)) boundary = true;
  return {0.0, fx, boundary};
}

// Descent over the sum-zero subspace by exact line search along e_i - e_j.
// For separable convex objectives this reaches the constrained minimum.
opt::ScalarMin pairwise_exchange(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, double span) {
  double fx = f(x);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double before = fx;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        auto g = [&](double t) {
          double xi = x[i], xj = x[j];
          x[i] += t;
          x[j] -= t;
          double r = f(x);
          x[i] = xi;
          x[j] = xj;
          return r;
        };
        auto r = opt::grid_golden(g, -span, span, kCoordGrid, 1e-12);
        if (r.value <= fx) {
          x[i] += r.x;
          x[j] -= r.x;
          fx = r.value;
        }
      }
    }
    if (before - fx <= 1e-16) break;
  }
  return {0.0, fx, false};
}

// dC/ds_k = sum_y p_y g'(q_y) q_y (1[y=k] - q_k) for comp-sum losses
// l_y = g(q_y) with q = softmax(s).
std::vector<double> comp_sum_gradient(const loss::CompSum& c, const std::vector<double>& s,
                                      const std::vector<double>& p) {
  auto q = softmax(s);
  const std::size_t n = s.size();
  std::vector<double> w(n, 0.0);  // p_y g'(q_y) q_y
  for (std::size_t y = 0; y < n; ++y) {
    if (p[y] <= 0.0) continue;
    switch (c.family) {
      case CompSumFamily::MultinomialLogistic:
        w[y] = -p[y];
        break;
      case CompSumFamily::SumExp:
        w[y] = -p[y] / q[y];
        break;
      case CompSumFamily::MAE:
        w[y] = -p[y] * q[y];
        break;
      case CompSumFamily::GCE:
        w[y] = -p[y] * std::pow(q[y], c.a);
        break;
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = w[k] - q[k] * total;
  return g;
}

// Projected gradient descent on the score box. Non-convex families (MAE,
// GCE) also start from each label's vertex direction.
BestInClass comp_sum_descent(const loss::CompSum& c, const std::vector<double>& p,
                             double lo, double hi, std::optional<std::size_t> pinned) {
  const std::size_t n = p.size();
  LossSpec L = c;
  auto clamp = [&](std::vector<double>& s) {
    for (auto& v : s) v = std::clamp(v, lo, hi);
    if (pinned) s[*pinned] = 0.0;
  };
  auto f = [&](const std::vector<double>& s) { return conditional_error_scores(L, s, p); };
  auto g = [&](const std::vector<double>& s) {
    auto gr = comp_sum_gradient(c, s, p);
    if (pinned) gr[*pinned] = 0.0;
    return gr;
  };
  opt::DescentOptions o;
  o.gradient_tol = 1e-13;
  o.max_iterations = 100000;
  o.project = clamp;
  std::vector<std::vector<double>> starts{std::vector<double>(n, 0.0)};
  if (!is_convex_loss(L)) {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> s(n, -10.0);
      s[k] = 0.0;
      if (pinned && *pinned != k) {
        std::fill(s.begin(), s.end(), 0.0);
        s[k] = 10.0;
      }
      starts.push_back(s);
    }
  }
  BestInClass best{std::numeric_limits<double>::infinity(), Method::ConvexSolve, false};
  for (auto& s0 : starts) {
    auto r = opt::gradient_descent(f, g, s0, o);
    if (r.value < best.value) {
      best.value = r.value;
      best.boundary = false;
      for (std::size_t k = 0; k < n; ++k)
        if (!(pinned && *pinned == k) && (r.x[k] <= lo + 1e-6 || r.x[k] >= hi - 1e-6))
          best.boundary = true;
    }
  }
  return best;
}

BestInClass numeric_multi(const LossSpec& loss, const std::vector<double>& p,
                          const HypothesisSet& H) {
  const std::size_t n = p.size();
  auto f = [&](const std::vector<double>& s) { return conditional_error_scores(loss, s, p); };
  if (std::holds_alternative<loss::Constrained>(loss)) {
    if (!std::holds_alternative<hset::SumZeroComplete>(H) &&
        !std::holds_alternative<hset::SymmetricComplete>(H))
      throw UnsupportedError("constrained losses need a sum-zero complete hypothesis set");
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> starts{std::vector<double>(n, 0.0)};
    // Extra starts for the non-convex rho-margin loss.
    if (!is_convex_loss(loss)) {
      for (double t : {0.5, 2.0, 8.0})
        for (std::size_t k = 0; k < n; ++k) {
          std::vector<double> s(n, -t / static_cast<double>(n - 1));
          s[k] = t;
          starts.push_back(s);
        }
    }
    for (auto& s : starts) best = std::min(best, pairwise_exchange(f, s, kScoreBracket).value);
    return {best, Method::GridRefined, false};
  }
  if (auto* cs = std::get_if<loss::CompSum>(&loss)) {
    double lo = -kScoreBracket, hi = kScoreBracket;
    std::optional<std::size_t> pinned = n - 1;
    if (auto* b = std::get_if<hset::Bounded>(&H)) {
      hi = std::min(b->B, kScoreBracket);
      lo = -hi;
      pinned.reset();
    } else if (!complete_like(H)) {
      throw UnsupportedError("unsupported hypothesis set for " + loss_name(loss));
    }
    if (hi == lo) return {f(std::vector<double>(n, 0.0)), Method::ConvexSolve, true};
    return comp_sum_descent(*cs, p, lo, hi, pinned);
  }
  if (std::holds_alternative<loss::ZeroOneMulti>(loss)) {
    auto* b = std::get_if<hset::Bounded>(&H);
    double B = b ? std::min(b->B, kScoreBracket) : kScoreBracket;
    auto r = coordinate_descent(f, std::vector<double>(n, 0.0), -B, B, std::nullopt);
    return {r.value, Method::GridRefined, r.at_boundary};
  }
  throw UnsupportedError("no numeric best-in-class route for " + loss_name(loss));
}

}  // namespace

std::string hset_name(const HypothesisSet& h) {
  return std::visit(overloaded{
                        [](const hset::Complete&) -> std::string { return "complete"; },
                        [](const hset::SymmetricComplete&) -> std::string { return "symmetric_complete"; },
                        [](const hset::SumZeroComplete&) -> std::string { return "sum_zero_complete"; },
                        [](const hset::Bounded& b) { return "bounded(" + std::to_string(b.B) + ")"; },
                        [](const hset::LinearClass& l) { return "linear(W=" + std::to_string(l.W) + ")"; },
                    },
                    h);
}

bool is_decoupled(const HypothesisSet& h) { return !std::holds_alternative<hset::LinearClass>(h); }

std::string method_name(Method m) {
  switch (m) {
    case Method::ClosedForm:
      return "ClosedForm";
    case Method::GridRefined:
      return "GridRefined";
    case Method::ConvexSolve:
      return "ConvexSolve";
  }
  return "?";
}

double conditional_error_scores(const LossSpec& loss, const std::vector<double>& s,
                                const std::vector<double>& p) {
  double c = 0.0;
  for (std::size_t y = 0; y < p.size(); ++y)
    if (p[y] > 0.0) c += p[y] * loss_on_scores(loss, s, y);
  return c;
}

double conditional_error(const LossSpec& loss, const Hypothesis& h,
                         const DiscreteDistribution& d, std::size_t i) {
  if (is_pair_loss(loss)) throw ContractError("pair losses use pair_conditional_error");
  if (std::holds_alternative<loss::Constrained>(loss) && !h.sum_zero())
    throw ContractError("constrained loss requires a sum-zero hypothesis");
  check_conditional(loss, d.conditional(i));
  return conditional_error_scores(loss, h.scores(d, i), d.conditional(i));
}

BestInClass best_in_class_numeric(const LossSpec& loss, const std::vector<double>& p,
                                  const HypothesisSet& H) {
  if (is_pair_loss(loss)) throw ContractError("pair losses use pair_best_in_class");
  if (std::holds_alternative<hset::LinearClass>(H))
    throw UnsupportedError("LinearClass has no per-point best-in-class value");
  if (auto* b = std::get_if<hset::Bounded>(&H); b && !(b->B >= 0.0))
    throw InputError("bounded hypothesis set needs B >= 0");
  check_conditional(loss, p);
  if (is_scalar_loss(loss)) {
    double lo = -kScoreBracket, hi = kScoreBracket;
    if (auto* b = std::get_if<hset::Bounded>(&H)) {
      hi = std::min(b->B, kScoreBracket);
      lo = -hi;
    }
    auto f = [&](double u) { return conditional_error_scores(loss, {u}, p); };
    auto r = opt::grid_golden(f, lo, hi);
    return {r.value, Method::GridRefined, r.at_boundary};
  }
  return numeric_multi(loss, p, H);
}

BestInClass best_in_class_conditional(const LossSpec& loss, const std::vector<double>& p,
                                      const HypothesisSet& H) {
  if (is_pair_loss(loss)) throw ContractError("pair losses use pair_best_in_class");
  if (std::holds_alternative<hset::LinearClass>(H))
    throw UnsupportedError("LinearClass has no per-point best-in-class value");
  if (auto* b = std::get_if<hset::Bounded>(&H); b && !(b->B >= 0.0))
    throw InputError("bounded hypothesis set needs B >= 0");
  check_conditional(loss, p);
  if (std::holds_alternative<loss::Constrained>(loss) &&
      !std::holds_alternative<hset::SumZeroComplete>(H) &&
      !std::holds_alternative<hset::SymmetricComplete>(H))
    throw UnsupportedError("constrained losses need a sum-zero complete hypothesis set");
  if (auto v = closed_form(loss, p, H)) return {*v, Method::ClosedForm, false};
  return best_in_class_numeric(loss, p, H);
}

BestInClass best_in_class_conditional(const LossSpec& loss, const DiscreteDistribution& d,
                                      std::size_t i, const HypothesisSet& H) {
  return best_in_class_conditional(loss, d.conditional(i), H);
}

RegretRecord conditional_regret(const LossSpec& loss, const Hypothesis& h,
                                const DiscreteDistribution& d, std::size_t i,
                                const HypothesisSet& H) {
  RegretRecord r;
  r.x = d.id(i);
  r.conditional_error = conditional_error(loss, h, d, i);
  auto b = best_in_class_conditional(loss, d, i, H);
  r.best_in_class = b.value;
  r.method = b.method;
  r.boundary = b.boundary;
  r.regret = r.conditional_error - r.best_in_class;
  return r;
}

std::vector<RegretRecord> regret_table(const LossSpec& loss, const Hypothesis& h,
                                       const DiscreteDistribution& d, const HypothesisSet& H,
                                       unsigned workers) {
  std::vector<RegretRecord> out(d.size());
  parallel_for(d.size(), workers, [&](std::size_t i) { out[i] = conditional_regret(loss, h, d, i, H); });
  return out;
}

std::string regret_csv(const std::vector<RegretRecord>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "x,conditional_error,best_in_class,regret,method\n";
  for (const auto& r : rows)
    os << r.x << ',' << r.conditional_error << ',' << r.best_in_class << ',' << r.regret << ','
       << method_name(r.method) << '\n';
  return os.str();
}

double generalization_error(const LossSpec& loss, const Hypothesis& h,
                            const DiscreteDistribution& d) {
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0) e += d.marginal(i) * conditional_error(loss, h, d, i);
  return e;
}

double expected_regret(const LossSpec& loss, const Hypothesis& h, const DiscreteDistribution& d,
                       const HypothesisSet& H) {
  if (!is_decoupled(H))
    return generalization_error(loss, h, d) - expected_pointwise_infimum(loss, d, H);
  double e = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.marginal(i) > 0.0) e += d.marginal(i) * conditional_regret(loss, h, d, i, H).regret;
  return e;
}

namespace {

std::vector<double> augmented(const DiscreteDistribution& d, std::size_t i, bool intercept) {
  std::vector<double> x = d.point(i).features;
  if (intercept) x.push_back(1.0);
  return x;
}

const PhiSpec& linear_phi(const LossSpec& loss) {
  auto* m = std::get_if<loss::Margin>(&loss);
  if (!m) throw UnsupportedError("LinearClass supports binary margin losses only");
  auto f = m->phi.family;
  if (f != PhiFamily::Logistic && f != PhiFamily::Exp && f != PhiFamily::SqHinge)
    throw UnsupportedError("LinearClass needs a smooth convex Phi (logistic, exp, sq_hinge)");
  return m->phi;
}

}  // namespace

double expected_pointwise_infimum(const LossSpec& loss, const DiscreteDistribution& d,
                                  const HypothesisSet& H) {
  double e = 0.0;
  auto* lin = std::get_if<hset::LinearClass>(&H);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.marginal(i) <= 0.0) continue;
    if (lin) {
      if (!is_scalar_loss(loss)) throw UnsupportedError("LinearClass supports scalar losses only");
      auto x = augmented(d, i, lin->intercept);
      double radius = lin->W * opt::norm2(x);
      HypothesisSet local = std::isfinite(radius) ? HypothesisSet{hset::Bounded{radius}}
                                                  : HypothesisSet{hset::Complete{}};
      e += d.marginal(i) * best_in_class_conditional(loss, d, i, local).value;
    } else {
      e += d.marginal(i) * best_in_class_conditional(loss, d, i, H).value;
    }
  }
  return e;
}

double linear_risk(const PhiSpec& phi, const DiscreteDistribution& d,
                   const std::vector<double>& w, bool intercept) {
  double r = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto x = augmented(d, i, intercept);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    double eta = d.eta(i);
    r += d.marginal(i) * (eta * phi_eval(phi, s) + (1.0 - eta) * phi_eval(phi, -s));
  }
  return r;
}

std::vector<double> linear_risk_gradient(const PhiSpec& phi, const DiscreteDistribution& d,
                                         const std::vector<double>& w, bool intercept) {
  std::vector<double> g(w.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto x = augmented(d, i, intercept);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
    double eta = d.eta(i);
    double ds = d.marginal(i) * (eta * phi_derivative(phi, s) - (1.0 - eta) * phi_derivative(phi, -s));
    for (std::size_t j = 0; j < x.size(); ++j) g[j] += ds * x[j];
  }
  return g;
}

LinearFit minimize_linear_risk(const PhiSpec& phi, const DiscreteDistribution& d,
                               const hset::LinearClass& H, int restarts, double gradient_tol) {
  linear_phi(loss::Margin{phi});
  if (!d.is_binary()) throw UnsupportedError("LinearClass needs a binary distribution");
  if (d.feature_dim() != H.d) throw InputError("LinearClass dimension does not match the features");
  if (!(H.W > 0.0)) throw InputError("LinearClass needs W > 0");
  std::size_t dim = H.d + (H.intercept ? 1 : 0);
  opt::DescentOptions o;
  o.gradient_tol = gradient_tol;
  if (std::isfinite(H.W)) {
    double W = H.W;
    o.project = [W](std::vector<double>& w) {
      double n = opt::norm2(w);
      if (n > W)
        for (auto& v : w) v *= W / n;
    };
  }
  auto f = [&](const std::vector<double>& w) { return linear_risk(phi, d, w, H.intercept); };
  auto g = [&](const std::vector<double>& w) { return linear_risk_gradient(phi, d, w, H.intercept); };
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  LinearFit best;
  best.value = std::numeric_limits<double>::infinity();
  double best_any = best.value;
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> w0(dim, 0.0);
    if (r > 0)
      for (auto& v : w0) v = normal(rng);
    auto res = opt::gradient_descent(f, g, w0, o);
    best_any = std::min(best_any, res.value);
    if (!res.converged) continue;
    ++best.restarts_converged;
    if (res.value < best.value) {
      best.value = res.value;
      best.w = res.x;
      best.gradient_norm = res.gradient_norm;
    }
  }
  if (best.restarts_converged == 0)
    throw ConvergenceError("linear risk minimisation did not reach the gradient tolerance", best_any);
  return best;
}

double best_in_class_error(const LossSpec& loss, const DiscreteDistribution& d,
                           const HypothesisSet& H) {
  if (auto* lin = std::get_if<hset::LinearClass>(&H))
    return minimize_linear_risk(linear_phi(loss), d, *lin).value;
  return expected_pointwise_infimum(loss, d, H);
}

double estimation_error(const LossSpec& loss, const Hypothesis& h, const DiscreteDistribution& d,
                        const HypothesisSet& H) {
  return generalization_error(loss, h, d) - best_in_class_error(loss, d, H);
}

double minimizability_gap(const LossSpec& loss, const DiscreteDistribution& d,
                          const HypothesisSet& H) {
  if (is_decoupled(H)) {
    // Per-point decoupling: E* equals the expected pointwise infimum.
    expected_pointwise_infimum(loss, d, H);
    return 0.0;
  }
  return best_in_class_error(loss, d, H) - expected_pointwise_infimum(loss, d, H);
}

}  // namespace hcb
