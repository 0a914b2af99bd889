#include "hcb/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>

#include "hcb/common.hpp"

namespace hcb {

namespace {

void check_simplex(const std::vector<double>& v, const char* what) {
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InputError(std::string(what) + ": negative or non-finite entry");
    s += x;
  }
  if (std::fabs(s - 1.0) > 1e-12)
    throw InputError(std::string(what) + ": entries do not sum to 1");
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(
    std::vector<SupportPoint> support, std::vector<double> marginal,
    std::vector<std::vector<double>> conditional)
    : support_(std::move(support)),
      marginal_(std::move(marginal)),
      conditional_(std::move(conditional)) {
  if (support_.empty()) throw InputError("distribution: empty support");
  if (marginal_.size() != support_.size() ||
      conditional_.size() != support_.size())
    throw InputError("distribution: support, marginal and conditional sizes differ");
  check_simplex(marginal_, "marginal");
  labels_ = static_cast<int>(conditional_[0].size());
  if (labels_ < 2) throw InputError("distribution: need at least two labels");
  for (const auto& p : conditional_) {
    if (static_cast<int>(p.size()) != labels_)
      throw InputError("conditional: label counts differ across points");
    check_simplex(p, "conditional");
  }
  dim_ = support_[0].features.size();
  std::set<int> ids;
  for (const auto& pt : support_) {
    if (!ids.insert(pt.id).second)
      throw InputError("distribution: duplicate support id " + std::to_string(pt.id));
    if (pt.features.size() != dim_)
      throw InputError("distribution: feature dimensions differ");
  }
}

std::size_t DiscreteDistribution::index_of(int id) const {
  for (std::size_t i = 0; i < support_.size(); ++i)
    if (support_[i].id == id) return i;
  throw InputError("unknown support id " + std::to_string(id));
}

json DiscreteDistribution::to_json() const {
  json sup = json::array();
  for (const auto& pt : support_)
    sup.push_back({{"id", pt.id}, {"features", pt.features}});
  return {{"support", sup}, {"marginal", marginal_}, {"conditional", conditional_}};
}

DiscreteDistribution DiscreteDistribution::from_json(const json& j) {
  try {
    std::vector<SupportPoint> sup;
    for (const auto& e : j.at("support")) {
      SupportPoint pt;
      pt.id = e.at("id").get<int>();
      if (e.contains("features")) pt.features = e.at("features").get<std::vector<double>>();
      sup.push_back(std::move(pt));
    }
    return DiscreteDistribution(std::move(sup),
                                j.at("marginal").get<std::vector<double>>(),
                                j.at("conditional").get<std::vector<std::vector<double>>>());
  } catch (const json::exception& e) {
    throw InputError(std::string("distribution json: ") + e.what());
  }
}

std::size_t argmax_highest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] >= v[best]) best = k;
  return best;
}

std::size_t bayes_label(const std::vector<double>& p) {
  if (p.size() == 2) return p[0] >= 0.5 ? 0 : 1;
  return argmax_highest(p);
}

Hypothesis Hypothesis::tabular(std::vector<std::vector<double>> scores,
                               bool sum_zero) {
  if (scores.empty()) throw InputError("tabular hypothesis: empty table");
  std::size_t n = scores[0].size();
  for (const auto& row : scores) {
    if (row.size() != n || n == 0)
      throw InputError("tabular hypothesis: ragged score table");
    if (sum_zero) {
      double s = 0.0;
      for (double v : row) s += v;
      if (std::fabs(s) > 1e-10) throw ContractError("tabular hypothesis: scores do not sum to zero");
    }
  }
  Hypothesis h;
  h.kind_ = Kind::Tabular;
  h.sum_zero_ = sum_zero;
  h.table_ = std::move(scores);
  return h;
}

Hypothesis Hypothesis::tabular_scalar(const std::vector<double>& scores) {
  std::vector<std::vector<double>> t;
  for (double s : scores) t.push_back({s});
  return tabular(std::move(t));
}

Hypothesis Hypothesis::linear(std::vector<std::vector<double>> weights,
                              bool intercept, bool sum_zero) {
  if (weights.empty()) throw InputError("linear hypothesis: no outputs");
  Hypothesis h;
  h.kind_ = Kind::Linear;
  h.intercept_ = intercept;
  h.sum_zero_ = sum_zero;
  h.table_ = std::move(weights);
  return h;
}

Hypothesis Hypothesis::stumps(std::vector<Stump> ensemble) {
  Hypothesis h;
  h.kind_ = Kind::StumpEnsemble;
  h.stumps_ = std::move(ensemble);
  return h;
}

std::size_t Hypothesis::outputs() const {
  switch (kind_) {
    case Kind::Tabular:
      return table_[0].size();
    case Kind::Linear:
      return table_.size();
    case Kind::StumpEnsemble:
      break;
  }
  return 1;
}

std::vector<double> Hypothesis::scores(const DiscreteDistribution& d,
                                       std::size_t i) const {
  std::vector<double> out;
  switch (kind_) {
    case Kind::Tabular:
      if (i >= table_.size()) throw InputError("tabular hypothesis: support index out of range");
      out = table_[i];
      break;
    case Kind::Linear: {
      const auto& x = d.point(i).features;
      out.resize(table_.size());
      for (std::size_t k = 0; k < table_.size(); ++k) {
        const auto& w = table_[k];
        if (w.size() != x.size() + (intercept_ ? 1 : 0))
          throw InputError("linear hypothesis: weight and feature dimensions differ");
        double s = intercept_ ? w.back() : 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
        out[k] = s;
      }
      break;
    }
    case Kind::StumpEnsemble: {
      const auto& x = d.point(i).features;
      double s = 0.0;
      for (const auto& st : stumps_) s += st.coefficient * st.value(x);
      out = {s};
      break;
    }
  }
  if (sum_zero_) {
    double s = 0.0;
    for (double v : out) s += v;
    if (std::fabs(s) > 1e-10) throw ContractError("sum-zero hypothesis violates its constraint");
  }
  return out;
}

double Hypothesis::score(const DiscreteDistribution& d, std::size_t i) const {
  auto s = scores(d, i);
  if (s.size() != 1) throw ContractError("scalar score requested from a multi-output hypothesis");
  return s[0];
}

std::size_t predict(const Hypothesis& h, const DiscreteDistribution& d,
                    std::size_t i) {
  auto s = h.scores(d, i);
  if (s.size() == 1) return s[0] >= 0.0 ? 0 : 1;
  return argmax_highest(s);
}

double margin_at(const DiscreteDistribution& d, std::size_t i) {
  const auto& p = d.conditional(i);
  double top = -1.0, second = -1.0;
  for (double v : p) {
    if (v > top) {
      second = top;
      top = v;
    } else if (v > second) {
      second = v;
    }
  }
  return top - second;
}

double margin_gamma(const DiscreteDistribution& d, int id) {
  return margin_at(d, d.index_of(id));
}

NoiseProfile fit_tsybakov_envelope(const DiscreteDistribution& d, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("tsybakov alpha must lie in (0,1)");
  std::map<double, double> mass;  // attained margin -> probability mass
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.marginal(i) <= 0.0) continue;
    double g = margin_at(d, i);
    if (g <= 0.0)
      throw EnvelopeError("envelope infeasible: positive mass at zero margin (support id " +
                          std::to_string(d.id(i)) + ")");
    mass[g] += d.marginal(i);
  }
  double a = alpha / (1.0 - alpha);
  double cumulative = 0.0;
  double log_b = -std::numeric_limits<double>::infinity();
  for (const auto& [t, m] : mass) {
    cumulative += m;
    log_b = std::max(log_b, std::log(cumulative) - a * std::log(t));
  }
  NoiseProfile np;
  np.alpha = alpha;
  np.log_B = log_b;
  np.B = std::exp(log_b);
  np.c = std::exp((1.0 - alpha) * log_b - alpha * std::log(alpha));
  if (!mass.empty()) np.gamma_floor = mass.begin()->first;
  return np;
}

namespace {

std::vector<double> dirichlet(std::mt19937_64& rng, int n, double conc) {
  std::vector<double> v(n);
  double s = 0.0;
  if (conc == 1.0) {
    std::exponential_distribution<double> e(1.0);
    for (auto& x : v) s += (x = e(rng));
  } else {
    std::gamma_distribution<double> g(conc, 1.0);
    for (auto& x : v) s += (x = g(rng));
  }
  if (s <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / n);
    return v;
  }
  for (auto& x : v) x /= s;
  return v;
}

// Pull p toward the one-hot vector of its top label by weight lambda. The
// margin after mixing is at least lambda.
std::vector<double> sharpen(const std::vector<double>& p, double lambda) {
  std::size_t top = argmax_highest(p);
  std::vector<double> q(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    q[k] = (1.0 - lambda) * p[k] + (k == top ? lambda : 0.0);
  return q;
}

void renormalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
}

}  // namespace

DiscreteDistribution sample_distribution(std::uint64_t seed,
                                         std::size_t n_points, int n_labels,
                                         const SampleConstraints& c) {
  if (n_points < 1 || n_labels < 2) throw InputError("sample_distribution: need n_points >= 1 and n_labels >= 2");
  if (!(c.concentration > 0.0)) throw InputError("sample_distribution: concentration must be positive");
  if (c.massart_floor && !(*c.massart_floor > 0.0 && *c.massart_floor <= 1.0))
    throw GenerationError("massart floor must lie in (0,1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<SupportPoint> sup(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    sup[i].id = static_cast<int>(i);
    sup[i].features.resize(c.feature_dim);
    for (auto& f : sup[i].features) f = unif(rng);
  }
  auto marginal = dirichlet(rng, static_cast<int>(n_points), 1.0);
  renormalize(marginal);
  std::vector<std::vector<double>> cond(n_points);
  for (auto& p : cond) {
    if (c.deterministic) {
      p.assign(n_labels, 0.0);
      p[std::uniform_int_distribution<int>(0, n_labels - 1)(rng)] = 1.0;
    } else {
      p = dirichlet(rng, n_labels, c.concentration);
    }
    if (c.massart_floor) {
      p = sharpen(p, *c.massart_floor);
      renormalize(p);
    }
  }

  if (c.tsybakov) {
    auto [alpha, bound] = *c.tsybakov;
    for (int round = 0; round <= kTsybakovRetryBudget; ++round) {
      double lambda = static_cast<double>(round) / kTsybakovRetryBudget;
      std::vector<std::vector<double>> trial(cond.size());
      for (std::size_t i = 0; i < cond.size(); ++i) {
        trial[i] = lambda > 0.0 ? sharpen(cond[i], lambda) : cond[i];
        renormalize(trial[i]);
      }
      DiscreteDistribution d(sup, marginal, trial);
      try {
        if (fit_tsybakov_envelope(d, alpha).B <= bound) return d;
      } catch (const EnvelopeError&) {
      }
    }
    throw GenerationError("tsybakov constraint unsatisfiable within the retry budget");
  }
  return DiscreteDistribution(std::move(sup), std::move(marginal), std::move(cond));
}

std::vector<std::pair<std::size_t, std::size_t>> draw_sample(
    const DiscreteDistribution& d, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> px(d.marginals().begin(), d.marginals().end());
  std::vector<std::discrete_distribution<std::size_t>> py;
  for (std::size_t i = 0; i < d.size(); ++i)
    py.emplace_back(d.conditional(i).begin(), d.conditional(i).end());
  std::vector<std::pair<std::size_t, std::size_t>> out(m);
  for (auto& s : out) {
    s.first = px(rng);
    s.second = py[s.first](rng);
  }
  return out;
}

DiscreteDistribution empirical_distribution(
    const DiscreteDistribution& d,
    const std::vector<std::pair<std::size_t, std::size_t>>& sample) {
  if (sample.empty()) throw InputError("empirical distribution of an empty sample");
  std::map<std::size_t, std::vector<double>> counts;
  for (const auto& [i, y] : sample) {
    auto& c = counts[i];
    if (c.empty()) c.assign(d.label_count(), 0.0);
    c[y] += 1.0;
  }
  std::vector<SupportPoint> sup;
  std::vector<double> marginal;
  std::vector<std::vector<double>> cond;
  for (auto& [i, c] : counts) {
    double total = 0.0;
    for (double v : c) total += v;
    sup.push_back(d.point(i));
    marginal.push_back(total / static_cast<double>(sample.size()));
    for (auto& v : c) v /= total;
    cond.push_back(c);
  }
  renormalize(marginal);
  return DiscreteDistribution(std::move(sup), std::move(marginal), std::move(cond));
}

}  // namespace hcb
