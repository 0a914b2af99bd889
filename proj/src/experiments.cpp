#include "hcb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "hcb/common.hpp"
#include "hcb/optimize.hpp"
#include "hcb/ranking.hpp"
#include "hcb/regret.hpp"

namespace hcb {

namespace {

const PhiSpec kExp = PhiSpec::exp();
const PhiSpec kLog = PhiSpec::logistic();

// Stump values v[j][i] over the support.
std::vector<std::vector<double>> stump_table(const std::vector<Stump>& pool,
                                             const DiscreteDistribution& d) {
  std::vector<std::vector<double>> v(pool.size(), std::vector<double>(d.size()));
  for (std::size_t j = 0; j < pool.size(); ++j)
    for (std::size_t i = 0; i < d.size(); ++i) v[j][i] = pool[j].value(d.point(i).features);
  return v;
}

Hypothesis span_hypothesis(const std::vector<Stump>& pool, const std::vector<double>& c) {
  std::vector<Stump> ens;
  for (std::size_t j = 0; j < pool.size(); ++j) {
    if (c[j] == 0.0) continue;
    Stump s = pool[j];
    s.coefficient = c[j];
    ens.push_back(s);
  }
  return Hypothesis::stumps(std::move(ens));
}

void project_l1(std::vector<double>& v, double A) {
  double n1 = 0.0;
  for (double x : v) n1 += std::fabs(x);
  if (n1 <= A) return;
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::fabs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    double t = (cum - A) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (auto& x : v) x = std::copysign(std::max(std::fabs(x) - theta, 0.0), x);
}

void project_l2(std::vector<double>& w, double W) {
  double n = opt::norm2(w);
  if (n > W)
    for (auto& v : w) v *= W / n;
}

int label_sign_of(std::size_t label) { return label == 0 ? 1 : -1; }

// max |Phi'| on [-R, R].
double lipschitz_on(const PhiSpec& phi, double R) {
  constexpr int n = 2001;
  double L = 0.0;
  for (int k = 0; k < n; ++k) {
    double t = -R + 2.0 * R * k / (n - 1);
    L = std::max(L, std::fabs(phi_derivative(phi, t)));
  }
  return L;
}

double max_loss_on(const PhiSpec& phi, double R) {
  constexpr int n = 2001;
  double B = 0.0;
  for (int k = 0; k < n; ++k) B = std::max(B, phi_eval(phi, -R + 2.0 * R * k / (n - 1)));
  return B;
}

std::vector<double> augmented_features(const DiscreteDistribution& d, std::size_t i, bool intercept) {
  auto x = d.point(i).features;
  if (intercept) x.push_back(1.0);
  return x;
}

}  // namespace

std::vector<Stump> make_stump_pool(const DiscreteDistribution& d, bool include_constant) {
  if (d.feature_dim() == 0) throw InputError("stump pool needs at least one feature");
  std::vector<Stump> pool;
  for (std::size_t f = 0; f < d.feature_dim(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < d.size(); ++i) vals.push_back(d.point(i).features[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k)
      pool.push_back(Stump{f, 0.5 * (vals[k] + vals[k + 1]), 1.0, -1.0, 0.0});
  }
  if (include_constant)
    pool.push_back(Stump{0, std::numeric_limits<double>::max(), 1.0, 1.0, 0.0});
  return pool;
}

std::vector<Hypothesis> train_boosting(const DiscreteDistribution& d, const std::vector<Stump>& pool,
                                       int iterations, std::uint64_t seed) {
  if (pool.empty()) throw InputError("boosting needs a non-empty stump pool");
  if (!d.is_binary()) throw ContractError("boosting needs a binary distribution");
  if (iterations < 0) throw InputError("iterations must be non-negative");
  for (const auto& s : pool)
    if (std::fabs(s.left) != 1.0 || std::fabs(s.right) != 1.0)
      throw InputError("boosting stumps must take values in {-1, +1}");

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto v = stump_table(pool, d);

  std::vector<double> f(d.size(), 0.0);
  std::vector<Stump> ens;
  std::vector<Hypothesis> traj{Hypothesis::stumps({})};
  for (int it = 0; it < iterations; ++it) {
    std::size_t best = order[0];
    double best_val = std::numeric_limits<double>::infinity();
    double best_wc = 0.0, best_ww = 0.0;
    for (std::size_t j : order) {
      double wc = 0.0, ww = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        double m = d.marginal(i), eta = d.eta(i);
        double wp = m * eta * std::exp(-f[i]);
        double wn = m * (1.0 - eta) * std::exp(f[i]);
        if (v[j][i] > 0.0) {
          wc += wp;
          ww += wn;
        } else {
          wc += wn;
          ww += wp;
        }
      }
      double val = 2.0 * std::sqrt(wc * ww);
      if (val < best_val) {
        best_val = val;
        best = j;
        best_wc = wc;
        best_ww = ww;
      }
    }
    double alpha;
    if (best_ww <= 0.0 && best_wc <= 0.0) alpha = 0.0;
    else if (best_ww <= 0.0) alpha = kBoostingStepCap;
    else if (best_wc <= 0.0) alpha = -kBoostingStepCap;
    else alpha = std::clamp(0.5 * std::log(best_wc / best_ww), -kBoostingStepCap, kBoostingStepCap);
    Stump s = pool[best];
    s.coefficient = alpha;
    ens.push_back(s);
    for (std::size_t i = 0; i < d.size(); ++i) f[i] += alpha * v[best][i];
    traj.push_back(Hypothesis::stumps(ens));
  }
  return traj;
}

double logistic_objective(const DiscreteDistribution& d, const std::vector<double>& w) {
  return linear_risk(kLog, d, w, true);
}

std::vector<double> logistic_gradient(const DiscreteDistribution& d, const std::vector<double>& w) {
  return linear_risk_gradient(kLog, d, w, true);
}

std::vector<Hypothesis> train_logistic(const DiscreteDistribution& d, int iterations,
                                       const StepPolicy& policy, double gradient_tol) {
  if (!d.is_binary()) throw ContractError("logistic training needs a binary distribution");
  if (iterations < 0) throw InputError("iterations must be non-negative");
  if (!(policy.step > 0.0)) throw InputError("step must be positive");
  std::vector<double> w(d.feature_dim() + 1, 0.0);
  std::vector<Hypothesis> traj{Hypothesis::linear({w}, true)};
  double fx = logistic_objective(d, w);
  double t0 = policy.step;
  for (int it = 0; it < iterations; ++it) {
    auto g = logistic_gradient(d, w);
    double gn = opt::norm2(g);
    if (gn <= gradient_tol) break;
    std::vector<double> wn(w.size());
    double t = t0, fn = fx;
    for (;;) {
      for (std::size_t k = 0; k < w.size(); ++k) wn[k] = w[k] - t * g[k];
      fn = logistic_objective(d, wn);
      if (policy.kind == StepPolicy::Kind::Fixed) break;
      if (fn <= fx - 1e-4 * t * gn * gn) break;
      t *= 0.5;
      if (t < 1e-300) {
        wn = w;
        fn = fx;
        break;
      }
    }
    if (policy.kind == StepPolicy::Kind::Backtracking) t0 = std::min(2.0 * t, 1e6);
    w = wn;
    fx = fn;
    traj.push_back(Hypothesis::linear({w}, true));
  }
  return traj;
}

std::vector<TrajectoryPoint> audit_trajectory(const std::vector<Hypothesis>& trajectory,
                                              const DiscreteDistribution& d, TrajectoryBound which,
                                              const BoundOptions& options) {
  const PhiSpec& phi = which == TrajectoryBound::ExpBound ? kExp : kLog;
  std::vector<TrajectoryPoint> out;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& h = trajectory[k];
    auto rep = which == TrajectoryBound::ExpBound ? exp_ranking_bound(h, d, options)
                                                  : log_ranking_bound(h, d, options);
    TrajectoryPoint p;
    p.iteration = static_cast<int>(k);
    p.surrogate_estimation_error = expected_regret(loss::Margin{phi}, h, d, hset::Complete{});
    p.pair_estimation_error = rep.lhs;
    p.bound_rhs = rep.rhs;
    p.slack = rep.slack;
    out.push_back(p);
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,surrogate_err,pair_err,bound_rhs,slack\n";
  for (const auto& r : rows)
    os << r.iteration << ',' << r.surrogate_estimation_error << ',' << r.pair_estimation_error
       << ',' << r.bound_rhs << ',' << r.slack << '\n';
  return os.str();
}

SpanFit fit_stump_span(const PhiSpec& phi, const DiscreteDistribution& d,
                       const std::vector<Stump>& pool, double A) {
  if (pool.empty()) throw InputError("stump span needs a non-empty pool");
  if (!(A > 0.0)) throw InputError("stump span needs A > 0");
  if (!d.is_binary()) throw ContractError("stump span fit needs a binary distribution");
  auto v = stump_table(pool, d);
  auto scores = [&](const std::vector<double>& c) {
    std::vector<double> s(d.size(), 0.0);
    for (std::size_t j = 0; j < pool.size(); ++j)
      if (c[j] != 0.0)
        for (std::size_t i = 0; i < d.size(); ++i) s[i] += c[j] * v[j][i];
    return s;
  };
  auto f = [&](const std::vector<double>& c) {
    auto s = scores(c);
    double r = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      double eta = d.eta(i);
      r += d.marginal(i) * (eta * phi_eval(phi, s[i]) + (1.0 - eta) * phi_eval(phi, -s[i]));
    }
    return r;
  };
  auto g = [&](const std::vector<double>& c) {
    auto s = scores(c);
    std::vector<double> gr(pool.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      double eta = d.eta(i);
      double ds = d.marginal(i) * (eta * phi_derivative(phi, s[i]) - (1.0 - eta) * phi_derivative(phi, -s[i]));
      for (std::size_t j = 0; j < pool.size(); ++j) gr[j] += ds * v[j][i];
    }
    return gr;
  };
  // Stationarity on the L1 ball stalls near 1e-9 from rounding; 1e-7 leaves an
  // objective gap of order 1e-7 * A.
  opt::DescentOptions o;
  o.gradient_tol = 1e-7;
  o.max_iterations = 50000;
  o.project = [A](std::vector<double>& c) { project_l1(c, A); };
  auto res = opt::gradient_descent(f, g, std::vector<double>(pool.size(), 0.0), o);
  SpanFit out;
  out.coefficients = res.x;
  out.value = res.value;
  out.converged = res.converged;
  out.h = span_hypothesis(pool, res.x);
  return out;
}

RademacherEstimate estimate_rademacher(const PhiSpec& phi, const RademacherClass& cls,
                                       const DiscreteDistribution& d, const Sample& sample,
                                       const RademacherOptions& options) {
  if (sample.empty()) throw InputError("Rademacher estimate needs a non-empty sample");
  if (options.trials < 1) throw InputError("Rademacher estimate needs trials >= 1");
  if (!d.is_binary()) throw ContractError("Rademacher estimate covers binary margin losses");
  const std::size_t m = sample.size();
  const double inv_m = 1.0 / static_cast<double>(m);
  RademacherEstimate est;
  est.m = m;

  // Per-support multiplicities for the binomial shortcut.
  std::vector<std::size_t> count(d.size(), 0);
  for (const auto& z : sample) ++count.at(z.first);

  // Signs per sample point, or signed sums per support point in shortcut mode.
  auto signs = [&](int t) {
    std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(t)));
    std::vector<double> sig(m);
    std::bernoulli_distribution coin(0.5);
    for (auto& s : sig) s = coin(rng) ? 1.0 : -1.0;
    return sig;
  };
  auto support_sums = [&](int t) {
    std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(t)));
    std::vector<double> S(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (count[i] == 0) continue;
      std::binomial_distribution<long long> bin(static_cast<long long>(count[i]), 0.5);
      S[i] = 2.0 * static_cast<double>(bin(rng)) - static_cast<double>(count[i]);
    }
    return S;
  };
  auto sums_for = [&](int t) {
    if (m > kBinomialShortcut) return support_sums(t);
    auto sig = signs(t);
    std::vector<double> S(d.size(), 0.0);
    for (std::size_t k = 0; k < m; ++k) S[sample[k].first] += sig[k];
    return S;
  };

  double max_norm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (count[i] > 0) max_norm = std::max(max_norm, opt::norm2(augmented_features(d, i, true)));

  std::vector<double> vals(options.trials, 0.0);
  std::vector<char> ok(options.trials, 1);
  std::function<void(std::size_t)> trial;
  std::vector<double> loss_at;
  std::vector<std::vector<double>> v;

  if (auto* s = std::get_if<rclass::Singleton>(&cls)) {
    const Hypothesis& h = s->h;
    loss_at.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      loss_at[k] = phi_eval(phi, label_sign_of(sample[k].second) * h.score(d, sample[k].first));
    est.B_loss = *std::max_element(loss_at.begin(), loss_at.end());
    trial = [&](std::size_t t) {
      auto sig = signs(static_cast<int>(t));
      double v = 0.0;
      for (std::size_t k = 0; k < m; ++k) v += sig[k] * loss_at[k];
      vals[t] = v * inv_m;
    };
  } else if (auto* sp = std::get_if<rclass::StumpSpan>(&cls)) {
    if (sp->pool.empty()) throw InputError("stump span needs a non-empty pool");
    if (!(sp->A > 0.0)) throw InputError("stump span needs A > 0");
    double R = 0.0;
    for (const auto& st : sp->pool) R = std::max(R, std::max(std::fabs(st.left), std::fabs(st.right)));
    R *= sp->A;
    est.B_loss = max_loss_on(phi, R);
    v = stump_table(sp->pool, d);
    if (options.mode == RademacherMode::Contraction) {
      double L = lipschitz_on(phi, R);
      trial = [&, L, sp](std::size_t t) {
        auto S = sums_for(static_cast<int>(t));
        double best = 0.0;
        for (const auto& row : v) {
          double acc = 0.0;
          for (std::size_t i = 0; i < d.size(); ++i) acc += S[i] * row[i];
          best = std::max(best, std::fabs(acc));
        }
        vals[t] = L * sp->A * best * inv_m;
      };
    } else {
      est.approximate = true;
      const std::size_t J = sp->pool.size();
      trial = [&, J, sp](std::size_t t) {
        auto sig = signs(static_cast<int>(t));
        // Signed weights per (support point, label sign).
        std::vector<double> wp(d.size(), 0.0), wn(d.size(), 0.0);
        for (std::size_t k = 0; k < m; ++k)
          (sample[k].second == 0 ? wp : wn)[sample[k].first] += sig[k] * inv_m;
        auto scores = [&](const std::vector<double>& c) {
          std::vector<double> s(d.size(), 0.0);
          for (std::size_t j = 0; j < J; ++j)
            for (std::size_t i = 0; i < d.size(); ++i) s[i] += c[j] * v[j][i];
          return s;
        };
        auto f = [&](const std::vector<double>& c) {
          auto s = scores(c);
          double r = 0.0;
          for (std::size_t i = 0; i < d.size(); ++i)
            r += wp[i] * phi_eval(phi, s[i]) + wn[i] * phi_eval(phi, -s[i]);
          return -r;
        };
        auto g = [&](const std::vector<double>& c) {
          auto s = scores(c);
          std::vector<double> gr(J, 0.0);
          for (std::size_t i = 0; i < d.size(); ++i) {
            double ds = wp[i] * phi_derivative(phi, s[i]) - wn[i] * phi_derivative(phi, -s[i]);
            for (std::size_t j = 0; j < J; ++j) gr[j] -= ds * v[j][i];
          }
          return gr;
        };
        opt::DescentOptions o;
        o.gradient_tol = 1e-8;
        o.max_iterations = 5000;
        double A = sp->A;
        o.project = [A](std::vector<double>& c) { project_l1(c, A); };
        // Starts: best vertex, zero, and three random points.
        std::vector<std::vector<double>> starts;
        std::vector<double> bestv(J, 0.0);
        double bv = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < J; ++j)
          for (double sgn : {1.0, -1.0}) {
            std::vector<double> c(J, 0.0);
            c[j] = sgn * A;
            double fv = f(c);
            if (fv < bv) {
              bv = fv;
              bestv = c;
            }
          }
        starts.push_back(bestv);
        starts.push_back(std::vector<double>(J, 0.0));
        std::mt19937_64 rng(mix_seed(options.seed ^ 0xa5a5ULL, t));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int r = 0; r < 3; ++r) {
          std::vector<double> c(J);
          for (auto& x : c) x = normal(rng);
          project_l1(c, A);
          starts.push_back(c);
        }
        double best = -bv;
        bool any = false;
        for (auto& c0 : starts) {
          auto res = opt::gradient_descent(f, g, c0, o);
          if (res.converged) any = true;
          best = std::max(best, -res.value);
        }
        vals[t] = best;
        ok[t] = any;
      };
    }
  } else {
    const auto& lc = std::get<rclass::Linear>(cls);
    if (!(lc.W > 0.0) || !std::isfinite(lc.W)) throw InputError("linear class needs finite W > 0");
    double R = lc.W * max_norm;
    est.B_loss = max_loss_on(phi, R);
    if (options.mode == RademacherMode::Contraction) {
      double L = lipschitz_on(phi, R);
      trial = [&, L](std::size_t t) {
        auto S = sums_for(static_cast<int>(t));
        std::vector<double> acc;
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (S[i] == 0.0) continue;
          auto x = augmented_features(d, i, lc.intercept);
          if (acc.empty()) acc.assign(x.size(), 0.0);
          for (std::size_t k = 0; k < x.size(); ++k) acc[k] += S[i] * x[k];
        }
        vals[t] = acc.empty() ? 0.0 : L * lc.W * opt::norm2(acc) * inv_m;
      };
    } else {
      est.approximate = true;
      trial = [&](std::size_t t) {
        auto sig = signs(static_cast<int>(t));
        std::vector<double> wp(d.size(), 0.0), wn(d.size(), 0.0);
        for (std::size_t k = 0; k < m; ++k)
          (sample[k].second == 0 ? wp : wn)[sample[k].first] += sig[k] * inv_m;
        std::size_t dim = d.feature_dim() + (lc.intercept ? 1 : 0);
        auto score = [&](const std::vector<double>& w, std::size_t i) {
          auto x = augmented_features(d, i, lc.intercept);
          double s = 0.0;
          for (std::size_t k = 0; k < dim; ++k) s += w[k] * x[k];
          return s;
        };
        auto f = [&](const std::vector<double>& w) {
          double r = 0.0;
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (wp[i] == 0.0 && wn[i] == 0.0) continue;
            double s = score(w, i);
            r += wp[i] * phi_eval(phi, s) + wn[i] * phi_eval(phi, -s);
          }
          return -r;
        };
        auto g = [&](const std::vector<double>& w) {
          std::vector<double> gr(dim, 0.0);
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (wp[i] == 0.0 && wn[i] == 0.0) continue;
            double s = score(w, i);
            double ds = wp[i] * phi_derivative(phi, s) - wn[i] * phi_derivative(phi, -s);
            auto x = augmented_features(d, i, lc.intercept);
            for (std::size_t k = 0; k < dim; ++k) gr[k] -= ds * x[k];
          }
          return gr;
        };
        opt::DescentOptions o;
        o.gradient_tol = 1e-8;
        o.max_iterations = 5000;
        double W = lc.W;
        o.project = [W](std::vector<double>& w) { project_l2(w, W); };
        std::mt19937_64 rng(mix_seed(options.seed ^ 0x5a5aULL, t));
        std::normal_distribution<double> normal(0.0, 1.0);
        double best = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (int r = 0; r < 5; ++r) {
          std::vector<double> w0(dim, 0.0);
          if (r > 0)
            for (auto& x : w0) x = normal(rng);
          project_l2(w0, W);
          auto res = opt::gradient_descent(f, g, w0, o);
          if (res.converged) any = true;
          best = std::max(best, -res.value);
        }
        vals[t] = best;
        ok[t] = any;
      };
    }
  }

  parallel_for(static_cast<std::size_t>(options.trials), std::max(1u, options.workers), trial);

  std::vector<double> kept;
  for (int t = 0; t < options.trials; ++t) {
    if (ok[t]) kept.push_back(vals[t]);
    else ++est.dropped;
  }
  if (est.dropped * 10 > options.trials)
    throw ConvergenceError("more than 10% of Rademacher trials failed to converge",
                           kept.empty() ? 0.0 : kept.front());
  est.trials = static_cast<int>(kept.size());
  double mean = 0.0;
  for (double v : kept) mean += v;
  mean /= static_cast<double>(kept.size());
  double var = 0.0;
  for (double v : kept) var += (v - mean) * (v - mean);
  est.value = mean;
  est.std_error =
      kept.size() > 1 ? std::sqrt(var / static_cast<double>(kept.size() - 1) / static_cast<double>(kept.size()))
                      : 0.0;
  est.min_trial = *std::min_element(kept.begin(), kept.end());
  return est;
}

std::string gen_setting_name(GenSetting s) {
  switch (s) {
    case GenSetting::Constrained: return "constrained";
    case GenSetting::TsybakovBinary: return "tsybakov-binary";
    case GenSetting::TsybakovMulti: return "tsybakov-multi";
    case GenSetting::RankExp: return "rank-exp";
    case GenSetting::RankLog: return "rank-log";
  }
  return "unknown";
}

double sample_complexity_term(double rademacher, double loss_bound, std::size_t m, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (m == 0) throw InputError("sample size must be positive");
  return 4.0 * rademacher + 2.0 * loss_bound * std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(m)));
}

BoundReport generalization_bound(GenSetting setting, const GeneralizationInputs& in,
                                 const BoundOptions& options) {
  if (!in.lhs || !in.rademacher || !in.loss_bound || !in.m)
    throw InputError("generalization bound needs lhs, rademacher, loss_bound and m");
  BoundReport rep;
  rep.bound_id = "gen-" + gen_setting_name(setting);
  double X = sample_complexity_term(*in.rademacher, *in.loss_bound, *in.m, in.delta) + in.gap;
  X = std::max(X, 0.0);
  double k = options.conclusion_scale;
  switch (setting) {
    case GenSetting::RankExp:
    case GenSetting::RankLog:
      if (!in.factor) throw InputError("ranking generalization bound needs the factor");
      rep.gamma_h = 2.0 * *in.factor;
      rep.rhs = k * rep.gamma_h * X;
      break;
    case GenSetting::TsybakovBinary:
    case GenSetting::TsybakovMulti: {
      if (!in.noise || !in.transform) throw InputError("noise generalization bound needs noise and transform");
      double s = in.transform->s;
      double e = tsybakov_exponent(s, in.noise->alpha);
      rep.gamma_h = std::pow(in.noise->c, (s - 1.0) * e);
      rep.rhs = rep.gamma_h * std::pow(std::pow(k * in.transform->scale, s) * X, e);
      break;
    }
    case GenSetting::Constrained:
      if (!in.constrained_phi || !in.lambda) throw InputError("constrained generalization bound needs phi and lambda");
      rep.rhs = k * constrained_gamma(*in.constrained_phi, X, *in.lambda, in.constants);
      break;
  }
  rep.lhs = *in.lhs;
  rep.applicable = true;
  rep.finalize(options.tol);
  return rep;
}

GeneralizationAuditResult generalization_audit(const GeneralizationAuditConfig& cfg,
                                               const BoundOptions& options) {
  if (cfg.seeds < 1) throw InputError("audit needs at least one seed");
  if (cfg.setting == GenSetting::Constrained || cfg.setting == GenSetting::TsybakovMulti)
    throw UnsupportedError("generalization audit covers rank-exp, rank-log and tsybakov-binary");
  GeneralizationAuditResult out;
  out.reports.resize(cfg.seeds);
  const bool tsy = cfg.setting == GenSetting::TsybakovBinary;
  const PhiSpec phi = cfg.setting == GenSetting::RankExp ? kExp : kLog;
  LossSpec surrogate = loss::Margin{phi};

  parallel_for(static_cast<std::size_t>(cfg.seeds), std::max(1u, cfg.workers), [&](std::size_t k) {
    std::uint64_t seed = mix_seed(cfg.base_seed, k);
    SampleConstraints sc;
    if (tsy) sc.massart_floor = cfg.massart_floor;
    auto d = sample_distribution(seed, cfg.support, 2, sc);
    auto sample = draw_sample(d, cfg.m, mix_seed(seed, 1));
    auto emp = empirical_distribution(d, sample);
    auto pool = make_stump_pool(d, true);
    auto erm = fit_stump_span(phi, emp, pool, cfg.A);
    auto pop = fit_stump_span(phi, d, pool, cfg.A);

    RademacherOptions ro;
    ro.trials = cfg.rademacher_trials;
    ro.seed = mix_seed(seed, 2);
    auto rad = estimate_rademacher(phi, rclass::StumpSpan{pool, cfg.A}, d, sample, ro);

    GeneralizationInputs in;
    in.rademacher = rad.value;
    in.loss_bound = rad.B_loss;
    in.m = cfg.m;
    in.delta = cfg.delta;
    in.gap = std::max(pop.value - expected_pointwise_infimum(surrogate, d, hset::Complete{}), 0.0);
    if (tsy) {
      in.lhs = expected_regret(loss::ZeroOneBinary{}, erm.h, d, hset::Complete{});
      in.noise = fit_tsybakov_envelope(d, cfg.tsybakov_alpha);
      in.transform = table_transform(surrogate, 2);
    } else {
      in.lhs = ranking_expected_regret(loss::RankingPair{phi}, erm.h, d);
      if (cfg.setting == GenSetting::RankExp) {
        in.factor = generalization_error(surrogate, erm.h, d);
      } else {
        double u = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) u += d.marginal(i) * std::max(d.eta(i), 1.0 - d.eta(i));
        in.factor = u;
      }
    }
    auto rep = generalization_bound(cfg.setting, in, options);
    if (!erm.converged) {
      rep.applicable = false;
      rep.note = "empirical minimiser did not converge";
      rep.finalize(options.tol);
    }
    out.reports[k] = rep;
  });

  for (const auto& r : out.reports) {
    ++out.runs;
    if (!r.applicable) ++out.inapplicable;
    else if (r.violated) ++out.violations;
  }
  int applicable = out.runs - out.inapplicable;
  out.fraction = applicable > 0 ? static_cast<double>(out.violations) / applicable : 0.0;
  return out;
}

}  // namespace hcb
