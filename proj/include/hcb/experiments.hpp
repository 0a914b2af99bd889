#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hcb/bounds.hpp"
#include "hcb/dist.hpp"
#include "hcb/losses.hpp"

namespace hcb {

using Sample = std::vector<std::pair<std::size_t, std::size_t>>;

// Midpoint threshold stumps (+1 on the left) for every feature, plus the
// constant stump when requested.
std::vector<Stump> make_stump_pool(const DiscreteDistribution& d, bool include_constant = true);

// Largest |alpha| taken by one boosting step when a stump makes no mistakes.
inline constexpr double kBoostingStepCap = 5.0;

// Coordinate descent on the exponential risk over the pool with exact line
// search. Returns iterations + 1 hypotheses, starting at h = 0. The seed only
// permutes the pool, which decides ties.
std::vector<Hypothesis> train_boosting(const DiscreteDistribution& d, const std::vector<Stump>& pool,
                                       int iterations, std::uint64_t seed = 0);

struct StepPolicy {
  enum class Kind { Backtracking, Fixed };
  Kind kind = Kind::Backtracking;
  double step = 1.0;  // fixed step, or initial trial step for backtracking
};

// Gradient descent on the population logistic risk of a linear scorer with
// intercept, starting at w = 0. Returns iterations + 1 hypotheses; stops early
// once the gradient norm is below gradient_tol.
std::vector<Hypothesis> train_logistic(const DiscreteDistribution& d, int iterations,
                                       const StepPolicy& policy = {}, double gradient_tol = 0.0);

double logistic_objective(const DiscreteDistribution& d, const std::vector<double>& w);
std::vector<double> logistic_gradient(const DiscreteDistribution& d, const std::vector<double>& w);

enum class TrajectoryBound { ExpBound, LogBound };

struct TrajectoryPoint {
  int iteration = 0;
  double surrogate_estimation_error = 0.0;
  double pair_estimation_error = 0.0;
  double bound_rhs = 0.0;
  double slack = 0.0;
};

std::vector<TrajectoryPoint> audit_trajectory(const std::vector<Hypothesis>& trajectory,
                                              const DiscreteDistribution& d, TrajectoryBound which,
                                              const BoundOptions& options = {});
std::string trajectory_csv(const std::vector<TrajectoryPoint>& rows);

namespace rclass {
struct Singleton {
  Hypothesis h;
};
struct StumpSpan {
  std::vector<Stump> pool;
  double A = 1.0;  // L1 bound on the coefficients
};
struct Linear {
  double W = 1.0;
  bool intercept = true;
};
}  // namespace rclass

using RademacherClass = std::variant<rclass::Singleton, rclass::StumpSpan, rclass::Linear>;

// Contraction: Lipschitz constant of Phi on the score range times the exact
// empirical complexity of the hypothesis class. Direct: sup over the class of
// the signed loss average (exact on stump-span vertices for convex Phi,
// projected gradient ascent with restarts for linear classes).
enum class RademacherMode { Contraction, Direct };

struct RademacherOptions {
  int trials = 200;
  std::uint64_t seed = 0;
  RademacherMode mode = RademacherMode::Contraction;
  unsigned workers = 1;
};

struct RademacherEstimate {
  std::size_t m = 0;
  int trials = 0;
  double value = 0.0;
  double std_error = 0.0;
  double B_loss = 0.0;
  double min_trial = 0.0;
  int dropped = 0;
  bool approximate = false;
};

// Sample sizes above this use per-point binomial sign sums.
inline constexpr std::size_t kBinomialShortcut = 4096;

RademacherEstimate estimate_rademacher(const PhiSpec& phi, const RademacherClass& cls,
                                       const DiscreteDistribution& d, const Sample& sample,
                                       const RademacherOptions& options = {});

struct SpanFit {
  Hypothesis h = Hypothesis::stumps({});
  std::vector<double> coefficients;
  double value = 0.0;
  bool converged = false;
};

// Minimises the margin risk of d over {sum c_j s_j : |c|_1 <= A}.
SpanFit fit_stump_span(const PhiSpec& phi, const DiscreteDistribution& d,
                       const std::vector<Stump>& pool, double A);

enum class GenSetting { Constrained, TsybakovBinary, TsybakovMulti, RankExp, RankLog };
std::string gen_setting_name(GenSetting s);

struct GeneralizationInputs {
  std::optional<double> lhs;
  std::optional<double> rademacher;
  std::optional<double> loss_bound;
  std::optional<std::size_t> m;
  double delta = 0.05;
  double gap = 0.0;  // surrogate minimizability gap relative to the complete set
  // RankExp: E_exp(h). RankLog: E[u(X)].
  std::optional<double> factor;
  // Tsybakov settings.
  std::optional<NoiseProfile> noise;
  std::optional<TransformSpec> transform;
  // Constrained setting.
  std::optional<PhiFamily> constrained_phi;
  std::optional<double> lambda;
  GammaConstants constants = GammaConstants::Published;
};

// 4 R + 2 B sqrt(log(2 / delta) / (2 m)).
double sample_complexity_term(double rademacher, double loss_bound, std::size_t m, double delta);

BoundReport generalization_bound(GenSetting setting, const GeneralizationInputs& inputs,
                                 const BoundOptions& options = {});

struct GeneralizationAuditConfig {
  GenSetting setting = GenSetting::RankExp;
  int seeds = 100;
  std::uint64_t base_seed = 0;
  double delta = 0.05;
  std::size_t m = 200;
  std::size_t support = 20;
  double A = 2.0;
  int rademacher_trials = 200;
  double tsybakov_alpha = 0.5;
  double massart_floor = 0.3;
  unsigned workers = 1;
};

struct GeneralizationAuditResult {
  int runs = 0;
  int violations = 0;
  int inapplicable = 0;
  double fraction = 0.0;
  std::vector<BoundReport> reports;
};

// Per seed: draw a distribution and a sample, fit the empirical minimiser over
// the stump span, estimate the complexity and check the assembled bound
// against exact population quantities.
GeneralizationAuditResult generalization_audit(const GeneralizationAuditConfig& config,
                                               const BoundOptions& options = {});

}  // namespace hcb
