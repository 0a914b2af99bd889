#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/dist.hpp"
#include "hcb/losses.hpp"
#include "hcb/regret.hpp"

namespace hcb {

// Gamma(x) = offset + scale * x^(1/s); Psi is the inverse of Gamma - offset.
struct TransformSpec {
  double s = 1.0;
  double scale = 1.0;
  double offset = 0.0;

  static TransformSpec linear(double scale = 1.0) { return {1.0, scale, 0.0}; }
  static TransformSpec root(double s, double scale = 1.0) { return {s, scale, 0.0}; }

  double gamma(double x) const;
  double psi(double x) const;
  void validate() const;
};

// Prior-work style transform for a loss, used where no hypothesis-dependent
// quantity enters. Scales not stated alongside the exponent were checked
// numerically (see tests); constrained exp and squared hinge use the
// constants that hold for every label count.
TransformSpec table_transform(const LossSpec& loss, int n_labels);

namespace factor {
struct One {};
struct Const {
  double v = 1.0;
};
struct DisagreementPlusEps {
  double eps = 1e-6;
};
struct ExpectationPower {
  double s = 2.0;
  double eps = 1e-6;
};
struct ConditionalErrorOf {
  LossSpec loss;
};
struct UMax {};
}  // namespace factor

using FactorSpec = std::variant<factor::One, factor::Const, factor::DisagreementPlusEps,
                                factor::ExpectationPower, factor::ConditionalErrorOf,
                                factor::UMax>;

std::string factor_name(const FactorSpec& f);

// Factor value at every support point; throws ContractError if any value is
// not strictly positive.
std::vector<double> factor_values(const FactorSpec& f, const Hypothesis& h,
                                  const DiscreteDistribution& d);

struct BoundReport {
  std::string bound_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double gamma_h = 1.0;
  bool applicable = true;
  bool violated = false;
  int worst_point = -1;  // support id with the smallest pointwise residual
  std::vector<double> per_point;
  std::optional<double> gamma_limit;  // eps -> 0 value for DisagreementPlusEps
  double gamma_offset = 0.0;          // Gamma_1(0) + Gamma_2(0) for ranking tools
  std::string note;

  void finalize(double tol = kViolationTol);
  json to_json() const;
};

// Conclusion-side corruption used by negative controls: the Gamma scale in
// the asserted conclusion is multiplied by this factor while the hypothesis
// check keeps the true transform.
struct BoundOptions {
  double conclusion_scale = 1.0;
  double tol = kViolationTol;
};

enum class ToolMode { Convex, Concave };
enum class GammaForm { Sup, Fkg };

std::vector<double> check_pointwise_assumption(const LossSpec& target, const LossSpec& surrogate,
                                               const Hypothesis& h, const DiscreteDistribution& d,
                                               const HypothesisSet& H,
                                               const TransformSpec& transform,
                                               const FactorSpec& alpha, const FactorSpec& beta,
                                               ToolMode mode);

BoundReport evaluate_tool_bound(const LossSpec& target, const LossSpec& surrogate,
                                const Hypothesis& h, const DiscreteDistribution& d,
                                const HypothesisSet& H, const TransformSpec& transform,
                                const FactorSpec& alpha, const FactorSpec& beta, ToolMode mode,
                                GammaForm form, const BoundOptions& options = {});

// Power tool: pointwise scale * (alpha dC1)^(1/s) >= dC2 E[beta] / beta.
BoundReport evaluate_power_bound(const LossSpec& target, const LossSpec& surrogate,
                                 const Hypothesis& h, const DiscreteDistribution& d,
                                 const HypothesisSet& H, double s, const FactorSpec& alpha,
                                 const FactorSpec& beta, double scale = 1.0,
                                 const BoundOptions& options = {});

double lambda_of(const Hypothesis& h, const DiscreteDistribution& d);

enum class GammaConstants { Published, Corrected };

struct ConstrainedReport {
  BoundReport enhanced;
  BoundReport baseline;  // same Gamma with Lambda = 0
  double lambda = 0.0;
};

// Lambda-dependent Gamma for a constrained loss.
double constrained_gamma(PhiFamily family, double x, double lambda, GammaConstants constants);

// C(h, x) - inf over mu of C(h_mu, x), where h_mu moves score between the
// predicted label and the argmax label keeping their sum. Zero when the two
// labels agree. Closed forms for exp, hinge and squared hinge.
double constrained_partial_regret(PhiFamily family, const std::vector<double>& p,
                                  const std::vector<double>& scores);

ConstrainedReport constrained_enhanced_bound(const PhiSpec& phi, const Hypothesis& h,
                                             const DiscreteDistribution& d,
                                             GammaConstants constants = GammaConstants::Published,
                                             const BoundOptions& options = {});

enum class NoiseSetting { Binary, Multiclass };

// Noise-adaptive bound with Gamma(x) = scale * x^(1/s) on the surrogate.
BoundReport tsybakov_bound(NoiseSetting setting, const LossSpec& surrogate, const Hypothesis& h,
                           const DiscreteDistribution& d, const HypothesisSet& H, double s,
                           double scale, const NoiseProfile& noise,
                           const BoundOptions& options = {});

double tsybakov_exponent(double s, double alpha);

struct LemmaResiduals {
  double disagreement = 0.0;  // E[1{h != h*}]
  double margin_mass = 0.0;   // E[gamma 1{h != h*}]
  double excess = 0.0;        // E01(h) - E01(h*)
  double B = 0.0;
  double c = 0.0;
  double first = 0.0;   // c E[gamma 1]^alpha - E[1]
  double second = 0.0;  // c excess^alpha - c E[gamma 1]^alpha
};

LemmaResiduals tsybakov_lemma_check(const DiscreteDistribution& d, double alpha,
                                    const Hypothesis& h, double c_scale = 1.0);

}  // namespace hcb
