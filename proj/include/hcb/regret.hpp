#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hcb/dist.hpp"
#include "hcb/losses.hpp"

namespace hcb {

namespace hset {
struct Complete {};
struct SymmetricComplete {};
struct SumZeroComplete {};
struct Bounded {
  double B = 1.0;  // scores restricted to [-B, B] per coordinate
};
struct LinearClass {
  std::size_t d = 1;
  double W = 1.0;  // Euclidean norm bound on the weights; may be +inf
  bool intercept = true;
};
}  // namespace hset

using HypothesisSet = std::variant<hset::Complete, hset::SymmetricComplete,
                                   hset::SumZeroComplete, hset::Bounded,
                                   hset::LinearClass>;

std::string hset_name(const HypothesisSet& h);
bool is_decoupled(const HypothesisSet& h);

enum class Method { ClosedForm, GridRefined, ConvexSolve };
std::string method_name(Method m);

struct BestInClass {
  double value = 0.0;
  Method method = Method::ClosedForm;
  bool boundary = false;  // numeric infimum sat at the edge of the bracket
};

struct RegretRecord {
  int x = 0;
  double conditional_error = 0.0;
  double best_in_class = 0.0;
  double regret = 0.0;
  Method method = Method::ClosedForm;
  bool boundary = false;
};

// Score bracket for numeric infima.
inline constexpr double kScoreBracket = 50.0;

// sum_y p_y * loss(s, y), skipping zero-probability labels.
double conditional_error_scores(const LossSpec& loss, const std::vector<double>& s,
                                const std::vector<double>& p);
double conditional_error(const LossSpec& loss, const Hypothesis& h,
                         const DiscreteDistribution& d, std::size_t i);

// Best-in-class conditional error at a conditional vector p. Closed forms are
// used where available; other cases go through the numeric protocol.
BestInClass best_in_class_conditional(const LossSpec& loss,
                                      const std::vector<double>& p,
                                      const HypothesisSet& H);
BestInClass best_in_class_conditional(const LossSpec& loss,
                                      const DiscreteDistribution& d, std::size_t i,
                                      const HypothesisSet& H);
// Numeric protocol only, bypassing closed forms.
BestInClass best_in_class_numeric(const LossSpec& loss, const std::vector<double>& p,
                                  const HypothesisSet& H);

RegretRecord conditional_regret(const LossSpec& loss, const Hypothesis& h,
                                const DiscreteDistribution& d, std::size_t i,
                                const HypothesisSet& H);
std::vector<RegretRecord> regret_table(const LossSpec& loss, const Hypothesis& h,
                                       const DiscreteDistribution& d,
                                       const HypothesisSet& H, unsigned workers = 1);
std::string regret_csv(const std::vector<RegretRecord>& rows);

// E_l(h) = sum_x marginal(x) C_l(h, x).
double generalization_error(const LossSpec& loss, const Hypothesis& h,
                            const DiscreteDistribution& d);
// sum_x marginal(x) * regret(x): estimation error plus minimizability gap.
double expected_regret(const LossSpec& loss, const Hypothesis& h,
                       const DiscreteDistribution& d, const HypothesisSet& H);

// Pointwise infimum E_X[C*(H, x)]. For LinearClass on scalar scores this is
// the bounded-score infimum with radius W * |x~| at each point.
double expected_pointwise_infimum(const LossSpec& loss, const DiscreteDistribution& d,
                                  const HypothesisSet& H);
double best_in_class_error(const LossSpec& loss, const DiscreteDistribution& d,
                           const HypothesisSet& H);
double estimation_error(const LossSpec& loss, const Hypothesis& h,
                        const DiscreteDistribution& d, const HypothesisSet& H);
double minimizability_gap(const LossSpec& loss, const DiscreteDistribution& d,
                          const HypothesisSet& H);

struct LinearFit {
  std::vector<double> w;  // feature weights followed by the bias when present
  double value = 0.0;
  double gradient_norm = 0.0;
  int restarts_converged = 0;
};

// Minimises the binary margin risk over {w : |w| <= W}. Smooth convex Phi
// only (logistic, exp, squared hinge). Throws ConvergenceError when no
// restart meets the gradient-norm tolerance.
LinearFit minimize_linear_risk(const PhiSpec& phi, const DiscreteDistribution& d,
                               const hset::LinearClass& H, int restarts = 20,
                               double gradient_tol = 1e-9);

// Risk and gradient of the linear binary margin objective.
double linear_risk(const PhiSpec& phi, const DiscreteDistribution& d,
                   const std::vector<double>& w, bool intercept);
std::vector<double> linear_risk_gradient(const PhiSpec& phi, const DiscreteDistribution& d,
                                         const std::vector<double>& w, bool intercept);

}  // namespace hcb
