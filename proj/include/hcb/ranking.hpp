#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcb/bounds.hpp"
#include "hcb/dist.hpp"
#include "hcb/losses.hpp"
#include "hcb/regret.hpp"

namespace hcb {

// Pair weights a = eta(x)(1 - eta(x')), b = eta(x')(1 - eta(x)).
struct PairWeights {
  double a = 0.0;
  double b = 0.0;
};
PairWeights pair_weights(const DiscreteDistribution& d, std::size_t i, std::size_t j);

struct PairRegretRecord {
  int x = 0;
  int x_prime = 0;
  double cond_error = 0.0;
  double best_in_class = 0.0;
  double regret = 0.0;
  double residual = 0.0;  // filled by pair inequality audits
};

// a L(delta; +1,-1) + b L(delta; -1,+1) with delta = h(x) - h(x').
double pair_conditional_error_ab(const LossSpec& L, double delta, double a, double b);
double pair_conditional_error(const LossSpec& L, const Hypothesis& h,
                              const DiscreteDistribution& d, std::size_t i, std::size_t j);

// Infimum over the score difference (complete set).
BestInClass pair_best_in_class(const LossSpec& L, double a, double b);
BestInClass pair_best_in_class_numeric(const LossSpec& L, double a, double b);
BestInClass pair_best_in_class(const LossSpec& L, const DiscreteDistribution& d, std::size_t i,
                               std::size_t j, const HypothesisSet& H);

PairRegretRecord pair_regret(const LossSpec& L, const Hypothesis& h,
                             const DiscreteDistribution& d, std::size_t i, std::size_t j);

// Exact double sums over support pairs, pairs (x, x) included.
double ranking_generalization_error(const LossSpec& L, const Hypothesis& h,
                                    const DiscreteDistribution& d);
double ranking_expected_regret(const LossSpec& L, const Hypothesis& h,
                               const DiscreteDistribution& d);

struct CalibrationResult {
  bool calibrated = false;
  std::optional<double> nu;
  double spread = 0.0;  // max - min of the fitted exponent over the grid
  std::string reason;
};

std::vector<double> default_calibration_grid();
// Tests Phi'(t) / Phi'(-t) = exp(-nu t) with central differences (step 1e-6).
CalibrationResult calibration_family_check(const PhiSpec& phi,
                                           const std::vector<double>& grid = default_calibration_grid(),
                                           double tol = 1e-5);

struct PairResidual {
  double lhs = 0.0;  // pair regret
  double rhs = 0.0;
  double residual = 0.0;  // rhs - lhs
};

PairResidual exp_pair_inequality(const Hypothesis& h, const DiscreteDistribution& d,
                                 std::size_t i, std::size_t j);
BoundReport exp_ranking_bound(const Hypothesis& h, const DiscreteDistribution& d,
                              const BoundOptions& options = {});
PairResidual log_pair_inequality(const Hypothesis& h, const DiscreteDistribution& d,
                                 std::size_t i, std::size_t j);
BoundReport log_ranking_bound(const Hypothesis& h, const DiscreteDistribution& d,
                              const BoundOptions& options = {});

// Residual per ordered pair for the exp or logistic pair inequality.
std::vector<PairRegretRecord> pair_audit(PhiFamily family, const Hypothesis& h,
                                         const DiscreteDistribution& d);
std::string pair_audit_csv(const std::vector<PairRegretRecord>& rows);

struct HingeCounterexample {
  DiscreteDistribution dist;
  double point_regret_x0 = 0.0;
  double point_regret_x0p = 0.0;
  double pair_regret = 0.0;
};

// Two-point instance with h = 1 everywhere; needs 1 >= eta0 > eta0p > 1/2.
HingeCounterexample hinge_counterexample(double eta0, double eta0p);
// Largest pair regret over the queried parameter pairs.
double hinge_implied_floor(const std::vector<std::pair<double, double>>& queries);

// Pointwise hypothesis dC(x, x') <= G1(a1(x') dC(x)) + G2(a2(x) dC(x')) over
// all pairs; conclusion G1(E[a1] D) + G2(E[a2] D).
BoundReport ranking_tool_bound(const TransformSpec& g1, const TransformSpec& g2,
                               const FactorSpec& a1, const FactorSpec& a2, const LossSpec& target,
                               const LossSpec& surrogate, const Hypothesis& h,
                               const DiscreteDistribution& d, const BoundOptions& options = {});

struct RankingOptimum {
  double value = 0.0;
  std::vector<double> scores;
  bool converged = false;
  bool approximate = false;
};

// Best ranking error over score tables (complete set); first score pinned.
RankingOptimum ranking_best_in_class_error(const PhiSpec& phi, const DiscreteDistribution& d);
double ranking_minimizability_gap(const PhiSpec& phi, const DiscreteDistribution& d);

}  // namespace hcb
