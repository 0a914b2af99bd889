#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hcb/common.hpp"
#include "json.hpp"

namespace hcb {

using json = nlohmann::json;

struct SupportPoint {
  int id = 0;
  std::vector<double> features;
};

// Finite-support joint distribution over inputs and labels. Binary
// distributions use two labels with conditional[0] = eta(x) = P(Y=+1|x).
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<SupportPoint> support,
                       std::vector<double> marginal,
                       std::vector<std::vector<double>> conditional);

  std::size_t size() const { return support_.size(); }
  int label_count() const { return labels_; }
  std::size_t feature_dim() const { return dim_; }
  bool is_binary() const { return labels_ == 2; }

  const SupportPoint& point(std::size_t i) const { return support_.at(i); }
  int id(std::size_t i) const { return support_.at(i).id; }
  double marginal(std::size_t i) const { return marginal_.at(i); }
  const std::vector<double>& marginals() const { return marginal_; }
  const std::vector<double>& conditional(std::size_t i) const {
    return conditional_.at(i);
  }
  double eta(std::size_t i) const { return conditional_.at(i)[0]; }

  // Position of a support id; throws InputError for unknown ids.
  std::size_t index_of(int id) const;

  json to_json() const;
  static DiscreteDistribution from_json(const json& j);

 private:
  std::vector<SupportPoint> support_;
  std::vector<double> marginal_;
  std::vector<std::vector<double>> conditional_;
  int labels_ = 0;
  std::size_t dim_ = 0;
};

// +1 for label index 0, -1 for label index 1.
inline int label_sign(std::size_t label) { return label == 0 ? 1 : -1; }

// Argmax with ties resolved toward the highest index.
std::size_t argmax_highest(const std::vector<double>& v);

// Bayes label index. Binary ties (eta = 1/2) go to +1 to agree with
// sign(0) = +1; multi-class ties go to the highest index.
std::size_t bayes_label(const std::vector<double>& p);

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  double left = 1.0;   // value when x[feature] <= threshold
  double right = -1.0;
  double coefficient = 0.0;

  double value(const std::vector<double>& x) const {
    return x.at(feature) <= threshold ? left : right;
  }
};

// Scorer over the support of a distribution. Tabular tables are indexed by
// support position; linear and stump scorers read the feature vectors.
class Hypothesis {
 public:
  enum class Kind { Tabular, Linear, StumpEnsemble };

  static Hypothesis tabular(std::vector<std::vector<double>> scores,
                            bool sum_zero = false);
  static Hypothesis tabular_scalar(const std::vector<double>& scores);
  // weights[k] has feature_dim entries, plus one trailing bias when intercept.
  static Hypothesis linear(std::vector<std::vector<double>> weights,
                           bool intercept, bool sum_zero = false);
  static Hypothesis stumps(std::vector<Stump> ensemble);

  Kind kind() const { return kind_; }
  bool sum_zero() const { return sum_zero_; }
  std::size_t outputs() const;
  const std::vector<std::vector<double>>& table() const { return table_; }
  const std::vector<std::vector<double>>& weights() const { return table_; }
  bool intercept() const { return intercept_; }
  const std::vector<Stump>& ensemble() const { return stumps_; }

  std::vector<double> scores(const DiscreteDistribution& d, std::size_t i) const;
  // Scalar score; the hypothesis must have exactly one output.
  double score(const DiscreteDistribution& d, std::size_t i) const;

 private:
  Kind kind_ = Kind::Tabular;
  bool sum_zero_ = false;
  bool intercept_ = false;
  std::vector<std::vector<double>> table_;
  std::vector<Stump> stumps_;
};

// Label index predicted by h at support point i: sign rule for scalar
// scorers (sign(0) = +1), highest-index argmax otherwise.
std::size_t predict(const Hypothesis& h, const DiscreteDistribution& d,
                    std::size_t i);

struct NoiseProfile {
  double alpha = 0.0;
  double B = 1.0;        // may be +inf when alpha is close to 1
  double log_B = 0.0;
  double c = 1.0;        // B^(1-alpha) / alpha^alpha
  std::optional<double> gamma_floor;
};

// Top-1 minus top-2 conditional probability.
double margin_at(const DiscreteDistribution& d, std::size_t i);
double margin_gamma(const DiscreteDistribution& d, int id);

// Smallest B with Pr[gamma <= t] <= B t^(alpha/(1-alpha)) at every attained
// margin value t. Also records the minimum positive-mass margin as the floor.
NoiseProfile fit_tsybakov_envelope(const DiscreteDistribution& d, double alpha);

struct SampleConstraints {
  std::optional<double> massart_floor;
  std::optional<std::pair<double, double>> tsybakov;  // (alpha, B)
  bool deterministic = false;
  double concentration = 1.0;
  std::size_t feature_dim = 1;
};

// Number of reshaping rounds tried before a Tsybakov constraint is declared
// unsatisfiable.
inline constexpr int kTsybakovRetryBudget = 64;

DiscreteDistribution sample_distribution(std::uint64_t seed,
                                         std::size_t n_points, int n_labels,
                                         const SampleConstraints& c = {});

// Draws m labelled points: pairs of (support index, label index).
std::vector<std::pair<std::size_t, std::size_t>> draw_sample(
    const DiscreteDistribution& d, std::size_t m, std::uint64_t seed);

// Empirical distribution of a sample over the distinct support points it
// hits, keeping their ids and features.
DiscreteDistribution empirical_distribution(
    const DiscreteDistribution& d,
    const std::vector<std::pair<std::size_t, std::size_t>>& sample);

}  // namespace hcb
