#pragma once

#include <string>
#include <variant>
#include <vector>

#include "hcb/dist.hpp"

namespace hcb {

enum class PhiFamily { Hinge, Logistic, Exp, SqHinge, Sigmoid, RhoMargin };

// Margin function Phi(u). `param` is k for Sigmoid and rho for RhoMargin.
struct PhiSpec {
  PhiFamily family = PhiFamily::Hinge;
  double param = 1.0;

  static PhiSpec hinge() { return {PhiFamily::Hinge, 1.0}; }
  static PhiSpec logistic() { return {PhiFamily::Logistic, 1.0}; }
  static PhiSpec exp() { return {PhiFamily::Exp, 1.0}; }
  static PhiSpec sq_hinge() { return {PhiFamily::SqHinge, 1.0}; }
  static PhiSpec sigmoid(double k = 1.0) { return {PhiFamily::Sigmoid, k}; }
  static PhiSpec rho_margin(double rho = 1.0) { return {PhiFamily::RhoMargin, rho}; }
};

double phi_eval(const PhiSpec& phi, double u);
// Closed-form derivative; at kinks the right derivative is returned.
double phi_derivative(const PhiSpec& phi, double u);
bool phi_convex(const PhiSpec& phi);
std::string phi_name(const PhiSpec& phi);

enum class CompSumFamily { SumExp, MultinomialLogistic, GCE, MAE };

namespace loss {
struct ZeroOneBinary {};
struct ZeroOneMulti {};
struct Margin {
  PhiSpec phi;
};
struct Constrained {
  PhiSpec phi;
};
struct CompSum {
  CompSumFamily family = CompSumFamily::MultinomialLogistic;
  double a = 0.5;  // GCE exponent
};
struct RankingPair {
  PhiSpec phi;
};
struct RankingZeroOne {};
}  // namespace loss

using LossSpec = std::variant<loss::ZeroOneBinary, loss::ZeroOneMulti, loss::Margin,
                              loss::Constrained, loss::CompSum, loss::RankingPair,
                              loss::RankingZeroOne>;

std::string loss_name(const LossSpec& loss);
bool is_pair_loss(const LossSpec& loss);
bool is_zero_one(const LossSpec& loss);
// Convex in the scores (zero-one and non-convex Phi report false).
bool is_convex_loss(const LossSpec& loss);

// JSON tag union: {"kind": "zero_one_binary" | "zero_one_multi" | "margin" |
// "constrained" | "comp_sum" | "ranking_pair" | "ranking_zero_one", ...}.
json loss_to_json(const LossSpec& loss);
LossSpec loss_from_json(const json& j);
json phi_to_json(const PhiSpec& phi);
PhiSpec phi_from_json(const json& j);

// Loss of a score vector at a label index (scalar scores for binary losses,
// label index 0 meaning +1).
double loss_on_scores(const LossSpec& loss, const std::vector<double>& s,
                      std::size_t label);

double loss_eval(const LossSpec& loss, const Hypothesis& h,
                 const DiscreteDistribution& d, std::size_t i, std::size_t label);

// Pair loss with signed labels y, y' in {+1, -1}.
double pair_loss_on_scores(const LossSpec& loss, double s, double s_prime, int y,
                           int y_prime);
double pair_loss_eval(const LossSpec& loss, const Hypothesis& h,
                      const DiscreteDistribution& d, std::size_t i, std::size_t j,
                      int y, int y_prime);

std::vector<double> softmax(const std::vector<double>& s);

}  // namespace hcb
