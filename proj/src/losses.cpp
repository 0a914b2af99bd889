#include "hcb/losses.hpp"

#include <algorithm>
#include <cmath>

#include "hcb/common.hpp"

namespace hcb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_param(const PhiSpec& phi) {
  if ((phi.family == PhiFamily::Sigmoid || phi.family == PhiFamily::RhoMargin) &&
      !(phi.param > 0.0))
    throw InputError("phi parameter must be positive");
}

double log_sum_exp(const std::vector<double>& s) {
  double m = *std::max_element(s.begin(), s.end());
  double acc = 0.0;
  for (double v : s) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace

double phi_eval(const PhiSpec& phi, double u) {
  check_param(phi);
  switch (phi.family) {
    case PhiFamily::Hinge:
      return std::max(0.0, 1.0 - u);
    case PhiFamily::Logistic:
      return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
    case PhiFamily::Exp:
      return std::exp(-u);
    case PhiFamily::SqHinge: {
      double m = std::max(0.0, 1.0 - u);
      return m * m;
    }
    case PhiFamily::Sigmoid:
      return 1.0 - std::tanh(phi.param * u);
    case PhiFamily::RhoMargin:
      return std::min(1.0, std::max(0.0, 1.0 - u / phi.param));
  }
  return 0.0;
}

double phi_derivative(const PhiSpec& phi, double u) {
  check_param(phi);
  switch (phi.family) {
    case PhiFamily::Hinge:
      return u < 1.0 ? -1.0 : 0.0;
    case PhiFamily::Logistic:
      return u > 0.0 ? -std::exp(-u) / (1.0 + std::exp(-u)) : -1.0 / (1.0 + std::exp(u));
    case PhiFamily::Exp:
      return -std::exp(-u);
    case PhiFamily::SqHinge:
      return -2.0 * std::max(0.0, 1.0 - u);
    case PhiFamily::Sigmoid: {
      double t = std::tanh(phi.param * u);
      return -phi.param * (1.0 - t * t);
    }
    case PhiFamily::RhoMargin:
      return (u >= 0.0 && u < phi.param) ? -1.0 / phi.param : 0.0;
  }
  return 0.0;
}

bool phi_convex(const PhiSpec& phi) {
  return phi.family != PhiFamily::Sigmoid && phi.family != PhiFamily::RhoMargin;
}

std::string phi_name(const PhiSpec& phi) {
  switch (phi.family) {
    case PhiFamily::Hinge:
      return "hinge";
    case PhiFamily::Logistic:
      return "logistic";
    case PhiFamily::Exp:
      return "exp";
    case PhiFamily::SqHinge:
      return "sq_hinge";
    case PhiFamily::Sigmoid:
      return "sigmoid";
    case PhiFamily::RhoMargin:
      return "rho_margin";
  }
  return "?";
}

json phi_to_json(const PhiSpec& phi) {
  json j = {{"family", phi_name(phi)}};
  if (phi.family == PhiFamily::Sigmoid) j["k"] = phi.param;
  if (phi.family == PhiFamily::RhoMargin) j["rho"] = phi.param;
  return j;
}

PhiSpec phi_from_json(const json& j) {
  std::string f = j.at("family").get<std::string>();
  if (f == "hinge") return PhiSpec::hinge();
  if (f == "logistic") return PhiSpec::logistic();
  if (f == "exp") return PhiSpec::exp();
  if (f == "sq_hinge") return PhiSpec::sq_hinge();
  if (f == "sigmoid") return PhiSpec::sigmoid(j.value("k", 1.0));
  if (f == "rho_margin") return PhiSpec::rho_margin(j.value("rho", 1.0));
  throw InputError("unknown phi family: " + f);
}

namespace {

const char* comp_name(CompSumFamily f) {
  switch (f) {
    case CompSumFamily::SumExp:
      return "sum_exp";
    case CompSumFamily::MultinomialLogistic:
      return "logistic";
    case CompSumFamily::GCE:
      return "gce";
    case CompSumFamily::MAE:
      return "mae";
  }
  return "?";
}

}  // namespace

std::string loss_name(const LossSpec& loss) {
  return std::visit(
      overloaded{
          [](const loss::ZeroOneBinary&) -> std::string { return "zero_one_binary"; },
          [](const loss::ZeroOneMulti&) -> std::string { return "zero_one_multi"; },
          [](const loss::Margin& m) { return "margin_" + phi_name(m.phi); },
          [](const loss::Constrained& c) { return "constrained_" + phi_name(c.phi); },
          [](const loss::CompSum& c) { return std::string("comp_sum_") + comp_name(c.family); },
          [](const loss::RankingPair& r) { return "ranking_" + phi_name(r.phi); },
          [](const loss::RankingZeroOne&) -> std::string { return "ranking_zero_one"; },
      },
      loss);
}

bool is_pair_loss(const LossSpec& loss) {
  return std::holds_alternative<loss::RankingPair>(loss) ||
         std::holds_alternative<loss::RankingZeroOne>(loss);
}

bool is_zero_one(const LossSpec& loss) {
  return std::holds_alternative<loss::ZeroOneBinary>(loss) ||
         std::holds_alternative<loss::ZeroOneMulti>(loss) ||
         std::holds_alternative<loss::RankingZeroOne>(loss);
}

bool is_convex_loss(const LossSpec& loss) {
  return std::visit(
      overloaded{
          [](const loss::Margin& m) { return phi_convex(m.phi); },
          [](const loss::Constrained& c) { return phi_convex(c.phi); },
          [](const loss::RankingPair& r) { return phi_convex(r.phi); },
          [](const loss::CompSum& c) {
            return c.family == CompSumFamily::SumExp ||
                   c.family == CompSumFamily::MultinomialLogistic;
          },
          [](const auto&) { return false; },
      },
      loss);
}

json loss_to_json(const LossSpec& loss) {
  return std::visit(
      overloaded{
          [](const loss::ZeroOneBinary&) { return json{{"kind", "zero_one_binary"}}; },
          [](const loss::ZeroOneMulti&) { return json{{"kind", "zero_one_multi"}}; },
          [](const loss::Margin& m) { return json{{"kind", "margin"}, {"phi", phi_to_json(m.phi)}}; },
          [](const loss::Constrained& c) {
            return json{{"kind", "constrained"}, {"phi", phi_to_json(c.phi)}};
          },
          [](const loss::CompSum& c) {
            json j = {{"kind", "comp_sum"}, {"family", comp_name(c.family)}};
            if (c.family == CompSumFamily::GCE) j["a"] = c.a;
            return j;
          },
          [](const loss::RankingPair& r) {
            return json{{"kind", "ranking_pair"}, {"phi", phi_to_json(r.phi)}};
          },
          [](const loss::RankingZeroOne&) { return json{{"kind", "ranking_zero_one"}}; },
      },
      loss);
}

LossSpec loss_from_json(const json& j) {
  try {
    std::string k = j.at("kind").get<std::string>();
    if (k == "zero_one_binary") return loss::ZeroOneBinary{};
    if (k == "zero_one_multi") return loss::ZeroOneMulti{};
    if (k == "margin") return loss::Margin{phi_from_json(j.at("phi"))};
    if (k == "ranking_pair") return loss::RankingPair{phi_from_json(j.at("phi"))};
    if (k == "ranking_zero_one") return loss::RankingZeroOne{};
    if (k == "constrained") {
      PhiSpec phi = phi_from_json(j.at("phi"));
      if (phi.family == PhiFamily::Logistic || phi.family == PhiFamily::Sigmoid)
        throw InputError("constrained losses support exp, hinge, sq_hinge, rho_margin");
      return loss::Constrained{phi};
    }
    if (k == "comp_sum") {
      std::string f = j.at("family").get<std::string>();
      if (f == "sum_exp") return loss::CompSum{CompSumFamily::SumExp};
      if (f == "logistic") return loss::CompSum{CompSumFamily::MultinomialLogistic};
      if (f == "mae") return loss::CompSum{CompSumFamily::MAE};
      if (f == "gce") {
        double a = j.at("a").get<double>();
        if (!(a > 0.0 && a < 1.0)) throw InputError("gce parameter a must lie in (0,1)");
        return loss::CompSum{CompSumFamily::GCE, a};
      }
      throw InputError("unknown comp_sum family: " + f);
    }
    throw InputError("unknown loss kind: " + k);
  } catch (const json::exception& e) {
    throw InputError(std::string("loss json: ") + e.what());
  }
}

std::vector<double> softmax(const std::vector<double>& s) {
  double lse = log_sum_exp(s);
  std::vector<double> q(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) q[k] = std::exp(s[k] - lse);
  return q;
}

double loss_on_scores(const LossSpec& loss, const std::vector<double>& s,
                      std::size_t label) {
  if (label >= std::max<std::size_t>(s.size(), 2))
    throw InputError("label index out of range");
  return std::visit(
      overloaded{
          [&](const loss::ZeroOneBinary&) {
            if (s.size() != 1) throw ContractError("binary zero-one loss needs a scalar score");
            std::size_t pred = s[0] >= 0.0 ? 0 : 1;
            return pred == label ? 0.0 : 1.0;
          },
          [&](const loss::ZeroOneMulti&) { return argmax_highest(s) == label ? 0.0 : 1.0; },
          [&](const loss::Margin& m) {
            if (s.size() != 1) throw ContractError("margin loss needs a scalar score");
            return phi_eval(m.phi, label_sign(label) * s[0]);
          },
          [&](const loss::Constrained& c) {
            double sum = 0.0, total = 0.0;
            for (std::size_t k = 0; k < s.size(); ++k) {
              sum += s[k];
              if (k != label) total += phi_eval(c.phi, -s[k]);
            }
            if (std::fabs(sum) > 1e-10) throw ContractError("constrained loss on scores that do not sum to zero");
            return total;
          },
          [&](const loss::CompSum& c) {
            switch (c.family) {
              case CompSumFamily::SumExp: {
                double t = 0.0;
                for (std::size_t k = 0; k < s.size(); ++k)
                  if (k != label) t += std::exp(s[k] - s[label]);
                return t;
              }
              case CompSumFamily::MultinomialLogistic:
                return log_sum_exp(s) - s[label];
              case CompSumFamily::GCE: {
                double q = std::exp(s[label] - log_sum_exp(s));
                return (1.0 - std::pow(q, c.a)) / c.a;
              }
              case CompSumFamily::MAE:
                return 1.0 - std::exp(s[label] - log_sum_exp(s));
            }
            return 0.0;
          },
          [&](const auto&) -> double {
            throw ContractError("pair losses are evaluated with pair_loss_eval");
          },
      },
      loss);
}

double loss_eval(const LossSpec& loss, const Hypothesis& h,
                 const DiscreteDistribution& d, std::size_t i, std::size_t label) {
  if (std::holds_alternative<loss::Constrained>(loss) && !h.sum_zero())
    throw ContractError("constrained loss requires a sum-zero hypothesis");
  if (label >= static_cast<std::size_t>(d.label_count()))
    throw InputError("label index out of range");
  return loss_on_scores(loss, h.scores(d, i), label);
}

double pair_loss_on_scores(const LossSpec& loss, double s, double s_prime, int y,
                           int y_prime) {
  if ((y != 1 && y != -1) || (y_prime != 1 && y_prime != -1))
    throw InputError("pair labels must be +1 or -1");
  if (y == y_prime) return 0.0;
  double t = (y - y_prime) * (s - s_prime);
  if (std::holds_alternative<loss::RankingZeroOne>(loss)) {
    if (t < 0.0) return 1.0;
    return s == s_prime ? 0.5 : 0.0;
  }
  if (auto* r = std::get_if<loss::RankingPair>(&loss)) return phi_eval(r->phi, t / 2.0);
  throw ContractError("pair_loss_eval needs a ranking loss");
}

double pair_loss_eval(const LossSpec& loss, const Hypothesis& h,
                      const DiscreteDistribution& d, std::size_t i, std::size_t j,
                      int y, int y_prime) {
  return pair_loss_on_scores(loss, h.score(d, i), h.score(d, j), y, y_prime);
}

}  // namespace hcb
