#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/dist.hpp"

namespace hcb::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kUsage = 2;

struct RunConfig {
  std::uint64_t seed = 0;
  int trials = 1000;
  double tolerance = kViolationTol;
  unsigned workers = default_workers();
  bool emit_plot = true;
  double gamma_scale = 1.0;  // conclusion-side Gamma multiplier
  int iterations = 50;
  std::size_t support_min = 1;
  std::size_t support_max = 5;
  int labels_min = 2;
  int labels_max = 5;
  std::size_t experiment_support = 20;
  std::vector<std::string> bounds;  // restricts verify to these ids when non-empty
  std::string out = "hcb_out";
  std::string config_path;
};

// Applies a JSON config on top of cfg. Requires schema_version == 1 and
// rejects unknown keys (InputError).
void apply_config(RunConfig& cfg, const json& j);

std::vector<std::string> suite_bounds(const std::string& suite);

// 20-point binary instance with one feature used by the experiments.
DiscreteDistribution experiment_instance(std::uint64_t seed, std::size_t support = 20);

int cmd_verify(const std::string& suite, const RunConfig& cfg, std::ostream& out);
int cmd_experiment(const std::string& kind, const RunConfig& cfg, std::ostream& out);
int cmd_counterexample(double eta0, double eta0p, std::ostream& out);

// Full command-line entry point; never returns anything but 0, 1 or 2.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hcb::cli
