#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/dist.hpp"

namespace hcb::oracle {

struct Domain1D {
  double lo = -50.0;
  double hi = 50.0;
  int grid = 10000;
  double tol = 1e-10;
};

// Grid minimum over [lo, hi] refined by golden section in the neighbouring
// cells. Throws ContractError on non-finite objective values.
double grid_infimum(const std::function<double(double)>& f, const Domain1D& domain = {});

struct DomainND {
  std::vector<double> lo;
  std::vector<double> hi;
  // Search directions; empty means the coordinate axes.
  std::vector<std::vector<double>> directions;
  std::vector<double> start;  // defaults to the origin clipped into the box
  int first_grid = 2001;      // points on the first sweep along each direction
  int local_grid = 41;        // points on later sweeps
  double tol = 1e-10;
  int max_sweeps = 5000;
};

// Coordinate descent along the given directions, each line search a grid plus
// golden-section refinement restricted to the box.
double grid_infimum(const std::function<double(const std::vector<double>&)>& f,
                    const DomainND& domain);

// A closed form paired with an independent numeric counterpart.
struct ClosedFormCase {
  double closed = 0.0;
  double oracle = 0.0;
};

std::vector<std::string> closed_form_ids();

struct EquivalenceResult {
  std::string id;
  int draws = 0;
  double max_discrepancy = 0.0;
  json to_json() const;
};

// Draws random parameters for the named closed form and records the largest
// |closed - oracle| over the draws.
EquivalenceResult closed_form_equivalence(const std::string& id, int draws, std::uint64_t seed,
                                          unsigned workers = 1);

struct AuditConfig {
  int trials = 1000;
  std::uint64_t seed = 0;
  double tolerance = kViolationTol;
  std::size_t support_min = 1;
  std::size_t support_max = 5;
  int labels_min = 2;
  int labels_max = 5;
  double conclusion_scale = 1.0;  // Gamma scale multiplier for negative controls
  unsigned workers = 1;

  void validate() const;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool applicable = true;
  bool violated = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  std::string note;
};

struct AuditResult {
  std::string bound_id;
  int trials = 0;
  int applicable = 0;
  int inapplicable = 0;
  int violations = 0;
  double worst_slack = 0.0;  // over applicable trials; +inf when none applied
  std::vector<TrialRecord> records;

  json to_json() const;
  std::string csv() const;
};

std::vector<std::string> registered_bounds();
bool is_registered(const std::string& bound_id);

// Runs config.trials seeded instances through the named checker. Trials whose
// pointwise hypothesis fails count as inapplicable, never as violations.
AuditResult audit_bound(const AuditConfig& config, const std::string& bound_id);

}  // namespace hcb::oracle
