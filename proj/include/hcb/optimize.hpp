#pragma once

#include <functional>
#include <vector>

namespace hcb::opt {

struct ScalarMin {
  double x;
  double value;
  bool at_boundary;  // minimizer within one grid cell of the bracket edge
};

// Golden-section search on [a, b] until the bracket is narrower than tol.
ScalarMin golden_section(const std::function<double(double)>& f, double a,
                         double b, double tol = 1e-10);

// Coarse grid over [lo, hi] followed by golden-section refinement of the
// best cell. This is the fixed numeric protocol for best-in-class values.
ScalarMin grid_golden(const std::function<double(double)>& f, double lo,
                      double hi, int grid_points = 10000, double tol = 1e-10);

using Vec = std::vector<double>;
using Objective = std::function<double(const Vec&)>;
using Gradient = std::function<Vec(const Vec&)>;
using Projection = std::function<void(Vec&)>;

struct DescentOptions {
  int max_iterations = 200000;
  double gradient_tol = 1e-9;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  Projection project;  // empty for unconstrained problems
};

struct DescentResult {
  Vec x;
  double value;
  double gradient_norm;  // projected-gradient norm when a projection is set
  int iterations;
  bool converged;
};

// Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.
// Every accepted step is a non-increase of the objective.
DescentResult gradient_descent(const Objective& f, const Gradient& grad,
                               Vec x0, const DescentOptions& options = {});

// Same, but also records the iterate after every accepted step.
DescentResult gradient_descent_trace(const Objective& f, const Gradient& grad,
                                     Vec x0, const DescentOptions& options,
                                     std::vector<Vec>* trace);

double norm2(const Vec& v);

}  // namespace hcb::opt
