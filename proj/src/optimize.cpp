#include "hcb/optimize.hpp"

#include <cmath>
#include <limits>

#include "hcb/common.hpp"

namespace hcb::opt {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;

double checked(double v) {
  if (!std::isfinite(v)) throw ContractError("objective returned a non-finite value");
  return v;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

ScalarMin golden_section(const std::function<double(double)>& f, double a,
                         double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = checked(f(c));
  double fd = checked(f(d));
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = checked(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = checked(f(d));
    }
  }
  double x = 0.5 * (a + b);
  double fx = checked(f(x));
  // Return the best evaluated point; ties keep the midpoint.
  if (fc < fx) {
    x = c;
    fx = fc;
  }
  if (fd < fx) {
    x = d;
    fx = fd;
  }
  return {x, fx, false};
}

ScalarMin grid_golden(const std::function<double(double)>& f, double lo,
                      double hi, int grid_points, double tol) {
  if (hi < lo) throw InputError("grid_golden: empty bracket");
  if (hi == lo) return {lo, checked(f(lo)), true};
  int n = std::max(grid_points, 3);
  double h = (hi - lo) / (n - 1);
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double v = checked(f(lo + i * h));
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, n - 1) * h;
  ScalarMin r = golden_section(f, a, b, tol);
  if (best_v < r.value) r = {lo + best * h, best_v, false};
  r.at_boundary = best == 0 || best == n - 1;
  return r;
}

DescentResult gradient_descent_trace(const Objective& f, const Gradient& grad,
                                     Vec x, const DescentOptions& o,
                                     std::vector<Vec>* trace) {
  if (o.project) o.project(x);
  double fx = checked(f(x));
  Vec g = grad(x);
  double step = o.initial_step;

  auto stationarity = [&](const Vec& at, const Vec& gr) {
    if (!o.project) return norm2(gr);
    Vec y(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) y[i] = at[i] - gr[i];
    o.project(y);
    for (std::size_t i = 0; i < at.size(); ++i) y[i] = at[i] - y[i];
    return norm2(y);
  };

  int it = 0;
  double measure = stationarity(x, g);
  for (; it < o.max_iterations && measure > o.gradient_tol; ++it) {
    double t = step;
    Vec xn(x.size());
    double fn = fx;
    Vec gn;
    bool accepted = false;
    while (t > 1e-300) {
      for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - t * g[i];
      if (o.project) o.project(xn);
      fn = f(xn);
      if (std::isfinite(fn)) {
        Vec dx(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] - xn[i];
        double predicted = o.armijo * dot(g, dx);
        if (fn <= fx - predicted && fn < fx) {
          accepted = true;
          break;
        }
        // Near the optimum the Armijo decrease drops below rounding; accept a
        // non-increasing step that still shrinks the gradient.
        if (fn <= fx && predicted <= 1e-14 * std::max(1.0, std::fabs(fx))) {
          gn = grad(xn);
          if (stationarity(xn, gn) < 0.99 * measure) {
            accepted = true;
            break;
          }
          gn.clear();
        }
      }
      t *= o.shrink;
    }
    if (!accepted) break;
    if (gn.empty()) gn = grad(xn);
    double sy = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double s = xn[i] - x[i];
      double y = gn[i] - g[i];
      sy += s * y;
      ss += s * s;
    }
    step = sy > 0.0 ? ss / sy : 2.0 * t;
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
    measure = stationarity(x, g);
    if (trace) trace->push_back(x);
  }
  return {x, fx, measure, it, measure <= o.gradient_tol};
}

DescentResult gradient_descent(const Objective& f, const Gradient& grad, Vec x0,
                               const DescentOptions& options) {
  return gradient_descent_trace(f, grad, std::move(x0), options, nullptr);
}

}  // namespace hcb::opt
