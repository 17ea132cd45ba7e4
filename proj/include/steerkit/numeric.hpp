#pragma once


#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace steerkit::numeric {

struct Minimum {
  double location = 0.0;
  double value = 0.0;
};

// Golden-section search for a minimum of f on [a, b] down to bracket width tol.
inline Minimum golden_section_minimize(const std::function<double(double)>& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  Minimum best{x, fx};
  if (fc < best.value) best = {c, fc};
  if (fd < best.value) best = {d, fd};
  return best;
}

// Coarse scan over the given abscissae followed by golden-section refinement
// between the neighbours of the best grid point.
inline Minimum scan_and_refine(const std::function<double(double)>& f, const std::vector<double>& grid, double tol) {
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 == grid.size() ? best : best + 1];
  Minimum refined = golden_section_minimize(f, lo, hi, tol);
  if (best_value < refined.value) return {grid[best], best_value};
  return refined;
}

// Same for a periodic function: the refinement window wraps around.
inline Minimum periodic_scan_and_refine(const std::function<double(double)>& f, double period, int points, double tol) {
  const double step = period / points;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double v = f(i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double centre = best * step;
  Minimum refined = golden_section_minimize(f, centre - step, centre + step, tol);
  if (best_value < refined.value) return {centre, best_value};
  refined.location = std::fmod(refined.location + period, period);
  return refined;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = hi;
  return v;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
  for (auto& x : v) x = std::exp(x);
  if (n > 0) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

}  // namespace steerkit::numeric
