#pragma once

// Sampled functions on 1D grids plus small quadrature helpers shared by the
// eigenfunction and wave-packet modules.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kpbox {

struct GridFunction {
  std::vector<double> x;
  std::vector<double> values;
};

inline std::vector<double> linspace(double a, double b, std::size_t count) {
  if (count < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> out(count);
  const double step = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

// Composite Simpson over uniformly spaced samples. An even sample count is
// handled by a trapezoid correction on the last interval.
inline double integrate_uniform(const std::vector<double>& x, const std::vector<double>& f) {
  if (x.size() != f.size()) throw std::invalid_argument("integrate_uniform: size mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double h = (x.back() - x.front()) / static_cast<double>(n - 1);
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  std::size_t last = (n % 2 == 1) ? n - 1 : n - 2;  // last index of the Simpson range
  double s = f[0] + f[last];
  for (std::size_t i = 1; i < last; ++i) s += f[i] * ((i % 2 == 1) ? 4.0 : 2.0);
  double total = s * h / 3.0;
  if (last != n - 1) total += 0.5 * h * (f[n - 2] + f[n - 1]);
  return total;
}

inline double integrate(const GridFunction& g) { return integrate_uniform(g.x, g.values); }

// First moment of a sampled density, normalized by its own integral.
inline double mean_abscissa(const GridFunction& density) {
  std::vector<double> weighted(density.x.size());
  for (std::size_t i = 0; i < density.x.size(); ++i) weighted[i] = density.x[i] * density.values[i];
  const double w = integrate_uniform(density.x, weighted);
  const double z = integrate(density);
  if (z <= 0.0) throw std::runtime_error("mean_abscissa: density integrates to zero");
  return w / z;
}

}  // namespace kpbox
