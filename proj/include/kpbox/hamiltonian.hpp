#pragma once

// Hamiltonian of the boxed potential in the sine basis of the hard-box well.
// Rectangular barriers and the linear tilt both have closed-form matrix
// elements, so assembly is exact up to rounding. Each unordered index pair is
// filled once and mirrored, and per-edge sine tables keep the cost at
// (number of barriers) x N^2.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "kpbox/csv.hpp"
#include "kpbox/potential.hpp"

namespace kpbox {

inline double free_level_energy(int p, double box_length) {
  if (p < 1) throw std::invalid_argument("free_level_energy: index must be >= 1");
  const double pi = std::numbers::pi;
  return pi * pi * static_cast<double>(p) * static_cast<double>(p) / (box_length * box_length);
}

// Running integral (2/L) * int_0^x sin(n pi t / L) sin(m pi t / L) dt.
inline double sine_product_integral(int n, int m, double x, double L) {
  if (n < 1 || m < 1) throw std::invalid_argument("sine_product_integral: indices must be >= 1");
  const double pi = std::numbers::pi;
  if (n == m)
    return x / L - std::sin(2.0 * pi * n * x / L) / (2.0 * pi * n);
  const double d = static_cast<double>(m - n);
  const double s = static_cast<double>(m + n);
  return std::sin(d * pi * x / L) / (pi * d) - std::sin(s * pi * x / L) / (pi * s);
}

// (2/L) * integral of sin(n pi x / L) sin(m pi x / L) over one barrier
// footprint [s - b/2, s + b/2]; symmetric in (n, m).
inline double barrier_element(int n, int m, double center, double width, double L) {
  const double lo = center - 0.5 * width;
  const double hi = center + 0.5 * width;
  if (lo < -detail::kGeomTol || hi > L + detail::kGeomTol)
    throw std::domain_error("barrier_element: support outside the box");
  return sine_product_integral(n, m, hi, L) - sine_product_integral(n, m, lo, L);
}

// Matrix element of the linear tilt slope * x.
inline double field_element(int n, int m, double slope, double L) {
  if (n < 1 || m < 1) throw std::invalid_argument("field_element: indices must be >= 1");
  if (n == m) return slope * L / 2.0;
  if ((n + m) % 2 == 0) return 0.0;
  const double pi = std::numbers::pi;
  const double diff = static_cast<double>(m) * m - static_cast<double>(n) * n;
  return -8.0 * m * n * slope * L / (pi * pi * diff * diff);
}

struct HamiltonianMatrix {
  int size = 0;
  Eigen::MatrixXd entries;  // exactly symmetric
  PotentialSpec spec;
};

inline HamiltonianMatrix assemble(const PotentialSpec& spec, int basis_size) {
  if (basis_size < 1) throw std::invalid_argument("assemble: basis size must be >= 1");
  validate(spec);
  const int N = basis_size;
  const double L = spec.box_length;
  const double pi = std::numbers::pi;

  // Signed edge table: each barrier contributes height * [F(right) - F(left)],
  // and F itself only depends on the indices through q = m - n and q = m + n.
  struct Edge {
    double weight;        // +height at the right edge, -height at the left edge
    double affine;        // x / L term of the diagonal integral
    std::vector<double> g;  // g[q] = sin(q pi x / L) / (pi q), q = 1 .. 2N
  };
  std::vector<Edge> edges;
  edges.reserve(2 * spec.barriers.size());
  for (const auto& bar : spec.barriers) {
    if (bar.height == 0.0) continue;
    for (int side = 0; side < 2; ++side) {
      const double x = (side == 0) ? bar.left() : bar.right();
      Edge e;
      e.weight = (side == 0) ? -bar.height : bar.height;
      e.affine = x / L;
      e.g.resize(static_cast<std::size_t>(2 * N) + 1, 0.0);
      for (int q = 1; q <= 2 * N; ++q) e.g[static_cast<std::size_t>(q)] = std::sin(q * pi * x / L) / (pi * q);
      edges.push_back(std::move(e));
    }
  }

  HamiltonianMatrix h;
  h.size = N;
  h.spec = spec;
  h.entries = Eigen::MatrixXd::Zero(N, N);

  for (int n = 1; n <= N; ++n) {
    double diag = free_level_energy(n, L);
    for (const auto& e : edges) diag += e.weight * (e.affine - e.g[static_cast<std::size_t>(2 * n)]);
    if (spec.field_slope != 0.0) diag += field_element(n, n, spec.field_slope, L);
    h.entries(n - 1, n - 1) = diag;
    for (int m = n + 1; m <= N; ++m) {
      double v = 0.0;
      for (const auto& e : edges)
        v += e.weight * (e.g[static_cast<std::size_t>(m - n)] - e.g[static_cast<std::size_t>(m + n)]);
      if (spec.field_slope != 0.0) v += field_element(n, m, spec.field_slope, L);
      h.entries(n - 1, m - 1) = v;
    }
  }
  // Mirror the strictly upper triangle so symmetry holds bit for bit.
  for (int n = 0; n < N; ++n)
    for (int m = n + 1; m < N; ++m) h.entries(m, n) = h.entries(n, m);
  return h;
}

inline void write_csv(const HamiltonianMatrix& h, std::ostream& os) {
  for (int i = 0; i < h.size; ++i) {
    for (int j = 0; j < h.size; ++j) {
      if (j) os << ',';
      os << format_number(h.entries(i, j));
    }
    os << '\n';
  }
}

}  // namespace kpbox
