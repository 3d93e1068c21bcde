#pragma once

// Dense symmetric eigendecomposition of an assembled Hamiltonian, with a
// deterministic sign convention, plus evaluation of the eigenfunctions
// psi_n(x) = sum_m c_m^(n) sqrt(2/L) sin(m pi x / L) on grids.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kpbox/grid.hpp"
#include "kpbox/hamiltonian.hpp"

namespace kpbox {

struct Spectrum {
  std::vector<double> energies;  // ascending
  Eigen::MatrixXd coefficients;  // column n-1 holds the basis coefficients of level n
  double box_length = 0.0;
  PotentialSpec spec;

  int size() const { return static_cast<int>(energies.size()); }
};

// Full eigendecomposition. Column signs are fixed so that the first
// coefficient of largest magnitude in each column is positive; this keeps
// golden-file outputs reproducible across runs.
inline Spectrum solve(const HamiltonianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.entries);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensolver did not converge");
  Spectrum sp;
  sp.box_length = h.spec.box_length;
  sp.spec = h.spec;
  sp.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + h.size);
  sp.coefficients = es.eigenvectors();
  for (int c = 0; c < h.size; ++c) {
    int lead = 0;
    double best = 0.0;
    for (int r = 0; r < h.size; ++r) {
      const double a = std::abs(sp.coefficients(r, c));
      if (a > best) {
        best = a;
        lead = r;
      }
    }
    if (sp.coefficients(lead, c) < 0.0) sp.coefficients.col(c) *= -1.0;
  }
  return sp;
}

inline double eigenfunction_value(const Spectrum& sp, int level, double x) {
  if (level < 1 || level > sp.size())
    throw std::out_of_range("eigenfunction_value: level out of range");
  if (x < -detail::kGeomTol || x > sp.box_length + detail::kGeomTol)
    throw std::domain_error("eigenfunction_value: position outside the box");
  const double pi = std::numbers::pi;
  const double L = sp.box_length;
  double s = 0.0;
  for (int m = 1; m <= sp.size(); ++m)
    s += sp.coefficients(m - 1, level - 1) * std::sin(m * pi * x / L);
  return std::sqrt(2.0 / L) * s;
}

inline GridFunction wavefunction(const Spectrum& sp, int level, const std::vector<double>& grid) {
  GridFunction g;
  g.x = grid;
  g.values.reserve(grid.size());
  for (double x : grid) g.values.push_back(eigenfunction_value(sp, level, x));
  return g;
}

// R(x) = |psi_n(x)|^2 / |psi_n(x_ref)|^2; x_ref is normally a surface position.
inline GridFunction relative_density(const Spectrum& sp, int level,
                                     const std::vector<double>& grid, double x_ref) {
  const double ref = eigenfunction_value(sp, level, x_ref);
  if (std::abs(ref) < 1e-12)
    throw std::runtime_error("relative_density: eigenfunction vanishes at the reference point");
  const double denom = ref * ref;
  GridFunction g;
  g.x = grid;
  g.values.reserve(grid.size());
  for (double x : grid) {
    const double v = eigenfunction_value(sp, level, x);
    g.values.push_back(v * v / denom);
  }
  return g;
}

}  // namespace kpbox
