#pragma once

// Independent reference solutions used to validate the matrix method:
//  - the textbook dispersion relation of the delta-barrier lattice,
//  - a 2x2 transfer-matrix band computer for arbitrary piecewise-constant
//    unit cells,
//  - surface-state energies, the Tamm existence limit, and the semi-infinite
//    surface wavefunction of the delta-barrier model.
// Everything here is built from (psi, psi') propagation and bracketed root
// finding; none of it touches the sine-basis machinery.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kpbox/grid.hpp"

namespace kpbox {

struct Slab {
  double width = 0.0;
  double potential = 0.0;
};

struct UnitCell {
  std::vector<Slab> slabs;

  double length() const {
    double s = 0.0;
    for (const auto& sl : slabs) s += sl.width;
    return s;
  }
};

inline UnitCell kp_unit_cell(double barrier_width, double barrier_height) {
  return UnitCell{{{1.0 - barrier_width, 0.0}, {barrier_width, barrier_height}}};
}

// Cell of length 2 with barriers centered at 1/2 + u and 3/2 - u.
inline UnitCell dimer_unit_cell(double barrier_width, double barrier_height, double shift) {
  const double b = barrier_width;
  const double c1 = 0.5 + shift;
  const double c2 = 1.5 - shift;
  return UnitCell{{{c1 - 0.5 * b, 0.0},
                   {b, barrier_height},
                   {c2 - c1 - b, 0.0},
                   {b, barrier_height},
                   {2.0 - c2 - 0.5 * b, 0.0}}};
}

namespace tm {

struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

inline Mat2 operator*(const Mat2& l, const Mat2& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

// Propagates (psi, psi') across a constant-potential slab.
inline Mat2 slab_matrix(double energy, double potential, double width) {
  const double d = energy - potential;
  if (std::abs(d) * width * width < 1e-14) return {1.0, width, 0.0, 1.0};
  if (d > 0.0) {
    const double q = std::sqrt(d);
    const double s = std::sin(q * width), c = std::cos(q * width);
    return {c, s / q, -q * s, c};
  }
  const double k = std::sqrt(-d);
  const double s = std::sinh(k * width), c = std::cosh(k * width);
  return {c, s / k, k * s, c};
}

inline Mat2 cell_matrix(const UnitCell& cell, double energy) {
  Mat2 m;
  for (const auto& sl : cell.slabs) m = slab_matrix(energy, sl.potential, sl.width) * m;
  return m;
}

}  // namespace tm

// cos(k a) for the Bloch phase across one cell; |value| <= 1 marks an allowed
// energy.
inline double bloch_half_trace(const UnitCell& cell, double energy) {
  const tm::Mat2 m = tm::cell_matrix(cell, energy);
  return 0.5 * (m.a + m.d);
}

// Right-hand side of the delta-lattice dispersion relation,
// cos k = cos xi + P sin(xi)/xi with xi^2 = E (continued smoothly to E <= 0).
inline double delta_dispersion_rhs(double strength, double energy) {
  if (energy > 0.0) {
    const double xi = std::sqrt(energy);
    return std::cos(xi) + strength * std::sin(xi) / xi;
  }
  if (energy == 0.0) return 1.0 + strength;
  const double s = std::sqrt(-energy);
  return std::cosh(s) + strength * std::sinh(s) / s;
}

struct EnergyInterval {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail_oracle {

// Bisection on a boolean predicate flip between lo (state lo_val) and hi.
inline double bisect_flip(const std::function<bool(double)>& allowed, double lo, bool lo_val,
                          double hi, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (allowed(mid) == lo_val)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Bracketed bisection refined by a few secant steps.
template <class F>
double refine_root(F&& f, double lo, double hi, double xtol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0) throw std::runtime_error("refine_root: bracket does not straddle a root");
  while (hi - lo > xtol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  // Secant polish inside the final bracket.
  double x0 = lo, x1 = hi, f0 = flo, f1 = fhi;
  for (int it = 0; it < 4; ++it) {
    if (f1 == f0) break;
    const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
    if (!(x2 >= lo && x2 <= hi)) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f(x2);
    if (f1 == 0.0) break;
  }
  return x1;
}

}  // namespace detail_oracle

// Allowed-energy intervals of the periodic lattice built from `cell`,
// located by a scan uniform in sqrt(E) followed by bisection to `tol` in E.
inline std::vector<EnergyInterval> transfer_matrix_bands(const UnitCell& cell, double emax,
                                                         double tol = 1e-9,
                                                         double xi_step = 2e-3) {
  if (!(emax > 0.0)) throw std::invalid_argument("transfer_matrix_bands: emax must be positive");
  auto allowed = [&](double e) { return std::abs(bloch_half_trace(cell, e)) <= 1.0; };

  std::vector<EnergyInterval> bands;
  const double xi_max = std::sqrt(emax);
  double prev_e = 0.0;
  bool prev_allowed = allowed(prev_e);
  bool open = prev_allowed;
  double band_lo = 0.0;
  for (double xi = xi_step; xi <= xi_max + 0.5 * xi_step; xi += xi_step) {
    const double e = std::min(xi * xi, emax);
    const bool a = allowed(e);
    if (a != prev_allowed) {
      const double edge = detail_oracle::bisect_flip(allowed, prev_e, prev_allowed, e, tol);
      if (a) {
        band_lo = edge;
        open = true;
      } else {
        bands.push_back({band_lo, edge});
        open = false;
      }
    }
    prev_e = e;
    prev_allowed = a;
    if (e >= emax) break;
  }
  if (open) bands.push_back({band_lo, emax});
  return bands;
}

inline bool is_forbidden(const std::vector<EnergyInterval>& bands, double energy) {
  for (const auto& b : bands)
    if (energy >= b.lower && energy <= b.upper) return false;
  return true;
}

// Width of the forbidden interval containing `energy`; zero when the energy
// is allowed, and measured down to E = 0 below the first band. Energies above
// the last computed band report zero (unknown territory).
inline double forbidden_width_at(const std::vector<EnergyInterval>& bands, double energy) {
  if (bands.empty()) return 0.0;
  if (!is_forbidden(bands, energy)) return 0.0;
  if (energy < bands.front().lower) return bands.front().lower;
  for (std::size_t j = 0; j + 1 < bands.size(); ++j)
    if (energy > bands[j].upper && energy < bands[j + 1].lower)
      return bands[j + 1].lower - bands[j].upper;
  return 0.0;
}

// Inverts cos(k) = bloch_half_trace(E) inside a given band.
inline double bloch_energy(const UnitCell& cell, double wave_number, const EnergyInterval& band) {
  const double target = std::cos(wave_number);
  auto f = [&](double e) { return bloch_half_trace(cell, e) - target; };
  return detail_oracle::refine_root(f, band.lower, band.upper, 1e-12 * std::max(1.0, band.upper));
}

// Surface-state energies E = xi^2 of the semi-infinite delta lattice with a
// vacuum step V_vac = xi0^2: roots of
//   xi cot xi = xi0^2 / (2P) - sqrt(xi0^2 - xi^2),  0 < xi < xi0,
// kept only when the energy sits strictly inside a forbidden gap and the
// Tamm existence condition xi0^2 < xi^2 + P^2 holds (damped Bloch factor).
inline std::vector<double> surface_state_energies(double strength, double vacuum_height) {
  if (!(strength > 0.0)) throw std::invalid_argument("surface_state_energies: strength must be > 0");
  if (!(vacuum_height > 0.0)) return {};
  const double pi = std::numbers::pi;
  const double xi0 = std::sqrt(vacuum_height);
  auto g = [&](double xi) {
    return xi / std::tan(xi) - vacuum_height / (2.0 * strength) +
           std::sqrt(std::max(0.0, vacuum_height - xi * xi));
  };

  std::vector<double> energies;
  const double step = 0.01;
  int k = 0;
  while (k * pi < xi0) {
    const double lo = k * pi + 1e-9;
    const double hi = std::min((k + 1) * pi - 1e-9, xi0 - 1e-12);
    if (hi > lo) {
      double prev_x = lo;
      double prev_f = g(lo);
      for (double x = lo + step; x < hi + 0.5 * step; x += step) {
        const double xx = std::min(x, hi);
        const double fx = g(xx);
        if (std::isfinite(prev_f) && std::isfinite(fx) && prev_f * fx < 0.0) {
          const double xi = detail_oracle::refine_root(g, prev_x, xx, 1e-13);
          const double e = xi * xi;
          const bool in_gap = std::abs(delta_dispersion_rhs(strength, e)) > 1.0;
          const bool damped = vacuum_height < e + strength * strength;
          if (in_gap && damped) energies.push_back(e);
        }
        prev_x = xx;
        prev_f = fx;
        if (xx >= hi) break;
      }
    }
    ++k;
  }
  return energies;
}

// Largest vacuum potential that still admits a surface state: the first root
// xi0^2 of  sqrt(xi0^2 - P^2) cot sqrt(xi0^2 - P^2) = xi0^2/(2P) - P.
inline double tamm_limit(double strength) {
  if (!(strength > 0.0)) throw std::invalid_argument("tamm_limit: strength must be > 0");
  const double pi = std::numbers::pi;
  auto h = [&](double y) {
    return y / std::tan(y) - (y * y + strength * strength) / (2.0 * strength) + strength;
  };
  const double step = 0.01;
  double prev_x = 1e-6;
  double prev_f = h(prev_x);
  for (double y = step; y < pi - 1e-9; y += step) {
    const double fy = h(y);
    if (std::isfinite(prev_f) && std::isfinite(fy) && prev_f * fy < 0.0) {
      const double root = detail_oracle::refine_root(h, prev_x, y, 1e-13);
      return root * root + strength * strength;
    }
    prev_x = y;
    prev_f = fy;
  }
  throw std::runtime_error("tamm_limit: no root found below the first pole");
}

// Relative density R(x) of a semi-infinite-model surface state, on a grid in
// surface coordinates: the vacuum step sits at x = 0 and the barriers at
// x = 1, 2, 3, ... (a full valley between the surface and the first barrier,
// the layout whose matching equation has the quoted roots and the layout the
// boxed crystal mimics). The vacuum side decays exponentially; the crystal
// side is obtained by propagating (psi, psi') across valleys and delta kicks.
inline GridFunction delta_surface_density(double strength, double vacuum_height,
                                          const std::vector<double>& grid, int state_index = 0) {
  const std::vector<double> states = surface_state_energies(strength, vacuum_height);
  if (states.empty()) throw std::runtime_error("delta_surface_density: no surface state exists");
  if (state_index < 0 || state_index >= static_cast<int>(states.size()))
    throw std::out_of_range("delta_surface_density: state index out of range");
  const double e = states[static_cast<std::size_t>(state_index)];
  const double xi = std::sqrt(e);
  const double gamma = std::sqrt(vacuum_height - e);

  GridFunction out;
  out.x = grid;
  out.values.reserve(grid.size());

  // Forward sweep; the grid must be ascending for the piecewise propagation.
  double prev = -std::numeric_limits<double>::infinity();
  double cur = 0.0;
  double w1 = 1.0, w2 = gamma;  // (psi, psi') just right of the surface
  int kicks = 0;
  auto free_prop = [&](double dx, double& a, double& b) {
    const double c = std::cos(xi * dx), s = std::sin(xi * dx);
    const double na = a * c + b * s / xi;
    const double nb = -a * xi * s + b * c;
    a = na;
    b = nb;
  };
  for (double x : grid) {
    if (x < prev) throw std::invalid_argument("delta_surface_density: grid must be ascending");
    prev = x;
    if (x <= 0.0) {
      const double psi = std::exp(gamma * x);
      out.values.push_back(psi * psi);
      continue;
    }
    while (1.0 + kicks < x) {
      free_prop(1.0 + kicks - cur, w1, w2);
      cur = 1.0 + kicks;
      w2 += 2.0 * strength * w1;
      ++kicks;
    }
    double a = w1, b = w2;
    free_prop(x - cur, a, b);
    out.values.push_back(a * a);
  }
  return out;
}

}  // namespace kpbox
