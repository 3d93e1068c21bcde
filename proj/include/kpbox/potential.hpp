#pragma once

// Piecewise-constant model potentials inside a hard-wall box: rectangular
// barriers plus an optional linear tilt. Everything is expressed in units
// with hbar^2/(2 mu) = 1 and lattice constant a = 1, so energies come out in
// hbar^2/(2 mu a^2). The infinite walls at x = 0 and x = L are implicit.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpbox {

struct Barrier {
  double center = 0.0;
  double width = 0.0;
  double height = 0.0;

  double left() const { return center - 0.5 * width; }
  double right() const { return center + 0.5 * width; }
};

// Immutable after construction; safe to share across threads.
struct PotentialSpec {
  double box_length = 0.0;
  std::vector<Barrier> barriers;  // sorted by center, pairwise non-overlapping
  double field_slope = 0.0;       // energy per unit length
};

// Finite crystal with two "vacuum" shoulders attached to the walls. The box
// length is n_barriers + 3 and the left surface sits at 1 + barrier_width/2.
struct SurfaceConfig {
  int n_barriers = 0;
  double barrier_width = 0.0;
  double barrier_height = 0.0;
  double vacuum_height = 0.0;

  double box_length() const { return static_cast<double>(n_barriers) + 3.0; }
  double surface_position() const { return 1.0 + 0.5 * barrier_width; }
};

namespace detail {
inline constexpr double kGeomTol = 1e-12;
}

inline void validate(const PotentialSpec& spec) {
  if (!(spec.box_length > 0.0))
    throw std::invalid_argument("potential: box length must be positive");
  const auto& bars = spec.barriers;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    if (!(bars[i].width > 0.0))
      throw std::invalid_argument("potential: barrier width must be positive");
    if (bars[i].left() < -detail::kGeomTol || bars[i].right() > spec.box_length + detail::kGeomTol)
      throw std::invalid_argument("potential: barrier support outside the box");
    if (i > 0 && bars[i].left() < bars[i - 1].right() - detail::kGeomTol)
      throw std::invalid_argument("potential: overlapping barriers");
  }
}

// n_barriers equally spaced cells of unit length, one centered barrier each.
inline PotentialSpec kronig_penney(int n_barriers, double width, double height) {
  if (n_barriers < 1) throw std::invalid_argument("kronig_penney: need at least one barrier");
  if (!(width > 0.0) || width >= 1.0)
    throw std::invalid_argument("kronig_penney: barrier width must lie in (0, 1)");
  if (height < 0.0) throw std::invalid_argument("kronig_penney: negative barrier height");
  PotentialSpec spec;
  spec.box_length = static_cast<double>(n_barriers);
  spec.barriers.reserve(static_cast<std::size_t>(n_barriers));
  for (int r = 1; r <= n_barriers; ++r)
    spec.barriers.push_back({-0.5 + static_cast<double>(r), width, height});
  validate(spec);
  return spec;
}

// Barriers alternately shifted right/left by `shift`, giving a unit cell of
// length 2 with barriers at 1/2 + u and 3/2 - u.
inline PotentialSpec dimerized_kp(int n_barriers, double width, double height, double shift) {
  if (n_barriers < 2 || n_barriers % 2 != 0)
    throw std::invalid_argument("dimerized_kp: barrier count must be even and >= 2");
  if (!(width > 0.0) || width >= 1.0)
    throw std::invalid_argument("dimerized_kp: barrier width must lie in (0, 1)");
  if (height < 0.0) throw std::invalid_argument("dimerized_kp: negative barrier height");
  if (shift < 0.0 || shift >= 0.5 * (1.0 - width))
    throw std::invalid_argument("dimerized_kp: shift must lie in [0, (1 - width)/2)");
  PotentialSpec spec;
  spec.box_length = static_cast<double>(n_barriers);
  spec.barriers.reserve(static_cast<std::size_t>(n_barriers));
  for (int r = 1; r <= n_barriers; ++r) {
    const double sign = (r % 2 == 0) ? 1.0 : -1.0;  // -(-1)^r
    spec.barriers.push_back({-0.5 + static_cast<double>(r) - sign * shift, width, height});
  }
  validate(spec);
  return spec;
}

// Crystal of n_barriers interior barriers at x = 2, 3, ..., n_barriers + 1,
// flanked by two vacuum barriers of width 1 + b/2 flush against the walls.
// All n_barriers + 1 valleys end up with the same width 1 - b.
inline PotentialSpec surface_kp(const SurfaceConfig& cfg) {
  if (cfg.n_barriers < 1) throw std::invalid_argument("surface_kp: need at least one barrier");
  if (!(cfg.barrier_width > 0.0) || cfg.barrier_width >= 1.0)
    throw std::invalid_argument("surface_kp: barrier width must lie in (0, 1)");
  if (cfg.barrier_height < 0.0 || cfg.vacuum_height < 0.0)
    throw std::invalid_argument("surface_kp: negative height");
  PotentialSpec spec;
  spec.box_length = cfg.box_length();
  const double vac_width = 1.0 + 0.5 * cfg.barrier_width;
  spec.barriers.push_back({0.5 * vac_width, vac_width, cfg.vacuum_height});
  for (int r = 2; r <= cfg.n_barriers + 1; ++r)
    spec.barriers.push_back({static_cast<double>(r), cfg.barrier_width, cfg.barrier_height});
  spec.barriers.push_back({spec.box_length - 0.5 * vac_width, vac_width, cfg.vacuum_height});
  validate(spec);
  return spec;
}

inline PotentialSpec with_field(PotentialSpec spec, double slope) {
  spec.field_slope = slope;
  return spec;
}

// Point evaluation. Barriers count as closed on the left and open on the
// right so that stacked evaluations are deterministic; the choice is
// measure-zero and cannot affect any integral.
inline double evaluate(const PotentialSpec& spec, double x) {
  if (x < -detail::kGeomTol || x > spec.box_length + detail::kGeomTol)
    throw std::domain_error("evaluate: position outside the box");
  double v = spec.field_slope * x;
  for (const auto& b : spec.barriers) {
    if (x < b.left()) break;
    if (x >= b.left() && x < b.right()) v += b.height;
  }
  return v;
}

}  // namespace kpbox
