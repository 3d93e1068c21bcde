#pragma once

// Band-structure post-processing of a Spectrum: wave-number assignment,
// band/gap partitions (index based and spacing based), the extrapolated
// gap-width estimator, level tables vs crystal size, and a basis-size
// convergence helper.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kpbox/eigensolver.hpp"

namespace kpbox {

struct BandLevel {
  int index = 0;          // 1-based level number
  double wave_number = 0.0;  // k_n = n pi / L
  double energy = 0.0;
};

struct GapEstimate {
  int lower_band = 0;   // 1-based index of the band below the gap
  double width = 0.0;   // extrapolated estimate, clamped at zero
  double midpoint = 0.0;
};

struct BandStructure {
  std::vector<BandLevel> levels;
  std::vector<std::pair<int, int>> bands;  // inclusive level ranges
  std::vector<GapEstimate> gaps;
  std::vector<int> in_gap_states;  // levels excluded from every band
};

inline std::vector<BandLevel> assign_wave_numbers(const Spectrum& sp) {
  const double pi = std::numbers::pi;
  std::vector<BandLevel> out;
  out.reserve(sp.energies.size());
  for (int n = 1; n <= sp.size(); ++n)
    out.push_back({n, n * pi / sp.box_length, sp.energies[n - 1]});
  return out;
}

// Gap between the band ending at level n and the band starting at n + 1,
// improved by half-spacing extrapolation from both sides:
//   [E_{n+1} - (E_{n+2} - E_{n+1})/2] - [E_n + (E_n - E_{n-1})/2].
inline double gap_width_extrapolated(const Spectrum& sp, int n) {
  if (n - 1 < 1 || n + 2 > sp.size())
    throw std::out_of_range("gap_width_extrapolated: need levels n-1 .. n+2");
  const auto& e = sp.energies;
  const double lower = e[n - 1] + 0.5 * (e[n - 1] - e[n - 2]);
  const double upper = e[n] - 0.5 * (e[n + 1] - e[n]);
  return upper - lower;
}

namespace detail {

// Extrapolated gap edges where the flanking levels are known band members.
// top/top_in: last two levels of the lower band; bot/bot_in: first two levels
// of the upper band (all 1-based).
inline GapEstimate make_gap(const Spectrum& sp, int band_index, int top_in, int top, int bot,
                            int bot_in) {
  const auto& e = sp.energies;
  double lower = e[top - 1];
  double upper = e[bot - 1];
  if (top_in >= 1) lower += 0.5 * (e[top - 1] - e[top_in - 1]);
  if (bot_in <= sp.size()) upper -= 0.5 * (e[bot_in - 1] - e[bot - 1]);
  GapEstimate g;
  g.lower_band = band_index;
  g.width = std::max(0.0, upper - lower);
  g.midpoint = 0.5 * (lower + upper);
  return g;
}

}  // namespace detail

// Index-based grouping for a pure crystal of `cells` unit cells: band j holds
// levels (j-1)*cells + 1 .. j*cells. Only complete bands are formed.
inline BandStructure partition_by_cell_count(const Spectrum& sp, int cells, int max_bands = 0) {
  if (cells < 1) throw std::invalid_argument("partition_by_cell_count: cells must be >= 1");
  const int complete = sp.size() / cells;
  const int nbands = (max_bands > 0) ? max_bands : complete;
  if (nbands > complete)
    throw std::invalid_argument("partition_by_cell_count: not enough levels for requested bands");
  BandStructure bs;
  bs.levels = assign_wave_numbers(sp);
  for (int j = 1; j <= nbands; ++j) {
    const int first = (j - 1) * cells + 1;
    const int last = j * cells;
    bs.bands.emplace_back(first, last);
    if (j < nbands)
      bs.gaps.push_back(detail::make_gap(sp, j, last - 1, last, last + 1, last + 2));
  }
  return bs;
}

// Barrier layout hints for localization checks: positions of the left and
// right surfaces. A barrier flush against a wall marks a surface at its inner
// edge; otherwise the walls themselves act as the surfaces.
inline std::pair<double, double> surface_positions(const PotentialSpec& spec) {
  double left = 0.0;
  double right = spec.box_length;
  if (!spec.barriers.empty()) {
    if (spec.barriers.front().left() <= detail::kGeomTol) left = spec.barriers.front().right();
    if (spec.barriers.back().right() >= spec.box_length - detail::kGeomTol)
      right = spec.barriers.back().left();
  }
  return {left, right};
}

// Fraction of |psi_level|^2 lying within `range` of either surface.
inline double surface_localization(const Spectrum& sp, int level, double range = 2.0) {
  const auto [xs, xr] = surface_positions(sp.spec);
  const double L = sp.box_length;
  const std::size_t points = static_cast<std::size_t>(std::max(2000.0, 200.0 * L));
  GridFunction psi = wavefunction(sp, level, linspace(0.0, L, points));
  for (auto& v : psi.values) v *= v;
  const double total = integrate(psi);
  const double a1 = std::max(0.0, xs - range), b1 = std::min(L, xs + range);
  const double a2 = std::max(0.0, xr - range), b2 = std::min(L, xr + range);
  double inside = 0.0;
  const std::size_t win = 600;
  {
    GridFunction w = wavefunction(sp, level, linspace(a1, b1, win));
    for (auto& v : w.values) v *= v;
    inside += integrate(w);
  }
  if (a2 > b1) {  // avoid double counting when the windows overlap
    GridFunction w = wavefunction(sp, level, linspace(std::max(a2, b1), b2, win));
    for (auto& v : w.values) v *= v;
    inside += integrate(w);
  }
  return inside / total;
}

struct SpacingOptions {
  double factor = 5.0;              // boundary when spacing > factor * local median spacing
  std::size_t window = 7;           // neighborhood half-width (in spacings) for the local median
  int max_gap_state_group = 2;      // runs at most this long may become in-gap states
  double localization_fraction = 0.5;
  double localization_range = 2.0;  // lattice constants around each surface
  double top_fraction = 0.9;        // never flag gap states in the truncation-dominated tail
};

// Spacing-based band detection in two passes. Pass 1 declares a band
// boundary wherever a level spacing exceeds factor times the median of the
// surrounding spacings. Pass 2 peels off surface states: whole tiny interior
// groups, and near-degenerate runs at a group edge, both subject to the
// localization requirement (at least half of |psi|^2 within reach of a
// surface). Nearly touching a band, a surface doublet is invisible to pass 1
// but still betrayed by its internal near-degeneracy.
inline BandStructure detect_gaps_by_spacing(const Spectrum& sp, const SpacingOptions& opt) {
  const int N = sp.size();
  if (N < 4) throw std::invalid_argument("detect_gaps_by_spacing: need at least 4 levels");
  if (!(opt.factor > 1.0)) throw std::invalid_argument("detect_gaps_by_spacing: factor must be > 1");

  std::vector<double> spacing(static_cast<std::size_t>(N - 1));
  for (int i = 0; i + 1 < N; ++i)
    spacing[static_cast<std::size_t>(i)] = sp.energies[i + 1] - sp.energies[i];

  auto median_of = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return (v.size() % 2 == 1) ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  auto local_median = [&](std::size_t i) {
    std::vector<double> w;
    const std::size_t lo = (i > opt.window) ? i - opt.window : 0;
    const std::size_t hi = std::min(spacing.size(), i + opt.window + 1);
    for (std::size_t j = lo; j < hi; ++j)
      if (j != i) w.push_back(spacing[j]);
    return median_of(std::move(w));
  };

  // Pass 1: groups separated by dominant spacings.
  std::vector<std::vector<int>> groups;
  std::vector<int> current{1};
  for (int i = 1; i < N; ++i) {
    const double med = local_median(static_cast<std::size_t>(i - 1));
    if (med > 0.0 && spacing[static_cast<std::size_t>(i - 1)] > opt.factor * med) {
      groups.push_back(std::move(current));
      current.clear();
    }
    current.push_back(i + 1);
  }
  groups.push_back(std::move(current));

  const int flag_cutoff = static_cast<int>(opt.top_fraction * N);
  auto localized = [&](int lvl) {
    return lvl <= flag_cutoff &&
           surface_localization(sp, lvl, opt.localization_range) >= opt.localization_fraction;
  };

  BandStructure bs;
  bs.levels = assign_wave_numbers(sp);
  std::vector<std::pair<int, int>> ranges;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::vector<int> g = groups[gi];
    const bool interior = gi + 1 < groups.size();

    // Whole tiny interior group between two declared gaps.
    if (interior && groups.size() > 1 && static_cast<int>(g.size()) <= opt.max_gap_state_group) {
      bool all_localized = true;
      for (int lvl : g) all_localized = all_localized && localized(lvl);
      if (all_localized) {
        for (int lvl : g) bs.in_gap_states.push_back(lvl);
        continue;
      }
    }

    // Near-degenerate localized runs hugging a group edge. The run's internal
    // spacings must sit well below the median spacing of the rest of the
    // group, and every member must be surface-localized.
    auto rest_median = [&](int rest_first, int rest_last) {
      std::vector<double> rest;
      for (int lvl = rest_first; lvl < rest_last; ++lvl)
        rest.push_back(spacing[static_cast<std::size_t>(lvl - 1)]);
      return median_of(std::move(rest));
    };
    auto run_qualifies = [&](int first, int last, double med) {
      if (!(med > 0.0)) return false;
      for (int lvl = first; lvl < last; ++lvl)
        if (spacing[static_cast<std::size_t>(lvl - 1)] > med / opt.factor) return false;
      for (int lvl = first; lvl <= last; ++lvl)
        if (!localized(lvl)) return false;
      return true;
    };
    for (int len = opt.max_gap_state_group; len >= 2; --len) {
      if (static_cast<int>(g.size()) < len + 2) continue;
      const int first = g.front();
      const int last = first + len - 1;
      if (run_qualifies(first, last, rest_median(last + 1, g.back()))) {
        for (int k = 0; k < len; ++k) bs.in_gap_states.push_back(g[static_cast<std::size_t>(k)]);
        g.erase(g.begin(), g.begin() + len);
        break;
      }
    }
    // Trailing runs only count when a further gap follows (not the raw tail).
    for (int len = opt.max_gap_state_group; interior && len >= 2; --len) {
      if (static_cast<int>(g.size()) < len + 2) continue;
      const int last = g.back();
      const int first = last - len + 1;
      if (run_qualifies(first, last, rest_median(g.front(), first - 1))) {
        for (std::size_t k = g.size() - static_cast<std::size_t>(len); k < g.size(); ++k)
          bs.in_gap_states.push_back(g[k]);
        g.resize(g.size() - static_cast<std::size_t>(len));
        break;
      }
    }
    if (!g.empty()) ranges.emplace_back(g.front(), g.back());
  }
  std::sort(bs.in_gap_states.begin(), bs.in_gap_states.end());
  bs.bands = ranges;
  for (std::size_t j = 0; j + 1 < ranges.size(); ++j) {
    const auto [f0, l0] = ranges[j];
    const auto [f1, l1] = ranges[j + 1];
    bs.gaps.push_back(detail::make_gap(sp, static_cast<int>(j + 1), (l0 > f0) ? l0 - 1 : 0, l0, f1,
                                       (l1 > f1) ? f1 + 1 : sp.size() + 1));
  }
  return bs;
}

inline BandStructure detect_gaps_by_spacing(const Spectrum& sp, double factor = 5.0) {
  SpacingOptions opt;
  opt.factor = factor;
  return detect_gaps_by_spacing(sp, opt);
}

// Largest level spacing within `radius` of a nominal boundary index. Finite
// boxed crystals can hold one level more or less per band than the cell count
// (zone-edge states with antinodes on the barriers get expelled), so gap
// estimates should anchor on the actual spacing maximum.
inline int locate_band_boundary(const Spectrum& sp, int nominal, int radius = 3) {
  int best = nominal;
  double best_d = -1.0;
  for (int n = std::max(1, nominal - radius);
       n <= nominal + radius && n + 1 <= sp.size(); ++n) {
    const double d = sp.energies[static_cast<std::size_t>(n)] -
                     sp.energies[static_cast<std::size_t>(n - 1)];
    if (d > best_d) {
      best_d = d;
      best = n;
    }
  }
  return best;
}

// Levels below an energy cap for crystals of 1 .. max_cells unit cells
// (box length equal to the cell count). cap <= 0 means 1.5 * barrier height.
inline std::vector<std::pair<int, std::vector<double>>> levels_vs_cells(
    double width, double height, int max_cells, int basis_size, double energy_cap = 0.0) {
  if (max_cells < 1) throw std::invalid_argument("levels_vs_cells: max_cells must be >= 1");
  const double cap = (energy_cap > 0.0) ? energy_cap : 1.5 * height;
  std::vector<std::pair<int, std::vector<double>>> table;
  table.reserve(static_cast<std::size_t>(max_cells));
  for (int nb = 1; nb <= max_cells; ++nb) {
    const Spectrum sp = solve(assemble(kronig_penney(nb, width, height), basis_size));
    std::vector<double> kept;
    for (double e : sp.energies)
      if (e < cap) kept.push_back(e);
    table.emplace_back(nb, std::move(kept));
  }
  return table;
}

struct ConvergenceResult {
  int basis_size = 0;
  Spectrum spectrum;
};

// Doubles the basis size until the lowest `levels_wanted` energies move by
// less than rel_tol (relative); returns the smallest size that passed.
inline ConvergenceResult converge_basis_size(const PotentialSpec& spec, int levels_wanted,
                                             double rel_tol, int hard_cap = 4096) {
  if (levels_wanted < 1) throw std::invalid_argument("converge_basis_size: need levels_wanted >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("converge_basis_size: rel_tol must be > 0");
  int n = std::max(4 * levels_wanted, 10 * static_cast<int>(spec.barriers.size()));
  n = std::max(n, levels_wanted);
  Spectrum current = solve(assemble(spec, n));
  while (true) {
    if (2 * n > hard_cap)
      throw std::runtime_error("converge_basis_size: no convergence below the basis-size cap");
    Spectrum next = solve(assemble(spec, 2 * n));
    double worst = 0.0;
    for (int k = 0; k < levels_wanted; ++k) {
      const double denom = std::max(std::abs(next.energies[k]), 1e-300);
      worst = std::max(worst, std::abs(next.energies[k] - current.energies[k]) / denom);
    }
    if (worst < rel_tol) return {n, std::move(current)};
    current = std::move(next);
    n *= 2;
  }
}

}  // namespace kpbox
