#pragma once

// Built-in verification suite behind the `selftest` CLI subcommand. Each
// check pits the matrix method against an independent route (transfer-matrix
// bands, analytic surface theory, adaptive quadrature, classical mechanics)
// at fixed tolerances and reports one pass/fail line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kpbox/bands.hpp"
#include "kpbox/dynamics.hpp"
#include "kpbox/eigensolver.hpp"
#include "kpbox/hamiltonian.hpp"
#include "kpbox/oracles.hpp"
#include "kpbox/potential.hpp"
#include "kpbox/quadrature.hpp"

namespace kpbox::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Failures {
  int count = 0;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++count;
      if (count <= 8) notes << (count > 1 ? "; " : "") << what;
    }
  }
  std::string str() const { return notes.str(); }
};

// Levels of a two-surface crystal that sit strictly inside a forbidden
// interval of the bulk dispersion, below the vacuum height, and carry at
// least half of their weight near a surface.
inline std::vector<int> in_gap_levels(const Spectrum& sp, const std::vector<EnergyInterval>& bulk,
                                      double vvac) {
  std::vector<int> out;
  for (int n = 1; n <= sp.size(); ++n) {
    const double e = sp.energies[n - 1];
    if (e <= 0.0 || e >= vvac) continue;
    if (!is_forbidden(bulk, e)) continue;
    if (surface_localization(sp, n) < 0.5) continue;
    out.push_back(n);
  }
  return out;
}

}  // namespace detail

// Fig.-2 scenario: 30 lowest levels of a 10-cell crystal vs the
// transfer-matrix bands of the infinite lattice.
inline CheckResult band_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  detail::Failures f;
  const double b = 1.0 / 6.0, v0 = 100.0;
  const int nb = 10, N = 100;
  const Spectrum sp = solve(assemble(kronig_penney(nb, b, v0), N));
  const UnitCell cell = kp_unit_cell(b, v0);
  const auto bands = transfer_matrix_bands(cell, 160.0, 1e-10, 1e-3);
  f.expect(bands.size() >= 3, "oracle found fewer than 3 bands");

  const double pi = std::numbers::pi;
  for (int n = 1; n <= 30; ++n) {
    const double e = sp.energies[n - 1];
    bool inside = false;
    for (const auto& band : bands)
      if (e >= 0.995 * band.lower && e <= 1.005 * band.upper) inside = true;
    f.expect(inside, "level " + std::to_string(n) + " outside oracle bands");
  }
  double worst = 0.0;
  for (int j = 0; j < 3 && j < static_cast<int>(bands.size()); ++j) {
    for (int pos = 3; pos <= 8; ++pos) {  // mid-band levels only
      const int n = j * nb + pos;
      const double k = n * pi / sp.box_length;
      const double eo = bloch_energy(cell, k, bands[static_cast<std::size_t>(j)]);
      const double rel = std::abs(sp.energies[n - 1] - eo) / eo;
      worst = std::max(worst, rel);
      f.expect(rel <= 0.005, "dispersion mismatch at level " + std::to_string(n));
    }
  }
  const double elapsed = detail::seconds_since(t0);
  f.expect(elapsed <= 10.0, "runtime above 10 s");
  std::ostringstream d;
  d << "worst mid-band deviation " << worst * 100.0 << "%, " << elapsed << " s";
  return {"band accuracy vs transfer-matrix oracle", f.count == 0,
          f.count ? f.str() : d.str()};
}

// Surface-state doublets of the two-surface crystal at V_vac = 50, N = 400.
inline CheckResult surface_doublets() {
  const auto t0 = std::chrono::steady_clock::now();
  detail::Failures f;
  const double P = 10.0, vvac = 50.0;
  const int N = 400;
  struct Case {
    double b;
    int nb;
    double e1a, e1b, e2a, e2b;
  };
  const std::vector<Case> cases = {
      {1.0 / 6.0, 10, 8.22, 8.23, 31.91, 31.92},  {1.0 / 6.0, 20, 8.23, 8.23, 31.92, 31.92},
      {1.0 / 12.0, 10, 7.37, 7.37, 28.99, 29.00}, {1.0 / 12.0, 20, 7.37, 7.37, 29.00, 29.00},
      {1.0 / 96.0, 10, 6.77, 6.78, 26.86, 26.86}, {1.0 / 96.0, 20, 6.83, 6.83, 27.02, 27.02}};
  std::ostringstream d;
  for (const auto& c : cases) {
    const double v0 = 2.0 * P / c.b;
    const auto bulk = transfer_matrix_bands(kp_unit_cell(c.b, v0), 160.0, 1e-10, 1e-3);
    const Spectrum sp =
        solve(assemble(surface_kp({c.nb, c.b, v0, vvac}), N));
    const auto levels = detail::in_gap_levels(sp, bulk, vvac);
    std::ostringstream tag;
    tag << "b=" << c.b << " nb=" << c.nb;
    if (levels.size() != 4) {
      f.expect(false, tag.str() + ": expected 4 in-gap states, found " +
                          std::to_string(levels.size()));
      continue;
    }
    const double got[4] = {sp.energies[levels[0] - 1], sp.energies[levels[1] - 1],
                           sp.energies[levels[2] - 1], sp.energies[levels[3] - 1]};
    const double want[4] = {c.e1a, c.e1b, c.e2a, c.e2b};
    for (int i = 0; i < 4; ++i)
      f.expect(std::abs(got[i] - want[i]) <= 0.02,
               tag.str() + ": state " + std::to_string(i + 1) + " = " + std::to_string(got[i]) +
                   ", want " + std::to_string(want[i]) + " +- 0.02");
    d << tag.str() << " -> {" << got[0] << ", " << got[1] << "} {" << got[2] << ", " << got[3]
      << "}  ";
  }
  const double elapsed = detail::seconds_since(t0);
  f.expect(elapsed <= 120.0, "runtime above 2 min");
  return {"surface-state doublets vs reference table", f.count == 0,
          f.count ? f.str() : d.str()};
}

inline CheckResult analytic_surface_oracle() {
  detail::Failures f;
  const auto states = surface_state_energies(10.0, 50.0);
  std::ostringstream d;
  if (states.size() != 2) {
    f.expect(false, "expected 2 surface states, found " + std::to_string(states.size()));
  } else {
    f.expect(std::abs(states[0] - 6.65) <= 0.01, "first state off 6.65");
    f.expect(std::abs(states[1] - 26.44) <= 0.01, "second state off 26.44");
    d << "E_s = {" << states[0] << ", " << states[1] << "}";
  }
  const double limit = tamm_limit(10.0);
  f.expect(std::abs(limit - 107.0) <= 1.0, "Tamm limit " + std::to_string(limit) + " off 107");
  d << ", Tamm limit " << limit;
  return {"analytic surface oracle", f.count == 0, f.count ? f.str() : d.str()};
}

// Largest vacuum height at which the crystal still carries one of the
// surface states under study, by bisection on full matrix runs (thin
// barriers mimicking deltas). A surviving surface state shows up as a Tamm
// doublet: two adjacent levels, both surface-localized, nearly degenerate
// compared with their spectral neighborhood (the two-surface analogue of the
// single-surface state; the doublet structure of the reference table). The
// energy cap keeps the scan on the two states discussed at V_vac = 50 rather
// than on their higher-gap siblings, which survive to much larger V_vac.
inline CheckResult numeric_tamm_limit() {
  detail::Failures f;
  const double b = 1.0 / 96.0, P = 10.0;
  const int nb = 10, N = 400;
  const double v0 = 2.0 * P / b;
  const double energy_cap = 35.0;
  auto has_doublet = [&](double vvac) {
    const Spectrum sp = solve(assemble(surface_kp({nb, b, v0, vvac}), N));
    const double cap = std::min(vvac, energy_cap);
    for (int n = 1; n + 1 <= sp.size(); ++n) {
      const double e_hi = sp.energies[static_cast<std::size_t>(n)];
      if (e_hi >= cap) break;
      const double split = e_hi - sp.energies[static_cast<std::size_t>(n - 1)];
      const double below = (n >= 2) ? sp.energies[static_cast<std::size_t>(n - 1)] -
                                          sp.energies[static_cast<std::size_t>(n - 2)]
                                    : std::numeric_limits<double>::infinity();
      const double above = (n + 2 <= sp.size())
                               ? sp.energies[static_cast<std::size_t>(n + 1)] - e_hi
                               : std::numeric_limits<double>::infinity();
      if (split >= 0.5 * std::min(below, above)) continue;  // not a near-degenerate pair
      if (surface_localization(sp, n) < 0.5) continue;
      if (surface_localization(sp, n + 1) < 0.5) continue;
      return true;
    }
    return false;
  };
  double lo = 80.0, hi = 140.0;
  if (!has_doublet(lo)) return {"numeric Tamm limit", false, "no surface doublet at V_vac = 80"};
  if (has_doublet(hi)) return {"numeric Tamm limit", false, "doublet persists at V_vac = 140"};
  while (hi - lo > 0.5) {
    const double mid = 0.5 * (lo + hi);
    (has_doublet(mid) ? lo : hi) = mid;
  }
  const double limit = 0.5 * (lo + hi);
  f.expect(std::abs(limit - 110.0) <= 5.0, "numeric limit " + std::to_string(limit) + " off 110");
  std::ostringstream d;
  d << "largest V_vac with a localized gap doublet: " << limit;
  return {"numeric Tamm limit", f.count == 0, f.count ? f.str() : d.str()};
}

// Dimerized crystal: gap widths against the dimer-cell transfer matrix, and
// exact agreement with the plain crystal at zero shift. Band boundaries are
// located by the spacing maximum near the nominal index because the boxed
// crystal can expel a zone-edge level from a band. The comparison allows 5%
// plus the discretization error of the half-spacing extrapolation at a
// parabolic band edge, which is (d_below + d_above)/6 with d the flanking
// level spacings (quarter-spacing bound used for margin).
inline CheckResult dimer_gaps() {
  detail::Failures f;
  const double b = 0.01, v0 = 100.0;
  const int nb = 80, N = 200;
  const int cells = nb / 2;

  const Spectrum undimerized = solve(assemble(kronig_penney(nb, b, v0), N));
  const Spectrum at_zero = solve(assemble(dimerized_kp(nb, b, v0, 0.0), N));
  for (int j = 1; j <= 3; ++j) {
    const int n = locate_band_boundary(at_zero, j * cells);
    const double gd = gap_width_extrapolated(at_zero, n);
    const double gk = gap_width_extrapolated(undimerized, n);
    f.expect(std::abs(gd - gk) <= 1e-8, "u=0 gap " + std::to_string(j) + " differs from plain KP");
  }

  std::ostringstream d;
  for (double u : {0.0, 0.05, 0.10, 0.15, 0.20}) {
    const Spectrum sp = (u == 0.0) ? at_zero : solve(assemble(dimerized_kp(nb, b, v0, u), N));
    const auto bands = transfer_matrix_bands(dimer_unit_cell(b, v0, u), 60.0, 1e-10, 5e-4);
    for (int j = 1; j <= 3; ++j) {
      const int n = locate_band_boundary(sp, j * cells);
      const auto& e = sp.energies;
      const double m = std::max(0.0, gap_width_extrapolated(sp, n));
      const double lower = e[n - 1] + 0.5 * (e[n - 1] - e[n - 2]);
      const double upper = e[n] - 0.5 * (e[n + 1] - e[n]);
      const double o = forbidden_width_at(bands, 0.5 * (lower + upper));
      const double resolution = 0.25 * ((e[n - 1] - e[n - 2]) + (e[n + 1] - e[n]));
      const double tol = 0.05 * o + resolution;
      std::ostringstream tag;
      tag << "u=" << u << " gap " << j << ": matrix " << m << " vs oracle " << o;
      f.expect(std::abs(m - o) <= tol, tag.str());
      if (u == 0.10 && j == 1) d << tag.str() << "  ";
    }
  }
  return {"dimer gap widths vs oracle", f.count == 0, f.count ? f.str() : d.str()};
}

// Tilted empty box: the packet peak must follow x0 - eps t^2 (mass 1/2),
// with norm and mean energy conserved. Note that by t = 0.26 the packet has
// spread to a position width of about 1.65, so its tails already touch the
// downhill wall; the interference tilts the almost flat density maximum a
// few hundredths to the right of the classical point (the mean still tracks
// it to ~4e-3, and with distant walls the peak is classical to 1e-6; see the
// control case in the dynamics tests).
inline CheckResult newton_packet() {
  detail::Failures f;
  const double eps = 10.0;
  const PotentialSpec spec = with_field(kronig_penney(10, 1.0 / 6.0, 0.0), eps);
  const Spectrum sp = solve(assemble(spec, 100));
  const WavePacketState state = project(sp, {5.0, 0.05});
  const auto grid = linspace(0.0, 10.0, 2001);
  const double e0 = mean_energy(state);

  double last_peak = 0.0, last_mean = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.26 * i / 10.0;
    const PacketSnapshot snap = evolve(state, t, grid);
    const GridFunction dens = density_of(snap);
    const double peak = peak_position(dens);
    const double expected = 5.0 - eps * t * t;
    f.expect(std::abs(peak - expected) <= 0.05,
             "peak at t=" + std::to_string(t) + " is " + std::to_string(peak) + ", want " +
                 std::to_string(expected) + " +- 0.05 (wall-interference shift; mean is " +
                 std::to_string(mean_abscissa(dens)) + ")");
    f.expect(std::abs(integrate(dens) - state.captured) <= 1e-6,
             "norm drift at t=" + std::to_string(t));
    const WavePacketState adv = advance(state, t);
    f.expect(std::abs(mean_energy(adv) - e0) <= 1e-6 * std::max(1.0, std::abs(e0)),
             "energy drift at t=" + std::to_string(t));
    if (i == 10) {
      last_peak = peak;
      last_mean = mean_abscissa(dens);
    }
  }
  std::ostringstream d;
  d << "x_max(0.26) = " << last_peak << ", mean " << last_mean << " (classical 4.324), captured "
    << state.captured;
  return {"Newton's-law wave packet", f.count == 0, f.count ? f.str() : d.str()};
}

// Always-on algebraic properties of the solver stack.
inline CheckResult property_suite() {
  detail::Failures f;
  const double pi = std::numbers::pi;

  const PotentialSpec kp = kronig_penney(10, 1.0 / 6.0, 100.0);
  const HamiltonianMatrix hk = assemble(kp, 100);
  const Spectrum sk = solve(hk);
  const PotentialSpec surf = surface_kp({10, 1.0 / 6.0, 120.0, 50.0});
  const HamiltonianMatrix hs = assemble(surf, 400);
  const Spectrum ss = solve(hs);

  auto check_spectrum = [&](const HamiltonianMatrix& h, const Spectrum& sp) {
    const Eigen::MatrixXd gram =
        sp.coefficients.transpose() * sp.coefficients - Eigen::MatrixXd::Identity(h.size, h.size);
    f.expect(gram.cwiseAbs().maxCoeff() <= 1e-10, "orthonormality above 1e-10");
    for (int n = 0; n < h.size; ++n) {
      const double resid =
          (h.entries * sp.coefficients.col(n) - sp.energies[static_cast<std::size_t>(n)] *
                                                    sp.coefficients.col(n))
              .cwiseAbs()
              .maxCoeff();
      f.expect(resid <= 1e-8 * std::max(1.0, std::abs(sp.energies[static_cast<std::size_t>(n)])),
               "residual above bound at level " + std::to_string(n + 1));
    }
    // Weyl: nonnegative potentials can only push levels up.
    for (int n = 1; n <= h.size; ++n)
      f.expect(sp.energies[n - 1] >= free_level_energy(n, sp.box_length) - 1e-9,
               "free-box lower bound violated at level " + std::to_string(n));
  };
  check_spectrum(hk, sk);
  check_spectrum(hs, ss);

  // Constant shift: exact spectral translation.
  {
    HamiltonianMatrix shifted = hk;
    const double c = 17.5;
    shifted.entries += c * Eigen::MatrixXd::Identity(hk.size, hk.size);
    const Spectrum s2 = solve(shifted);
    double worst = 0.0;
    for (int n = 0; n < hk.size; ++n)
      worst = std::max(worst, std::abs(s2.energies[static_cast<std::size_t>(n)] -
                                       sk.energies[static_cast<std::size_t>(n)] - c));
    f.expect(worst <= 1e-10, "constant shift moved spectrum by more than 1e-10");
    // A barrier covering the whole box adds c to every diagonal element.
    PotentialSpec box;
    box.box_length = 10.0;
    box.barriers.push_back({5.0, 10.0, c});
    const HamiltonianMatrix hb = assemble(box, 60);
    double worst_entry = 0.0;
    for (int n = 1; n <= 60; ++n)
      for (int m = 1; m <= 60; ++m) {
        const double want = (n == m) ? free_level_energy(n, 10.0) + c : 0.0;
        worst_entry = std::max(worst_entry, std::abs(hb.entries(n - 1, m - 1) - want));
      }
    f.expect(worst_entry <= 1e-10, "full-box barrier is not a clean diagonal shift");
  }

  // Closed-form barrier elements vs adaptive quadrature on random cases.
  {
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> idx(1, 80);
    std::uniform_real_distribution<double> pos(0.3, 9.7);
    std::uniform_real_distribution<double> frac(0.05, 0.95);
    const double L = 10.0;
    double worst = 0.0;
    for (int cse = 0; cse < 50; ++cse) {
      const int n = idx(rng), m = idx(rng);
      const double center = pos(rng);
      const double max_width = 2.0 * std::min(center, L - center);
      const double width = frac(rng) * max_width;
      const double closed = barrier_element(n, m, center, width, L);
      auto integrand = [&](double x) {
        return (2.0 / L) * std::sin(n * pi * x / L) * std::sin(m * pi * x / L);
      };
      // Panelwise so the sampler cannot alias with the integrand's zeros.
      const int panels = n + m + 3;
      double quad = 0.0;
      const double lo = center - 0.5 * width;
      for (int i = 0; i < panels; ++i)
        quad += adaptive_simpson(integrand, lo + width * i / panels,
                                 lo + width * (i + 1) / panels, 1e-13 / panels);
      worst = std::max(worst, std::abs(closed - quad));
    }
    f.expect(worst <= 1e-10, "closed form vs quadrature drifted to " + std::to_string(worst));
  }

  // Mirror symmetry of |psi| for the field-free crystal.
  {
    const auto grid = linspace(0.0, 10.0, 501);
    for (int n = 1; n <= 30; ++n) {
      const bool isolated =
          (n == 1 || sk.energies[n - 1] - sk.energies[n - 2] > 1e-6) &&
          (n == sk.size() || sk.energies[n] - sk.energies[n - 1] > 1e-6);
      if (!isolated) continue;
      const GridFunction psi = wavefunction(sk, n, grid);
      double worst = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = grid.size() - 1 - i;
        worst = std::max(worst, std::abs(std::abs(psi.values[i]) - std::abs(psi.values[j])));
      }
      f.expect(worst <= 1e-6, "mirror asymmetry at level " + std::to_string(n));
    }
  }

  // Rayleigh-Ritz: every level can only descend as the basis grows.
  {
    const Spectrum s60 = solve(assemble(kp, 60));
    const Spectrum s120 = solve(assemble(kp, 120));
    const Spectrum s240 = solve(assemble(kp, 240));
    for (int n = 0; n < 30; ++n) {
      f.expect(s60.energies[static_cast<std::size_t>(n)] >=
                   s120.energies[static_cast<std::size_t>(n)] - 1e-9,
               "level rose from N=60 to N=120");
      f.expect(s120.energies[static_cast<std::size_t>(n)] >=
                   s240.energies[static_cast<std::size_t>(n)] - 1e-9,
               "level rose from N=120 to N=240");
    }
  }

  return {"property suite", f.count == 0, f.count ? f.str() : "all algebraic invariants hold"};
}

// End-to-end runtime of the band scenario and the N^2 assembly scaling.
inline CheckResult performance() {
  detail::Failures f;
  const auto t0 = std::chrono::steady_clock::now();
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  partition_by_cell_count(sp, 10, 3);
  const double scenario = detail::seconds_since(t0);
  f.expect(scenario <= 10.0, "band scenario took " + std::to_string(scenario) + " s");

  const PotentialSpec spec = kronig_penney(10, 1.0 / 6.0, 100.0);
  auto time_assembly = [&](int n) {
    double best = 1e30;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t = std::chrono::steady_clock::now();
      volatile double sink = assemble(spec, n).entries(0, 0);
      (void)sink;
      best = std::min(best, detail::seconds_since(t));
    }
    return best;
  };
  const double small = time_assembly(512);
  const double big = time_assembly(1024);
  const double ratio = big / small;
  f.expect(ratio >= 2.0 && ratio <= 6.0,
           "assembly time ratio for doubled N is " + std::to_string(ratio));
  std::ostringstream d;
  d << "band scenario " << scenario << " s; assembly ratio x" << ratio;
  return {"performance", f.count == 0, f.count ? f.str() : d.str()};
}

inline std::vector<CheckResult> run_all() {
  return {band_accuracy(),    surface_doublets(), analytic_surface_oracle(),
          numeric_tamm_limit(), dimer_gaps(),     newton_packet(),
          property_suite(),   performance()};
}

}  // namespace kpbox::selftest
