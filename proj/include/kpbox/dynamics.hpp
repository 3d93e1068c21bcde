#pragma once

// Wave-packet dynamics in the computed eigenbasis: project an initial state
// onto the eigenfunctions, attach phase factors e^{-i E_n t} (hbar = 1, so
// the particle mass is 1/2 in these units), and evaluate Psi(x, t) on grids.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "kpbox/eigensolver.hpp"
#include "kpbox/grid.hpp"

namespace kpbox {

struct GaussianPacket {
  double center = 0.0;
  double variance = 0.0;  // sigma^2

  double peak_amplitude() const {
    return std::pow(std::numbers::pi * variance, -0.25);
  }
  double value(double x) const {
    return peak_amplitude() * std::exp(-(x - center) * (x - center) / (2.0 * variance));
  }
};

struct WavePacketState {
  Spectrum spectrum;
  std::vector<std::complex<double>> amplitudes;  // a_n
  double captured = 0.0;                         // sum |a_n|^2
};

struct PacketSnapshot {
  std::vector<double> x;
  std::vector<std::complex<double>> psi;
  std::vector<double> density;
};

// Expansion of a normalized initial state onto the eigenbasis: the basis
// overlaps b_m = <phi_m|Psi_0> come from composite Simpson on a uniform grid,
// then a_n = sum_m c_m^(n) b_m. Throws when the basis captures less than
// `min_captured` of the state's norm. `step` must resolve both the state and
// the fastest basis mode; zero picks L/(20 N).
template <class F>
WavePacketState project_function(const Spectrum& sp, F&& initial, double min_captured = 0.999,
                                 double step = 0.0) {
  const int N = sp.size();
  const double L = sp.box_length;
  const double pi = std::numbers::pi;
  const double step_target = (step > 0.0) ? std::min(step, L / (20.0 * N)) : L / (20.0 * N);
  std::size_t intervals = static_cast<std::size_t>(std::ceil(L / step_target));
  if (intervals % 2 == 1) ++intervals;
  const std::size_t nodes = intervals + 1;
  const double h = L / static_cast<double>(intervals);

  std::vector<double> psi0(nodes);
  for (std::size_t i = 0; i < nodes; ++i) psi0[i] = initial(h * static_cast<double>(i));

  Eigen::VectorXd b(N);
  const double scale = std::sqrt(2.0 / L);
  for (int m = 1; m <= N; ++m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double f = psi0[i] * std::sin(m * pi * (h * static_cast<double>(i)) / L);
      const double w = (i == 0 || i == nodes - 1) ? 1.0 : ((i % 2 == 1) ? 4.0 : 2.0);
      acc += w * f;
    }
    b(m - 1) = scale * acc * h / 3.0;
  }

  const Eigen::VectorXd a = sp.coefficients.transpose() * b;
  WavePacketState state;
  state.spectrum = sp;
  state.amplitudes.reserve(static_cast<std::size_t>(N));
  double captured = 0.0;
  for (int n = 0; n < N; ++n) {
    state.amplitudes.emplace_back(a(n), 0.0);
    captured += a(n) * a(n);
  }
  state.captured = captured;
  if (captured > 1.0 + 1e-9)
    throw std::runtime_error("project: captured weight exceeds unity; quadrature too coarse");
  if (captured < min_captured)
    throw std::runtime_error("project: basis too small for the packet (captured " +
                             std::to_string(captured) + ")");
  return state;
}

inline WavePacketState project(const Spectrum& sp, const GaussianPacket& packet,
                               double min_captured = 0.999) {
  if (!(packet.variance > 0.0)) throw std::invalid_argument("project: packet variance must be > 0");
  const double L = sp.box_length;
  const double peak = packet.peak_amplitude();
  if (packet.value(0.0) >= 1e-8 * peak || packet.value(L) >= 1e-8 * peak)
    throw std::invalid_argument("project: packet does not vanish at the box walls");
  const double sigma = std::sqrt(packet.variance);
  return project_function(
      sp, [&](double x) { return packet.value(x); }, min_captured, sigma / 20.0);
}

// Pure phase rotation; Sum |a_n|^2 is preserved exactly.
inline WavePacketState advance(const WavePacketState& state, double time) {
  WavePacketState out = state;
  for (int n = 0; n < state.spectrum.size(); ++n) {
    const double phase = -state.spectrum.energies[static_cast<std::size_t>(n)] * time;
    out.amplitudes[static_cast<std::size_t>(n)] *=
        std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return out;
}

// Psi(x, t) and |Psi(x, t)|^2 sampled on a grid.
inline PacketSnapshot evolve(const WavePacketState& state, double time,
                             const std::vector<double>& grid) {
  const Spectrum& sp = state.spectrum;
  const int N = sp.size();
  const double L = sp.box_length;
  const double pi = std::numbers::pi;

  // Combine phases with the eigenvector transform once: d_m = sum_n c_mn a_n(t).
  Eigen::VectorXcd a(N);
  for (int n = 0; n < N; ++n) {
    const double phase = -sp.energies[static_cast<std::size_t>(n)] * time;
    a(n) = state.amplitudes[static_cast<std::size_t>(n)] *
           std::complex<double>(std::cos(phase), std::sin(phase));
  }
  const Eigen::VectorXcd d = sp.coefficients * a;

  PacketSnapshot snap;
  snap.x = grid;
  snap.psi.reserve(grid.size());
  snap.density.reserve(grid.size());
  const double scale = std::sqrt(2.0 / L);
  for (double x : grid) {
    if (x < -detail::kGeomTol || x > L + detail::kGeomTol)
      throw std::domain_error("evolve: grid point outside the box");
    std::complex<double> s = 0.0;
    for (int m = 1; m <= N; ++m) s += d(m - 1) * std::sin(m * pi * x / L);
    s *= scale;
    snap.psi.push_back(s);
    snap.density.push_back(std::norm(s));
  }
  return snap;
}

// Location of the global density maximum, refined by a three-point parabola.
// Ties resolve toward the lower coordinate.
inline double peak_position(const GridFunction& density) {
  if (density.x.empty()) throw std::invalid_argument("peak_position: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < density.values.size(); ++i)
    if (density.values[i] > density.values[best]) best = i;
  if (best == 0 || best + 1 >= density.values.size()) return density.x[best];
  const double y0 = density.values[best - 1];
  const double y1 = density.values[best];
  const double y2 = density.values[best + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom == 0.0) return density.x[best];
  const double shift = 0.5 * (y0 - y2) / denom;
  const double h = density.x[best] - density.x[best - 1];
  return density.x[best] + std::clamp(shift, -1.0, 1.0) * h;
}

inline GridFunction density_of(const PacketSnapshot& snap) {
  return GridFunction{snap.x, snap.density};
}

inline double mean_energy(const WavePacketState& state) {
  double acc = 0.0;
  for (int n = 0; n < state.spectrum.size(); ++n)
    acc += std::norm(state.amplitudes[static_cast<std::size_t>(n)]) *
           state.spectrum.energies[static_cast<std::size_t>(n)];
  return acc;
}

inline double total_weight(const WavePacketState& state) {
  double acc = 0.0;
  for (const auto& a : state.amplitudes) acc += std::norm(a);
  return acc;
}

}  // namespace kpbox
