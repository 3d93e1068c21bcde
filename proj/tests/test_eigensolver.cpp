#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kpbox/eigensolver.hpp"
#include "kpbox/oracles.hpp"

using namespace kpbox;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("bare box spectrum is exact") {
  PotentialSpec spec;
  spec.box_length = 10.0;
  const Spectrum sp = solve(assemble(spec, 12));
  for (int n = 1; n <= 12; ++n) {
    CHECK(sp.energies[n - 1] == Catch::Approx(kPi * kPi * n * n / 100.0).margin(1e-12));
    for (int m = 1; m <= 12; ++m)
      CHECK(sp.coefficients(m - 1, n - 1) == Catch::Approx(m == n ? 1.0 : 0.0).margin(1e-12));
  }
}

TEST_CASE("crystal levels cluster into bands below the barrier height") {
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  // Three well-separated clusters among the 30 lowest levels (the zone-edge
  // level of an odd band gets displaced to the next band bottom, so the true
  // boundaries sit at 9, 20, 29).
  const double g1 = sp.energies[9] - sp.energies[8];
  const double g2 = sp.energies[20] - sp.energies[19];
  const double g3 = sp.energies[29] - sp.energies[28];
  const double band1_width = sp.energies[8] - sp.energies[0];
  CHECK(g1 > 3.0 * band1_width);
  CHECK(g2 > 10.0);
  CHECK(g3 > 10.0);
  CHECK(sp.energies[29] < 1.5 * 100.0);

  // The displaced level lands within the next allowed band of the bulk oracle.
  const auto bands = transfer_matrix_bands(kp_unit_cell(1.0 / 6.0, 100.0), 160.0, 1e-10, 1e-3);
  REQUIRE(bands.size() >= 2);
  CHECK(sp.energies[9] > bands[0].upper);
  CHECK(sp.energies[9] >= 0.999 * bands[1].lower);
  CHECK(sp.energies[9] <= 1.001 * bands[1].upper);
}

TEST_CASE("constant shift moves the spectrum rigidly") {
  const HamiltonianMatrix h = assemble(kronig_penney(6, 0.25, 40.0), 60);
  const Spectrum base = solve(h);
  HamiltonianMatrix shifted = h;
  shifted.entries += 12.5 * Eigen::MatrixXd::Identity(60, 60);
  const Spectrum moved = solve(shifted);
  for (int n = 0; n < 60; ++n)
    CHECK(std::abs(moved.energies[n] - base.energies[n] - 12.5) < 1e-10);
}

TEST_CASE("solve is deterministic including signs") {
  const HamiltonianMatrix h = assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 80);
  const Spectrum a = solve(h);
  const Spectrum b = solve(h);
  CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() == 0.0);
  // Convention: first coefficient of largest magnitude is positive.
  for (int c = 0; c < 80; ++c) {
    int lead = 0;
    for (int r = 0; r < 80; ++r)
      if (std::abs(a.coefficients(r, c)) > std::abs(a.coefficients(lead, c))) lead = r;
    CHECK(a.coefficients(lead, c) > 0.0);
  }
}

TEST_CASE("wavefunctions vanish at the walls and reproduce the free box") {
  PotentialSpec spec;
  spec.box_length = 4.0;
  const Spectrum free_box = solve(assemble(spec, 10));
  const auto grid = linspace(0.0, 4.0, 101);
  const GridFunction psi1 = wavefunction(free_box, 1, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(psi1.values[i] ==
          Catch::Approx(std::sqrt(0.5) * std::sin(kPi * grid[i] / 4.0)).margin(1e-12));

  const Spectrum crystal = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  for (int n : {1, 5, 17}) {
    CHECK(std::abs(eigenfunction_value(crystal, n, 0.0)) < 1e-12);
    CHECK(std::abs(eigenfunction_value(crystal, n, 10.0)) < 1e-12);
  }
  CHECK_THROWS_AS(wavefunction(crystal, 1, linspace(-1.0, 1.0, 5)), std::domain_error);
  CHECK_THROWS_AS(wavefunction(crystal, 0, grid), std::out_of_range);
}

TEST_CASE("eigenfunctions are normalized on the grid") {
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  const auto grid = linspace(0.0, 10.0, 4001);
  for (int n : {1, 10, 25}) {
    GridFunction psi = wavefunction(sp, n, grid);
    for (auto& v : psi.values) v *= v;
    CHECK(integrate(psi) == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("relative density") {
  PotentialSpec spec;
  spec.box_length = 10.0;
  const Spectrum sp = solve(assemble(spec, 8));
  const auto grid = linspace(0.5, 9.5, 91);
  const GridFunction r = relative_density(sp, 1, grid, 5.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = std::sin(kPi * grid[i] / 10.0);
    CHECK(r.values[i] == Catch::Approx(s * s).margin(1e-10));
  }
  // Reference point at the wall is a node.
  CHECK_THROWS_AS(relative_density(sp, 1, grid, 0.0), std::runtime_error);
  // R equals one at the reference point by construction.
  const GridFunction unit = relative_density(sp, 3, {2.5}, 2.5);
  CHECK(unit.values[0] == Catch::Approx(1.0));
}

TEST_CASE("mirror symmetry of field-free eigenfunctions") {
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 60));
  const auto grid = linspace(0.0, 10.0, 201);
  for (int n : {1, 4, 9}) {
    const GridFunction psi = wavefunction(sp, n, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::size_t j = grid.size() - 1 - i;
      CHECK(std::abs(psi.values[i]) == Catch::Approx(std::abs(psi.values[j])).margin(1e-6));
    }
  }
}
