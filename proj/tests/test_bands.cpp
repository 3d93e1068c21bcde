#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "kpbox/bands.hpp"
#include "kpbox/oracles.hpp"

using namespace kpbox;

namespace {
constexpr double kPi = std::numbers::pi;

Spectrum ladder_spectrum(int n, double step) {
  Spectrum sp;
  sp.box_length = 10.0;
  sp.spec.box_length = 10.0;
  sp.coefficients = Eigen::MatrixXd::Identity(n, n);
  for (int j = 1; j <= n; ++j) sp.energies.push_back(j * step);
  return sp;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(va * vb);
}
}  // namespace

TEST_CASE("wave numbers scale the level index") {
  const Spectrum sp = ladder_spectrum(12, 1.0);
  const auto levels = assign_wave_numbers(sp);
  CHECK(levels[0].wave_number == Catch::Approx(kPi / 10.0));
  CHECK(levels[9].wave_number == Catch::Approx(kPi));
  CHECK(levels[9].index == 10);
}

TEST_CASE("extrapolated gap estimator") {
  // A uniform ladder has no gaps; the estimator must return exactly zero.
  const Spectrum uniform = ladder_spectrum(20, 0.7);
  for (int n = 2; n <= 18; ++n) CHECK(gap_width_extrapolated(uniform, n) == 0.0);
  CHECK_THROWS_AS(gap_width_extrapolated(uniform, 1), std::out_of_range);
  CHECK_THROWS_AS(gap_width_extrapolated(uniform, 19), std::out_of_range);

  // A synthetic two-band spectrum: the estimator reconstructs the full gap.
  Spectrum two;
  two.box_length = 10.0;
  two.coefficients = Eigen::MatrixXd::Identity(8, 8);
  two.energies = {1.0, 2.0, 3.0, 4.0, 15.0, 16.0, 17.0, 18.0};
  CHECK(gap_width_extrapolated(two, 4) == Catch::Approx(12.0));
}

TEST_CASE("index partition") {
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  const BandStructure bs = partition_by_cell_count(sp, 10, 3);
  REQUIRE(bs.bands.size() == 3);
  CHECK(bs.bands[0] == std::make_pair(1, 10));
  CHECK(bs.bands[1] == std::make_pair(11, 20));
  CHECK(bs.bands[2] == std::make_pair(21, 30));
  REQUIRE(bs.gaps.size() == 2);
  CHECK(bs.gaps[0].width >= 0.0);
  CHECK_THROWS_AS(partition_by_cell_count(sp, 10, 11), std::invalid_argument);

  // One cell: every level is its own band.
  const BandStructure singles = partition_by_cell_count(sp, 1, 5);
  CHECK(singles.bands.size() == 5);
  CHECK(singles.bands[4] == std::make_pair(5, 5));
}

TEST_CASE("spacing detector on reference spectra") {
  SECTION("bare box stays one band") {
    PotentialSpec spec;
    spec.box_length = 10.0;
    const BandStructure bs = detect_gaps_by_spacing(solve(assemble(spec, 60)), 5.0);
    CHECK(bs.bands.size() == 1);
    CHECK(bs.in_gap_states.empty());
  }
  SECTION("crystal bands agree with the index partition up to the displaced edge level") {
    const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
    const BandStructure bs = detect_gaps_by_spacing(sp, 5.0);
    REQUIRE(bs.bands.size() >= 3);
    CHECK(bs.in_gap_states.empty());
    // Nominal boundaries 10, 20, 30; a boxed crystal displaces the zone-edge
    // state of odd bands, so detected boundaries may sit one level lower.
    const int expected_nominal[3] = {10, 20, 30};
    for (int j = 0; j < 3; ++j) {
      const int boundary = bs.bands[static_cast<std::size_t>(j)].second;
      CHECK(std::abs(boundary - expected_nominal[j]) <= 1);
    }
    CHECK(bs.bands[0].second == 9);
    CHECK(bs.bands[1].second == 20);
    CHECK(bs.bands[2].second == 29);
  }
  SECTION("too few levels") {
    const Spectrum sp = ladder_spectrum(3, 1.0);
    CHECK_THROWS_AS(detect_gaps_by_spacing(sp, 5.0), std::invalid_argument);
  }
}

TEST_CASE("spacing detector flags surface doublets") {
  const Spectrum sp = solve(assemble(surface_kp({10, 1.0 / 6.0, 120.0, 50.0}), 400));
  const BandStructure bs = detect_gaps_by_spacing(sp, 5.0);
  std::vector<int> below_vacuum;
  for (int lvl : bs.in_gap_states)
    if (sp.energies[lvl - 1] < 50.0) below_vacuum.push_back(lvl);
  REQUIRE(below_vacuum == std::vector<int>{1, 2, 12, 13});
  CHECK(sp.energies[0] == Catch::Approx(8.224).margin(5e-3));
  CHECK(sp.energies[11] == Catch::Approx(31.912).margin(5e-3));
  // Every flagged state is strongly surface-localized.
  for (int lvl : below_vacuum) CHECK(surface_localization(sp, lvl) > 0.5);
}

TEST_CASE("in-gap states sit inside forbidden intervals of the bulk oracle") {
  const Spectrum sp = solve(assemble(surface_kp({10, 1.0 / 6.0, 120.0, 50.0}), 400));
  const BandStructure bs = detect_gaps_by_spacing(sp, 5.0);
  const auto bands = transfer_matrix_bands(kp_unit_cell(1.0 / 6.0, 120.0), 200.0, 1e-10, 1e-3);
  for (int lvl : bs.in_gap_states) {
    const double e = sp.energies[lvl - 1];
    if (e < 50.0) CHECK(is_forbidden(bands, e));
  }
}

TEST_CASE("dimerized crystal clusters by half the barrier count") {
  // Strong barriers, clear clustering: cells of length 2.
  const Spectrum sp = solve(assemble(dimerized_kp(10, 1.0 / 6.0, 100.0, 0.15), 120));
  const BandStructure bs = detect_gaps_by_spacing(sp, 5.0);
  REQUIRE(bs.bands.size() >= 3);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(bs.bands[static_cast<std::size_t>(j)].second - 5 * (j + 1)) <= 1);
}

TEST_CASE("boundary locator follows the spacing maximum") {
  const Spectrum sp = solve(assemble(kronig_penney(80, 0.01, 100.0), 200));
  CHECK(locate_band_boundary(sp, 80) == 79);  // band 1 lost its zone-edge state
  const Spectrum strong = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  CHECK(locate_band_boundary(strong, 20) == 20);
}

TEST_CASE("levels vs cells") {
  const auto table = levels_vs_cells(1.0 / 6.0, 100.0, 10, 100);
  REQUIRE(table.size() == 10);
  CHECK(table[0].first == 1);
  // The number of levels below the cap grows with the crystal.
  CHECK(table[1].second.size() < table[5].second.size());
  CHECK(table[5].second.size() < table[9].second.size());
  // Large crystals: levels below the barrier height approach the bulk bands.
  const auto bands = transfer_matrix_bands(kp_unit_cell(1.0 / 6.0, 100.0), 160.0, 1e-10, 1e-3);
  const auto& last = table.back().second;
  int outside = 0;
  for (double e : last) {
    bool inside = false;
    for (const auto& band : bands)
      if (e >= band.lower - 0.6 && e <= band.upper + 0.6) inside = true;
    if (!inside) ++outside;
  }
  CHECK(outside <= static_cast<int>(last.size()) / 10);
}

TEST_CASE("basis size convergence helper") {
  SECTION("free box converges immediately") {
    PotentialSpec spec;
    spec.box_length = 10.0;
    const auto res = converge_basis_size(spec, 8, 1e-10);
    CHECK(res.basis_size == 32);  // 4 * levels_wanted, already exact
    CHECK(res.spectrum.energies[0] == Catch::Approx(kPi * kPi / 100.0).margin(1e-12));
  }
  SECTION("crystal at a practical tolerance") {
    const auto res = converge_basis_size(kronig_penney(10, 1.0 / 6.0, 100.0), 30, 1e-4);
    CHECK(res.basis_size == 480);  // golden value for this spec and tolerance
  }
  SECTION("tight tolerances need very large bases") {
    // Sine-basis convergence for step potentials is slow; at 1e-6 relative
    // the doubling search exceeds 512 (it ends at 1920 when uncapped).
    CHECK_THROWS_AS(converge_basis_size(kronig_penney(10, 1.0 / 6.0, 100.0), 30, 1e-6, 512),
                    std::runtime_error);
  }
  SECTION("truncation error grows with the barrier count at fixed basis size") {
    double change[2];
    int idx = 0;
    for (int nb : {10, 20}) {
      const PotentialSpec spec = kronig_penney(nb, 1.0 / 6.0, 100.0);
      const Spectrum coarse = solve(assemble(spec, 100));
      const Spectrum fine = solve(assemble(spec, 200));
      double worst = 0.0;
      for (int k = 0; k < 30; ++k)
        worst = std::max(worst,
                         std::abs(fine.energies[k] - coarse.energies[k]) / fine.energies[k]);
      change[idx++] = worst;
    }
    CHECK(change[1] > 2.0 * change[0]);
  }
}

TEST_CASE("eigenfunction envelopes follow 0.6 sin(n pi x / L)") {
  const Spectrum sp = solve(assemble(kronig_penney(10, 1.0 / 6.0, 100.0), 100));
  const auto grid = linspace(1.0, 9.0, 6401);  // away from the outermost cells

  // Local maxima heights track the envelope where it varies across maxima.
  for (int n : {1, 9}) {
    const GridFunction psi = wavefunction(sp, n, grid);
    std::vector<double> heights, envelope;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double v = std::abs(psi.values[i]);
      if (v > std::abs(psi.values[i - 1]) && v > std::abs(psi.values[i + 1]) && v > 0.05) {
        heights.push_back(v);
        envelope.push_back(std::abs(0.6 * std::sin(n * kPi * grid[i] / 10.0)));
      }
    }
    REQUIRE(heights.size() >= 5);
    CHECK(pearson(heights, envelope) > 0.9);
  }

  // For n = 10 the envelope is constant at the maxima; heights must be flat.
  {
    const GridFunction psi = wavefunction(sp, 10, grid);
    std::vector<double> heights;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double v = std::abs(psi.values[i]);
      if (v > std::abs(psi.values[i - 1]) && v > std::abs(psi.values[i + 1]) && v > 0.05)
        heights.push_back(v);
    }
    double mean = 0.0;
    for (double h : heights) mean += h;
    mean /= static_cast<double>(heights.size());
    double var = 0.0;
    for (double h : heights) var += (h - mean) * (h - mean);
    CHECK(std::sqrt(var / static_cast<double>(heights.size())) / mean < 0.05);
  }

  // Node counts confirm the wave-number assignment, amplitude the 0.6 scale.
  const int expected_nodes[4] = {0, 8, 7, 13};
  const int levels[4] = {1, 9, 10, 16};
  for (int k = 0; k < 4; ++k) {
    const GridFunction psi = wavefunction(sp, levels[k], grid);
    int nodes = 0;
    double sup = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      sup = std::max(sup, std::abs(psi.values[i]));
      if (i > 0 && psi.values[i - 1] * psi.values[i] < 0.0) ++nodes;
    }
    CHECK(nodes == expected_nodes[k]);
    if (levels[k] != 10)
      CHECK((sup > 0.5 && sup < 0.7));
    else
      CHECK((sup > 0.3 && sup < 0.7));  // displaced zone-edge state runs lower
  }
}
