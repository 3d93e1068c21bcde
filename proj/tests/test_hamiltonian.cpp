#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kpbox/hamiltonian.hpp"
#include "kpbox/quadrature.hpp"

using namespace kpbox;

namespace {
constexpr double kPi = std::numbers::pi;

// Panelwise adaptive quadrature; the panel count is chosen incommensurate
// with the integrand's zeros so no oscillation can hide from the sampler.
template <class F>
double panel_quadrature(F&& f, double a, double b, int panels, double tol) {
  double acc = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + (b - a) * i / panels;
    const double hi = a + (b - a) * (i + 1) / panels;
    acc += adaptive_simpson(f, lo, hi, tol / panels);
  }
  return acc;
}

// Reference route: numerical quadrature of the defining integral.
double h_by_quadrature(int n, int m, double center, double width, double L, double tol = 1e-13) {
  auto f = [&](double x) { return (2.0 / L) * std::sin(n * kPi * x / L) * std::sin(m * kPi * x / L); };
  return panel_quadrature(f, center - 0.5 * width, center + 0.5 * width, std::max(5, n + m + 3),
                          tol);
}
}  // namespace

TEST_CASE("free level energies") {
  CHECK(free_level_energy(1, 10.0) == Catch::Approx(kPi * kPi / 100.0));
  CHECK(free_level_energy(2, 1.0) == Catch::Approx(4.0 * kPi * kPi));
  CHECK(free_level_energy(10, 10.0) == Catch::Approx(kPi * kPi));
}

TEST_CASE("sine product integral endpoints") {
  const double L = 10.0;
  for (int n = 1; n <= 5; ++n)
    for (int m = 1; m <= 5; ++m) CHECK(sine_product_integral(n, m, 0.0, L) == 0.0);
  CHECK(sine_product_integral(3, 3, L, L) == Catch::Approx(1.0).margin(1e-14));
  CHECK(sine_product_integral(1, 2, L, L) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("barrier element special cases") {
  const double L = 10.0;
  CHECK(barrier_element(4, 7, 3.0, 0.0, L) == 0.0);
  CHECK(barrier_element(1, 1, 0.5 * L, L, L) == Catch::Approx(1.0).margin(1e-14));
  CHECK_THROWS_AS(barrier_element(1, 1, 9.9, 0.5, L), std::domain_error);
}

TEST_CASE("barrier element matches quadrature") {
  const double L = 10.0;
  const double h_ref = h_by_quadrature(1, 2, 5.5, 1.0 / 6.0, L);
  CHECK(std::abs(barrier_element(1, 2, 5.5, 1.0 / 6.0, L) - h_ref) < 1e-12);

  std::mt19937 rng(777);
  std::uniform_int_distribution<int> idx(1, 60);
  std::uniform_real_distribution<double> pos(0.4, 9.6);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int cse = 0; cse < 50; ++cse) {
    const int n = idx(rng), m = idx(rng);
    const double c = pos(rng);
    const double w = frac(rng) * 2.0 * std::min(c, L - c);
    CAPTURE(n, m, c, w);
    CHECK(std::abs(barrier_element(n, m, c, w, L) - h_by_quadrature(n, m, c, w, L)) < 1e-10);
  }
}

TEST_CASE("field elements") {
  CHECK(field_element(3, 3, 2.0, 10.0) == Catch::Approx(10.0));
  CHECK(field_element(1, 3, 5.0, 10.0) == 0.0);  // even n + m
  CHECK(field_element(1, 2, 1.0, 1.0) == Catch::Approx(-16.0 / (9.0 * kPi * kPi)));
  // Against the defining integral (2 eps / L) int x sin sin.
  const double L = 7.0, eps = 1.3;
  for (int n = 1; n <= 6; ++n)
    for (int m = n; m <= 6; ++m) {
      auto f = [&](double x) {
        return (2.0 * eps / L) * x * std::sin(n * kPi * x / L) * std::sin(m * kPi * x / L);
      };
      const double ref = panel_quadrature(f, 0.0, L, n + m + 3, 1e-13);
      CHECK(std::abs(field_element(n, m, eps, L) - ref) < 1e-10);
    }
}

TEST_CASE("bare box assembles diagonally") {
  PotentialSpec spec;
  spec.box_length = 10.0;
  const HamiltonianMatrix h = assemble(spec, 3);
  for (int n = 1; n <= 3; ++n)
    for (int m = 1; m <= 3; ++m) {
      const double want = (n == m) ? free_level_energy(n, 10.0) : 0.0;
      CHECK(h.entries(n - 1, m - 1) == Catch::Approx(want).margin(1e-15));
    }
}

TEST_CASE("full-box barrier is a constant shift") {
  PotentialSpec spec;
  spec.box_length = 10.0;
  spec.barriers.push_back({5.0, 10.0, 100.0});
  const HamiltonianMatrix h = assemble(spec, 20);
  for (int n = 1; n <= 20; ++n)
    for (int m = 1; m <= 20; ++m) {
      const double want = (n == m) ? free_level_energy(n, 10.0) + 100.0 : 0.0;
      CHECK(std::abs(h.entries(n - 1, m - 1) - want) < 1e-10);
    }
}

TEST_CASE("assembled crystal matches quadrature entry by entry") {
  const PotentialSpec spec = kronig_penney(10, 1.0 / 6.0, 100.0);
  const int N = 100;
  const HamiltonianMatrix h = assemble(spec, N);
  double worst = 0.0;
  for (int n = 1; n <= N; ++n)
    for (int m = n; m <= N; ++m) {
      double ref = (n == m) ? free_level_energy(n, spec.box_length) : 0.0;
      for (const auto& bar : spec.barriers)
        ref += bar.height * h_by_quadrature(n, m, bar.center, bar.width, spec.box_length, 1e-12);
      worst = std::max(worst, std::abs(h.entries(n - 1, m - 1) - ref));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("assembly is exactly symmetric") {
  const PotentialSpec spec =
      with_field(dimerized_kp(8, 0.1, 30.0, 0.07), 0.4);
  const HamiltonianMatrix h = assemble(spec, 40);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) CHECK(h.entries(i, j) == h.entries(j, i));
}

TEST_CASE("tilted crystal includes the field elements") {
  const PotentialSpec spec = with_field(kronig_penney(4, 0.25, 10.0), 0.7);
  const HamiltonianMatrix plain = assemble(with_field(spec, 0.0), 12);
  const HamiltonianMatrix tilted = assemble(spec, 12);
  for (int n = 1; n <= 12; ++n)
    for (int m = 1; m <= 12; ++m)
      CHECK(tilted.entries(n - 1, m - 1) - plain.entries(n - 1, m - 1) ==
            Catch::Approx(field_element(n, m, 0.7, 4.0)).margin(1e-13));
}

TEST_CASE("matrix csv dump") {
  PotentialSpec spec;
  spec.box_length = 1.0;
  const HamiltonianMatrix h = assemble(spec, 2);
  std::ostringstream os;
  write_csv(h, os);
  const std::string text = os.str();
  CHECK(text.find(',') != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
