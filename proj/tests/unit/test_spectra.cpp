#include <doctest.h>

#include "fowt/errors.hpp"
#include "fowt/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace fowt;

namespace {

Psd rectangular_hz(double f_hi, std::size_t n)
{
  FrequencyGrid g = FrequencyGrid::uniform(0.0, f_hi, n, FrequencyUnit::hertz);
  return Psd(g, std::vector<double>(n, 1.0));
}

} // namespace

TEST_CASE("frequency grid validation and bin widths")
{
  CHECK_THROWS_AS(FrequencyGrid({1.0, 1.0, 2.0}), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid({-0.1, 1.0}), ValidationError);
  CHECK_THROWS_AS(FrequencyGrid({1.0}), ValidationError);

  const FrequencyGrid g({0.1, 0.2, 0.5, 1.0});
  const auto w = g.bin_widths();
  double total = 0.0;
  for (double x : w)
    total += x;
  CHECK(total == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(w.front() == doctest::Approx(0.05));
}

TEST_CASE("unit conversion round trip is exact")
{
  const Psd s = jonswap(2.5, 9.0, default_grid());
  const Psd hz = to_hertz(s);
  CHECK(hz.unit() == FrequencyUnit::hertz);
  CHECK(hz.values[100] == doctest::Approx(2.0 * std::numbers::pi * s.values[100]));
  const Psd back = to_rad_per_s(hz);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.grid[i] == doctest::Approx(s.grid[i]).epsilon(1e-15));
    CHECK(back.values[i] == doctest::Approx(s.values[i]).epsilon(1e-15));
  }
  // Moments do not depend on the storage unit.
  CHECK(integrate(hz, 2) == doctest::Approx(integrate(s, 2)).epsilon(1e-12));
}

TEST_CASE("jonswap")
{
  const FrequencyGrid g = default_grid();

  SUBCASE("zero wave height gives a zero spectrum")
  {
    const Psd s = jonswap(0.0, 8.0, g);
    CHECK(std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; }));
  }

  SUBCASE("m0 equals hs^2 / 16")
  {
    CHECK(integrate(jonswap(2.0, 8.0, g), 0) == doctest::Approx(0.25).epsilon(0.02));
  }

  SUBCASE("peak at 2 pi / tp")
  {
    for (double tp : {4.0, 8.0, 12.0}) {
      const Psd s = jonswap(2.0, tp, g);
      const auto it = std::max_element(s.values.begin(), s.values.end());
      const double w_peak = s.grid[static_cast<std::size_t>(it - s.values.begin())];
      const double step = g[1] - g[0];
      CHECK(std::abs(w_peak - 2.0 * std::numbers::pi / tp) <= step * (1.0 + 1e-9));
    }
  }

  SUBCASE("m0 scales with hs squared")
  {
    const double m0 = integrate(jonswap(1.3, 7.0, g), 0);
    CHECK(integrate(jonswap(3.0 * 1.3, 7.0, g), 0) == doctest::Approx(9.0 * m0).epsilon(1e-12));
  }

  SUBCASE("m4 converges under grid refinement")
  {
    const double coarse = integrate(jonswap(2.0, 8.0, g), 4);
    const double fine = integrate(jonswap(2.0, 8.0, FrequencyGrid::uniform(0.05, 6.3, 999)), 4);
    CHECK(std::abs(coarse - fine) / fine < 0.005);
  }

  CHECK_THROWS_AS(jonswap(-1.0, 8.0, g), ValidationError);
  CHECK_THROWS_AS(jonswap(1.0, 0.0, g), ValidationError);
}

TEST_CASE("kaimal")
{
  const FrequencyGrid g = default_grid();

  SUBCASE("zero turbulence gives a zero spectrum")
  {
    const Psd s = kaimal(11.4, 0.0, kIecKaimalLengthScale, g);
    CHECK(std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; }));
  }

  SUBCASE("variance equals (TI V)^2")
  {
    const Psd s = kaimal(11.4, 0.14, kIecKaimalLengthScale, g);
    CHECK(std::sqrt(area(s)) == doctest::Approx(1.596).epsilon(0.05));
    CHECK(std::sqrt(area(s)) == doctest::Approx(0.14 * 11.4).epsilon(1e-9));
  }

  SUBCASE("decreasing above the peak")
  {
    const Psd s = kaimal(8.0, 0.16, kIecKaimalLengthScale, g);
    const auto peak = std::max_element(s.values.begin(), s.values.end()) - s.values.begin();
    for (std::size_t i = static_cast<std::size_t>(peak) + 1; i < s.size(); ++i)
      CHECK(s.values[i] < s.values[i - 1]);
  }

  CHECK_THROWS_AS(kaimal(0.0, 0.1, 340.2, g), ValidationError);
}

TEST_CASE("spectral moments of a rectangular spectrum")
{
  const Psd s = rectangular_hz(1.0, 20001);
  CHECK(integrate(s, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(integrate(s, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(integrate(s, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(integrate(s, 4) == doctest::Approx(0.2).epsilon(1e-8));
  CHECK_THROWS_AS(integrate(s, 3), ValidationError);

  const Psd zero = Psd::zeros(default_grid());
  for (int j : {0, 1, 2, 4})
    CHECK(integrate(zero, j) == 0.0);
}
