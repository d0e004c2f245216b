#include <doctest.h>

#include "fowt/errors.hpp"
#include "fowt/fd_model.hpp"
#include "fowt/random.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace fowt;
using fowt::testing::diagonal_sdof;
using fowt::testing::diagonal_tables;
using fowt::testing::rel;

namespace {

/// Seven identical unit oscillators with only DoF 0 forced: m = 1, c = 0.1, k = 1.
CoefficientTables unit_oscillator(const FrequencyGrid& grid)
{
  CoefficientTables t;
  t.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    t.added_mass.push_back(Mat7::Zero());
    t.radiation_damping.push_back(Mat7::Zero());
    CVec7 x = CVec7::Zero();
    x[0] = 1.0;
    t.diffraction.push_back(x);
    t.aero_transfer.push_back(CVec7::Zero());
  }
  t.mass_floater = Mat7::Identity();
  t.stiffness_hydrostatic = Mat7::Identity();
  t.damping_turbine = 0.1 * Mat7::Identity();
  return t;
}

ResponseSpectra response_with(const FrequencyGrid& grid, const std::function<void(CMat7&, std::size_t)>& fill)
{
  ResponseSpectra r;
  r.grid = grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CMat7 s = CMat7::Zero();
    fill(s, i);
    r.cross.push_back(s);
  }
  return r;
}

const CoefficientTables& benchmark_tables()
{
  static const CoefficientTables t = synthetic_tables(derive_seed(2024, "tables"), default_grid());
  return t;
}

} // namespace

TEST_CASE("single oscillator transfer function")
{
  const FrequencyGrid g({1e-4, 0.5, 1.0, 2.0});
  const CoefficientTables t = unit_oscillator(g);
  const auto q = rao(t, surge);
  CHECK(std::abs(q[2]) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(std::abs(q[0]) == doctest::Approx(1.0).epsilon(1e-7));
  const auto other = rao(t, heave);
  CHECK(std::abs(other[2]) == 0.0);
}

TEST_CASE("diagonal tables reproduce seven independent oscillators")
{
  const CoefficientTables t = diagonal_tables(default_grid());
  for (int k = 0; k < kDofs; ++k) {
    const auto q = rao(t, k);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.grid.size(); ++i)
      worst = std::max(worst, std::abs(q[i] - diagonal_sdof(t, k, i)) / std::abs(diagonal_sdof(t, k, i)));
    CHECK(worst < 1e-9);
  }

  // Drag damping enters as extra diagonal damping.
  Vec7 bm;
  bm << 0.3, 0.1, 0.0, 0.2, 0.05, 0.4, 0.01;
  for (int k = 0; k < kDofs; ++k) {
    const auto q = rao(t, k, bm);
    CHECK(rel(std::abs(q[123]), std::abs(diagonal_sdof(t, k, 123, bm[k]))) < 1e-9);
  }
}

TEST_CASE("zero diffraction gives a zero RAO")
{
  CoefficientTables t = diagonal_tables(default_grid());
  for (auto& x : t.diffraction)
    x.setZero();
  for (const Complex& q : rao(t, pitch))
    CHECK(q == Complex(0.0, 0.0));
}

TEST_CASE("coupled solve properties")
{
  const CoefficientTables& t = benchmark_tables();
  const Psd waves = jonswap(2.5, 8.0, t.grid);
  const Psd wind = Psd::zeros(t.grid);
  Vec7 bm = Vec7::Constant(1e5);
  bm[tower_top] = 0.0;
  const ResponseSpectra r = solve_coupled(t, waves, wind, bm);

  SUBCASE("hermitian cross spectra")
  {
    for (const CMat7& s : r.cross)
      CHECK((s - s.adjoint()).norm() <= 1e-12 * s.norm());
  }

  SUBCASE("sigma squared equals the integrated auto-spectrum")
  {
    for (int d = 0; d < kDofs; ++d)
      CHECK(r.sigma[d] * r.sigma[d] == doctest::Approx(area(r.auto_spectrum(d))).epsilon(1e-10));
  }

  SUBCASE("wave response is linear in the wave spectrum")
  {
    Psd scaled = waves;
    scaled *= 4.0;
    const ResponseSpectra r4 = solve_coupled(t, scaled, wind, bm);
    for (std::size_t i = 0; i < t.grid.size(); i += 7)
      for (int d = 0; d < kDofs; ++d)
        CHECK(std::abs(r4.cross[i](d, d) - 4.0 * r.cross[i](d, d)) <= 1e-12 * std::abs(r4.cross[i](d, d)) + 1e-300);
  }
}

TEST_CASE("singular system is a numerical error")
{
  CoefficientTables t = unit_oscillator(FrequencyGrid({0.5, 1.0, 1.5}));
  t.damping_turbine.setZero();
  const Psd waves(t.grid, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(solve_coupled(t, waves, Psd::zeros(t.grid), Vec7::Zero()), NumericalError);
}

TEST_CASE("borgman linearisation")
{
  SUBCASE("no drag converges at once with zero damping")
  {
    const CoefficientTables t = diagonal_tables(default_grid());
    const BorgmanResult b =
      borgman_iterate(t, jonswap(2.0, 9.0, t.grid), kaimal(10.0, 0.15, kIecKaimalLengthScale, t.grid));
    CHECK(b.iterations == 1);
    CHECK(b.damping_history.back().isZero());
  }

  SUBCASE("damping formula")
  {
    Vec7 qd = Vec7::Zero(), sv = Vec7::Zero();
    qd[0] = 2.0;
    sv[0] = 0.5;
    CHECK(borgman_damping(qd, sv)[0] == doctest::Approx(std::sqrt(8.0 / std::numbers::pi) * 2.0 * 0.5));
  }

  const CoefficientTables& t = benchmark_tables();
  const Psd waves = jonswap(3.0, 9.0, t.grid);
  const Psd wind = kaimal(11.4, 0.14, kIecKaimalLengthScale, t.grid);

  SUBCASE("benchmark case: convergence and monotone residual")
  {
    const BorgmanResult b = borgman_iterate(t, waves, wind);
    CHECK(b.iterations <= 20);
    CHECK(b.residuals.back() < 1e-4);
    for (std::size_t i = 2; i < b.residuals.size(); ++i)
      CHECK(b.residuals[i] < b.residuals[i - 1]);
  }

  SUBCASE("loosening the tolerance moves sigma by less than the tolerance")
  {
    BorgmanOptions o;
    o.tol = 1e-4;
    const BorgmanResult tight = borgman_iterate(t, waves, wind, o);
    o.tol = 2e-4;
    const BorgmanResult loose = borgman_iterate(t, waves, wind, o);
    for (int d = 0; d < kDofs; ++d)
      if (tight.response.sigma[d] > 0.0)
        CHECK(rel(loose.response.sigma[d], tight.response.sigma[d]) <= 2e-4);
  }

  SUBCASE("non-convergence reports the last iterates")
  {
    BorgmanOptions o;
    o.max_iter = 2;
    o.tol = 1e-12;
    try {
      borgman_iterate(t, waves, wind, o);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("last two B_M iterates") != std::string::npos);
    }
  }
}

TEST_CASE("fairlead stress")
{
  const FrequencyGrid g = default_grid();
  StructureGeometry geom;

  const Psd zero = fairlead_stress_psd(response_with(g, [](CMat7&, std::size_t) {}), geom);
  CHECK(area(zero) == 0.0);

  SUBCASE("pure surge with horizontal stiffness only")
  {
    geom.cable_stiffness << 5.0e4, 0.0, 0.0, 0.0;
    const auto r = response_with(g, [](CMat7& s, std::size_t i) { s(surge, surge) = 1e-2 / (1.0 + i); });
    const Psd p = fairlead_stress_psd(r, geom);
    for (std::size_t i = 0; i < g.size(); i += 50) {
      const double expected = 5.0e4 * 5.0e4 * (1e-2 / (1.0 + i)) / (geom.cable_area * geom.cable_area) / 1e12;
      CHECK(p.values[i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("linearised pitch displacement matches the finite rotation")
  {
    const double q5 = 1e-3;
    const Eigen::Vector2cd lin = fairlead_displacement(geom, 0.0, 0.0, q5);
    const Eigen::Vector2d exact = fairlead_displacement_exact(geom, 0.0, 0.0, q5);
    const double r = std::hypot(geom.fairlead_x, geom.fairlead_z);
    CHECK(lin[0].real() == doctest::Approx(-geom.fairlead_z * q5));
    CHECK(lin[1].real() == doctest::Approx(geom.fairlead_x * q5));
    CHECK((lin.real() - exact).norm() <= r * q5 * q5);
  }
}

TEST_CASE("tower-base stress")
{
  const FrequencyGrid g = default_grid();
  StructureGeometry geom;
  geom.tower_top_stiffness = 1.8e6;

  const double d_o = 6.5, d_i = 6.5 - 2 * 0.027;
  const double w = std::numbers::pi * (std::pow(d_o, 4) - std::pow(d_i, 4)) / (32.0 * d_o);
  CHECK(geom.section_modulus() == doctest::Approx(w).epsilon(1e-14));
  CHECK(geom.section_modulus() == doctest::Approx(0.88).epsilon(0.01));

  CHECK(area(towerbase_stress_psd(response_with(g, [](CMat7&, std::size_t) {}), geom)) == 0.0);

  const auto r = response_with(g, [](CMat7& s, std::size_t i) {
    if (i == 200)
      s(tower_top, tower_top) = 1.0;
  });
  const Psd p = towerbase_stress_psd(r, geom);
  const double expected = std::pow(1.8e6 * geom.tower_length / w, 2) / 1e12;
  CHECK(p.values[200] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(p.values[199] == 0.0);
}

TEST_CASE("synthetic tables")
{
  const FrequencyGrid g = default_grid();
  const CoefficientTables a = synthetic_tables(42, g);
  const CoefficientTables b = synthetic_tables(42, g);
  CHECK(a == b);
  CHECK_NOTHROW(a.validate());
  CHECK_FALSE(a == synthetic_tables(43, g));

  SUBCASE("positive natural frequencies and a 2-4 s tower mode")
  {
    for (std::uint64_t seed : {std::uint64_t{1}, std::uint64_t{42}, derive_seed(2024, "tables")}) {
      const CoefficientTables t = synthetic_tables(seed, g);
      const Mat7 m = t.total_mass() + t.added_mass.front();
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat7> es(t.total_stiffness(), m);
      REQUIRE(es.info() == Eigen::Success);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
      int tower_mode = 0;
      double best = 0.0;
      for (int k = 0; k < kDofs; ++k) {
        const Vec7 v = es.eigenvectors().col(k).normalized();
        if (std::abs(v[tower_top]) > best) {
          best = std::abs(v[tower_top]);
          tower_mode = k;
        }
      }
      const double period = 2.0 * std::numbers::pi / std::sqrt(es.eigenvalues()[tower_mode]);
      CHECK(period >= 2.0);
      CHECK(period <= 4.0);
    }
  }

  SUBCASE("radiation damping vanishes above 0.25 Hz")
  {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i] > 2.0 * std::numbers::pi * 0.25)
        CHECK(a.radiation_damping[i].norm() <= 1e-12 * a.radiation_damping[20].norm());
  }
}

TEST_CASE("tables round trip and schema errors")
{
  const CoefficientTables t = synthetic_tables(3, FrequencyGrid::uniform(0.05, 6.3, 40));
  std::stringstream ss;
  save_tables(ss, t);
  CHECK(load_tables(ss) == t);

  std::stringstream bad(R"({"schema_version": 1, "omega": [0.1, 0.2]})");
  try {
    load_tables(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("added_mass") != std::string::npos);
  }

  std::stringstream version(R"({"schema_version": 9})");
  CHECK_THROWS_AS(load_tables(version), ValidationError);
}
