#include "support.hpp"

#include "fowt/random.hpp"

#include <cmath>

namespace fowt::testing {

CoefficientTables diagonal_tables(const FrequencyGrid& grid)
{
  CoefficientTables t;
  t.grid = grid;
  const Vec7 m{2.0, 2.5, 3.0, 1.5, 4.0, 1.2, 0.8};
  const Vec7 k{1.0, 1.4, 9.0, 3.0, 6.0, 0.7, 30.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    Mat7 a = Mat7::Zero(), b = Mat7::Zero();
    CVec7 x, f;
    for (int d = 0; d < kDofs; ++d) {
      a(d, d) = 0.3 * m[d] / (1.0 + w * w);
      b(d, d) = 0.05 * (d + 1) * w * std::exp(-w);
      x[d] = Complex(1.0 + 0.1 * d, 0.2 * w);
      f[d] = Complex(0.01 * d, 0.0);
    }
    t.added_mass.push_back(a);
    t.radiation_damping.push_back(b);
    t.diffraction.push_back(x);
    t.aero_transfer.push_back(f);
  }
  t.mass_floater = m.asDiagonal();
  t.stiffness_hydrostatic = k.asDiagonal();
  t.damping_turbine = Vec7::Constant(0.02).asDiagonal();
  return t;
}

Complex diagonal_sdof(const CoefficientTables& t, int k, std::size_t i, double drag_damping)
{
  const double w = t.grid[i];
  const double m = t.total_mass()(k, k) + t.added_mass[i](k, k);
  const double c = t.radiation_damping[i](k, k) + t.damping_turbine(k, k) + drag_damping;
  const double s = t.total_stiffness()(k, k);
  return t.diffraction[i][k] / Complex(s - w * w * m, w * c);
}

namespace {

SmallBenchmark build_small()
{
  BenchmarkOptions o;
  o.kde.n_hs = 16;
  o.kde.n_tp = 16;
  Benchmark b = make_benchmark(7, o);
  b.tables = synthetic_tables(derive_seed(7, "tables"), FrequencyGrid::uniform(0.05, 6.3, 160));
  b.geometry = StructureGeometry::from_tables(b.tables);
  std::vector<BinDomain> domains = make_domains(b.metocean);
  SeaStateEvaluator ev(b.tables, b.geometry);
  FullGrid g = full_grid(domains, ev);
  return SmallBenchmark{std::move(b), std::move(domains), std::move(ev), std::move(g)};
}

} // namespace

const SmallBenchmark& small_benchmark()
{
  static const SmallBenchmark instance = build_small();
  return instance;
}

double rel(double a, double b)
{
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

} // namespace fowt::testing
