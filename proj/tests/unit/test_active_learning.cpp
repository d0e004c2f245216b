#include <doctest.h>

#include "fowt/active_learning.hpp"
#include "fowt/errors.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace fowt;
using fowt::testing::small_benchmark;

namespace {

/// Cheap smooth DEL field standing in for the FD model.
double analytic_del(const BinDomain& d, std::size_t c)
{
  const double hs = d.cells[c][0], tp = d.cells[c][1];
  return 4.0 + 2.0 * d.bin + 6.0 * hs + 0.15 * tp + 0.4 * hs * hs;
}

AlSettings fast_settings()
{
  AlSettings s;
  s.gp.restarts = 3;
  s.gp.seed = 77;
  return s;
}

std::vector<BinSurface> blank_surfaces(const std::vector<BinDomain>& domains, Prediction p)
{
  std::vector<BinSurface> out;
  for (const BinDomain& d : domains) {
    BinSurface s;
    s.domain = std::make_shared<const BinDomain>(d);
    s.excluded.assign(d.cells.size(), 0);
    s.predictions.assign(d.cells.size(), p);
    out.push_back(std::move(s));
  }
  return out;
}

double median_of(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

} // namespace

TEST_CASE("confidence-interval width")
{
  const SnCurve sn = SnCurve::tower_base();
  CHECK(ci_width({12.0, 0.0}, 0.01, sn, 3600.0, 1.96) == 0.0);

  const double mu = 12.0, sd = 0.7, g = 1.96, pm = 3e-4;
  const double expected = 3600.0 / sn.k_a * (std::pow(mu + g * sd, 3) - std::pow(mu - g * sd, 3)) * pm;
  CHECK(ci_width({mu, sd}, pm, sn, 3600.0, g) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::pow(mu + g * sd, 3) - std::pow(mu - g * sd, 3) ==
        doctest::Approx(6 * mu * mu * g * sd + 2 * g * g * g * sd * sd * sd).epsilon(1e-14));

  CHECK(predicted_damage(-3.0, sn, 3600.0) == 0.0);
  CHECK(predicted_damage(10.0, sn, 3600.0) == doctest::Approx(damage_from_del(10.0, sn, 3600.0)));
}

TEST_CASE("select_next")
{
  const auto& domains = small_benchmark().domains;
  const AlSettings st = fast_settings();

  SUBCASE("equal predictions select the largest probability mass")
  {
    const auto surfaces = blank_surfaces(domains, {10.0, 1.0});
    const auto sel = select_next(surfaces, st);
    REQUIRE(sel.has_value());
    double best = 0.0;
    for (const BinDomain& d : domains)
      best = std::max(best, *std::max_element(d.prob_mass.begin(), d.prob_mass.end()));
    CHECK(surfaces[sel->surface].domain->prob_mass[sel->cell] == best);
  }

  SUBCASE("only the remaining candidate is selected")
  {
    auto surfaces = blank_surfaces(domains, {10.0, 1.0});
    for (auto& s : surfaces)
      std::fill(s.excluded.begin(), s.excluded.end(), 1);
    surfaces[2].excluded[17] = 0;
    const auto sel = select_next(surfaces, st);
    REQUIRE(sel.has_value());
    CHECK(sel->surface == 2);
    CHECK(sel->cell == 17);

    surfaces[2].excluded[17] = 1;
    CHECK_FALSE(select_next(surfaces, st).has_value());
  }

  SUBCASE("ties go to the first bin and cell")
  {
    auto surfaces = blank_surfaces(domains, {10.0, 1.0});
    for (auto& s : surfaces) {
      auto d = std::make_shared<BinDomain>(*s.domain);
      std::fill(d->prob_mass.begin(), d->prob_mass.end(), 1e-3);
      s.domain = d;
    }
    surfaces[0].excluded[0] = 1;
    const auto sel = select_next(surfaces, st);
    CHECK(sel->surface == 0);
    CHECK(sel->cell == 1);
  }
}

TEST_CASE("initial design")
{
  const auto& domains = small_benchmark().domains;
  const AlSettings st = fast_settings();
  InitResult a = init_surfaces(domains, analytic_del, st);
  CHECK(a.evaluations == 32);
  CHECK(a.replaced == 0);
  for (const BinSurface& s : a.surfaces) {
    CHECK(s.evaluated.size() == 8);
    CHECK(std::set<std::size_t>(s.evaluated.begin(), s.evaluated.end()).size() == 8);
    CHECK(s.accumulated_damage >= 0.0);
  }

  InitResult b = init_surfaces(domains, analytic_del, st);
  CHECK(surface_ltd(a.surfaces, st) == surface_ltd(b.surfaces, st));

  SUBCASE("FD failure moves the state to a neighbour")
  {
    const std::size_t bad = domains[1].initial_cells[3];
    const DelFunction failing = [&](const BinDomain& d, std::size_t c) {
      if (d.bin == domains[1].bin && c == bad)
        throw NumericalError("synthetic failure");
      return analytic_del(d, c);
    };
    InitResult r = init_surfaces(domains, failing, st);
    CHECK(r.replaced == 1);
    CHECK(r.surfaces[1].evaluated.size() == 8);
    CHECK(std::find(r.surfaces[1].evaluated.begin(), r.surfaces[1].evaluated.end(), bad) ==
          r.surfaces[1].evaluated.end());
    CHECK(r.surfaces[1].excluded[bad] == 1);
  }

  SUBCASE("an empty bin is skipped")
  {
    std::vector<MetoceanRecord> calm;
    for (const auto& r : small_benchmark().benchmark.records)
      if (to_hub_height(r.u10) < 12.0)
        calm.push_back(r);
    KdeOptions kde;
    kde.n_hs = 10;
    kde.n_tp = 10;
    const MetoceanModel m = build_metocean_model(calm, {}, {}, kde);
    const auto d = make_domains(m);
    CHECK(d.size() == 3);
    InitResult r = init_surfaces(d, analytic_del, st);
    CHECK(r.evaluations == 24);
    CHECK(bin_damages(r.surfaces)[3] == 0.0);
  }
}

TEST_CASE("nearest cell")
{
  const BinDomain& d = small_benchmark().domains[0];
  std::vector<char> taken(d.cells.size(), 0);
  const auto c = nearest_cell(d, d.cells[40], taken);
  CHECK(c == 40u);
  taken[40] = 1;
  const auto n = nearest_cell(d, d.cells[40], taken);
  REQUIRE(n.has_value());
  CHECK(*n != 40u);
  std::fill(taken.begin(), taken.end(), 1);
  CHECK_FALSE(nearest_cell(d, d.cells[40], taken).has_value());
}

TEST_CASE("active-learning loop bookkeeping")
{
  const auto& domains = small_benchmark().domains;
  const AlSettings st = fast_settings();

  SUBCASE("zero budget leaves the surfaces unchanged")
  {
    InitResult init = init_surfaces(domains, analytic_del, st);
    const double before = surface_ltd(init.surfaces, st);
    const LoopResult r = run_loop(init.surfaces, analytic_del, st, 0, init.evaluations);
    CHECK(r.iterations == 0);
    CHECK(r.evaluations == 32);
    CHECK(r.ltd == before);
  }

  SUBCASE("counts, uniqueness and consistent LTD")
  {
    InitResult init = init_surfaces(domains, analytic_del, st);
    const LoopResult r = run_loop(init.surfaces, analytic_del, st, 25, init.evaluations);
    CHECK(static_cast<std::size_t>(r.iterations) == r.evaluations - 32);
    std::size_t total = 0;
    for (const BinSurface& s : init.surfaces) {
      CHECK(std::set<std::size_t>(s.evaluated.begin(), s.evaluated.end()).size() == s.evaluated.size());
      total += s.evaluated.size();
    }
    CHECK(total == r.evaluations);
    CHECK(r.ltd == surface_ltd(init.surfaces, st));
    CHECK(r.log.back().ltd == r.ltd);
    CHECK(r.log.front().iteration == 0);

    std::ostringstream csv;
    write_iteration_log(csv, r.log);
    CHECK(csv.str().rfind("iteration,evaluations,bin,hs,tp,del,damage_bin0,damage_bin1,damage_bin2,damage_bin3,ltd\n", 0) == 0);
  }

  SUBCASE("smooth field converges close to the exact LTD")
  {
    InitResult init = init_surfaces(domains, analytic_del, st);
    const LoopResult r = run_loop(init.surfaces, analytic_del, st, 300, init.evaluations);
    std::vector<WeightedDamage> exact;
    for (const BinDomain& d : domains)
      for (std::size_t c = 0; c < d.cells.size(); ++c)
        exact.push_back({damage_from_del(analytic_del(d, c), st.sn, st.exposure), d.prob_mass[c]});
    CHECK(r.converged);
    CHECK(std::abs(r.ltd / long_term_damage(exact) - 1.0) < 0.003);
  }
}

TEST_CASE("CI is zero at evaluated cells and total CI falls with frozen hyperparameters")
{
  const auto& domains = small_benchmark().domains;
  const AlSettings st = fast_settings();
  InitResult init = init_surfaces(domains, analytic_del, st);
  BinSurface& s = init.surfaces[1];

  auto ci_at = [&](std::size_t c) { return ci_width(s.predictions[c], s.domain->prob_mass[c], st.sn, st.exposure, st.gamma); };
  const Hyperparams& hp = s.model->hyperparams();
  for (std::size_t c : s.evaluated) {
    CHECK(s.predictions[c].sd <= 1.5 * hp.noise_sd);
    const Prediction prior{s.predictions[c].mean, std::sqrt(hp.signal_scale)};
    CHECK(ci_at(c) <= 1e-3 * ci_width(prior, s.domain->prob_mass[c], st.sn, st.exposure, st.gamma));
  }
  for (std::size_t c = 0; c < s.predictions.size(); ++c)
    if (s.predictions[c].sd > 0.0 && s.domain->prob_mass[c] > 0.0)
      CHECK(ci_at(c) > 0.0);

  auto total_ci = [&] {
    double t = 0.0;
    for (std::size_t c = 0; c < s.predictions.size(); ++c)
      t += ci_at(c);
    return t;
  };
  double prev = total_ci();
  for (int step = 0; step < 6; ++step) {
    const auto sel = select_next(std::vector<BinSurface>{s}, st);
    REQUIRE(sel.has_value());
    s.model = s.model->add_point_frozen(s.domain->cells[sel->cell], analytic_del(*s.domain, sel->cell));
    s.evaluated.push_back(sel->cell);
    s.excluded[sel->cell] = 1;
    s.refresh(st);
    const double now = total_ci();
    CHECK(now <= prev * (1.0 + 1e-12));
    prev = now;
  }
}

TEST_CASE("selections target large residuals on the benchmark surface")
{
  const auto& sb = small_benchmark();
  AlSettings st;
  st.gp.seed = 5;
  const DelFunction del = [&](const BinDomain& d, std::size_t c) {
    for (std::size_t k = 0; k < sb.domains.size(); ++k)
      if (sb.domains[k].bin == d.bin)
        return sb.grid.del(k, c, HotSpot::tower_base);
    return 0.0;
  };
  InitResult init = init_surfaces(sb.domains, del, st);
  int above = 0;
  const int steps = 20;
  for (int it = 0; it < steps; ++it) {
    std::vector<double> residuals;
    double chosen = 0.0;
    const auto sel = select_next(init.surfaces, st);
    REQUIRE(sel.has_value());
    for (std::size_t k = 0; k < init.surfaces.size(); ++k) {
      const BinSurface& s = init.surfaces[k];
      for (std::size_t c = 0; c < s.predictions.size(); ++c) {
        if (s.excluded[c])
          continue;
        const double pm = s.domain->prob_mass[c];
        const double r = std::abs(sb.grid.damage(k, c, HotSpot::tower_base) * pm -
                                  predicted_damage(s.predictions[c].mean, st.sn, st.exposure) * pm);
        residuals.push_back(r);
        if (k == sel->surface && c == sel->cell)
          chosen = r;
      }
    }
    above += chosen > median_of(residuals);
    run_loop(init.surfaces, del, st, 1, 0);
  }
  CHECK(above >= 16);
}

TEST_CASE("convergence tracker")
{
  ConvergenceTracker t(3, 1e-4);
  const std::array<double, kWindBins> base{1e-6, 2e-6, 3e-6, 4e-6};
  t.record(base);
  CHECK_FALSE(t.converged());
  for (int i = 0; i < 3; ++i)
    t.record(base);
  CHECK(t.converged());

  auto moved = base;
  moved[2] += 2e-4 * 1e-5;
  t.record(moved);
  CHECK_FALSE(t.converged());
  for (int i = 0; i < 2; ++i)
    t.record(moved);
  CHECK_FALSE(t.converged());
  t.record(moved);
  CHECK(t.converged());

  // A change just below the threshold counts as converged.
  ConvergenceTracker u(1, 1e-4);
  u.record(base);
  auto small = base;
  small[0] += 0.5e-4 * 1e-5;
  u.record(small);
  CHECK(u.converged());
}

TEST_CASE("Monte Carlo")
{
  const auto& sb = small_benchmark();
  const auto& domains = sb.domains;
  const DamageLookup exact = [&](std::size_t k, std::size_t c) { return sb.grid.damage(k, c, HotSpot::tower_base); };
  const CellSampler sampler(domains);
  const double exact_ltd = sb.grid.ltd(domains, HotSpot::tower_base);

  SUBCASE("a single sample is that cell's damage")
  {
    const auto trace = mcs_trace(domains, exact, 1, 42);
    Rng rng(derive_seed(42, "mcs"));
    const auto d = sampler.draw(rng);
    CHECK(trace[0] == doctest::Approx(exact(d.domain, d.cell) * sampler.total_mass()).epsilon(1e-15));
    CHECK(sampler.total_mass() == doctest::Approx(1.0).epsilon(1e-3));
  }

  SUBCASE("reproducible")
  {
    CHECK(mcs_trace(domains, exact, 500, 3) == mcs_trace(domains, exact, 500, 3));
    CHECK(mcs_trace(domains, exact, 500, 3) != mcs_trace(domains, exact, 500, 4));
  }

  SUBCASE("unbiased over repeated seeds")
  {
    std::vector<double> est;
    for (std::uint64_t s = 0; s < 100; ++s)
      est.push_back(mcs_trace(domains, exact, 500, s).back());
    double mean = 0.0, var = 0.0;
    for (double e : est)
      mean += e / est.size();
    for (double e : est)
      var += (e - mean) * (e - mean) / (est.size() - 1);
    CHECK(std::abs(mean - exact_ltd) <= 2.0 * std::sqrt(var / est.size()));
  }

  SUBCASE("spread shrinks with the sample count")
  {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
      std::vector<double> est;
      for (std::uint64_t s = 0; s < 40; ++s)
        est.push_back(mcs_trace(domains, exact, n, s).back());
      std::sort(est.begin(), est.end());
      const double iqr = est[30] - est[10];
      CHECK(iqr < prev);
      prev = iqr;
    }
  }

  SUBCASE("surrogate MCS follows the same sample path")
  {
    const AlSettings st = fast_settings();
    InitResult init = init_surfaces(domains, analytic_del, st);
    const DamageLookup from_surfaces = [&](std::size_t k, std::size_t c) {
      return predicted_damage(init.surfaces[k].predictions[c].mean, st.sn, st.exposure);
    };
    CHECK(surrogate_mcs(init.surfaces, st, 2000, 8) == mcs_trace(domains, from_surfaces, 2000, 8));
  }
}

TEST_CASE("error-crossing helpers")
{
  const std::vector<double> trace{2.0, 1.5, 1.0005, 0.9, 1.0001, 0.9999, 1.0};
  CHECK(sustained_within(trace, 1.0, 1e-3) == 5u);
  CHECK(sustained_within(trace, 1.0, 0.2) == 3u);
  CHECK_FALSE(sustained_within({1.0, 2.0}, 1.0, 1e-3).has_value());

  std::vector<IterationRecord> log(5);
  for (int i = 0; i < 5; ++i) {
    log[i].iteration = i < 2 ? 0 : i - 1;
    log[i].evaluations = 32 + (i < 2 ? 0 : i - 1);
  }
  log[0].ltd = 5.0;
  log[1].ltd = 1.0005;
  log[2].ltd = 1.1;
  log[3].ltd = 1.0001;
  log[4].ltd = 0.9995;
  CHECK(loop_evaluations_to(log, 1.0, 1e-3) == 34u);
}

TEST_CASE("full-grid output")
{
  const auto& sb = small_benchmark();
  CHECK(sb.grid.failures == 0);
  std::size_t n = 0;
  for (const auto& d : sb.domains)
    n += d.cells.size();
  CHECK(n == 4 * 256);
  std::ostringstream csv;
  write_full_grid(csv, sb.domains, sb.grid);
  const std::string text = csv.str();
  CHECK(text.rfind("bin,cell,hs,tp,prob_mass,del_tower_base,damage_tower_base,del_fairlead,damage_fairlead,borgman_iterations\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(n + 1));
}
