#include "fowt/active_learning.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace fowt {

namespace {

std::string fmt(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> cumulative(const std::vector<double>& w)
{
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += std::max(w[i], 0.0);
    cdf[i] = acc;
  }
  if (acc > 0.0) {
    for (double& c : cdf)
      c /= acc;
    std::size_t last = w.size();
    while (last > 0 && !(w[last - 1] > 0.0))
      --last;
    for (std::size_t i = last - 1; i < cdf.size(); ++i)
      cdf[i] = 1.0;
  }
  return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double u)
{
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

GpFitOptions bin_options(const AlSettings& settings, int bin)
{
  GpFitOptions o = settings.gp;
  o.seed = derive_seed(settings.gp.seed, static_cast<std::uint64_t>(bin));
  return o;
}

} // namespace

// ---------------------------------------------------------------------------

SeaState BinDomain::state(std::size_t cell) const
{
  require(cell < cells.size(), "BinDomain::state: cell index out of range");
  return {bin, v_hub, cells[cell][0], cells[cell][1], prob_mass[cell]};
}

double BinDomain::total_mass() const
{
  double total = 0.0;
  for (double p : prob_mass)
    total += p;
  return total;
}

std::optional<std::size_t> nearest_cell(const BinDomain& domain,
                                        const Eigen::Vector2d& point,
                                        const std::vector<char>& taken)
{
  const Eigen::Vector2d z = domain.standardization.apply(point);
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < domain.cells.size(); ++c) {
    if (c < taken.size() && taken[c])
      continue;
    const double d = (domain.standardization.apply(domain.cells[c]) - z).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<BinDomain> make_domains(const MetoceanModel& model)
{
  std::vector<BinDomain> out;
  for (int b = 0; b < kWindBins; ++b) {
    if (!model.grids[b])
      continue;
    const JointDensityGrid& g = *model.grids[b];
    BinDomain d;
    d.bin = b;
    d.v_hub = model.binned.representative_speed[b];
    d.probability = g.bin_probability;
    d.n_hs = g.hs_grid.size();
    d.n_tp = g.tp_grid.size();
    for (std::size_t i = 0; i < d.n_hs; ++i)
      for (std::size_t j = 0; j < d.n_tp; ++j) {
        d.cells.emplace_back(g.hs_grid[i], g.tp_grid[j]);
        d.prob_mass.push_back(g.bin_probability * g.cell_mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(model.binned.bins[b].size());
    for (const MetoceanRecord& r : model.binned.bins[b])
      pts.emplace_back(r.hs, r.tp);
    d.standardization = Standardization::of(pts);

    std::vector<char> taken(d.cells.size(), 0);
    if (model.representatives[b]) {
      for (const SeaState& s : model.representatives[b]->states) {
        const auto c = nearest_cell(d, {s.hs, s.tp}, taken);
        if (!c)
          break;
        taken[*c] = 1;
        d.initial_cells.push_back(*c);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------

double predicted_damage(double del_mean, const SnCurve& sn, double exposure)
{
  return damage_from_del(std::max(del_mean, 0.0), sn, exposure);
}

double ci_width(const Prediction& p, double prob_mass, const SnCurve& sn, double exposure, double gamma)
{
  require(sn.b == 3.0, "ci_width: the confidence-interval width is defined for b = 3");
  const double mu = p.mean;
  const double s = std::max(p.sd, 0.0);
  return exposure / sn.k_a * (6.0 * mu * mu * gamma * s + 2.0 * gamma * gamma * gamma * s * s * s) * prob_mass;
}

void BinSurface::refresh(const AlSettings& settings)
{
  require(model.has_value(), "BinSurface::refresh: no model");
  predictions = model->predict_many(domain->cells);
  double acc = 0.0;
  for (std::size_t c = 0; c < predictions.size(); ++c)
    acc += predicted_damage(predictions[c].mean, settings.sn, settings.exposure) * domain->prob_mass[c];
  accumulated_damage = acc;
}

bool BinSurface::has_candidates() const
{
  return std::find(excluded.begin(), excluded.end(), 0) != excluded.end();
}

InitResult init_surfaces(const std::vector<BinDomain>& domains, const DelFunction& del, const AlSettings& settings)
{
  InitResult out;
  for (const BinDomain& d : domains) {
    BinSurface s;
    s.domain = std::make_shared<const BinDomain>(d);
    s.excluded.assign(d.cells.size(), 0);
    for (std::size_t c0 : d.initial_cells) {
      std::optional<std::size_t> c = c0;
      const Eigen::Vector2d target = d.cells[c0];
      bool moved = false;
      while (c && s.excluded[*c])
        c = nearest_cell(d, target, s.excluded);
      while (c) {
        ++out.evaluations;
        s.excluded[*c] = 1;
        try {
          const double y = del(d, *c);
          s.evaluated.push_back(*c);
          s.observed_del.push_back(y);
          break;
        } catch (const NumericalError& e) {
          log::warning("init_surfaces: FD failure in bin " + std::to_string(d.bin) + " at cell " +
                       std::to_string(*c) + " (" + e.what() + "); trying the nearest neighbour");
          moved = true;
          c = nearest_cell(d, target, s.excluded);
        }
      }
      if (moved && c)
        ++out.replaced;
    }
    if (s.evaluated.size() < 2)
      throw NumericalError("init_surfaces: fewer than two successful evaluations in bin " + std::to_string(d.bin));

    std::vector<Eigen::Vector2d> x;
    for (std::size_t c : s.evaluated)
      x.push_back(d.cells[c]);
    s.model = GaussianProcess::fit(x, s.observed_del, d.standardization, bin_options(settings, d.bin));
    s.refresh(settings);
    out.surfaces.push_back(std::move(s));
  }
  return out;
}

std::optional<Selection> select_next(const std::vector<BinSurface>& surfaces, const AlSettings& settings)
{
  std::optional<Selection> best;
  for (std::size_t k = 0; k < surfaces.size(); ++k) {
    const BinSurface& s = surfaces[k];
    for (std::size_t c = 0; c < s.predictions.size(); ++c) {
      if (s.excluded[c])
        continue;
      const double score =
        ci_width(s.predictions[c], s.domain->prob_mass[c], settings.sn, settings.exposure, settings.gamma);
      if (!best || score > best->score)
        best = Selection{k, c, score};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

ConvergenceTracker::ConvergenceTracker(int window, double threshold) : window_(window), threshold_(threshold)
{
  require(window >= 1, "ConvergenceTracker: window must be >= 1");
  require(threshold > 0.0, "ConvergenceTracker: threshold must be positive");
}

void ConvergenceTracker::record(const std::array<double, kWindBins>& bin_damage)
{
  history_.push_back(bin_damage);
}

bool ConvergenceTracker::converged() const
{
  if (history_.size() < static_cast<std::size_t>(window_) + 1)
    return false;
  for (std::size_t k = history_.size() - window_; k < history_.size(); ++k) {
    double ltd = 0.0;
    for (double v : history_[k])
      ltd += v;
    for (int b = 0; b < kWindBins; ++b) {
      const double delta = std::abs(history_[k][b] - history_[k - 1][b]);
      if (delta != 0.0 && !(delta < threshold_ * ltd))
        return false;
    }
  }
  return true;
}

std::array<double, kWindBins> bin_damages(const std::vector<BinSurface>& surfaces)
{
  std::array<double, kWindBins> out{};
  for (const BinSurface& s : surfaces)
    out[s.domain->bin] += s.accumulated_damage;
  return out;
}

double surface_ltd(const std::vector<BinSurface>& surfaces, const AlSettings& settings)
{
  std::array<double, kWindBins> per_bin{};
  double mass = 0.0;
  for (const BinSurface& s : surfaces) {
    double acc = 0.0;
    for (std::size_t c = 0; c < s.predictions.size(); ++c) {
      const double damage = predicted_damage(s.predictions[c].mean, settings.sn, settings.exposure);
      require(damage >= 0.0 && std::isfinite(damage), "surface_ltd: invalid damage value");
      acc += damage * s.domain->prob_mass[c];
      mass += s.domain->prob_mass[c];
    }
    per_bin[s.domain->bin] += acc;
  }
  if (std::abs(mass - 1.0) > 1e-3)
    throw ValidationError("surface_ltd: probability masses sum to " + std::to_string(mass) + ", expected 1");
  double ltd = 0.0;
  for (double v : per_bin)
    ltd += v;
  return ltd;
}

LoopResult run_loop(std::vector<BinSurface>& surfaces,
                    const DelFunction& del,
                    const AlSettings& settings,
                    int budget,
                    std::size_t initial_evaluations)
{
  require(budget >= 0, "run_loop: budget must be non-negative");
  LoopResult r;
  ConvergenceTracker tracker(settings.window, settings.threshold);

  std::size_t evaluated = 0;
  for (const BinSurface& s : surfaces)
    evaluated += s.evaluated.size();
  r.evaluations = initial_evaluations > 0 ? initial_evaluations : evaluated;

  auto total = [](const std::array<double, kWindBins>& d) {
    double t = 0.0;
    for (double v : d)
      t += v;
    return t;
  };

  std::array<double, kWindBins> damage = bin_damages(surfaces);
  tracker.record(damage);
  for (const BinSurface& s : surfaces)
    for (std::size_t k = 0; k < s.evaluated.size(); ++k) {
      const Eigen::Vector2d& x = s.domain->cells[s.evaluated[k]];
      r.log.push_back({0, r.evaluations, s.domain->bin, x[0], x[1], s.observed_del[k], damage, total(damage)});
    }

  for (int it = 1; it <= budget; ++it) {
    if (tracker.converged())
      break;
    const std::optional<Selection> sel = select_next(surfaces, settings);
    if (!sel) {
      r.exhausted = true;
      break;
    }
    BinSurface& s = surfaces[sel->surface];
    const BinDomain& d = *s.domain;
    ++r.evaluations;
    r.iterations = it;
    s.excluded[sel->cell] = 1;
    double y = std::numeric_limits<double>::quiet_NaN();
    try {
      y = del(d, sel->cell);
      s.evaluated.push_back(sel->cell);
      s.observed_del.push_back(y);
      s.model = s.model->add_point(d.cells[sel->cell], y, bin_options(settings, d.bin));
      s.refresh(settings);
    } catch (const NumericalError& e) {
      log::warning("run_loop: FD failure in bin " + std::to_string(d.bin) + " at cell " + std::to_string(sel->cell) +
                   " (" + e.what() + "); cell skipped");
    }
    damage = bin_damages(surfaces);
    tracker.record(damage);
    r.log.push_back({it, r.evaluations, d.bin, d.cells[sel->cell][0], d.cells[sel->cell][1], y, damage, total(damage)});
  }

  r.converged = tracker.converged();
  if (!r.converged && !r.exhausted && budget > 0)
    log::warning("run_loop: budget of " + std::to_string(budget) +
                 " evaluations exhausted before convergence; returning the current surfaces");
  r.ltd = surface_ltd(surfaces, settings);
  return r;
}

void write_iteration_log(std::ostream& out, const std::vector<IterationRecord>& log)
{
  out << "iteration,evaluations,bin,hs,tp,del";
  for (int b = 0; b < kWindBins; ++b)
    out << ",damage_bin" << b;
  out << ",ltd\n";
  for (const IterationRecord& r : log) {
    out << r.iteration << ',' << r.evaluations << ',' << r.bin << ',' << fmt(r.hs) << ',' << fmt(r.tp) << ','
        << (std::isfinite(r.del) ? fmt(r.del) : std::string());
    for (double v : r.bin_damage)
      out << ',' << fmt(v);
    out << ',' << fmt(r.ltd) << '\n';
  }
}

// ---------------------------------------------------------------------------

CellSampler::CellSampler(const std::vector<BinDomain>& domains)
{
  require(!domains.empty(), "CellSampler: no domains");
  std::vector<double> bin_mass;
  for (const BinDomain& d : domains) {
    bin_mass.push_back(d.total_mass());
    cell_cdf_.push_back(cumulative(d.prob_mass));
  }
  for (double m : bin_mass)
    total_ += m;
  require(total_ > 0.0, "CellSampler: total probability mass is zero");
  bin_cdf_ = cumulative(bin_mass);
}

CellSampler::Draw CellSampler::draw(Rng& rng) const
{
  Draw d;
  d.domain = pick(bin_cdf_, rng.uniform());
  d.cell = pick(cell_cdf_[d.domain], rng.uniform());
  return d;
}

std::vector<double> mcs_trace(const std::vector<BinDomain>& domains,
                              const DamageLookup& damage,
                              std::size_t n_samples,
                              std::uint64_t seed)
{
  require(n_samples >= 1, "mcs_trace: need at least one sample");
  const CellSampler sampler(domains);
  Rng rng(derive_seed(seed, "mcs"));
  std::vector<double> trace(n_samples);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const CellSampler::Draw d = sampler.draw(rng);
    sum += damage(d.domain, d.cell);
    trace[i] = sum / static_cast<double>(i + 1) * sampler.total_mass();
  }
  return trace;
}

std::vector<double> surrogate_mcs(const std::vector<BinSurface>& surfaces,
                                  const AlSettings& settings,
                                  std::size_t n_samples,
                                  std::uint64_t seed)
{
  std::vector<BinDomain> domains;
  for (const BinSurface& s : surfaces)
    domains.push_back(*s.domain);
  return mcs_trace(
    domains,
    [&](std::size_t k, std::size_t c) {
      return predicted_damage(surfaces[k].predictions[c].mean, settings.sn, settings.exposure);
    },
    n_samples,
    seed);
}

std::optional<std::size_t> sustained_within(const std::vector<double>& trace, double exact, double rel_tol)
{
  require(exact != 0.0, "sustained_within: exact value must be non-zero");
  for (std::size_t i = trace.size(); i-- > 0;) {
    if (std::abs(trace[i] - exact) > rel_tol * std::abs(exact))
      return i + 1 == trace.size() ? std::nullopt : std::optional<std::size_t>(i + 2);
  }
  if (trace.empty())
    return std::nullopt;
  return 1;
}

std::optional<std::size_t> loop_evaluations_to(const std::vector<IterationRecord>& log, double exact, double rel_tol)
{
  std::vector<double> ltd;
  std::vector<std::size_t> count;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].iteration == 0 && i + 1 < log.size() && log[i + 1].iteration == 0)
      continue;
    ltd.push_back(log[i].ltd);
    count.push_back(log[i].evaluations);
  }
  const auto pos = sustained_within(ltd, exact, rel_tol);
  if (!pos)
    return std::nullopt;
  return count[*pos - 1];
}

// ---------------------------------------------------------------------------

double FullGrid::ltd(const std::vector<BinDomain>& domains, HotSpot h) const
{
  require(domains.size() == cells.size(), "FullGrid::ltd: domain count mismatch");
  std::vector<WeightedDamage> w;
  for (std::size_t k = 0; k < domains.size(); ++k)
    for (std::size_t c = 0; c < cells[k].size(); ++c)
      w.push_back({cells[k][c].damage(h), domains[k].prob_mass[c]});
  return long_term_damage(w);
}

double FullGrid::del(std::size_t domain, std::size_t cell, HotSpot h) const
{
  return cells.at(domain).at(cell).del(h);
}

double FullGrid::damage(std::size_t domain, std::size_t cell, HotSpot h) const
{
  return cells.at(domain).at(cell).damage(h);
}

FullGrid full_grid(const std::vector<BinDomain>& domains, const SeaStateEvaluator& evaluator)
{
  FullGrid g;
  for (const BinDomain& d : domains) {
    std::vector<Evaluation> row;
    row.reserve(d.cells.size());
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      try {
        row.push_back(evaluator.evaluate(d.state(c)));
      } catch (const NumericalError& e) {
        ++g.failures;
        log::warning("full_grid: FD failure in bin " + std::to_string(d.bin) + " at cell " + std::to_string(c) + ": " +
                     e.what());
        Evaluation empty;
        empty.state = d.state(c);
        row.push_back(empty);
      }
    }
    g.cells.push_back(std::move(row));
  }
  return g;
}

void write_full_grid(std::ostream& out, const std::vector<BinDomain>& domains, const FullGrid& grid)
{
  out << "bin,cell,hs,tp,prob_mass,del_tower_base,damage_tower_base,del_fairlead,damage_fairlead,borgman_iterations\n";
  for (std::size_t k = 0; k < domains.size(); ++k) {
    const BinDomain& d = domains[k];
    for (std::size_t c = 0; c < d.cells.size(); ++c) {
      const Evaluation& e = grid.cells[k][c];
      out << d.bin << ',' << c << ',' << fmt(d.cells[c][0]) << ',' << fmt(d.cells[c][1]) << ',' << fmt(d.prob_mass[c])
          << ',' << fmt(e.del(HotSpot::tower_base)) << ',' << fmt(e.damage(HotSpot::tower_base)) << ','
          << fmt(e.del(HotSpot::fairlead)) << ',' << fmt(e.damage(HotSpot::fairlead)) << ',' << e.borgman_iterations
          << '\n';
    }
  }
}

} // namespace fowt
