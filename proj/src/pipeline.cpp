#include "fowt/pipeline.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <cmath>

namespace fowt {

const char* hot_spot_name(HotSpot h)
{
  return h == HotSpot::tower_base ? "tower_base" : "fairlead";
}

double iec_turbulence_intensity(double v_hub, double i_ref)
{
  require(v_hub > 0.0, "iec_turbulence_intensity: v_hub must be positive");
  return i_ref * (0.75 * v_hub + 5.6) / v_hub;
}

SeaStateEvaluator::SeaStateEvaluator(CoefficientTables tables, StructureGeometry geometry, EvaluatorSettings settings)
  : tables_(std::move(tables))
  , geometry_(geometry)
  , settings_(settings)
  , calls_(std::make_shared<std::atomic<std::size_t>>(0))
{
  tables_.validate();
  require(settings_.exposure > 0.0, "SeaStateEvaluator: exposure must be positive");
  for (const SnCurve& sn : settings_.sn)
    sn.validate();
}

DetailedEvaluation SeaStateEvaluator::evaluate_detailed(const SeaState& state) const
{
  require(state.hs >= 0.0 && state.tp > 0.0, "SeaStateEvaluator: need hs >= 0 and tp > 0");
  const FrequencyGrid& grid = tables_.grid;
  DetailedEvaluation out;
  out.summary.state = state;
  out.waves = state.hs > 0.0 ? jonswap(state.hs, state.tp, grid, settings_.jonswap_gamma)
                             : Psd::zeros(grid, "m^2 s/rad");
  out.wind = state.v_hub > 0.0
               ? kaimal(state.v_hub, iec_turbulence_intensity(state.v_hub, settings_.i_ref), settings_.length_scale, grid)
               : Psd::zeros(grid, "(m/s)^2 s/rad");

  calls_->fetch_add(1);
  out.response = borgman_iterate(tables_, out.waves, out.wind, settings_.borgman);
  out.summary.borgman_iterations = out.response.iterations;
  out.tower_stress = towerbase_stress_psd(out.response.response, geometry_);
  out.fairlead_stress = fairlead_stress_psd(out.response.response, geometry_);

  const Psd* stress[kHotSpots] = {&out.tower_stress, &out.fairlead_stress};
  for (int h = 0; h < kHotSpots; ++h) {
    const SpectralMoments m = moments(*stress[h]);
    out.summary.hot_spot[h] = short_term_damage(m, settings_.sn[h], settings_.exposure);
  }
  return out;
}

Evaluation SeaStateEvaluator::evaluate(const SeaState& state) const
{
  return evaluate_detailed(state).summary;
}

// ---------------------------------------------------------------------------

double MetoceanModel::total_mass() const
{
  double total = 0.0;
  for (const auto& g : grids)
    if (g)
      total += g->bin_probability * g->cell_mass.sum();
  return total;
}

MetoceanModel build_metocean_model(const std::vector<MetoceanRecord>& records,
                                   const WindBinSpec& spec,
                                   const HubProfile& profile,
                                   const KdeOptions& kde)
{
  require(!records.empty(), "build_metocean_model: no metocean records");
  MetoceanModel model;
  model.binned = assign_bins(records, spec, profile);
  for (int b = 0; b < kWindBins; ++b) {
    const auto& recs = model.binned.bins[b];
    if (recs.empty())
      continue;
    if (recs.size() < kde.min_records)
      throw ValidationError("wind bin '" + std::string(WindBinSpec::labels[b]) + "' holds " +
                            std::to_string(recs.size()) + " records, fewer than the KDE minimum of " +
                            std::to_string(kde.min_records));
    model.grids[b] = fit_kde(recs, b, model.binned.probability[b], kde);
    model.representatives[b] = select_representatives(*model.grids[b], recs, model.binned.representative_speed[b]);
  }
  return model;
}

Benchmark make_benchmark(std::uint64_t master_seed, const BenchmarkOptions& options)
{
  Benchmark bm;
  bm.seed = master_seed;
  bm.records = synthetic_site(derive_seed(master_seed, "site"), options.site);
  bm.metocean = build_metocean_model(bm.records, options.bins, {}, options.kde);
  bm.tables = synthetic_tables(derive_seed(master_seed, "tables"), default_grid());
  bm.geometry = StructureGeometry::from_tables(bm.tables);
  return bm;
}

} // namespace fowt
