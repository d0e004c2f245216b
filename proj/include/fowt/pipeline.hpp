#pragma once

#include "fowt/fatigue.hpp"
#include "fowt/fd_model.hpp"
#include "fowt/metocean.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fowt {

inline constexpr int kHotSpots = 2;

enum class HotSpot : int
{
  tower_base = 0,
  fairlead = 1
};

const char* hot_spot_name(HotSpot h);

/// IEC normal turbulence model: sigma_1 = I_ref (0.75 V + 5.6), returned as sigma_1 / V.
double iec_turbulence_intensity(double v_hub, double i_ref = 0.14);

struct EvaluatorSettings
{
  double exposure = 3600.0;
  double jonswap_gamma = 3.3;
  double i_ref = 0.14;
  double length_scale = kIecKaimalLengthScale;
  std::array<SnCurve, kHotSpots> sn{SnCurve::tower_base(), SnCurve::mooring()};
  BorgmanOptions borgman{};
};

/// Short-term fatigue of both hot spots for one sea state.
struct Evaluation
{
  SeaState state;
  std::array<DamageEstimate, kHotSpots> hot_spot{};
  int borgman_iterations = 0;

  double del(HotSpot h) const { return hot_spot[static_cast<int>(h)].del; }
  double damage(HotSpot h) const { return hot_spot[static_cast<int>(h)].damage; }
};

struct DetailedEvaluation
{
  Evaluation summary;
  Psd waves;
  Psd wind;
  BorgmanResult response;
  Psd tower_stress;
  Psd fairlead_stress;
};

/// Sea state -> FD response -> stress PSDs -> Dirlik damage and 1-Hz DEL.
class SeaStateEvaluator
{
public:
  SeaStateEvaluator(CoefficientTables tables, StructureGeometry geometry, EvaluatorSettings settings = {});

  Evaluation evaluate(const SeaState& state) const;
  DetailedEvaluation evaluate_detailed(const SeaState& state) const;

  const CoefficientTables& tables() const { return tables_; }
  const StructureGeometry& geometry() const { return geometry_; }
  const EvaluatorSettings& settings() const { return settings_; }
  /// Number of FD solves performed so far.
  std::size_t calls() const { return calls_->load(); }

private:
  CoefficientTables tables_;
  StructureGeometry geometry_;
  EvaluatorSettings settings_;
  std::shared_ptr<std::atomic<std::size_t>> calls_;
};

/// Metocean stage output: bins, per-bin KDE grids and representative sea states.
struct MetoceanModel
{
  BinnedRecords binned;
  std::array<std::optional<JointDensityGrid>, kWindBins> grids;
  std::array<std::optional<RepresentativeSet>, kWindBins> representatives;

  /// Sum of bin probability * cell mass over every fitted grid.
  double total_mass() const;
};

MetoceanModel build_metocean_model(const std::vector<MetoceanRecord>& records,
                                   const WindBinSpec& spec = {},
                                   const HubProfile& profile = {},
                                   const KdeOptions& kde = {});

/// Fully specified synthetic benchmark: synthetic site plus synthetic tables,
/// both derived from one master seed.
struct Benchmark
{
  std::uint64_t seed = 0;
  std::vector<MetoceanRecord> records;
  MetoceanModel metocean;
  CoefficientTables tables;
  StructureGeometry geometry;
};

struct BenchmarkOptions
{
  SyntheticSiteOptions site{};
  KdeOptions kde{};
  WindBinSpec bins{};
};

Benchmark make_benchmark(std::uint64_t master_seed, const BenchmarkOptions& options = {});

} // namespace fowt
