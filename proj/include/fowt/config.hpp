#pragma once

#include "fowt/active_learning.hpp"
#include "fowt/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fowt {

/// Run configuration, read from one versioned JSON file. Every field has a
/// default; see README for the schema.
struct RunConfig
{
  static constexpr int kSchemaVersion = 1;

  std::uint64_t master_seed = 2024;
  std::string output_dir = "fowt-out";

  // metocean
  std::optional<std::string> metocean_file; ///< synthetic site when absent
  double synthetic_years = 28.5;
  HubProfile hub{};
  WindBinSpec bins{};
  KdeOptions kde{};

  // structure
  std::optional<std::string> tables_file;
  std::optional<std::uint64_t> synthetic_tables_seed; ///< fallback when the tables file is absent
  double grid_min = 0.05;
  double grid_max = 6.3;
  int grid_points = 500;

  // loads and fatigue
  EvaluatorSettings evaluator{};

  // active learning
  double gamma = 1.96;
  int budget = 500;
  int window = 10;
  double threshold = 1e-4;
  int gp_restarts = 8;
  double target_error = 0.002;

  // Monte Carlo
  std::size_t mcs_samples = 100000;
  int mcs_repetitions = 100;

  /// Parses and validates; all problems are reported in one ValidationError.
  static RunConfig from_json(const std::string& text, const std::string& base_dir = ".");
  static RunConfig load(const std::string& path);

  /// Canonical JSON with every default filled in.
  std::string to_json() const;
  /// FNV-1a of the canonical JSON, as 16 hex digits.
  std::string hash() const;

  AlSettings al_settings(HotSpot h) const;
  FrequencyGrid frequency_grid() const;
};

/// Everything the commands share: metocean model, candidate domains, FD evaluator.
struct Study
{
  RunConfig config;
  std::vector<MetoceanRecord> records;
  std::size_t rejected_rows = 0;
  MetoceanModel metocean;
  std::vector<BinDomain> domains;
  std::optional<SeaStateEvaluator> evaluator;
  std::vector<std::string> notes; ///< provenance remarks for the report

  static Study build(const RunConfig& config);
};

} // namespace fowt
