#pragma once

#include <Eigen/Dense>

#include <array>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fowt {

inline constexpr int kWindBins = 4;

struct MetoceanRecord
{
  std::chrono::sys_seconds timestamp{};
  double u10 = 0.0; ///< mean wind speed at 10 m [m/s]
  double hs = 0.0;  ///< significant wave height [m]
  double tp = 0.0;  ///< spectral peak period [s]
};

struct RejectedRow
{
  std::size_t line = 0;
  std::string reason;
};

struct IngestReport
{
  std::vector<MetoceanRecord> records;
  std::vector<RejectedRow> rejected;
  std::size_t rows = 0; ///< data rows seen (header excluded)
};

/// Reads `timestamp,u10,hs,tp` delimited text. Malformed rows are collected;
/// more than 10 % rejected rows is an error.
IngestReport ingest_records(std::istream& in);
IngestReport ingest_records(const std::string& path);

void write_records(std::ostream& out, const std::vector<MetoceanRecord>& records);

std::string format_timestamp(std::chrono::sys_seconds t);
std::chrono::sys_seconds parse_timestamp(const std::string& text);

/// Power-law profile: u10 (z_hub / z_ref)^alpha.
double to_hub_height(double u10, double z_hub = 90.0, double z_ref = 10.0, double alpha = 0.14);

struct HubProfile
{
  double z_hub = 90.0;
  double z_ref = 10.0;
  double alpha = 0.14;
};

struct WindBinSpec
{
  std::array<double, kWindBins - 1> edges{3.0, 10.5, 12.4};
  /// Representative hub speeds; by default the mean V of each bin.
  std::optional<std::array<double, kWindBins>> representatives;

  static constexpr std::array<const char*, kWindBins> labels{"below cut-in", "below rated",
                                                             "near rated", "above rated"};

  void validate() const;
  /// Left-closed, right-open bins: [0, e0), [e0, e1), [e1, e2), [e2, inf).
  int bin_of(double v_hub) const;
};

struct BinnedRecords
{
  std::array<std::vector<MetoceanRecord>, kWindBins> bins;
  std::array<double, kWindBins> probability{};
  std::array<double, kWindBins> representative_speed{};
  std::array<bool, kWindBins> empty{};
  std::size_t total = 0;
};

BinnedRecords assign_bins(const std::vector<MetoceanRecord>& records,
                          const WindBinSpec& spec,
                          const HubProfile& profile = {});

struct KdeOptions
{
  int n_hs = 50;
  int n_tp = 50;
  std::size_t min_records = 10;
  double bandwidth_floor = 1e-3;
  double tp_floor = 1.0; ///< lower clamp of the Tp axis [s]
};

/// Gridded bivariate Gaussian product-kernel density of (Hs, Tp) for one bin.
/// Nodes are cell centres; cell (i, j) has Hs index i and Tp index j.
struct JointDensityGrid
{
  int bin = 0;
  std::vector<double> hs_grid;
  std::vector<double> tp_grid;
  Eigen::MatrixXd density;   ///< p(Hs, Tp) [1/(m s)]
  Eigen::MatrixXd cell_mass; ///< normalised density * cell area
  double bin_probability = 0.0;
  double h_hs = 0.0; ///< bandwidths
  double h_tp = 0.0;
  double raw_mass = 0.0; ///< Riemann sum of density before normalisation

  double d_hs() const { return hs_grid.size() > 1 ? hs_grid[1] - hs_grid[0] : 0.0; }
  double d_tp() const { return tp_grid.size() > 1 ? tp_grid[1] - tp_grid[0] : 0.0; }
  std::size_t cells() const { return hs_grid.size() * tp_grid.size(); }
};

/// Scott's rule bandwidth sd * n^(-1/6), floored.
double scott_bandwidth(double sd, std::size_t n, double floor = 1e-3);

JointDensityGrid fit_kde(const std::vector<MetoceanRecord>& records,
                         int bin,
                         double bin_probability,
                         const KdeOptions& options = {});

/// Evaluate the kernel density at an arbitrary point.
double kde_density(const std::vector<MetoceanRecord>& records, double h_hs, double h_tp, double hs, double tp);

struct SeaState
{
  int bin = 0;
  double v_hub = 0.0;
  double hs = 0.0;
  double tp = 0.0;
  double prob_mass = 0.0;
};

struct PrincipalAxes
{
  Eigen::Vector2d mean;  ///< of (Hs, Tp)
  Eigen::Vector2d scale; ///< standard deviations used for standardisation
  Eigen::Matrix2d axes;  ///< columns: first and second principal directions (standardised space)
  Eigen::Vector2d variances;
};

PrincipalAxes principal_axes(const std::vector<MetoceanRecord>& records);

struct RepresentativeSet
{
  std::array<SeaState, 8> states;
  std::array<bool, 8> from_empty_cell{}; ///< cell had no grid mass; box centre used
  PrincipalAxes axes;
  std::array<double, 3> pc1_edges{};
  double pc2_edge = 0.0;
};

/// Eight representative sea states: density-weighted centroids of the grid
/// nodes in a 4 x 2 partition of principal-component space.
RepresentativeSet select_representatives(const JointDensityGrid& grid,
                                         const std::vector<MetoceanRecord>& records,
                                         double v_hub);

struct SyntheticSiteOptions
{
  double years = 28.5;
  int start_year = 1993;
  double weibull_shape = 1.8;
  double weibull_scale = 6.5;
  double wind_persistence = 0.97; ///< hourly AR(1) coefficient
};

/// Hourly synthetic Mediterranean-like metocean record; deterministic in seed.
std::vector<MetoceanRecord> synthetic_site(std::uint64_t seed, const SyntheticSiteOptions& options = {});

} // namespace fowt
