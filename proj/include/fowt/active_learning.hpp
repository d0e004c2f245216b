#pragma once

#include "fowt/gpr.hpp"
#include "fowt/pipeline.hpp"
#include "fowt/random.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace fowt {

/// Candidate sea states of one wind bin: the cells of its KDE grid.
struct BinDomain
{
  int bin = 0;
  double v_hub = 0.0;
  double probability = 0.0;
  std::size_t n_hs = 0;
  std::size_t n_tp = 0;
  std::vector<Eigen::Vector2d> cells; ///< (Hs, Tp); index i * n_tp + j
  std::vector<double> prob_mass;      ///< bin probability * cell mass
  Standardization standardization;    ///< of the bin's metocean records
  std::vector<std::size_t> initial_cells; ///< representatives snapped to distinct grid cells

  SeaState state(std::size_t cell) const;
  double total_mass() const;
};

std::vector<BinDomain> make_domains(const MetoceanModel& model);

/// Index of the candidate nearest to (hs, tp) in standardised coordinates,
/// skipping cells flagged in `taken`; ties go to the lower index.
std::optional<std::size_t> nearest_cell(const BinDomain& domain,
                                        const Eigen::Vector2d& point,
                                        const std::vector<char>& taken);

struct AlSettings
{
  double exposure = 3600.0;
  SnCurve sn = SnCurve::tower_base();
  double gamma = 1.96;
  GpFitOptions gp{};
  int window = 10;
  double threshold = 1e-4;
};

/// Short-term damage implied by a 1-Hz DEL prediction, T max(mu, 0)^b / K_a.
double predicted_damage(double del_mean, const SnCurve& sn, double exposure);

/// Probability-weighted width of the damage confidence interval for b = 3:
/// (T / K_a) (6 mu^2 gamma sigma + 2 gamma^3 sigma^3) prob_mass.
double ci_width(const Prediction& p, double prob_mass, const SnCurve& sn, double exposure, double gamma);

/// DEL at one grid cell of a domain; may throw NumericalError.
using DelFunction = std::function<double(const BinDomain&, std::size_t cell)>;

struct BinSurface
{
  std::shared_ptr<const BinDomain> domain;
  std::optional<GaussianProcess> model;
  std::vector<std::size_t> evaluated;
  std::vector<double> observed_del;
  std::vector<char> excluded; ///< evaluated or failed cells
  std::vector<Prediction> predictions;
  double accumulated_damage = 0.0;

  void refresh(const AlSettings& settings);
  bool has_candidates() const;
};

struct InitResult
{
  std::vector<BinSurface> surfaces;
  std::size_t evaluations = 0;
  std::size_t replaced = 0; ///< representatives moved to a neighbour after an FD failure
};

/// Evaluates the representatives of every domain and fits the first GPR per bin.
InitResult init_surfaces(const std::vector<BinDomain>& domains, const DelFunction& del, const AlSettings& settings);

struct Selection
{
  std::size_t surface = 0;
  std::size_t cell = 0;
  double score = 0.0;
};

/// Global argmax of the CI width over unevaluated cells; ties to the lowest (bin, cell).
std::optional<Selection> select_next(const std::vector<BinSurface>& surfaces, const AlSettings& settings);

/// Per-bin accumulated damage history and the relative-change stopping rule.
class ConvergenceTracker
{
public:
  explicit ConvergenceTracker(int window = 10, double threshold = 1e-4);

  void record(const std::array<double, kWindBins>& bin_damage);
  bool converged() const;
  std::size_t size() const { return history_.size(); }
  const std::vector<std::array<double, kWindBins>>& history() const { return history_; }

private:
  int window_;
  double threshold_;
  std::vector<std::array<double, kWindBins>> history_;
};

struct IterationRecord
{
  int iteration = 0; ///< 0 for the initial design
  std::size_t evaluations = 0;
  int bin = 0;
  double hs = 0.0;
  double tp = 0.0;
  double del = 0.0;
  std::array<double, kWindBins> bin_damage{};
  double ltd = 0.0;
};

struct LoopResult
{
  std::vector<IterationRecord> log;
  std::size_t evaluations = 0;
  int iterations = 0;
  bool converged = false;
  bool exhausted = false; ///< every candidate cell evaluated
  double ltd = 0.0;       ///< long-term damage of the final surfaces
};

std::array<double, kWindBins> bin_damages(const std::vector<BinSurface>& surfaces);

/// Long-term damage of the surfaces' predicted means over every candidate cell.
double surface_ltd(const std::vector<BinSurface>& surfaces, const AlSettings& settings);

/// Active-learning loop; `budget` bounds the added evaluations.
LoopResult run_loop(std::vector<BinSurface>& surfaces,
                    const DelFunction& del,
                    const AlSettings& settings,
                    int budget,
                    std::size_t initial_evaluations = 0);

void write_iteration_log(std::ostream& out, const std::vector<IterationRecord>& log);

// ---------------------------------------------------------------------------
// Monte Carlo

/// Two-stage sampler: wind bin by probability, then grid cell by mass.
class CellSampler
{
public:
  explicit CellSampler(const std::vector<BinDomain>& domains);

  struct Draw
  {
    std::size_t domain = 0;
    std::size_t cell = 0;
  };
  Draw draw(Rng& rng) const;
  double total_mass() const { return total_; }

private:
  std::vector<double> bin_cdf_;
  std::vector<std::vector<double>> cell_cdf_;
  double total_ = 0.0;
};

using DamageLookup = std::function<double(std::size_t domain, std::size_t cell)>;

/// Running LTD estimate (mean damage times total mass) after each of n samples.
std::vector<double> mcs_trace(const std::vector<BinDomain>& domains,
                              const DamageLookup& damage,
                              std::size_t n_samples,
                              std::uint64_t seed);

/// Same sample path as mcs_trace with damage taken from the surfaces' predicted means.
std::vector<double> surrogate_mcs(const std::vector<BinSurface>& surfaces,
                                  const AlSettings& settings,
                                  std::size_t n_samples,
                                  std::uint64_t seed);

/// Smallest 1-based position after which every entry stays within rel_tol of
/// `exact`; nullopt if the last entry is outside.
std::optional<std::size_t> sustained_within(const std::vector<double>& trace, double exact, double rel_tol);

/// Evaluations the loop needed to reach rel_tol for good, from its log.
std::optional<std::size_t> loop_evaluations_to(const std::vector<IterationRecord>& log, double exact, double rel_tol);

// ---------------------------------------------------------------------------
// Exhaustive reference

struct FullGrid
{
  std::vector<std::vector<Evaluation>> cells; ///< per domain, per cell
  std::size_t failures = 0;

  double ltd(const std::vector<BinDomain>& domains, HotSpot h) const;
  double del(std::size_t domain, std::size_t cell, HotSpot h) const;
  double damage(std::size_t domain, std::size_t cell, HotSpot h) const;
};

/// Evaluates every candidate cell. Failed cells are logged and given zero damage.
FullGrid full_grid(const std::vector<BinDomain>& domains, const SeaStateEvaluator& evaluator);

void write_full_grid(std::ostream& out, const std::vector<BinDomain>& domains, const FullGrid& grid);

} // namespace fowt
