#pragma once

#include "fowt/spectra.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fowt {

/// Spectral moments of a stress PSD in the Hz convention (MPa^2 Hz^j).
struct SpectralMoments
{
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m4 = 0.0;

  /// Irregularity factor m2 / sqrt(m0 m4).
  double alpha2() const;
  /// Expected peak rate sqrt(m4 / m2) [Hz].
  double peak_rate() const;
  /// Expected zero up-crossing rate sqrt(m2 / m0) [Hz].
  double zero_crossing_rate() const;
  bool is_zero() const { return m0 == 0.0; }
};

/// Single-slope S-N curve N(s) = k_a * s^-b, s in MPa.
struct SnCurve
{
  double k_a = 1.46e12;
  double b = 3.0;

  void validate() const;
  double cycles_to_failure(double range) const;

  static SnCurve tower_base() { return {1.46e12, 3.0}; }
  static SnCurve mooring() { return {1.20e11, 3.0}; }
};

struct DirlikParams
{
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 1.0;
  double r = 0.0;
  double q = 1.0;
  double x_m = 0.0;
  double alpha2 = 0.0;
  double nu_p = 0.0;
};

/// Short-term damage over `exposure` seconds and its 1-Hz damage-equivalent range.
struct DamageEstimate
{
  double exposure = 3600.0;
  double damage = 0.0;
  double del = 0.0;
};

SpectralMoments moments(const Psd& stress_psd);

DirlikParams dirlik_params(const SpectralMoments& m);

/// Dirlik stress-range density at range s [1/MPa].
double dirlik_pdf(const DirlikParams& p, double m0, double s);

/// Closed-form Dirlik damage for exposure T [s].
double dirlik_damage(const SpectralMoments& m, const SnCurve& sn, double exposure);

/// The same damage by quadrature of n(T) * int s^b / K_a p(s) ds.
double dirlik_damage_quadrature(const SpectralMoments& m, const SnCurve& sn, double exposure);

/// Rayleigh (narrow-band) damage nu0 T / K_a (2 sqrt(2 m0))^b Gamma(1 + b/2).
double narrowband_damage(const SpectralMoments& m, const SnCurve& sn, double exposure);

/// 1-Hz DEL from a damage value: (D K_a / T)^(1/b).
double del_from_damage(double damage, const SnCurve& sn, double exposure);
/// Damage of a constant-amplitude 1 Hz range `del` over T: T del^b / K_a.
double damage_from_del(double del, const SnCurve& sn, double exposure);

double del_1hz(const SpectralMoments& m, const SnCurve& sn, double exposure = 3600.0);

DamageEstimate short_term_damage(const SpectralMoments& m, const SnCurve& sn, double exposure = 3600.0);

// ---------------------------------------------------------------------------
// Time-domain verification path

struct Cycle
{
  double range = 0.0;
  double count = 0.0; ///< 1 for full cycles, 0.5 for residue half cycles
};

/// Peaks and valleys of a sampled signal, including both end points.
/// Interior extrema are refined with a three-point parabola.
std::vector<double> turning_points(std::span<const double> signal);

/// Four-point rainflow count; the residue is counted as half cycles.
std::vector<Cycle> rainflow_count(std::span<const double> signal);

/// Miner sum of counted cycles.
double miner_damage(std::span<const Cycle> cycles, const SnCurve& sn);

/// Gaussian realisation of a PSD by the random-phase inverse-FFT method.
/// Returns samples at spacing dt; the record length is n * dt.
std::vector<double> synthesize_series(const Psd& psd, std::size_t n, double dt, std::uint64_t seed);

struct OracleOptions
{
  std::size_t realizations = 40;
  /// Samples per period of the highest significant frequency.
  double samples_per_period = 24.0;
};

struct OracleResult
{
  double mean = 0.0;          ///< mean damage over realisations, scaled to T
  double sd = 0.0;            ///< between-realisation standard deviation
  double ci_half_width = 0.0; ///< 95 % half-width of the mean
  double mean_cycles = 0.0;   ///< full-cycle equivalents per realisation
  double record_length = 0.0; ///< seconds simulated per realisation
  std::vector<double> damages;

  double relative_ci() const { return mean > 0.0 ? ci_half_width / mean : 0.0; }
};

OracleResult rainflow_oracle(const Psd& stress_psd,
                             const SnCurve& sn,
                             double exposure,
                             std::uint64_t seed,
                             OracleOptions options = {});

// ---------------------------------------------------------------------------
// Long-term accumulation

struct WeightedDamage
{
  double damage = 0.0;
  double prob_mass = 0.0;
};

/// Discrete long-term damage sum; probability masses must total 1 within 1e-3.
double long_term_damage(std::span<const WeightedDamage> cells);

} // namespace fowt
