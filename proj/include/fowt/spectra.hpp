#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fowt {

enum class FrequencyUnit
{
  rad_per_s,
  hertz
};

/// Strictly increasing, non-negative frequency abscissae in a fixed unit.
class FrequencyGrid
{
public:
  FrequencyGrid() = default;
  explicit FrequencyGrid(std::vector<double> values,
                         FrequencyUnit unit = FrequencyUnit::rad_per_s);

  static FrequencyGrid uniform(double lo,
                               double hi,
                               std::size_t n_points,
                               FrequencyUnit unit = FrequencyUnit::rad_per_s);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::span<const double> values() const { return values_; }
  FrequencyUnit unit() const { return unit_; }

  /// Width of the frequency band represented by each ordinate (half-distance
  /// to each neighbour; one-sided at the ends). Sums to back() - front().
  std::vector<double> bin_widths() const;

  /// Same abscissae expressed in the other unit.
  FrequencyGrid converted(FrequencyUnit target) const;

  bool operator==(const FrequencyGrid&) const = default;

private:
  std::vector<double> values_;
  FrequencyUnit unit_ = FrequencyUnit::rad_per_s;
};

/// Default analysis grid: 500 points on [0.05, 6.3] rad/s.
FrequencyGrid default_grid();

/// One-sided power spectral density sampled on a FrequencyGrid. Ordinates
/// are per unit of the grid's frequency (per rad/s or per Hz).
struct Psd
{
  FrequencyGrid grid;
  std::vector<double> values;
  std::string unit_label;

  Psd() = default;
  Psd(FrequencyGrid g, std::vector<double> v, std::string label = {});

  std::size_t size() const { return values.size(); }
  FrequencyUnit unit() const { return grid.unit(); }

  /// Zero spectrum on the given grid.
  static Psd zeros(const FrequencyGrid& grid, std::string label = {});

  Psd& operator*=(double factor);
};

/// Re-express a spectrum in Hz (f = w / 2pi, G(f) = 2pi S(w)). Identity if
/// already in Hz.
Psd to_hertz(const Psd& psd);
/// Inverse of to_hertz.
Psd to_rad_per_s(const Psd& psd);

/// JONSWAP wave elevation spectrum in rad/s with peak-enhancement gamma.
/// Ordinates are rescaled so that the on-grid m0 equals hs^2/16 whenever the
/// spectral peak lies inside the grid; otherwise a warning is logged and the
/// truncated spectrum keeps its closed-form normalisation.
Psd jonswap(double hs, double tp, const FrequencyGrid& grid, double gamma_peak = 3.3);

/// Default IEC Kaimal integral length scale for the longitudinal component
/// (8.1 * 42 m).
inline constexpr double kIecKaimalLengthScale = 340.2;

/// Kaimal longitudinal turbulence spectrum in rad/s, scaled so that the
/// on-grid variance equals (turbulence_intensity * v_hub)^2.
Psd kaimal(double v_hub,
           double turbulence_intensity,
           double length_scale,
           const FrequencyGrid& grid);

/// Unnormalised IEC Kaimal ordinate in (m/s)^2 / Hz.
double kaimal_iec_hz(double f_hz, double v_hub, double sigma_u, double length_scale);

/// Spectral moment m_j = int f^j G(f) df in the Hz convention (trapezoidal).
/// Spectra stored per rad/s are converted first. order must be 0, 1, 2 or 4.
double integrate(const Psd& psd, int order);

/// Trapezoidal integral of the ordinates over the grid in the grid's own unit.
double area(const Psd& psd);

/// Two-column delimited text (frequency, ordinate) with a header row.
void write_psd(std::ostream& out, const Psd& psd);

} // namespace fowt
