#include "fowt/spectra.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fowt {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

FrequencyGrid::FrequencyGrid(std::vector<double> values, FrequencyUnit unit)
  : values_(std::move(values))
  , unit_(unit)
{
  require(values_.size() >= 2, "FrequencyGrid: need at least two points");
  require(values_.front() >= 0.0 && std::isfinite(values_.front()),
          "FrequencyGrid: frequencies must be non-negative");
  for (std::size_t i = 1; i < values_.size(); ++i)
    require(values_[i] > values_[i - 1] && std::isfinite(values_[i]),
            "FrequencyGrid: frequencies must be strictly increasing");
}

FrequencyGrid FrequencyGrid::uniform(double lo, double hi, std::size_t n_points, FrequencyUnit unit)
{
  require(n_points >= 2 && hi > lo, "FrequencyGrid::uniform: invalid range");
  std::vector<double> v(n_points);
  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i)
    v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return FrequencyGrid(std::move(v), unit);
}

std::vector<double> FrequencyGrid::bin_widths() const
{
  const std::size_t n = values_.size();
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? values_[0] : values_[i - 1];
    const double right = i + 1 == n ? values_[n - 1] : values_[i + 1];
    w[i] = 0.5 * (right - left);
  }
  return w;
}

FrequencyGrid FrequencyGrid::converted(FrequencyUnit target) const
{
  if (target == unit_)
    return *this;
  std::vector<double> v(values_);
  const double factor = target == FrequencyUnit::hertz ? 1.0 / kTwoPi : kTwoPi;
  for (double& x : v)
    x *= factor;
  return FrequencyGrid(std::move(v), target);
}

FrequencyGrid default_grid()
{
  return FrequencyGrid::uniform(0.05, 6.3, 500);
}

Psd::Psd(FrequencyGrid g, std::vector<double> v, std::string label)
  : grid(std::move(g))
  , values(std::move(v))
  , unit_label(std::move(label))
{
  require(values.size() == grid.size(), "Psd: ordinate count does not match grid");
  for (double x : values)
    require(x >= 0.0 && std::isfinite(x), "Psd: ordinates must be finite and non-negative");
}

Psd Psd::zeros(const FrequencyGrid& grid, std::string label)
{
  return Psd(grid, std::vector<double>(grid.size(), 0.0), std::move(label));
}

Psd& Psd::operator*=(double factor)
{
  require(factor >= 0.0, "Psd: scale factor must be non-negative");
  for (double& x : values)
    x *= factor;
  return *this;
}

Psd to_hertz(const Psd& psd)
{
  if (psd.unit() == FrequencyUnit::hertz)
    return psd;
  Psd out(psd.grid.converted(FrequencyUnit::hertz), psd.values, psd.unit_label);
  for (double& x : out.values)
    x *= kTwoPi;
  return out;
}

Psd to_rad_per_s(const Psd& psd)
{
  if (psd.unit() == FrequencyUnit::rad_per_s)
    return psd;
  Psd out(psd.grid.converted(FrequencyUnit::rad_per_s), psd.values, psd.unit_label);
  for (double& x : out.values)
    x /= kTwoPi;
  return out;
}

Psd jonswap(double hs, double tp, const FrequencyGrid& grid, double gamma_peak)
{
  require(hs >= 0.0, "jonswap: hs must be non-negative");
  require(tp > 0.0, "jonswap: tp must be positive");
  require(gamma_peak >= 1.0, "jonswap: gamma must be >= 1");
  require(grid.unit() == FrequencyUnit::rad_per_s, "jonswap: grid must be in rad/s");

  Psd out = Psd::zeros(grid, "m^2 s/rad");
  if (hs == 0.0)
    return out;

  const double wp = kTwoPi / tp;
  const double a_gamma = 1.0 - 0.287 * std::log(gamma_peak);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    if (w <= 0.0)
      continue;
    const double sigma = w <= wp ? 0.07 : 0.09;
    const double r = std::exp(-(w - wp) * (w - wp) / (2.0 * sigma * sigma * wp * wp));
    const double pm = 5.0 / 16.0 * hs * hs * std::pow(wp, 4) * std::pow(w, -5) *
                      std::exp(-1.25 * std::pow(wp / w, 4));
    out.values[i] = a_gamma * pm * std::pow(gamma_peak, r);
  }

  if (wp < grid.front() || wp > grid.back()) {
    std::ostringstream msg;
    msg << "jonswap: peak frequency " << wp << " rad/s (tp = " << tp
        << " s) lies outside the grid; spectrum truncated";
    log::warning(msg.str());
    return out;
  }
  const double m0 = area(out);
  if (m0 > 0.0)
    out *= (hs * hs / 16.0) / m0;
  return out;
}

double kaimal_iec_hz(double f_hz, double v_hub, double sigma_u, double length_scale)
{
  const double ratio = length_scale / v_hub;
  return 4.0 * sigma_u * sigma_u * ratio / std::pow(1.0 + 6.0 * f_hz * ratio, 5.0 / 3.0);
}

Psd kaimal(double v_hub, double turbulence_intensity, double length_scale, const FrequencyGrid& grid)
{
  require(v_hub > 0.0, "kaimal: v_hub must be positive");
  require(turbulence_intensity >= 0.0, "kaimal: turbulence intensity must be non-negative");
  require(length_scale > 0.0, "kaimal: length scale must be positive");
  require(grid.unit() == FrequencyUnit::rad_per_s, "kaimal: grid must be in rad/s");

  Psd out = Psd::zeros(grid, "(m/s)^2 s/rad");
  const double sigma_u = turbulence_intensity * v_hub;
  if (sigma_u == 0.0)
    return out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.values[i] = kaimal_iec_hz(grid[i] / kTwoPi, v_hub, sigma_u, length_scale) / kTwoPi;
  // The band below the grid holds a large share of Kaimal variance; fold it
  // back in so the modelled turbulence keeps the target standard deviation.
  const double var = area(out);
  if (var > 0.0)
    out *= sigma_u * sigma_u / var;
  return out;
}

double area(const Psd& psd)
{
  double acc = 0.0;
  for (std::size_t i = 1; i < psd.size(); ++i)
    acc += 0.5 * (psd.values[i] + psd.values[i - 1]) * (psd.grid[i] - psd.grid[i - 1]);
  return acc;
}

double integrate(const Psd& psd, int order)
{
  require(order == 0 || order == 1 || order == 2 || order == 4,
          "integrate: moment order must be 0, 1, 2 or 4");
  const Psd g = to_hertz(psd);
  auto term = [&](std::size_t i) { return std::pow(g.grid[i], order) * g.values[i]; };
  double acc = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i)
    acc += 0.5 * (term(i) + term(i - 1)) * (g.grid[i] - g.grid[i - 1]);
  return acc;
}

void write_psd(std::ostream& out, const Psd& psd)
{
  const bool hz = psd.unit() == FrequencyUnit::hertz;
  out << (hz ? "frequency_hz" : "omega_rad_s") << ','
      << (psd.unit_label.empty() ? "psd" : "psd[" + psd.unit_label + "]") << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < psd.size(); ++i)
    out << psd.grid[i] << ',' << psd.values[i] << '\n';
}

} // namespace fowt
