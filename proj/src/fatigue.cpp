#include "fowt/fatigue.hpp"

#include "fowt/errors.hpp"
#include "fowt/random.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace fowt {

namespace {

constexpr double kAlpha2Max = 1.0 - 1e-9;

std::string describe(const SpectralMoments& m)
{
  std::ostringstream s;
  s.precision(10);
  s << "(m0=" << m.m0 << ", m1=" << m.m1 << ", m2=" << m.m2 << ", m4=" << m.m4 << ")";
  return s.str();
}

} // namespace

double SpectralMoments::alpha2() const
{
  return std::min(m2 / std::sqrt(m0 * m4), kAlpha2Max);
}

double SpectralMoments::peak_rate() const { return std::sqrt(m4 / m2); }

double SpectralMoments::zero_crossing_rate() const { return std::sqrt(m2 / m0); }

void SnCurve::validate() const
{
  require(k_a > 0.0 && std::isfinite(k_a), "SnCurve: k_a must be positive");
  require(b > 0.0 && std::isfinite(b), "SnCurve: b must be positive");
}

double SnCurve::cycles_to_failure(double range) const { return k_a * std::pow(range, -b); }

SpectralMoments moments(const Psd& stress_psd)
{
  SpectralMoments m{integrate(stress_psd, 0),
                    integrate(stress_psd, 1),
                    integrate(stress_psd, 2),
                    integrate(stress_psd, 4)};
  if (m.m0 > 0.0 && (m.m2 <= 0.0 || m.m4 <= 0.0))
    throw NumericalError("moments: degenerate spectrum " + describe(m));
  // Cauchy-Schwarz holds for the exact integrals; the trapezoidal rule can
  // violate it by rounding for extremely narrow spectra.
  const double tol = 1e-12;
  if (m.m1 * m.m1 > m.m0 * m.m2 * (1.0 + tol) || m.m2 * m.m2 > m.m0 * m.m4 * (1.0 + tol))
    throw NumericalError("moments: Cauchy-Schwarz violated " + describe(m));
  return m;
}

DirlikParams dirlik_params(const SpectralMoments& m)
{
  if (!(m.m0 > 0.0 && m.m1 > 0.0 && m.m2 > 0.0 && m.m4 > 0.0))
    throw NumericalError("dirlik_params: moments must be positive " + describe(m));

  DirlikParams p;
  p.x_m = (m.m1 / m.m0) * std::sqrt(m.m2 / m.m4);
  p.alpha2 = m.alpha2();
  p.nu_p = m.peak_rate();

  const double a2 = p.alpha2;
  p.g1 = std::clamp(2.0 * (p.x_m - a2 * a2) / (1.0 + a2 * a2), 0.0, 1.0);
  // Printed variants of R multiply instead of divide; the 1985 form divides.
  const double denom = 1.0 - a2 - p.g1 + p.g1 * p.g1;
  p.r = denom > 0.0 ? (a2 - p.x_m - p.g1 * p.g1) / denom : 0.0;
  p.r = std::clamp(p.r, -kAlpha2Max, kAlpha2Max);
  p.g2 = std::clamp(denom / (1.0 - p.r), 0.0, 1.0 - p.g1);
  p.g3 = 1.0 - (p.g1 + p.g2);
  p.q = 1.25 * (a2 - p.g3 - p.g2 * p.r) / std::max(p.g1, 1e-12);
  p.q = std::max(p.q, 1e-12);

  for (double v : {p.g1, p.g2, p.g3, p.r, p.q, p.x_m, p.alpha2, p.nu_p})
    if (!std::isfinite(v))
      throw NumericalError("dirlik_params: non-finite parameter for moments " + describe(m));
  return p;
}

double dirlik_pdf(const DirlikParams& p, double m0, double s)
{
  require(s >= 0.0, "dirlik_pdf: stress range must be non-negative");
  require(m0 > 0.0, "dirlik_pdf: m0 must be positive");
  const double scale = 2.0 * std::sqrt(m0);
  const double z = s / scale;
  double value = p.g3 * z * std::exp(-0.5 * z * z);
  if (p.g1 > 0.0)
    value += p.g1 / p.q * std::exp(-z / p.q);
  if (p.g2 > 0.0 && p.r != 0.0)
    value += p.g2 * z / (p.r * p.r) * std::exp(-z * z / (2.0 * p.r * p.r));
  return value / scale;
}

double dirlik_damage(const SpectralMoments& m, const SnCurve& sn, double exposure)
{
  sn.validate();
  require(exposure > 0.0, "dirlik_damage: exposure must be positive");
  if (m.is_zero())
    return 0.0;
  const DirlikParams p = dirlik_params(m);
  const double b = sn.b;
  // Standard closed form. Printed variants scale by sqrt(m0)^b (ranges vs
  // amplitudes) and drop the G2/G3 weights from the Gamma(1 + b/2) term.
  const double bracket = p.g1 * std::pow(p.q, b) * std::tgamma(1.0 + b) +
                         std::pow(std::sqrt(2.0), b) * std::tgamma(1.0 + 0.5 * b) *
                           (p.g2 * std::pow(std::abs(p.r), b) + p.g3);
  return p.nu_p * exposure / sn.k_a * std::pow(2.0 * std::sqrt(m.m0), b) * bracket;
}

double dirlik_damage_quadrature(const SpectralMoments& m, const SnCurve& sn, double exposure)
{
  sn.validate();
  require(exposure > 0.0, "dirlik_damage_quadrature: exposure must be positive");
  if (m.is_zero())
    return 0.0;
  const DirlikParams p = dirlik_params(m);
  const double scale = 2.0 * std::sqrt(m.m0);
  // 20 sqrt(m0) covers the Rayleigh terms; the exponential term needs
  // a longer tail when Q is large.
  const double z_max = std::max({10.0, 60.0 * p.q, 12.0 * std::abs(p.r)});
  const double s_max = z_max * scale;

  // Composite 8-point Gauss-Legendre.
  static constexpr double nodes[4] = {0.1834346424956498, 0.5255324099163290,
                                      0.7966664774136267, 0.9602898564975363};
  static constexpr double weights[4] = {0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};
  const int panels = 2000;
  const double h = s_max / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = (k + 0.5) * h;
    for (int j = 0; j < 4; ++j) {
      for (double sign : {-1.0, 1.0}) {
        const double s = mid + sign * 0.5 * h * nodes[j];
        acc += weights[j] * 0.5 * h * std::pow(s, sn.b) * dirlik_pdf(p, m.m0, s);
      }
    }
  }
  return p.nu_p * exposure / sn.k_a * acc;
}

double narrowband_damage(const SpectralMoments& m, const SnCurve& sn, double exposure)
{
  sn.validate();
  if (m.is_zero())
    return 0.0;
  const double nu0 = m.zero_crossing_rate();
  return nu0 * exposure / sn.k_a * std::pow(2.0 * std::sqrt(2.0 * m.m0), sn.b) *
         std::tgamma(1.0 + 0.5 * sn.b);
}

double del_from_damage(double damage, const SnCurve& sn, double exposure)
{
  require(damage >= 0.0, "del_from_damage: damage must be non-negative");
  require(exposure > 0.0, "del_from_damage: exposure must be positive");
  return std::pow(damage * sn.k_a / exposure, 1.0 / sn.b);
}

double damage_from_del(double del, const SnCurve& sn, double exposure)
{
  require(del >= 0.0, "damage_from_del: DEL must be non-negative");
  return exposure * std::pow(del, sn.b) / sn.k_a;
}

double del_1hz(const SpectralMoments& m, const SnCurve& sn, double exposure)
{
  return del_from_damage(dirlik_damage(m, sn, exposure), sn, exposure);
}

DamageEstimate short_term_damage(const SpectralMoments& m, const SnCurve& sn, double exposure)
{
  DamageEstimate e;
  e.exposure = exposure;
  e.damage = dirlik_damage(m, sn, exposure);
  e.del = del_from_damage(e.damage, sn, exposure);
  return e;
}

// ---------------------------------------------------------------------------

std::vector<double> turning_points(std::span<const double> signal)
{
  std::vector<double> x;
  x.reserve(signal.size());
  for (double v : signal)
    if (x.empty() || v != x.back())
      x.push_back(v);
  if (x.size() <= 2)
    return x;

  std::vector<double> tp;
  tp.push_back(x.front());
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    const double d0 = x[i] - x[i - 1];
    const double d1 = x[i + 1] - x[i];
    if (d0 * d1 >= 0.0)
      continue;
    const double curvature = x[i - 1] - 2.0 * x[i] + x[i + 1];
    double peak = x[i];
    if (curvature != 0.0) {
      const double offset = 0.5 * (x[i - 1] - x[i + 1]) / curvature;
      peak = x[i] - 0.25 * (x[i - 1] - x[i + 1]) * offset;
    }
    tp.push_back(peak);
  }
  tp.push_back(x.back());

  // End points may not alternate with their neighbours; merge monotone runs.
  std::vector<double> out;
  out.reserve(tp.size());
  for (double v : tp) {
    if (out.size() >= 2) {
      const double a = out[out.size() - 2];
      const double b = out.back();
      if ((b - a) * (v - b) >= 0.0) {
        out.back() = v;
        continue;
      }
    }
    if (!out.empty() && out.back() == v)
      continue;
    out.push_back(v);
  }
  return out;
}

std::vector<Cycle> rainflow_count(std::span<const double> signal)
{
  const std::vector<double> tp = turning_points(signal);
  std::vector<Cycle> cycles;
  std::vector<double> stack;
  stack.reserve(tp.size());
  for (double v : tp) {
    stack.push_back(v);
    while (stack.size() >= 4) {
      const std::size_t n = stack.size();
      const double outer_a = std::abs(stack[n - 3] - stack[n - 4]);
      const double inner = std::abs(stack[n - 2] - stack[n - 3]);
      const double outer_b = std::abs(stack[n - 1] - stack[n - 2]);
      if (inner <= outer_a && inner <= outer_b) {
        cycles.push_back({inner, 1.0});
        stack.erase(stack.end() - 3, stack.end() - 1);
      } else {
        break;
      }
    }
  }
  for (std::size_t i = 1; i < stack.size(); ++i)
    cycles.push_back({std::abs(stack[i] - stack[i - 1]), 0.5});
  return cycles;
}

double miner_damage(std::span<const Cycle> cycles, const SnCurve& sn)
{
  sn.validate();
  double acc = 0.0;
  for (const Cycle& c : cycles)
    if (c.range > 0.0)
      acc += c.count * std::pow(c.range, sn.b);
  return acc / sn.k_a;
}

std::vector<double> synthesize_series(const Psd& psd, std::size_t n, double dt, std::uint64_t seed)
{
  require(n >= 4 && n % 2 == 0, "synthesize_series: n must be even and >= 4");
  require(dt > 0.0, "synthesize_series: dt must be positive");
  const Psd g = to_hertz(psd);
  const double df = 1.0 / (static_cast<double>(n) * dt);

  Rng rng(seed);
  std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
  std::size_t cursor = 0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    if (f < g.grid.front() || f > g.grid.back())
      continue;
    while (cursor + 1 < g.size() && g.grid[cursor + 1] < f)
      ++cursor;
    const std::size_t hi = std::min(cursor + 1, g.size() - 1);
    const double span = g.grid[hi] - g.grid[cursor];
    const double w = span > 0.0 ? (f - g.grid[cursor]) / span : 0.0;
    const double density = (1.0 - w) * g.values[cursor] + w * g.values[hi];
    const double amplitude = std::sqrt(2.0 * density * df);
    spectrum[k] = std::polar(amplitude, phase);
  }

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<std::complex<double>> series;
  fft.inv(series, spectrum);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = series[i].real();
  return out;
}

OracleResult rainflow_oracle(const Psd& stress_psd,
                             const SnCurve& sn,
                             double exposure,
                             std::uint64_t seed,
                             OracleOptions options)
{
  sn.validate();
  require(exposure >= 600.0, "rainflow_oracle: exposure must be at least 600 s");
  require(options.realizations >= 5, "rainflow_oracle: need at least 5 realisations");

  const SpectralMoments m = moments(stress_psd);
  OracleResult result;
  if (m.is_zero())
    return result;
  const double expected_cycles = m.peak_rate() * exposure;
  if (expected_cycles < 1000.0) {
    std::ostringstream msg;
    msg << "rainflow_oracle: exposure " << exposure << " s yields only " << expected_cycles
        << " expected peaks (< 1000)";
    throw ValidationError(msg.str());
  }

  const Psd g = to_hertz(stress_psd);
  const double peak = *std::max_element(g.values.begin(), g.values.end());
  double f_upper = g.grid.back();
  for (std::size_t i = g.size(); i-- > 0;) {
    if (g.values[i] > 1e-8 * peak) {
      f_upper = g.grid[std::min(i + 1, g.size() - 1)];
      break;
    }
  }
  f_upper = std::max(f_upper, 4.0 * m.peak_rate());
  const double dt = 1.0 / (options.samples_per_period * f_upper);
  std::size_t n = 1024;
  while (static_cast<double>(n) * dt < exposure)
    n *= 2;
  result.record_length = static_cast<double>(n) * dt;

  result.damages.reserve(options.realizations);
  double cycle_acc = 0.0;
  for (std::size_t r = 0; r < options.realizations; ++r) {
    const std::vector<double> x = synthesize_series(stress_psd, n, dt, derive_seed(seed, r));
    const std::vector<Cycle> cycles = rainflow_count(x);
    double count = 0.0;
    for (const Cycle& c : cycles)
      count += c.count;
    cycle_acc += count;
    result.damages.push_back(miner_damage(cycles, sn) * exposure / result.record_length);
  }

  const double k = static_cast<double>(result.damages.size());
  for (double d : result.damages)
    result.mean += d / k;
  double ss = 0.0;
  for (double d : result.damages)
    ss += (d - result.mean) * (d - result.mean);
  result.sd = std::sqrt(ss / (k - 1.0));
  result.ci_half_width = 1.96 * result.sd / std::sqrt(k);
  result.mean_cycles = cycle_acc / k;
  return result;
}

double long_term_damage(std::span<const WeightedDamage> cells)
{
  double mass = 0.0;
  double acc = 0.0;
  for (const WeightedDamage& c : cells) {
    require(c.prob_mass >= 0.0, "long_term_damage: negative probability mass");
    require(c.damage >= 0.0 && std::isfinite(c.damage), "long_term_damage: invalid damage value");
    mass += c.prob_mass;
    acc += c.damage * c.prob_mass;
  }
  if (std::abs(mass - 1.0) > 1e-3) {
    std::ostringstream msg;
    msg << "long_term_damage: probability masses sum to " << mass << ", expected 1";
    throw ValidationError(msg.str());
  }
  return acc;
}

} // namespace fowt
