#include "fowt/metocean.hpp"

#include "fowt/errors.hpp"
#include "fowt/log.hpp"
#include "fowt/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace fowt {

namespace {

std::string trim(std::string s)
{
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line, char delim)
{
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim))
    out.push_back(trim(cell));
  if (!line.empty() && line.back() == delim)
    out.emplace_back();
  return out;
}

bool parse_double(const std::string& text, double& value)
{
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last && std::isfinite(value);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double sample_sd(const std::vector<double>& x)
{
  if (x.size() < 2)
    return 0.0;
  double mean = 0.0;
  for (double v : x)
    mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x)
    ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Linear-interpolated empirical quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double p)
{
  if (sorted.size() == 1)
    return sorted.front();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

// ---------------------------------------------------------------------------

std::string format_timestamp(std::chrono::sys_seconds t)
{
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss<seconds> hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::chrono::sys_seconds parse_timestamp(const std::string& text)
{
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int hh = 0, mm = 0, ss = 0;
  char sep = 0;
  const int n = std::sscanf(text.c_str(), "%d-%u-%u%c%d:%d:%d", &y, &mo, &d, &sep, &hh, &mm, &ss);
  if (n < 3)
    throw ValidationError("unparseable timestamp '" + text + "'");
  if (n >= 4 && sep != 'T' && sep != ' ')
    throw ValidationError("unparseable timestamp '" + text + "'");
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60)
    throw ValidationError("invalid calendar timestamp '" + text + "'");
  return sys_seconds{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss};
}

IngestReport ingest_records(std::istream& in)
{
  IngestReport report;
  std::string line;
  std::size_t line_no = 0;
  std::array<int, 4> column{-1, -1, -1, -1};
  bool have_header = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    const std::vector<std::string> cells = split(line, ',');
    if (!have_header) {
      static constexpr std::array<const char*, 4> names{"timestamp", "u10", "hs", "tp"};
      for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t k = 0; k < names.size(); ++k)
          if (cells[c] == names[k])
            column[k] = static_cast<int>(c);
      for (std::size_t k = 0; k < names.size(); ++k)
        if (column[k] < 0)
          throw ValidationError(std::string("metocean file: header lacks column '") + names[k] + "'");
      have_header = true;
      continue;
    }

    ++report.rows;
    auto reject = [&](std::string reason) { report.rejected.push_back({line_no, std::move(reason)}); };
    const int needed = *std::max_element(column.begin(), column.end());
    if (static_cast<int>(cells.size()) <= needed) {
      reject("expected at least " + std::to_string(needed + 1) + " columns");
      continue;
    }
    MetoceanRecord r;
    try {
      r.timestamp = parse_timestamp(cells[column[0]]);
    } catch (const ValidationError& e) {
      reject(e.what());
      continue;
    }
    if (!parse_double(cells[column[1]], r.u10) || !parse_double(cells[column[2]], r.hs) ||
        !parse_double(cells[column[3]], r.tp)) {
      reject("non-numeric u10/hs/tp");
      continue;
    }
    if (r.u10 < 0.0) {
      reject("u10 must be >= 0");
      continue;
    }
    if (r.hs < 0.0) {
      reject("hs must be >= 0");
      continue;
    }
    if (r.tp <= 0.0) {
      reject("tp must be > 0");
      continue;
    }
    report.records.push_back(r);
  }

  if (!have_header)
    throw ValidationError("metocean file: empty input, header row missing");
  if (report.rows > 0 && 10 * report.rejected.size() > report.rows) {
    std::ostringstream msg;
    msg << "metocean file: " << report.rejected.size() << " of " << report.rows
        << " rows rejected (> 10 %); first at line " << report.rejected.front().line << ": "
        << report.rejected.front().reason;
    throw ValidationError(msg.str());
  }
  for (const RejectedRow& row : report.rejected)
    log::warning("metocean row " + std::to_string(row.line) + " rejected: " + row.reason);
  return report;
}

IngestReport ingest_records(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("metocean file not found: '" + path + "'");
  return ingest_records(in);
}

void write_records(std::ostream& out, const std::vector<MetoceanRecord>& records)
{
  out << "timestamp,u10,hs,tp\n";
  char buf[128];
  for (const MetoceanRecord& r : records) {
    std::snprintf(buf, sizeof buf, ",%.4f,%.4f,%.4f\n", r.u10, r.hs, r.tp);
    out << format_timestamp(r.timestamp) << buf;
  }
}

// ---------------------------------------------------------------------------

double to_hub_height(double u10, double z_hub, double z_ref, double alpha)
{
  require(z_hub > 0.0 && z_ref > 0.0, "to_hub_height: heights must be positive");
  require(u10 >= 0.0, "to_hub_height: wind speed must be non-negative");
  return u10 * std::pow(z_hub / z_ref, alpha);
}

void WindBinSpec::validate() const
{
  require(edges[0] > 0.0, "WindBinSpec: edges must be positive");
  for (std::size_t i = 1; i < edges.size(); ++i)
    require(edges[i] > edges[i - 1], "WindBinSpec: edges must be strictly increasing");
  if (representatives)
    for (double v : *representatives)
      require(v > 0.0, "WindBinSpec: representative speeds must be positive");
}

int WindBinSpec::bin_of(double v_hub) const
{
  int bin = 0;
  for (double e : edges)
    if (v_hub >= e)
      ++bin;
  return bin;
}

BinnedRecords assign_bins(const std::vector<MetoceanRecord>& records,
                          const WindBinSpec& spec,
                          const HubProfile& profile)
{
  spec.validate();
  BinnedRecords out;
  out.total = records.size();
  std::array<double, kWindBins> v_sum{};
  for (const MetoceanRecord& r : records) {
    const double v = to_hub_height(r.u10, profile.z_hub, profile.z_ref, profile.alpha);
    const int b = spec.bin_of(v);
    out.bins[b].push_back(r);
    v_sum[b] += v;
  }
  for (int b = 0; b < kWindBins; ++b) {
    const double count = static_cast<double>(out.bins[b].size());
    out.probability[b] = out.total > 0 ? count / static_cast<double>(out.total) : 0.0;
    out.empty[b] = out.bins[b].empty();
    if (out.empty[b])
      log::warning(std::string("wind bin '") + WindBinSpec::labels[b] + "' has no records; surrogate skipped");
    if (spec.representatives)
      out.representative_speed[b] = (*spec.representatives)[b];
    else if (count > 0)
      out.representative_speed[b] = v_sum[b] / count;
    else // midpoint of the interval, for reporting only
      out.representative_speed[b] =
        b == 0 ? 0.5 * spec.edges[0]
               : (b == kWindBins - 1 ? spec.edges[b - 1] + 2.0 : 0.5 * (spec.edges[b - 1] + spec.edges[b]));
  }
  return out;
}

// ---------------------------------------------------------------------------

double scott_bandwidth(double sd, std::size_t n, double floor)
{
  require(n >= 1, "scott_bandwidth: need at least one point");
  return std::max(sd * std::pow(static_cast<double>(n), -1.0 / 6.0), floor);
}

double kde_density(const std::vector<MetoceanRecord>& records, double h_hs, double h_tp, double hs, double tp)
{
  require(!records.empty(), "kde_density: no records");
  const double norm = 1.0 / (2.0 * std::numbers::pi * h_hs * h_tp * static_cast<double>(records.size()));
  double acc = 0.0;
  for (const MetoceanRecord& r : records) {
    const double a = (hs - r.hs) / h_hs;
    const double b = (tp - r.tp) / h_tp;
    acc += std::exp(-0.5 * (a * a + b * b));
  }
  return acc * norm;
}

JointDensityGrid fit_kde(const std::vector<MetoceanRecord>& records,
                         int bin,
                         double bin_probability,
                         const KdeOptions& options)
{
  require(records.size() >= std::max<std::size_t>(options.min_records, 1),
          "fit_kde: need at least " + std::to_string(options.min_records) + " records in bin " +
            std::to_string(bin));
  require(options.n_hs >= 2 && options.n_tp >= 2, "fit_kde: grid needs at least 2x2 nodes");

  const std::size_t n = records.size();
  std::vector<double> hs(n), tp(n);
  for (std::size_t k = 0; k < n; ++k) {
    hs[k] = records[k].hs;
    tp[k] = records[k].tp;
  }

  JointDensityGrid g;
  g.bin = bin;
  g.bin_probability = bin_probability;
  g.h_hs = scott_bandwidth(sample_sd(hs), n, options.bandwidth_floor);
  g.h_tp = scott_bandwidth(sample_sd(tp), n, options.bandwidth_floor);

  const auto [hs_min, hs_max] = std::minmax_element(hs.begin(), hs.end());
  const auto [tp_min, tp_max] = std::minmax_element(tp.begin(), tp.end());
  const double hs_lo = std::max(*hs_min - 3.0 * g.h_hs, 0.0);
  const double hs_hi = *hs_max + 3.0 * g.h_hs;
  const double tp_lo = std::max(*tp_min - 3.0 * g.h_tp, std::min(options.tp_floor, *tp_min));
  const double tp_hi = *tp_max + 3.0 * g.h_tp;

  auto centres = [](double lo, double hi, int count) {
    std::vector<double> c(count);
    const double step = (hi - lo) / count;
    for (int i = 0; i < count; ++i)
      c[i] = lo + (i + 0.5) * step;
    return c;
  };
  g.hs_grid = centres(hs_lo, hs_hi, options.n_hs);
  g.tp_grid = centres(tp_lo, tp_hi, options.n_tp);

  // Separable product kernel: density = K_hs * K_tp^T / n, accumulated in blocks.
  const std::size_t block = 4096;
  g.density = Eigen::MatrixXd::Zero(options.n_hs, options.n_tp);
  const double c_hs = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * g.h_hs);
  const double c_tp = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * g.h_tp);
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    Eigen::MatrixXd k_hs(options.n_hs, len), k_tp(options.n_tp, len);
    for (std::size_t k = 0; k < len; ++k) {
      for (int i = 0; i < options.n_hs; ++i) {
        const double a = (g.hs_grid[i] - hs[start + k]) / g.h_hs;
        k_hs(i, k) = c_hs * std::exp(-0.5 * a * a);
      }
      for (int j = 0; j < options.n_tp; ++j) {
        const double b = (g.tp_grid[j] - tp[start + k]) / g.h_tp;
        k_tp(j, k) = c_tp * std::exp(-0.5 * b * b);
      }
    }
    g.density.noalias() += k_hs * k_tp.transpose();
  }
  g.density /= static_cast<double>(n);

  g.cell_mass = g.density * (g.d_hs() * g.d_tp());
  g.raw_mass = g.cell_mass.sum();
  if (!(g.raw_mass > 0.0))
    throw NumericalError("fit_kde: density vanishes on the grid for bin " + std::to_string(bin));
  g.cell_mass /= g.raw_mass;
  return g;
}

// ---------------------------------------------------------------------------

PrincipalAxes principal_axes(const std::vector<MetoceanRecord>& records)
{
  require(!records.empty(), "principal_axes: no records");
  const double n = static_cast<double>(records.size());
  PrincipalAxes pa;
  pa.mean.setZero();
  for (const MetoceanRecord& r : records)
    pa.mean += Eigen::Vector2d(r.hs, r.tp) / n;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const MetoceanRecord& r : records) {
    const Eigen::Vector2d d = Eigen::Vector2d(r.hs, r.tp) - pa.mean;
    cov += d * d.transpose();
  }
  cov /= std::max(n - 1.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    const double sd = std::sqrt(cov(k, k));
    pa.scale[k] = sd > 0.0 ? sd : 1.0;
  }
  const Eigen::Matrix2d corr = pa.scale.asDiagonal().inverse() * cov * pa.scale.asDiagonal().inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(corr);
  // Eigenvalues ascend; the first principal component is the last column.
  pa.variances = Eigen::Vector2d(es.eigenvalues()[1], es.eigenvalues()[0]);
  pa.axes.col(0) = es.eigenvectors().col(1);
  pa.axes.col(1) = es.eigenvectors().col(0);
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    pa.axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (pa.axes(arg, c) < 0.0)
      pa.axes.col(c) *= -1.0;
  }
  return pa;
}

RepresentativeSet select_representatives(const JointDensityGrid& grid,
                                         const std::vector<MetoceanRecord>& records,
                                         double v_hub)
{
  require(!records.empty(), "select_representatives: no records");
  require(!grid.hs_grid.empty() && !grid.tp_grid.empty(), "select_representatives: grid not fitted");

  RepresentativeSet out;
  out.axes = principal_axes(records);
  const PrincipalAxes& pa = out.axes;

  bool all_identical = true;
  for (const MetoceanRecord& r : records)
    all_identical = all_identical && r.hs == records.front().hs && r.tp == records.front().tp;
  if (all_identical) {
    for (SeaState& s : out.states)
      s = {grid.bin, v_hub, records.front().hs, records.front().tp, grid.bin_probability / 8.0};
    return out;
  }

  auto project = [&pa](double hs, double tp) -> Eigen::Vector2d {
    const Eigen::Vector2d z = (Eigen::Vector2d(hs, tp) - pa.mean).cwiseQuotient(pa.scale);
    return pa.axes.transpose() * z;
  };
  auto unproject = [&pa](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    return pa.mean + pa.scale.cwiseProduct(pa.axes * p);
  };

  std::vector<double> p1(records.size()), p2(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const Eigen::Vector2d p = project(records[k].hs, records[k].tp);
    p1[k] = p[0];
    p2[k] = p[1];
  }
  std::sort(p1.begin(), p1.end());
  std::sort(p2.begin(), p2.end());
  out.pc1_edges = {quantile_sorted(p1, 0.25), quantile_sorted(p1, 0.5), quantile_sorted(p1, 0.75)};
  out.pc2_edge = quantile_sorted(p2, 0.5);

  auto cell_of = [&out](const Eigen::Vector2d& p) {
    int c1 = 0;
    for (double e : out.pc1_edges)
      if (p[0] >= e)
        ++c1;
    const int c2 = p[1] >= out.pc2_edge ? 1 : 0;
    return c1 * 2 + c2;
  };

  std::array<double, 8> mass{};
  std::array<Eigen::Vector2d, 8> moment;
  moment.fill(Eigen::Vector2d::Zero());
  for (std::size_t i = 0; i < grid.hs_grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.tp_grid.size(); ++j) {
      const double w = grid.cell_mass(i, j);
      if (w <= 0.0)
        continue;
      const int c = cell_of(project(grid.hs_grid[i], grid.tp_grid[j]));
      mass[c] += w;
      moment[c] += w * Eigen::Vector2d(grid.hs_grid[i], grid.tp_grid[j]);
    }
  }

  const std::array<double, 5> b1{p1.front(), out.pc1_edges[0], out.pc1_edges[1], out.pc1_edges[2], p1.back()};
  const std::array<double, 3> b2{p2.front(), out.pc2_edge, p2.back()};
  for (int c = 0; c < 8; ++c) {
    SeaState& s = out.states[c];
    s.bin = grid.bin;
    s.v_hub = v_hub;
    s.prob_mass = grid.bin_probability * mass[c];
    if (mass[c] > 0.0) {
      const Eigen::Vector2d centre = moment[c] / mass[c];
      s.hs = centre[0];
      s.tp = centre[1];
    } else {
      const int c1 = c / 2;
      const int c2 = c % 2;
      const Eigen::Vector2d box(0.5 * (b1[c1] + b1[c1 + 1]), 0.5 * (b2[c2] + b2[c2 + 1]));
      const Eigen::Vector2d x = unproject(box);
      s.hs = std::max(x[0], 0.0);
      s.tp = std::max(x[1], 1e-3);
      out.from_empty_cell[c] = true;
      log::info("select_representatives: empty PCA cell " + std::to_string(c) + " in bin " +
                std::to_string(grid.bin) + "; using the quantile-box centre");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<MetoceanRecord> synthetic_site(std::uint64_t seed, const SyntheticSiteOptions& options)
{
  require(options.years > 0.0, "synthetic_site: years must be positive");
  using namespace std::chrono;
  const auto hours_total = static_cast<std::size_t>(std::llround(options.years * 365.25 * 24.0));
  const sys_seconds start{sys_days{year{options.start_year} / January / 1}};

  Rng rng(derive_seed(seed, "synthetic_site"));
  const double phi_u = options.wind_persistence;
  const double phi_swell = 0.995;
  const double phi_tp = 0.9;
  double z_u = rng.normal();
  double z_swell = rng.normal();
  double z_tp = rng.normal();
  double u_smoothed = -1.0;

  std::vector<MetoceanRecord> out;
  out.reserve(hours_total);
  for (std::size_t h = 0; h < hours_total; ++h) {
    z_u = phi_u * z_u + std::sqrt(1.0 - phi_u * phi_u) * rng.normal();
    z_swell = phi_swell * z_swell + std::sqrt(1.0 - phi_swell * phi_swell) * rng.normal();
    z_tp = phi_tp * z_tp + std::sqrt(1.0 - phi_tp * phi_tp) * rng.normal();
    const double noise_hs = rng.normal();

    // Weibull marginal through a Gaussian copula.
    const double p = std::clamp(normal_cdf(z_u), 1e-12, 1.0 - 1e-12);
    const double u10 = options.weibull_scale * std::pow(-std::log1p(-p), 1.0 / options.weibull_shape);
    // Sea state lags the wind by a few hours.
    u_smoothed = u_smoothed < 0.0 ? u10 : u_smoothed + (u10 - u_smoothed) / 4.0;

    const double hs_wind = 0.016 * u_smoothed * u_smoothed;
    const double hs_swell = 0.35 * std::exp(0.5 * z_swell);
    const double hs = std::sqrt(hs_wind * hs_wind + hs_swell * hs_swell) * std::exp(0.1 * noise_hs);
    const double tp = (2.2 + 3.3 * std::sqrt(hs)) * std::exp(0.13 * z_tp);

    MetoceanRecord r;
    r.timestamp = start + hours{static_cast<long>(h)};
    r.u10 = u10;
    r.hs = hs;
    r.tp = tp;
    out.push_back(r);
  }
  return out;
}

} // namespace fowt
