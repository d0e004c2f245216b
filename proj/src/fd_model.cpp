#include "fowt/fd_model.hpp"

#include "fowt/errors.hpp"
#include "fowt/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fowt {

using json = nlohmann::json;

namespace {

bool symmetric(const Mat7& m, double rel_tol = 1e-9)
{
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool positive_semidefinite(const Mat7& m, double rel_tol = 1e-10)
{
  Eigen::SelfAdjointEigenSolver<Mat7> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  return es.eigenvalues().minCoeff() >= -rel_tol * scale;
}

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b, const char* what)
{
  if (!(a == b))
    throw ValidationError(std::string("solve_coupled: ") + what + " is not on the table grid");
}

double trapezoid(const FrequencyGrid& grid, const std::vector<double>& y)
{
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    acc += 0.5 * (y[i] + y[i - 1]) * (grid[i] - grid[i - 1]);
  return acc;
}

} // namespace

// ---------------------------------------------------------------------------

void CoefficientTables::validate() const
{
  const std::size_t n = grid.size();
  require(n >= 2, "CoefficientTables: grid is empty");
  require(grid.unit() == FrequencyUnit::rad_per_s, "CoefficientTables: grid must be in rad/s");
  require(added_mass.size() == n, "CoefficientTables: added_mass size mismatch");
  require(radiation_damping.size() == n, "CoefficientTables: radiation_damping size mismatch");
  require(diffraction.size() == n, "CoefficientTables: diffraction size mismatch");
  require(aero_transfer.size() == n, "CoefficientTables: aero_transfer size mismatch");

  const Mat7 mass = total_mass();
  require(symmetric(mass), "CoefficientTables: M_F + M_T is not symmetric");
  Eigen::LLT<Mat7> llt(0.5 * (mass + mass.transpose()));
  require(llt.info() == Eigen::Success, "CoefficientTables: M_F + M_T is not positive definite");
  const Mat7 stiffness = total_stiffness();
  require(symmetric(stiffness), "CoefficientTables: C_H + C_T + C_Moor is not symmetric");
  require(positive_semidefinite(stiffness),
          "CoefficientTables: C_H + C_T + C_Moor is not positive semi-definite");
  for (std::size_t i = 0; i < n; ++i) {
    require(symmetric(added_mass[i]), "CoefficientTables: A(w) is not symmetric");
    require(symmetric(radiation_damping[i]), "CoefficientTables: B(w) is not symmetric");
    require(positive_semidefinite(radiation_damping[i]),
            "CoefficientTables: B(w) is not positive semi-definite");
  }
  require((drag.array() >= 0.0).all(), "CoefficientTables: drag coefficients must be non-negative");
}

bool CoefficientTables::operator==(const CoefficientTables& o) const
{
  return grid == o.grid && added_mass == o.added_mass && radiation_damping == o.radiation_damping &&
         diffraction == o.diffraction && aero_transfer == o.aero_transfer &&
         mass_floater == o.mass_floater && mass_turbine == o.mass_turbine &&
         damping_turbine == o.damping_turbine && stiffness_hydrostatic == o.stiffness_hydrostatic &&
         stiffness_turbine == o.stiffness_turbine && stiffness_mooring == o.stiffness_mooring &&
         drag == o.drag;
}

Psd ResponseSpectra::auto_spectrum(int dof) const
{
  require(dof >= 0 && dof < kDofs, "auto_spectrum: DoF index out of range");
  std::vector<double> v(cross.size());
  for (std::size_t i = 0; i < cross.size(); ++i)
    v[i] = std::max(cross[i](dof, dof).real(), 0.0);
  return Psd(grid, std::move(v));
}

double StructureGeometry::section_modulus() const
{
  const double d_out = tower_base_diameter;
  const double d_in = tower_base_diameter - 2.0 * tower_base_wall;
  return std::numbers::pi * (std::pow(d_out, 4) - std::pow(d_in, 4)) / (32.0 * d_out);
}

StructureGeometry StructureGeometry::from_tables(const CoefficientTables& tables)
{
  StructureGeometry g;
  g.tower_top_stiffness = tables.total_stiffness()(tower_top, tower_top);
  return g;
}

// ---------------------------------------------------------------------------

ResponseSpectra solve_coupled(const CoefficientTables& tables,
                              const Psd& waves,
                              const Psd& wind,
                              const Vec7& drag_damping)
{
  require_same_grid(tables.grid, waves.grid, "wave spectrum");
  require_same_grid(tables.grid, wind.grid, "wind spectrum");
  const FrequencyGrid& grid = tables.grid;
  const std::size_t n = grid.size();
  const std::vector<double> widths = grid.bin_widths();

  const Mat7 mass = tables.total_mass();
  const Mat7 stiffness = tables.total_stiffness();
  const Mat7 damping = tables.damping_turbine + Mat7(drag_damping.asDiagonal());

  ResponseSpectra out;
  out.grid = grid;
  out.cross.resize(n);
  std::vector<std::vector<double>> auto_spec(kDofs, std::vector<double>(n));
  std::vector<std::vector<double>> vel_spec(kDofs, std::vector<double>(n));

  const Complex i_unit(0.0, 1.0);
  Eigen::Matrix<Complex, kDofs, 2> rhs;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = grid[k];
    const double dw = widths[k];
    CMat7 z = (stiffness - w * w * (tables.added_mass[k] + mass)).cast<Complex>();
    z += (i_unit * w) * (tables.radiation_damping[k] + damping).cast<Complex>();

    Eigen::PartialPivLU<CMat7> lu(z);
    // Pivot-growth ratio of U as a cheap singularity test.
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    const double ratio = pivots.minCoeff() / pivots.maxCoeff();
    if (!(ratio > 1e-14)) {
      std::ostringstream msg;
      msg << "solve_coupled: singular system at omega = " << w << " rad/s (pivot ratio = " << ratio << ")";
      throw NumericalError(msg.str());
    }
    rhs.col(0) = tables.diffraction[k] * std::sqrt(2.0 * waves.values[k] * dw);
    rhs.col(1) = tables.aero_transfer[k] * std::sqrt(wind.values[k] * dw);
    const Eigen::Matrix<Complex, kDofs, 2> q = lu.solve(rhs);

    // Wave and wind loads are independent: their spectra add.
    CMat7 s = (q.col(0) * q.col(0).adjoint() + q.col(1) * q.col(1).adjoint()) / (2.0 * dw);
    out.cross[k] = s;
    for (int d = 0; d < kDofs; ++d) {
      const double sdd = std::max(s(d, d).real(), 0.0);
      auto_spec[d][k] = sdd;
      vel_spec[d][k] = w * w * sdd;
    }
  }
  for (int d = 0; d < kDofs; ++d) {
    out.sigma[d] = std::sqrt(trapezoid(grid, auto_spec[d]));
    out.sigma_velocity[d] = std::sqrt(trapezoid(grid, vel_spec[d]));
  }
  return out;
}

Vec7 borgman_damping(const Vec7& drag, const Vec7& sigma_velocity)
{
  const double factor = std::sqrt(8.0 / std::numbers::pi);
  return factor * drag.cwiseProduct(sigma_velocity);
}

BorgmanResult borgman_iterate(const CoefficientTables& tables,
                              const Psd& waves,
                              const Psd& wind,
                              BorgmanOptions options)
{
  require(options.tol > 0.0, "borgman_iterate: tol must be positive");
  require(options.max_iter >= 1, "borgman_iterate: max_iter must be >= 1");

  BorgmanResult result;
  Vec7 sigma_in = Vec7::Constant(options.seed_velocity);
  Vec7 prev_x = Vec7::Zero();
  Vec7 prev_g = Vec7::Zero();
  for (int it = 1; it <= options.max_iter; ++it) {
    const Vec7 damping = borgman_damping(tables.drag, sigma_in);
    result.damping_history.push_back(damping);
    result.response = solve_coupled(tables, waves, wind, damping);
    result.iterations = it;

    const Vec7& sigma_out = result.response.sigma_velocity;
    double residual = 0.0;
    for (int d = 0; d < kDofs; ++d) {
      if (tables.drag[d] <= 0.0)
        continue;
      const double scale = std::max(sigma_in[d], sigma_out[d]);
      if (scale <= 1e-300)
        continue;
      residual = std::max(residual, std::abs(sigma_out[d] - sigma_in[d]) / scale);
    }
    result.residuals.push_back(residual);
    if (residual < options.tol)
      return result;

    // Per-DoF secant step on log(sigma_out / sigma_in), starting from the
    // geometric mean; the plain map oscillates on drag-dominated DoFs.
    for (int d = 0; d < kDofs; ++d) {
      if (!(sigma_in[d] > 0.0) || !(sigma_out[d] > 0.0)) {
        sigma_in[d] = std::max(sigma_out[d], 0.0);
        continue;
      }
      const double x = std::log(sigma_in[d]);
      const double g = std::log(sigma_out[d]) - x;
      double relax = 0.5;
      if (it > 1 && prev_x[d] != x) {
        const double slope = (g - prev_g[d]) / (x - prev_x[d]);
        if (slope < 0.0)
          relax = std::clamp(-1.0 / slope, 0.3, 1.0);
      }
      prev_x[d] = x;
      prev_g[d] = g;
      sigma_in[d] = std::exp(x + relax * g);
    }
  }

  std::ostringstream msg;
  msg.precision(8);
  const auto& h = result.damping_history;
  msg << "borgman_iterate: no convergence in " << options.max_iter << " iterations (last residual "
      << result.residuals.back() << "); last two B_M iterates: [" << h[h.size() - 2].transpose()
      << "] and [" << h.back().transpose() << "]";
  throw NumericalError(msg.str());
}

// ---------------------------------------------------------------------------

Eigen::Vector2cd fairlead_displacement(const StructureGeometry& geom, Complex q1, Complex q3, Complex q5)
{
  // Small-angle form of (R(q5) - I) [x_F; z_F] -> q5 [-z_F; x_F].
  return {q1 - q5 * geom.fairlead_z, q3 + q5 * geom.fairlead_x};
}

Eigen::Vector2d fairlead_displacement_exact(const StructureGeometry& geom, double q1, double q3, double q5)
{
  Eigen::Matrix2d rot;
  rot << std::cos(q5), -std::sin(q5), std::sin(q5), std::cos(q5);
  const Eigen::Vector2d pos(geom.fairlead_x, geom.fairlead_z);
  return Eigen::Vector2d(q1, q3) + (rot - Eigen::Matrix2d::Identity()) * pos;
}

Psd fairlead_stress_psd(const ResponseSpectra& response, const StructureGeometry& geom)
{
  require(geom.cable_area > 0.0, "fairlead_stress_psd: cable area must be positive");
  require(response.cross.size() == response.grid.size(), "fairlead_stress_psd: missing cross-spectra");

  // Linear map from (surge, heave, pitch) to fairlead tension components.
  Eigen::Matrix<double, 2, 3> kinematics;
  kinematics << 1.0, 0.0, -geom.fairlead_z, 0.0, 1.0, geom.fairlead_x;
  const Eigen::Matrix<double, 2, 3> map = geom.cable_stiffness * kinematics;
  const int idx[3] = {surge, heave, pitch};
  const double to_mpa2 = 1.0 / (geom.cable_area * geom.cable_area * 1e12);

  std::vector<double> v(response.grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    Eigen::Matrix3cd sub;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        sub(a, b) = response.cross[k](idx[a], idx[b]);
    // |T_F|^2 = |H_F|^2 + |V_F|^2 per frequency.
    const Eigen::Matrix2cd s_hv = map.cast<Complex>() * sub * map.transpose().cast<Complex>();
    v[k] = std::max(s_hv.trace().real(), 0.0) * to_mpa2;
  }
  return Psd(response.grid, std::move(v), "MPa^2 s/rad");
}

Psd towerbase_stress_psd(const ResponseSpectra& response, const StructureGeometry& geom)
{
  require(response.cross.size() == response.grid.size(), "towerbase_stress_psd: missing spectra");
  const double w = geom.section_modulus();
  require(w > 0.0, "towerbase_stress_psd: section modulus must be positive");
  const double gain = geom.tower_top_stiffness * geom.tower_length / w / 1e6;
  Psd out = response.auto_spectrum(tower_top);
  out *= gain * gain;
  out.unit_label = "MPa^2 s/rad";
  return out;
}

std::vector<Complex> rao(const CoefficientTables& tables, int dof, const Vec7& drag_damping)
{
  require(dof >= 0 && dof < kDofs, "rao: DoF index out of range");
  const Mat7 mass = tables.total_mass();
  const Mat7 stiffness = tables.total_stiffness();
  const Mat7 damping = tables.damping_turbine + Mat7(drag_damping.asDiagonal());
  std::vector<Complex> out(tables.grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double w = tables.grid[k];
    CMat7 z = (stiffness - w * w * (tables.added_mass[k] + mass)).cast<Complex>();
    z += Complex(0.0, w) * (tables.radiation_damping[k] + damping).cast<Complex>();
    Eigen::PartialPivLU<CMat7> lu(z);
    if (!(lu.rcond() > 1e-14)) {
      std::ostringstream msg;
      msg << "rao: singular system at omega = " << w << " rad/s";
      throw NumericalError(msg.str());
    }
    out[k] = lu.solve(tables.diffraction[k])(dof);
  }
  return out;
}

// ---------------------------------------------------------------------------

CoefficientTables synthetic_tables(std::uint64_t seed, const FrequencyGrid& grid)
{
  require(grid.unit() == FrequencyUnit::rad_per_s, "synthetic_tables: grid must be in rad/s");
  Rng rng(derive_seed(seed, "synthetic_tables"));
  auto jitter = [&rng](double spread) { return 1.0 + spread * (2.0 * rng.uniform() - 1.0); };

  // Draw order is part of the determinism contract.
  const double m_floater = 1.3473e7 * jitter(0.05);
  const double z_cog = -13.46 * jitter(0.05);
  const double i_pitch_cog = 6.827e9 * jitter(0.05);
  const double i_yaw = 1.226e10 * jitter(0.05);
  const double m_turbine = 6.0e5 * jitter(0.05);
  const double z_turbine = 70.0;
  const double m_tower_modal = 3.5e5 * jitter(0.1);
  const double h_tower_mode = 87.6;
  const double tower_period = rng.uniform(2.4, 3.0);
  const double a_surge = 8.0e6 * jitter(0.1);
  const double a_heave = 1.45e7 * jitter(0.1);
  const double a_pitch = 7.0e9 * jitter(0.1);
  const double a_yaw = 4.8e9 * jitter(0.1);
  const double a_coupling = -8.5e7 * jitter(0.1);
  const double b_surge = 6.0e5 * jitter(0.2);
  const double b_heave = 8.0e5 * jitter(0.2);
  const double b_pitch = 6.0e8 * jitter(0.2);
  const double b_yaw = 2.0e8 * jitter(0.2);
  const double c_heave = 3.836e6 * jitter(0.05);
  const double c_pitch = 1.0e9 * jitter(0.05);
  const double c_moor_surge = 7.08e4 * jitter(0.1);
  const double c_moor_heave = 1.91e4 * jitter(0.1);
  const double c_moor_pitch = 8.73e7 * jitter(0.1);
  const double c_moor_yaw = 9.83e7 * jitter(0.1);
  const double c_moor_coupling = -1.08e5 * jitter(0.1);
  const double x_surge = 2.2e6 * jitter(0.1);
  const double x_heave = 3.8e6 * jitter(0.1);
  const double x_pitch = 7.0e7 * jitter(0.1);
  const double x_pitch_bump = 0.35 * jitter(0.2);
  const double dtdv = 1.0e5 * jitter(0.15);
  const double drag_surge = 3.3e5 * jitter(0.2);
  const double drag_heave = 3.34e6 * jitter(0.2);
  const double drag_pitch = 3.3e10 * jitter(0.2);

  CoefficientTables t;
  t.grid = grid;

  // Floater mass about the mean water line.
  Mat7& mf = t.mass_floater;
  mf(surge, surge) = mf(sway, sway) = mf(heave, heave) = m_floater;
  mf(surge, pitch) = mf(pitch, surge) = m_floater * z_cog;
  mf(sway, roll) = mf(roll, sway) = -m_floater * z_cog;
  mf(roll, roll) = mf(pitch, pitch) = i_pitch_cog + m_floater * z_cog * z_cog;
  mf(yaw, yaw) = i_yaw;

  // Rigid rotor-nacelle-tower mass plus the tower fore-aft mode.
  Mat7& mt = t.mass_turbine;
  mt(surge, surge) = mt(sway, sway) = mt(heave, heave) = m_turbine;
  mt(surge, pitch) = mt(pitch, surge) = m_turbine * z_turbine;
  mt(sway, roll) = mt(roll, sway) = -m_turbine * z_turbine;
  mt(roll, roll) = mt(pitch, pitch) = m_turbine * z_turbine * z_turbine;
  mt(yaw, yaw) = 4.0e7;
  mt(tower_top, tower_top) = m_tower_modal;
  mt(surge, tower_top) = mt(tower_top, surge) = m_tower_modal;
  mt(pitch, tower_top) = mt(tower_top, pitch) = m_tower_modal * h_tower_mode;

  const double w_tower = 2.0 * std::numbers::pi / tower_period;
  const double c_tower = m_tower_modal * w_tower * w_tower;

  Mat7& ch = t.stiffness_hydrostatic;
  ch(heave, heave) = c_heave;
  ch(roll, roll) = ch(pitch, pitch) = c_pitch;
  Mat7& cm = t.stiffness_mooring;
  cm(surge, surge) = cm(sway, sway) = c_moor_surge;
  cm(heave, heave) = c_moor_heave;
  cm(roll, roll) = cm(pitch, pitch) = c_moor_pitch;
  cm(yaw, yaw) = c_moor_yaw;
  cm(surge, pitch) = cm(pitch, surge) = c_moor_coupling;
  cm(sway, roll) = cm(roll, sway) = -c_moor_coupling;
  t.stiffness_turbine(tower_top, tower_top) = c_tower;

  Mat7& bt = t.damping_turbine;
  bt(surge, surge) = bt(sway, sway) = 1.2e5;
  bt(heave, heave) = 1.0e5;
  bt(roll, roll) = bt(pitch, pitch) = 8.0e8;
  bt(yaw, yaw) = 2.0e7;
  bt(tower_top, tower_top) = 0.02 * std::sqrt(c_tower * m_tower_modal) + 4.0e4;

  t.drag << drag_surge, drag_surge, drag_heave, drag_pitch, drag_pitch, 0.0, 0.0;

  // Radiation damping vanishes above 0.25 Hz.
  const double w_cut = 2.0 * std::numbers::pi * 0.25;
  auto radiation_shape = [w_cut](double w) {
    if (w >= w_cut)
      return 0.0;
    const double r = w / 0.75;
    const double taper = std::cos(0.5 * std::numbers::pi * w / w_cut);
    return r * r * std::exp(1.0 - r * r) * taper * taper;
  };
  auto added_shape = [](double w) { return 1.0 + 0.12 * std::exp(-std::pow((w - 0.8) / 0.5, 2)); };
  auto excitation_shape = [](double w) {
    const double r = w / 1.0;
    return r * r * std::exp(1.0 - r * r);
  };

  const Complex i_unit(0.0, 1.0);
  const std::size_t n = grid.size();
  t.added_mass.resize(n);
  t.radiation_damping.resize(n);
  t.diffraction.resize(n);
  t.aero_transfer.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = grid[k];
    Mat7 a = Mat7::Zero();
    const double fa = added_shape(w);
    a(surge, surge) = a(sway, sway) = a_surge * fa;
    a(heave, heave) = a_heave * fa;
    a(roll, roll) = a(pitch, pitch) = a_pitch * fa;
    a(yaw, yaw) = a_yaw * fa;
    a(surge, pitch) = a(pitch, surge) = a_coupling * fa;
    a(sway, roll) = a(roll, sway) = -a_coupling * fa;
    t.added_mass[k] = a;

    Mat7 b = Mat7::Zero();
    const double fb = radiation_shape(w);
    b(surge, surge) = b(sway, sway) = b_surge * fb;
    b(heave, heave) = b_heave * fb;
    b(roll, roll) = b(pitch, pitch) = b_pitch * fb;
    b(yaw, yaw) = b_yaw * fb;
    const double b_cross = -0.3 * std::sqrt(b_surge * b_pitch) * fb;
    b(surge, pitch) = b(pitch, surge) = b_cross;
    b(sway, roll) = b(roll, sway) = -b_cross;
    t.radiation_damping[k] = b;

    CVec7 x = CVec7::Zero();
    const double fx = excitation_shape(w);
    x(surge) = -i_unit * x_surge * fx;
    x(heave) = Complex(x_heave * std::exp(-w * w * 14.0 / 9.80665), 0.0);
    x(pitch) = i_unit * x_pitch * (fx + x_pitch_bump * std::exp(-std::pow((w - 2.1) / 0.45, 2)));
    t.diffraction[k] = x;

    // Thrust sensitivity with first-order rotor averaging.
    const Complex rotor = dtdv / (1.0 + i_unit * w / 0.8);
    CVec7 f = CVec7::Zero();
    f(surge) = rotor;
    f(pitch) = rotor * 90.0;
    f(tower_top) = rotor;
    t.aero_transfer[k] = f;
  }
  return t;
}

// ---------------------------------------------------------------------------

namespace {

json matrix_to_json(const Mat7& m)
{
  json arr = json::array();
  for (int r = 0; r < kDofs; ++r)
    for (int c = 0; c < kDofs; ++c)
      arr.push_back(m(r, c));
  return arr;
}

json cvec_to_json(const CVec7& v)
{
  json arr = json::array();
  for (int r = 0; r < kDofs; ++r)
    arr.push_back(json::array({v(r).real(), v(r).imag()}));
  return arr;
}

const json& field(const json& j, const char* name)
{
  if (!j.contains(name))
    throw ValidationError(std::string("tables file: missing field '") + name + "'");
  return j.at(name);
}

Mat7 matrix_from_json(const json& j, const std::string& name)
{
  if (!j.is_array() || j.size() != kDofs * kDofs)
    throw ValidationError("tables file: field '" + name + "' must hold 49 numbers");
  Mat7 m;
  for (int r = 0; r < kDofs; ++r)
    for (int c = 0; c < kDofs; ++c)
      m(r, c) = j.at(r * kDofs + c).get<double>();
  return m;
}

CVec7 cvec_from_json(const json& j, const std::string& name)
{
  if (!j.is_array() || j.size() != kDofs)
    throw ValidationError("tables file: field '" + name + "' must hold 7 [re, im] pairs");
  CVec7 v;
  for (int r = 0; r < kDofs; ++r) {
    const json& pair = j.at(r);
    if (!pair.is_array() || pair.size() != 2)
      throw ValidationError("tables file: field '" + name + "' must hold [re, im] pairs");
    v(r) = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return v;
}

template <class T, class F>
std::vector<T> per_frequency(const json& j, const char* name, std::size_t n, F&& convert)
{
  const json& arr = field(j, name);
  if (!arr.is_array() || arr.size() != n)
    throw ValidationError(std::string("tables file: field '") + name +
                          "' must have one entry per frequency");
  std::vector<T> out;
  out.reserve(n);
  for (const json& e : arr)
    out.push_back(convert(e, name));
  return out;
}

} // namespace

void save_tables(std::ostream& out, const CoefficientTables& t)
{
  json j;
  j["schema_version"] = CoefficientTables::kSchemaVersion;
  j["omega"] = std::vector<double>(t.grid.values().begin(), t.grid.values().end());
  json a = json::array(), b = json::array(), x = json::array(), f = json::array();
  for (std::size_t k = 0; k < t.grid.size(); ++k) {
    a.push_back(matrix_to_json(t.added_mass[k]));
    b.push_back(matrix_to_json(t.radiation_damping[k]));
    x.push_back(cvec_to_json(t.diffraction[k]));
    f.push_back(cvec_to_json(t.aero_transfer[k]));
  }
  j["added_mass"] = std::move(a);
  j["radiation_damping"] = std::move(b);
  j["diffraction"] = std::move(x);
  j["aero_transfer"] = std::move(f);
  j["mass_floater"] = matrix_to_json(t.mass_floater);
  j["mass_turbine"] = matrix_to_json(t.mass_turbine);
  j["damping_turbine"] = matrix_to_json(t.damping_turbine);
  j["stiffness_hydrostatic"] = matrix_to_json(t.stiffness_hydrostatic);
  j["stiffness_turbine"] = matrix_to_json(t.stiffness_turbine);
  j["stiffness_mooring"] = matrix_to_json(t.stiffness_mooring);
  j["drag"] = std::vector<double>(t.drag.data(), t.drag.data() + kDofs);
  out << j.dump() << '\n';
}

CoefficientTables load_tables(std::istream& in)
{
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("tables file: ") + e.what());
  }
  try {
    const int version = field(j, "schema_version").get<int>();
    if (version != CoefficientTables::kSchemaVersion)
      throw ValidationError("tables file: unsupported schema_version " + std::to_string(version));

    CoefficientTables t;
    t.grid = FrequencyGrid(field(j, "omega").get<std::vector<double>>());
    const std::size_t n = t.grid.size();
    t.added_mass = per_frequency<Mat7>(j, "added_mass", n, matrix_from_json);
    t.radiation_damping = per_frequency<Mat7>(j, "radiation_damping", n, matrix_from_json);
    t.diffraction = per_frequency<CVec7>(j, "diffraction", n, cvec_from_json);
    t.aero_transfer = per_frequency<CVec7>(j, "aero_transfer", n, cvec_from_json);
    t.mass_floater = matrix_from_json(field(j, "mass_floater"), "mass_floater");
    t.mass_turbine = matrix_from_json(field(j, "mass_turbine"), "mass_turbine");
    t.damping_turbine = matrix_from_json(field(j, "damping_turbine"), "damping_turbine");
    t.stiffness_hydrostatic = matrix_from_json(field(j, "stiffness_hydrostatic"), "stiffness_hydrostatic");
    t.stiffness_turbine = matrix_from_json(field(j, "stiffness_turbine"), "stiffness_turbine");
    t.stiffness_mooring = matrix_from_json(field(j, "stiffness_mooring"), "stiffness_mooring");
    const auto drag = field(j, "drag").get<std::vector<double>>();
    if (drag.size() != kDofs)
      throw ValidationError("tables file: field 'drag' must hold 7 numbers");
    for (int d = 0; d < kDofs; ++d)
      t.drag[d] = drag[d];
    return t;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("tables file: ") + e.what());
  }
}

void save_tables(const std::string& path, const CoefficientTables& tables)
{
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot open '" + path + "' for writing");
  save_tables(out, tables);
}

CoefficientTables load_tables(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("tables file not found: '" + path + "'");
  return load_tables(in);
}

} // namespace fowt
