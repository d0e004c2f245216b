#pragma once

#include "fowt/spectra.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fowt {

/// Degrees of freedom: surge, sway, heave, roll, pitch, yaw, tower-top fore-aft.
inline constexpr int kDofs = 7;

enum Dof : int
{
  surge = 0,
  sway = 1,
  heave = 2,
  roll = 3,
  pitch = 4,
  yaw = 5,
  tower_top = 6
};

using Complex = std::complex<double>;
using Mat7 = Eigen::Matrix<double, kDofs, kDofs>;
using Vec7 = Eigen::Matrix<double, kDofs, 1>;
using CMat7 = Eigen::Matrix<Complex, kDofs, kDofs>;
using CVec7 = Eigen::Matrix<Complex, kDofs, 1>;

/// Frequency-dependent hydrodynamic data and linearised turbine/mooring
/// matrices of the coupled floater-turbine system.
struct CoefficientTables
{
  static constexpr int kSchemaVersion = 1;

  FrequencyGrid grid;
  std::vector<Mat7> added_mass;         ///< A(w)
  std::vector<Mat7> radiation_damping;  ///< B(w)
  std::vector<CVec7> diffraction;       ///< X(w), force per unit wave amplitude
  std::vector<CVec7> aero_transfer;     ///< F_d(w), force per unit wind speed
  Mat7 mass_floater = Mat7::Zero();
  Mat7 mass_turbine = Mat7::Zero();
  Mat7 damping_turbine = Mat7::Zero();
  Mat7 stiffness_hydrostatic = Mat7::Zero();
  Mat7 stiffness_turbine = Mat7::Zero();
  Mat7 stiffness_mooring = Mat7::Zero();
  Vec7 drag = Vec7::Zero(); ///< quadratic drag coefficients q_d per DoF

  Mat7 total_mass() const { return mass_floater + mass_turbine; }
  Mat7 total_stiffness() const
  {
    return stiffness_hydrostatic + stiffness_turbine + stiffness_mooring;
  }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool operator==(const CoefficientTables& other) const;
};

/// Response of the coupled system: full 7x7 cross-spectral matrix per w.
struct ResponseSpectra
{
  FrequencyGrid grid;
  std::vector<CMat7> cross; ///< S_q(w), Hermitian per w [unit^2 s/rad]
  Vec7 sigma = Vec7::Zero();
  Vec7 sigma_velocity = Vec7::Zero();

  Psd auto_spectrum(int dof) const;
};

struct StructureGeometry
{
  double fairlead_x = 40.868;
  double fairlead_z = -14.0;
  Eigen::Matrix2d cable_stiffness{{4.0e4, 1.8e4}, {1.8e4, 2.6e4}};
  double cable_area = 9.217e-3; ///< two bars of 76.6 mm chain
  double tower_length = 77.6;
  double tower_base_diameter = 6.5;
  double tower_base_wall = 0.027;
  double tower_top_stiffness = 0.0; ///< C_tot(7,7) [N/m]

  /// Annular section modulus pi (Do^4 - Di^4) / (32 Do) [m^3].
  double section_modulus() const;

  /// Default geometry with the tower-top stiffness taken from the tables.
  static StructureGeometry from_tables(const CoefficientTables& tables);
};

struct BorgmanOptions
{
  double tol = 1e-4;
  int max_iter = 50;
  /// Initial velocity standard deviation used to seed B_M, per DoF.
  double seed_velocity = 0.01;
};

struct BorgmanResult
{
  ResponseSpectra response;
  std::vector<Vec7> damping_history; ///< B_M diagonal used in each solve
  std::vector<double> residuals;     ///< max relative change of velocity sigma
  int iterations = 0;
};

/// One linear solve of the coupled equations for wave and wind loading
/// with a fixed diagonal drag damping B_M.
ResponseSpectra solve_coupled(const CoefficientTables& tables,
                              const Psd& waves,
                              const Psd& wind,
                              const Vec7& drag_damping);

/// Equivalent-linear drag damping for a velocity standard deviation.
Vec7 borgman_damping(const Vec7& drag, const Vec7& sigma_velocity);

/// Fixed-point iteration on the Borgman drag damping.
BorgmanResult borgman_iterate(const CoefficientTables& tables,
                              const Psd& waves,
                              const Psd& wind,
                              BorgmanOptions options = {});

/// Linearised fairlead displacement [dx, dz] for rigid motions (surge, heave, pitch).
Eigen::Vector2cd fairlead_displacement(const StructureGeometry& geom, Complex q1, Complex q3, Complex q5);

/// Exact finite-rotation fairlead displacement for real-valued motions.
Eigen::Vector2d fairlead_displacement_exact(const StructureGeometry& geom, double q1, double q3, double q5);

/// Fairlead tension stress PSD [MPa^2 s/rad].
Psd fairlead_stress_psd(const ResponseSpectra& response, const StructureGeometry& geom);

/// Tower-base bending stress PSD [MPa^2 s/rad].
Psd towerbase_stress_psd(const ResponseSpectra& response, const StructureGeometry& geom);

/// Deterministic, physically plausible 5-MW semi-submersible-like tables.
CoefficientTables synthetic_tables(std::uint64_t seed, const FrequencyGrid& grid);

/// Response per unit wave amplitude for one DoF (wind off, drag as given).
std::vector<Complex> rao(const CoefficientTables& tables, int dof, const Vec7& drag_damping = Vec7::Zero());

void save_tables(std::ostream& out, const CoefficientTables& tables);
CoefficientTables load_tables(std::istream& in);
void save_tables(const std::string& path, const CoefficientTables& tables);
CoefficientTables load_tables(const std::string& path);

} // namespace fowt
