#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace fowt {

struct Hyperparams
{
  double noise_sd = 1e-3;
  double signal_scale = 1.0; ///< kernel variance s
  double length_scale = 1.0; ///< isotropic, in standardised input units
  double prior_mean = 0.0;   ///< constant mean C

  Eigen::Vector3d log_params() const;
  static Hyperparams from_log(const Eigen::Vector3d& theta, double prior_mean);
};

/// Affine map of raw (Hs, Tp) inputs to zero mean and unit variance.
struct Standardization
{
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d scale = Eigen::Vector2d::Ones();

  Eigen::Vector2d apply(const Eigen::Vector2d& x) const { return (x - mean).cwiseQuotient(scale); }
  Eigen::Vector2d invert(const Eigen::Vector2d& z) const { return mean + scale.cwiseProduct(z); }

  /// Population mean and standard deviation of the points; zero spread maps to scale 1.
  static Standardization of(const std::vector<Eigen::Vector2d>& points);
};

struct Prediction
{
  double mean = 0.0;
  double sd = 0.0; ///< latent (noise-free) standard deviation
};

struct NlmlResult
{
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero(); ///< d/d(log sigma, log s, log l)
  double jitter = 0.0;
};

/// Negative log marginal likelihood of centred targets under the RBF kernel,
/// with its gradient in log-parameter space. Throws NumericalError when the
/// covariance cannot be factorised even with jitter up to 1e-6 s.
NlmlResult nlml(const Eigen::Vector3d& log_theta, const Eigen::MatrixX2d& z, const Eigen::VectorXd& y_centred);

/// RBF kernel s exp(-|a-b|^2 / (2 l^2)) on standardised inputs.
double rbf_kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double s, double l);

struct GpFitOptions
{
  int restarts = 8;
  std::uint64_t seed = 0;
  int max_iter = 200;
};

/// Log-space box for (log sigma, log s, log l) derived from the target spread.
struct HyperparamBounds
{
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;

  static HyperparamBounds for_targets(const Eigen::VectorXd& y);
  Eigen::Vector3d clamp(const Eigen::Vector3d& theta) const { return theta.cwiseMax(lo).cwiseMin(hi); }
};

/// Trained GP. Immutable once built; all mutators return a new model.
class GaussianProcess
{
public:
  static GaussianProcess fit(const std::vector<Eigen::Vector2d>& x,
                             const std::vector<double>& y,
                             const Standardization& standardization,
                             const GpFitOptions& options = {});

  static GaussianProcess fit(const std::vector<Eigen::Vector2d>& x,
                             const std::vector<double>& y,
                             const GpFitOptions& options = {});

  /// Model with the given hyperparameters, no optimisation.
  static GaussianProcess with_hyperparams(const std::vector<Eigen::Vector2d>& x,
                                          const std::vector<double>& y,
                                          const Standardization& standardization,
                                          const Hyperparams& hp);

  /// Append one observation and refit, warm-started from the current optimum.
  GaussianProcess add_point(const Eigen::Vector2d& x, double y, const GpFitOptions& options = {}) const;
  /// Append one observation keeping the hyperparameters fixed.
  GaussianProcess add_point_frozen(const Eigen::Vector2d& x, double y) const;

  Prediction predict(const Eigen::Vector2d& x) const;
  std::vector<Prediction> predict_many(const std::vector<Eigen::Vector2d>& x) const;

  const Hyperparams& hyperparams() const { return hp_; }
  const Standardization& standardization() const { return std_; }
  const std::vector<Eigen::Vector2d>& inputs() const { return x_; }
  const std::vector<double>& targets() const { return y_; }
  std::size_t size() const { return x_.size(); }
  double nlml_value() const { return nlml_; }
  double jitter() const { return jitter_; }

  std::string to_json() const;
  static GaussianProcess from_json(const std::string& text);

private:
  GaussianProcess() = default;
  static GaussianProcess train(const std::vector<Eigen::Vector2d>& x,
                               const std::vector<double>& y,
                               const Standardization& standardization,
                               const GpFitOptions& options,
                               const std::vector<Eigen::Vector3d>& extra_starts);
  void factorise();

  std::vector<Eigen::Vector2d> x_;
  std::vector<double> y_;
  Standardization std_;
  Hyperparams hp_;
  Eigen::MatrixX2d z_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double nlml_ = 0.0;
};

} // namespace fowt
