#include "fowt/gpr.hpp"

#include "fowt/errors.hpp"
#include "fowt/random.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace fowt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixX2d& a, const Eigen::MatrixX2d& b, double s, double l)
{
  Eigen::MatrixXd k(a.rows(), b.rows());
  const double inv = 1.0 / (2.0 * l * l);
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = s * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return k;
}

/// Cholesky of K + sigma^2 I with escalating jitter 1e-10 s .. 1e-6 s.
bool factorise_with_jitter(const Eigen::MatrixXd& k,
                           double noise_var,
                           double s,
                           Eigen::LLT<Eigen::MatrixXd>& llt,
                           double& jitter)
{
  for (int level = -1; level <= 4; ++level) {
    jitter = level < 0 ? 0.0 : s * std::pow(10.0, -10 + level);
    Eigen::MatrixXd kh = k;
    kh.diagonal().array() += noise_var + jitter;
    llt.compute(kh);
    if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all())
      return true;
  }
  return false;
}

Eigen::MatrixX2d standardised(const std::vector<Eigen::Vector2d>& x, const Standardization& st)
{
  Eigen::MatrixX2d z(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    z.row(static_cast<Eigen::Index>(i)) = st.apply(x[i]).transpose();
  return z;
}

struct Minimum
{
  Eigen::Vector3d theta;
  double value = kInf;
};

double safe_nlml(const Eigen::Vector3d& theta,
                 const Eigen::MatrixX2d& z,
                 const Eigen::VectorXd& yc,
                 Eigen::Vector3d& grad)
{
  try {
    const NlmlResult r = nlml(theta, z, yc);
    if (!std::isfinite(r.value) || !r.gradient.allFinite())
      return kInf;
    grad = r.gradient;
    return r.value;
  } catch (const NumericalError&) {
    return kInf;
  }
}

/// Projected BFGS on a box.
Minimum minimise_box(const Eigen::Vector3d& start,
                     const HyperparamBounds& box,
                     const Eigen::MatrixX2d& z,
                     const Eigen::VectorXd& yc,
                     int max_iter)
{
  Eigen::Vector3d x = box.clamp(start);
  Eigen::Vector3d g;
  double f = safe_nlml(x, z, yc, g);
  if (!std::isfinite(f))
    return {x, kInf};

  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  const double eps = 1e-12;
  int stalls = 0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Vector3d pg = g;
    for (int i = 0; i < 3; ++i)
      if ((x[i] <= box.lo[i] + eps && g[i] > 0.0) || (x[i] >= box.hi[i] - eps && g[i] < 0.0))
        pg[i] = 0.0;
    if (pg.lpNorm<Eigen::Infinity>() < 1e-9)
      break;

    Eigen::Vector3d d = -h * pg;
    for (int i = 0; i < 3; ++i)
      if (pg[i] == 0.0)
        d[i] = 0.0;
    if (d.dot(pg) >= 0.0) {
      h.setIdentity();
      d = -pg;
    }
    const double dmax = d.lpNorm<Eigen::Infinity>();
    if (dmax > 2.0)
      d *= 2.0 / dmax;

    double t = 1.0;
    Eigen::Vector3d xn, gn;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = box.clamp(x + t * d);
      fn = safe_nlml(xn, z, yc, gn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (h.isIdentity())
        break;
      h.setIdentity();
      continue;
    }

    const Eigen::Vector3d s = xn - x;
    const Eigen::Vector3d yv = gn - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() - rho * s * yv.transpose();
      h = v * h * v.transpose() + rho * s * s.transpose();
    }
    const double df = f - fn;
    x = xn;
    g = gn;
    f = fn;
    if (df < 1e-14 * (1.0 + std::abs(f)) && s.lpNorm<Eigen::Infinity>() < 1e-10) {
      if (++stalls >= 2)
        break;
    } else {
      stalls = 0;
    }
  }
  return {x, f};
}

} // namespace

// ---------------------------------------------------------------------------

Eigen::Vector3d Hyperparams::log_params() const
{
  return {std::log(noise_sd), std::log(signal_scale), std::log(length_scale)};
}

Hyperparams Hyperparams::from_log(const Eigen::Vector3d& theta, double prior_mean)
{
  return {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2]), prior_mean};
}

Standardization Standardization::of(const std::vector<Eigen::Vector2d>& points)
{
  require(!points.empty(), "Standardization: no points");
  Standardization st;
  const double n = static_cast<double>(points.size());
  st.mean.setZero();
  for (const auto& p : points)
    st.mean += p / n;
  Eigen::Vector2d var = Eigen::Vector2d::Zero();
  for (const auto& p : points)
    var += (p - st.mean).cwiseAbs2() / n;
  for (int k = 0; k < 2; ++k)
    st.scale[k] = var[k] > 0.0 ? std::sqrt(var[k]) : 1.0;
  return st;
}

double rbf_kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b, double s, double l)
{
  return s * std::exp(-(a - b).squaredNorm() / (2.0 * l * l));
}

HyperparamBounds HyperparamBounds::for_targets(const Eigen::VectorXd& y)
{
  const double n = static_cast<double>(y.size());
  const double mean = y.mean();
  const double var = y.size() > 1 ? (y.array() - mean).square().sum() / (n - 1.0) : 0.0;
  double sd = std::sqrt(var);
  if (!(sd > 0.0))
    sd = std::max(1e-6 * y.cwiseAbs().maxCoeff(), 1e-12);
  HyperparamBounds b;
  b.lo = {std::log(1e-6 * sd), std::log(1e-4 * sd * sd), std::log(0.05)};
  b.hi = {std::log(sd), std::log(1e2 * sd * sd), std::log(10.0)};
  return b;
}

NlmlResult nlml(const Eigen::Vector3d& log_theta, const Eigen::MatrixX2d& z, const Eigen::VectorXd& y_centred)
{
  require(z.rows() >= 2, "nlml: need at least two training points");
  require(z.rows() == y_centred.size(), "nlml: input/target size mismatch");
  const double sigma = std::exp(log_theta[0]);
  const double s = std::exp(log_theta[1]);
  const double l = std::exp(log_theta[2]);
  const Eigen::Index n = z.rows();

  const Eigen::MatrixXd kf = kernel_matrix(z, z, s, l);
  Eigen::LLT<Eigen::MatrixXd> llt;
  NlmlResult out;
  if (!factorise_with_jitter(kf, sigma * sigma, s, llt, out.jitter))
    throw NumericalError("nlml: covariance not positive definite even with jitter 1e-6 s");

  const Eigen::VectorXd alpha = llt.solve(y_centred);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  out.value = 0.5 * y_centred.dot(alpha) + 0.5 * log_det + 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // dNLML/dtheta = 0.5 tr((K^-1 - a a^T) dK/dtheta)
  const Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n)) - alpha * alpha.transpose();
  out.gradient[0] = sigma * sigma * w.trace();
  out.gradient[1] = 0.5 * w.cwiseProduct(kf).sum();
  Eigen::MatrixXd dl(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      dl(i, j) = kf(i, j) * (z.row(i) - z.row(j)).squaredNorm() / (l * l);
  out.gradient[2] = 0.5 * w.cwiseProduct(dl).sum();
  return out;
}

// ---------------------------------------------------------------------------

void GaussianProcess::factorise()
{
  z_ = standardised(x_, std_);
  const Eigen::MatrixXd kf = kernel_matrix(z_, z_, hp_.signal_scale, hp_.length_scale);
  if (!factorise_with_jitter(kf, hp_.noise_sd * hp_.noise_sd, hp_.signal_scale, llt_, jitter_))
    throw NumericalError("GaussianProcess: covariance not positive definite even with jitter 1e-6 s");
  Eigen::VectorXd yc(static_cast<Eigen::Index>(y_.size()));
  for (std::size_t i = 0; i < y_.size(); ++i)
    yc[static_cast<Eigen::Index>(i)] = y_[i] - hp_.prior_mean;
  alpha_ = llt_.solve(yc);
}

GaussianProcess GaussianProcess::train(const std::vector<Eigen::Vector2d>& x,
                                       const std::vector<double>& y,
                                       const Standardization& standardization,
                                       const GpFitOptions& options,
                                       const std::vector<Eigen::Vector3d>& extra_starts)
{
  require(x.size() == y.size(), "GaussianProcess::fit: input/target size mismatch");
  require(x.size() >= 2, "GaussianProcess::fit: need at least two training points");
  require(options.restarts >= 1, "GaussianProcess::fit: restarts must be >= 1");
  for (double v : y)
    require(std::isfinite(v), "GaussianProcess::fit: non-finite target");

  GaussianProcess gp;
  gp.x_ = x;
  gp.y_ = y;
  gp.std_ = standardization;
  const Eigen::MatrixX2d z = standardised(x, standardization);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  // Repeated identical observations count once towards C and the bounds.
  std::vector<double> distinct;
  for (std::size_t i = 0; i < x.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j)
      seen = x[j] == x[i] && y[j] == y[i];
    if (!seen)
      distinct.push_back(y[i]);
  }
  const Eigen::VectorXd yd = Eigen::Map<const Eigen::VectorXd>(distinct.data(), static_cast<Eigen::Index>(distinct.size()));
  const double c = yd.mean();
  const Eigen::VectorXd yc = yv.array() - c;
  const HyperparamBounds box = HyperparamBounds::for_targets(yd);

  std::vector<Eigen::Vector3d> starts = extra_starts;
  const double sd_ref = std::exp(box.hi[0]);
  starts.push_back(box.clamp(Eigen::Vector3d(std::log(0.1 * sd_ref), 2.0 * std::log(sd_ref), 0.0)));
  Rng rng(derive_seed(options.seed, "gpr_restarts"));
  for (int r = 1; r < options.restarts; ++r) {
    Eigen::Vector3d t;
    for (int k = 0; k < 3; ++k)
      t[k] = rng.uniform(box.lo[k], box.hi[k]);
    starts.push_back(t);
  }

  Minimum best;
  for (const Eigen::Vector3d& s0 : starts) {
    const Minimum m = minimise_box(s0, box, z, yc, options.max_iter);
    if (m.value < best.value)
      best = m;
  }
  if (!std::isfinite(best.value))
    throw NumericalError("GaussianProcess::fit: every restart failed to factorise the covariance");

  gp.hp_ = Hyperparams::from_log(best.theta, c);
  gp.nlml_ = best.value;
  gp.factorise();
  return gp;
}

GaussianProcess GaussianProcess::fit(const std::vector<Eigen::Vector2d>& x,
                                     const std::vector<double>& y,
                                     const Standardization& standardization,
                                     const GpFitOptions& options)
{
  return train(x, y, standardization, options, {});
}

GaussianProcess GaussianProcess::fit(const std::vector<Eigen::Vector2d>& x,
                                     const std::vector<double>& y,
                                     const GpFitOptions& options)
{
  require(!x.empty(), "GaussianProcess::fit: no training points");
  return train(x, y, Standardization::of(x), options, {});
}

GaussianProcess GaussianProcess::with_hyperparams(const std::vector<Eigen::Vector2d>& x,
                                                  const std::vector<double>& y,
                                                  const Standardization& standardization,
                                                  const Hyperparams& hp)
{
  require(x.size() == y.size() && !x.empty(), "GaussianProcess: need matching, non-empty inputs and targets");
  require(hp.noise_sd > 0.0 && hp.signal_scale > 0.0 && hp.length_scale > 0.0,
          "GaussianProcess: hyperparameters must be positive");
  GaussianProcess gp;
  gp.x_ = x;
  gp.y_ = y;
  gp.std_ = standardization;
  gp.hp_ = hp;
  gp.factorise();
  if (x.size() >= 2) {
    Eigen::VectorXd yc(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i)
      yc[static_cast<Eigen::Index>(i)] = y[i] - hp.prior_mean;
    gp.nlml_ = nlml(hp.log_params(), gp.z_, yc).value;
  }
  return gp;
}

GaussianProcess GaussianProcess::add_point(const Eigen::Vector2d& x, double y, const GpFitOptions& options) const
{
  std::vector<Eigen::Vector2d> xs = x_;
  std::vector<double> ys = y_;
  xs.push_back(x);
  ys.push_back(y);
  return train(xs, ys, std_, options, {hp_.log_params()});
}

GaussianProcess GaussianProcess::add_point_frozen(const Eigen::Vector2d& x, double y) const
{
  std::vector<Eigen::Vector2d> xs = x_;
  std::vector<double> ys = y_;
  xs.push_back(x);
  ys.push_back(y);
  return with_hyperparams(xs, ys, std_, hp_);
}

Prediction GaussianProcess::predict(const Eigen::Vector2d& x) const
{
  return predict_many({x}).front();
}

std::vector<Prediction> GaussianProcess::predict_many(const std::vector<Eigen::Vector2d>& x) const
{
  std::vector<Prediction> out(x.size());
  if (x.empty())
    return out;
  const Eigen::MatrixX2d zs = standardised(x, std_);
  const Eigen::MatrixXd ks = kernel_matrix(z_, zs, hp_.signal_scale, hp_.length_scale);
  const Eigen::VectorXd mu = ks.transpose() * alpha_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks);
  const Eigen::VectorXd reduction = v.colwise().squaredNorm().transpose();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double var = std::max(hp_.signal_scale - reduction[k], 0.0);
    out[i] = {hp_.prior_mean + mu[k], std::sqrt(var)};
  }
  return out;
}

std::string GaussianProcess::to_json() const
{
  nlohmann::json j;
  j["schema_version"] = 1;
  j["hyperparams"] = {{"noise_sd", hp_.noise_sd},
                      {"signal_scale", hp_.signal_scale},
                      {"length_scale", hp_.length_scale},
                      {"prior_mean", hp_.prior_mean}};
  j["standardization"] = {{"mean", {std_.mean[0], std_.mean[1]}}, {"scale", {std_.scale[0], std_.scale[1]}}};
  nlohmann::json xs = nlohmann::json::array();
  for (const auto& p : x_)
    xs.push_back({p[0], p[1]});
  j["x"] = xs;
  j["y"] = y_;
  return j.dump();
}

GaussianProcess GaussianProcess::from_json(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("GaussianProcess::from_json: ") + e.what());
  }
  for (const char* key : {"schema_version", "hyperparams", "standardization", "x", "y"})
    require(j.contains(key), std::string("GaussianProcess::from_json: missing field '") + key + "'");
  require(j["schema_version"] == 1, "GaussianProcess::from_json: unsupported schema_version");
  try {
    const auto& h = j["hyperparams"];
    Hyperparams hp{h.at("noise_sd").get<double>(), h.at("signal_scale").get<double>(),
                   h.at("length_scale").get<double>(), h.at("prior_mean").get<double>()};
    Standardization st;
    const auto& s = j["standardization"];
    st.mean = {s.at("mean")[0].get<double>(), s.at("mean")[1].get<double>()};
    st.scale = {s.at("scale")[0].get<double>(), s.at("scale")[1].get<double>()};
    std::vector<Eigen::Vector2d> xs;
    for (const auto& p : j["x"])
      xs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    const auto ys = j["y"].get<std::vector<double>>();
    return with_hyperparams(xs, ys, st, hp);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("GaussianProcess::from_json: ") + e.what());
  }
}

} // namespace fowt
