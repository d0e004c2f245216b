#include <doctest.h>

#include "fowt/errors.hpp"
#include "fowt/gpr.hpp"
#include "fowt/random.hpp"
#include "support.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numeric>

using namespace fowt;
using fowt::testing::rel;

namespace {

std::vector<Eigen::Vector2d> random_points(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0)
{
  std::vector<Eigen::Vector2d> x;
  for (std::size_t i = 0; i < n; ++i)
    x.emplace_back(rng.uniform(lo, hi), rng.uniform(lo, hi));
  return x;
}

double smooth(const Eigen::Vector2d& x)
{
  return 3.0 + std::sin(2.0 * x[0]) + 0.5 * x[1] * x[1];
}

std::vector<double> targets(const std::vector<Eigen::Vector2d>& x, double (*f)(const Eigen::Vector2d&))
{
  std::vector<double> y;
  for (const auto& p : x)
    y.push_back(f(p));
  return y;
}

Eigen::MatrixX2d as_matrix(const std::vector<Eigen::Vector2d>& x)
{
  Eigen::MatrixX2d z(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t i = 0; i < x.size(); ++i)
    z.row(static_cast<Eigen::Index>(i)) = x[i].transpose();
  return z;
}

} // namespace

TEST_CASE("nlml gradient matches central differences")
{
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_points(8, rng, -1.5, 1.5);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i)
      y[i] = rng.normal();
    const Eigen::Vector3d theta(rng.uniform(-3.0, 0.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 0.7));
    const NlmlResult r = nlml(theta, as_matrix(x), y);
    Eigen::Vector3d fd;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-5;
      Eigen::Vector3d tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      fd[k] = (nlml(tp, as_matrix(x), y).value - nlml(tm, as_matrix(x), y).value) / (2 * h);
    }
    CHECK((r.gradient - fd).cwiseAbs().maxCoeff() / std::max(fd.cwiseAbs().maxCoeff(), 1e-12) <= 1e-5);
  }
}

TEST_CASE("nlml value")
{
  const std::vector<Eigen::Vector2d> x{{0.0, 0.0}, {0.5, 0.1}, {1.0, -0.3}};
  Eigen::VectorXd y(3);
  y << 0.3, -0.1, 0.5;
  const Eigen::Vector3d theta(std::log(0.1), std::log(2.0), std::log(0.7));
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      k(i, j) = rbf_kernel(x[i], x[j], 2.0, 0.7) + (i == j ? 0.01 : 0.0);
  const Eigen::LLT<Eigen::Matrix3d> llt(k);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double expected = 0.5 * y.dot(llt.solve(y)) + 0.5 * logdet + 1.5 * std::log(2.0 * M_PI);
  CHECK(nlml(theta, as_matrix(x), y).value == doctest::Approx(expected).epsilon(1e-12));

  SUBCASE("duplicate inputs are regularised by the noise")
  {
    const std::vector<Eigen::Vector2d> dup{{0.2, 0.2}, {0.2, 0.2}, {0.8, 0.1}};
    const NlmlResult r = nlml(Eigen::Vector3d(std::log(1e-2), 0.0, 0.0), as_matrix(dup), y);
    CHECK(std::isfinite(r.value));
    CHECK(r.jitter == 0.0);
  }
}

TEST_CASE("fit")
{
  Rng rng(3);
  const auto x = random_points(12, rng, 0.0, 3.0);
  const auto y = targets(x, smooth);

  SUBCASE("deterministic")
  {
    const GaussianProcess a = GaussianProcess::fit(x, y, {8, 5});
    const GaussianProcess b = GaussianProcess::fit(x, y, {8, 5});
    CHECK(a.to_json() == b.to_json());
    CHECK(a.hyperparams().prior_mean == doctest::Approx(std::accumulate(y.begin(), y.end(), 0.0) / y.size()));
  }

  SUBCASE("scaling targets scales the signal variance")
  {
    const GaussianProcess a = GaussianProcess::fit(x, y, {8, 5});
    std::vector<double> y3;
    for (double v : y)
      y3.push_back(3.0 * v);
    const GaussianProcess b = GaussianProcess::fit(x, y3, {8, 5});
    CHECK(rel(b.hyperparams().signal_scale, 9.0 * a.hyperparams().signal_scale) < 1e-4);
    CHECK(rel(b.hyperparams().length_scale, a.hyperparams().length_scale) < 1e-4);
  }

  SUBCASE("constant targets")
  {
    const std::vector<double> c(x.size(), 4.2);
    const GaussianProcess gp = GaussianProcess::fit(x, c);
    for (const auto& p : random_points(30, rng, 0.0, 3.0))
      CHECK(gp.predict(p).mean == doctest::Approx(4.2).epsilon(1e-6));
    const HyperparamBounds bounds = HyperparamBounds::for_targets(Eigen::Map<const Eigen::VectorXd>(c.data(), 12));
    CHECK(std::log(gp.hyperparams().signal_scale) <= bounds.lo[1] + 1.0);
  }

  CHECK_THROWS_AS(GaussianProcess::fit({{0.0, 0.0}}, {1.0}), ValidationError);
  CHECK_THROWS_AS(GaussianProcess::fit(x, std::vector<double>(3, 1.0)), ValidationError);
}

TEST_CASE("length scale recovery from a known GP")
{
  // Draw n = 60 targets from a GP with l = 0.5 on standardised inputs.
  Rng rng(101);
  std::vector<Eigen::Vector2d> z;
  for (int i = 0; i < 60; ++i)
    z.emplace_back(rng.normal(), rng.normal());
  const Standardization unit;
  Eigen::MatrixXd k(60, 60);
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j)
      k(i, j) = rbf_kernel(z[i], z[j], 1.0, 0.5) + (i == j ? 1e-4 : 0.0);
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
  int hits = 0;
  const int draws = 10;
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXd e(60);
    for (int i = 0; i < 60; ++i)
      e[i] = rng.normal();
    const Eigen::VectorXd f = l * e;
    const GaussianProcess gp = GaussianProcess::fit(z, std::vector<double>(f.data(), f.data() + 60), unit, {8, 1});
    const double ratio = gp.hyperparams().length_scale / 0.5;
    hits += ratio > 1.0 / 1.5 && ratio < 1.5;
  }
  CHECK(hits >= 8);
}

TEST_CASE("prediction")
{
  Rng rng(9);
  const auto x = random_points(10, rng, 0.0, 2.0);
  const auto y = targets(x, smooth);
  const Standardization st = Standardization::of(x);

  SUBCASE("interpolates with tiny noise")
  {
    const GaussianProcess gp = GaussianProcess::with_hyperparams(x, y, st, {1e-6, 1.0, 0.8, 3.5});
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Prediction p = gp.predict(x[i]);
      CHECK(rel(p.mean, y[i]) < 1e-3);
      CHECK(p.sd < 1e-3);
    }
  }

  SUBCASE("reverts to the prior far away")
  {
    const GaussianProcess gp = GaussianProcess::with_hyperparams(x, y, st, {1e-3, 2.0, 0.5, 3.5});
    const Prediction p = gp.predict({200.0, -300.0});
    CHECK(p.mean == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(p.sd * p.sd == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("midpoint of two symmetric points")
  {
    const std::vector<Eigen::Vector2d> two{{-1.0, 0.0}, {1.0, 0.0}};
    const GaussianProcess centred = GaussianProcess::with_hyperparams(two, {2.0, 5.0}, Standardization{}, {0.1, 1.0, 1.0, 3.5});
    CHECK(centred.predict({0.0, 0.0}).mean == doctest::Approx(3.5).epsilon(1e-14));
  }

  SUBCASE("posterior variance never exceeds the prior")
  {
    const GaussianProcess gp = GaussianProcess::fit(x, y, st);
    const Hyperparams& hp = gp.hyperparams();
    for (int i = 0; i < 50; ++i)
      for (int j = 0; j < 50; ++j) {
        const Prediction p = gp.predict({-1.0 + 4.0 * i / 49.0, -1.0 + 4.0 * j / 49.0});
        CHECK(p.sd >= 0.0);
        CHECK(p.sd * p.sd <= hp.signal_scale + 1e-9);
        CHECK(p.sd <= std::sqrt(hp.signal_scale + hp.noise_sd * hp.noise_sd) + 1e-9);
      }
  }

  SUBCASE("batch and single predictions agree")
  {
    const GaussianProcess gp = GaussianProcess::fit(x, y, st);
    const auto pts = random_points(25, rng, -0.5, 2.5);
    const auto many = gp.predict_many(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(many[i].mean == doctest::Approx(gp.predict(pts[i]).mean).epsilon(1e-12));
      CHECK(many[i].sd == doctest::Approx(gp.predict(pts[i]).sd).epsilon(1e-9));
    }
  }

  SUBCASE("invariant to the units of the inputs")
  {
    const GaussianProcess a = GaussianProcess::fit(x, y, {8, 2});
    std::vector<Eigen::Vector2d> scaled;
    for (const auto& p : x)
      scaled.emplace_back(10.0 * p[0] + 1.0, 0.1 * p[1] - 4.0);
    const GaussianProcess b = GaussianProcess::fit(scaled, y, {8, 2});
    for (const auto& p : random_points(10, rng, 0.0, 2.0)) {
      CHECK(b.predict({10.0 * p[0] + 1.0, 0.1 * p[1] - 4.0}).mean == doctest::Approx(a.predict(p).mean).epsilon(1e-8));
      CHECK(st.invert(st.apply(p)).isApprox(p, 1e-14));
    }
  }

  SUBCASE("refitting identical data reproduces predictions")
  {
    const GaussianProcess a = GaussianProcess::fit(x, y, st);
    const GaussianProcess b = GaussianProcess::fit(x, y, st);
    const Eigen::Vector2d p(0.7, 1.3);
    CHECK(std::abs(a.predict(p).mean - b.predict(p).mean) <= 1e-10);
  }
}

TEST_CASE("adding points")
{
  Rng rng(23);
  const auto x = random_points(8, rng, 0.0, 3.0);
  const auto y = targets(x, smooth);
  const Standardization st = Standardization::of(x);
  const GaussianProcess gp = GaussianProcess::fit(x, y, st, {8, 4});

  SUBCASE("warm-started refit equals a cold fit on the union")
  {
    const Eigen::Vector2d xn(1.5, 2.5);
    const GaussianProcess warm = gp.add_point(xn, smooth(xn), {8, 4});
    auto xu = x;
    auto yu = y;
    xu.push_back(xn);
    yu.push_back(smooth(xn));
    const GaussianProcess cold = GaussianProcess::fit(xu, yu, st, {8, 4});
    for (const auto& p : random_points(20, rng, 0.0, 3.0))
      CHECK(rel(warm.predict(p).mean, cold.predict(p).mean) < 1e-6);
    CHECK(warm.size() == 9);
  }

  SUBCASE("re-adding an existing point barely changes predictions")
  {
    const GaussianProcess again = gp.add_point(x[3], y[3], {8, 4});
    for (const auto& p : random_points(20, rng, 0.0, 3.0))
      CHECK(rel(again.predict(p).mean, gp.predict(p).mean) < 1e-3);
  }

  SUBCASE("adding at the most uncertain point contracts the posterior there")
  {
    Eigen::Vector2d worst;
    double sd = -1.0;
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j) {
        const Eigen::Vector2d p(3.0 * i / 29.0, 3.0 * j / 29.0);
        if (gp.predict(p).sd > sd) {
          sd = gp.predict(p).sd;
          worst = p;
        }
      }
    const GaussianProcess frozen = gp.add_point_frozen(worst, smooth(worst));
    CHECK(frozen.predict(worst).sd <= 1.01 * frozen.hyperparams().noise_sd);
    const GaussianProcess refit = gp.add_point(worst, smooth(worst));
    CHECK(refit.predict(worst).sd <= 1.01 * refit.hyperparams().noise_sd);
  }

  SUBCASE("with frozen hyperparameters variance never increases")
  {
    GaussianProcess m = gp;
    const auto probes = random_points(100, rng, -0.5, 3.5);
    std::vector<double> before;
    for (const auto& p : probes)
      before.push_back(m.predict(p).sd);
    for (int step = 0; step < 5; ++step) {
      const Eigen::Vector2d xn(rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0));
      m = m.add_point_frozen(xn, smooth(xn));
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const double after = m.predict(probes[i]).sd;
        CHECK(after <= before[i] + 1e-12);
        before[i] = after;
      }
    }
  }
}

TEST_CASE("serialisation round trip")
{
  Rng rng(31);
  const auto x = random_points(9, rng, 0.0, 3.0);
  const GaussianProcess gp = GaussianProcess::fit(x, targets(x, smooth));
  const GaussianProcess back = GaussianProcess::from_json(gp.to_json());
  CHECK(back.to_json() == gp.to_json());
  const Eigen::Vector2d p(1.1, 0.4);
  CHECK(back.predict(p).mean == doctest::Approx(gp.predict(p).mean).epsilon(1e-12));
  CHECK_THROWS_AS(GaussianProcess::from_json(R"({"schema_version": 2})"), ValidationError);
}
