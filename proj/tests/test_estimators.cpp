#include <doctest.h>

#include <cmath>
#include <random>

#include "mcdist/estimators.hpp"

using namespace mcdist;

TEST_CASE("mlr recovers an exact linear relation") {
  // d = 1 + 2 x over three points.
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  Eigen::Vector3d d(1, 3, 5);
  LinearModel m = mlr_train(X, d);
  CHECK(m.theta[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.theta[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(mlr_predict(m, Eigen::VectorXd::Constant(1, 5.0)) == doctest::Approx(11.0));
}

TEST_CASE("mlr with a feature equal to the distance is exact") {
  Eigen::Index n = 20;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd d(n);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(100.0, 200.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = u(rng);
    X(i, 0) = 1.0;
    X(i, 1) = d[i];
    X(i, 2) = u(rng);  // irrelevant noise column
  }
  LinearModel m = mlr_train(X, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector2d f(X(i, 1), X(i, 2));
    CHECK(mlr_predict(m, f) == doctest::Approx(d[i]).epsilon(1e-9));
  }
}

TEST_CASE("mlr matches the SVD least-squares solution on noisy data") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  Eigen::MatrixXd X(50, 10);
  Eigen::VectorXd d(50);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < X.cols(); ++j) X(i, j) = g(rng);
    d[i] = g(rng) * 10.0 + 150.0;
  }
  LinearModel m = mlr_train(X, d);
  Eigen::VectorXd oracle = X.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(d);
  CHECK((m.theta - oracle).norm() <= 1e-8 * (1.0 + oracle.norm()));
}

TEST_CASE("mlr rejects rank-deficient and undersized inputs") {
  Eigen::MatrixXd X(5, 3);
  X.col(0).setOnes();
  X.col(1) = Eigen::VectorXd::LinSpaced(5, 0, 4);
  X.col(2) = 2.0 * X.col(1);  // duplicate direction
  CHECK_THROWS_AS(mlr_train(X, Eigen::VectorXd::Ones(5)), RankDeficient);

  Eigen::MatrixXd small = Eigen::MatrixXd::Random(3, 3);
  CHECK_THROWS_AS(mlr_train(small, Eigen::VectorXd::Ones(3)), InsufficientData);

  CHECK_THROWS_AS(mlr_train(Eigen::MatrixXd::Random(5, 2), Eigen::VectorXd::Ones(4)),
                  DimensionMismatch);

  LinearModel m;
  m.theta = Eigen::Vector3d(1, 2, 3);
  CHECK_THROWS_AS(mlr_predict(m, Eigen::VectorXd::Ones(3)), DimensionMismatch);
}

TEST_CASE("network activation is tanh in disguise") {
  CHECK(nn_activation(0.0) == doctest::Approx(0.0));
  for (double z : {-2.0, -0.3, 0.7, 1.9}) {
    CHECK(nn_activation(z) == doctest::Approx(std::tanh(z)).epsilon(1e-14));
  }
  CHECK(nn_activation(50.0) == doctest::Approx(1.0));
  CHECK(nn_activation(-50.0) == doctest::Approx(-1.0));
}

TEST_CASE("backprop jacobian matches central finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::uniform_real_distribution<double> w(-0.5, 0.5);

  for (int trial = 0; trial < 20; ++trial) {
    NeuralModel m;
    m.inputs = 9;
    m.hidden_nodes = 1 + trial % 3;
    m.output_activation = trial % 2 == 0 ? OutputActivation::Tanh : OutputActivation::Linear;
    m.theta.resize(m.weight_count());
    for (auto& t : m.theta) t = w(rng);
    m.input_min = Eigen::VectorXd::Zero(9);
    m.input_max = Eigen::VectorXd::Ones(9);
    m.target_min = 0.0;
    m.target_max = 1.0;

    Eigen::MatrixXd x(4, 9);
    Eigen::VectorXd y(4);
    for (Eigen::Index r = 0; r < 4; ++r) {
      for (Eigen::Index c = 0; c < 9; ++c) x(r, c) = u(rng);
      y[r] = u(rng);
    }

    Eigen::VectorXd e;
    Eigen::MatrixXd jac;
    nn_residuals_jacobian(m, x, y, e, jac);
    REQUIRE(jac.rows() == 4);
    REQUIRE(jac.cols() == m.weight_count());

    for (Eigen::Index j = 0; j < jac.cols(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(m.theta[j]));
      NeuralModel lo = m, hi = m;
      lo.theta[j] -= h;
      hi.theta[j] += h;
      Eigen::VectorXd e_lo, e_hi;
      Eigen::MatrixXd scratch;
      nn_residuals_jacobian(lo, x, y, e_lo, scratch);
      nn_residuals_jacobian(hi, x, y, e_hi, scratch);
      const Eigen::VectorXd fd = (e_hi - e_lo) / (2.0 * h);
      for (Eigen::Index i = 0; i < 4; ++i) {
        const double denom = std::max(1.0, std::abs(fd[i]));
        CHECK(std::abs(jac(i, j) - fd[i]) / denom <= 1e-6);
      }
    }
  }
}

TEST_CASE("nnr training is deterministic in the seed and learns a line") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(100.0, 200.0);
  Eigen::MatrixXd X(40, 2);
  Eigen::VectorXd d(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    d[i] = u(rng);
    X(i, 0) = d[i];
    X(i, 1) = u(rng);
  }

  NNRTrainConfig cfg;
  cfg.hidden_nodes = 2;
  cfg.seed = 5;
  cfg.lm.max_iters = 200;
  NeuralModel a = nnr_train(X, d, cfg);
  NeuralModel b = nnr_train(X, d, cfg);
  CHECK(a.theta == b.theta);

  cfg.seed = 6;
  NeuralModel c = nnr_train(X, d, cfg);
  CHECK(a.theta != c.theta);

  // The first column is the distance itself; a trained net should track it.
  double err = 0.0;
  for (Eigen::Index i = 0; i < 40; ++i)
    err = std::max(err, std::abs(nnr_predict(a, X.row(i).transpose()) - d[i]));
  CHECK(err < 10.0);
}

TEST_CASE("nnr early stopping keeps the best validation parameters") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(100.0, 200.0);
  Eigen::MatrixXd X(30, 1), Xv(10, 1);
  Eigen::VectorXd d(30), dv(10);
  for (Eigen::Index i = 0; i < 30; ++i) {
    d[i] = u(rng);
    X(i, 0) = d[i];
  }
  for (Eigen::Index i = 0; i < 10; ++i) {
    dv[i] = u(rng);
    Xv(i, 0) = dv[i];
  }

  NNRTrainConfig cfg;
  cfg.seed = 1;
  cfg.lm.max_iters = 300;
  NeuralModel m = nnr_train(X, d, cfg, &Xv, &dv);
  // Sanity: the stopped model is usable and finite.
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(std::isfinite(nnr_predict(m, Xv.row(i).transpose())));
  }
}

TEST_CASE("degenerate feature ranges normalize safely") {
  Eigen::MatrixXd X(12, 2);
  X.col(0).setConstant(7.0);  // zero range
  X.col(1) = Eigen::VectorXd::LinSpaced(12, 100.0, 200.0);
  Eigen::VectorXd d = X.col(1);
  NNRTrainConfig cfg;
  cfg.lm.max_iters = 100;
  NeuralModel m = nnr_train(X, d, cfg);
  CHECK(std::isfinite(nnr_predict(m, Eigen::Vector2d(7.0, 150.0))));

  // Constant targets denormalize to that constant.
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(12, 42.0);
  NeuralModel mc = nnr_train(X, flat, cfg);
  CHECK(nnr_predict(mc, Eigen::Vector2d(7.0, 150.0)) == doctest::Approx(42.0));
}

TEST_CASE("received power is energy over samples") {
  CHECK(received_power(0.0, 5) == doctest::Approx(0.0));
  CHECK(received_power(10.0, 4) == doctest::Approx(2.5));
  CHECK_THROWS_AS(received_power(1.0, 0), DomainError);
}

TEST_CASE("curve inversions round-trip the forward curves") {
  // One row per emission time, from the fitted tables.
  CurveEstimatorParams params;
  params.rows = {
      {0.25, 2.724, -0.03116, 1.1259, 0.0178, 7.3598},
      {0.50, 13.4001, -0.04146, 0.2401, 0.0268, 9.3666},
      {0.75, 3.1888, -0.02973, 0.5045, 0.0221, 11.0108},
  };

  for (const CurveRow& row : params.rows) {
    for (double d = 0.0; d <= 300.0; d += 10.0) {
      const double p_r = row.transmit_power * row.power_amplitude *
                         std::exp(row.power_rate * d);
      const double t_pk = row.peaktime_amplitude * std::exp(row.peaktime_rate * d);

      CHECK(std::abs(power_based_estimate(p_r, row.transmit_power, row.power_amplitude,
                                          row.power_rate) -
                     d) <= 1e-9);
      CHECK(std::abs(peak_time_estimate(t_pk, row.peaktime_amplitude, row.peaktime_rate) - d) <=
            1e-9);
      CHECK(std::abs(combined_estimate(p_r, row.transmit_power, t_pk, row.power_amplitude,
                                       row.power_rate, row.peaktime_amplitude,
                                       row.peaktime_rate) -
                     d) <= 1e-9);
    }
  }
}

TEST_CASE("curve row lookup tolerates tiny float error only") {
  CurveEstimatorParams params;
  params.rows = {{0.25, 1, -1, 1, 1, 1}};
  CHECK(params.row_for(0.25 + 5e-10).emission_time == 0.25);
  CHECK_THROWS_AS(params.row_for(0.26), UnknownEmissionTime);
}

TEST_CASE("estimator domain guards") {
  CHECK_THROWS_AS(power_based_estimate(1.0, 1.0, 1.0, 0.0), DegenerateRates);
  CHECK_THROWS_AS(power_based_estimate(0.0, 1.0, 1.0, -0.03), DomainError);
  CHECK_THROWS_AS(power_based_estimate(1.0, 0.0, 1.0, -0.03), DomainError);
  CHECK_THROWS_AS(peak_time_estimate(0.0, 1.0, 0.02), DomainError);
  CHECK_THROWS_AS(peak_time_estimate(1.0, 1.0, 0.0), DegenerateRates);
  CHECK_THROWS_AS(combined_estimate(1, 1, 1, 1, 0.5, 1, 0.5), DegenerateRates);
  CHECK_THROWS_AS(combined_estimate(-1, 1, 1, 1, -0.03, 1, 0.02), DomainError);
}
