#include <doctest.h>

#include <cmath>

#include "tudiff/model.hpp"
#include "tudiff/rng.hpp"

using namespace tudiff;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_matrix(long rows, long cols, std::uint64_t seed) {
  Eigen::MatrixXd m(rows, cols);
  rng::Sequence gen(seed, 0);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) m(r, c) = gen.normal();
  }
  return m;
}

// Central finite differences over every parameter of a small model.
double max_grad_rel_error(DenoiserModel m, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& target, double step) {
  const auto [loss, grad] = loss_and_grad(m, x, target);
  (void)loss;
  double worst = 0.0;
  auto probe = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + step;
    const double up = loss_and_grad(m, x, target).first;
    *param = saved - step;
    const double down = loss_and_grad(m, x, target).first;
    *param = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (long r = 0; r < m.weights[l].rows(); ++r) {
      for (long c = 0; c < m.weights[l].cols(); ++c) {
        probe(&m.weights[l](r, c), grad.weights[l](r, c));
      }
    }
    for (long i = 0; i < m.biases[l].size(); ++i) {
      probe(&m.biases[l][i], grad.biases[l][i]);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("initialization is deterministic with the documented parameter count") {
  const DenoiserModel a = init_model({2, 64, 64, 2}, 0);
  const DenoiserModel b = init_model({2, 64, 64, 2}, 0);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    CHECK(a.weights[l] == b.weights[l]);
    CHECK(a.biases[l] == b.biases[l]);
  }
  // 2*64+64 + 64*64+64 + 64*2+2
  CHECK(a.parameter_count() == 4482);
  CHECK(init_model({2, 64, 64, 2}, 1).weights[0] != a.weights[0]);

  const DenoiserModel linear = init_model({5, 5}, 3);
  CHECK(linear.weights.size() == 1);
  CHECK(linear.parameter_count() == 30);

  CHECK_THROWS_AS(init_model({4}, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_model({4, 0, 4}, 0), std::invalid_argument);
}

TEST_CASE("prediction basics") {
  DenoiserModel m = init_model({3, 6, 3}, 2);
  for (auto& w : m.weights) w.setZero();
  const Eigen::MatrixXd x = random_matrix(4, 3, 1);
  CHECK(predict(m, x).cwiseAbs().maxCoeff() == 0.0);

  const DenoiserModel r = init_model({3, 6, 3}, 5);
  const Eigen::MatrixXd batch = random_matrix(3, 3, 7);
  const Eigen::MatrixXd all = predict(r, batch);
  for (int i = 0; i < 3; ++i) {
    CHECK((all.row(i) - predict(r, batch.row(i))).cwiseAbs().maxCoeff() <= 1e-14);
  }

  const Eigen::MatrixXd big = 100.0 * random_matrix(2, 3, 9).cwiseSign();
  CHECK(predict(r, big).allFinite());

  CHECK_THROWS_AS(predict(r, random_matrix(2, 4, 0)), std::invalid_argument);
}

TEST_CASE("loss is zero at the model output") {
  const DenoiserModel m = init_model({3, 8, 3}, 11);
  const Eigen::MatrixXd x = random_matrix(5, 3, 13);
  const Eigen::MatrixXd y = predict(m, x);
  const auto [loss, grad] = loss_and_grad(m, x, y);
  CHECK(loss == 0.0);
  for (const auto& g : grad.weights) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& g : grad.biases) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear model gradient matches the least-squares closed form") {
  DenoiserModel m = init_model({3, 2}, 17);
  const Eigen::MatrixXd x = random_matrix(1, 3, 19);
  const Eigen::MatrixXd y = random_matrix(1, 2, 23);
  const auto [loss, grad] = loss_and_grad(m, x, y);
  const Eigen::MatrixXd pred = (x * m.weights[0]).rowwise() + m.biases[0].transpose();
  CHECK(loss == Approx(((pred - y).squaredNorm())).epsilon(1e-12));
  const Eigen::MatrixXd expected_dw = 2.0 * x.transpose() * (pred - y);
  CHECK((grad.weights[0] - expected_dw).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((grad.biases[0].transpose() - 2.0 * (pred - y)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("analytic gradients agree with central finite differences") {
  const DenoiserModel m = init_model({4, 8, 8, 4}, 29);
  for (int trial = 0; trial < 3; ++trial) {
    const Eigen::MatrixXd x = random_matrix(2, 4, 100 + trial);
    const Eigen::MatrixXd y = random_matrix(2, 4, 200 + trial);
    CHECK(max_grad_rel_error(m, x, y, 1e-5) < 1e-4);
  }
}

TEST_CASE("adam keeps parameters still under zero gradient") {
  DenoiserModel m = init_model({3, 4, 3}, 31);
  const DenoiserModel before = m;
  AdamState state = AdamState::zeros_like(m);
  state.m_w[0].setConstant(0.25);  // nonzero moment decays but moves nothing new
  ModelGrad zero;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    zero.weights.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    zero.biases.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
  }
  AdamConfig cfg;
  cfg.epsilon = 1e-8;

  // zero gradient with zero moments: parameters unchanged, step counter moves
  AdamState fresh = AdamState::zeros_like(m);
  adam_step(m, zero, fresh, cfg);
  CHECK(fresh.step == 1);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    CHECK(m.weights[l] == before.weights[l]);
  }
  // decayed first moment
  adam_step(m, zero, state, cfg);
  CHECK(state.m_w[0](0, 0) == Approx(0.225).epsilon(1e-12));
}

TEST_CASE("first adam step follows the bias-corrected closed form") {
  DenoiserModel m = init_model({2, 2}, 37);
  const DenoiserModel before = m;
  AdamState state = AdamState::zeros_like(m);
  AdamConfig cfg;
  ModelGrad g;
  g.weights.push_back(random_matrix(2, 2, 41));
  g.biases.push_back(Eigen::VectorXd::Zero(2));
  adam_step(m, g, state, cfg);
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double gv = g.weights[0](r, c);
      const double expected = cfg.learning_rate * gv / (std::abs(gv) + cfg.epsilon);
      CHECK(before.weights[0](r, c) - m.weights[0](r, c) == Approx(expected).epsilon(1e-9));
    }
  }

  // identical configs and grads move identically
  DenoiserModel m2 = before;
  AdamState s2 = AdamState::zeros_like(m2);
  adam_step(m2, g, s2, cfg);
  CHECK(m2.weights[0] == m.weights[0]);
}

TEST_CASE("training reduces the loss on a toy swiss roll") {
  TrainConfig cfg;
  cfg.schedule = make_schedule(ScheduleKind::UniformRadialVP, 20);
  cfg.ambient = {8, 2};
  cfg.hidden = {32, 32};
  cfg.epochs = 40;
  cfg.batch_size = 256;
  cfg.seed = 3;
  const SampleBatch data = embed(swiss_roll(256, 0.01, 3), 8);
  const TrainResult r = train(cfg, data);
  REQUIRE(r.epoch_loss.size() == 40);
  for (double loss : r.epoch_loss) CHECK(std::isfinite(loss));
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());
}

TEST_CASE("training is bit-deterministic") {
  TrainConfig cfg;
  cfg.schedule = make_schedule(ScheduleKind::ConventionalVP, 10);
  cfg.ambient = {4, 2};
  cfg.hidden = {16};
  cfg.epochs = 5;
  cfg.batch_size = 64;
  cfg.seed = 9;
  const SampleBatch data = embed(swiss_roll(64, 0.01, 9), 4);
  const TrainResult a = train(cfg, data);
  const TrainResult b = train(cfg, data);
  CHECK(a.epoch_loss == b.epoch_loss);
  for (std::size_t l = 0; l < a.model.weights.size(); ++l) {
    CHECK(a.model.weights[l] == b.model.weights[l]);
    CHECK(a.model.biases[l] == b.model.biases[l]);
  }
}

TEST_CASE("a realizable one-point dataset trains to exact recovery") {
  // single clean point under the orthogonal variant: the time coordinate
  // identifies the step, so the regression target is a deterministic
  // function of the input, the optimum is realizable, and sampling must
  // come back to the point
  const AmbientConfig a{8, 2};
  TrainConfig cfg;
  cfg.schedule = make_schedule(ScheduleKind::UniformRadialVP, 10);
  cfg.ambient = a;
  cfg.hidden = {64, 64};
  cfg.epochs = 3000;
  cfg.batch_size = 64;
  cfg.seed = 5;
  cfg.ortho = axis_ortho_config(a, 2.0);

  SampleBatch point;
  point.data = Eigen::MatrixXd::Zero(64, 8);  // centered one-point dataset
  point.d_prime = 2;
  const TrainResult r = train(cfg, point);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());

  SampleOptions opts;
  opts.n = 8;
  opts.seed = 123;
  const Predictor p = [&](const Eigen::MatrixXd& x) { return predict(r.model, x); };
  const SampleBatch out = sample(p, cfg.schedule, &*cfg.ortho, a, opts);
  for (long i = 0; i < out.n(); ++i) {
    CHECK(out.data.row(i).norm() < 0.1);
  }
}

TEST_CASE("delta-zero orthogonal training stays on the base hyperplane") {
  const AmbientConfig a{4, 2};
  const OrthoTimeConfig flat = axis_ortho_config(a, 0.0);

  TrainConfig cfg;
  cfg.schedule = make_schedule(ScheduleKind::UniformRadialVP, 10);
  cfg.ambient = a;
  cfg.hidden = {16};
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.seed = 21;
  cfg.ortho = flat;

  const SampleBatch data = embed(swiss_roll(32, 0.01, 21), 4);
  const TrainResult with_ortho = train(cfg, data);
  const TrainResult again = train(cfg, data);
  CHECK(with_ortho.epoch_loss == again.epoch_loss);
  for (double loss : with_ortho.epoch_loss) CHECK(std::isfinite(loss));

  // with delta = 0 and projected noise, the kernels coincide with the plain
  // route fed pre-projected noise; spot-check that identity through the
  // public forward functions on the training data
  rng::Sequence gen(99, 0);
  Eigen::VectorXd z(4);
  for (int d = 0; d < 4; ++d) z[d] = gen.normal();
  const Eigen::VectorXd x0 = data.data.row(0).transpose();
  const Eigen::VectorXd z_perp = project_ortho(z, flat.direction);
  CHECK((forward_ortho(x0, 7, cfg.schedule, flat, z) -
         forward_plain(x0, 7, cfg.schedule, z_perp))
            .norm() <= 1e-14);
}

TEST_CASE("train rejects contract violations") {
  TrainConfig cfg;
  cfg.schedule = make_schedule(ScheduleKind::OTGeodesic, 10);
  cfg.ambient = {4, 2};
  const SampleBatch data = embed(swiss_roll(16, 0.01, 2), 4);
  CHECK_THROWS_WITH_AS(train(cfg, data), "schedule not trainable: ot-geodesic",
                       std::invalid_argument);

  cfg.schedule = make_schedule(ScheduleKind::UniformRadialVP, 10);
  cfg.conditional = true;
  cfg.ortho = axis_ortho_config(cfg.ambient, 0.1, 2);
  SampleBatch unlabeled = data;
  unlabeled.labels.clear();
  CHECK_THROWS_AS(train(cfg, unlabeled), std::invalid_argument);

  cfg.conditional = false;
  SampleBatch narrow = swiss_roll(16, 0.01, 2);
  CHECK_THROWS_AS(train(cfg, narrow), std::invalid_argument);
}
