#include "tudiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tudiff/rng.hpp"

namespace tudiff {

long DenoiserModel::parameter_count() const {
  long count = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    count += weights[l].size() + biases[l].size();
  }
  return count;
}

DenoiserModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("init_model needs at least input and output widths");
  }
  for (int w : layer_sizes) {
    if (w < 1) throw std::invalid_argument("init_model: layer widths must be >= 1");
  }

  DenoiserModel m;
  m.layer_sizes = layer_sizes;
  const std::size_t n_layers = layer_sizes.size() - 1;
  m.weights.resize(n_layers);
  m.biases.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
    const std::uint64_t key = rng::stream_key(seed, 100 + static_cast<std::uint64_t>(l));
    m.weights[l].resize(fan_in, fan_out);
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) {
        m.weights[l](r, c) =
            std_dev * rng::normal_at(key, static_cast<std::uint64_t>(r) * fan_out + c);
      }
    }
    m.biases[l] = Eigen::VectorXd::Zero(fan_out);
  }
  return m;
}

namespace {

void check_width(const DenoiserModel& m, long cols) {
  if (cols != m.input_dim()) {
    throw std::invalid_argument("model input width " + std::to_string(m.input_dim()) +
                                " but got " + std::to_string(cols) + " columns");
  }
}

// Forward pass keeping every post-activation; activations[0] is the input,
// activations.back() is the linear output.
std::vector<Eigen::MatrixXd> forward_all(const DenoiserModel& m, const Eigen::MatrixXd& x) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(m.weights.size() + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd z = acts.back() * m.weights[l];
    z.rowwise() += m.biases[l].transpose();
    if (l + 1 < m.weights.size()) z = z.array().tanh();
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

Eigen::MatrixXd predict(const DenoiserModel& m, const Eigen::MatrixXd& x) {
  check_width(m, x.cols());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    a = (a * m.weights[l]).rowwise() + m.biases[l].transpose();
    if (l + 1 < m.weights.size()) a = a.array().tanh();
  }
  return a;
}

std::pair<double, ModelGrad> loss_and_grad(const DenoiserModel& m, const Eigen::MatrixXd& x,
                                           const Eigen::MatrixXd& target) {
  check_width(m, x.cols());
  if (x.rows() != target.rows() || target.cols() != m.output_dim()) {
    throw std::invalid_argument("loss_and_grad: target shape mismatch");
  }
  const long n = x.rows();
  const std::size_t n_layers = m.weights.size();

  const auto acts = forward_all(m, x);
  const Eigen::MatrixXd residual = acts.back() - target;
  const double loss = residual.squaredNorm() / static_cast<double>(n);

  ModelGrad grad;
  grad.weights.resize(n_layers);
  grad.biases.resize(n_layers);

  Eigen::MatrixXd delta = (2.0 / static_cast<double>(n)) * residual;
  for (std::size_t l = n_layers; l-- > 0;) {
    grad.weights[l] = acts[l].transpose() * delta;
    grad.biases[l] = delta.colwise().sum();
    if (l > 0) {
      // acts[l] is a tanh output for every hidden layer
      delta = (delta * m.weights[l].transpose()).array() *
              (1.0 - acts[l].array().square());
    }
  }
  return {loss, std::move(grad)};
}

AdamState AdamState::zeros_like(const DenoiserModel& m) {
  AdamState s;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    s.m_b.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
    s.v_b.push_back(Eigen::VectorXd::Zero(m.biases[l].size()));
  }
  return s;
}

void adam_step(DenoiserModel& m, const ModelGrad& g, AdamState& state, const AdamConfig& cfg) {
  if (g.weights.size() != m.weights.size()) {
    throw std::invalid_argument("adam_step: gradient/model layer mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    state.m_w[l] = cfg.beta1 * state.m_w[l] + (1.0 - cfg.beta1) * g.weights[l];
    state.v_w[l] = cfg.beta2 * state.v_w[l].array().matrix() +
                   (1.0 - cfg.beta2) * g.weights[l].array().square().matrix();
    m.weights[l].array() -= cfg.learning_rate * (state.m_w[l].array() / bc1) /
                            ((state.v_w[l].array() / bc2).sqrt() + cfg.epsilon);

    state.m_b[l] = cfg.beta1 * state.m_b[l] + (1.0 - cfg.beta1) * g.biases[l];
    state.v_b[l] = cfg.beta2 * state.v_b[l].array().matrix() +
                   (1.0 - cfg.beta2) * g.biases[l].array().square().matrix();
    m.biases[l].array() -= cfg.learning_rate * (state.m_b[l].array() / bc1) /
                           ((state.v_b[l].array() / bc2).sqrt() + cfg.epsilon);
  }
}

TrainResult train(const TrainConfig& cfg, const SampleBatch& data) {
  if (cfg.schedule.kind == ScheduleKind::OTGeodesic) {
    throw std::invalid_argument("schedule not trainable: ot-geodesic");
  }
  validate_ambient(cfg.ambient);
  if (data.dim() != cfg.ambient.D) {
    throw std::invalid_argument("train: data not embedded to ambient dimension");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1) {
    throw std::invalid_argument("train: epochs and batch_size must be >= 1");
  }
  int n_classes = 0;
  if (cfg.conditional) {
    if (!data.has_labels()) {
      throw std::invalid_argument("train: conditional mode needs labels");
    }
    if (!cfg.ortho.has_value() || cfg.ortho->class_directions.empty()) {
      throw std::invalid_argument("train: conditional mode needs class directions");
    }
    n_classes = static_cast<int>(cfg.ortho->class_directions.size());
    for (int label : data.labels) {
      if (label < 0 || label >= n_classes) {
        throw std::invalid_argument("train: label outside configured class directions");
      }
    }
  }
  if (cfg.ortho.has_value()) validate_ortho(*cfg.ortho, cfg.ambient);

  const long n = data.n();
  const long batch = std::min<long>(cfg.batch_size, n);
  const long steps_per_epoch = std::max<long>(1, n / batch);
  const int T = cfg.schedule.T;
  const int D = cfg.ambient.D;

  std::vector<int> arch;
  arch.push_back(D);
  arch.insert(arch.end(), cfg.hidden.begin(), cfg.hidden.end());
  arch.push_back(D);

  TrainResult result;
  result.model = init_model(arch, cfg.seed);
  AdamState state = AdamState::zeros_like(result.model);

  // Stream layout: 1000 + epoch for the per-epoch permutation,
  // 2000000 + step ordinal for the per-step timestep/noise draws.
  std::vector<long> perm(n);
  Eigen::MatrixXd x_t(batch, D), target(batch, D);
  std::vector<int> ks(batch);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), 0L);
    rng::Sequence shuffle(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
    for (long i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[shuffle.below(static_cast<std::uint64_t>(i + 1))]);
    }

    double epoch_loss = 0.0;
    for (long step = 0; step < steps_per_epoch; ++step) {
      const std::uint64_t step_ordinal =
          static_cast<std::uint64_t>(epoch) * steps_per_epoch + step;
      rng::Sequence draws(cfg.seed, 2000000 + step_ordinal);

      for (long b = 0; b < batch; ++b) {
        const long row = perm[step * batch + b];
        const int k = 1 + static_cast<int>(draws.below(static_cast<std::uint64_t>(T)));
        ks[b] = k;
        Eigen::VectorXd z(D);
        for (int d = 0; d < D; ++d) z[d] = draws.normal();

        const double c = cfg.schedule.c[k];
        const double sigma = cfg.schedule.sigma[k];
        if (cfg.ortho.has_value()) {
          const Eigen::VectorXd& dir =
              cfg.conditional ? cfg.ortho->class_directions[data.labels[row]]
                              : cfg.ortho->direction;
          const Eigen::VectorXd z_ortho = z - z.dot(dir) * dir;
          x_t.row(b) = c * data.data.row(row) +
                       (cfg.schedule.grid[k] * cfg.ortho->delta) * dir.transpose() +
                       sigma * z_ortho.transpose();
          target.row(b) = z_ortho.transpose();
        } else {
          x_t.row(b) = c * data.data.row(row) + sigma * z.transpose();
          target.row(b) = z.transpose();
        }
      }

      auto [loss, grad] = loss_and_grad(result.model, x_t, target);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) +
                               " step " + std::to_string(step));
      }
      adam_step(result.model, grad, state, cfg.adam);
      epoch_loss += loss;
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(steps_per_epoch));
  }
  return result;
}

}  // namespace tudiff
