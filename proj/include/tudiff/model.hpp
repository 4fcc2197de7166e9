#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tudiff/dataset.hpp"
#include "tudiff/diffusion.hpp"
#include "tudiff/geometry.hpp"
#include "tudiff/schedule.hpp"

namespace tudiff {

// Fully connected noise predictor. tanh at hidden layers, linear output,
// no timestep input anywhere: the signature is x -> eps_hat.
struct DenoiserModel {
  std::vector<int> layer_sizes;         // [D, hidden..., D]
  std::vector<Eigen::MatrixXd> weights; // per layer, (fan_in x fan_out)
  std::vector<Eigen::VectorXd> biases;  // per layer, fan_out

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  long parameter_count() const;
};

/// Gaussian fan-in initialization (std 1/sqrt(fan_in)), zero biases.
DenoiserModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Batched forward pass; rows are independent samples.
Eigen::MatrixXd predict(const DenoiserModel& m, const Eigen::MatrixXd& x);

struct ModelGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean over rows of the squared Euclidean error, and its exact gradient.
std::pair<double, ModelGrad> loss_and_grad(const DenoiserModel& m, const Eigen::MatrixXd& x,
                                           const Eigen::MatrixXd& target);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;

  static AdamState zeros_like(const DenoiserModel& m);
};

/// Standard bias-corrected Adam update, in place.
void adam_step(DenoiserModel& m, const ModelGrad& g, AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
  ScheduleSpec schedule;
  std::optional<OrthoTimeConfig> ortho;
  AmbientConfig ambient;
  std::vector<int> hidden = {256, 256, 256};
  int epochs = 200;
  long batch_size = 2048;
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool conditional = false;  // per-class time directions, selected by label
};

struct TrainResult {
  DenoiserModel model;
  std::vector<double> epoch_loss;  // mean step loss per epoch
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

/// Noise-prediction training loop. Per minibatch element: timestep uniform
/// on {1..T}, fresh Gaussian noise, forward corruption (plain or orthogonal),
/// regression target z (plain) or z_ortho, one Adam step on the batch.
/// Throws std::invalid_argument for the OT schedule or missing labels in
/// conditional mode; TrainingDiverged on non-finite loss.
TrainResult train(const TrainConfig& cfg, const SampleBatch& data);

}  // namespace tudiff
