#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tudiff/dataset.hpp"
#include "tudiff/geometry.hpp"
#include "tudiff/schedule.hpp"

namespace tudiff {

// Orthogonal time-space configuration: a unit direction normal to the clean
// subspace, the step length delta (displacement per unit time, so the
// terminal shift is t_T * delta = delta), and optional per-class directions.
struct OrthoTimeConfig {
  Eigen::VectorXd direction;
  double delta = 0.0;
  std::vector<Eigen::VectorXd> class_directions;

  const Eigen::VectorXd& direction_for(std::optional<int> class_id) const;
};

/// Throws unless the direction(s) are unit, normal to the clean subspace,
/// and (for class directions) pairwise orthonormal.
void validate_ortho(const OrthoTimeConfig& o, const AmbientConfig& a);

/// delta = spacing * sqrt(D - d'), keeping the terminal shift commensurate
/// with the terminal shell radius. The default spacing is 0.05.
double scaled_delta(double spacing, const AmbientConfig& a);

/// Coordinate-axis configuration: direction e_{d'+1}, class directions
/// e_{d'+1}, e_{d'+2}, ... in label order.
OrthoTimeConfig axis_ortho_config(const AmbientConfig& a, double delta, int n_classes = 0);

/// Direction estimated from data: the least-variance unit direction of the
/// (already centered) clean batch.
OrthoTimeConfig data_ortho_config(const SampleBatch& clean, const AmbientConfig& a,
                                  double delta);

Eigen::VectorXd project_ortho(const Eigen::VectorXd& z, const Eigen::VectorXd& direction);
/// Row-wise projection of a batch.
Eigen::MatrixXd project_ortho_rows(const Eigen::MatrixXd& z, const Eigen::VectorXd& direction);

/// x_k = c_k x0 + sigma_k z.
Eigen::VectorXd forward_plain(const Eigen::VectorXd& x0, int k, const ScheduleSpec& s,
                              const Eigen::VectorXd& z);

/// x_k = c_k x0 + t_k delta dir + sigma_k (z - <z,dir> dir). Requires x0 on
/// the base hyperplane (<x0, dir> ~ 0).
Eigen::VectorXd forward_ortho(const Eigen::VectorXd& x0, int k, const ScheduleSpec& s,
                              const OrthoTimeConfig& o, const Eigen::VectorXd& z);

// Deterministic reverse updates. The signal coefficient is clamped below at
// kMinSignalCoeff inside the division so schedules with c_T = 0 do not blow
// up the terminal step.
inline constexpr double kMinSignalCoeff = 1e-6;

Eigen::VectorXd ddim_step_plain(const Eigen::VectorXd& x_k, const Eigen::VectorXd& eps_hat,
                                const ScheduleSpec& s, int k);
Eigen::VectorXd ddim_step_ortho(const Eigen::VectorXd& x_k, const Eigen::VectorXd& eps_hat,
                                const ScheduleSpec& s, const OrthoTimeConfig& o, int k);

/// Batched forms (row per trajectory, one shared step index).
Eigen::MatrixXd ddim_step_plain_rows(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& eps_hat,
                                     const ScheduleSpec& s, int k);
Eigen::MatrixXd ddim_step_ortho_rows(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& eps_hat,
                                     const ScheduleSpec& s, const Eigen::VectorXd& direction,
                                     double delta, int k);

/// Noise predictor over a batch: rows in, predicted noise rows out.
using Predictor = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct SampleOptions {
  long n = 1;
  std::uint64_t seed = 0;
  std::optional<int> class_id;
  bool project_eps = true;  // project model outputs off the time direction
  // Observer called with (k, states) at initialization (k = T) and after
  // every reverse step down to k = 0.
  std::function<void(int, const Eigen::MatrixXd&)> trajectory_sink;
};

/// Full reverse loop from the terminal level down to k = 1. Plain variant
/// (o == nullptr) starts from sigma_k0 * z; orthogonal variant starts from
/// sigma_k0 * z_ortho + t_k0 * delta * dir. k0 is T except for schedules
/// whose terminal step is exactly signal-free (c_T = 0), where the
/// reconstruction is singular and the chain starts one level in. Row i draws
/// its noise from stream 3000000+i of the seed, so trajectories are
/// independent of batch composition.
SampleBatch sample(const Predictor& predict, const ScheduleSpec& s, const OrthoTimeConfig* o,
                   const AmbientConfig& a, const SampleOptions& opts);

}  // namespace tudiff
