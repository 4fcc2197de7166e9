#include "tudiff/diffusion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "tudiff/rng.hpp"

namespace tudiff {

namespace {

constexpr double kUnitTol = 1e-12;
constexpr double kOrthoTol = 1e-10;
constexpr double kHyperplaneTol = 1e-8;

void check_dims(long a, long b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void check_unit_normal(const Eigen::VectorXd& dir, const AmbientConfig& a, const char* what) {
  if (dir.size() != a.D) {
    throw std::invalid_argument(std::string(what) + ": direction size != D");
  }
  if (std::abs(dir.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument(std::string(what) + ": direction is not unit length");
  }
  if (a.d_prime > 0 && dir.head(a.d_prime).cwiseAbs().maxCoeff() > kUnitTol) {
    throw std::invalid_argument(std::string(what) +
                                ": direction has components inside the clean subspace");
  }
}

}  // namespace

const Eigen::VectorXd& OrthoTimeConfig::direction_for(std::optional<int> class_id) const {
  if (!class_id.has_value()) return direction;
  if (*class_id < 0 || *class_id >= static_cast<int>(class_directions.size())) {
    throw std::invalid_argument("class id " + std::to_string(*class_id) +
                                " outside configured class directions");
  }
  return class_directions[*class_id];
}

void validate_ortho(const OrthoTimeConfig& o, const AmbientConfig& a) {
  validate_ambient(a);
  if (!(o.delta >= 0.0)) throw std::invalid_argument("ortho delta must be >= 0");
  check_unit_normal(o.direction, a, "ortho");
  for (const auto& d : o.class_directions) check_unit_normal(d, a, "ortho class");
  for (std::size_t i = 0; i < o.class_directions.size(); ++i) {
    for (std::size_t j = i + 1; j < o.class_directions.size(); ++j) {
      if (std::abs(o.class_directions[i].dot(o.class_directions[j])) > kOrthoTol) {
        throw std::invalid_argument("class directions are not pairwise orthogonal");
      }
    }
  }
}

double scaled_delta(double spacing, const AmbientConfig& a) {
  validate_ambient(a);
  return spacing * std::sqrt(static_cast<double>(a.D - a.d_prime));
}

OrthoTimeConfig axis_ortho_config(const AmbientConfig& a, double delta, int n_classes) {
  validate_ambient(a);
  if (a.d_prime + n_classes > a.D || (n_classes == 0 && a.d_prime + 1 > a.D)) {
    throw std::invalid_argument("not enough normal coordinates for the requested directions");
  }
  OrthoTimeConfig o;
  o.delta = delta;
  o.direction = Eigen::VectorXd::Unit(a.D, a.d_prime);
  for (int c = 0; c < n_classes; ++c) {
    o.class_directions.push_back(Eigen::VectorXd::Unit(a.D, a.d_prime + c));
  }
  validate_ortho(o, a);
  return o;
}

OrthoTimeConfig data_ortho_config(const SampleBatch& clean, const AmbientConfig& a,
                                  double delta) {
  validate_ambient(a);
  check_dims(clean.dim(), a.D, "data_ortho_config");
  Eigen::MatrixXd centered = clean.data.rowwise() - clean.data.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / std::max<long>(1, clean.n() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  OrthoTimeConfig o;
  o.delta = delta;
  o.direction = es.eigenvectors().col(0);  // eigenvalues ascending
  // Zero-variance normal coordinates give an eigenvector that may carry
  // rounding dust in the clean block; clean it up before validation.
  o.direction.head(a.d_prime).setZero();
  const double norm = o.direction.norm();
  if (norm < 0.5) {
    throw std::invalid_argument(
        "least-variance direction is not normal to the clean subspace");
  }
  o.direction /= norm;
  validate_ortho(o, a);
  return o;
}

Eigen::VectorXd project_ortho(const Eigen::VectorXd& z, const Eigen::VectorXd& direction) {
  check_dims(z.size(), direction.size(), "project_ortho");
  return z - z.dot(direction) * direction;
}

Eigen::MatrixXd project_ortho_rows(const Eigen::MatrixXd& z, const Eigen::VectorXd& direction) {
  check_dims(z.cols(), direction.size(), "project_ortho");
  return z - (z * direction) * direction.transpose();
}

Eigen::VectorXd forward_plain(const Eigen::VectorXd& x0, int k, const ScheduleSpec& s,
                              const Eigen::VectorXd& z) {
  check_dims(x0.size(), z.size(), "forward_plain");
  const auto [c, sigma] = s.coefficients(k);
  return c * x0 + sigma * z;
}

Eigen::VectorXd forward_ortho(const Eigen::VectorXd& x0, int k, const ScheduleSpec& s,
                              const OrthoTimeConfig& o, const Eigen::VectorXd& z) {
  check_dims(x0.size(), o.direction.size(), "forward_ortho");
  check_dims(x0.size(), z.size(), "forward_ortho");
  if (std::abs(x0.dot(o.direction)) > kHyperplaneTol) {
    throw std::invalid_argument("forward_ortho: x0 is off the base hyperplane");
  }
  const auto [c, sigma] = s.coefficients(k);
  const double t = s.grid[k];
  return c * x0 + (t * o.delta) * o.direction + sigma * project_ortho(z, o.direction);
}

namespace {

void check_reverse_index(const ScheduleSpec& s, int k) {
  if (k < 1 || k > s.T) {
    throw std::out_of_range("reverse step index must lie in [1,T]");
  }
}

}  // namespace

Eigen::VectorXd ddim_step_plain(const Eigen::VectorXd& x_k, const Eigen::VectorXd& eps_hat,
                                const ScheduleSpec& s, int k) {
  check_reverse_index(s, k);
  check_dims(x_k.size(), eps_hat.size(), "ddim_step_plain");
  const double c_k = std::max(s.c[k], kMinSignalCoeff);
  const Eigen::VectorXd x0_hat = (x_k - s.sigma[k] * eps_hat) / c_k;
  return s.c[k - 1] * x0_hat + s.sigma[k - 1] * eps_hat;
}

Eigen::VectorXd ddim_step_ortho(const Eigen::VectorXd& x_k, const Eigen::VectorXd& eps_hat,
                                const ScheduleSpec& s, const OrthoTimeConfig& o, int k) {
  check_reverse_index(s, k);
  check_dims(x_k.size(), eps_hat.size(), "ddim_step_ortho");
  check_dims(x_k.size(), o.direction.size(), "ddim_step_ortho");
  const double c_k = std::max(s.c[k], kMinSignalCoeff);
  const Eigen::VectorXd shift = o.delta * o.direction;
  const Eigen::VectorXd x0_hat = (x_k - s.grid[k] * shift - s.sigma[k] * eps_hat) / c_k;
  return s.c[k - 1] * x0_hat + s.grid[k - 1] * shift + s.sigma[k - 1] * eps_hat;
}

Eigen::MatrixXd ddim_step_plain_rows(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& eps_hat,
                                     const ScheduleSpec& s, int k) {
  check_reverse_index(s, k);
  check_dims(x_k.cols(), eps_hat.cols(), "ddim_step_plain");
  const double c_k = std::max(s.c[k], kMinSignalCoeff);
  const Eigen::MatrixXd x0_hat = (x_k - s.sigma[k] * eps_hat) / c_k;
  return s.c[k - 1] * x0_hat + s.sigma[k - 1] * eps_hat;
}

Eigen::MatrixXd ddim_step_ortho_rows(const Eigen::MatrixXd& x_k, const Eigen::MatrixXd& eps_hat,
                                     const ScheduleSpec& s, const Eigen::VectorXd& direction,
                                     double delta, int k) {
  check_reverse_index(s, k);
  check_dims(x_k.cols(), eps_hat.cols(), "ddim_step_ortho");
  const double c_k = std::max(s.c[k], kMinSignalCoeff);
  const Eigen::RowVectorXd shift = (delta * direction).transpose();
  Eigen::MatrixXd x0_hat = (x_k - s.sigma[k] * eps_hat).rowwise() - s.grid[k] * shift;
  x0_hat /= c_k;
  Eigen::MatrixXd out = s.c[k - 1] * x0_hat + s.sigma[k - 1] * eps_hat;
  out.rowwise() += s.grid[k - 1] * shift;
  return out;
}

SampleBatch sample(const Predictor& predict, const ScheduleSpec& s, const OrthoTimeConfig* o,
                   const AmbientConfig& a, const SampleOptions& opts) {
  validate_ambient(a);
  if (opts.n < 0) throw std::invalid_argument("sample: n must be >= 0");
  if (opts.class_id.has_value() &&
      (o == nullptr || o->class_directions.empty())) {
    throw std::invalid_argument("sample: class id given without class directions");
  }

  const Eigen::VectorXd* dir = nullptr;
  double delta = 0.0;
  if (o != nullptr) {
    dir = &o->direction_for(opts.class_id);
    delta = o->delta;
  }

  // Schedules whose terminal step is exactly signal-free (c_T = 0) make the
  // noise-prediction reconstruction singular there, so the chain starts at
  // the largest level whose signal coefficient clears the clamp threshold.
  int k_start = s.T;
  while (k_start >= 1 && s.c[k_start] < kMinSignalCoeff) --k_start;

  Eigen::MatrixXd x(opts.n, a.D);
  for (long i = 0; i < opts.n; ++i) {
    const std::uint64_t key = rng::stream_key(opts.seed, 3000000 + static_cast<std::uint64_t>(i));
    for (int d = 0; d < a.D; ++d) x(i, d) = rng::normal_at(key, d);
  }
  if (o != nullptr) {
    x = project_ortho_rows(x, *dir);
    x *= s.sigma[k_start];
    x.rowwise() += (s.grid[k_start] * delta * (*dir)).transpose();
  } else {
    x *= s.sigma[k_start];
  }

  if (opts.trajectory_sink) opts.trajectory_sink(k_start, x);
  for (int k = k_start; k >= 1; --k) {
    Eigen::MatrixXd eps = predict(x);
    check_dims(eps.cols(), a.D, "sample predictor output");
    if (o != nullptr) {
      if (opts.project_eps) eps = project_ortho_rows(eps, *dir);
      x = ddim_step_ortho_rows(x, eps, s, *dir, delta, k);
    } else {
      x = ddim_step_plain_rows(x, eps, s, k);
    }
    if (opts.trajectory_sink) opts.trajectory_sink(k - 1, x);
  }

  SampleBatch out;
  out.data = std::move(x);
  out.d_prime = a.d_prime;
  if (opts.class_id.has_value()) out.labels.assign(opts.n, *opts.class_id);
  return out;
}

}  // namespace tudiff
