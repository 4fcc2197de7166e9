#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace tudiff {

// Row-per-sample batch. labels is empty for unlabeled data. d_prime
// records the intrinsic dimension of the generating manifold; after
// zero-padding it keeps pointing at the leading coordinates that carry
// the signal.
struct SampleBatch {
  Eigen::MatrixXd data;      // n x D
  std::vector<int> labels;   // empty or size n
  int d_prime = 0;

  long n() const { return data.rows(); }
  int dim() const { return static_cast<int>(data.cols()); }
  bool has_labels() const { return !labels.empty(); }
};

/// Point on the planar spiral at angle theta: radius theta/(4.5 pi).
Eigen::Vector2d swiss_roll_point(double theta);

/// n points on the spiral, theta uniform on [1.5 pi, 4.5 pi], plus isotropic
/// Gaussian jitter of scale noise_scale, then mean-centered and rescaled to
/// unit max radius. Deterministic in seed; thetas_out (optional) receives the
/// drawn angles in row order.
SampleBatch swiss_roll(long n, double noise_scale, std::uint64_t seed,
                       std::vector<double>* thetas_out = nullptr);

/// n points drawn uniformly over the mixture components (isotropic Gaussians
/// of the given scale), labeled by component, then mean-centered.
SampleBatch gaussian_mixture(long n, const std::vector<Eigen::Vector2d>& centers, double scale,
                             std::uint64_t seed);

/// Extends every row with zeros up to D_target columns; labels and d_prime
/// are preserved.
SampleBatch embed(const SampleBatch& b, int D_target);

/// Euclidean norm of the coordinates past d_prime.
double distance_to_M0(const Eigen::Ref<const Eigen::RowVectorXd>& x, int d_prime);

/// Header dim_0..dim_{D-1}[,label]; 17-significant-digit decimals.
void write_batch_csv(const SampleBatch& b, std::ostream& out);
SampleBatch read_batch_csv(std::istream& in);

void write_batch_csv_file(const SampleBatch& b, const std::string& path);
SampleBatch read_batch_csv_file(const std::string& path);

}  // namespace tudiff
