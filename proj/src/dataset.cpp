#include "tudiff/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tudiff/csv.hpp"
#include "tudiff/rng.hpp"

namespace tudiff {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

// Stream layout inside a dataset seed. Draw order is part of the
// reproducibility contract.
constexpr std::uint64_t kStreamAngles = 0;      // swiss roll thetas / mixture components
constexpr std::uint64_t kStreamNoise = 1;       // jitter / component offsets

void center_columns(Eigen::MatrixXd& m) {
  const Eigen::RowVectorXd mean = m.colwise().mean();
  m.rowwise() -= mean;
}

}  // namespace

Eigen::Vector2d swiss_roll_point(double theta) {
  const double r = theta / (4.5 * kPi);
  return {r * std::cos(theta), r * std::sin(theta)};
}

SampleBatch swiss_roll(long n, double noise_scale, std::uint64_t seed,
                       std::vector<double>* thetas_out) {
  if (n < 1) throw std::invalid_argument("swiss_roll needs n >= 1");
  if (noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");

  const std::uint64_t theta_key = rng::stream_key(seed, kStreamAngles);
  const std::uint64_t noise_key = rng::stream_key(seed, kStreamNoise);

  SampleBatch b;
  b.d_prime = 2;
  b.data.resize(n, 2);
  if (thetas_out) thetas_out->resize(n);
  for (long i = 0; i < n; ++i) {
    const double theta = 1.5 * kPi + 3.0 * kPi * rng::uniform01_at(theta_key, i);
    if (thetas_out) (*thetas_out)[i] = theta;
    Eigen::Vector2d p = swiss_roll_point(theta);
    if (noise_scale > 0.0) {
      p.x() += noise_scale * rng::normal_at(noise_key, 2 * i);
      p.y() += noise_scale * rng::normal_at(noise_key, 2 * i + 1);
    }
    b.data.row(i) = p.transpose();
  }

  center_columns(b.data);
  const double max_radius = b.data.rowwise().norm().maxCoeff();
  if (max_radius > 0.0) b.data /= max_radius;
  return b;
}

SampleBatch gaussian_mixture(long n, const std::vector<Eigen::Vector2d>& centers, double scale,
                             std::uint64_t seed) {
  if (centers.empty()) throw std::invalid_argument("gaussian_mixture needs >= 1 center");
  if (n < 1) throw std::invalid_argument("gaussian_mixture needs n >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("gaussian_mixture needs scale > 0");

  const std::uint64_t comp_key = rng::stream_key(seed, kStreamAngles);
  const std::uint64_t noise_key = rng::stream_key(seed, kStreamNoise);
  const std::uint64_t n_comp = centers.size();

  SampleBatch b;
  b.d_prime = 2;
  b.data.resize(n, 2);
  b.labels.resize(n);
  for (long i = 0; i < n; ++i) {
    const int comp = static_cast<int>(rng::bounded(rng::bits_at(comp_key, i), n_comp));
    b.labels[i] = comp;
    b.data(i, 0) = centers[comp].x() + scale * rng::normal_at(noise_key, 2 * i);
    b.data(i, 1) = centers[comp].y() + scale * rng::normal_at(noise_key, 2 * i + 1);
  }
  center_columns(b.data);
  return b;
}

SampleBatch embed(const SampleBatch& b, int D_target) {
  if (D_target < b.dim()) {
    throw std::invalid_argument("embed target dimension smaller than batch dimension");
  }
  SampleBatch out;
  out.labels = b.labels;
  out.d_prime = b.d_prime;
  out.data = Eigen::MatrixXd::Zero(b.n(), D_target);
  out.data.leftCols(b.dim()) = b.data;
  return out;
}

double distance_to_M0(const Eigen::Ref<const Eigen::RowVectorXd>& x, int d_prime) {
  if (d_prime >= x.size()) {
    throw std::invalid_argument("distance_to_M0 needs d_prime < dimension");
  }
  return x.tail(x.size() - d_prime).norm();
}

void write_batch_csv(const SampleBatch& b, std::ostream& out) {
  const int D = b.dim();
  for (int d = 0; d < D; ++d) {
    if (d) out << ',';
    out << "dim_" << d;
  }
  if (b.has_labels()) out << ",label";
  out << '\n';
  for (long i = 0; i < b.n(); ++i) {
    for (int d = 0; d < D; ++d) {
      if (d) out << ',';
      out << csv::g17(b.data(i, d));
    }
    if (b.has_labels()) out << ',' << b.labels[i];
    out << '\n';
  }
}

SampleBatch read_batch_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("batch csv: missing header");
  const auto header = csv::split(line);
  bool labeled = !header.empty() && header.back() == "label";
  const int D = static_cast<int>(header.size()) - (labeled ? 1 : 0);
  if (D < 1) throw std::invalid_argument("batch csv: no data columns");
  for (int d = 0; d < D; ++d) {
    if (header[d] != "dim_" + std::to_string(d)) {
      throw std::invalid_argument("batch csv: unexpected column '" + header[d] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (static_cast<int>(fields.size()) != D + (labeled ? 1 : 0)) {
      throw std::invalid_argument("batch csv: row with wrong field count");
    }
    std::vector<double> row(D);
    for (int d = 0; d < D; ++d) row[d] = csv::parse_double(fields[d]);
    if (labeled) labels.push_back(static_cast<int>(csv::parse_long(fields[D])));
    rows.push_back(std::move(row));
  }

  SampleBatch b;
  b.d_prime = D;  // unknowable from the file alone; callers override as needed
  b.data.resize(static_cast<long>(rows.size()), D);
  for (long i = 0; i < b.n(); ++i) {
    for (int d = 0; d < D; ++d) b.data(i, d) = rows[i][d];
  }
  b.labels = std::move(labels);
  return b;
}

void write_batch_csv_file(const SampleBatch& b, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  write_batch_csv(b, f);
}

SampleBatch read_batch_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  return read_batch_csv(f);
}

}  // namespace tudiff
