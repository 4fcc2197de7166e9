#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tudiff/dataset.hpp"

namespace tudiff {

struct EvalSettings {
  int d_prime = 2;
  int n_projections = 128;
  std::uint64_t seed = 0;

  bool operator==(const EvalSettings&) const = default;
};

struct EvalReport {
  double mean_manifold_distance = 0.0;
  double median_manifold_distance = 0.0;
  double sliced_distance = 0.0;
  std::vector<double> shell_coverage_by_step;  // optional, often empty
  long n_generated = 0;
  long n_reference = 0;
  EvalSettings settings;
};

double mean_manifold_distance(const SampleBatch& samples, int d_prime);
double median_manifold_distance(const SampleBatch& samples, int d_prime);

/// Sliced 1-D Wasserstein distance between the two empirical distributions
/// restricted to the first d_prime coordinates: average over n_projections
/// random unit directions of the exact 1-D transport distance between the
/// projected samples. Deterministic in seed; batch sizes may differ.
double sliced_distance(const SampleBatch& a, const SampleBatch& b, int d_prime,
                       int n_projections, std::uint64_t seed);

EvalReport evaluate(const SampleBatch& generated, const SampleBatch& reference,
                    const EvalSettings& settings);

/// CSV-style delta summary of two reports taken under identical settings;
/// throws std::invalid_argument when the settings differ.
std::string compare_schedules(const EvalReport& a, const EvalReport& b);

void write_report_kv(const EvalReport& r, std::ostream& out);
std::string report_csv_header();
std::string report_csv_row(const EvalReport& r);

}  // namespace tudiff
