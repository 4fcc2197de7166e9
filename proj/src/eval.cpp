#include "tudiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tudiff/csv.hpp"
#include "tudiff/rng.hpp"

namespace tudiff {

namespace {

std::vector<double> manifold_distances(const SampleBatch& samples, int d_prime) {
  if (d_prime >= samples.dim()) {
    throw std::invalid_argument("manifold distance needs d_prime < D");
  }
  std::vector<double> out(samples.n());
  for (long i = 0; i < samples.n(); ++i) {
    out[i] = samples.data.row(i).tail(samples.dim() - d_prime).norm();
  }
  return out;
}

// Exact W1 between two 1-D empirical distributions with equal per-sample
// mass: integrate |Fa^-1(u) - Fb^-1(u)| over the merged quantile grid.
double wasserstein1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const long na = static_cast<long>(a.size());
  const long nb = static_cast<long>(b.size());
  double cost = 0.0;
  long ia = 0, ib = 0;
  double u = 0.0;
  while (ia < na && ib < nb) {
    const double ua = static_cast<double>(ia + 1) / na;
    const double ub = static_cast<double>(ib + 1) / nb;
    const double next = std::min(ua, ub);
    cost += (next - u) * std::abs(a[ia] - b[ib]);
    u = next;
    if (ua <= ub) ++ia;
    if (ub <= ua) ++ib;
  }
  return cost;
}

}  // namespace

double mean_manifold_distance(const SampleBatch& samples, int d_prime) {
  const auto d = manifold_distances(samples, d_prime);
  double sum = 0.0;
  for (double v : d) sum += v;
  return sum / static_cast<double>(d.size());
}

double median_manifold_distance(const SampleBatch& samples, int d_prime) {
  auto d = manifold_distances(samples, d_prime);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

double sliced_distance(const SampleBatch& a, const SampleBatch& b, int d_prime,
                       int n_projections, std::uint64_t seed) {
  if (a.dim() != b.dim()) throw std::invalid_argument("sliced_distance: dimension mismatch");
  if (a.n() == 0 || b.n() == 0) throw std::invalid_argument("sliced_distance: empty batch");
  if (d_prime < 1 || d_prime > a.dim()) {
    throw std::invalid_argument("sliced_distance: bad d_prime");
  }
  if (n_projections < 1) throw std::invalid_argument("sliced_distance: n_projections >= 1");

  double total = 0.0;
  std::vector<double> pa(a.n()), pb(b.n());
  for (int p = 0; p < n_projections; ++p) {
    const std::uint64_t key = rng::stream_key(seed, 5000000 + static_cast<std::uint64_t>(p));
    Eigen::VectorXd dir(d_prime);
    do {
      for (int d = 0; d < d_prime; ++d) dir[d] = rng::normal_at(key, d);
    } while (dir.norm() == 0.0);
    dir.normalize();

    for (long i = 0; i < a.n(); ++i) pa[i] = a.data.row(i).head(d_prime).dot(dir);
    for (long i = 0; i < b.n(); ++i) pb[i] = b.data.row(i).head(d_prime).dot(dir);
    total += wasserstein1(pa, pb);
  }
  return total / n_projections;
}

EvalReport evaluate(const SampleBatch& generated, const SampleBatch& reference,
                    const EvalSettings& settings) {
  if (generated.dim() != reference.dim()) {
    throw std::invalid_argument("evaluate: dimension mismatch");
  }
  EvalReport r;
  r.settings = settings;
  r.n_generated = generated.n();
  r.n_reference = reference.n();
  r.mean_manifold_distance = mean_manifold_distance(generated, settings.d_prime);
  r.median_manifold_distance = median_manifold_distance(generated, settings.d_prime);
  r.sliced_distance = sliced_distance(generated, reference, settings.d_prime,
                                      settings.n_projections, settings.seed);
  return r;
}

std::string compare_schedules(const EvalReport& a, const EvalReport& b) {
  if (!(a.settings == b.settings) || a.n_reference != b.n_reference) {
    throw std::invalid_argument("compare_schedules: reports from different settings");
  }
  std::ostringstream out;
  out << "metric,a,b,delta,closer\n";
  auto row = [&](const char* name, double va, double vb) {
    const char* closer = va < vb ? "a" : (vb < va ? "b" : "tie");
    out << name << ',' << csv::g17(va) << ',' << csv::g17(vb) << ',' << csv::g17(va - vb)
        << ',' << closer << '\n';
  };
  row("mean_manifold_distance", a.mean_manifold_distance, b.mean_manifold_distance);
  row("median_manifold_distance", a.median_manifold_distance, b.median_manifold_distance);
  row("sliced_distance", a.sliced_distance, b.sliced_distance);
  if (!a.shell_coverage_by_step.empty() &&
      a.shell_coverage_by_step.size() == b.shell_coverage_by_step.size()) {
    for (std::size_t i = 0; i < a.shell_coverage_by_step.size(); ++i) {
      row(("shell_coverage_" + std::to_string(i)).c_str(), a.shell_coverage_by_step[i],
          b.shell_coverage_by_step[i]);
    }
  }
  return out.str();
}

void write_report_kv(const EvalReport& r, std::ostream& out) {
  out << "mean_manifold_distance = " << csv::g17(r.mean_manifold_distance) << '\n'
      << "median_manifold_distance = " << csv::g17(r.median_manifold_distance) << '\n'
      << "sliced_distance = " << csv::g17(r.sliced_distance) << '\n'
      << "n_generated = " << r.n_generated << '\n'
      << "n_reference = " << r.n_reference << '\n'
      << "d_prime = " << r.settings.d_prime << '\n'
      << "n_projections = " << r.settings.n_projections << '\n'
      << "seed = " << r.settings.seed << '\n';
  if (!r.shell_coverage_by_step.empty()) {
    out << "shell_coverage_by_step =";
    for (double v : r.shell_coverage_by_step) out << ' ' << csv::g17(v);
    out << '\n';
  }
}

std::string report_csv_header() {
  return "mean_manifold_distance,median_manifold_distance,sliced_distance,"
         "n_generated,n_reference,d_prime,n_projections,seed";
}

std::string report_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out << csv::g17(r.mean_manifold_distance) << ',' << csv::g17(r.median_manifold_distance)
      << ',' << csv::g17(r.sliced_distance) << ',' << r.n_generated << ',' << r.n_reference
      << ',' << r.settings.d_prime << ',' << r.settings.n_projections << ',' << r.settings.seed;
  return out.str();
}

}  // namespace tudiff
