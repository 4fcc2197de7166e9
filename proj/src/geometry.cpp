#include "tudiff/geometry.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tudiff/csv.hpp"
#include "tudiff/rng.hpp"

namespace tudiff {

void validate_ambient(const AmbientConfig& a) {
  if (a.d_prime < 1 || a.d_prime >= a.D) {
    throw std::invalid_argument("ambient config needs 1 <= d_prime < D");
  }
}

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 0.25)) {
    throw std::invalid_argument("epsilon must lie in (0, 0.25)");
  }
}

double lower_factor(double epsilon) { return std::sqrt(1.0 - 2.0 * std::sqrt(epsilon)); }
double upper_factor(double epsilon) { return std::sqrt(1.0 + 2.0 * std::sqrt(epsilon) + 2.0 * epsilon); }

}  // namespace

double shell_radius(const ScheduleSpec& s, int k, const AmbientConfig& a) {
  validate_ambient(a);
  const auto [c, sigma] = s.coefficients(k);
  (void)c;
  return sigma * std::sqrt(static_cast<double>(a.D - a.d_prime));
}

ShellBand shell_band(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon) {
  check_epsilon(epsilon);
  ShellBand band;
  band.k = k;
  band.epsilon = epsilon;
  band.r = shell_radius(s, k, a);
  band.r_minus = band.r * lower_factor(epsilon);
  band.r_plus = band.r * upper_factor(epsilon);
  band.width = band.r_plus - band.r_minus;
  return band;
}

double rho_epsilon(double epsilon) {
  check_epsilon(epsilon);
  return upper_factor(epsilon) / lower_factor(epsilon);
}

double kappa_epsilon(double epsilon) {
  check_epsilon(epsilon);
  return upper_factor(epsilon) - lower_factor(epsilon);
}

double prop3_min_dt(double epsilon) { return std::log1p(kappa_epsilon(epsilon)); }

DisjointnessReport audit_disjointness(const ScheduleSpec& s, const AmbientConfig& a,
                                      double epsilon) {
  check_epsilon(epsilon);
  validate_ambient(a);

  DisjointnessReport rep;
  rep.epsilon = epsilon;
  rep.pairs.reserve(s.T);
  const double root = std::sqrt(static_cast<double>(a.D - a.d_prime));
  const double lo = lower_factor(epsilon);
  const double hi = upper_factor(epsilon);
  const double rho = hi / lo;

  for (int k = 0; k < s.T; ++k) {
    PairAudit p;
    p.k = k;
    p.sigma_k = s.sigma[k];
    p.delta_sigma = s.sigma[k + 1] - s.sigma[k];
    p.required_gap = (rho - 1.0) * s.sigma[k];
    p.r_minus_next = s.sigma[k + 1] * root * lo;
    p.r_plus_curr = s.sigma[k] * root * hi;
    p.pass = p.r_minus_next > p.r_plus_curr;
    if (!p.pass) {
      if (!rep.first_fail) rep.first_fail = k;
      rep.last_fail = k;
    }
    rep.pairs.push_back(p);
  }
  return rep;
}

long mc_shell_hits(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon,
                   long i0, long i1, std::uint64_t seed) {
  check_epsilon(epsilon);
  validate_ambient(a);
  const auto [c, sigma] = s.coefficients(k);
  (void)c;
  const int normal_dims = a.D - a.d_prime;
  const double r = sigma * std::sqrt(static_cast<double>(normal_dims));
  const double r_minus = r * lower_factor(epsilon);
  const double r_plus = r * upper_factor(epsilon);

  // One stream per timestep (salted away from other modules); sample i owns
  // normal pair indices [i*normal_dims, (i+1)*normal_dims).
  const std::uint64_t key = rng::stream_key(seed, 4000000 + static_cast<std::uint64_t>(k));
  long hits = 0;
  for (long i = i0; i < i1; ++i) {
    double sumsq = 0.0;
    const std::uint64_t base = static_cast<std::uint64_t>(i) * normal_dims;
    for (int j = 0; j < normal_dims; ++j) {
      const double z = rng::normal_at(key, base + j);
      sumsq += z * z;
    }
    const double dist = sigma * std::sqrt(sumsq);
    if (dist >= r_minus && dist <= r_plus) ++hits;
  }
  return hits;
}

double mc_shell_coverage(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon,
                         long n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("coverage needs n >= 1");
  if (k == 0) return 1.0;  // zero radius, degenerate band
  return static_cast<double>(mc_shell_hits(s, k, a, epsilon, 0, n, seed)) /
         static_cast<double>(n);
}

void write_audit_csv(const DisjointnessReport& rep, std::ostream& out) {
  out << "k,sigma_k,delta_sigma,required_gap,r_minus_next,r_plus_curr,pass\n";
  for (const PairAudit& p : rep.pairs) {
    out << p.k << ',' << csv::g17(p.sigma_k) << ',' << csv::g17(p.delta_sigma) << ','
        << csv::g17(p.required_gap) << ',' << csv::g17(p.r_minus_next) << ','
        << csv::g17(p.r_plus_curr) << ',' << (p.pass ? 1 : 0) << '\n';
  }
}

}  // namespace tudiff
