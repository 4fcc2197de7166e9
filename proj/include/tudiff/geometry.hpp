#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tudiff/schedule.hpp"

namespace tudiff {

struct AmbientConfig {
  int D = 2;        // ambient dimension
  int d_prime = 2;  // intrinsic dimension of the clean subspace
};

/// Throws unless 1 <= d' < D.
void validate_ambient(const AmbientConfig& a);

/// Radius sigma_k * sqrt(D - d') of the noisy shell at step k.
double shell_radius(const ScheduleSpec& s, int k, const AmbientConfig& a);

// High-probability radial band [r_minus, r_plus] around the shell at one
// step. Bounds are r*sqrt(1 - 2 sqrt(eps)) and r*sqrt(1 + 2 sqrt(eps) + 2 eps),
// so eps must stay below 0.25 for the lower radicand to be positive.
struct ShellBand {
  int k = 0;
  double r = 0.0;
  double r_minus = 0.0;
  double r_plus = 0.0;
  double epsilon = 0.0;
  double width = 0.0;
};

ShellBand shell_band(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon);

/// Minimum sigma_{k+1}/sigma_k ratio that keeps adjacent bands disjoint.
double rho_epsilon(double epsilon);

/// Radial-increment constant sqrt(1+2 sqrt(eps)+2 eps) - sqrt(1-2 sqrt(eps)).
double kappa_epsilon(double epsilon);

/// Smallest grid spacing for which the late-expansion schedule is
/// guaranteed band-disjoint at every adjacent pair: ln(1 + kappa_eps).
double prop3_min_dt(double epsilon);

struct PairAudit {
  int k = 0;                 // the pair (k, k+1)
  double sigma_k = 0.0;
  double delta_sigma = 0.0;
  double required_gap = 0.0;  // (rho_eps - 1) * sigma_k
  double r_minus_next = 0.0;
  double r_plus_curr = 0.0;
  bool pass = false;          // r_minus_next > r_plus_curr
  bool mixes() const { return !pass; }
};

struct DisjointnessReport {
  double epsilon = 0.0;
  std::vector<PairAudit> pairs;
  std::optional<int> first_fail;
  std::optional<int> last_fail;
  bool all_pass() const { return !first_fail.has_value(); }
};

/// Audits every adjacent pair (k, k+1), k = 0..T-1.
DisjointnessReport audit_disjointness(const ScheduleSpec& s, const AmbientConfig& a,
                                      double epsilon);

/// Hit count for sample indices [i0, i1): the partition-independent core of
/// mc_shell_coverage. Sample i depends only on (seed, k, i).
long mc_shell_hits(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon,
                   long i0, long i1, std::uint64_t seed);

/// Fraction of n noisy draws whose distance to the clean subspace lands in
/// the step-k band. k = 0 is degenerate and returns 1.
double mc_shell_coverage(const ScheduleSpec& s, int k, const AmbientConfig& a, double epsilon,
                         long n, std::uint64_t seed);

/// Columns k,sigma_k,delta_sigma,required_gap,r_minus_next,r_plus_curr,pass.
void write_audit_csv(const DisjointnessReport& rep, std::ostream& out);

}  // namespace tudiff
