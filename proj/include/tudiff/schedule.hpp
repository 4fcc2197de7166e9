#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tudiff {

enum class ScheduleKind {
  ConventionalVP,    // linear beta_k between configured endpoints
  UniformRadialVP,   // sigma_t = t
  LateExpansionVP,   // sigma_t = (e^t - 1)/(e - 1)
  OTGeodesic,        // c_t = 1 - t, sigma_t = t (analysis only, not trainable)
};

std::string schedule_kind_name(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& name);

struct ConventionalParams {
  double beta_min = 1e-4;
  double beta_max = 0.02;
};

// A forward-process schedule discretized on the uniform grid t_k = k/T,
// k = 0..T, with k=0 the clean end and k=T the terminal noise level.
// All vectors have T+1 entries except that the OT kind leaves beta and
// alpha_bar empty (they are variance-preserving notions). beta[0] is 0
// by convention; the meaningful increments are beta[1..T].
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::UniformRadialVP;
  ConventionalParams conventional;  // used by ConventionalVP only
  int T = 0;
  Eigen::VectorXd grid;
  Eigen::VectorXd c;
  Eigen::VectorXd sigma;
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha_bar;

  bool variance_preserving() const { return kind != ScheduleKind::OTGeodesic; }

  /// (c_k, sigma_k) with bounds checking.
  std::pair<double, double> coefficients(int k) const;
};

/// Builds the schedule on the uniform grid. Throws std::invalid_argument on
/// T < 1 or invalid Conventional beta endpoints (requires 0 < min <= max < 1).
ScheduleSpec make_schedule(ScheduleKind kind, int T, ConventionalParams params = {});

struct ScheduleViolation {
  int k = 0;
  std::string invariant;
  double magnitude = 0.0;  // how far past tol the check landed
};

/// Empty result iff every type invariant holds within tol.
std::vector<ScheduleViolation> validate(const ScheduleSpec& s, double tol);

/// Columns k,t,c,sigma,beta,alpha_bar; cells left empty where undefined.
void write_schedule_csv(const ScheduleSpec& s, std::ostream& out);

}  // namespace tudiff
