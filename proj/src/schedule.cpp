#include "tudiff/schedule.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tudiff/csv.hpp"

namespace tudiff {

std::string schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::ConventionalVP: return "conventional";
    case ScheduleKind::UniformRadialVP: return "uniform-radial";
    case ScheduleKind::LateExpansionVP: return "late-expansion";
    case ScheduleKind::OTGeodesic: return "ot-geodesic";
  }
  throw std::logic_error("unreachable schedule kind");
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "conventional") return ScheduleKind::ConventionalVP;
  if (name == "uniform-radial") return ScheduleKind::UniformRadialVP;
  if (name == "late-expansion") return ScheduleKind::LateExpansionVP;
  if (name == "ot-geodesic") return ScheduleKind::OTGeodesic;
  throw std::invalid_argument("unknown schedule kind: " + name);
}

std::pair<double, double> ScheduleSpec::coefficients(int k) const {
  if (k < 0 || k > T) {
    throw std::out_of_range("schedule step index " + std::to_string(k) +
                            " outside [0," + std::to_string(T) + "]");
  }
  return {c[k], sigma[k]};
}

namespace {

// For sigma-parameterized VP kinds, beta falls out of the ratio of
// consecutive cumulative signal powers. At sigma_T = 1 the ratio hits
// 0/alpha_bar_{T-1} and beta_T = 1.
void fill_vp_from_sigma(ScheduleSpec& s) {
  const int T = s.T;
  s.alpha_bar.resize(T + 1);
  s.c.resize(T + 1);
  s.beta = Eigen::VectorXd::Zero(T + 1);
  for (int k = 0; k <= T; ++k) {
    s.alpha_bar[k] = 1.0 - s.sigma[k] * s.sigma[k];
    s.c[k] = std::sqrt(s.alpha_bar[k]);
  }
  for (int k = 1; k <= T; ++k) {
    s.beta[k] = 1.0 - s.alpha_bar[k] / s.alpha_bar[k - 1];
  }
}

}  // namespace

ScheduleSpec make_schedule(ScheduleKind kind, int T, ConventionalParams params) {
  if (T < 1) throw std::invalid_argument("schedule needs T >= 1");

  ScheduleSpec s;
  s.kind = kind;
  s.conventional = params;
  s.T = T;
  s.grid.resize(T + 1);
  s.sigma.resize(T + 1);
  for (int k = 0; k <= T; ++k) s.grid[k] = static_cast<double>(k) / T;

  switch (kind) {
    case ScheduleKind::UniformRadialVP: {
      s.sigma = s.grid;
      fill_vp_from_sigma(s);
      break;
    }
    case ScheduleKind::LateExpansionVP: {
      const double denom = std::expm1(1.0);
      for (int k = 0; k <= T; ++k) s.sigma[k] = std::expm1(s.grid[k]) / denom;
      s.sigma[T] = 1.0;  // exact endpoint; keeps c_T = 0 and alpha_bar_T = 0 exact
      fill_vp_from_sigma(s);
      break;
    }
    case ScheduleKind::ConventionalVP: {
      if (!(params.beta_min > 0.0) || !(params.beta_min <= params.beta_max) ||
          !(params.beta_max < 1.0)) {
        throw std::invalid_argument("conventional schedule needs 0 < beta_min <= beta_max < 1");
      }
      s.beta = Eigen::VectorXd::Zero(T + 1);
      if (T == 1) {
        s.beta[1] = params.beta_min;
      } else {
        for (int k = 1; k <= T; ++k) {
          const double f = static_cast<double>(k - 1) / (T - 1);
          s.beta[k] = params.beta_min + f * (params.beta_max - params.beta_min);
        }
      }
      s.alpha_bar.resize(T + 1);
      s.c.resize(T + 1);
      s.alpha_bar[0] = 1.0;
      for (int k = 1; k <= T; ++k) s.alpha_bar[k] = s.alpha_bar[k - 1] * (1.0 - s.beta[k]);
      for (int k = 0; k <= T; ++k) {
        s.c[k] = std::sqrt(s.alpha_bar[k]);
        s.sigma[k] = std::sqrt(1.0 - s.alpha_bar[k]);
      }
      break;
    }
    case ScheduleKind::OTGeodesic: {
      s.sigma = s.grid;
      s.c = Eigen::VectorXd::Ones(T + 1) - s.grid;
      break;
    }
  }
  return s;
}

std::vector<ScheduleViolation> validate(const ScheduleSpec& s, double tol) {
  std::vector<ScheduleViolation> out;
  const int T = s.T;
  auto flag = [&](int k, const char* name, double excess) {
    out.push_back({k, name, excess});
  };

  if (std::abs(s.sigma[0]) > tol) flag(0, "sigma zero at origin", std::abs(s.sigma[0]));
  for (int k = 1; k <= T; ++k) {
    if (s.sigma[k] < s.sigma[k - 1] - tol) {
      flag(k, "sigma monotonicity", s.sigma[k - 1] - s.sigma[k]);
    }
  }

  if (s.variance_preserving()) {
    for (int k = 0; k <= T; ++k) {
      const double vp = s.c[k] * s.c[k] + s.sigma[k] * s.sigma[k] - 1.0;
      if (std::abs(vp) > tol) flag(k, "variance preservation", std::abs(vp));
    }
    double prod = 1.0;
    for (int k = 0; k <= T; ++k) {
      if (k > 0) prod *= 1.0 - s.beta[k];
      if (std::abs(s.alpha_bar[k] - prod) > tol) {
        flag(k, "alpha_bar cumulative product", std::abs(s.alpha_bar[k] - prod));
      }
      if (std::abs(s.c[k] - std::sqrt(std::max(0.0, s.alpha_bar[k]))) > tol) {
        flag(k, "c equals sqrt(alpha_bar)", 0.0);
      }
      if (std::abs(s.sigma[k] - std::sqrt(std::max(0.0, 1.0 - s.alpha_bar[k]))) > tol) {
        flag(k, "sigma equals sqrt(1 - alpha_bar)", 0.0);
      }
    }
  } else {
    for (int k = 0; k <= T; ++k) {
      if (std::abs(s.c[k] - (1.0 - s.grid[k])) > tol) flag(k, "ot signal coefficient", 0.0);
      if (std::abs(s.sigma[k] - s.grid[k]) > tol) flag(k, "ot noise coefficient", 0.0);
    }
  }
  return out;
}

void write_schedule_csv(const ScheduleSpec& s, std::ostream& out) {
  out << "k,t,c,sigma,beta,alpha_bar\n";
  const bool vp = s.variance_preserving();
  for (int k = 0; k <= s.T; ++k) {
    out << k << ',' << csv::g17(s.grid[k]) << ',' << csv::g17(s.c[k]) << ','
        << csv::g17(s.sigma[k]) << ',';
    if (vp && k > 0) out << csv::g17(s.beta[k]);
    out << ',';
    if (vp) out << csv::g17(s.alpha_bar[k]);
    out << '\n';
  }
}

}  // namespace tudiff
