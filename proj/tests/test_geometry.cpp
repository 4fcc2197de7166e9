#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tudiff/geometry.hpp"
#include "tudiff/rng.hpp"

using namespace tudiff;
using doctest::Approx;

namespace {
const AmbientConfig kHighD{1024, 2};
const AmbientConfig kLine{3, 2};

// P(sqrt(1-2 sqrt(eps)) <= |z| <= sqrt(1+2 sqrt(eps)+2 eps)) for z ~ N(0,1).
double band_probability_1d(double eps) {
  auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  const double lo = std::sqrt(1.0 - 2.0 * std::sqrt(eps));
  const double hi = std::sqrt(1.0 + 2.0 * std::sqrt(eps) + 2.0 * eps);
  return 2.0 * (Phi(hi) - Phi(lo));
}
}  // namespace

TEST_CASE("separation constants at frozen values") {
  CHECK(rho_epsilon(0.01) == Approx(1.2349089035228469).epsilon(1e-14));
  CHECK(rho_epsilon(0.04) == Approx(1.570562532158661).epsilon(1e-9));
  CHECK(kappa_epsilon(0.01) == Approx(0.2101089107188102).epsilon(1e-9));
  CHECK(kappa_epsilon(0.04) == Approx(0.4419558368717659).epsilon(1e-9));
  CHECK(prop3_min_dt(0.01) == Approx(0.1907103644166163).epsilon(1e-12));
  // both collapse toward the degenerate limit
  CHECK(rho_epsilon(1e-20) == Approx(1.0).epsilon(1e-9));
  CHECK(kappa_epsilon(1e-20) == Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(prop3_min_dt(1e-20) == Approx(0.0).scale(1.0).epsilon(1e-9));
  for (double bad : {-0.1, 0.0, 0.25, 0.3}) {
    CHECK_THROWS_AS(rho_epsilon(bad), std::invalid_argument);
    CHECK_THROWS_AS(kappa_epsilon(bad), std::invalid_argument);
    CHECK_THROWS_AS(prop3_min_dt(bad), std::invalid_argument);
  }
}

TEST_CASE("shell radius closed form") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 2);
  CHECK(shell_radius(s, 0, kHighD) == 0.0);
  CHECK(shell_radius(s, 1, kHighD) == Approx(15.98436736314578).epsilon(1e-14));
  const auto ot = make_schedule(ScheduleKind::OTGeodesic, 2);
  CHECK(shell_radius(ot, 2, kLine) == Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(shell_radius(s, 3, kHighD), std::out_of_range);
  CHECK_THROWS_AS(shell_radius(s, 1, AmbientConfig{2, 2}), std::invalid_argument);
}

TEST_CASE("shell band bounds") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 2);
  const ShellBand band = shell_band(s, 1, kHighD, 0.01);
  CHECK(band.r_minus == Approx(14.296852800529212).epsilon(1e-12));
  CHECK(band.r_plus == Approx(17.655310815729074).epsilon(1e-12));
  CHECK(band.width == Approx(band.r_plus - band.r_minus).epsilon(1e-15));

  const ShellBand tight = shell_band(s, 1, kHighD, 1e-30);
  CHECK(tight.r_minus == Approx(tight.r).epsilon(1e-12));
  CHECK(tight.r_plus == Approx(tight.r).epsilon(1e-12));

  const ShellBand degenerate = shell_band(s, 0, kHighD, 0.01);
  CHECK(degenerate.r == 0.0);
  CHECK(degenerate.r_minus == 0.0);
  CHECK(degenerate.r_plus == 0.0);

  CHECK_THROWS_AS(shell_band(s, 1, kHighD, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(shell_band(s, 1, kHighD, 0.0), std::invalid_argument);
}

TEST_CASE("band strictly straddles the radius for positive sigma") {
  rng::Sequence gen(17, 0);
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 10);
  for (int i = 0; i < 500; ++i) {
    const double eps = 1e-4 + gen.uniform01() * 0.2499;
    const int k = 1 + static_cast<int>(gen.below(10));
    const ShellBand band = shell_band(s, k, kHighD, eps);
    CHECK(band.r_minus < band.r);
    CHECK(band.r < band.r_plus);
  }
}

TEST_CASE("shell width scales linearly with radius at fixed epsilon") {
  const auto s = make_schedule(ScheduleKind::LateExpansionVP, 10);
  const double ref = shell_band(s, 1, kHighD, 0.01).width / shell_band(s, 1, kHighD, 0.01).r;
  for (int k = 2; k <= 10; ++k) {
    const ShellBand band = shell_band(s, k, kHighD, 0.01);
    CHECK(band.width / band.r == Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("audit of the uniform-radial schedule at T=4") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 4);
  const auto rep = audit_disjointness(s, kHighD, 0.01);
  REQUIRE(rep.pairs.size() == 4);
  CHECK(rep.all_pass());
  const PairAudit& p = rep.pairs[3];
  CHECK(p.sigma_k == Approx(0.75).epsilon(1e-15));
  CHECK(p.delta_sigma == Approx(0.25).epsilon(1e-12));
  CHECK(p.required_gap == Approx(0.17618167764213516).epsilon(1e-12));
  CHECK(p.pass);
  // sigma_0 = 0 makes the first pair pass trivially
  CHECK(rep.pairs[0].required_gap == 0.0);
  CHECK(rep.pairs[0].pass);
}

TEST_CASE("conventional schedule mixes from early on through the terminal stage") {
  const auto s = make_schedule(ScheduleKind::ConventionalVP, 1000);
  const auto rep = audit_disjointness(s, kHighD, 0.01);
  REQUIRE(rep.first_fail.has_value());
  CHECK(*rep.first_fail == 3);
  CHECK(*rep.last_fail == 999);
  CHECK(!rep.pairs.back().pass);
}

TEST_CASE("late-expansion audit around the guaranteed spacing") {
  const auto fine = audit_disjointness(make_schedule(ScheduleKind::LateExpansionVP, 5),
                                       kHighD, 0.01);
  CHECK(fine.all_pass());
  const auto coarse = audit_disjointness(make_schedule(ScheduleKind::LateExpansionVP, 20),
                                         kHighD, 0.01);
  REQUIRE(coarse.first_fail.has_value());
  CHECK(*coarse.first_fail == 5);
  CHECK(*coarse.last_fail == 19);
}

TEST_CASE("the three exact disjointness formulations agree on random schedules") {
  rng::Sequence gen(23, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 2 + static_cast<int>(gen.below(30));
    Eigen::VectorXd sigma(T + 1);
    sigma[0] = 0.0;
    for (int k = 1; k <= T; ++k) sigma[k] = sigma[k - 1] + gen.uniform01() * 0.1;
    for (double eps : {0.01, 0.04, 0.1}) {
      const double rho = rho_epsilon(eps);
      const double kap = kappa_epsilon(eps);
      const double lo = std::sqrt(1.0 - 2.0 * std::sqrt(eps));
      const double hi = std::sqrt(1.0 + 2.0 * std::sqrt(eps) + 2.0 * eps);
      for (int k = 0; k < T; ++k) {
        const bool radius = sigma[k + 1] * lo > sigma[k] * hi;
        const bool ratio = sigma[k + 1] > rho * sigma[k];
        const bool gap = sigma[k + 1] - sigma[k] > (rho - 1.0) * sigma[k];
        CHECK(radius == ratio);
        CHECK(ratio == gap);
        // the radial-increment form follows from (but does not imply) them
        if (radius) CHECK(sigma[k + 1] - sigma[k] > kap * sigma[k]);
      }
    }
  }
}

TEST_CASE("audit pass equals the sigma-ratio criterion on a real schedule") {
  const auto s = make_schedule(ScheduleKind::ConventionalVP, 200);
  const auto rep = audit_disjointness(s, kHighD, 0.04);
  const double rho = rho_epsilon(0.04);
  for (const auto& p : rep.pairs) {
    CHECK(p.pass == (s.sigma[p.k + 1] > rho * s.sigma[p.k]));
  }
}

TEST_CASE("grids finer than ln(1+kappa) keep the late-expansion schedule disjoint") {
  for (double eps : {0.005, 0.01, 0.02, 0.04, 0.08, 0.15, 0.2}) {
    const double min_dt = prop3_min_dt(eps);
    const int T = std::max(1, static_cast<int>(std::floor(1.0 / min_dt)));
    if (1.0 / T <= min_dt) continue;
    const auto rep =
        audit_disjointness(make_schedule(ScheduleKind::LateExpansionVP, T), kHighD, eps);
    CHECK(rep.all_pass());
  }
}

TEST_CASE("monte-carlo coverage matches the single-coordinate closed form") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 4);
  const double cov = mc_shell_coverage(s, 2, kLine, 0.04, 100000, 3);
  CHECK(cov == Approx(band_probability_1d(0.04)).epsilon(0.05));
  CHECK(std::abs(cov - band_probability_1d(0.04)) < 0.01);
}

TEST_CASE("monte-carlo coverage is deterministic and partition independent") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 4);
  CHECK(mc_shell_coverage(s, 2, kLine, 0.04, 5000, 9) ==
        mc_shell_coverage(s, 2, kLine, 0.04, 5000, 9));
  const long whole = mc_shell_hits(s, 2, kLine, 0.04, 0, 5000, 9);
  const long split = mc_shell_hits(s, 2, kLine, 0.04, 0, 1234, 9) +
                     mc_shell_hits(s, 2, kLine, 0.04, 1234, 5000, 9);
  CHECK(whole == split);

  const double single = mc_shell_coverage(s, 2, kLine, 0.04, 1, 9);
  CHECK((single == 0.0 || single == 1.0));
  CHECK(mc_shell_coverage(s, 0, kLine, 0.04, 10, 9) == 1.0);
  CHECK_THROWS_AS(mc_shell_coverage(s, 2, kLine, 0.04, 0, 9), std::invalid_argument);
}

TEST_CASE("high-dimensional coverage clears the concentration floor") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 4);
  const double floor = 1.0 - 2.0 * std::exp(-2.0 * (kHighD.D - kHighD.d_prime) * 0.01);
  for (std::uint64_t seed : {1, 2, 3}) {
    CHECK(mc_shell_coverage(s, 2, kHighD, 0.01, 2000, seed) >= floor);
  }
}

TEST_CASE("audit csv layout") {
  const auto s = make_schedule(ScheduleKind::UniformRadialVP, 2);
  const auto rep = audit_disjointness(s, kHighD, 0.01);
  std::ostringstream out;
  write_audit_csv(rep, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,sigma_k,delta_sigma,required_gap,r_minus_next,r_plus_curr,pass");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}
