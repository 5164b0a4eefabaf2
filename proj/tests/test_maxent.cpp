#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "semsym/dist.hpp"
#include "semsym/estimate.hpp"
#include "semsym/maxent.hpp"

using semsym::ApskModel;
using semsym::Errc;
using semsym::MaxEntOptions;
using semsym::PayloadParams;
using semsym::TailModel;

namespace {

template <class E>
void expect_errc(E&& fn, Errc code) {
  try {
    fn();
    ADD_FAILURE() << "expected " << semsym::errc_name(code);
  } catch (const semsym::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Unit-variance t density through Boost's standard t.
double oracle_t_pdf(double nu, double y) {
  const double c = std::sqrt(nu / (nu - 2.0));
  return boost::math::pdf(boost::math::students_t_distribution<double>(nu), y * c) * c;
}

/// E[log2(1 + α y²/σ²)] under the unit-variance t(ν), Boost Gauss-Kronrod on
/// [0, 40] and a reciprocal substitution for the rest.
double oracle_expected_payload(double alpha, double noise_var, double nu) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double y) { return std::log2(1.0 + alpha * y * y / noise_var) * oracle_t_pdf(nu, y); };
  double body = 0.0;
  for (double a : {0.0, 2.0, 8.0}) body += GK::integrate(f, a, a == 8.0 ? 40.0 : (a == 0.0 ? 2.0 : 8.0), 20, 1e-14);
  const double tail = GK::integrate([&](double u) { return u <= 0.0 ? 0.0 : f(40.0 / u) * 40.0 / (u * u); }, 0.0, 1.0, 25, 1e-13);
  return 2.0 * (body + tail);
}

/// Payload parameters whose MaxEnt solution at Λ is the unit-variance t(2Λ-1).
PayloadParams unit_variance_params(double lagrange) { return {1.0, 2.0 * lagrange - 3.0}; }

double target_for(const PayloadParams& p, double lagrange) {
  return semsym::expected_payload(p, TailModel::student_t(semsym::lagrange_to_nu(lagrange)));
}

}  // namespace

TEST(Apsk, CountExamples) {
  EXPECT_EQ(semsym::apsk_count({1.0, std::numbers::pi}, 0.0), 1.0);
  EXPECT_NEAR(semsym::apsk_count({1.0, std::numbers::pi}, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(semsym::apsk_count({0.5, std::numbers::pi}, 2.0), 3.0, 1e-15);
}

TEST(Apsk, BitsExamples) {
  const ApskModel m{1.0, std::numbers::pi};
  EXPECT_EQ(semsym::apsk_bits(m, 0.0), 0.0);
  EXPECT_NEAR(semsym::apsk_bits(m, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(semsym::apsk_bits(m, std::sqrt(3.0)), 2.0, 1e-15);
}

TEST(Apsk, StrictlyIncreasingAndRejectsNegativeRadius) {
  const ApskModel m{0.7, 0.3};
  double prev = semsym::apsk_count(m, 0.0);
  for (double r = 0.01; r < 5.0; r += 0.01) {
    const double c = semsym::apsk_count(m, r);
    EXPECT_GT(c, prev);
    prev = c;
  }
  expect_errc([&] { (void)semsym::apsk_count(m, -0.1); }, Errc::negative_radius);
  expect_errc([&] { (void)semsym::apsk_bits(m, -1.0); }, Errc::negative_radius);
}

TEST(Payload, Examples) {
  EXPECT_NEAR(semsym::payload({1.0, 1.0}, 1.0), 1.0, 1e-15);
  EXPECT_EQ(semsym::payload({1.0, 1.0}, 0.0), 0.0);
  EXPECT_NEAR(semsym::payload({0.5, 0.25}, 1.0), std::log2(3.0), 1e-15);
  EXPECT_NEAR(semsym::payload({0.5, 0.25}, 1.0), 1.58496, 5e-6);
  EXPECT_EQ(semsym::payload({0.3, 2.0}, 1.7), semsym::payload({0.3, 2.0}, -1.7));
}

TEST(Payload, ParamsValidated) {
  expect_errc([] { PayloadParams{0.0, 1.0}.validate(); }, Errc::invalid_argument);
  expect_errc([] { PayloadParams{1.5, 1.0}.validate(); }, Errc::invalid_argument);
  expect_errc([] { PayloadParams{1.0, -1.0}.validate(); }, Errc::invalid_argument);
}

TEST(ExpectedPayload, SmallSnrExpansion) {
  const double v = semsym::expected_payload({1.0, 1e6}, TailModel::gaussian());
  EXPECT_NEAR(v, 1.4427e-6, 0.05 * 1.4427e-6);
}

TEST(ExpectedPayload, GaussianMonteCarlo) {
  const double v = semsym::expected_payload({1.0, 1.0}, TailModel::gaussian());
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.6);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  double s = 0.0;
  const std::size_t n = 10000000;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = n01(rng);
    s += std::log2(1.0 + y * y);
  }
  EXPECT_NEAR(v, s / static_cast<double>(n), 0.005 * v);
}

TEST(ExpectedPayload, MatchesQuadratureOracle) {
  for (double nu : {2.5, 3.0, 5.0, 10.0, 50.0}) {
    for (auto [a, s2] : {std::pair{1.0, 1.0}, {0.5, 0.25}, {0.2, 3.0}}) {
      EXPECT_NEAR(semsym::expected_payload({a, s2}, TailModel::student_t(nu)), oracle_expected_payload(a, s2, nu), 1e-9)
          << nu << " " << a << " " << s2;
    }
  }
}

TEST(ExpectedPayload, HeavyTailCarriesLessPayload) {
  EXPECT_LT(semsym::expected_payload({1.0, 1.0}, TailModel::student_t(3)),
            semsym::expected_payload({1.0, 1.0}, TailModel::gaussian()));
}

TEST(ExpectedPayload, IncreasingInNu) {
  double prev = 0.0;
  for (double nu : {2.5, 3.0, 5.0, 10.0, 50.0}) {
    const double v = semsym::expected_payload({1.0, 1.0}, TailModel::student_t(nu));
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, semsym::expected_payload({1.0, 1.0}, TailModel::gaussian()));
}

TEST(SolveMaxent, RoundTripLambdaTwo) {
  const PayloadParams p{1.0, 1.0};
  const double c = target_for(p, 2.0);
  const auto s = semsym::solve_maxent(p, c);
  EXPECT_NEAR(s.lagrange, 2.0, 1e-3);
  EXPECT_NEAR(s.payload_bits, c, 1e-6);
  EXPECT_FALSE(s.truncated);
}

TEST(SolveMaxent, RoundTripDensityPointwise) {
  // Wider grid than the default, so that truncation (not the solver) does not dominate.
  const PayloadParams p{1.0, 1.0};
  MaxEntOptions opt;
  opt.half_width = 400.0;
  opt.points = 80001;
  const auto s = semsym::solve_maxent(p, target_for(p, 2.0), opt);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double y = s.grid[i];
    const double closed = 2.0 / (std::numbers::pi * (1.0 + y * y) * (1.0 + y * y));
    worst = std::max(worst, std::abs(s.mass[i] / s.step - closed));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(SolveMaxent, EntropyMatchesContinuum) {
  const PayloadParams p = unit_variance_params(3.0);
  const auto s = semsym::solve_maxent(p, target_for(p, 3.0));
  EXPECT_NEAR(s.entropy_nats, semsym::differential_entropy(TailModel::student_t(5.0)), 1e-5);
  EXPECT_NEAR(s.variance(), 1.0, 1e-4);
}

TEST(SolveMaxent, StationarityAndSymmetry) {
  for (double lam : {2.0, 5.0, 50.0}) {
    const PayloadParams p = unit_variance_params(lam);
    const auto s = semsym::solve_maxent(p, target_for(p, lam));
    EXPECT_LT(semsym::stationarity_residual(p, s), 1e-8);
    const std::size_t n = s.mass.size();
    for (std::size_t i = 0; i < n / 2; ++i) ASSERT_EQ(s.mass[i], s.mass[n - 1 - i]);
    double total = 0.0;
    for (double m : s.mass) total += m;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SolveMaxent, FlatLimitNearGridMaximum) {
  const PayloadParams p{1.0, 1.0};
  const double flat = semsym::gibbs_solution(p, 0.0).payload_bits;
  MaxEntOptions opt;
  opt.allow_truncated = true;
  const auto s = semsym::solve_maxent(p, flat - 1e-3, opt);
  EXPECT_LT(s.lagrange, 0.01);
  EXPECT_TRUE(s.truncated);
  const auto [lo, hi] = std::minmax_element(s.mass.begin(), s.mass.end());
  EXPECT_LT(*hi / *lo, 1.1);
  expect_errc([&] { (void)semsym::solve_maxent(p, flat - 1e-3); }, Errc::grid_truncation);
}

TEST(SolveMaxent, GaussianLimitAtLargeLambda) {
  const PayloadParams p = unit_variance_params(50.0);
  const auto s = semsym::solve_maxent(p, target_for(p, 50.0));
  EXPECT_NEAR(s.lagrange, 50.0, 1e-2);
  EXPECT_LT(semsym::gaussian_nll_gap(s), 1e-3);
  EXPECT_GE(semsym::gaussian_nll_gap(s), 0.0);
}

TEST(SolveMaxent, Infeasible) {
  const PayloadParams p{1.0, 1.0};
  expect_errc([&] { (void)semsym::solve_maxent(p, 0.0); }, Errc::infeasible_constraint);
  expect_errc([&] { (void)semsym::solve_maxent(p, -1.0); }, Errc::infeasible_constraint);
  expect_errc([&] { (void)semsym::solve_maxent(p, 50.0); }, Errc::infeasible_constraint);
  MaxEntOptions even;
  even.points = 20000;
  expect_errc([&] { (void)semsym::solve_maxent(p, 1.0, even); }, Errc::invalid_argument);
  MaxEntOptions few;
  few.points = 101;
  expect_errc([&] { (void)semsym::solve_maxent(p, 1.0, few); }, Errc::invalid_argument);
}

TEST(Gibbs, PayloadDecreasesInLambda) {
  const PayloadParams p{0.8, 1.3};
  double prev = INFINITY;
  for (double lam : {0.0, 0.3, 0.9, 1.6, 2.0, 4.0, 10.0, 100.0}) {
    MaxEntOptions opt;
    opt.allow_truncated = true;
    const double v = semsym::gibbs_solution(p, lam, opt).payload_bits;
    EXPECT_LT(v, prev) << lam;
    prev = v;
  }
}

TEST(SolveMaxent, EntropyIncreasesWithPayload) {
  const PayloadParams p{1.0, 1.0};
  double prev = -INFINITY;
  for (double c : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double h = semsym::solve_maxent(p, c).entropy_nats;
    EXPECT_GT(h, prev) << c;
    prev = h;
  }
}

TEST(SolveMaxent, ClosedFormAgreementViaFit) {
  for (double lam : {2.0, 3.0, 5.0}) {
    const PayloadParams p{1.0, 1.0};
    const auto s = semsym::solve_maxent(p, semsym::gibbs_solution(p, lam).payload_bits);
    const auto fit = semsym::fit_nu(semsym::inverse_cdf_samples(s, 100000));
    const double nu = 2.0 * lam - 1.0;
    EXPECT_NEAR(fit.nu_hat, nu, 0.05 * nu) << "lambda=" << lam;
  }
}

TEST(Proposition, NoViolationsAtThreeSettings) {
  const std::tuple<double, double, double> settings[] = {
      {1.0, 1.0, target_for({1.0, 1.0}, 2.0)}, {0.5, 0.25, 0.45}, {0.9, 7.0, 0.2}};
  for (const auto& [a, s2, c] : settings) {
    const auto r = semsym::verify_proposition1({a, s2}, c, 20, 3);
    EXPECT_EQ(r.perturbations, 20u);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_LT(r.max_violation, 1e-9);
    EXPECT_GT(r.min_entropy_gap, 0.0);
    EXPECT_LT(r.max_payload_error, 1e-6);
    EXPECT_GT(r.mixture_entropy_gap, 0.0);
  }
}

TEST(Proposition, IdentityPerturbationHasZeroGap) {
  const auto r = semsym::verify_proposition1({1.0, 1.0}, 0.5, 1, 0);
  EXPECT_EQ(semsym::grid_entropy(r.solution.mass, r.solution.step) - r.solution.entropy_nats, 0.0);
}

TEST(Proposition, DeterministicPerSeed) {
  const auto a = semsym::verify_proposition1({1.0, 1.0}, 0.5, 5, 9);
  const auto b = semsym::verify_proposition1({1.0, 1.0}, 0.5, 5, 9);
  EXPECT_EQ(a.max_violation, b.max_violation);
}
