#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "semsym/dist.hpp"

using semsym::Errc;
using semsym::TailModel;

namespace {

constexpr double kPi = std::numbers::pi;

/// Unit-variance t density through the textbook standard t (Boost).
double oracle_pdf(double nu, double y) {
  const double c = std::sqrt(nu / (nu - 2.0));
  return boost::math::pdf(boost::math::students_t_distribution<double>(nu), y * c) * c;
}

double oracle_cdf(double nu, double y) {
  const double c = std::sqrt(nu / (nu - 2.0));
  return boost::math::cdf(boost::math::students_t_distribution<double>(nu), y * c);
}

/// ∫_a^∞ f by y = a/u and tanh-sinh on (0, 1].
template <class F>
double tail_integral(F f, double a) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(
      [&](double u) {
        const double y = a / u;
        return y > 1e100 ? 0.0 : f(y) * a / (u * u);
      },
      0.0, 1.0);
}

/// ∫ f over the real line for even f: adaptive Gauss-Kronrod on [0, 50] plus the tail.
template <class F>
double whole_line(F f) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double core = 0.0;
  const double cuts[] = {0.0, 1.0, 5.0, 15.0, 50.0};
  for (int i = 0; i < 4; ++i) core += GK::integrate(f, cuts[i], cuts[i + 1], 20, 1e-13);
  return 2.0 * (core + tail_integral(f, 50.0));
}

template <class E>
void expect_errc(E&& fn, Errc code) {
  try {
    fn();
    ADD_FAILURE() << "expected " << semsym::errc_name(code);
  } catch (const semsym::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(TailModel, RejectsNuAtOrBelowTwo) {
  expect_errc([] { (void)TailModel::student_t(2.0); }, Errc::invalid_nu);
  expect_errc([] { (void)TailModel::student_t(1.5); }, Errc::invalid_nu);
  expect_errc([] { (void)TailModel::student_t(std::nan("")); }, Errc::invalid_nu);
  EXPECT_NO_THROW((void)TailModel::student_t(2.0001));
}

TEST(TailModel, LimitsAreDistinctKinds) {
  EXPECT_EQ(TailModel::gaussian().kind(), TailModel::Kind::gaussian);
  EXPECT_EQ(TailModel::cauchy().kind(), TailModel::Kind::cauchy);
  EXPECT_NE(TailModel::cauchy(), TailModel::gaussian());
}

TEST(TailModel, ParseRoundTrip) {
  for (const char* s : {"gaussian", "cauchy", "student_t:3", "student_t:2.5", "student_t:7.25"}) {
    EXPECT_EQ(TailModel::parse(s).to_string(), s);
  }
  expect_errc([] { (void)TailModel::parse("student_t:x"); }, Errc::invalid_argument);
  expect_errc([] { (void)TailModel::parse("laplace"); }, Errc::invalid_argument);
  expect_errc([] { (void)TailModel::parse("student_t:1.5"); }, Errc::invalid_nu);
}

TEST(Pdf, ClosedFormValuesAtOrigin) {
  EXPECT_NEAR(semsym::pdf(TailModel::gaussian(), 0.0), 0.3989422804, 1e-10);
  EXPECT_NEAR(semsym::pdf(TailModel::cauchy(), 0.0), 0.3183098862, 1e-10);
  EXPECT_NEAR(semsym::pdf(TailModel::student_t(3.0), 0.0), 2.0 / kPi, 1e-12);
  EXPECT_NEAR(semsym::pdf(TailModel::student_t(3.0), 0.0), 0.6366197724, 1e-10);
}

TEST(Pdf, MatchesBoostStudentT) {
  for (double nu : {2.1, 2.5, 3.0, 4.75, 10.0, 50.0, 300.0}) {
    for (double y : {-40.0, -3.0, -0.7, 0.0, 0.2, 1.0, 5.5, 100.0}) {
      const double want = oracle_pdf(nu, y);
      EXPECT_NEAR(semsym::pdf(TailModel::student_t(nu), y), want, 1e-12 * want) << nu << " " << y;
    }
  }
}

TEST(Pdf, CauchyAndGaussianShapes) {
  for (double y : {-3.0, 0.5, 7.0}) {
    EXPECT_NEAR(semsym::pdf(TailModel::cauchy(), y), 1.0 / (kPi * (1.0 + y * y)), 1e-15);
    EXPECT_NEAR(semsym::pdf(TailModel::gaussian(), y),
                boost::math::pdf(boost::math::normal_distribution<double>(), y), 1e-15);
  }
}

TEST(Pdf, EvenAndPositive) {
  for (const TailModel& m : {TailModel::gaussian(), TailModel::cauchy(), TailModel::student_t(3.3)}) {
    for (double y : {0.1, 1.0, 4.0, 20.0}) {
      EXPECT_EQ(semsym::pdf(m, y), semsym::pdf(m, -y));
      EXPECT_GT(semsym::pdf(m, y), 0.0);
    }
  }
}

TEST(Pdf, RejectsNonFiniteInput) {
  expect_errc([] { (void)semsym::pdf(TailModel::gaussian(), INFINITY); }, Errc::non_finite_input);
  expect_errc([] { (void)semsym::log_pdf(TailModel::student_t(3), std::nan("")); }, Errc::non_finite_input);
}

TEST(LogPdf, Examples) {
  EXPECT_NEAR(semsym::log_pdf(TailModel::gaussian(), 0.0), -0.9189385332, 1e-10);
  EXPECT_NEAR(semsym::log_pdf(TailModel::student_t(3.0), 0.0), -0.4515827053, 1e-10);
}

TEST(LogPdf, AgreesWithLogOfPdf) {
  for (double nu : {2.2, 3.0, 9.0, 120.0}) {
    const TailModel m = TailModel::student_t(nu);
    for (double y : {0.0, 0.3, 2.0, 15.0, 300.0}) {
      const double p = semsym::pdf(m, y);
      ASSERT_GT(p, 1e-300);
      EXPECT_NEAR(semsym::log_pdf(m, y), std::log(p), 1e-12 * std::abs(std::log(p)) + 1e-15);
    }
  }
}

TEST(LogPdf, FarTailMatchesAsymptoticExpansion) {
  const double nu = 3.0;
  const TailModel m = TailModel::student_t(nu);
  const double log_c = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5 * std::log(kPi * (nu - 2));
  for (double y : {1e100, 1e150}) {
    const double v = semsym::log_pdf(m, y);
    ASSERT_TRUE(std::isfinite(v));
    EXPECT_LT(v, 0.0);
    const double asym = log_c - (nu + 1) / 2 * (2 * std::log(y) - std::log(nu - 2));
    EXPECT_NEAR(v, asym, 1e-12 * std::abs(asym));
  }
}

TEST(Properties, NormalizationWithTailCorrection) {
  for (double nu : {2.1, 2.5, 3.0, 5.0, 10.0, 50.0}) {
    const TailModel m = TailModel::student_t(nu);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double core = 2.0 * GK::integrate([&](double y) { return semsym::pdf(m, y); }, 0.0, 50.0, 20, 1e-14);
    const double tail = 2.0 * (1.0 - oracle_cdf(nu, 50.0));  // analytic tail mass
    EXPECT_NEAR(core + tail, 1.0, 1e-8) << "nu=" << nu;
  }
  for (const TailModel& m : {TailModel::gaussian(), TailModel::cauchy()}) {
    EXPECT_NEAR(whole_line([&](double y) { return semsym::pdf(m, y); }), 1.0, 1e-8);
  }
}

TEST(Properties, UnitVariance) {
  for (double nu : {2.5, 3.0, 5.0, 10.0, 50.0}) {
    const TailModel m = TailModel::student_t(nu);
    const double v = whole_line([&](double y) { return y * y * semsym::pdf(m, y); });
    EXPECT_NEAR(v, 1.0, 1e-6) << "nu=" << nu;
  }
}

TEST(Properties, GaussianLimit) {
  double sup = 0.0;
  for (double y = -6.0; y <= 6.0; y += 0.01) {
    sup = std::max(sup, std::abs(semsym::pdf(TailModel::student_t(500), y) - semsym::pdf(TailModel::gaussian(), y)));
  }
  EXPECT_LT(sup, 1e-3);
}

TEST(Properties, TailOrdering) {
  const double y = 10.0;
  EXPECT_GT(semsym::pdf(TailModel::student_t(3), y), semsym::pdf(TailModel::student_t(10), y));
  EXPECT_GT(semsym::pdf(TailModel::student_t(10), y), semsym::pdf(TailModel::gaussian(), y));
}

TEST(Entropy, MatchesDigammaOracle) {
  for (double nu : {2.5, 3.0, 5.0, 10.0, 50.0}) {
    const double want = (nu + 1) / 2 * (boost::math::digamma((nu + 1) / 2) - boost::math::digamma(nu / 2)) +
                        0.5 * std::log(nu - 2) + std::log(boost::math::beta(nu / 2, 0.5));
    EXPECT_NEAR(semsym::differential_entropy(TailModel::student_t(nu)), want, 1e-12);
  }
  EXPECT_NEAR(semsym::differential_entropy(TailModel::gaussian()), 0.5 * std::log(2 * kPi * std::numbers::e), 1e-14);
  EXPECT_NEAR(semsym::differential_entropy(TailModel::cauchy()), std::log(4 * kPi), 1e-14);
}

TEST(Entropy, MatchesNumericIntegral) {
  const TailModel m = TailModel::student_t(4.0);
  const double h = whole_line([&](double y) { return -semsym::log_pdf(m, y) * semsym::pdf(m, y); });
  EXPECT_NEAR(semsym::differential_entropy(m), h, 1e-9);
}

TEST(Sample, GaussianVariance) {
  const auto b = semsym::sample(TailModel::gaussian(), 1000000, 11);
  double s2 = 0.0;
  for (double v : b.values()) s2 += v * v;
  const double var = s2 / static_cast<double>(b.size());
  EXPECT_GE(var, 0.995);
  EXPECT_LE(var, 1.005);
}

TEST(Sample, StudentT5Variance) {
  const auto b = semsym::sample(TailModel::student_t(5), 1000000, 12);
  double s2 = 0.0;
  for (double v : b.values()) s2 += v * v;
  const double var = s2 / static_cast<double>(b.size());
  EXPECT_GE(var, 0.98);
  EXPECT_LE(var, 1.02);
}

TEST(Sample, StudentT4Mean) {
  const auto b = semsym::sample(TailModel::student_t(4), 1000000, 13);
  double s = 0.0;
  for (double v : b.values()) s += v;
  EXPECT_NEAR(s / static_cast<double>(b.size()), 0.0, 0.01);
}

TEST(Sample, DeterministicPerSeed) {
  const auto a = semsym::sample(TailModel::student_t(3), 1000, 5);
  const auto b = semsym::sample(TailModel::student_t(3), 1000, 5);
  const auto c = semsym::sample(TailModel::student_t(3), 1000, 6);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  EXPECT_EQ(a.rows(), 1000u);
  EXPECT_EQ(a.cols(), 1u);
}

TEST(Sample, KolmogorovSmirnovAgainstModelCdf) {
  const std::size_t n = 100000;
  for (double nu : {3.0, 5.0, 20.0}) {
    const auto b = semsym::sample(TailModel::student_t(nu), n, 21);
    std::vector<double> v(b.values().begin(), b.values().end());
    std::sort(v.begin(), v.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = oracle_cdf(nu, v[i]);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    EXPECT_LT(d, 1.95 / std::sqrt(static_cast<double>(n)) * 1.5) << "nu=" << nu;
  }
}

TEST(Sample, CauchyHasStandardQuartiles) {
  const auto b = semsym::sample(TailModel::cauchy(), 200000, 3);
  std::vector<double> v(b.values().begin(), b.values().end());
  std::nth_element(v.begin(), v.begin() + 150000, v.end());
  EXPECT_NEAR(v[150000], 1.0, 0.02);
}

TEST(ScaledLaw, Examples) {
  const auto a = semsym::scaled_to_normalized({1.0, 2.0});
  EXPECT_EQ(a.model, TailModel::student_t(3.0));
  EXPECT_NEAR(a.unit_variance_rescale, 1.0, 1e-15);
  const auto b = semsym::scaled_to_normalized({2.0, 2.5});
  EXPECT_EQ(b.model, TailModel::student_t(4.0));
  EXPECT_NEAR(b.unit_variance_rescale, std::sqrt(2.0) / 2.0, 1e-15);
  expect_errc([] { (void)semsym::scaled_to_normalized({1.0, 1.5}); }, Errc::infinite_variance);
}

TEST(ScaledLaw, RescaleGivesUnitVarianceByIntegration) {
  for (auto [s, nt] : {std::pair{1.0, 2.0}, {2.0, 2.5}, {0.7, 6.0}}) {
    const auto u = [&](double y) { return std::pow(1.0 + y * y / (s * s), -nt); };
    const double z = whole_line(u);
    const double var = whole_line([&](double y) { return y * y * u(y); }) / z;
    const auto n = semsym::scaled_to_normalized({s, nt});
    EXPECT_NEAR(var * n.unit_variance_rescale * n.unit_variance_rescale, 1.0, 1e-8);
  }
}

TEST(LagrangeToNu, Examples) {
  EXPECT_EQ(semsym::lagrange_to_nu(2.0), 3.0);
  EXPECT_EQ(semsym::lagrange_to_nu(1000.0), 1999.0);
  expect_errc([] { (void)semsym::lagrange_to_nu(1.5); }, Errc::infinite_variance);
}

TEST(LagrangeToNu, LargeLambdaIsNearGaussian) {
  // Gaussian-weighted mean log-likelihood gap on a [-5, 5] grid.
  const TailModel t = TailModel::student_t(semsym::lagrange_to_nu(1000.0));
  const TailModel g = TailModel::gaussian();
  double gap = 0.0, w = 0.0;
  for (double y = -5.0; y <= 5.0 + 1e-12; y += 0.01) {
    const double p = semsym::pdf(g, y);
    gap += p * (semsym::log_pdf(g, y) - semsym::log_pdf(t, y));
    w += p;
  }
  EXPECT_LT(std::abs(gap / w), 1e-4);
}

TEST(Cdf, MatchesBoostAndQuantileInverts) {
  for (double nu : {2.5, 3.0, 7.0, 60.0}) {
    const semsym::TailCdf c(TailModel::student_t(nu));
    for (double y : {-50.0, -4.0, -1.0, 0.0, 0.3, 2.0, 10.0, 33.0, 80.0}) {
      EXPECT_NEAR(c.cdf(y), oracle_cdf(nu, y), 1e-10) << nu << " " << y;
    }
    for (double p : {0.001, 0.1, 0.5, 0.77, 0.99}) {
      const double want = boost::math::quantile(boost::math::students_t_distribution<double>(nu), p) *
                          std::sqrt((nu - 2) / nu);
      EXPECT_NEAR(c.quantile(p), want, 1e-7) << nu << " " << p;
    }
  }
  EXPECT_NEAR(semsym::cdf(TailModel::gaussian(), 1.0), 0.8413447460685429, 1e-14);
  EXPECT_NEAR(semsym::cdf(TailModel::cauchy(), 1.0), 0.75, 1e-14);
  EXPECT_NEAR(semsym::quantile(TailModel::gaussian(), 0.99), 2.3263478740408408, 1e-7);
}
