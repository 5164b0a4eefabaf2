#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "semsym/channel.hpp"

using semsym::ChannelConfig;
using semsym::Errc;
using semsym::SymbolBatch;
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

double mean_square(const SymbolBatch& b) {
  double s = 0.0;
  for (double v : b.values()) s += v * v;
  return s / static_cast<double>(b.size());
}

}  // namespace

TEST(PowerNormalize, SingleVectorExample) {
  const auto out = semsym::power_normalize(SymbolBatch(1, 2, {3.0, 4.0}));
  EXPECT_NEAR(out(0, 0), 0.6 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out(0, 1), 0.8 * std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(out(0, 0) * out(0, 0) + out(0, 1) * out(0, 1), 2.0, 1e-14);
}

TEST(PowerNormalize, UnitAveragePowerAndIdempotence) {
  const auto b = semsym::sample(TailModel::student_t(3), 600, 1);
  const SymbolBatch x(100, 6, std::vector<double>(b.values().begin(), b.values().end()));
  const auto once = semsym::power_normalize(x);
  EXPECT_NEAR(mean_square(once), 1.0, 1e-14);
  const auto twice = semsym::power_normalize(once);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice.values()[i], once.values()[i], 1e-12);
}

TEST(PowerNormalize, ScaleInvariantAndPermutationEquivariant) {
  const auto b = semsym::sample(TailModel::gaussian(), 40, 2);
  const SymbolBatch x(10, 4, std::vector<double>(b.values().begin(), b.values().end()));
  std::vector<double> scaled, permuted;
  for (double v : x.values()) scaled.push_back(37.5 * v);
  for (std::size_t r = 10; r-- > 0;) {
    for (double v : x.row(r)) permuted.push_back(v);
  }
  const auto a = semsym::power_normalize(x);
  const auto s = semsym::power_normalize(SymbolBatch(10, 4, scaled));
  const auto p = semsym::power_normalize(SymbolBatch(10, 4, permuted));
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(s(r, c), a(r, c), 1e-13);
      EXPECT_NEAR(p(9 - r, c), a(r, c), 1e-13);
    }
  }
}

TEST(PowerNormalize, RejectsAllZeroBatch) {
  expect_errc([] { (void)semsym::power_normalize(SymbolBatch(2, 2, {0.0, 0.0, 0.0, 0.0})); }, Errc::all_zero_batch);
}

TEST(Awgn, NoiselessLimit) {
  const auto x = semsym::sample(TailModel::gaussian(), 1000, 3);
  const auto y = semsym::awgn(x, {300.0}, 4);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y.values()[i], x.values()[i], 1e-12);
}

TEST(Awgn, UnitNoiseVarianceAtZeroDb) {
  const SymbolBatch zero(1000000, 1, std::vector<double>(1000000, 0.0));
  const auto y = semsym::awgn(zero, {0.0}, 5);
  const double v = mean_square(y);
  EXPECT_GE(v, 0.995);
  EXPECT_LE(v, 1.005);
}

TEST(Awgn, DeterministicPerSeed) {
  const auto x = semsym::sample(TailModel::gaussian(), 100, 3);
  const auto a = semsym::awgn(x, {10.0}, 9);
  const auto b = semsym::awgn(x, {10.0}, 9);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST(Awgn, NoiseIndependentOfInput) {
  const std::size_t n = 1000000;
  const auto x = semsym::sample(TailModel::student_t(4), n, 6);
  const auto y = semsym::awgn(x, {0.0}, 6);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double nz = y.values()[i] - x.values()[i];
    sxy += x.values()[i] * nz;
    sxx += x.values()[i] * x.values()[i];
    syy += nz * nz;
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 3.0 / std::sqrt(static_cast<double>(n)) * 1.5);
}

TEST(Cbr, Examples) {
  EXPECT_NEAR(semsym::cbr({16384, 256, 256, 3}), 0.0833333333, 1e-9);
  EXPECT_NEAR(semsym::cbr({16384, 256, 256, 3}), 0.083, 5e-4);
  EXPECT_EQ(semsym::cbr({12, 2, 2, 3}), 1.0);
  expect_errc([] { (void)semsym::cbr({0, 2, 2, 3}); }, Errc::invalid_argument);
}

TEST(Capacity, Examples) {
  EXPECT_NEAR(semsym::awgn_capacity({0.0}), 0.5, 1e-15);
  EXPECT_NEAR(semsym::awgn_capacity({10.0}), 1.72972, 5e-6);
  // ½ log2(101) = 3.3291057; the value 3.32862 sometimes quoted for it is off in the fourth place.
  EXPECT_NEAR(semsym::awgn_capacity({20.0}), 0.5 * std::log2(101.0), 1e-14);
  EXPECT_NEAR(semsym::awgn_capacity({20.0}), 3.32911, 5e-6);
  EXPECT_NEAR(ChannelConfig{10.0}.noise_variance(), 0.1, 1e-16);
}

TEST(MutualInformation, GaussianNearCapacity) {
  const auto mi = semsym::mutual_information(TailModel::gaussian(), {10.0}, 1000000, 7);
  EXPECT_NEAR(mi.bits, 1.72972, 0.05 * 1.72972);
  EXPECT_GT(mi.stderr_bits, 0.0);
  EXPECT_LT(mi.stderr_bits, 0.01);
  EXPECT_EQ(mi.samples, 1000000u);
}

TEST(MutualInformation, HeavyTailLosesThroughput) {
  const auto c = semsym::compare_mutual_information(TailModel::gaussian(), TailModel::student_t(3), {10.0}, 200000, 8);
  EXPECT_GT(c.difference_bits, 0.0);
  EXPECT_GT(c.difference_bits - 1.96 * c.difference_stderr_bits, 0.0);
  EXPECT_NEAR(c.first.bits - c.second.bits, c.difference_bits, 1e-15);
}

TEST(MutualInformation, NoiseDominatedLimit) {
  for (const TailModel& m : {TailModel::gaussian(), TailModel::student_t(3)}) {
    EXPECT_LT(semsym::mutual_information(m, {-30.0}, 100000, 9).bits, 0.01) << m.to_string();
  }
}

TEST(MutualInformation, GaussianDominatesWithinError) {
  for (double nu : {2.5, 3.0, 5.0, 10.0}) {
    for (double snr : {0.0, 10.0, 20.0}) {
      const auto c = semsym::compare_mutual_information(TailModel::gaussian(), TailModel::student_t(nu), {snr}, 100000, 10);
      EXPECT_GE(c.difference_bits + 3.0 * c.difference_stderr_bits, 0.0) << nu << " @ " << snr;
    }
  }
}

TEST(MutualInformation, IncreasesWithSnr) {
  for (const TailModel& m : {TailModel::gaussian(), TailModel::student_t(3)}) {
    double prev = -INFINITY, prev_se = 0.0;
    for (double snr : {-10.0, 0.0, 10.0, 20.0}) {
      const auto mi = semsym::mutual_information(m, {snr}, 100000, 11);
      EXPECT_GT(mi.bits - 1.96 * mi.stderr_bits, prev + 1.96 * prev_se) << m.to_string() << " @ " << snr;
      prev = mi.bits;
      prev_se = mi.stderr_bits;
    }
  }
}

TEST(MutualInformation, DeterministicAndValidated) {
  const auto a = semsym::mutual_information(TailModel::student_t(5), {5.0}, 20000, 12);
  const auto b = semsym::mutual_information(TailModel::student_t(5), {5.0}, 20000, 12);
  EXPECT_EQ(a.bits, b.bits);
  EXPECT_EQ(a.stderr_bits, b.stderr_bits);
  expect_errc([] { (void)semsym::mutual_information(TailModel::gaussian(), {0.0}, 9999, 1); }, Errc::invalid_argument);
}
