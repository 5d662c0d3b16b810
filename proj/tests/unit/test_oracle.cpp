#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bnpsketch/genmodel.hpp"
#include "bnpsketch/oracle.hpp"

using namespace bnps;

TEST(TrueCoverage, HandExample) {
  // symbols a = 0, b = 1; weights a: 0.5, b: 0.3, remainder 0.2
  RawSample s;
  s.symbols = {0, 0, 1};
  s.weights = std::vector<double>{0.5, 0.3};
  s.residual_mass = 0.2;
  const auto cov = true_coverage_all(s, 3);
  EXPECT_NEAR(cov[0], 0.2, 1e-15);
  EXPECT_NEAR(cov[1], 0.3, 1e-15);
  EXPECT_NEAR(cov[2], 0.5, 1e-15);
  EXPECT_EQ(cov[3], 0.0);
}

TEST(TrueCoverage, UnseenInstantiatedAtomsCountAsMissing) {
  RawSample s;
  s.symbols = {1};
  s.weights = std::vector<double>{0.25, 0.5};
  s.residual_mass = 0.25;
  EXPECT_NEAR(true_coverage(s, 0), 0.5, 1e-15);
  EXPECT_NEAR(true_coverage(s, 1), 0.5, 1e-15);
}

TEST(TrueCoverage, EmptySampleHasFullMissingMass) {
  const RawSample s = sample_pyp_sequence({0.0, 100.0}, 0, 1);
  EXPECT_EQ(true_coverage(s, 0), 1.0);
  const RawSample z = sample_zipf_sequence(1.0, 5, 0, 1);
  EXPECT_NEAR(true_coverage(z, 0), 1.0, 1e-15);
}

TEST(TrueCoverage, RequiresWeights) {
  RawSample s;
  s.symbols = {0};
  EXPECT_THROW(true_coverage(s, 0), DataError);
}

TEST(TrueCoverage, SumsToOneOnStickBreakingSamples) {
  for (std::uint64_t n : {1ULL, 10ULL, 1000ULL, 100000ULL}) {
    const RawSample s = sample_pyp_sequence({0.5, 10.0}, n, n);
    const auto cov = true_coverage_all(s, n);
    EXPECT_NEAR(std::accumulate(cov.begin(), cov.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(TrueCoverage, ZipfSingleSymbolHasNoMissingMass) {
  const RawSample z = sample_zipf_sequence(1.0, 1, 5, 2);
  EXPECT_EQ(true_coverage(z, 0), 0.0);
  EXPECT_EQ(true_coverage(z, 5), 1.0);
}

TEST(PartitionStats, Examples) {
  const PartitionStats a = partition_stats(std::vector<std::uint64_t>{7, 7, 9});
  EXPECT_EQ(a.k, 2u);
  EXPECT_EQ(a.m_at(1), 1u);
  EXPECT_EQ(a.m_at(2), 1u);
  EXPECT_EQ(a.m_at(3), 0u);
  EXPECT_EQ(partition_stats(std::vector<std::uint64_t>{}).k, 0u);
  const PartitionStats same = partition_stats(std::vector<std::uint64_t>(12, 4));
  EXPECT_EQ(same.k, 1u);
  EXPECT_EQ(same.m_at(12), 1u);
}

TEST(PartitionStats, Identities) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint64_t> v(gen() % 500);
    for (auto& x : v) x = gen() % 60;
    const PartitionStats st = partition_stats(v);
    std::uint64_t k = 0, n = 0;
    for (std::size_t r = 0; r < st.m.size(); ++r) {
      k += st.m[r];
      n += r * st.m[r];
    }
    EXPECT_EQ(k, st.k);
    EXPECT_EQ(n, v.size());
  }
}

TEST(RawBnp, Examples) {
  PartitionStats one = partition_stats(std::vector<std::uint64_t>{3});
  const PriorParams pp{0.4, 2.0};
  EXPECT_NEAR(raw_bnp_coverage(one, 1, pp, 0), (2.0 + 0.4) / 3.0, 1e-15);
  const PartitionStats st = partition_stats(std::vector<std::uint64_t>{1, 1, 2, 3, 3, 3});
  EXPECT_NEAR(raw_bnp_coverage(st, 6, {0.0, 5.0}, 0), 5.0 / 11.0, 1e-15);
}

TEST(RawBnp, Normalized) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint64_t> v(1 + gen() % 300);
    for (auto& x : v) x = gen() % 40;
    const PartitionStats st = partition_stats(v);
    const PriorParams pp{0.1 * (gen() % 10), 0.5 + gen() % 20};
    double s = 0.0;
    for (std::uint64_t r = 0; r <= v.size(); ++r) s += raw_bnp_coverage(st, v.size(), pp, r);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(GoodTuring, MissingMassIsSingletonFraction) {
  const PartitionStats st = partition_stats(std::vector<std::uint64_t>{1, 1, 2, 3, 4});
  EXPECT_NEAR(good_turing_coverage(st, 0), 3.0 / 5.0, 1e-15);
  EXPECT_NEAR(good_turing_coverage(st, 1), 2.0 * 1 / 5.0, 1e-15);
}
