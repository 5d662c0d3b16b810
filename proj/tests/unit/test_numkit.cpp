#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <gtest/gtest.h>

#include "bnpsketch/numkit.hpp"

using namespace bnps;
using boost::multiprecision::cpp_int;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

// Rising factorial by plain multiplication in long double.
long double rising_direct(long double a, unsigned u) {
  long double p = 1.0L;
  for (unsigned i = 0; i < u; ++i) p *= a + i;
  return p;
}

// psi(x) for x > 0 from the series psi(x) = -gamma + sum_k (1/(k+1) - 1/(k+x)),
// summed to a large cutoff with an integral tail correction.
double digamma_series(double x) {
  const double euler_gamma = 0.57721566490153286061;
  long double s = 0.0L;
  const long K = 2'000'000;
  for (long k = 0; k < K; ++k) s += 1.0L / (k + 1) - 1.0L / (k + x);
  // tail sum_{k>=K} (1/(k+1) - 1/(k+x)) ~ (x - 1)/K
  s += (x - 1.0L) / K;
  return static_cast<double>(-euler_gamma + s);
}

} // namespace

TEST(LogRisingFactorial, Examples) {
  EXPECT_NEAR(log_rising_factorial(2.0, 3), std::log(24.0), 1e-14);
  EXPECT_EQ(log_rising_factorial(0.5, 0), 0.0);
  EXPECT_NEAR(log_rising_factorial(0.5, 2), std::log(0.75), 1e-14);
}

TEST(LogRisingFactorial, RejectsNonPositiveBase) {
  EXPECT_THROW(log_rising_factorial(0.0, 3), DomainError);
  EXPECT_THROW(log_rising_factorial(-1.5, 2), DomainError);
}

TEST(LogRisingFactorial, MatchesDirectProductAcrossRegimes) {
  for (double a : {1e-3, 0.1, 0.5, 1.0, 3.7, 9.99, 10.0, 55.5, 1234.5}) {
    for (unsigned u : {1u, 5u, 31u, 32u, 33u, 64u, 150u}) {
      const long double direct = rising_direct(a, u);
      if (!std::isfinite(static_cast<double>(direct))) continue;
      EXPECT_LT(rel_err(log_rising_factorial(a, u), static_cast<double>(std::log(direct))) , 1e-12)
          << "a=" << a << " u=" << u;
    }
  }
}

TEST(LogRisingFactorial, LargeArgumentsAgreeWithLgamma) {
  for (double a : {0.25, 7.0, 100.0, 1e5}) {
    for (std::uint64_t u : {1000ULL, 100000ULL, 10000000ULL}) {
      const double want = std::lgamma(a + static_cast<double>(u)) - std::lgamma(a);
      EXPECT_LT(std::abs(log_rising_factorial(a, u) - want), 1e-8 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(LogFactorialBinomial, SmallValues) {
  EXPECT_NEAR(log_factorial(5), std::log(120.0), 1e-13);
  EXPECT_NEAR(log_binomial(5, 2), std::log(10.0), 1e-13);
  EXPECT_EQ(log_binomial(7, 0), 0.0);
}

TEST(Digamma, Examples) {
  EXPECT_NEAR(digamma(1.0), -0.57721566490153286, 1e-12);
  EXPECT_NEAR(digamma(2.0), 1.0 - 0.57721566490153286, 1e-12);
  EXPECT_THROW(digamma(0.0), DomainError);
  EXPECT_THROW(digamma(-3.0), DomainError);
  EXPECT_THROW(digamma(-2.0 + 1e-13), DomainError);
}

TEST(Digamma, MatchesSeriesOracle) {
  for (double x : {0.1, 0.5, 1.5, 3.25, 7.0, 42.0}) {
    EXPECT_NEAR(digamma(x), digamma_series(x), 2e-9) << x;
  }
}

TEST(Digamma, RecurrenceHolds) {
  for (double x = 0.1; x <= 100.0; x *= 1.37) EXPECT_NEAR(digamma(x + 1.0), digamma(x) + 1.0 / x, 1e-10) << x;
}

TEST(Digamma, ReflectionForNegativeArguments) {
  // psi(1 - x) - psi(x) = pi cot(pi x)
  for (double x : {-0.3, -1.7, -5.2, -10.45}) {
    EXPECT_NEAR(digamma(1.0 - x) - digamma(x), M_PI / std::tan(M_PI * x), 1e-9) << x;
  }
}

TEST(LogSumExp, Examples) {
  const std::vector<double> a{0.0, 0.0};
  EXPECT_NEAR(logsumexp(a), std::log(2.0), 1e-15);
  const std::vector<double> b{neg_inf};
  EXPECT_EQ(logsumexp(b), neg_inf);
  const std::vector<double> c{std::log(3.0), std::log(7.0)};
  EXPECT_NEAR(logsumexp(c), std::log(10.0), 1e-15);
  EXPECT_EQ(logsumexp(std::vector<double>{}), neg_inf);
  const std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(logsumexp(big), 1000.0 + std::log(2.0), 1e-12);
}

TEST(LogConvolve, Examples) {
  const LogSeq id{0.0};
  const LogSeq b{0.0, std::log(2.0)};
  const LogSeq r1 = log_convolve(id, b);
  ASSERT_EQ(r1.size(), 2u);
  EXPECT_NEAR(r1[0], 0.0, 1e-15);
  EXPECT_NEAR(r1[1], std::log(2.0), 1e-15);

  const LogSeq ones{0.0, 0.0};
  const LogSeq r2 = log_convolve(ones, ones);
  ASSERT_EQ(r2.size(), 3u);
  EXPECT_NEAR(r2[0], 0.0, 1e-15);
  EXPECT_NEAR(r2[1], std::log(2.0), 1e-15);
  EXPECT_NEAR(r2[2], 0.0, 1e-15);
}

TEST(LogConvolve, HandlesNegInfEntries) {
  const LogSeq a{neg_inf, 0.0, neg_inf};
  const LogSeq b{neg_inf, neg_inf, std::log(3.0)};
  const LogSeq r = log_convolve(a, b);
  ASSERT_EQ(r.size(), 5u);
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t == 3) EXPECT_NEAR(r[t], std::log(3.0), 1e-15);
    else EXPECT_EQ(r[t], neg_inf) << t;
  }
}

TEST(LogConvolve, MatchesDirectSpaceOracle) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t na = 1 + gen() % 30, nb = 1 + gen() % 30;
    std::vector<double> a(na), b(nb);
    for (auto& x : a) x = u(gen);
    for (auto& x : b) x = u(gen);
    LogSeq la(na), lb(nb);
    for (std::size_t i = 0; i < na; ++i) la[i] = std::log(a[i]);
    for (std::size_t i = 0; i < nb; ++i) lb[i] = std::log(b[i]);
    const LogSeq got = log_convolve(la, lb);
    ASSERT_EQ(got.size(), na + nb - 1);
    for (std::size_t t = 0; t < got.size(); ++t) {
      long double s = 0.0L;
      for (std::size_t i = 0; i < na; ++i) {
        if (t >= i && t - i < nb) s += static_cast<long double>(a[i]) * b[t - i];
      }
      EXPECT_LT(rel_err(std::exp(got[t]), static_cast<double>(s)), 1e-12);
    }
  }
}

TEST(LogConvolve, CommutativeAndAssociative) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> z(0.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    LogSeq a(1 + gen() % 20), b(1 + gen() % 20), c(1 + gen() % 20);
    for (auto* s : {&a, &b, &c}) {
      for (auto& x : *s) x = z(gen);
    }
    const LogSeq ab = log_convolve(a, b), ba = log_convolve(b, a);
    for (std::size_t t = 0; t < ab.size(); ++t) EXPECT_NEAR(ab[t], ba[t], 1e-12);
    const LogSeq l = log_convolve(ab, c), r = log_convolve(a, log_convolve(b, c));
    for (std::size_t t = 0; t < l.size(); ++t) EXPECT_NEAR(l[t], r[t], 1e-12);
  }
}

TEST(Gfc, RowExamples) {
  const GfcRow r1 = gfc_row(1, 0.5);
  EXPECT_EQ(r1.log_values[0], neg_inf);
  EXPECT_NEAR(std::exp(r1.log_values[1]), 0.5, 1e-15);
  const GfcRow r2 = gfc_row(2, 0.5);
  EXPECT_NEAR(std::exp(r2.log_values[1]), 0.25, 1e-15);
  EXPECT_NEAR(std::exp(r2.log_values[2]), 0.25, 1e-15);
  const GfcRow r0 = gfc_row(0, 0.3);
  ASSERT_EQ(r0.log_values.size(), 1u);
  EXPECT_EQ(r0.log_values[0], 0.0);
}

TEST(Gfc, SecondRowGeneralAlpha) {
  // (alpha t)_(2) = alpha^2 t(t+1) + alpha(1-alpha) t
  for (double a : {0.1, 0.37, 0.9}) {
    const GfcRow r = gfc_row(2, a);
    EXPECT_NEAR(std::exp(r.log_values[2]), a * a, 1e-15);
    EXPECT_NEAR(std::exp(r.log_values[1]), a * (1.0 - a), 1e-15);
  }
}

TEST(Gfc, RejectsAlphaOutsideUnitInterval) {
  EXPECT_THROW(gfc_row(3, 0.0), DomainError);
  EXPECT_THROW(gfc_row(3, 1.0), DomainError);
  EXPECT_THROW(GfcTable(3, -0.2), DomainError);
}

TEST(Gfc, DirectExamples) {
  EXPECT_NEAR(gfc_direct(2, 2, 0.5), 0.25, 1e-15);
  EXPECT_EQ(gfc_direct(3, 0, 0.5), 0.0);
  EXPECT_EQ(gfc_direct(0, 0, 0.5), 1.0);
  EXPECT_THROW(gfc_direct(21, 3, 0.5), DomainError);
}

TEST(Gfc, RecursionMatchesDirectFormula) {
  for (double a : {0.1, 0.5, 0.9}) {
    for (std::uint64_t u = 0; u <= 12; ++u) {
      const GfcRow row = gfc_row(u, a);
      for (std::uint64_t v = 1; v <= u; ++v) {
        ASSERT_TRUE(std::isfinite(row.log_values[v]));
        EXPECT_LT(rel_err(std::exp(row.log_values[v]), gfc_direct(u, v, a)), 1e-9) << u << "," << v << " a=" << a;
      }
    }
  }
}

TEST(Gfc, TableRowsEqualSingleRows) {
  const GfcTable table(40, 0.3);
  EXPECT_EQ(table.max_u(), 40u);
  for (std::uint64_t u : {0ULL, 1ULL, 17ULL, 40ULL}) {
    const GfcRow row = gfc_row(u, 0.3);
    for (std::uint64_t v = 0; v <= u; ++v) EXPECT_DOUBLE_EQ(table.row(u)[v], row.log_values[v]);
  }
}

TEST(Gfc, DefiningIdentity) {
  // sum_v C(u,v;alpha) (t)_(v) = (alpha t)_(u)
  for (double a : {0.1, 0.5, 0.9}) {
    for (double t : {0.5, 1.0, 2.5}) {
      for (std::uint64_t u = 1; u <= 10; ++u) {
        const GfcRow row = gfc_row(u, a);
        long double s = 0.0L;
        for (std::uint64_t v = 1; v <= u; ++v) s += std::exp(static_cast<long double>(row.log_values[v])) * rising_direct(t, v);
        EXPECT_LT(rel_err(static_cast<double>(s), static_cast<double>(rising_direct(a * t, u))), 1e-9);
      }
    }
  }
}

TEST(Gfc, RowsStayFiniteForLargeU) {
  const GfcRow row = gfc_row(3000, 0.5);
  for (std::uint64_t v = 1; v <= 3000; ++v) ASSERT_TRUE(std::isfinite(row.log_values[v])) << v;
}

TEST(Stirling, Examples) {
  EXPECT_EQ(stirling_signless(3, 2), cpp_int(3));
  for (std::uint64_t u = 0; u <= 20; ++u) EXPECT_EQ(stirling_signless(u, u), cpp_int(1));
  for (std::uint64_t u = 1; u <= 20; ++u) EXPECT_EQ(stirling_signless(u, 0), cpp_int(0));
  EXPECT_EQ(stirling_signless(0, 0), cpp_int(1));
}

TEST(Stirling, DefiningIdentityExact) {
  for (std::uint64_t u = 0; u <= 15; ++u) {
    for (int t = 0; t <= 5; ++t) {
      cpp_int lhs = 0, tp = 1;
      for (std::uint64_t v = 0; v <= u; ++v) {
        lhs += stirling_signless(u, v) * tp;
        tp *= t;
      }
      cpp_int rhs = 1;
      for (std::uint64_t i = 0; i < u; ++i) rhs *= t + static_cast<int>(i);
      EXPECT_EQ(lhs, rhs) << "u=" << u << " t=" << t;
    }
  }
}

TEST(Stirling, LimitOfGfcAsAlphaVanishes) {
  const double a = 1e-6;
  for (std::uint64_t u = 1; u <= 10; ++u) {
    const GfcRow row = gfc_row(u, a);
    for (std::uint64_t v = 1; v <= u; ++v) {
      const double scaled = std::exp(row.log_values[v] - static_cast<double>(v) * std::log(a));
      EXPECT_LT(rel_err(scaled, stirling_signless(u, v).convert_to<double>()), 1e-4);
    }
  }
}

TEST(Stirling, LogRowMatchesExactValues) {
  const LogSeq row = log_stirling_row(30);
  for (std::uint64_t v = 1; v <= 30; ++v) {
    EXPECT_LT(rel_err(std::exp(row[v]), stirling_signless(30, v).convert_to<double>()), 1e-12);
  }
}
