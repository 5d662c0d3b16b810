#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "bnpsketch/random.hpp"
#include "bnpsketch/sketch.hpp"

using namespace bnps;

namespace {

Sketch sketch_of(const HashSpec& spec, const std::vector<std::string>& tokens) {
  Sketch s(spec);
  for (const auto& t : tokens) s.insert(t);
  return s;
}

std::vector<std::string> random_tokens(std::mt19937_64& gen, std::size_t count, int alphabet) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back("tok" + std::to_string(gen() % alphabet));
  return out;
}

double chi_square_critical(double dof, double significance) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), significance));
}

} // namespace

TEST(HashEval, IdentityParameters) {
  HashSpec spec;
  spec.a = 1;
  spec.b = 0;
  spec.width = 16;
  EXPECT_EQ(hash_eval_prehashed(spec, 5), 5u);
  EXPECT_EQ(hash_eval_prehashed(spec, 21), 5u);
}

TEST(HashEval, CarterWegmanFormula) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 1000; ++i) {
    HashSpec spec = HashSpec::from_seed(gen(), 1 + gen() % 5000);
    const std::uint64_t x = gen();
    const unsigned __int128 y = (static_cast<unsigned __int128>(spec.a) * (x % mersenne61) + spec.b) % mersenne61;
    EXPECT_EQ(hash_eval_prehashed(spec, x), static_cast<std::uint32_t>(static_cast<std::uint64_t>(y) % spec.width));
  }
}

TEST(HashEval, Deterministic) {
  const HashSpec spec = HashSpec::from_seed(42, 128);
  EXPECT_EQ(hash_eval(spec, "hello"), hash_eval(spec, "hello"));
  EXPECT_EQ(symbol_prehash(9, "abc"), symbol_prehash(9, "abc"));
  EXPECT_NE(symbol_prehash(9, "abc"), symbol_prehash(10, "abc"));
}

TEST(HashSpec, FromSeedIsValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const HashSpec h = HashSpec::from_seed(seed, 64);
    EXPECT_NO_THROW(h.validate());
    EXPECT_EQ(h, HashSpec::from_seed(seed, 64));
  }
  EXPECT_NE(HashSpec::from_seed(1, 64), HashSpec::from_seed(2, 64));
}

TEST(HashSpec, ValidationRejectsBadFields) {
  HashSpec h;
  h.a = 0;
  EXPECT_THROW(h.validate(), DomainError);
  h.a = mersenne61;
  EXPECT_THROW(h.validate(), DomainError);
  h.a = 1;
  h.b = mersenne61;
  EXPECT_THROW(h.validate(), DomainError);
  h.b = 0;
  h.width = 0;
  EXPECT_THROW(h.validate(), DomainError);
  h.width = max_sketch_width + 1;
  EXPECT_THROW(h.validate(), DomainError);
}

TEST(HashEval, UniformityChiSquare) {
  const HashSpec spec = HashSpec::from_seed(2024, 128);
  std::vector<double> hist(128, 0.0);
  const std::size_t N = 1'000'000;
  for (std::size_t i = 0; i < N; ++i) ++hist[hash_eval(spec, "token-" + std::to_string(i))];
  const double expected = static_cast<double>(N) / 128.0;
  double chi2 = 0.0;
  for (double h : hist) chi2 += (h - expected) * (h - expected) / expected;
  EXPECT_LT(chi2, chi_square_critical(127, 0.001));
}

TEST(HashEval, PairCollisionProbabilityOverRandomParameters) {
  const std::uint32_t J = 64;
  const std::uint64_t x1 = 123456789, x2 = 987654321;
  Rng rng = make_rng(77);
  const int draws = 100'000;
  int same = 0;
  for (int i = 0; i < draws; ++i) {
    HashSpec h;
    h.width = J;
    h.a = 1 + uniform_below(rng, mersenne61 - 1);
    h.b = uniform_below(rng, mersenne61);
    same += hash_eval_prehashed(h, x1) == hash_eval_prehashed(h, x2);
  }
  const double p = 1.0 / J;
  const double se = std::sqrt(p * (1 - p) / draws);
  EXPECT_NEAR(static_cast<double>(same) / draws, p, 3 * se);
}

TEST(Sketch, InsertExamples) {
  const HashSpec spec = HashSpec::from_seed(1, 16);
  Sketch s(spec);
  EXPECT_EQ(s.n(), 0u);
  for (auto c : s.counts()) EXPECT_EQ(c, 0u);
  s.insert("a");
  s.insert("b");
  s.insert("a");
  EXPECT_EQ(s.n(), 3u);
  std::uint64_t total = 0;
  for (auto c : s.counts()) total += c;
  EXPECT_EQ(total, 3u);
  EXPECT_GE(s.counts()[hash_eval(spec, "a")], 2u);
}

TEST(Sketch, CountsSumToNUnderRandomStreams) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    Sketch s(HashSpec::from_seed(gen(), 1 + gen() % 300));
    std::vector<std::uint64_t> prev(s.counts().begin(), s.counts().end());
    const auto toks = random_tokens(gen, gen() % 2000, 500);
    for (const auto& t : toks) {
      const std::uint64_t n_before = s.n();
      s.insert(t);
      EXPECT_EQ(s.n(), n_before + 1);
    }
    std::uint64_t total = 0;
    for (std::size_t j = 0; j < prev.size(); ++j) {
      EXPECT_GE(s.counts()[j], prev[j]);
      total += s.counts()[j];
    }
    EXPECT_EQ(total, s.n());
  }
}

TEST(Sketch, MergeIdentityAndHomomorphism) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const HashSpec spec = HashSpec::from_seed(gen(), 1 + gen() % 200);
    const auto A = random_tokens(gen, gen() % 1000, 300);
    const auto B = random_tokens(gen, gen() % 1000, 300);
    Sketch sa = sketch_of(spec, A);
    const Sketch sb = sketch_of(spec, B);
    Sketch with_empty = sa;
    with_empty.merge(Sketch(spec));
    EXPECT_EQ(with_empty, sa);
    std::vector<std::string> AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    sa.merge(sb);
    EXPECT_EQ(sa.serialize(), sketch_of(spec, AB).serialize());
  }
}

TEST(Sketch, MergeRejectsMismatchedSpecs) {
  Sketch a(HashSpec::from_seed(1, 16));
  EXPECT_THROW(a.merge(Sketch(HashSpec::from_seed(1, 32))), IncompatibleSketch);
  EXPECT_THROW(a.merge(Sketch(HashSpec::from_seed(2, 16))), IncompatibleSketch);
}

TEST(Sketch, SerializationRoundTrip) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const Sketch s = sketch_of(HashSpec::from_seed(gen(), 1 + gen() % 1000), random_tokens(gen, gen() % 3000, 700));
    const auto bytes = s.serialize();
    EXPECT_EQ(bytes.size(), 41 + 8 * s.width() + 4);
    const Sketch back = Sketch::deserialize(bytes);
    EXPECT_EQ(back, s);
    EXPECT_EQ(back.serialize(), bytes);
  }
}

TEST(Sketch, WireLayoutIsLittleEndian) {
  HashSpec spec;
  spec.a = 0x0102030405060708ULL;
  spec.b = 3;
  spec.width = 2;
  spec.symbol_seed = 0xAABBULL;
  Sketch s = Sketch::from_counts(spec, {5, 0x100});
  const auto b = s.serialize();
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "BNPS");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 2);
  EXPECT_EQ(b[9], 0x08);
  EXPECT_EQ(b[16], 0x01);
  EXPECT_EQ(b[17], 3);
  EXPECT_EQ(b[25], 0xBB);
  EXPECT_EQ(b[26], 0xAA);
  EXPECT_EQ(b[33], 5 + 0);
  EXPECT_EQ(b[34], 1);
  EXPECT_EQ(b[41], 5);
  EXPECT_EQ(b[49], 0);
  EXPECT_EQ(b[50], 1);
}

TEST(Crc32c, KnownCheckValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32c(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())), 0xE3069283u);
}

TEST(Sketch, DeserializeErrorsAreDistinct) {
  const Sketch s = sketch_of(HashSpec::from_seed(5, 8), {"x", "y", "z"});
  const auto good = s.serialize();
  auto kind_of = [](std::vector<std::uint8_t> bytes) {
    try {
      (void)Sketch::deserialize(bytes);
    } catch (const SketchFormatError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return SketchFormatError::Kind::bad_magic;
  };
  using K = SketchFormatError::Kind;
  auto corrupt = good;
  corrupt[45] ^= 0x01;
  EXPECT_EQ(kind_of(corrupt), K::checksum_mismatch);
  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(kind_of(magic), K::bad_magic);
  auto version = good;
  version[4] = 2;
  EXPECT_EQ(kind_of(version), K::bad_version);
  EXPECT_EQ(kind_of(std::vector<std::uint8_t>(good.begin(), good.end() - 1)), K::truncated);
  EXPECT_EQ(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 20)), K::truncated);
  auto extra = good;
  extra.push_back(0);
  EXPECT_EQ(kind_of(extra), K::truncated);
  EXPECT_EQ(kind_of({}), K::bad_magic);
}
