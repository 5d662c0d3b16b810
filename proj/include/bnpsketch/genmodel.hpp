#pragma once

// Generative samplers for the Pitman-Yor / Dirichlet process model and
// exact small-instance laws used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/random/beta_distribution.hpp>

#include "bnpsketch/errors.hpp"
#include "bnpsketch/numkit.hpp"
#include "bnpsketch/random.hpp"
#include "bnpsketch/sketch.hpp"

namespace bnps {

/// Discount alpha in [0,1) and scale theta > -alpha.
struct PriorParams {
  double alpha = 0.0;
  double theta = 1.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in [0,1), got " + std::to_string(alpha));
    if (!(theta > -alpha)) throw DomainError("theta must exceed -alpha, got " + std::to_string(theta));
  }

  // The estimators work in log space and need a positive scale.
  void validate_for_estimation() const {
    validate();
    if (!(theta > 0.0)) throw DomainError("estimators require theta > 0, got " + std::to_string(theta));
  }

  friend bool operator==(const PriorParams&, const PriorParams&) = default;
};

struct GeneratorMeta {
  std::string model;
  double alpha = 0.0;
  double theta = 0.0;
  double exponent = 0.0;
  std::uint64_t vocab = 0;
  std::uint64_t seed = 0;
};

/// A raw (unsketched) sample of integer symbol ids.
///
/// When `weights` is present, weights[id] is the true probability of symbol
/// id, and `residual_mass` is the mass of everything never instantiated, so
/// the total is sum(weights) + residual_mass = 1.
struct RawSample {
  std::vector<std::uint64_t> symbols;
  std::optional<std::vector<double>> weights;
  double residual_mass = 0.0;
  GeneratorMeta meta;
};

/// Draws n observations from P ~ PYP(alpha, theta) with P's atoms
/// instantiated lazily by stick-breaking.
///
/// Atoms are created in order of first appearance. A draw lands in the
/// uninstantiated remainder R with probability R; the atom it hits is then the
/// next stick of the remainder, with weight R * V and V ~ Beta(1 - alpha,
/// theta + (k+1) alpha) for k atoms so far (GEM sticks are invariant under
/// size-biased reordering). Otherwise the draw walks the cumulative weights
/// of the existing atoms. Weights are exact, so the missing mass is R.
inline RawSample sample_pyp_sequence(const PriorParams& params, std::uint64_t n, std::uint64_t seed) {
  params.validate();
  RawSample out;
  out.meta = {"pyp", params.alpha, params.theta, 0.0, 0, seed};
  out.symbols.reserve(n);
  std::vector<double> weights;
  std::vector<double> cumulative;
  double remainder = 1.0;
  Rng rng = make_rng(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    if (u < remainder || weights.empty()) {
      const double k = static_cast<double>(weights.size());
      boost::random::beta_distribution<double> stick(1.0 - params.alpha, params.theta + (k + 1.0) * params.alpha);
      const double v = stick(rng);
      const double w = remainder * v;
      remainder *= (1.0 - v);
      out.symbols.push_back(weights.size());
      weights.push_back(w);
      cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + w);
    } else {
      const double target = u - remainder;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
      if (it == cumulative.end()) --it;
      out.symbols.push_back(static_cast<std::uint64_t>(it - cumulative.begin()));
    }
  }
  out.weights = std::move(weights);
  out.residual_mass = remainder;
  return out;
}

/// Symbol ids from the sequential predictive (Chinese restaurant) scheme;
/// same law for the sample as sample_pyp_sequence but without atom weights.
/// Existing blocks are chosen with probability proportional to (n_i - alpha)
/// by picking a uniform earlier draw and accepting with (n_i - alpha) / n_i.
inline std::vector<std::uint64_t> sample_crp_sequence(const PriorParams& params, std::uint64_t n, std::uint64_t seed) {
  params.validate();
  std::vector<std::uint64_t> ids;
  ids.reserve(n);
  std::vector<std::uint64_t> block_sizes;
  Rng rng = make_rng(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(block_sizes.size());
    const double p_new = i == 0 ? 1.0 : (params.theta + params.alpha * k) / (params.theta + static_cast<double>(i));
    if (bernoulli(rng, p_new)) {
      ids.push_back(block_sizes.size());
      block_sizes.push_back(1);
      continue;
    }
    for (;;) {
      const std::uint64_t block = ids[uniform_below(rng, i)];
      const double size = static_cast<double>(block_sizes[block]);
      if (params.alpha == 0.0 || bernoulli(rng, (size - params.alpha) / size)) {
        ids.push_back(block);
        ++block_sizes[block];
        break;
      }
    }
  }
  return ids;
}

/// iid draws from p_k proportional to k^(-exponent), k = 1..vocab; symbol
/// id k-1 stands for rank k.
inline RawSample sample_zipf_sequence(double exponent, std::uint64_t vocab, std::uint64_t n, std::uint64_t seed) {
  if (!(exponent > 0.0)) throw DomainError("zipf exponent must be positive");
  if (vocab == 0) throw DomainError("zipf vocabulary must be nonempty");
  RawSample out;
  out.meta = {"zipf", 0.0, 0.0, exponent, vocab, seed};
  std::vector<double> weights(vocab);
  for (std::uint64_t k = 0; k < vocab; ++k) weights[k] = std::pow(static_cast<double>(k + 1), -exponent);
  // Sum smallest first.
  double total = 0.0;
  for (std::uint64_t k = vocab; k-- > 0;) total += weights[k];
  std::vector<double> cumulative(vocab);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < vocab; ++k) {
    weights[k] /= total;
    acc += weights[k];
    cumulative[k] = acc;
  }
  Rng rng = make_rng(seed);
  out.symbols.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.symbols.push_back(static_cast<std::uint64_t>(it - cumulative.begin()));
  }
  out.weights = std::move(weights);
  out.residual_mass = 0.0;
  return out;
}

/// One trajectory of distinct-symbol counts K_0, K_1, ..., K_c (indexed by
/// prefix length) via independent Bernoulli new-symbol indicators.
///
/// K_1 = 1 deterministically; Bernoulli draws start at i = 2 with success
/// probability (theta + alpha K_{i-1}) / (theta + i - 1), the chance that
/// draw i opens a new block given the first i - 1 draws.
inline void sample_distinct_prefix_into(std::span<std::uint32_t> k, const PriorParams& params, Rng& rng) {
  if (k.empty()) return;
  k[0] = 0;
  if (k.size() == 1) return;
  k[1] = 1;
  for (std::size_t i = 2; i < k.size(); ++i) {
    const double p = (params.theta + params.alpha * k[i - 1]) / (params.theta + static_cast<double>(i - 1));
    k[i] = k[i - 1] + (uniform01(rng) < p ? 1U : 0U);
  }
}

inline std::vector<std::uint32_t> sample_distinct_prefix(std::uint64_t c, const PriorParams& params, std::uint64_t seed) {
  params.validate();
  std::vector<std::uint32_t> k(c + 1);
  Rng rng = make_rng(seed);
  sample_distinct_prefix_into(k, params, rng);
  return k;
}

/// Exact E[K_c] from e_{i+1} = e_i + (theta + alpha e_i) / (theta + i), e_1 = 1.
inline double expected_distinct_exact(std::uint64_t c, const PriorParams& params) {
  params.validate();
  if (c == 0) return 0.0;
  double e = 1.0;
  for (std::uint64_t i = 1; i < c; ++i) e += (params.theta + params.alpha * e) / (params.theta + static_cast<double>(i));
  return e;
}

/// C_n ~ Dirichlet-Multinomial(n, theta/J, ..., theta/J) by a Polya urn.
inline Sketch sample_sketch_dirmult(std::uint64_t n, const HashSpec& spec, double theta, std::uint64_t seed) {
  if (!(theta > 0.0)) throw DomainError("dirichlet-multinomial sampler needs theta > 0");
  Sketch sketch(spec);
  std::vector<std::uint32_t> history;
  history.reserve(n);
  Rng rng = make_rng(seed);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t bucket = 0;
    if (bernoulli(rng, theta / (theta + static_cast<double>(i)))) {
      bucket = static_cast<std::uint32_t>(uniform_below(rng, spec.width));
    } else {
      bucket = history[uniform_below(rng, i)];
    }
    history.push_back(bucket);
    sketch.add_to_bucket(bucket);
  }
  return sketch;
}

inline Sketch sample_sketch_dirmult(std::uint64_t n, std::uint32_t width, double theta, std::uint64_t seed) {
  HashSpec spec;
  spec.width = width;
  return sample_sketch_dirmult(n, spec, theta, seed);
}

/// Pr[K_n = k] for k = 0..n (entry 0 is nonzero only for n = 0).
inline std::vector<double> dist_distinct(std::uint64_t n, const PriorParams& params) {
  params.validate();
  if (n > 1000) throw DomainError("dist_distinct: n > 1000 is not supported");
  if (params.theta == 0.0) throw DomainError("dist_distinct: theta = 0 is not supported");
  std::vector<double> p(n + 1, 0.0);
  if (n == 0) {
    p[0] = 1.0;
    return p;
  }
  const double theta = params.theta;
  const double alpha = params.alpha;
  // For theta in (-alpha, 0) both (theta/alpha)_(k) and (theta)_(n) are
  // negative; their ratio is positive and we work with magnitudes.
  auto log_abs_rising = [](double a, std::uint64_t u) {
    if (u == 0) return 0.0;
    if (a > 0.0) return log_rising_factorial(a, u);
    return std::log(-a) + (u > 1 ? log_rising_factorial(a + 1.0, u - 1) : 0.0);
  };
  const double log_norm = log_abs_rising(theta, n);
  if (alpha > 0.0) {
    const GfcRow row = gfc_row(n, alpha);
    for (std::uint64_t k = 1; k <= n; ++k) {
      p[k] = std::exp(log_abs_rising(theta / alpha, k) + row.log_values[k] - log_norm);
    }
  } else {
    const LogSeq stir = log_stirling_row(n);
    for (std::uint64_t k = 1; k <= n; ++k) {
      p[k] = std::exp(static_cast<double>(k) * std::log(theta) + stir[k] - log_norm);
    }
  }
  return p;
}

} // namespace bnps
