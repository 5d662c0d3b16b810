#pragma once

// Ground truth from raw (unsketched) samples: true coverage probabilities,
// partition statistics, and the raw-data Bayesian nonparametric estimator.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bnpsketch/errors.hpp"
#include "bnpsketch/genmodel.hpp"

namespace bnps {

/// K_n and the frequency-of-frequencies m[r] = M_{r,n}, r = 1..n (m[0] = 0).
struct PartitionStats {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::vector<std::uint64_t> m{0};

  [[nodiscard]] std::uint64_t m_at(std::uint64_t r) const { return r < m.size() ? m[r] : 0; }
};

inline std::unordered_map<std::uint64_t, std::uint64_t> symbol_frequencies(const std::vector<std::uint64_t>& symbols) {
  std::unordered_map<std::uint64_t, std::uint64_t> freq;
  freq.reserve(symbols.size());
  for (std::uint64_t s : symbols) ++freq[s];
  return freq;
}

inline PartitionStats partition_stats(const std::vector<std::uint64_t>& symbols) {
  PartitionStats st;
  st.n = symbols.size();
  st.m.assign(symbols.size() + 1, 0);
  for (const auto& [sym, count] : symbol_frequencies(symbols)) {
    ++st.m[count];
    ++st.k;
  }
  return st;
}

inline PartitionStats partition_stats(const RawSample& sample) { return partition_stats(sample.symbols); }

/// True coverage probabilities p_r for r = 0..r_max: the total probability
/// of the symbols seen exactly r times. r = 0 (the missing mass) is the
/// uninstantiated remainder plus instantiated atoms that were never drawn.
inline std::vector<double> true_coverage_all(const RawSample& sample, std::uint64_t r_max) {
  if (!sample.weights) throw DataError("true_coverage requires a sample with atom weights");
  const auto& w = *sample.weights;
  std::vector<std::uint64_t> counts(w.size(), 0);
  for (std::uint64_t s : sample.symbols) {
    if (s >= w.size()) throw DataError("sample symbol has no recorded weight");
    ++counts[s];
  }
  std::vector<double> cov(r_max + 1, 0.0);
  cov[0] = sample.residual_mass;
  for (std::size_t id = 0; id < w.size(); ++id) {
    if (counts[id] <= r_max) cov[counts[id]] += w[id];
  }
  return cov;
}

inline double true_coverage(const RawSample& sample, std::uint64_t r) { return true_coverage_all(sample, r)[r]; }

/// Posterior-predictive estimator from raw data:
///   (theta + k alpha)/(theta + n) for r = 0, m_r (r - alpha)/(theta + n) for r >= 1.
inline double raw_bnp_coverage(const PartitionStats& stats, std::uint64_t n, const PriorParams& params, std::uint64_t r) {
  params.validate();
  const double denom = params.theta + static_cast<double>(n);
  if (r == 0) return (params.theta + static_cast<double>(stats.k) * params.alpha) / denom;
  return static_cast<double>(stats.m_at(r)) * (static_cast<double>(r) - params.alpha) / denom;
}

/// Classical Good-Turing (r+1) m_{r+1} / n; comparison column only.
inline double good_turing_coverage(const PartitionStats& stats, std::uint64_t r) {
  if (stats.n == 0) return r == 0 ? 1.0 : 0.0;
  return static_cast<double>(r + 1) * static_cast<double>(stats.m_at(r + 1)) / static_cast<double>(stats.n);
}

} // namespace bnps
