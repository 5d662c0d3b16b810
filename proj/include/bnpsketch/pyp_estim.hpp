#pragma once

// Estimators from a sketch under a Pitman-Yor process prior.
//
// The exact estimators involve sums over every allocation i = (i_1..i_J) of
// latent block counts to buckets, with summands of the form
//   f(|i|) * prod_s C(c_s, i_s; alpha) / J^{i_s}.
// Because f depends on i only through the total |i|, each such sum equals
// sum_t f(t) exp(W[t]) where W is the log-space convolution of the per-bucket
// sequences g_s[i] = log(C(c_s, i; alpha) / J^i). Leave-one-bucket-out
// variants reuse prefix and suffix partial convolutions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "bnpsketch/dp_estim.hpp"
#include "bnpsketch/errors.hpp"
#include "bnpsketch/genmodel.hpp"
#include "bnpsketch/numkit.hpp"
#include "bnpsketch/random.hpp"
#include "bnpsketch/report.hpp"
#include "bnpsketch/sketch.hpp"

namespace bnps {

inline constexpr std::uint64_t default_exact_cap = 2000;

namespace detail {

inline void check_pyp_params(const PriorParams& p) {
  p.validate_for_estimation();
  if (!(p.alpha > 0.0)) throw DomainError("Pitman-Yor estimators need alpha in (0,1); use the DP estimators for alpha = 0");
}

inline void check_exact_cap(std::uint64_t n, std::uint64_t cap) {
  if (n > cap) {
    throw ExactCapExceeded("exact Pitman-Yor evaluation refused: n = " + std::to_string(n) + " exceeds the cap of " +
                           std::to_string(cap) + "; use the Monte Carlo method (--method mc) instead");
  }
}

// log of C(u, i; alpha) / J^i for i = 0..u.
inline LogSeq scaled_gfc(const GfcTable& table, std::uint64_t u, double log_width) {
  LogSeq g = table.row(u);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= static_cast<double>(i) * log_width;
  return g;
}

// log (a)_(t) for t = 0..t_max.
inline LogSeq log_rising_table(double a, std::uint64_t t_max) {
  LogSeq out(t_max + 1, 0.0);
  for (std::uint64_t t = 1; t <= t_max; ++t) out[t] = out[t - 1] + std::log(a + static_cast<double>(t - 1));
  return out;
}

// sum_t f(t) exp(w[t]) in log space.
inline double weighted_total(const LogSeq& w, const LogSeq& log_f) {
  LogSeq terms(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) terms[t] = w[t] + log_f[t];
  return logsumexp(terms);
}

// m-fold log-space self-convolution by repeated squaring.
inline LogSeq log_power(const LogSeq& g, std::uint64_t m) {
  LogSeq result{0.0};
  LogSeq base = g;
  while (m > 0) {
    if (m & 1) result = log_convolve(result, base);
    m >>= 1;
    if (m > 0) base = log_convolve(base, base);
  }
  return result;
}

} // namespace detail

/// Per-bucket latent block-count sequences, their total convolution W, and
/// prefix/suffix partial convolutions for leave-one-bucket-out replacement.
struct LogBlockWeights {
  double alpha = 0.0;
  std::uint32_t width = 0;
  std::vector<LogSeq> per_bucket;
  std::vector<LogSeq> prefix; // prefix[j] = g_0 * ... * g_{j-1}
  std::vector<LogSeq> suffix; // suffix[j] = g_j * ... * g_{J-1}
  LogSeq total;

  /// W with bucket j's sequence replaced by `replacement`.
  [[nodiscard]] LogSeq replaced(std::size_t j, const LogSeq& replacement) const {
    return log_convolve(log_convolve(prefix.at(j), replacement), suffix.at(j + 1));
  }
};

inline LogBlockWeights block_weights(std::span<const std::uint64_t> counts, double alpha,
                                     std::uint64_t cap = default_exact_cap) {
  std::uint64_t n = 0;
  std::uint64_t c_max = 0;
  for (std::uint64_t c : counts) {
    n += c;
    c_max = std::max(c_max, c);
  }
  detail::check_exact_cap(n, cap);
  const GfcTable table(c_max, alpha);
  const double log_width = std::log(static_cast<double>(counts.size()));
  LogBlockWeights bw;
  bw.alpha = alpha;
  bw.width = static_cast<std::uint32_t>(counts.size());
  for (std::uint64_t c : counts) bw.per_bucket.push_back(detail::scaled_gfc(table, c, log_width));
  const std::size_t J = counts.size();
  bw.prefix.assign(J + 1, LogSeq{0.0});
  bw.suffix.assign(J + 1, LogSeq{0.0});
  for (std::size_t j = 0; j < J; ++j) bw.prefix[j + 1] = log_convolve(bw.prefix[j], bw.per_bucket[j]);
  for (std::size_t j = J; j-- > 0;) bw.suffix[j] = log_convolve(bw.per_bucket[j], bw.suffix[j + 1]);
  bw.total = bw.prefix[J];
  return bw;
}

/// Exact Pitman-Yor estimators for one sketch and one (alpha, theta).
///
/// Buckets sharing a count give identical leave-one-out numerators, so the
/// work is organised by distinct count value d: "others" is the convolution
/// of every bucket except one copy of d, and
///   H_d[i] = log sum_a exp(others[a]) ((theta + alpha)/alpha)_(a + i)
/// turns every order r into an O(d) sum against the row for d - r.
class PypExactEvaluator {
public:
  PypExactEvaluator(const CountProfile& prof, const PriorParams& params, std::uint64_t cap = default_exact_cap)
      : prof_(prof), params_(params) {
    detail::check_pyp_params(params);
    detail::check_exact_cap(prof.n, cap);
    const double alpha = params.alpha;
    const double theta = params.theta;
    const std::uint64_t n = prof.n;
    const GfcTable table(prof.max_count(), alpha);
    log_width_ = std::log(static_cast<double>(prof.width));
    gfc_ = std::make_unique<GfcTable>(table);

    const LogSeq log_f_den = detail::log_rising_table(theta / alpha, n + 1);
    const LogSeq log_f_num = detail::log_rising_table(theta / alpha + 1.0, n + 1);

    // Group powers G_d^{m_d}, then prefix/suffix over groups.
    const std::size_t D = prof.groups.size();
    std::vector<LogSeq> g(D), powers(D);
    for (std::size_t d = 0; d < D; ++d) {
      g[d] = detail::scaled_gfc(table, prof.groups[d].first, log_width_);
      powers[d] = detail::log_power(g[d], prof.groups[d].second);
    }
    std::vector<LogSeq> prefix(D + 1, LogSeq{0.0}), suffix(D + 1, LogSeq{0.0});
    for (std::size_t d = 0; d < D; ++d) prefix[d + 1] = log_convolve(prefix[d], powers[d]);
    for (std::size_t d = D; d-- > 0;) suffix[d] = log_convolve(powers[d], suffix[d + 1]);

    log_den_ = detail::weighted_total(prefix[D], log_f_den);

    h_.resize(D);
    for (std::size_t d = 0; d < D; ++d) {
      const std::uint64_t v = prof.groups[d].first;
      const LogSeq rest = detail::log_power(g[d], prof.groups[d].second - 1);
      const LogSeq others = log_convolve(log_convolve(prefix[d], rest), suffix[d + 1]);
      LogSeq& h = h_[d];
      h.assign(v + 1, neg_inf);
      LogSeq terms(others.size());
      for (std::uint64_t i = 0; i <= v; ++i) {
        for (std::size_t a = 0; a < others.size(); ++a) {
          terms[a] = a + i < log_f_num.size() ? others[a] + log_f_num[a + i] : neg_inf;
        }
        h[i] = logsumexp(terms);
      }
    }
  }

  /// log of the normalising sum sum_t (theta/alpha)_(t) exp(W[t]).
  [[nodiscard]] double log_denominator() const { return log_den_; }

  /// log Pr[C_n = c].
  [[nodiscard]] double loglik() const {
    return detail::log_multinomial(prof_) - log_rising_factorial(params_.theta, prof_.n) + log_den_;
  }

  [[nodiscard]] double coverage(std::uint64_t r) const {
    if (r > prof_.max_count()) return 0.0;
    LogSeq terms;
    for (std::size_t d = 0; d < prof_.groups.size(); ++d) {
      const auto [v, mult] = prof_.groups[d];
      if (v < r) continue;
      const LogSeq g = detail::scaled_gfc(*gfc_, v - r, log_width_);
      LogSeq inner(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) inner[i] = g[i] + h_[d][i];
      terms.push_back(std::log(static_cast<double>(mult)) + log_binomial(v, r) + logsumexp(inner));
    }
    const double theta = params_.theta;
    const double log_pre = std::log(theta) - log_width_ + (r == 0 ? 0.0 : log_rising_factorial(1.0 - params_.alpha, r)) -
                           std::log(theta + static_cast<double>(prof_.n));
    return std::exp(log_pre + logsumexp(terms) - log_den_);
  }

  [[nodiscard]] double freq_counts(std::uint64_t r) const {
    if (r == 0) throw DomainError("frequency counts are defined for r >= 1");
    return (params_.theta + static_cast<double>(prof_.n)) / (static_cast<double>(r) - params_.alpha) * coverage(r);
  }

  /// ((theta + n)/alpha) p_0 - theta/alpha.
  [[nodiscard]] double distinct() const {
    const double theta = params_.theta;
    const double alpha = params_.alpha;
    return (theta + static_cast<double>(prof_.n)) / alpha * coverage(0) - theta / alpha;
  }

private:
  CountProfile prof_;
  PriorParams params_;
  double log_width_ = 0.0;
  double log_den_ = 0.0;
  std::unique_ptr<GfcTable> gfc_;
  std::vector<LogSeq> h_;
};

inline double pyp_loglik(const Sketch& sketch, const PriorParams& params, std::uint64_t cap = default_exact_cap) {
  return PypExactEvaluator(CountProfile(sketch.counts()), params, cap).loglik();
}

inline double pyp_coverage_exact(const Sketch& sketch, const PriorParams& params, std::uint64_t r,
                                 std::uint64_t cap = default_exact_cap) {
  return PypExactEvaluator(CountProfile(sketch.counts()), params, cap).coverage(r);
}

inline double pyp_freq_counts(const Sketch& sketch, const PriorParams& params, std::uint64_t r,
                              std::uint64_t cap = default_exact_cap) {
  return PypExactEvaluator(CountProfile(sketch.counts()), params, cap).freq_counts(r);
}

inline double pyp_distinct(const Sketch& sketch, const PriorParams& params, std::uint64_t cap = default_exact_cap) {
  return PypExactEvaluator(CountProfile(sketch.counts()), params, cap).distinct();
}

// ---------------------------------------------------------------------------
// Monte Carlo path

enum class Debias { none, tin };

inline std::string to_string(Debias d) { return d == Debias::tin ? "tin" : "none"; }

inline Debias debias_from_string(std::string_view s) {
  if (s == "none") return Debias::none;
  if (s == "tin") return Debias::tin;
  throw DataError("unknown debias mode: " + std::string(s));
}

struct McEstimate {
  std::vector<double> value;  // indexed by r
  std::vector<double> stderr_; // delta-method standard error, indexed by r
};

namespace detail {

// Streaming moments of (A, B) pairs given as logs, each max-shifted so that
// heavy right tails do not overflow.
class LogRatioAccumulator {
public:
  void add(double log_a, double log_b) {
    if (count_ == 0) {
      shift_a_ = log_a;
      shift_b_ = log_b;
    }
    if (log_a > shift_a_) rescale_a(log_a);
    if (log_b > shift_b_) rescale_b(log_b);
    const double a = std::exp(log_a - shift_a_);
    const double b = std::exp(log_b - shift_b_);
    ++count_;
    sa_ += a;
    sb_ += b;
    saa_ += a * a;
    sbb_ += b * b;
    sab_ += a * b;
  }

  struct Result {
    double ratio = 0.0;
    double stderr_ = 0.0;
  };

  // E[A]/E[B], optionally with Tin's second-order bias correction
  //   R (1 + cov(A,B)/(N mA mB) - var(B)/(N mB^2)).
  [[nodiscard]] Result ratio(Debias debias) const {
    const double N = static_cast<double>(count_);
    const double ma = sa_ / N;
    const double mb = sb_ / N;
    const double var_a = std::max(0.0, (saa_ - N * ma * ma) / (N - 1.0));
    const double var_b = std::max(0.0, (sbb_ - N * mb * mb) / (N - 1.0));
    const double cov = (sab_ - N * ma * mb) / (N - 1.0);
    const double scale = std::exp(shift_a_ - shift_b_);
    const double r_shifted = ma / mb;
    double r = r_shifted;
    if (debias == Debias::tin) r *= 1.0 + cov / (N * ma * mb) - var_b / (N * mb * mb);
    const double var_r = std::max(0.0, (var_a - 2.0 * r_shifted * cov + r_shifted * r_shifted * var_b) / (N * mb * mb));
    return {r * scale, std::sqrt(var_r) * scale};
  }

  [[nodiscard]] std::uint64_t count() const { return count_; }

private:
  void rescale_a(double new_shift) {
    const double s = std::exp(shift_a_ - new_shift);
    sa_ *= s;
    saa_ *= s * s;
    sab_ *= s;
    shift_a_ = new_shift;
  }
  void rescale_b(double new_shift) {
    const double s = std::exp(shift_b_ - new_shift);
    sb_ *= s;
    sbb_ *= s * s;
    sab_ *= s;
    shift_b_ = new_shift;
  }

  std::uint64_t count_ = 0;
  double shift_a_ = 0.0, shift_b_ = 0.0;
  double sa_ = 0.0, sb_ = 0.0, saa_ = 0.0, sbb_ = 0.0, sab_ = 0.0;
};

} // namespace detail

inline constexpr std::uint64_t mc_block_size = 4096;

/// Monte Carlo coverage estimates for r = 0..r_max from independent draws of
/// the per-bucket distinct counts K_{c_s}:
///
///   p_r = (theta/J)(1-alpha)_(r)/(theta+n) sum_j binom(c_j, r)
///         (theta)_(c_j - r)/(theta)_(c_j) E[Z_{r,j}] / E[Z'],
///   Z_{r,j} = ((theta+alpha)/alpha)_(S_j) / (J^{S_j} prod_s (theta/alpha)_(K_{c_s - r delta_sj})),
///   Z'      = (theta/alpha)_(S) / (J^{S} prod_s (theta/alpha)_(K_{c_s})),
///
/// with S = sum_s K_{c_s} and S_j the same sum with K_{c_j} swapped for
/// K_{c_j - r}. Z' carries the unshifted counts: the denominator is the
/// normalising sum over allocations for the observed sketch itself, whose
/// per-bucket probabilities Pr[K_{c_s} = i_s] involve c_s, not c_s - r.
///
/// One trajectory per bucket yields K_{c_j} and every K_{c_j - r} at once, so
/// all j and r share draws; E[sum_j w_j Z_{r,j}] / E[Z'] is then a single
/// ratio of means per r. Estimates are biased upward when Z is highly skewed
/// (large n); Tin's correction reduces but does not remove this.
inline McEstimate pyp_coverage_mc_all(const CountProfile& prof, const PriorParams& params, std::uint64_t r_max,
                                      std::uint64_t num_samples, std::uint64_t seed, Debias debias) {
  detail::check_pyp_params(params);
  if (num_samples < 100) throw DomainError("Monte Carlo path needs at least 100 samples");
  const double alpha = params.alpha;
  const double theta = params.theta;
  const std::uint64_t n = prof.n;
  const std::uint64_t c_max = prof.max_count();
  const std::uint64_t r_top = std::min(r_max, c_max);
  const double log_width = std::log(static_cast<double>(prof.width));

  // Nonzero buckets, expanded from the profile.
  std::vector<std::uint64_t> buckets;
  for (auto [c, mult] : prof.groups) {
    if (c == 0) continue;
    for (std::uint64_t k = 0; k < mult; ++k) buckets.push_back(c);
  }
  std::vector<std::size_t> offset(buckets.size() + 1, 0);
  for (std::size_t j = 0; j < buckets.size(); ++j) offset[j + 1] = offset[j] + buckets[j] + 1;

  const LogSeq lt = detail::log_rising_table(theta / alpha, n + 1);
  const LogSeq lf_num = detail::log_rising_table(theta / alpha + 1.0, n + 1);
  const LogSeq& lf_den = lt;

  // Per-(c, r) deterministic weight log[binom(c, r) / (theta + c - r)_(r)].
  auto log_weight = [&](std::uint64_t c, std::uint64_t r) {
    return log_binomial(c, r) - log_rising_factorial(theta + static_cast<double>(c - r), r);
  };
  std::vector<LogSeq> w(buckets.size());
  for (std::size_t j = 0; j < buckets.size(); ++j) {
    const std::uint64_t c = buckets[j];
    w[j].resize(std::min(c, r_top) + 1);
    for (std::uint64_t r = 0; r < w[j].size(); ++r) w[j][r] = log_weight(c, r);
  }

  std::vector<detail::LogRatioAccumulator> acc(r_top + 1);
  std::vector<std::uint32_t> traj(offset.back());
  LogSeq terms;
  terms.reserve(buckets.size() + 1);
  Rng rng = make_rng(seed);
  for (std::uint64_t i = 0; i < num_samples; ++i) {
    if (i % mc_block_size == 0) rng = make_rng(derive_seed(seed, {i / mc_block_size}));
    std::uint64_t S = 0;
    double L = 0.0;
    for (std::size_t j = 0; j < buckets.size(); ++j) {
      std::span<std::uint32_t> k(traj.data() + offset[j], buckets[j] + 1);
      sample_distinct_prefix_into(k, params, rng);
      S += k.back();
      L += lt[k.back()];
    }
    const double log_zprime = lf_den[S] - static_cast<double>(S) * log_width - L;
    // r = 0: every bucket's Z equals the unshifted one; the J weights are 1
    // (empty buckets included).
    acc[0].add(std::log(static_cast<double>(prof.width)) + lf_num[S] - static_cast<double>(S) * log_width - L,
               log_zprime);
    for (std::uint64_t r = 1; r <= r_top; ++r) {
      terms.clear();
      for (std::size_t j = 0; j < buckets.size(); ++j) {
        const std::uint64_t c = buckets[j];
        if (c < r) continue;
        const std::uint32_t k_full = traj[offset[j] + c];
        const std::uint32_t k_short = traj[offset[j] + c - r];
        const std::uint64_t S_j = S - k_full + k_short;
        const double L_j = L - lt[k_full] + lt[k_short];
        terms.push_back(w[j][r] + lf_num[S_j] - static_cast<double>(S_j) * log_width - L_j);
      }
      acc[r].add(logsumexp(terms), log_zprime);
    }
  }

  McEstimate est;
  est.value.assign(r_max + 1, 0.0);
  est.stderr_.assign(r_max + 1, 0.0);
  for (std::uint64_t r = 0; r <= r_top; ++r) {
    const double log_pre = std::log(theta) - log_width + (r == 0 ? 0.0 : log_rising_factorial(1.0 - alpha, r)) -
                           std::log(theta + static_cast<double>(n));
    const auto res = acc[r].ratio(debias);
    est.value[r] = std::exp(log_pre) * res.ratio;
    est.stderr_[r] = std::exp(log_pre) * res.stderr_;
  }
  return est;
}

struct McValue {
  double value = 0.0;
  double stderr_ = 0.0;
};

inline McValue pyp_coverage_mc(const Sketch& sketch, const PriorParams& params, std::uint64_t r,
                               std::uint64_t num_samples, std::uint64_t seed, Debias debias) {
  const auto est = pyp_coverage_mc_all(CountProfile(sketch.counts()), params, r, num_samples, seed, debias);
  return {est.value[r], est.stderr_[r]};
}

/// Large-n approximation of the missing-mass estimator with equal buckets:
///   n^(alpha-1) J^(1-alpha) Gamma(theta + J alpha - alpha + 1) / Gamma(theta + J alpha).
/// Qualitative only; no error bound is available.
inline double pyp_missing_asymptotic(std::uint64_t n, std::uint32_t width, const PriorParams& params) {
  params.validate();
  if (!(params.alpha > 0.0)) throw DomainError("the asymptotic approximation needs alpha in (0,1)");
  if (n == 0) throw DomainError("the asymptotic approximation needs n >= 1");
  const double J = width;
  const double a = params.alpha;
  const double base = params.theta + J * a;
  return std::exp((a - 1.0) * std::log(static_cast<double>(n)) + (1.0 - a) * std::log(J) +
                  detail::lgamma_pos(base - a + 1.0) - detail::lgamma_pos(base));
}

// ---------------------------------------------------------------------------
// Reports

struct PypOptions {
  EstimateMethod method = EstimateMethod::pyp_exact;
  std::optional<std::uint64_t> r_max;
  std::uint64_t mc_samples = 100'000;
  Debias debias = Debias::none;
  std::uint64_t seed = 0;
  std::uint64_t exact_cap = default_exact_cap;
};

inline EstimateReport pyp_report(const Sketch& sketch, const PriorParams& params, PriorSource source,
                                 const PypOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const CountProfile prof(sketch.counts());
  EstimateReport rep;
  rep.n = prof.n;
  rep.width = prof.width;
  rep.prior = params;
  rep.prior_source = source;
  rep.method = opt.method;
  const std::uint64_t rm = opt.r_max.value_or(prof.max_count());
  const double theta = params.theta;
  const double alpha = params.alpha;
  const double tn = theta + static_cast<double>(prof.n);
  switch (opt.method) {
  case EstimateMethod::pyp_exact: {
    const PypExactEvaluator ev(prof, params, opt.exact_cap);
    rep.coverage.assign(rm + 1, 0.0);
    rep.freq_counts.assign(rm + 1, 0.0);
    for (std::uint64_t r = 0; r <= rm; ++r) {
      rep.coverage[r] = ev.coverage(r);
      if (r >= 1) rep.freq_counts[r] = tn / (static_cast<double>(r) - alpha) * rep.coverage[r];
    }
    break;
  }
  case EstimateMethod::pyp_mc: {
    const McEstimate est = pyp_coverage_mc_all(prof, params, rm, opt.mc_samples, opt.seed, opt.debias);
    rep.coverage = est.value;
    rep.mc_stderr = est.stderr_;
    rep.freq_counts.assign(rm + 1, 0.0);
    for (std::uint64_t r = 1; r <= rm; ++r) rep.freq_counts[r] = tn / (static_cast<double>(r) - alpha) * rep.coverage[r];
    break;
  }
  case EstimateMethod::pyp_asymptotic: {
    detail::check_pyp_params(params);
    rep.coverage = {pyp_missing_asymptotic(prof.n, prof.width, params)};
    rep.freq_counts = {0.0};
    break;
  }
  case EstimateMethod::dp_exact:
    throw DomainError("pyp_report cannot produce dp-exact estimates");
  }
  rep.distinct = tn / alpha * rep.coverage[0] - theta / alpha;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Likelihood-free empirical Bayes for (alpha, theta)

struct WassersteinConfig {
  std::vector<double> alphas;
  std::vector<double> thetas;
  std::uint64_t num_reps = 5;
  std::uint64_t n_prime = 0; // 0: min(n, 10^4)
  std::uint64_t seed = 0;

  static WassersteinConfig defaults() {
    WassersteinConfig cfg;
    for (int i = 0; i < 20; ++i) cfg.alphas.push_back(0.05 * i);
    cfg.thetas = log_grid(1e-1, 1e5, 10);
    return cfg;
  }

  static std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    std::vector<double> g;
    if (points == 1) return {lo};
    for (std::size_t i = 0; i < points; ++i) {
      g.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) /
                                              static_cast<double>(points - 1)));
    }
    return g;
  }
};

struct WassersteinPoint {
  double alpha = 0.0;
  double theta = 0.0;
  double distance = 0.0;
};

struct WassersteinFit {
  PriorParams params;
  double distance = 0.0;
  std::vector<WassersteinPoint> surface;
};

/// Mean absolute difference between two sorted vectors of equal length
/// (the 1-Wasserstein distance between their empirical distributions).
inline double wasserstein_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("wasserstein_sorted: lengths differ");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// Sorted bucket counts of `sketch` multiplied by `scale`.
inline std::vector<double> sorted_scaled_counts(const Sketch& sketch, double scale) {
  std::vector<double> v;
  v.reserve(sketch.width());
  for (std::uint64_t c : sketch.counts()) v.push_back(static_cast<double>(c) * scale);
  std::sort(v.begin(), v.end());
  return v;
}

/// Sketch of n draws from the predictive scheme, each fresh symbol hashed
/// with `spec`. Symbol ids are salted per repetition so that repetitions see
/// independent symbol-to-bucket assignments.
inline Sketch simulate_sketch(const HashSpec& spec, const PriorParams& params, std::uint64_t n, std::uint64_t seed) {
  const std::vector<std::uint64_t> ids = sample_crp_sequence(params, n, derive_seed(seed, {1}));
  const std::uint64_t salt = derive_seed(seed, {2});
  std::vector<std::uint32_t> bucket_of;
  Sketch sk(spec);
  for (std::uint64_t id : ids) {
    while (bucket_of.size() <= id) {
      const std::uint64_t symbol = splitmix64(salt ^ splitmix64(bucket_of.size()));
      bucket_of.push_back(hash_eval_prehashed(spec, symbol_id_prehash(spec.symbol_seed, symbol)));
    }
    sk.add_to_bucket(bucket_of[id]);
  }
  return sk;
}

/// Grid search for the (alpha, theta) whose simulated sketches (same hash,
/// n' draws) are closest in sorted bucket counts to the observed sketch
/// scaled by n'/n. Repetition seeds are shared across grid points. Ties go
/// to the lexicographically smallest (alpha, theta).
inline WassersteinFit wasserstein_fit(const Sketch& sketch, const WassersteinConfig& cfg) {
  if (cfg.alphas.empty() || cfg.thetas.empty()) throw DomainError("wasserstein_fit: empty grid");
  if (cfg.num_reps == 0) throw DomainError("wasserstein_fit: need at least one repetition");
  const std::uint64_t n = sketch.n();
  if (n == 0) throw DomainError("wasserstein_fit: empty sketch");
  const std::uint64_t n_prime = cfg.n_prime == 0 ? std::min<std::uint64_t>(n, 10'000) : cfg.n_prime;
  if (n_prime > n) throw DomainError("wasserstein_fit: n' must not exceed n");
  const std::vector<double> target = sorted_scaled_counts(sketch, static_cast<double>(n_prime) / static_cast<double>(n));

  std::vector<double> alphas = cfg.alphas;
  std::vector<double> thetas = cfg.thetas;
  std::sort(alphas.begin(), alphas.end());
  std::sort(thetas.begin(), thetas.end());

  WassersteinFit fit;
  fit.distance = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    for (double theta : thetas) {
      const PriorParams p{alpha, theta};
      p.validate();
      double total = 0.0;
      for (std::uint64_t rep = 0; rep < cfg.num_reps; ++rep) {
        const Sketch sim = simulate_sketch(sketch.spec(), p, n_prime, derive_seed(cfg.seed, {rep}));
        total += wasserstein_sorted(sorted_scaled_counts(sim, 1.0), target);
      }
      const double dist = total / static_cast<double>(cfg.num_reps);
      fit.surface.push_back({alpha, theta, dist});
      if (dist < fit.distance) {
        fit.distance = dist;
        fit.params = p;
      }
    }
  }
  return fit;
}

} // namespace bnps
