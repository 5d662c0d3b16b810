#pragma once

// Estimators from a sketch under a Dirichlet process prior: the
// Dirichlet-Multinomial sketch likelihood, empirical-Bayes theta, and the
// closed-form coverage, frequency-count and distinct-count estimators.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "bnpsketch/errors.hpp"
#include "bnpsketch/numkit.hpp"
#include "bnpsketch/report.hpp"
#include "bnpsketch/sketch.hpp"

namespace bnps {

/// Distinct bucket counts with their multiplicities, ascending.
struct CountProfile {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> groups;
  std::uint64_t n = 0;
  std::uint32_t width = 0;

  explicit CountProfile(std::span<const std::uint64_t> counts) : width(static_cast<std::uint32_t>(counts.size())) {
    std::map<std::uint64_t, std::uint64_t> hist;
    for (std::uint64_t c : counts) {
      ++hist[c];
      n += c;
    }
    groups.assign(hist.begin(), hist.end());
  }

  [[nodiscard]] std::uint64_t max_count() const { return groups.empty() ? 0 : groups.back().first; }
};

namespace detail {

inline double log_multinomial(const CountProfile& prof) {
  double s = log_factorial(prof.n);
  for (auto [c, mult] : prof.groups) s -= static_cast<double>(mult) * log_factorial(c);
  return s;
}

inline void check_theta(double theta) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive, got " + std::to_string(theta));
}

} // namespace detail

/// log Pr[C_n = c] under the Dirichlet-Multinomial(n, theta/J, ..., theta/J) law.
inline double dp_loglik(const CountProfile& prof, double theta) {
  detail::check_theta(theta);
  const double a = theta / prof.width;
  double s = detail::log_multinomial(prof) - log_rising_factorial(theta, prof.n);
  for (auto [c, mult] : prof.groups) s += static_cast<double>(mult) * log_rising_factorial(a, c);
  return s;
}

inline double dp_loglik(const Sketch& sketch, double theta) { return dp_loglik(CountProfile(sketch.counts()), theta); }

struct ThetaFit {
  double theta = 0.0;
  double loglik = 0.0;
  bool boundary_hit = false;
};

inline constexpr double default_theta_lo = 1e-3;
inline constexpr double default_theta_hi = 1e9;

/// Maximum marginal likelihood theta by golden-section search over log theta
/// (the likelihood is log-concave there, hence unimodal).
inline ThetaFit dp_fit_theta(const CountProfile& prof, double theta_lo = default_theta_lo,
                             double theta_hi = default_theta_hi) {
  if (!(theta_lo > 0.0 && theta_lo < theta_hi)) throw DomainError("theta bounds must satisfy 0 < lo < hi");
  if (prof.n == 0) throw DomainError("cannot fit theta on an empty sketch (flat likelihood)");
  auto f = [&prof](double x) { return dp_loglik(prof, std::exp(x)); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(theta_lo);
  double hi = std::log(theta_hi);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > 1e-6 * std::max(1.0, std::abs(0.5 * (lo + hi)))) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  ThetaFit fit;
  const double x = f1 >= f2 ? x1 : x2;
  fit.theta = std::exp(x);
  fit.loglik = std::max(f1, f2);
  // Monotone likelihoods pin the optimum to a bound.
  const double f_lo = f(std::log(theta_lo));
  const double f_hi = f(std::log(theta_hi));
  if (f_hi >= fit.loglik) {
    fit = {theta_hi, f_hi, true};
  } else if (f_lo >= fit.loglik) {
    fit = {theta_lo, f_lo, true};
  }
  return fit;
}

inline ThetaFit dp_fit_theta(const Sketch& sketch, double theta_lo = default_theta_lo,
                             double theta_hi = default_theta_hi) {
  return dp_fit_theta(CountProfile(sketch.counts()), theta_lo, theta_hi);
}

/// Coverage estimator of order r:
///   (theta/J) r! / (theta+n) sum_j binom(c_j, r) (theta/J)_(c_j - r) / (theta/J)_(c_j).
/// Each bucket term is r! binom(c, r) / (a + c - r)_(r), i.e. a ratio of two
/// r-term rising factorials, which keeps it accurate for large c.
inline double dp_coverage(const CountProfile& prof, double theta, std::uint64_t r) {
  detail::check_theta(theta);
  if (r > prof.max_count()) return 0.0;
  if (r == 0) return theta / (theta + static_cast<double>(prof.n));
  const double a = theta / prof.width;
  LogSeq terms;
  terms.reserve(prof.groups.size());
  for (auto [c, mult] : prof.groups) {
    if (c < r) continue;
    const double falling = r == 0 ? 0.0 : log_rising_factorial(static_cast<double>(c - r + 1), r);
    terms.push_back(std::log(static_cast<double>(mult)) + falling - log_rising_factorial(a + static_cast<double>(c - r), r));
  }
  return std::exp(std::log(a) - std::log(theta + static_cast<double>(prof.n)) + logsumexp(terms));
}

inline double dp_coverage(const Sketch& sketch, double theta, std::uint64_t r) {
  return dp_coverage(CountProfile(sketch.counts()), theta, r);
}

/// Expected number of symbols with frequency r: ((theta + n)/r) p_r.
inline double dp_freq_counts(const CountProfile& prof, double theta, std::uint64_t r) {
  if (r == 0) throw DomainError("frequency counts are defined for r >= 1");
  return (theta + static_cast<double>(prof.n)) / static_cast<double>(r) * dp_coverage(prof, theta, r);
}

inline double dp_freq_counts(const Sketch& sketch, double theta, std::uint64_t r) {
  return dp_freq_counts(CountProfile(sketch.counts()), theta, r);
}

/// Expected number of distinct symbols, sum_j sum_{m < c_j} a / (a + m) with
/// a = theta/J. Above 1e6 per bucket the sum is a (psi(a + c) - psi(a)).
inline double dp_distinct(const CountProfile& prof, double theta) {
  detail::check_theta(theta);
  const double a = theta / prof.width;
  double total = 0.0;
  for (auto [c, mult] : prof.groups) {
    double h = 0.0;
    if (c > 1'000'000) {
      h = a * (digamma(a + static_cast<double>(c)) - digamma(a));
    } else {
      for (std::uint64_t m = c; m-- > 0;) h += a / (a + static_cast<double>(m));
    }
    total += static_cast<double>(mult) * h;
  }
  return total;
}

inline double dp_distinct(const Sketch& sketch, double theta) { return dp_distinct(CountProfile(sketch.counts()), theta); }

/// The digamma form -theta psi(1 - a) + a sum_j psi(1 - a - c_j); has poles
/// whenever a = theta/J is a positive integer. Kept for cross-checking.
inline double dp_distinct_digamma_form(const CountProfile& prof, double theta) {
  detail::check_theta(theta);
  const double a = theta / prof.width;
  double s = -theta * digamma(1.0 - a);
  for (auto [c, mult] : prof.groups) s += a * static_cast<double>(mult) * digamma(1.0 - a - static_cast<double>(c));
  return s;
}

/// Where theta comes from: a fixed value or a marginal-likelihood fit.
struct ThetaSource {
  std::optional<double> given;
  double fit_lo = default_theta_lo;
  double fit_hi = default_theta_hi;

  static ThetaSource fixed(double theta) { return {theta, default_theta_lo, default_theta_hi}; }
  static ThetaSource fit(double lo = default_theta_lo, double hi = default_theta_hi) { return {std::nullopt, lo, hi}; }
};

/// All DP estimates for r = 0..r_max (default: the largest bucket count).
inline EstimateReport dp_report(const Sketch& sketch, const ThetaSource& source,
                                std::optional<std::uint64_t> r_max = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  const CountProfile prof(sketch.counts());
  EstimateReport rep;
  rep.n = prof.n;
  rep.width = prof.width;
  rep.method = EstimateMethod::dp_exact;
  if (source.given) {
    rep.prior = {0.0, *source.given};
    rep.prior_source = PriorSource::given;
  } else {
    const ThetaFit fit = dp_fit_theta(prof, source.fit_lo, source.fit_hi);
    rep.prior = {0.0, fit.theta};
    rep.prior_source = PriorSource::eb_mle;
    rep.boundary_hit = fit.boundary_hit;
  }
  const double theta = rep.prior.theta;
  detail::check_theta(theta);
  const std::uint64_t rm = r_max.value_or(prof.max_count());
  rep.coverage.assign(rm + 1, 0.0);
  rep.freq_counts.assign(rm + 1, 0.0);
  for (std::uint64_t r = 0; r <= rm; ++r) {
    rep.coverage[r] = dp_coverage(prof, theta, r);
    if (r >= 1) rep.freq_counts[r] = (theta + static_cast<double>(prof.n)) / static_cast<double>(r) * rep.coverage[r];
  }
  rep.distinct = dp_distinct(prof, theta);
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

} // namespace bnps
