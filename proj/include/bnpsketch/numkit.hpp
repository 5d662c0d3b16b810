#pragma once

// Log-space special functions and combinatorial kernels shared by the
// estimators: rising factorials, digamma, generalized factorial
// coefficients (GFCs), signless Stirling numbers of the first kind,
// log-sum-exp and log-space convolution of nonnegative sequences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "bnpsketch/errors.hpp"

namespace bnps {

/// Logs of a nonnegative sequence; -inf encodes an exact zero.
using LogSeq = std::vector<double>;

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

namespace detail {

// Reentrant log-gamma for positive arguments (std::lgamma writes signgam).
inline double lgamma_pos(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// Tail of the Stirling series for log Gamma, valid for x >= 10.
inline double lgamma_series_tail(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))));
}

} // namespace detail

/// log of the rising factorial (a)_(u) = a (a+1) ... (a+u-1).
///
/// Direct product for u <= 32. Beyond that a log-gamma difference, arranged
/// as (a - 1/2) log1p(u/a) + u log(a+u) - u + series terms when a >= 10 so
/// that large a (e.g. theta near 1e9) does not lose digits to cancellation.
inline double log_rising_factorial(double a, std::uint64_t u) {
  if (!(a > 0.0)) {
    throw DomainError("log_rising_factorial: base must be positive, got " + std::to_string(a));
  }
  if (u == 0) return 0.0;
  if (u <= 32) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < u; ++i) s += std::log(a + static_cast<double>(i));
    return s;
  }
  const double du = static_cast<double>(u);
  if (a >= 10.0) {
    const double b = a + du;
    return (a - 0.5) * std::log1p(du / a) + du * std::log(b) - du + detail::lgamma_series_tail(b) -
           detail::lgamma_series_tail(a);
  }
  return detail::lgamma_pos(a + du) - detail::lgamma_pos(a);
}

inline double log_factorial(std::uint64_t k) { return detail::lgamma_pos(static_cast<double>(k) + 1.0); }

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return neg_inf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Digamma function, absolute accuracy ~1e-12 away from poles.
inline double digamma(double x) {
  if (x <= 0.0) {
    const double nearest = std::round(x);
    if (std::abs(x - nearest) < 1e-12) {
      throw DomainError("digamma: argument " + std::to_string(x) + " is at a pole");
    }
    // psi(x) = psi(1 - x) - pi / tan(pi x)
    return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
  }
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
  return result + std::log(x) - 0.5 * inv - series;
}

/// log(exp(x) + exp(y)) without overflow.
inline double log_add(double x, double y) {
  if (x < y) std::swap(x, y);
  if (y == neg_inf) return x;
  return x + std::log1p(std::exp(y - x));
}

/// log sum exp(xs_i), max-shifted; empty input gives -inf.
inline double logsumexp(std::span<const double> xs) {
  double m = neg_inf;
  for (double x : xs) m = std::max(m, x);
  if (m == neg_inf) return neg_inf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

/// result[t] = log sum_{i+j=t} exp(a[i] + b[j]).
inline LogSeq log_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  LogSeq out(na + nb - 1, neg_inf);

  // Finite support bounds; GFC rows start with -inf entries.
  auto first_finite = [](std::span<const double> s) {
    std::size_t i = 0;
    while (i < s.size() && s[i] == neg_inf) ++i;
    return i;
  };
  auto last_finite = [](std::span<const double> s) {
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] == neg_inf) --i;
    return i; // one past
  };
  const std::size_t a0 = first_finite(a), a1 = last_finite(a);
  const std::size_t b0 = first_finite(b), b1 = last_finite(b);
  if (a0 >= a1 || b0 >= b1) return out;

  for (std::size_t t = a0 + b0; t + 2 <= a1 + b1; ++t) {
    const std::size_t lo = std::max(a0, t >= b1 - 1 ? t - (b1 - 1) : std::size_t{0});
    const std::size_t hi = std::min(a1 - 1, t - b0);
    double m = neg_inf;
    for (std::size_t i = lo; i <= hi; ++i) m = std::max(m, a[i] + b[t - i]);
    if (m == neg_inf) continue;
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) s += std::exp(a[i] + b[t - i] - m);
    out[t] = m + std::log(s);
  }
  return out;
}

/// Log-space row of centered generalized factorial coefficients C(u, v; alpha),
/// v = 0..u, defined by (alpha t)_(u) = sum_v C(u, v; alpha) (t)_(v).
struct GfcRow {
  std::uint64_t u = 0;
  double alpha = 0.0;
  LogSeq log_values{0.0};
};

namespace detail {

inline void check_gfc_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("generalized factorial coefficients need alpha in (0,1), got " + std::to_string(alpha));
  }
}

// Advance row u to row u+1 via C(u+1,v) = (u - v alpha) C(u,v) + alpha C(u,v-1).
// Every coefficient is positive for 1 <= v <= u, so the update stays in log space.
inline void gfc_advance(LogSeq& row, std::uint64_t u, double log_alpha, double alpha) {
  row.push_back(neg_inf);
  for (std::size_t v = u + 1; v >= 1; --v) {
    const double keep = (v <= u) ? row[v] + std::log(static_cast<double>(u) - static_cast<double>(v) * alpha) : neg_inf;
    const double shift = row[v - 1] + log_alpha;
    row[v] = log_add(keep, shift);
  }
  row[0] = neg_inf;
}

} // namespace detail

/// Row u of the GFC triangle, computed by the triangular recursion while
/// retaining a single row.
inline GfcRow gfc_row(std::uint64_t u, double alpha) {
  detail::check_gfc_alpha(alpha);
  GfcRow out;
  out.u = u;
  out.alpha = alpha;
  out.log_values.assign(1, 0.0);
  out.log_values.reserve(u + 1);
  const double log_alpha = std::log(alpha);
  for (std::uint64_t k = 0; k < u; ++k) detail::gfc_advance(out.log_values, k, log_alpha, alpha);
  return out;
}

/// Every GFC row 0..u_max for a fixed alpha; the estimators need rows for
/// all bucket counts and their r-shifted versions.
class GfcTable {
public:
  GfcTable(std::uint64_t u_max, double alpha) : alpha_(alpha) {
    detail::check_gfc_alpha(alpha);
    rows_.reserve(u_max + 1);
    LogSeq row{0.0};
    rows_.push_back(row);
    const double log_alpha = std::log(alpha);
    for (std::uint64_t u = 0; u < u_max; ++u) {
      detail::gfc_advance(row, u, log_alpha, alpha);
      rows_.push_back(row);
    }
  }

  [[nodiscard]] const LogSeq& row(std::uint64_t u) const { return rows_.at(u); }
  [[nodiscard]] std::uint64_t max_u() const { return rows_.size() - 1; }
  [[nodiscard]] double alpha() const { return alpha_; }

private:
  double alpha_;
  std::vector<LogSeq> rows_;
};

/// Explicit alternating-sum formula for C(u, v; alpha),
///   (1/v!) sum_{i=0}^{v} (-1)^i binom(v, i) (-i alpha)_(u),
/// evaluated in 100-digit binary floating point. Small-u oracle only.
inline double gfc_direct(std::uint64_t u, std::uint64_t v, double alpha) {
  detail::check_gfc_alpha(alpha);
  if (u > 20) throw DomainError("gfc_direct: u > 20 is not supported (alternating sum cancels)");
  if (v > u) return 0.0;
  if (v == 0) return u == 0 ? 1.0 : 0.0;
  using big = boost::multiprecision::cpp_bin_float_100;
  const big a{alpha};
  big sum = 0;
  big binom = 1;
  for (std::uint64_t i = 0; i <= v; ++i) {
    if (i > 0) binom = binom * big(v - i + 1) / big(i);
    big rising = 1;
    const big base = -big(i) * a;
    for (std::uint64_t k = 0; k < u; ++k) rising *= (base + big(k));
    sum += (i % 2 == 0 ? binom : -binom) * rising;
  }
  big vfact = 1;
  for (std::uint64_t k = 2; k <= v; ++k) vfact *= big(k);
  return static_cast<double>(sum / vfact);
}

/// Signless Stirling number of the first kind |s(u, v)|, exact.
///
/// Uses |s(u+1, v)| = u |s(u, v)| + |s(u, v-1)|.
inline boost::multiprecision::cpp_int stirling_signless(std::uint64_t u, std::uint64_t v) {
  using boost::multiprecision::cpp_int;
  if (u > 60) throw DomainError("stirling_signless: u > 60, use log_stirling_row");
  if (v > u) return 0;
  std::vector<cpp_int> row{1};
  for (std::uint64_t k = 0; k < u; ++k) {
    std::vector<cpp_int> next(row.size() + 1, 0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[j] += row[j] * k;
      next[j + 1] += row[j];
    }
    row = std::move(next);
  }
  return row[v];
}

/// log |s(u, v)| for v = 0..u, by the same recursion in log space.
inline LogSeq log_stirling_row(std::uint64_t u) {
  LogSeq row{0.0};
  row.reserve(u + 1);
  for (std::uint64_t k = 0; k < u; ++k) {
    row.push_back(neg_inf);
    const double lk = k == 0 ? neg_inf : std::log(static_cast<double>(k));
    for (std::size_t v = k + 1; v >= 1; --v) row[v] = log_add(row[v] + lk, row[v - 1]);
    row[0] = row[0] + lk;
  }
  return row;
}

} // namespace bnps
