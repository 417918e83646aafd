#include "tpadv/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "tpadv/core.hpp"

namespace tpadv::bounds {
namespace {

void require_nm(int n, int m) {
  if (n < 1 || m < 0 || m >= n) {
    throw Error("bounds: need 0 <= m < n, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  }
}

void require_q(long double q) {
  if (!(q >= 0) || std::floor(q) != q) throw Error("bounds: q must be a non-negative integer");
}

long double half_exponent(int n, int m) { return static_cast<long double>(n + m) / 2.0L; }

}  // namespace

std::string to_string(GgBranch b) {
  switch (b) {
    case GgBranch::small_m: return "m<=n/3";
    case GgBranch::large_m: return "n/3<m<=n-log2(16n)";
    case GgBranch::out_of_range: return "out-of-range";
  }
  return "?";
}

long double scaled_queries(int n, int m, long double q) {
  require_nm(n, m);
  require_q(q);
  return q * std::exp2(-half_exponent(n, m));
}

long double birthday_exact(int n, long double q) {
  if (n < 1) throw Error("birthday_exact: n must be positive");
  require_q(q);
  if (q < 1) throw Error("birthday_exact: q must be at least 1");
  const long double domain = std::exp2(static_cast<long double>(n));
  if (q > domain) return 1.0L;
  const LogReal w = w_log_large(q, domain);
  if (w.is_zero()) return 1.0L;
  return -std::expm1(w.log());
}

Rational birthday_exact_rational(int n, std::uint64_t q) {
  if (n < 1 || n > 63) throw Error("birthday_exact_rational: n must be in [1, 63]");
  if (q < 1 || q > (std::uint64_t{1} << 20)) {
    throw Error("birthday_exact_rational: q must be in [1, 2^20]");
  }
  const std::uint64_t domain = std::uint64_t{1} << n;
  if (q > domain) return 1;
  return 1 - w_exact(q, domain);
}

long double birthday_upper(int n, int m, long double q) {
  require_nm(n, m);
  require_q(q);
  const long double v = q * (q - 1) * std::exp2(-static_cast<long double>(n + 1));
  return std::min(std::max(v, 0.0L), 1.0L);
}

Rational birthday_upper_rational(int n, std::uint64_t q) {
  if (q == 0) return 0;
  Rational v(to_integer(q) * to_integer(q - 1), pow2(static_cast<unsigned>(n + 1)));
  v.canonicalize();
  return v > 1 ? Rational(1) : v;
}

Flagged hall_lower_ref(int n, int m, long double q, long double c) {
  require_nm(n, m);
  require_q(q);
  const long double x = scaled_queries(n, m, q);
  return {c * x * x, x <= 1.0L};
}

long double hall_upper(int n, int m, long double q) {
  const long double x = scaled_queries(n, m, q);
  const long double e = static_cast<long double>(n - 7 * m) / 2.0L;
  return 5.0L * std::pow(x, 2.0L / 3.0L) + 0.5L * x * x * x * std::exp2(-e);
}

Flagged bi_upper(int n, int m, long double q, long double c) {
  const long double x = scaled_queries(n, m, q);
  const bool valid = q > std::exp2(static_cast<long double>(n - m)) && x < 1.0L;
  return {c * static_cast<long double>(n) * x, valid};
}

GgValue gg_upper(int n, int m, long double q) {
  const long double x = scaled_queries(n, m, q);
  if (3 * m <= n) {
    const long double v = 2.0L * std::cbrt(2.0L) * std::pow(x, 2.0L / 3.0L) +
                          (2.0L * std::sqrt(2.0L) / std::sqrt(3.0L)) * std::pow(x, 1.5L) + x * x;
    return {v, GgBranch::small_m};
  }
  const long double exponent = static_cast<long double>(n) / static_cast<long double>(n - m);
  const long double v = 3.0L * std::pow(x, 2.0L / 3.0L) + 2.0L * x + 5.0L * x * x +
                        0.5L * std::pow(2.0L * x, exponent);
  const bool in_range =
      static_cast<long double>(m) <= static_cast<long double>(n) - std::log2(16.0L * n);
  return {v, in_range ? GgBranch::large_m : GgBranch::out_of_range};
}

long double stam_full(int n, int m, long double q) {
  require_nm(n, m);
  require_q(q);
  const long double domain = std::exp2(static_cast<long double>(n));
  if (q - 1 >= domain) {
    throw Error("stam_full: undefined for q - 1 >= 2^n");
  }
  if (q <= 1) return 0.0L;
  const long double buckets = std::exp2(static_cast<long double>(n - m));
  const long double ratio = (buckets - 1) * q * (q - 1) / ((domain - 1) * (domain - (q - 1)));
  return 0.5L * std::sqrt(ratio);
}

Rational stam_radicand(int n, int m, std::uint64_t q) {
  require_nm(n, m);
  const Integer domain = pow2(static_cast<unsigned>(n));
  const Integer qq = to_integer(q);
  if (qq - 1 >= domain) throw Error("stam_radicand: undefined for q - 1 >= 2^n");
  if (q <= 1) return 0;
  Rational r((pow2(static_cast<unsigned>(n - m)) - 1) * qq * (qq - 1),
             (domain - 1) * (domain - (qq - 1)));
  r.canonicalize();
  return r;
}

long double stam_second_form(int n, int m, long double q) {
  require_nm(n, m);
  require_q(q);
  const long double domain = std::exp2(static_cast<long double>(n));
  if (q - 1 >= domain) throw Error("stam_second_form: undefined for q - 1 >= 2^n");
  const long double x = scaled_queries(n, m, q);
  const long double lq = q < 1 ? 0.0L : q - 1;
  return x / (2.0L * std::sqrt(1.0L - lq / domain));
}

Flagged stam_simplified(int n, int m, long double q) {
  const long double x = scaled_queries(n, m, q);
  const long double limit = 0.75L * std::exp2(static_cast<long double>(n));
  return {x, q <= limit};
}

long double combined_upper(int n, int m, long double q) {
  long double v = std::min(birthday_upper(n, m, q), 1.0L);
  if (q - 1 < std::exp2(static_cast<long double>(n))) v = std::min(v, stam_full(n, m, q));
  return v;
}

long double theta_envelope(int n, int m, long double q) {
  const long double x = scaled_queries(n, m, q);
  const long double birthday = q * q * std::exp2(-static_cast<long double>(n));
  return std::min({birthday, x, 1.0L});
}

BoundReport report(int n, int m, long double q) {
  BoundReport r;
  r.n = n;
  r.m = m;
  r.q = q;
  r.birthday_exact = {q >= 1 ? birthday_exact(n, q) : 0.0L, m == 0};
  r.birthday_upper = birthday_upper(n, m, q);
  r.hall_lower_ref = hall_lower_ref(n, m, q);
  r.hall_upper = hall_upper(n, m, q);
  r.bi_upper = bi_upper(n, m, q);
  r.gg_upper = gg_upper(n, m, q);
  if (q - 1 < std::exp2(static_cast<long double>(n))) {
    r.stam_full = {stam_full(n, m, q), true};
  }
  r.stam_simplified = stam_simplified(n, m, q);
  r.combined_upper = combined_upper(n, m, q);
  r.theta_envelope = theta_envelope(n, m, q);
  return r;
}

}  // namespace tpadv::bounds
