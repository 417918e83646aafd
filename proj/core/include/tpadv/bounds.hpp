#pragma once

#include <string>

#include "tpadv/numeric.hpp"

namespace tpadv::bounds {

// Closed-form advantage bounds and envelopes as functions of (n, m, q).
//
// q is a long double so the n=128 regime (q = 2^64) is representable exactly.
// Every function returns the raw formula value, which may exceed 1; only
// combined_upper and theta_envelope cap at 1. Where a source formula has an
// unspecified asymptotic constant the constant is a parameter defaulting to 1
// and the result is marked reference-only.

struct Flagged {
  long double value = 0.0L;
  bool valid = false;
};

enum class GgBranch { small_m, large_m, out_of_range };
std::string to_string(GgBranch b);

struct GgValue {
  long double value = 0.0L;
  GgBranch branch = GgBranch::out_of_range;
  bool valid() const { return branch != GgBranch::out_of_range; }
};

/// x = q / 2^((n+m)/2).
long double scaled_queries(int n, int m, long double q);

/// 1 - prod_{i=1}^{q-1} (1 - i/2^n); 1 for q > 2^n.
long double birthday_exact(int n, long double q);
/// Exact rational form; requires n <= 63 and q <= 2^20.
Rational birthday_exact_rational(int n, std::uint64_t q);

/// min{ q(q-1)/2^(n+1), 1 }.
long double birthday_upper(int n, int m, long double q);
Rational birthday_upper_rational(int n, std::uint64_t q);

/// c * q^2 / 2^(n+m); valid iff q <= 2^((n+m)/2). Reference-only.
Flagged hall_lower_ref(int n, int m, long double q, long double c = 1.0L);

/// 5 x^(2/3) + (1/2) x^3 / 2^((n-7m)/2).
long double hall_upper(int n, int m, long double q);

/// c * n * q / 2^((n+m)/2); valid iff 2^(n-m) < q < 2^((n+m)/2). Reference-only.
Flagged bi_upper(int n, int m, long double q, long double c = 1.0L);

/// Two-branch bound split at m <= n/3 and n/3 < m <= n - log2(16 n).
/// Outside both ranges the second branch is evaluated and tagged out_of_range.
GgValue gg_upper(int n, int m, long double q);

/// (1/2) sqrt((2^(n-m) - 1) q (q-1) / ((2^n - 1)(2^n - (q-1)))). Throws when q-1 >= 2^n.
long double stam_full(int n, int m, long double q);
/// The radicand above as an exact rational, so stam comparisons can be made
/// without rounding: adv <= stam  <=>  4 adv^2 <= radicand.
Rational stam_radicand(int n, int m, std::uint64_t q);
/// Second form: q / (2 sqrt(1 - (q-1)/2^n) 2^((n+m)/2)).
long double stam_second_form(int n, int m, long double q);

/// q / 2^((m+n)/2); valid iff q <= (3/4) 2^n.
Flagged stam_simplified(int n, int m, long double q);

/// min{ birthday_upper, stam_full (where defined), 1 }.
long double combined_upper(int n, int m, long double q);

/// min{ q^2 / 2^n, q / 2^((n+m)/2), 1 }.
long double theta_envelope(int n, int m, long double q);

struct BoundReport {
  int n = 0;
  int m = 0;
  long double q = 0.0L;
  Flagged birthday_exact;  // valid only when m == 0
  long double birthday_upper = 0.0L;
  Flagged hall_lower_ref;
  long double hall_upper = 0.0L;
  Flagged bi_upper;
  GgValue gg_upper;
  Flagged stam_full;  // invalid when q - 1 >= 2^n
  Flagged stam_simplified;
  long double combined_upper = 0.0L;
  long double theta_envelope = 0.0L;
};

BoundReport report(int n, int m, long double q);

}  // namespace tpadv::bounds
