#pragma once

#include <array>
#include <cstdint>

#include "tpadv/numeric.hpp"
#include "tpadv/params.hpp"

namespace tpadv {

/// E X, E X^2, E X^3, E X^4 over uniform transcripts, and p = 1/B.
///
/// The closed forms hold for any number of buckets B >= 1, not only powers of
/// two, so these functions take B directly; the Params overloads use B = 2^(n-m).
struct MomentSet {
  Rational m1;
  Rational m2;
  Rational m3;
  Rational m4;
  Rational p;

  friend bool operator==(const MomentSet&, const MomentSet&) = default;
};

MomentSet moments_closed_form(std::uint64_t buckets, std::uint64_t q);
MomentSet moments_closed_form(const Params& p);

/// Exact average of X^k over all B^q transcripts. Throws InfeasibleError
/// when B^q exceeds `max_transcripts`.
MomentSet moments_brute(std::uint64_t buckets, std::uint64_t q,
                        std::uint64_t max_transcripts = 10'000'000);

struct MomentEstimates {
  std::array<long double, 4> value{};
  /// Jackknife standard errors.
  std::array<long double, 4> standard_error{};
  std::uint64_t trials = 0;
};

MomentEstimates moments_empirical(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                  std::uint64_t seed, unsigned workers = 1);

/// True iff q > 2^((n-m)/2 + 8), i.e. q^2 > 2^16 B.
bool large_query_regime(std::uint64_t buckets, std::uint64_t q);

struct FourthMomentCheck {
  bool holds = false;
  Rational bound;  // q^2 (q-1)^2 / B^2
  Rational m4;
  long double margin = 0.0L;  // bound - m4
};

/// Compares the closed-form E X^4 with q^2 (q-1)^2 / B^2. Throws
/// NotApplicableError outside the large-query regime.
FourthMomentCheck fourth_moment_bound_check(std::uint64_t buckets, std::uint64_t q);
FourthMomentCheck fourth_moment_bound_check(const Params& p);

/// -(x + 5/2)^2 (x - 1/10)(x - 5), evaluated in expanded form.
long double phi(long double x);
/// The factored form, kept separately so the two can be checked against each other.
long double phi_factored(long double x);
/// (103 + sqrt(29409)) / 80, where phi attains its global maximum.
long double phi_argmax();

/// E phi(c X) with c = 2^((n-m)/2) / sqrt(q(q-1)), as a linear combination of moments.
long double expected_phi_scaled(const MomentSet& moments, std::uint64_t buckets, std::uint64_t q);

/// Pr(Y > 0) >= E Y / M for Y <= M. Requires M > 0 and mean_y <= M.
long double markov_lower(long double mean_y, long double bound);

/// (1/10) sqrt(q(q-1)) / 2^((n-m)/2).
long double tail_threshold(std::uint64_t buckets, std::uint64_t q);

struct TailCheck {
  long double probability = 0.0L;
  long double standard_error = 0.0L;
  long double threshold = 0.0L;
  std::uint64_t trials = 0;
  /// probability - 4 SE > 1/400.
  bool confirmed = false;
};

inline constexpr long double kTailFloor = 1.0L / 400.0L;
inline constexpr long double kStandardErrors = 4.0L;

/// Monte Carlo estimate of Pr(X > tail_threshold). Throws NotApplicableError
/// outside the large-query regime.
TailCheck tail_probability_check(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers = 1);

}  // namespace tpadv
