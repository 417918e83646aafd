#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "tpadv/numeric.hpp"
#include "tpadv/params.hpp"
#include "tpadv/rng.hpp"

namespace tpadv {

// ---------------------------------------------------------------------------
// Falling-factorial weight W(k, alpha) = prod_{j<k} (1 - j/alpha)
// ---------------------------------------------------------------------------

/// alpha^(falling k) = alpha (alpha-1) ... (alpha-k+1); zero once k > alpha.
Integer falling_factorial(std::uint64_t alpha, std::uint64_t k);

Rational w_exact(std::uint64_t k, std::uint64_t alpha);

/// ln W(k, alpha) as a compensated sum of log1p(-j/alpha). Accepts real alpha.
/// Returns LogReal::zero() when an integer j = alpha occurs among the factors.
LogReal w_log(std::uint64_t k, long double alpha);

/// ln W(k, alpha) for integral k too large for 64 bits or for a direct sum:
/// sums directly up to 2^24 terms, Euler-Maclaurin beyond. Requires k-1 < alpha
/// unless alpha is an integer (then W = 0).
LogReal w_log_large(long double k, long double alpha);

/// Mode dispatch: exact rational or extended real.
Scalar w(std::uint64_t k, std::uint64_t alpha, Arithmetic mode);

// ---------------------------------------------------------------------------
// Count profile and collision statistic
// ---------------------------------------------------------------------------

CountProfile count_profile(const Transcript& t, const Params& p);

/// X = #{i<j : t_i = t_j} - C(q,2)/B, computed from the profile.
Rational collision_stat(const CountProfile& prof, const Params& p);
Rational collision_stat(const Transcript& t, const Params& p);

/// Same value as a long double. Exact whenever it fits: B is a power of two.
long double collision_stat_real(const CountProfile& prof, std::uint64_t buckets, std::uint64_t q);

// ---------------------------------------------------------------------------
// Likelihood ratio R = prod W(d, 2^m) / W(q, 2^n)
// ---------------------------------------------------------------------------

/// Exact R. Zero if some part exceeds 2^m.
Rational likelihood_ratio_exact(const CountProfile& prof, const Params& p);

/// ln R with the i-th numerator factor paired against the i-th denominator
/// factor before compensated summation.
LogReal likelihood_ratio_log(const CountProfile& prof, const Params& p);

Scalar likelihood_ratio(const CountProfile& prof, const Params& p, Arithmetic mode);

/// Precomputed log1p(-j/C) and log1p(-j/N) tables for one Params, used by hot
/// loops that evaluate ln R for many profiles.
class LogRatioTable {
 public:
  explicit LogRatioTable(const Params& p);

  /// ln(1 - j/C) for j < min(C, q) + 1; -inf at j = C.
  long double numerator_term(std::uint64_t j) const { return num_[j]; }
  /// ln(1 - j/N) for j < q.
  long double denominator_term(std::uint64_t j) const { return den_[j]; }

  /// Paired, compensated ln R. Same contract as likelihood_ratio_log.
  LogReal log_ratio(std::span<const std::uint64_t> parts) const;

  const Params& params() const { return params_; }

 private:
  Params params_;
  std::vector<long double> num_;
  std::vector<long double> den_;
};

// ---------------------------------------------------------------------------
// Samplers for the two hypotheses
// ---------------------------------------------------------------------------

/// q independent uniform replies from [0, B).
Transcript sample_function_transcript(const Params& p, Rng& rng);
void sample_function_replies(const Params& p, Rng& rng, std::vector<std::uint64_t>& out);

/// Draws q distinct n-bit values uniformly (a uniform permutation evaluated
/// at q distinct queries) and keeps the top n-m bits of each. Distinctness is
/// enforced by rejection against a seen-set; no permutation is materialised.
class PermutationSampler {
 public:
  explicit PermutationSampler(const Params& p);
  void sample(Rng& rng, std::vector<std::uint64_t>& out);

 private:
  Params params_;
  bool dense_;
  std::vector<std::uint8_t> seen_bitmap_;
  std::unordered_set<std::uint64_t> seen_set_;
  std::vector<std::uint64_t> touched_;
};

Transcript sample_permutation_transcript(const Params& p, Rng& rng);

/// Histogram helper shared by samplers: profile of a raw reply buffer.
/// Reorders `scratch` (a copy of the replies).
CountProfile profile_of(std::vector<std::uint64_t>& scratch);

}  // namespace tpadv
