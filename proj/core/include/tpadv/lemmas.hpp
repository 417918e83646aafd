#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tpadv::lemmas {

/// Outcome of one numerical inequality check.
struct LemmaCheck {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t violations = 0;
  /// Smallest observed (rhs - lhs) in the direction of the inequality,
  /// or the margin relevant to the check; negative means a violation.
  long double worst_slack = 0.0L;
  bool pass = false;
  std::string detail;
};

/// Grid for the W inequalities: k in [0, k_max], alpha in alpha_grid(alpha_max).
struct WGrid {
  std::uint64_t k_max = 1024;
  std::uint64_t alpha_max = std::uint64_t{1} << 20;
};

/// Every integer up to 4096, then 256 evenly spaced points per octave up to
/// alpha_max (inclusive).
std::vector<std::uint64_t> alpha_grid(std::uint64_t alpha_max);

/// ln W(k, a) <= -k(k-1)/(2a) for k <= a.
LemmaCheck check_w_upper(const WGrid& grid = {});
/// ln(1-x) >= -x - x^2 on [0, 1/2] with the given step.
LemmaCheck check_ln_upper(long double step = 1e-3L);
/// ln W(k, a) >= -k(k-1)/(2a) - k^3/(3a^2) for 1 <= k <= a/2.
LemmaCheck check_w_lower(const WGrid& grid = {});
/// ln W(2k, 2a) + C(2k,2)/(2a) >= 2(ln W(k,a) + C(k,2)/a) - (k/a)^2/2 for 1 <= k <= a/2.
LemmaCheck check_more_w(const WGrid& grid = {});

/// Exhaustive search over D for B in {2, 4}, capacities 2^m with m <= 3 and
/// q <= max_q: the maximum of F is attained at the most balanced profile
/// (all-equal when B | q) and is <= 0 when q < B; for q a power of two, F is
/// bounded by the closed-form right-hand side.
LemmaCheck check_f_maximizer(std::uint64_t max_q = 8);

/// R <= exp(q^2 / 2^(n+m+1) - X / 2^m) for every transcript with n <= max_n,
/// m < n, q in {2, 4, 8, 16} and q <= 2^n (q <= 2^(n-1) without
/// include_full_domain). R and X depend on a transcript only through its count
/// profile, so each profile is checked once and stands for all of its
/// transcripts. The bound does not hold at q = 2^n in general: (4, 3, 16) with
/// profile {8,8} has ln R = 1.6277 > 1.5. Violating cells are listed in detail.
LemmaCheck check_ln_r_upper(int max_n = 4, bool include_full_domain = true);

/// Closed-form E X^4 < q^2 (q-1)^2 / B^2 at each (B, q).
LemmaCheck check_fourth_moment(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cells = {
                                   {2, 1024}, {4, 2048}});

/// phi < 200 on a grid of [-10, 10] and at its critical point; the expanded
/// and factored forms agree.
LemmaCheck check_phi_bound(long double step = 1e-3L);

/// E phi(c X) > 1/2 from closed-form moments at each (B, q).
LemmaCheck check_expected_phi(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cells = {
                                  {2, 512}, {2, 1024}, {4, 2048}});

/// Monte Carlo Pr(X > threshold) > 1/400 beyond 4 standard errors.
LemmaCheck check_polynomial_tail(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers = 1);

struct SuiteOptions {
  WGrid grid{};
  std::uint64_t tail_trials = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Every check above on its default grid, with tail checks at (B=2, q=512)
/// and (B=4, q=2048).
std::vector<LemmaCheck> run_suite(const SuiteOptions& opts = {});

}  // namespace tpadv::lemmas
