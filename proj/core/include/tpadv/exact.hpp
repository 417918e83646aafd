#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tpadv/core.hpp"

namespace tpadv {

/// Which of the two advantage identities to sum:
/// E max{R-1, 0} (r_greater) or E max{1-R, 0} (r_less).
enum class Direction { r_greater, r_less };

std::string to_string(Direction d);

/// A count profile with the number of transcripts mapping to it and that
/// number divided by B^q.
struct ProfileWeight {
  CountProfile profile;
  Integer transcript_count;
  Scalar probability;
};

struct AdvantageResult {
  Scalar value;
  Direction direction = Direction::r_greater;
  std::uint64_t profiles_enumerated = 0;
};

/// Ceilings beyond which exact routines refuse to run. Configuration, not law.
struct EnumerationLimits {
  std::uint64_t max_profiles = 1'000'000;
  std::uint64_t max_transcripts = 10'000'000;
};

/// Exact rational arithmetic is offered while 2^n <= 2^16 and q <= 2^12.
bool exact_arithmetic_supported(const Params& p);
void require_exact_arithmetic(const Params& p);

/// Number of partitions of q into at most `max_parts` parts, each at most
/// `max_part`. Saturates at UINT64_MAX.
std::uint64_t count_partitions(std::uint64_t q, std::uint64_t max_parts, std::uint64_t max_part);

/// Number of profiles enumerate_profiles() would visit.
std::uint64_t profile_count(const Params& p);

/// B^q if it fits in 64 bits, otherwise nullopt.
std::optional<std::uint64_t> transcript_count(const Params& p);

using ProfileVisitor = std::function<void(const ProfileWeight&)>;

/// Visits every partition of q into at most B parts, in descending-part
/// lexicographic order ({q}, {q-1,1}, {q-2,2}, ...), including partitions
/// with a part above 2^m. Counts are exact in both modes; in fast mode the
/// probability is a long double. Throws InfeasibleError above the ceiling.
void enumerate_profiles(const Params& p, Arithmetic mode, const ProfileVisitor& visit,
                        const EnumerationLimits& limits = {});

std::vector<ProfileWeight> enumerate_profiles(const Params& p, Arithmetic mode,
                                              const EnumerationLimits& limits = {});

struct ExactOptions {
  Direction direction = Direction::r_greater;
  Arithmetic arithmetic = Arithmetic::exact;
  EnumerationLimits limits{};
  unsigned workers = 1;
};

/// Adv_{n,m}(q) summed over count profiles.
///
/// Only profiles inside D (every part <= 2^m) are visited. Profiles outside
/// D have R = 0; the r_less identity adds their total mass as the complement
/// of the mass inside D. profiles_enumerated counts the visited profiles.
AdvantageResult exact_advantage(const Params& p, const ExactOptions& opts = {});

/// Adv_{n,m}(q) by iterating all B^q transcripts; exact arithmetic only.
AdvantageResult brute_force_advantage(const Params& p, Direction direction = Direction::r_greater,
                                      const EnumerationLimits& limits = {});

/// F(d) = sum over buckets of ln W(d, 2^m) + C(d,2)/2^m. Requires d in D.
long double profile_score(const CountProfile& prof, const Params& p);

struct McOptions {
  Direction direction = Direction::r_less;
  Arithmetic arithmetic = Arithmetic::fast;
  unsigned workers = 1;
};

struct McEstimate {
  long double mean = 0.0L;
  /// Absent when fewer than two trials were run.
  std::optional<long double> standard_error;
  std::uint64_t trials = 0;
};

/// Monte Carlo estimate of E max{1-R, 0} (or E max{R-1, 0}) over uniform
/// transcripts. Trials are cut into fixed-size chunks; chunk c draws from
/// Rng(seed, c) so the result depends on the seed only, not on `workers`.
McEstimate mc_advantage(const Params& p, std::uint64_t trials, std::uint64_t seed,
                        const McOptions& opts = {});

inline constexpr std::uint64_t kMonteCarloChunk = 4096;

}  // namespace tpadv
