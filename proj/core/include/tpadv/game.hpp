#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "tpadv/core.hpp"
#include "tpadv/exact.hpp"

namespace tpadv {

enum class OracleKind { random_function, truncated_permutation };

/// A deterministic distinguisher: maps a transcript (through its count
/// profile) to an output bit.
struct Rule {
  enum class Kind {
    likelihood_less_than_one,
    likelihood_greater_than_one,
    collision_threshold,
    constant,
  };

  Kind kind = Kind::likelihood_greater_than_one;
  /// Collision rule: output 1 iff X > threshold. Constant rule: output 1 iff threshold > 0.
  long double threshold = 0.0L;

  static Rule likelihood(Direction d);
  static Rule collision(long double threshold);
  static Rule constant(bool output);

  std::string to_string() const;
};

/// Output 1 iff R > 1 (r_greater) or R < 1 (r_less). Ties output 0.
Rule optimal_rule(Direction direction);

/// (1/10) sqrt(q(q-1)) / 2^((n-m)/2). Requires q >= 2.
long double collision_rule_threshold(const Params& p);

/// Evaluates a rule on count profiles for one Params. Likelihood decisions are
/// exact (big-integer comparison of prod C^(falling d) * B^q with 2^n^(falling q))
/// when exact arithmetic is supported, and in log space otherwise; they are
/// memoised per profile.
class RuleEvaluator {
 public:
  RuleEvaluator(const Params& p, Rule rule);
  bool accepts(const CountProfile& prof);

 private:
  int compare_ratio_with_one(const CountProfile& prof) const;

  Params params_;
  Rule rule_;
  bool exact_;
  Integer uniform_mass_;  // B^q
  Integer injective_;     // N^(falling q)
  std::optional<LogRatioTable> table_;
  std::map<CountProfile, bool> memo_;
};

struct GameResult {
  std::uint64_t trials_per_arm = 0;
  long double accept_rate_function = 0.0L;
  long double accept_rate_permutation = 0.0L;
  long double empirical_advantage = 0.0L;
  long double standard_error = 0.0L;
};

/// Runs `trials_per_arm` transcripts under each oracle and applies the rule.
/// Chunk c of the function arm draws from Rng(seed, 2c) and of the
/// permutation arm from Rng(seed, 2c+1); results do not depend on `workers`.
GameResult play_game(const Params& p, const Rule& rule, std::uint64_t trials_per_arm,
                     std::uint64_t seed, unsigned workers = 1);

inline constexpr std::uint64_t kGameChunk = 4096;

/// |sum over accepted transcripts of (R - 1)| / B^q by full profile enumeration.
Rational rule_advantage_exact(const Params& p, const Rule& rule,
                              const EnumerationLimits& limits = {});

}  // namespace tpadv
