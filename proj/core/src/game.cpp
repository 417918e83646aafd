#include "tpadv/game.hpp"

#include <cmath>
#include <cstdio>

#include "tpadv/parallel.hpp"

namespace tpadv {

Rule Rule::likelihood(Direction d) {
  return {d == Direction::r_greater ? Kind::likelihood_greater_than_one
                                    : Kind::likelihood_less_than_one,
          0.0L};
}

Rule Rule::collision(long double threshold) {
  if (std::isnan(threshold)) throw Error("Rule: collision threshold must not be NaN");
  return {Kind::collision_threshold, threshold};
}

Rule Rule::constant(bool output) { return {Kind::constant, output ? 1.0L : 0.0L}; }

std::string Rule::to_string() const {
  switch (kind) {
    case Kind::likelihood_less_than_one: return "R<1";
    case Kind::likelihood_greater_than_one: return "R>1";
    case Kind::collision_threshold: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "X>%.17Lg", threshold);
      return buf;
    }
    case Kind::constant: return threshold > 0 ? "const1" : "const0";
  }
  return "?";
}

Rule optimal_rule(Direction direction) { return Rule::likelihood(direction); }

long double collision_rule_threshold(const Params& p) {
  if (p.q() < 2) throw Error("collision_rule_threshold: q must be at least 2");
  const auto q = static_cast<long double>(p.q());
  return std::sqrt(q * (q - 1)) / std::exp2(static_cast<long double>(p.n() - p.m()) / 2.0L) / 10.0L;
}

RuleEvaluator::RuleEvaluator(const Params& p, Rule rule)
    : params_(p), rule_(rule), exact_(exact_arithmetic_supported(p)) {
  const bool likelihood = rule.kind == Rule::Kind::likelihood_greater_than_one ||
                          rule.kind == Rule::Kind::likelihood_less_than_one;
  if (!likelihood) return;
  if (exact_) {
    uniform_mass_ = ipow(p.buckets(), p.q());
    injective_ = falling_factorial(p.domain(), p.q());
  } else {
    table_.emplace(p);
  }
}

int RuleEvaluator::compare_ratio_with_one(const CountProfile& prof) const {
  const auto c = params_.capacity();
  if (!prof.in_domain(c)) return -1;
  if (exact_) {
    Integer scaled = uniform_mass_;
    for (auto d : prof.parts()) scaled *= falling_factorial(c, d);
    const int r = cmp(scaled, injective_);
    return r > 0 ? 1 : (r < 0 ? -1 : 0);
  }
  const LogReal lr = table_->log_ratio(prof.parts());
  if (lr.is_zero() || lr.log() < 0) return -1;
  return lr.log() > 0 ? 1 : 0;
}

bool RuleEvaluator::accepts(const CountProfile& prof) {
  switch (rule_.kind) {
    case Rule::Kind::constant: return rule_.threshold > 0;
    case Rule::Kind::collision_threshold:
      return collision_stat_real(prof, params_.buckets(), params_.q()) > rule_.threshold;
    case Rule::Kind::likelihood_greater_than_one:
    case Rule::Kind::likelihood_less_than_one: break;
  }
  auto it = memo_.find(prof);
  if (it != memo_.end()) return it->second;
  const int sign = compare_ratio_with_one(prof);
  const bool out = rule_.kind == Rule::Kind::likelihood_greater_than_one ? sign > 0 : sign < 0;
  memo_.emplace(prof, out);
  return out;
}

GameResult play_game(const Params& p, const Rule& rule, std::uint64_t trials_per_arm,
                     std::uint64_t seed, unsigned workers) {
  if (trials_per_arm == 0) throw Error("play_game: trials per arm must be at least 1");
  const std::size_t chunks = chunk_count(trials_per_arm, kGameChunk);
  struct ChunkCounts {
    std::uint64_t function_accepts = 0;
    std::uint64_t permutation_accepts = 0;
  };
  std::vector<ChunkCounts> counts(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    RuleEvaluator eval(p, rule);
    PermutationSampler perm(p);
    std::vector<std::uint64_t> replies;
    const std::uint64_t begin = c * kGameChunk;
    const std::uint64_t end = std::min(trials_per_arm, begin + kGameChunk);

    Rng function_rng(seed, 2 * c);
    for (std::uint64_t i = begin; i < end; ++i) {
      sample_function_replies(p, function_rng, replies);
      if (eval.accepts(profile_of(replies))) ++counts[c].function_accepts;
    }
    Rng permutation_rng(seed, 2 * c + 1);
    for (std::uint64_t i = begin; i < end; ++i) {
      perm.sample(permutation_rng, replies);
      if (eval.accepts(profile_of(replies))) ++counts[c].permutation_accepts;
    }
  });

  std::uint64_t fa = 0;
  std::uint64_t pa = 0;
  for (const auto& cc : counts) {
    fa += cc.function_accepts;
    pa += cc.permutation_accepts;
  }
  GameResult g;
  g.trials_per_arm = trials_per_arm;
  const auto n = static_cast<long double>(trials_per_arm);
  g.accept_rate_function = static_cast<long double>(fa) / n;
  g.accept_rate_permutation = static_cast<long double>(pa) / n;
  g.empirical_advantage = std::fabs(g.accept_rate_permutation - g.accept_rate_function);
  const long double vf = g.accept_rate_function * (1 - g.accept_rate_function);
  const long double vp = g.accept_rate_permutation * (1 - g.accept_rate_permutation);
  g.standard_error = std::sqrt((vf + vp) / n);
  return g;
}

Rational rule_advantage_exact(const Params& p, const Rule& rule, const EnumerationLimits& limits) {
  require_exact_arithmetic(p);
  RuleEvaluator eval(p, rule);
  Rational total = 0;
  enumerate_profiles(
      p, Arithmetic::exact,
      [&](const ProfileWeight& pw) {
        if (!eval.accepts(pw.profile)) return;
        const Rational r = likelihood_ratio_exact(pw.profile, p);
        total += pw.probability.rational() * (r - 1);
      },
      limits);
  return abs(total);
}

}  // namespace tpadv
