#include "tpadv/moments.hpp"

#include <cmath>
#include <map>
#include <vector>

#include "tpadv/core.hpp"
#include "tpadv/parallel.hpp"
#include "tpadv/rng.hpp"

namespace tpadv {
namespace {

Rational binom(std::uint64_t q, unsigned k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(q), k);
  return Rational(r);
}

void require_buckets(std::uint64_t buckets, std::uint64_t q) {
  if (buckets == 0) throw Error("moments: buckets must be positive");
  if (q == 0) throw Error("moments: q must be at least 1");
}

std::uint64_t buckets_of(const Params& p) { return p.buckets(); }

// Uniform transcript sample -> X, shared by the empirical estimators.
class CollisionSampler {
 public:
  CollisionSampler(std::uint64_t buckets, std::uint64_t q)
      : buckets_(buckets), q_(q), counts_(buckets, 0),
        mean_(static_cast<long double>(q) * static_cast<long double>(q - 1) / 2.0L /
              static_cast<long double>(buckets)) {}

  long double draw(Rng& rng) {
    std::uint64_t pairs = 0;
    for (std::uint64_t i = 0; i < q_; ++i) pairs += counts_[rng.below(buckets_)]++;
    std::fill(counts_.begin(), counts_.end(), 0);
    return static_cast<long double>(pairs) - mean_;
  }

 private:
  std::uint64_t buckets_;
  std::uint64_t q_;
  std::vector<std::uint64_t> counts_;
  long double mean_;
};

constexpr std::uint64_t kMaxSampledBuckets = std::uint64_t{1} << 24;

}  // namespace

MomentSet moments_closed_form(std::uint64_t buckets, std::uint64_t q) {
  require_buckets(buckets, q);
  const Rational p(1, to_integer(buckets));
  const Rational one(1);
  const Rational c2 = binom(q, 2);
  const Rational c3 = binom(q, 3);
  const Rational c4 = binom(q, 4);

  MomentSet s;
  s.p = p;
  s.m1 = 0;
  s.m2 = c2 * p * (one - p);
  s.m3 = 6 * c3 * p * p * (one - p) + c2 * p * (one - p) * (one - 2 * p);
  s.m4 = 18 * c4 * p * p * (one - p) * (one + 3 * p) +
         54 * c3 * p * p * (one - p) * (one - Rational(5, 3) * p) +
         c2 * p * (one - p) * (one - 3 * p + 3 * p * p);
  return s;
}

MomentSet moments_closed_form(const Params& p) { return moments_closed_form(buckets_of(p), p.q()); }

MomentSet moments_brute(std::uint64_t buckets, std::uint64_t q, std::uint64_t max_transcripts) {
  require_buckets(buckets, q);
  unsigned __int128 total = 1;
  for (std::uint64_t i = 0; i < q; ++i) {
    total *= buckets;
    if (total > max_transcripts) {
      throw InfeasibleError("moments_brute: B^q exceeds the ceiling of " +
                            std::to_string(max_transcripts));
    }
  }
  // Histogram of the number of colliding pairs over all transcripts.
  std::map<std::uint64_t, std::uint64_t> pair_histogram;
  std::vector<std::uint64_t> digits(q, 0);
  std::vector<std::uint64_t> counts(buckets, 0);
  for (std::uint64_t idx = 0; idx < static_cast<std::uint64_t>(total); ++idx) {
    std::uint64_t pairs = 0;
    for (auto d : digits) pairs += counts[d]++;
    for (auto d : digits) counts[d] = 0;
    ++pair_histogram[pairs];
    for (std::uint64_t pos = 0; pos < q; ++pos) {
      if (++digits[pos] < buckets) break;
      digits[pos] = 0;
    }
  }
  const Rational mean(to_integer(q) * to_integer(q - 1), to_integer(2) * to_integer(buckets));
  Rational sums[4] = {0, 0, 0, 0};
  for (const auto& [pairs, count] : pair_histogram) {
    const Rational x = Rational(to_integer(pairs)) - mean;
    Rational power = x;
    for (auto& s : sums) {
      s += power * to_integer(count);
      power *= x;
    }
  }
  const Integer denom = to_integer(static_cast<std::uint64_t>(total));
  MomentSet s;
  s.p = Rational(1, to_integer(buckets));
  s.p.canonicalize();
  s.m1 = sums[0] / denom;
  s.m2 = sums[1] / denom;
  s.m3 = sums[2] / denom;
  s.m4 = sums[3] / denom;
  return s;
}

MomentEstimates moments_empirical(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                  std::uint64_t seed, unsigned workers) {
  require_buckets(buckets, q);
  if (trials < 2) throw Error("moments_empirical: at least two trials are required");
  if (buckets > kMaxSampledBuckets) throw Error("moments_empirical: too many buckets to sample");
  constexpr std::uint64_t chunk = 4096;
  const std::size_t chunks = chunk_count(trials, chunk);
  std::vector<std::array<RunningMoments, 4>> partial(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    Rng rng(seed, c);
    CollisionSampler sampler(buckets, q);
    const std::uint64_t end = std::min(trials, (c + 1) * chunk);
    for (std::uint64_t i = c * chunk; i < end; ++i) {
      const long double x = sampler.draw(rng);
      long double power = x;
      for (auto& acc : partial[c]) {
        acc.add(power);
        power *= x;
      }
    }
  });
  std::array<RunningMoments, 4> total;
  for (const auto& part : partial) {
    for (std::size_t k = 0; k < 4; ++k) total[k].merge(part[k]);
  }
  MomentEstimates est;
  est.trials = trials;
  for (std::size_t k = 0; k < 4; ++k) {
    est.value[k] = total[k].mean();
    est.standard_error[k] = total[k].jackknife_standard_error();
  }
  return est;
}

bool large_query_regime(std::uint64_t buckets, std::uint64_t q) {
  const auto qq = static_cast<unsigned __int128>(q);
  return qq * qq > static_cast<unsigned __int128>(buckets) * 65536u;
}

FourthMomentCheck fourth_moment_bound_check(std::uint64_t buckets, std::uint64_t q) {
  require_buckets(buckets, q);
  if (!large_query_regime(buckets, q)) {
    throw NotApplicableError("fourth moment bound needs q > 2^((n-m)/2 + 8); got q=" +
                             std::to_string(q) + ", B=" + std::to_string(buckets));
  }
  FourthMomentCheck check;
  const Integer qz = to_integer(q);
  const Integer bz = to_integer(buckets);
  check.bound = Rational(qz * qz * (qz - 1) * (qz - 1), bz * bz);
  check.bound.canonicalize();
  check.m4 = moments_closed_form(buckets, q).m4;
  check.holds = check.m4 < check.bound;
  check.margin = to_long_double(Rational(check.bound - check.m4));
  return check;
}

FourthMomentCheck fourth_moment_bound_check(const Params& p) {
  return fourth_moment_bound_check(p.buckets(), p.q());
}

long double phi(long double x) {
  return -x * x * x * x + x * x * x / 10.0L + 75.0L * x * x / 4.0L + 235.0L * x / 8.0L - 25.0L / 8.0L;
}

long double phi_factored(long double x) {
  const long double a = x + 2.5L;
  return -a * a * (x - 0.1L) * (x - 5.0L);
}

long double phi_argmax() { return (103.0L + std::sqrt(29409.0L)) / 80.0L; }

long double expected_phi_scaled(const MomentSet& mo, std::uint64_t buckets, std::uint64_t q) {
  if (q < 2) throw Error("expected_phi_scaled: q must be at least 2");
  const long double c2 = static_cast<long double>(buckets) /
                         (static_cast<long double>(q) * static_cast<long double>(q - 1));
  const long double c = std::sqrt(c2);
  return -c2 * c2 * to_long_double(mo.m4) + c2 * c * to_long_double(mo.m3) / 10.0L +
         75.0L / 4.0L * c2 * to_long_double(mo.m2) + 235.0L / 8.0L * c * to_long_double(mo.m1) -
         25.0L / 8.0L;
}

long double markov_lower(long double mean_y, long double bound) {
  if (!(bound > 0)) throw Error("markov_lower: the upper bound M must be positive");
  if (mean_y > bound) throw Error("markov_lower: E Y cannot exceed M");
  return mean_y / bound;
}

long double tail_threshold(std::uint64_t buckets, std::uint64_t q) {
  const long double qq = static_cast<long double>(q);
  return std::sqrt(qq * (qq - 1)) / std::sqrt(static_cast<long double>(buckets)) / 10.0L;
}

TailCheck tail_probability_check(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers) {
  require_buckets(buckets, q);
  if (!large_query_regime(buckets, q)) {
    throw NotApplicableError("tail bound needs q > 2^((n-m)/2 + 8); got q=" + std::to_string(q) +
                             ", B=" + std::to_string(buckets));
  }
  if (trials < 2) throw Error("tail_probability_check: at least two trials are required");
  constexpr std::uint64_t chunk = 4096;
  const long double threshold = tail_threshold(buckets, q);
  const std::size_t chunks = chunk_count(trials, chunk);
  std::vector<std::uint64_t> hits(chunks, 0);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    Rng rng(seed, c);
    CollisionSampler sampler(buckets, q);
    const std::uint64_t end = std::min(trials, (c + 1) * chunk);
    for (std::uint64_t i = c * chunk; i < end; ++i) {
      if (sampler.draw(rng) > threshold) ++hits[c];
    }
  });
  std::uint64_t total_hits = 0;
  for (auto h : hits) total_hits += h;
  TailCheck check;
  check.trials = trials;
  check.threshold = threshold;
  const long double n = static_cast<long double>(trials);
  check.probability = static_cast<long double>(total_hits) / n;
  check.standard_error = std::sqrt(check.probability * (1 - check.probability) / (n - 1));
  check.confirmed = check.probability - kStandardErrors * check.standard_error > kTailFloor;
  return check;
}

}  // namespace tpadv
