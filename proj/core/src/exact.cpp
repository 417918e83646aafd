#include "tpadv/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tpadv/parallel.hpp"

namespace tpadv {

std::string to_string(Direction d) { return d == Direction::r_greater ? "R>1" : "R<1"; }

bool exact_arithmetic_supported(const Params& p) {
  return p.n() <= 16 && p.q() <= (std::uint64_t{1} << 12);
}

void require_exact_arithmetic(const Params& p) {
  if (!exact_arithmetic_supported(p)) {
    throw NotApplicableError("exact arithmetic requires 2^n <= 2^16 and q <= 2^12; got " +
                             p.to_string() + " (use --mode fast)");
  }
}

namespace {

constexpr auto kSaturated = std::numeric_limits<std::uint64_t>::max();

// Shape of a restricted partition search: at most max_parts parts, each at most max_part.
struct PartitionShape {
  std::uint64_t q;
  std::uint64_t max_parts;
  std::uint64_t max_part;

  // Range of the first (largest) part given `remaining` to place in `slots`
  // parts each at most `cap`. Empty range when infeasible.
  static std::pair<std::uint64_t, std::uint64_t> first_part_range(std::uint64_t remaining,
                                                                  std::uint64_t slots,
                                                                  std::uint64_t cap) {
    if (remaining == 0 || slots == 0) return {1, 0};
    const std::uint64_t hi = std::min(remaining, cap);
    const std::uint64_t lo = (remaining + slots - 1) / slots;
    return {lo, hi};
  }
};

std::uint64_t count_rec(std::uint64_t remaining, std::uint64_t slots, std::uint64_t cap,
                        std::uint64_t budget) {
  if (remaining == 0) return 1;
  const auto [lo, hi] = PartitionShape::first_part_range(remaining, slots, cap);
  std::uint64_t total = 0;
  for (std::uint64_t f = hi; f >= lo && f > 0; --f) {
    total += count_rec(remaining - f, slots - 1, f, budget - total);
    if (total > budget) return total;
  }
  return total;
}

// Ceiling check shared by every enumerating routine.
void require_profiles_within(std::uint64_t q, std::uint64_t max_parts, std::uint64_t max_part,
                             std::uint64_t ceiling, const Params& p) {
  const auto budget = ceiling == kSaturated ? kSaturated - 1 : ceiling;
  if (count_rec(q, max_parts, max_part, budget) > ceiling) {
    throw InfeasibleError("profile enumeration for " + p.to_string() + " exceeds the ceiling of " +
                          std::to_string(ceiling) + " profiles; use Monte Carlo instead");
  }
}

// Exact factorials 0!..q!.
std::vector<Integer> factorial_table(std::uint64_t q) {
  std::vector<Integer> f(q + 1);
  f[0] = 1;
  for (std::uint64_t i = 1; i <= q; ++i) f[i] = f[i - 1] * to_integer(i);
  return f;
}

// B (B-1) ... (B-k+1) for k = 0..kmax.
std::vector<Integer> falling_table(std::uint64_t base, std::uint64_t kmax) {
  std::vector<Integer> f(kmax + 1);
  f[0] = 1;
  for (std::uint64_t k = 1; k <= kmax; ++k) f[k] = f[k - 1] * to_integer(base - (k - 1));
  return f;
}

std::vector<long double> log_factorial_table(std::uint64_t q) {
  std::vector<long double> f(q + 1, 0.0L);
  for (std::uint64_t i = 2; i <= q; ++i) f[i] = f[i - 1] + std::log(static_cast<long double>(i));
  return f;
}

std::vector<long double> log_falling_table(std::uint64_t base, std::uint64_t kmax) {
  std::vector<long double> f(kmax + 1, 0.0L);
  for (std::uint64_t k = 1; k <= kmax; ++k) {
    f[k] = f[k - 1] + std::log(static_cast<long double>(base - (k - 1)));
  }
  return f;
}

// Generic depth-first walk over restricted partitions in descending-part
// lexicographic order. `Frame` carries per-depth incremental state; Step
// pushes a part, Leaf consumes a complete partition.
template <class Frame, class Step, class Leaf>
void walk_partitions(std::uint64_t remaining, std::uint64_t slots, std::uint64_t cap,
                     std::vector<std::uint64_t>& parts, const Frame& frame, Step& step,
                     Leaf& leaf) {
  if (remaining == 0) {
    leaf(parts, frame);
    return;
  }
  const auto [lo, hi] = PartitionShape::first_part_range(remaining, slots, cap);
  for (std::uint64_t f = hi; f >= lo && f > 0; --f) {
    Frame next = step(frame, parts, f);
    parts.push_back(f);
    walk_partitions(remaining - f, slots - 1, f, parts, next, step, leaf);
    parts.pop_back();
  }
}

// Splits the walk by first part so independent subtrees can run on workers.
template <class Frame, class Step, class MakeLeaf, class Merge>
void walk_partitions_sharded(std::uint64_t q, std::uint64_t slots, std::uint64_t cap,
                             const Frame& root, Step step, MakeLeaf make_leaf, Merge merge,
                             unsigned workers) {
  const auto [lo, hi] = PartitionShape::first_part_range(q, slots, cap);
  if (lo > hi) return;
  const std::size_t shards = static_cast<std::size_t>(hi - lo + 1);
  using LeafT = decltype(make_leaf());
  std::vector<LeafT> leaves(shards, make_leaf());
  for_each_chunk(shards, workers, [&](std::size_t i) {
    const std::uint64_t f = hi - i;
    std::vector<std::uint64_t> parts{f};
    Step local_step = step;
    Frame next = local_step(root, std::vector<std::uint64_t>{}, f);
    walk_partitions(q - f, slots - 1, f, parts, next, local_step, leaves[i]);
  });
  for (auto& l : leaves) merge(l);
}

// Per-depth state of the exact walk.
struct ExactFrame {
  Integer product;      // prod of C^(falling d_i)
  Integer denominator;  // prod d_i! * prod mult_j!
  std::uint64_t run = 0;
  std::uint64_t last = 0;
};

struct ExactTotals {
  Integer greater;       // sum over R>1 of count * (P B^q - T)
  Integer less;          // sum over 0<R<1 in D of count * (T - P B^q)
  Integer mass_in_d;     // sum over D of count
  std::uint64_t profiles = 0;
};

struct FastFrame {
  CompensatedSum log_ratio;
  long double log_denominator = 0.0L;
  std::uint64_t position = 0;
  std::uint64_t run = 0;
  std::uint64_t last = 0;
};

struct FastTotals {
  CompensatedSum greater;
  CompensatedSum less;
  CompensatedSum mass_in_d;
  std::uint64_t profiles = 0;
};

AdvantageResult exact_advantage_rational(const Params& p, const ExactOptions& opts) {
  const std::uint64_t q = p.q();
  const std::uint64_t slots = std::min<std::uint64_t>(p.buckets(), q);
  const std::uint64_t cap = std::min<std::uint64_t>(p.capacity(), q);

  const auto fact = factorial_table(q);
  const auto b_falling = falling_table(p.buckets(), slots);
  const auto c_falling = falling_table(p.capacity(), cap);
  const Integer bq = ipow(p.buckets(), q);
  const Integer t = falling_factorial(p.domain(), q);

  auto step = [&](const ExactFrame& fr, const std::vector<std::uint64_t>&, std::uint64_t d) {
    ExactFrame next;
    next.product = fr.product * c_falling[d];
    next.run = (d == fr.last) ? fr.run + 1 : 1;
    next.last = d;
    next.denominator = fr.denominator * fact[d] * to_integer(next.run);
    return next;
  };

  struct Leaf {
    const std::vector<Integer>* fact;
    const std::vector<Integer>* b_falling;
    const Integer* bq;
    const Integer* t;
    ExactTotals totals;
    Integer scaled;
    Integer count;
    void operator()(const std::vector<std::uint64_t>& parts, const ExactFrame& fr) {
      count = (*b_falling)[parts.size()] * (*fact)[fact->size() - 1];
      mpz_divexact(count.get_mpz_t(), count.get_mpz_t(), fr.denominator.get_mpz_t());
      scaled = fr.product * *bq;
      const int cmp = cmp_mpz(scaled, *t);
      if (cmp > 0) {
        totals.greater += count * (scaled - *t);
      } else if (cmp < 0) {
        totals.less += count * (*t - scaled);
      }
      totals.mass_in_d += count;
      ++totals.profiles;
    }
    static int cmp_mpz(const Integer& a, const Integer& b) { return cmp(a, b); }
  };

  ExactTotals totals;
  ExactFrame root{1, 1, 0, 0};
  walk_partitions_sharded(
      q, slots, cap, root, step,
      [&] { return Leaf{&fact, &b_falling, &bq, &t, {}, {}, {}}; },
      [&](const Leaf& l) {
        totals.greater += l.totals.greater;
        totals.less += l.totals.less;
        totals.mass_in_d += l.totals.mass_in_d;
        totals.profiles += l.totals.profiles;
      },
      opts.workers);

  Integer numerator;
  if (opts.direction == Direction::r_greater) {
    numerator = totals.greater;
  } else {
    numerator = totals.less + (bq - totals.mass_in_d) * t;
  }
  Rational value(numerator, t * bq);
  value.canonicalize();
  return {value, opts.direction, totals.profiles};
}

AdvantageResult exact_advantage_fast(const Params& p, const ExactOptions& opts) {
  const std::uint64_t q = p.q();
  const std::uint64_t slots = std::min<std::uint64_t>(p.buckets(), q);
  const std::uint64_t cap = std::min<std::uint64_t>(p.capacity(), q);

  const LogRatioTable table(p);
  const auto log_fact = log_factorial_table(q);
  const auto log_b_falling = log_falling_table(p.buckets(), slots);
  const long double log_uniform = static_cast<long double>(q) *
                                  std::log(static_cast<long double>(p.buckets()));

  auto step = [&](const FastFrame& fr, const std::vector<std::uint64_t>&, std::uint64_t d) {
    FastFrame next = fr;
    for (std::uint64_t j = 0; j < d; ++j) {
      next.log_ratio.add(table.numerator_term(j) - table.denominator_term(fr.position + j));
    }
    next.position = fr.position + d;
    next.run = (d == fr.last) ? fr.run + 1 : 1;
    next.last = d;
    next.log_denominator += log_fact[d] + std::log(static_cast<long double>(next.run));
    return next;
  };

  struct Leaf {
    const std::vector<long double>* log_fact;
    const std::vector<long double>* log_b_falling;
    long double log_uniform;
    FastTotals totals;
    void operator()(const std::vector<std::uint64_t>& parts, const FastFrame& fr) {
      const long double log_prob = (*log_fact)[log_fact->size() - 1] +
                                   (*log_b_falling)[parts.size()] - fr.log_denominator -
                                   log_uniform;
      const long double log_r = fr.log_ratio.value();
      const long double prob = std::exp(log_prob);
      if (log_r > 0) {
        totals.greater.add(prob * std::expm1(log_r));
      } else if (log_r < 0) {
        totals.less.add(-prob * std::expm1(log_r));
      }
      totals.mass_in_d.add(prob);
      ++totals.profiles;
    }
  };

  FastTotals totals;
  walk_partitions_sharded(
      q, slots, cap, FastFrame{}, step,
      [&] { return Leaf{&log_fact, &log_b_falling, log_uniform, {}}; },
      [&](const Leaf& l) {
        totals.greater.merge(l.totals.greater);
        totals.less.merge(l.totals.less);
        totals.mass_in_d.merge(l.totals.mass_in_d);
        totals.profiles += l.totals.profiles;
      },
      opts.workers);

  long double value;
  if (opts.direction == Direction::r_greater) {
    value = totals.greater.value();
  } else {
    value = totals.less.value() + std::max(0.0L, 1.0L - totals.mass_in_d.value());
  }
  return {value, opts.direction, totals.profiles};
}

}  // namespace

std::uint64_t count_partitions(std::uint64_t q, std::uint64_t max_parts, std::uint64_t max_part) {
  if (q == 0) return 1;
  const auto r = count_rec(q, std::min(max_parts, q), std::min(max_part, q), kSaturated - 1);
  return r;
}

std::uint64_t profile_count(const Params& p) {
  return count_partitions(p.q(), p.buckets(), p.q());
}

std::optional<std::uint64_t> transcript_count(const Params& p) {
  unsigned __int128 total = 1;
  for (std::uint64_t i = 0; i < p.q(); ++i) {
    total *= p.buckets();
    if (total > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  }
  return static_cast<std::uint64_t>(total);
}

void enumerate_profiles(const Params& p, Arithmetic mode, const ProfileVisitor& visit,
                        const EnumerationLimits& limits) {
  const std::uint64_t q = p.q();
  const std::uint64_t slots = std::min<std::uint64_t>(p.buckets(), q);
  require_profiles_within(q, slots, q, limits.max_profiles, p);

  const auto fact = factorial_table(q);
  const auto b_falling = falling_table(p.buckets(), slots);
  const Integer bq = ipow(p.buckets(), q);
  const auto log_bq = static_cast<long double>(q) * std::log(static_cast<long double>(p.buckets()));

  struct Frame {
    Integer denominator;
    std::uint64_t run;
    std::uint64_t last;
  };
  auto step = [&](const Frame& fr, const std::vector<std::uint64_t>&, std::uint64_t d) {
    Frame next{0, d == fr.last ? fr.run + 1 : 1, d};
    next.denominator = fr.denominator * fact[d] * to_integer(next.run);
    return next;
  };
  auto leaf = [&](const std::vector<std::uint64_t>& parts, const Frame& fr) {
    ProfileWeight pw;
    pw.profile = CountProfile(parts);
    pw.transcript_count = b_falling[parts.size()] * fact[q];
    mpz_divexact(pw.transcript_count.get_mpz_t(), pw.transcript_count.get_mpz_t(),
                 fr.denominator.get_mpz_t());
    if (mode == Arithmetic::exact) {
      Rational pr(pw.transcript_count, bq);
      pr.canonicalize();
      pw.probability = pr;
    } else {
      pw.probability = std::exp(log_of(pw.transcript_count) - log_bq);
    }
    visit(pw);
  };
  std::vector<std::uint64_t> parts;
  walk_partitions(q, slots, q, parts, Frame{1, 0, 0}, step, leaf);
}

std::vector<ProfileWeight> enumerate_profiles(const Params& p, Arithmetic mode,
                                              const EnumerationLimits& limits) {
  std::vector<ProfileWeight> out;
  enumerate_profiles(p, mode, [&](const ProfileWeight& pw) { out.push_back(pw); }, limits);
  return out;
}

AdvantageResult exact_advantage(const Params& p, const ExactOptions& opts) {
  const std::uint64_t q = p.q();
  if (opts.arithmetic == Arithmetic::exact) require_exact_arithmetic(p);
  require_profiles_within(q, std::min<std::uint64_t>(p.buckets(), q),
                          std::min<std::uint64_t>(p.capacity(), q), opts.limits.max_profiles, p);
  if (opts.arithmetic == Arithmetic::exact) return exact_advantage_rational(p, opts);
  return exact_advantage_fast(p, opts);
}

AdvantageResult brute_force_advantage(const Params& p, Direction direction,
                                      const EnumerationLimits& limits) {
  const auto total = transcript_count(p);
  if (!total || *total > limits.max_transcripts) {
    throw InfeasibleError("brute force over B^q transcripts for " + p.to_string() +
                          " exceeds the ceiling of " + std::to_string(limits.max_transcripts));
  }
  const std::uint64_t q = p.q();
  const std::uint64_t b = p.buckets();

  std::map<CountProfile, Rational> memo;
  std::vector<std::uint64_t> digits(q, 0);
  std::vector<std::uint64_t> scratch;
  Rational sum = 0;
  for (std::uint64_t idx = 0; idx < *total; ++idx) {
    scratch = digits;
    CountProfile prof = profile_of(scratch);
    auto it = memo.find(prof);
    if (it == memo.end()) {
      const Rational r = likelihood_ratio_exact(prof, p);
      Rational gap = direction == Direction::r_greater ? Rational(r - 1) : Rational(1 - r);
      if (gap < 0) gap = 0;
      it = memo.emplace(std::move(prof), gap).first;
    }
    sum += it->second;
    for (std::uint64_t pos = 0; pos < q; ++pos) {
      if (++digits[pos] < b) break;
      digits[pos] = 0;
    }
  }
  sum /= to_integer(*total);
  return {sum, direction, memo.size()};
}

long double profile_score(const CountProfile& prof, const Params& p) {
  const auto c = p.capacity();
  if (!prof.in_domain(c)) {
    throw Error("profile_score: profile " + prof.to_string() + " has a part above 2^m=" +
                std::to_string(c));
  }
  CompensatedSum s;
  for (auto d : prof.parts()) {
    s.add(w_log(d, static_cast<long double>(c)).log());
    s.add(static_cast<long double>(d * (d - 1) / 2) / static_cast<long double>(c));
  }
  return s.value();
}

McEstimate mc_advantage(const Params& p, std::uint64_t trials, std::uint64_t seed,
                        const McOptions& opts) {
  if (trials == 0) throw Error("mc_advantage: trials must be at least 1");
  if (opts.arithmetic == Arithmetic::exact) require_exact_arithmetic(p);
  const LogRatioTable table(p);
  const std::size_t chunks = chunk_count(trials, kMonteCarloChunk);
  std::vector<RunningMoments> partial(chunks);

  for_each_chunk(chunks, opts.workers, [&](std::size_t c) {
    Rng rng(seed, c);
    const std::uint64_t begin = c * kMonteCarloChunk;
    const std::uint64_t end = std::min(trials, begin + kMonteCarloChunk);
    std::vector<std::uint64_t> replies;
    RunningMoments acc;
    for (std::uint64_t i = begin; i < end; ++i) {
      sample_function_replies(p, rng, replies);
      const CountProfile prof = profile_of(replies);
      long double gap;
      if (opts.arithmetic == Arithmetic::exact) {
        const Rational r = likelihood_ratio_exact(prof, p);
        Rational g = opts.direction == Direction::r_greater ? Rational(r - 1) : Rational(1 - r);
        gap = g > 0 ? to_long_double(g) : 0.0L;
      } else {
        const LogReal r = table.log_ratio(prof.parts());
        const long double excess = r.is_zero() ? -1.0L : std::expm1(r.log());
        gap = opts.direction == Direction::r_greater ? std::max(excess, 0.0L)
                                                     : std::max(-excess, 0.0L);
      }
      acc.add(gap);
    }
    partial[c] = acc;
  });

  RunningMoments total;
  for (const auto& part : partial) total.merge(part);
  McEstimate est;
  est.mean = total.mean();
  est.trials = trials;
  if (trials >= 2) est.standard_error = total.jackknife_standard_error();
  return est;
}

}  // namespace tpadv
