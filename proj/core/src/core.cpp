#include "tpadv/core.hpp"

#include <algorithm>
#include <cmath>

namespace tpadv {
namespace {

constexpr std::uint64_t kDirectLogTerms = std::uint64_t{1} << 24;

// (1-u) ln(1-u) + u, accurate for small u.
long double entropy_gap(long double u) {
  if (u < 0.01L) {
    long double term = u * u;
    long double s = 0.0L;
    for (int i = 2; i < 40; ++i) {
      s += term / (static_cast<long double>(i) * (i - 1));
      term *= u;
    }
    return s;
  }
  return (1.0L - u) * std::log1p(-u) + u;
}

void require_profile_total(const CountProfile& prof, const Params& p) {
  if (prof.total() != p.q()) {
    throw Error("profile " + prof.to_string() + " does not sum to q=" + std::to_string(p.q()));
  }
}

}  // namespace

Integer falling_factorial(std::uint64_t alpha, std::uint64_t k) {
  if (k > alpha) return 0;
  Integer r = 1;
  for (std::uint64_t j = 0; j < k; ++j) r *= to_integer(alpha - j);
  return r;
}

Rational w_exact(std::uint64_t k, std::uint64_t alpha) {
  if (alpha == 0) throw Error("w_exact: alpha must be positive");
  if (k > alpha) return 0;
  Rational r(falling_factorial(alpha, k), ipow(alpha, k));
  r.canonicalize();
  return r;
}

LogReal w_log(std::uint64_t k, long double alpha) {
  if (!(alpha > 0)) throw Error("w_log: alpha must be positive");
  if (k == 0) return LogReal::one();
  const auto last = static_cast<long double>(k - 1);
  if (last >= alpha) {
    if (std::floor(alpha) == alpha) return LogReal::zero();
    throw Error("w_log: factors turn negative for k-1 > alpha with non-integer alpha");
  }
  if (k > kDirectLogTerms) return w_log_large(static_cast<long double>(k), alpha);
  CompensatedSum s;
  for (std::uint64_t j = 1; j < k; ++j) s.add(std::log1p(-static_cast<long double>(j) / alpha));
  return LogReal::from_log(s.value());
}

LogReal w_log_large(long double k, long double alpha) {
  if (!(alpha > 0)) throw Error("w_log_large: alpha must be positive");
  if (k <= static_cast<long double>(kDirectLogTerms)) return w_log(static_cast<std::uint64_t>(k), alpha);
  if (k - 1 >= alpha) {
    if (std::floor(alpha) == alpha) return LogReal::zero();
    throw Error("w_log_large: factors turn negative for k-1 > alpha with non-integer alpha");
  }
  const auto kk = k;
  const long double integral = -alpha * entropy_gap(kk / alpha);
  const long double f_end = std::log1p(-kk / alpha);
  const long double d1 = -1.0L / (alpha - kk) + 1.0L / alpha;
  const long double d3 = -2.0L / std::pow(alpha - kk, 3) + 2.0L / std::pow(alpha, 3);
  return LogReal::from_log(integral - f_end / 2.0L + d1 / 12.0L - d3 / 720.0L);
}

Scalar w(std::uint64_t k, std::uint64_t alpha, Arithmetic mode) {
  if (mode == Arithmetic::exact) return w_exact(k, alpha);
  return w_log(k, static_cast<long double>(alpha)).value();
}

CountProfile profile_of(std::vector<std::uint64_t>& scratch) {
  std::sort(scratch.begin(), scratch.end());
  std::vector<std::uint64_t> parts;
  for (std::size_t i = 0; i < scratch.size();) {
    std::size_t j = i + 1;
    while (j < scratch.size() && scratch[j] == scratch[i]) ++j;
    parts.push_back(j - i);
    i = j;
  }
  return CountProfile(std::move(parts));
}

CountProfile count_profile(const Transcript& t, const Params& p) {
  t.validate(p);
  auto scratch = t.replies;
  return profile_of(scratch);
}

Rational collision_stat(const CountProfile& prof, const Params& p) {
  require_profile_total(prof, p);
  const std::uint64_t q = p.q();
  Rational mean(to_integer(q) * to_integer(q - 1), to_integer(2) * to_integer(p.buckets()));
  mean.canonicalize();
  return Rational(to_integer(prof.colliding_pairs())) - mean;
}

Rational collision_stat(const Transcript& t, const Params& p) {
  return collision_stat(count_profile(t, p), p);
}

long double collision_stat_real(const CountProfile& prof, std::uint64_t buckets, std::uint64_t q) {
  const auto pairs = static_cast<long double>(q) * static_cast<long double>(q - 1) / 2.0L;
  return static_cast<long double>(prof.colliding_pairs()) - pairs / static_cast<long double>(buckets);
}

Rational likelihood_ratio_exact(const CountProfile& prof, const Params& p) {
  require_profile_total(prof, p);
  const auto c = p.capacity();
  if (!prof.in_domain(c)) return 0;
  Integer num = ipow(p.buckets(), p.q());
  for (auto d : prof.parts()) num *= falling_factorial(c, d);
  Rational r(num, falling_factorial(p.domain(), p.q()));
  r.canonicalize();
  return r;
}

LogReal likelihood_ratio_log(const CountProfile& prof, const Params& p) {
  require_profile_total(prof, p);
  if (!prof.in_domain(p.capacity())) return LogReal::zero();
  const auto c = static_cast<long double>(p.capacity());
  const auto n = static_cast<long double>(p.domain());
  CompensatedSum s;
  std::uint64_t i = 0;
  for (auto d : prof.parts()) {
    for (std::uint64_t j = 0; j < d; ++j, ++i) {
      s.add(std::log1p(-static_cast<long double>(j) / c) -
            std::log1p(-static_cast<long double>(i) / n));
    }
  }
  return LogReal::from_log(s.value());
}

Scalar likelihood_ratio(const CountProfile& prof, const Params& p, Arithmetic mode) {
  if (mode == Arithmetic::exact) return likelihood_ratio_exact(prof, p);
  return likelihood_ratio_log(prof, p).value();
}

LogRatioTable::LogRatioTable(const Params& p) : params_(p) {
  const auto c = static_cast<long double>(p.capacity());
  const auto n = static_cast<long double>(p.domain());
  const std::uint64_t num_len = std::min(p.capacity(), p.q()) + 1;
  num_.resize(num_len);
  for (std::uint64_t j = 0; j < num_len; ++j) num_[j] = std::log1p(-static_cast<long double>(j) / c);
  den_.resize(p.q());
  for (std::uint64_t j = 0; j < p.q(); ++j) den_[j] = std::log1p(-static_cast<long double>(j) / n);
}

LogReal LogRatioTable::log_ratio(std::span<const std::uint64_t> parts) const {
  const auto c = params_.capacity();
  CompensatedSum s;
  std::uint64_t i = 0;
  for (auto d : parts) {
    if (d > c) return LogReal::zero();
    for (std::uint64_t j = 0; j < d; ++j, ++i) s.add(num_[j] - den_[i]);
  }
  if (i != params_.q()) throw Error("LogRatioTable: parts do not sum to q");
  return LogReal::from_log(s.value());
}

void sample_function_replies(const Params& p, Rng& rng, std::vector<std::uint64_t>& out) {
  out.resize(p.q());
  const auto b = p.buckets();
  for (auto& r : out) r = rng.below(b);
}

Transcript sample_function_transcript(const Params& p, Rng& rng) {
  Transcript t;
  sample_function_replies(p, rng, t.replies);
  return t;
}

PermutationSampler::PermutationSampler(const Params& p)
    : params_(p), dense_(p.domain() <= (std::uint64_t{1} << 20)) {
  if (dense_) {
    seen_bitmap_.assign(p.domain(), 0);
  } else {
    seen_set_.reserve(p.q() * 2);
  }
}

void PermutationSampler::sample(Rng& rng, std::vector<std::uint64_t>& out) {
  const auto n = params_.domain();
  const int shift = params_.m();
  out.resize(params_.q());
  if (dense_) {
    touched_.clear();
    for (auto& r : out) {
      std::uint64_t v;
      do {
        v = rng.below(n);
      } while (seen_bitmap_[v]);
      seen_bitmap_[v] = 1;
      touched_.push_back(v);
      r = v >> shift;
    }
    for (auto v : touched_) seen_bitmap_[v] = 0;
  } else {
    seen_set_.clear();
    for (auto& r : out) {
      std::uint64_t v;
      do {
        v = rng.below(n);
      } while (!seen_set_.insert(v).second);
      r = v >> shift;
    }
  }
}

Transcript sample_permutation_transcript(const Params& p, Rng& rng) {
  PermutationSampler sampler(p);
  Transcript t;
  sampler.sample(rng, t.replies);
  return t;
}

}  // namespace tpadv
