#include "tpadv/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tpadv/core.hpp"
#include "tpadv/exact.hpp"
#include "tpadv/moments.hpp"

namespace tpadv::lemmas {
namespace {

constexpr long double kEps = std::numeric_limits<long double>::epsilon();

// Relative tolerance for comparing two long double expressions of similar size.
long double tolerance(long double a, long double b) {
  return 64.0L * kEps * (std::fabs(a) + std::fabs(b) + 1e-300L);
}

// prefix[k] = ln W(k, alpha) for k <= k_max, by compensated summation.
std::vector<long double> ln_w_prefix(std::uint64_t k_max, long double alpha) {
  std::vector<long double> out(k_max + 1, 0.0L);
  CompensatedSum s;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    const auto j = static_cast<long double>(k - 1);
    if (j >= alpha) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(k), out.end(),
                -std::numeric_limits<long double>::infinity());
      break;
    }
    s.add(std::log1p(-j / alpha));
    out[k] = s.value();
  }
  return out;
}

long double pairs(std::uint64_t k) {
  return static_cast<long double>(k) * static_cast<long double>(k == 0 ? 0 : k - 1) / 2.0L;
}

struct Tally {
  LemmaCheck check;
  bool first = true;

  void record(long double slack, long double tol) {
    ++check.cases;
    if (slack < -tol) ++check.violations;
    if (first || slack < check.worst_slack) {
      check.worst_slack = slack;
      first = false;
    }
  }

  LemmaCheck finish(std::string detail) {
    check.pass = check.violations == 0 && check.cases > 0;
    check.detail = std::move(detail);
    return check;
  }
};

void for_each_partition(std::uint64_t q, std::uint64_t max_parts, std::uint64_t cap,
                        const std::function<void(const std::vector<std::uint64_t>&)>& fn) {
  std::vector<std::uint64_t> parts;
  std::function<void(std::uint64_t, std::uint64_t)> rec = [&](std::uint64_t rest, std::uint64_t hi) {
    if (rest == 0) {
      fn(parts);
      return;
    }
    if (parts.size() == max_parts) return;
    for (std::uint64_t d = std::min(rest, hi); d >= 1; --d) {
      parts.push_back(d);
      rec(rest - d, d);
      parts.pop_back();
    }
  };
  rec(q, cap);
}

std::string cell_list(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cells) {
  std::string s;
  for (const auto& [b, q] : cells) {
    if (!s.empty()) s += " ";
    s += "(B=" + std::to_string(b) + ",q=" + std::to_string(q) + ")";
  }
  return s;
}

}  // namespace

std::vector<std::uint64_t> alpha_grid(std::uint64_t alpha_max) {
  std::vector<std::uint64_t> g;
  const std::uint64_t dense = std::min<std::uint64_t>(alpha_max, 4096);
  for (std::uint64_t a = 1; a <= dense; ++a) g.push_back(a);
  for (std::uint64_t lo = 4096; lo < alpha_max; lo *= 2) {
    const std::uint64_t step = std::max<std::uint64_t>(lo / 256, 1);
    for (std::uint64_t a = lo + step; a <= std::min(2 * lo, alpha_max); a += step) g.push_back(a);
  }
  if (g.back() != alpha_max) g.push_back(alpha_max);
  return g;
}

LemmaCheck check_w_upper(const WGrid& grid) {
  Tally t;
  t.check.name = "w_upper";
  for (auto a : alpha_grid(grid.alpha_max)) {
    const auto alpha = static_cast<long double>(a);
    const std::uint64_t k_max = std::min(grid.k_max, a);
    const auto lw = ln_w_prefix(k_max, alpha);
    for (std::uint64_t k = 0; k <= k_max; ++k) {
      const long double rhs = -pairs(k) / alpha;
      t.record(rhs - lw[k], tolerance(rhs, lw[k]));
    }
  }
  return t.finish("ln W(k,a) <= -k(k-1)/(2a), k <= min(" + std::to_string(grid.k_max) +
                  ", a), a <= " + std::to_string(grid.alpha_max));
}

LemmaCheck check_ln_upper(long double step) {
  if (!(step > 0)) throw Error("check_ln_upper: step must be positive");
  Tally t;
  t.check.name = "ln_upper";
  const auto points = static_cast<std::uint64_t>(std::floor(0.5L / step + 1e-9L));
  for (std::uint64_t i = 0; i <= points; ++i) {
    const long double x = std::min(0.5L, static_cast<long double>(i) * step);
    const long double lhs = std::log1p(-x);
    const long double rhs = -x - x * x;
    t.record(lhs - rhs, tolerance(lhs, rhs));
  }
  return t.finish("ln(1-x) >= -x - x^2 on [0, 1/2]");
}

LemmaCheck check_w_lower(const WGrid& grid) {
  Tally t;
  t.check.name = "w_lower";
  for (auto a : alpha_grid(grid.alpha_max)) {
    const auto alpha = static_cast<long double>(a);
    const std::uint64_t k_max = std::min(grid.k_max, a / 2);
    if (k_max == 0) continue;
    const auto lw = ln_w_prefix(k_max, alpha);
    for (std::uint64_t k = 1; k <= k_max; ++k) {
      const auto kk = static_cast<long double>(k);
      const long double rhs = -pairs(k) / alpha - kk * kk * kk / (3.0L * alpha * alpha);
      t.record(lw[k] - rhs, tolerance(rhs, lw[k]));
    }
  }
  return t.finish("ln W(k,a) >= -k(k-1)/(2a) - k^3/(3a^2), 1 <= k <= a/2");
}

LemmaCheck check_more_w(const WGrid& grid) {
  Tally t;
  t.check.name = "more_w";
  for (auto a : alpha_grid(grid.alpha_max)) {
    const auto alpha = static_cast<long double>(a);
    const std::uint64_t k_max = std::min(grid.k_max, a / 2);
    if (k_max == 0) continue;
    const auto lw = ln_w_prefix(k_max, alpha);
    const auto lw2 = ln_w_prefix(2 * k_max, 2 * alpha);
    for (std::uint64_t k = 1; k <= k_max; ++k) {
      const auto ratio = static_cast<long double>(k) / alpha;
      const long double lhs = lw2[2 * k] + pairs(2 * k) / (2 * alpha);
      const long double rhs = 2 * (lw[k] + pairs(k) / alpha) - ratio * ratio / 2;
      t.record(lhs - rhs, tolerance(lhs, rhs) + tolerance(lw2[2 * k], 2 * lw[k]));
    }
  }
  return t.finish("ln W(2k,2a) + C(2k,2)/(2a) >= 2(ln W(k,a) + C(k,2)/a) - (k/a)^2/2");
}

LemmaCheck check_f_maximizer(std::uint64_t max_q) {
  Tally t;
  t.check.name = "f_maximizer";
  for (std::uint64_t buckets : {2u, 4u}) {
    for (int m = 0; m <= 3; ++m) {
      const std::uint64_t cap = std::uint64_t{1} << m;
      const int n = m + (buckets == 2 ? 1 : 2);
      for (std::uint64_t q = 1; q <= std::min(max_q, buckets * cap); ++q) {
        const Params p(n, m, q);
        long double best = -std::numeric_limits<long double>::infinity();
        std::vector<std::uint64_t> best_parts;
        for_each_partition(q, buckets, cap, [&](const std::vector<std::uint64_t>& parts) {
          const long double f = profile_score(CountProfile(parts), p);
          if (f > best) {
            best = f;
            best_parts = parts;
          }
        });
        // Most balanced profile: q mod B parts of size ceil(q/B), the rest floor(q/B).
        std::vector<std::uint64_t> balanced(buckets, q / buckets);
        for (std::uint64_t i = 0; i < q % buckets; ++i) ++balanced[i];
        const long double f_bal = profile_score(CountProfile(balanced), p);
        t.record(f_bal - best, tolerance(f_bal, best));

        if (q < buckets) t.record(-best, tolerance(best, 0.0L));
        const bool power_of_two = (q & (q - 1)) == 0;
        if (power_of_two && q >= buckets) {
          const std::uint64_t share = q / buckets;
          const long double rhs =
              static_cast<long double>(buckets) *
              (w_log(share, static_cast<long double>(cap)).log() +
               pairs(share) / static_cast<long double>(cap));
          t.record(rhs - best, tolerance(rhs, best));
        }
      }
    }
  }
  return t.finish("max F over D at the balanced profile; <= 0 for q < B; closed form for q = 2^j");
}

LemmaCheck check_ln_r_upper(int max_n, bool include_full_domain) {
  Tally t;
  t.check.name = "ln_r_upper";
  Integer transcripts = 0;
  std::string failing;
  for (int n = 1; n <= max_n; ++n) {
    for (int m = 0; m < n; ++m) {
      for (std::uint64_t q : {2u, 4u, 8u, 16u}) {
        const std::uint64_t top = std::uint64_t{1} << (include_full_domain ? n : n - 1);
        if (q > top) continue;
        const Params p(n, m, q);
        const auto c = static_cast<long double>(p.capacity());
        const long double quad =
            static_cast<long double>(q) * static_cast<long double>(q) / std::exp2(static_cast<long double>(n + m + 1));
        const auto before = t.check.violations;
        enumerate_profiles(p, Arithmetic::exact, [&](const ProfileWeight& pw) {
          transcripts += pw.transcript_count;
          const long double rhs = quad - to_long_double(collision_stat(pw.profile, p)) / c;
          const Rational r = likelihood_ratio_exact(pw.profile, p);
          if (r == 0) {
            t.record(std::numeric_limits<long double>::infinity(), 0.0L);
            return;
          }
          const long double lhs = std::log(to_long_double(r));
          t.record(rhs - lhs, tolerance(lhs, rhs));
        });
        if (t.check.violations != before) {
          failing += " (" + std::to_string(n) + "," + std::to_string(m) + "," + std::to_string(q) + ")";
        }
      }
    }
  }
  std::string detail = "R <= exp(q^2/2^(n+m+1) - X/2^m), n <= " + std::to_string(max_n) + ", q in {2,4,8,16}, q <= " +
                       (include_full_domain ? "2^n" : "2^(n-1)") + "; " + transcripts.get_str() +
                       " transcripts via their profiles";
  if (!failing.empty()) detail += "; violated at (n,m,q):" + failing;
  return t.finish(detail);
}

LemmaCheck check_fourth_moment(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cells) {
  Tally t;
  t.check.name = "fourth_moment";
  for (const auto& [b, q] : cells) {
    const auto fm = fourth_moment_bound_check(b, q);
    ++t.check.cases;
    if (!fm.holds) ++t.check.violations;
    const long double rel = to_long_double(Rational((fm.bound - fm.m4) / fm.bound));
    if (t.first || rel < t.check.worst_slack) {
      t.check.worst_slack = rel;
      t.first = false;
    }
  }
  return t.finish("E X^4 < q^2(q-1)^2/B^2 (exact), relative margin reported; " + cell_list(cells));
}

LemmaCheck check_phi_bound(long double step) {
  Tally t;
  t.check.name = "phi_bound";
  const auto points = static_cast<std::uint64_t>(std::floor(20.0L / step + 1e-9L));
  for (std::uint64_t i = 0; i <= points; ++i) {
    const long double x = -10.0L + static_cast<long double>(i) * step;
    const long double v = phi(x);
    const long double f = phi_factored(x);
    t.record(200.0L - v, 0.0L);
    t.record(-std::fabs(v - f), 1e-12L * (1 + std::fabs(v)));
  }
  const long double xs = phi_argmax();
  t.record(200.0L - phi(xs), 0.0L);
  // The critical point is a local maximum: phi'(x*) = 0, phi''(x*) < 0.
  const long double d1 = -4 * xs * xs * xs + 0.3L * xs * xs + 37.5L * xs + 235.0L / 8.0L;
  const long double d2 = -12 * xs * xs + 0.6L * xs + 37.5L;
  t.record(-std::fabs(d1), 1e-12L);
  t.record(-d2, 0.0L);
  return t.finish("phi < 200 on [-10, 10] and at (103 + sqrt(29409))/80; forms agree");
}

LemmaCheck check_expected_phi(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& cells) {
  Tally t;
  t.check.name = "expected_phi";
  for (const auto& [b, q] : cells) {
    const long double e = expected_phi_scaled(moments_closed_form(b, q), b, q);
    t.record(e - 0.5L, 0.0L);
  }
  return t.finish("E phi(cX) > 1/2 from closed-form moments; " + cell_list(cells));
}

LemmaCheck check_polynomial_tail(std::uint64_t buckets, std::uint64_t q, std::uint64_t trials,
                                 std::uint64_t seed, unsigned workers) {
  const auto tc = tail_probability_check(buckets, q, trials, seed, workers);
  LemmaCheck c;
  c.name = "polynomial_tail";
  c.cases = 1;
  c.violations = tc.confirmed ? 0 : 1;
  c.worst_slack = tc.probability - kStandardErrors * tc.standard_error - kTailFloor;
  c.pass = tc.confirmed;
  char buf[256];
  std::snprintf(buf, sizeof buf, "B=%llu q=%llu trials=%llu Pr=%.6Lf SE=%.6Lf threshold=%.4Lf",
                static_cast<unsigned long long>(buckets), static_cast<unsigned long long>(q),
                static_cast<unsigned long long>(trials), tc.probability, tc.standard_error,
                tc.threshold);
  c.detail = buf;
  return c;
}

std::vector<LemmaCheck> run_suite(const SuiteOptions& opts) {
  std::vector<LemmaCheck> out;
  out.push_back(check_w_upper(opts.grid));
  out.push_back(check_ln_upper());
  out.push_back(check_w_lower(opts.grid));
  out.push_back(check_more_w(opts.grid));
  out.push_back(check_f_maximizer());
  out.push_back(check_ln_r_upper());
  out.push_back(check_fourth_moment());
  out.push_back(check_phi_bound());
  out.push_back(check_expected_phi());
  out.push_back(check_polynomial_tail(2, 512, opts.tail_trials, opts.seed, opts.workers));
  out.push_back(check_polynomial_tail(4, 2048, opts.tail_trials, opts.seed, opts.workers));
  return out;
}

}  // namespace tpadv::lemmas
