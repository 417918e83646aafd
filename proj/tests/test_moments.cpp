#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "tpadv/moments.hpp"

using namespace tpadv;

namespace {

// Moments of X by direct pair counting over every transcript.
std::array<Rational, 4> direct_moments(std::uint64_t buckets, std::uint64_t q) {
  std::array<Rational, 4> s{0, 0, 0, 0};
  Integer count = 0;
  oracle::for_each_transcript(buckets, q, [&](const std::vector<std::uint64_t>& t) {
    const Rational x = oracle::collision_stat(t, buckets);
    Rational pw = x;
    for (auto& v : s) {
      v += pw;
      pw *= x;
    }
    ++count;
  });
  for (auto& v : s) v /= count;
  return s;
}

}  // namespace

TEST_CASE("closed-form examples") {
  const auto a = moments_closed_form(2, 2);
  CHECK(a.m1 == 0);
  CHECK(a.m2 == Rational(1, 4));
  CHECK(a.m3 == 0);
  CHECK(a.m4 == Rational(1, 16));
  CHECK(a.p == Rational(1, 2));
  CHECK(moments_closed_form(2, 3).m3 == Rational(3, 4));
  CHECK(moments_closed_form(4, 3).m2 == Rational(9, 16));
  CHECK(moments_closed_form(Params(3, 1, 3)).m2 == Rational(9, 16));
}

TEST_CASE("brute-force examples") {
  CHECK(moments_brute(2, 2) == moments_closed_form(2, 2));
  for (std::uint64_t b : {1u, 3u, 7u}) {
    const auto z = moments_brute(b, 1);
    CHECK(z.m1 == 0);
    CHECK(z.m2 == 0);
    CHECK(z.m3 == 0);
    CHECK(z.m4 == 0);
  }
  CHECK(moments_brute(4, 2).m2 == Rational(3, 16));
  CHECK_THROWS_AS(moments_brute(16, 16), InfeasibleError);
}

TEST_CASE("closed form = histogram brute force = direct pair counting, B <= 5, q <= 6") {
  for (std::uint64_t b = 1; b <= 5; ++b) {
    for (std::uint64_t q = 1; q <= 6; ++q) {
      const auto closed = moments_closed_form(b, q);
      CHECK(moments_brute(b, q) == closed);
      const auto d = direct_moments(b, q);
      CHECK(d[0] == closed.m1);
      CHECK(d[1] == closed.m2);
      CHECK(d[2] == closed.m3);
      CHECK(d[3] == closed.m4);
      CHECK(closed.m2 >= 0);
      CHECK(closed.m4 >= closed.m2 * closed.m2);
    }
  }
}

TEST_CASE("empirical moments agree with the closed form within 4 SE") {
  SUBCASE("q=2, B=2, 10^6 trials") {
    const auto e = moments_empirical(2, 2, 1'000'000, 31);
    CHECK(std::fabs(e.value[1] - 0.25L) <= 4 * e.standard_error[1]);
  }
  SUBCASE("q=512, B=2, 10^5 trials") {
    const auto e = moments_empirical(2, 512, 100'000, 32);
    const auto c = moments_closed_form(2, 512);
    CHECK(std::fabs(e.value[0]) <= 4 * e.standard_error[0]);
    CHECK(std::fabs(e.value[3] - to_long_double(c.m4)) <= 4 * e.standard_error[3]);
  }
  SUBCASE("workers do not change the estimate") {
    const auto a = moments_empirical(4, 50, 10'000, 33, 1);
    const auto b = moments_empirical(4, 50, 10'000, 33, 3);
    CHECK(a.value == b.value);
  }
  CHECK_THROWS_AS(moments_empirical(2, 4, 1, 1), Error);
}

TEST_CASE("fourth-moment bound") {
  CHECK(fourth_moment_bound_check(2, 1024).holds);
  CHECK(fourth_moment_bound_check(2, 1024).margin > 0);
  CHECK(fourth_moment_bound_check(4, 2048).holds);
  CHECK(fourth_moment_bound_check(Params(12, 10, 2048)).holds);
  CHECK_THROWS_AS(fourth_moment_bound_check(2, 362), NotApplicableError);
  CHECK(large_query_regime(2, 363));
  CHECK_FALSE(large_query_regime(2, 362));
}

TEST_CASE("phi") {
  CHECK(phi(0.1L) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::fabs(phi(5.0L)) < 1e-12L);
  CHECK(std::fabs(phi(-2.5L)) < 1e-12L);
  CHECK(phi(phi_argmax()) < 200.0L);
  for (long double x = -10; x <= 10; x += 0.01L) {
    CHECK(phi(x) == doctest::Approx(phi_factored(x)).epsilon(1e-12).scale(1));
    CHECK(phi(x) < 200.0L);
  }
  // The critical point is where phi peaks on a fine grid around it.
  const long double xs = phi_argmax();
  CHECK(phi(xs) >= phi(xs - 1e-4L));
  CHECK(phi(xs) >= phi(xs + 1e-4L));
}

TEST_CASE("E phi(cX) > 1/2 from closed-form moments") {
  for (auto [b, q] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{2, 512}, {2, 1024}, {4, 2048}, {8, 4096}}) {
    CHECK(expected_phi_scaled(moments_closed_form(b, q), b, q) > 0.5L);
  }
}

TEST_CASE("markov_lower") {
  CHECK(markov_lower(0.5L, 200.0L) == doctest::Approx(1.0 / 400));
  CHECK(markov_lower(0.0L, 3.0L) == 0.0L);
  CHECK(markov_lower(3.0L, 3.0L) == 1.0L);
  CHECK_THROWS_AS(markov_lower(1.0L, 0.0L), Error);
  CHECK_THROWS_AS(markov_lower(1.0L, -1.0L), Error);
  CHECK(markov_lower(0.2L, 1.0L) < markov_lower(0.3L, 1.0L));
  CHECK(markov_lower(0.2L, 1.0L) > markov_lower(0.2L, 2.0L));
}

TEST_CASE("polynomial tail confirmed by Monte Carlo") {
  const auto a = tail_probability_check(2, 512, 100'000, 41);
  CHECK(a.confirmed);
  CHECK(a.threshold == doctest::Approx(std::sqrt(512.0 * 511) / std::sqrt(2.0) / 10));
  const auto b = tail_probability_check(4, 2048, 100'000, 42);
  CHECK(b.confirmed);
  CHECK_THROWS_AS(tail_probability_check(2, 4, 100'000, 43), NotApplicableError);
}
