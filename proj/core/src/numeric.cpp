#include "tpadv/numeric.hpp"

#include <cstdio>

namespace tpadv {

std::string to_string(Arithmetic a) { return a == Arithmetic::exact ? "exact" : "fast"; }

Arithmetic parse_arithmetic(const std::string& s) {
  if (s == "exact") return Arithmetic::exact;
  if (s == "fast") return Arithmetic::fast;
  throw Error("unknown arithmetic mode '" + s + "' (expected exact|fast)");
}

Integer pow2(unsigned e) {
  Integer z;
  mpz_ui_pow_ui(z.get_mpz_t(), 2, e);
  return z;
}

Integer ipow(const Integer& base, std::uint64_t e) {
  Integer z;
  mpz_pow_ui(z.get_mpz_t(), base.get_mpz_t(), static_cast<unsigned long>(e));
  return z;
}

Integer ipow(std::uint64_t base, std::uint64_t e) { return ipow(to_integer(base), e); }

Integer to_integer(std::uint64_t v) {
  Integer z;
  mpz_import(z.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return z;
}

long double to_long_double(const Integer& z) {
  if (z == 0) return 0.0L;
  const auto bits = mpz_sizeinbase(z.get_mpz_t(), 2);
  if (bits <= 64) {
    // Exact for |z| < 2^64 since long double carries a 64-bit significand.
    Integer a = abs(z);
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, -1, sizeof(v), 0, 0, a.get_mpz_t());
    const long double r = static_cast<long double>(v);
    return z < 0 ? -r : r;
  }
  const unsigned long shift = bits - 64;
  Integer top = z >> shift;
  return std::ldexp(to_long_double(top), static_cast<int>(shift));
}

long double to_long_double(const Rational& r) {
  const Integer& num = r.get_num();
  const Integer& den = r.get_den();
  if (num == 0) return 0.0L;
  const long nb = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
  const long db = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  // Scale so the integer quotient carries ~80 significant bits.
  const long shift = 80 - (nb - db);
  Integer q;
  if (shift >= 0) {
    Integer scaled = num << static_cast<unsigned long>(shift);
    mpz_tdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  } else {
    Integer scaled = den << static_cast<unsigned long>(-shift);
    mpz_tdiv_q(q.get_mpz_t(), num.get_mpz_t(), scaled.get_mpz_t());
  }
  return std::ldexp(to_long_double(q), static_cast<int>(-shift));
}

long double log_of(const Integer& z) {
  if (z <= 0) throw Error("log_of: non-positive argument");
  const auto bits = mpz_sizeinbase(z.get_mpz_t(), 2);
  if (bits <= 64) return std::log(to_long_double(z));
  const unsigned long shift = bits - 64;
  Integer top = z >> shift;
  return std::log(to_long_double(top)) + static_cast<long double>(shift) * std::log(2.0L);
}

const Rational& Scalar::rational() const {
  if (!is_exact()) throw Error("Scalar: value is not exact");
  return std::get<Rational>(v_);
}

long double Scalar::real() const {
  if (is_exact()) return to_long_double(std::get<Rational>(v_));
  return std::get<long double>(v_);
}

std::string Scalar::to_string() const {
  if (is_exact()) return std::get<Rational>(v_).get_str();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.21Lg", std::get<long double>(v_));
  return buf;
}

void RunningMoments::merge(const RunningMoments& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const auto na = static_cast<long double>(n_);
  const auto nb = static_cast<long double>(o.n_);
  const long double delta = o.mean_ - mean_;
  const long double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += o.m2_ + delta * delta * na * nb / total;
  n_ += o.n_;
}

long double RunningMoments::sample_variance() const {
  if (n_ < 2) return std::numeric_limits<long double>::quiet_NaN();
  return m2_ / static_cast<long double>(n_ - 1);
}

long double RunningMoments::jackknife_standard_error() const {
  if (n_ < 2) return std::numeric_limits<long double>::quiet_NaN();
  // Leave-one-out means are (S - x_i)/(n-1); their spread gives
  // sqrt((n-1)/n * sum (theta_i - theta_bar)^2) = sqrt(M2 / (n(n-1))).
  const auto n = static_cast<long double>(n_);
  return std::sqrt(m2_ / (n * (n - 1)));
}

}  // namespace tpadv
