#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include <gmpxx.h>

namespace tpadv {

using Integer = mpz_class;
using Rational = mpq_class;

/// Arithmetic substrate requested by the caller. Never switched implicitly.
enum class Arithmetic { exact, fast };

std::string to_string(Arithmetic a);
Arithmetic parse_arithmetic(const std::string& s);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an enumeration would exceed its configured ceiling.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Raised when an operation is called outside its stated applicability range.
class NotApplicableError : public Error {
 public:
  using Error::Error;
};

Integer pow2(unsigned e);
Integer ipow(const Integer& base, std::uint64_t e);
Integer ipow(std::uint64_t base, std::uint64_t e);
Integer to_integer(std::uint64_t v);

long double to_long_double(const Integer& z);
long double to_long_double(const Rational& r);

/// Natural log of a positive big integer without overflowing long double.
long double log_of(const Integer& z);

/// Value in natural-log space, with a distinguished representation of log(0).
class LogReal {
 public:
  constexpr LogReal() = default;
  static constexpr LogReal from_log(long double l) { return LogReal(l); }
  static constexpr LogReal zero() {
    return LogReal(-std::numeric_limits<long double>::infinity());
  }
  static constexpr LogReal one() { return LogReal(0.0L); }

  bool is_zero() const { return std::isinf(log_) && log_ < 0; }
  long double log() const { return log_; }
  long double value() const { return is_zero() ? 0.0L : std::exp(log_); }

  friend LogReal operator*(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogReal(a.log_ + b.log_);
  }
  friend LogReal operator/(LogReal a, LogReal b) {
    if (b.is_zero()) throw Error("LogReal: division by zero");
    if (a.is_zero()) return zero();
    return LogReal(a.log_ - b.log_);
  }
  friend bool operator<(LogReal a, LogReal b) { return a.log_ < b.log_; }

 private:
  constexpr explicit LogReal(long double l) : log_(l) {}
  long double log_ = 0.0L;
};

/// Exact rational or extended-precision real, depending on the mode that produced it.
class Scalar {
 public:
  Scalar() : v_(Rational(0)) {}
  Scalar(Rational r) : v_(std::move(r)) {}  // NOLINT(google-explicit-constructor)
  Scalar(long double x) : v_(x) {}          // NOLINT(google-explicit-constructor)

  bool is_exact() const { return std::holds_alternative<Rational>(v_); }
  const Rational& rational() const;
  long double real() const;
  /// Exact values print as canonical fractions, reals with 21 significant digits.
  std::string to_string() const;

 private:
  std::variant<Rational, long double> v_;
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& o) {
    add(o.sum_);
    add(o.comp_);
  }
  long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0.0L;
  long double comp_ = 0.0L;
};

/// Running count/mean/M2 with an order-fixed merge (Chan et al.).
class RunningMoments {
 public:
  void add(long double x) {
    ++n_;
    const long double delta = x - mean_;
    mean_ += delta / static_cast<long double>(n_);
    m2_ += delta * (x - mean_);
  }
  void merge(const RunningMoments& o);

  std::uint64_t count() const { return n_; }
  long double mean() const { return mean_; }
  long double sample_variance() const;
  /// Delete-one jackknife standard error of the mean; for a sample mean this
  /// coincides with s/sqrt(n).
  long double jackknife_standard_error() const;

 private:
  std::uint64_t n_ = 0;
  long double mean_ = 0.0L;
  long double m2_ = 0.0L;
};

/// 2^e as long double (exact for |e| within the exponent range).
inline long double exp2_ld(long double e) { return std::exp2(e); }

}  // namespace tpadv
