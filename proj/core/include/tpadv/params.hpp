#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpadv {

/// The (n, m, q) triple: permutation width, truncated bits, query count.
///
/// Computational modules work with n <= 63 so that 2^n fits in 64 bits.
/// The closed-form bounds take their arguments separately and accept larger n.
class Params {
 public:
  static constexpr int kMaxBits = 63;

  Params(int n, int m, std::uint64_t q);

  int n() const { return n_; }
  int m() const { return m_; }
  std::uint64_t q() const { return q_; }

  /// B = 2^(n-m), the number of possible replies.
  std::uint64_t buckets() const { return std::uint64_t{1} << (n_ - m_); }
  /// C = 2^m, how many n-bit values share one reply.
  std::uint64_t capacity() const { return std::uint64_t{1} << m_; }
  /// N = 2^n.
  std::uint64_t domain() const { return std::uint64_t{1} << n_; }

  std::string to_string() const;

  friend bool operator==(const Params&, const Params&) = default;

 private:
  int n_;
  int m_;
  std::uint64_t q_;
};

/// Sequence of q replies, each in [0, B).
struct Transcript {
  std::vector<std::uint64_t> replies;

  /// Throws tpadv::Error unless the length is q and every entry is below B.
  void validate(const Params& p) const;
};

/// Occurrence counts of a transcript as a partition: nonzero parts, descending.
class CountProfile {
 public:
  CountProfile() = default;
  /// Sorts descending and drops zeros.
  explicit CountProfile(std::vector<std::uint64_t> parts);

  std::span<const std::uint64_t> parts() const { return parts_; }
  /// Number of nonzero buckets.
  std::size_t size() const { return parts_.size(); }
  std::uint64_t total() const;
  std::uint64_t max_part() const { return parts_.empty() ? 0 : parts_.front(); }
  /// Sum over parts of C(d, 2).
  std::uint64_t colliding_pairs() const;

  /// Whether the profile is feasible under a permutation: every part <= capacity.
  bool in_domain(std::uint64_t capacity) const { return max_part() <= capacity; }

  std::string to_string() const;

  friend bool operator==(const CountProfile&, const CountProfile&) = default;
  friend auto operator<=>(const CountProfile&, const CountProfile&) = default;

 private:
  std::vector<std::uint64_t> parts_;
};

}  // namespace tpadv
