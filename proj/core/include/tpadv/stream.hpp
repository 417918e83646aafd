#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tpadv/game.hpp"
#include "tpadv/numeric.hpp"

namespace tpadv::stream {

/// Up to 128-bit block; inputs and outputs of a KeyedPermutation.
using Block = unsigned __int128;

std::string to_string(Block b);

/// A bijection on [0, 2^bits).
class KeyedPermutation {
 public:
  virtual ~KeyedPermutation() = default;
  virtual int bits() const = 0;
  virtual Block apply(Block x) const = 0;
  virtual std::string kind() const = 0;
  virtual std::uint64_t seed() const = 0;
};

/// Tabulated permutation for small n.
class TablePermutation final : public KeyedPermutation {
 public:
  /// Wraps an arbitrary table of 2^n entries. Bijectivity is not enforced so
  /// that corrupted tables can be used as negative controls; see is_bijective().
  static TablePermutation from_table(int n, std::vector<std::uint32_t> table, std::uint64_t seed = 0);

  int bits() const override { return n_; }
  Block apply(Block x) const override;
  std::string kind() const override { return "explicit"; }
  std::uint64_t seed() const override { return seed_; }

  std::span<const std::uint32_t> table() const { return table_; }
  bool is_bijective() const;

 private:
  TablePermutation(int n, std::vector<std::uint32_t> table, std::uint64_t seed);
  int n_;
  std::vector<std::uint32_t> table_;
  std::uint64_t seed_;
};

inline constexpr int kMaxExplicitBits = 20;

/// Uniformly random permutation of [0, 2^n) by Fisher-Yates over Rng(seed). n <= 20.
TablePermutation explicit_permutation(int n, std::uint64_t seed);

/// Balanced Feistel network, 8 rounds, SplitMix-based round function.
/// Bijective, but NOT a uniform permutation: for throughput demos only.
class FeistelPermutation final : public KeyedPermutation {
 public:
  FeistelPermutation(int n, std::uint64_t key);

  int bits() const override { return n_; }
  Block apply(Block x) const override;
  Block inverse(Block y) const;
  std::string kind() const override { return "feistel-demo"; }
  std::uint64_t seed() const override { return key_; }

  static constexpr int kRounds = 8;

 private:
  std::uint64_t round(int i, std::uint64_t half) const;

  int n_;
  int half_bits_;
  std::uint64_t half_mask_;
  std::uint64_t key_;
  std::uint64_t round_keys_[kRounds];
};

/// n even, 2 <= n <= 128.
FeistelPermutation demo_permutation(int n, std::uint64_t key);

/// y >> m: keeps the n-m most significant bits of an n-bit value.
Block truncate(Block y, int n, int m);

enum class Packing { bit_packed, byte_aligned };
std::string to_string(Packing p);
Packing parse_packing(const std::string& s);

struct StreamConfig {
  int n = 0;
  int m = 0;
  std::uint64_t count = 0;
  Block start = 0;
  Packing packing = Packing::bit_packed;

  int symbol_bits() const { return n - m; }
  /// Throws Error unless 1 <= n <= 128, 0 <= m < n and start + count <= 2^n.
  void validate() const;
};

class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(const std::uint8_t* data, std::size_t size) = 0;
};

class VectorSink final : public ByteSink {
 public:
  void write(const std::uint8_t* data, std::size_t size) override {
    bytes.insert(bytes.end(), data, data + size);
  }
  std::vector<std::uint8_t> bytes;
};

class OstreamSink final : public ByteSink {
 public:
  explicit OstreamSink(std::ostream& os) : os_(os) {}
  void write(const std::uint8_t* data, std::size_t size) override;

 private:
  std::ostream& os_;
};

class DiscardSink final : public ByteSink {
 public:
  void write(const std::uint8_t*, std::size_t size) override { written += size; }
  std::uint64_t written = 0;
};

/// Symbols per work unit; a multiple of 8 so each full unit ends on a byte boundary.
inline constexpr std::uint64_t kStreamChunk = 1 << 16;

/// Emits truncate(perm(c)) for c = start, ..., start + count - 1.
///
/// Bit-packed: symbols are concatenated MSB-first and the final byte is
/// zero-padded. Byte-aligned: each symbol is written big-endian in
/// ceil((n-m)/8) bytes, the padding occupying the high bits. The byte stream
/// does not depend on `workers`. Returns the number of bytes written.
std::uint64_t generate_stream(const KeyedPermutation& perm, const StreamConfig& cfg, ByteSink& sink,
                              unsigned workers = 1);

/// Inverse of the packing step.
std::vector<Block> unpack_stream(std::span<const std::uint8_t> bytes, int symbol_bits,
                                 std::uint64_t count, Packing packing);

/// Byte length of a stream of q symbols; exact for q up to 2^64 and beyond.
Integer stream_length_bytes(int n, int m, const Integer& q, Packing packing = Packing::bit_packed);

struct BalanceReport {
  bool pass = false;
  std::vector<std::uint64_t> histogram;  // indexed by (n-m)-bit prefix
};

/// Sweeps all 2^n inputs; passes iff every prefix occurs exactly 2^m times. n <= 24.
BalanceReport balance_check(const KeyedPermutation& perm, int m);

/// stam_simplified(n, m, q) = q / 2^((n+m)/2). Throws outside q <= (3/4) 2^n.
long double security_margin(int n, int m, long double q);

struct Throughput {
  double bytes_per_second = 0;
  double ns_per_symbol = 0;
  double median_seconds = 0;
  std::uint64_t bytes = 0;
};

/// Median over `repetitions` timed runs of generate_stream into a DiscardSink.
Throughput throughput_bench(const KeyedPermutation& perm, const StreamConfig& cfg,
                            unsigned repetitions, unsigned workers = 1);

/// JSON sidecar describing a generated stream.
std::string stream_metadata(const KeyedPermutation& perm, const StreamConfig& cfg);

/// Distinguishing game in which the permutation arm reads the first q symbols
/// of a fresh explicit-permutation stream per trial (n <= 20), and the
/// function arm is as in play_game.
GameResult stream_prefix_game(const Params& p, const Rule& rule, std::uint64_t trials_per_arm,
                              std::uint64_t seed, unsigned workers = 1);

}  // namespace tpadv::stream
