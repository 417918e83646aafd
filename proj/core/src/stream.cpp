#include "tpadv/stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "tpadv/bounds.hpp"
#include "tpadv/parallel.hpp"
#include "tpadv/rng.hpp"

namespace tpadv::stream {
namespace {

Block low_mask(int bits) {
  return bits >= 128 ? ~Block{0} : (Block{1} << bits) - 1;
}

// MSB-first bit accumulator.
class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(Block v, int width) {
    while (width > 0) {
      const int take = std::min(width, 32);
      const auto piece = static_cast<std::uint64_t>((v >> (width - take)) & low_mask(take));
      acc_ = (acc_ << take) | piece;
      bits_ += take;
      width -= take;
      while (bits_ >= 8) {
        bits_ -= 8;
        out_.push_back(static_cast<std::uint8_t>(acc_ >> bits_));
      }
      acc_ &= (std::uint64_t{1} << bits_) - 1;
    }
  }

  void flush() {
    if (bits_ > 0) out_.push_back(static_cast<std::uint8_t>(acc_ << (8 - bits_)));
    acc_ = 0;
    bits_ = 0;
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint64_t acc_ = 0;
  int bits_ = 0;
};

void encode_range(const KeyedPermutation& perm, const StreamConfig& cfg, Block first,
                  std::uint64_t count, std::vector<std::uint8_t>& out) {
  const int w = cfg.symbol_bits();
  if (cfg.packing == Packing::bit_packed) {
    BitWriter writer(out);
    for (std::uint64_t i = 0; i < count; ++i) {
      writer.put(truncate(perm.apply(first + i), cfg.n, cfg.m), w);
    }
    writer.flush();
    return;
  }
  const int bytes = (w + 7) / 8;
  for (std::uint64_t i = 0; i < count; ++i) {
    const Block s = truncate(perm.apply(first + i), cfg.n, cfg.m);
    for (int b = bytes - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(s >> (8 * b)));
  }
}

}  // namespace

std::string to_string(Block b) {
  if (b == 0) return "0";
  std::string s;
  while (b > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(b % 10)));
    b /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

TablePermutation::TablePermutation(int n, std::vector<std::uint32_t> table, std::uint64_t seed)
    : n_(n), table_(std::move(table)), seed_(seed) {}

TablePermutation TablePermutation::from_table(int n, std::vector<std::uint32_t> table,
                                              std::uint64_t seed) {
  if (n < 1 || n > kMaxExplicitBits) throw Error("TablePermutation: n must be in [1, 20]");
  if (table.size() != (std::size_t{1} << n)) throw Error("TablePermutation: table must have 2^n entries");
  for (auto v : table) {
    if (v >> n) throw Error("TablePermutation: entry out of range");
  }
  return TablePermutation(n, std::move(table), seed);
}

Block TablePermutation::apply(Block x) const {
  if (x >> n_) throw Error("TablePermutation: input out of range");
  return table_[static_cast<std::size_t>(x)];
}

bool TablePermutation::is_bijective() const {
  std::vector<bool> seen(table_.size(), false);
  for (auto v : table_) {
    if (seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

TablePermutation explicit_permutation(int n, std::uint64_t seed) {
  if (n < 1 || n > kMaxExplicitBits) {
    throw Error("explicit_permutation: n must be in [1, 20], got " + std::to_string(n));
  }
  std::vector<std::uint32_t> table(std::size_t{1} << n);
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = static_cast<std::uint32_t>(i);
  Rng rng(seed);
  for (std::size_t i = table.size() - 1; i > 0; --i) {
    std::swap(table[i], table[rng.below(i + 1)]);
  }
  return TablePermutation::from_table(n, std::move(table), seed);
}

FeistelPermutation::FeistelPermutation(int n, std::uint64_t key)
    : n_(n), half_bits_(n / 2), key_(key) {
  if (n < 2 || n > 128 || n % 2 != 0) {
    throw Error("demo_permutation: n must be even and in [2, 128], got " + std::to_string(n));
  }
  half_mask_ = half_bits_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << half_bits_) - 1;
  std::uint64_t state = key;
  for (auto& k : round_keys_) {
    state = mix64(state);
    k = state;
  }
}

std::uint64_t FeistelPermutation::round(int i, std::uint64_t half) const {
  return mix64(half ^ round_keys_[i]) & half_mask_;
}

Block FeistelPermutation::apply(Block x) const {
  if (n_ < 128 && (x >> n_)) throw Error("FeistelPermutation: input out of range");
  auto left = static_cast<std::uint64_t>(x >> half_bits_) & half_mask_;
  auto right = static_cast<std::uint64_t>(x) & half_mask_;
  for (int i = 0; i < kRounds; ++i) {
    const std::uint64_t next = left ^ round(i, right);
    left = right;
    right = next;
  }
  return (Block{left} << half_bits_) | right;
}

Block FeistelPermutation::inverse(Block y) const {
  if (n_ < 128 && (y >> n_)) throw Error("FeistelPermutation: input out of range");
  auto left = static_cast<std::uint64_t>(y >> half_bits_) & half_mask_;
  auto right = static_cast<std::uint64_t>(y) & half_mask_;
  for (int i = kRounds - 1; i >= 0; --i) {
    const std::uint64_t prev = right ^ round(i, left);
    right = left;
    left = prev;
  }
  return (Block{left} << half_bits_) | right;
}

FeistelPermutation demo_permutation(int n, std::uint64_t key) { return FeistelPermutation(n, key); }

Block truncate(Block y, int n, int m) {
  if (n < 1 || n > 128 || m < 0 || m >= n) throw Error("truncate: need 0 <= m < n <= 128");
  if (n < 128 && (y >> n)) throw Error("truncate: y must be below 2^n");
  return y >> m;
}

std::string to_string(Packing p) {
  return p == Packing::bit_packed ? "bit-packed" : "byte-aligned";
}

Packing parse_packing(const std::string& s) {
  if (s == "bit-packed" || s == "bit") return Packing::bit_packed;
  if (s == "byte-aligned" || s == "byte") return Packing::byte_aligned;
  throw Error("unknown packing '" + s + "' (expected bit-packed or byte-aligned)");
}

void StreamConfig::validate() const {
  if (n < 1 || n > 128) throw Error("stream: n must be in [1, 128]");
  if (m < 0 || m >= n) throw Error("stream: m must satisfy 0 <= m < n");
  const Block top = low_mask(n);
  if (start > top) throw Error("stream: start counter must be below 2^n");
  if (count > 0 && Block{count - 1} > top - start) {
    throw Error("stream: counter overflow, start + count exceeds 2^n");
  }
}

void OstreamSink::write(const std::uint8_t* data, std::size_t size) {
  os_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!os_) throw Error("stream: write failed");
}

std::uint64_t generate_stream(const KeyedPermutation& perm, const StreamConfig& cfg, ByteSink& sink,
                              unsigned workers) {
  cfg.validate();
  if (perm.bits() != cfg.n) throw Error("generate_stream: permutation width differs from n");
  if (cfg.count == 0) return 0;
  const std::size_t chunks = chunk_count(cfg.count, kStreamChunk);
  const std::size_t batch = std::max<unsigned>(workers, 1);
  std::vector<std::vector<std::uint8_t>> buffers(batch);
  std::uint64_t written = 0;
  for (std::size_t base = 0; base < chunks; base += batch) {
    const std::size_t in_batch = std::min(batch, chunks - base);
    for_each_chunk(in_batch, workers, [&](std::size_t j) {
      const std::uint64_t first = (base + j) * kStreamChunk;
      const std::uint64_t len = std::min<std::uint64_t>(kStreamChunk, cfg.count - first);
      buffers[j].clear();
      encode_range(perm, cfg, cfg.start + first, len, buffers[j]);
    });
    for (std::size_t j = 0; j < in_batch; ++j) {
      sink.write(buffers[j].data(), buffers[j].size());
      written += buffers[j].size();
    }
  }
  return written;
}

std::vector<Block> unpack_stream(std::span<const std::uint8_t> bytes, int symbol_bits,
                                 std::uint64_t count, Packing packing) {
  if (symbol_bits < 1 || symbol_bits > 128) throw Error("unpack_stream: symbol width must be in [1, 128]");
  std::vector<Block> out;
  out.reserve(count);
  if (packing == Packing::byte_aligned) {
    const std::size_t width = (static_cast<std::size_t>(symbol_bits) + 7) / 8;
    if (bytes.size() < width * count) throw Error("unpack_stream: input too short");
    for (std::uint64_t i = 0; i < count; ++i) {
      Block v = 0;
      for (std::size_t b = 0; b < width; ++b) v = (v << 8) | bytes[i * width + b];
      out.push_back(v);
    }
    return out;
  }
  const auto needed_bits = static_cast<unsigned __int128>(count) * symbol_bits;
  if (static_cast<unsigned __int128>(bytes.size()) * 8 < needed_bits) {
    throw Error("unpack_stream: input too short");
  }
  std::size_t bit = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    Block v = 0;
    for (int k = 0; k < symbol_bits; ++k, ++bit) {
      v = (v << 1) | ((bytes[bit / 8] >> (7 - bit % 8)) & 1u);
    }
    out.push_back(v);
  }
  return out;
}

Integer stream_length_bytes(int n, int m, const Integer& q, Packing packing) {
  if (n < 1 || n > 128 || m < 0 || m >= n) throw Error("stream_length_bytes: need 0 <= m < n <= 128");
  if (q < 0) throw Error("stream_length_bytes: q must be non-negative");
  const long w = n - m;
  if (packing == Packing::byte_aligned) return q * ((w + 7) / 8);
  Integer bits = q * w;
  Integer bytes;
  mpz_cdiv_q_ui(bytes.get_mpz_t(), bits.get_mpz_t(), 8);
  return bytes;
}

BalanceReport balance_check(const KeyedPermutation& perm, int m) {
  const int n = perm.bits();
  if (n > 24) throw Error("balance_check: n must be at most 24");
  if (m < 0 || m >= n) throw Error("balance_check: m must satisfy 0 <= m < n");
  BalanceReport r;
  r.histogram.assign(std::size_t{1} << (n - m), 0);
  const std::uint64_t domain = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < domain; ++x) {
    ++r.histogram[static_cast<std::size_t>(truncate(perm.apply(x), n, m))];
  }
  const std::uint64_t expected = std::uint64_t{1} << m;
  r.pass = std::all_of(r.histogram.begin(), r.histogram.end(),
                       [&](std::uint64_t c) { return c == expected; });
  return r;
}

long double security_margin(int n, int m, long double q) {
  const auto s = bounds::stam_simplified(n, m, q);
  if (!s.valid) throw Error("security_margin: requires q <= (3/4) 2^n");
  return s.value;
}

Throughput throughput_bench(const KeyedPermutation& perm, const StreamConfig& cfg,
                            unsigned repetitions, unsigned workers) {
  if (repetitions == 0) throw Error("throughput_bench: repetitions must be at least 1");
  std::vector<double> seconds;
  std::uint64_t bytes = 0;
  for (unsigned r = 0; r < repetitions; ++r) {
    DiscardSink sink;
    const auto t0 = std::chrono::steady_clock::now();
    bytes = generate_stream(perm, cfg, sink, workers);
    const auto t1 = std::chrono::steady_clock::now();
    seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(seconds.begin(), seconds.end());
  const std::size_t mid = seconds.size() / 2;
  const double median = seconds.size() % 2 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
  Throughput t;
  t.bytes = bytes;
  t.median_seconds = median;
  const double safe = std::max(median, 1e-9);
  t.bytes_per_second = static_cast<double>(bytes) / safe;
  t.ns_per_symbol = cfg.count ? safe * 1e9 / static_cast<double>(cfg.count) : 0.0;
  return t;
}

std::string stream_metadata(const KeyedPermutation& perm, const StreamConfig& cfg) {
  std::string s = "{";
  s += "\"n\":" + std::to_string(cfg.n);
  s += ",\"m\":" + std::to_string(cfg.m);
  s += ",\"start_counter\":\"" + to_string(cfg.start) + "\"";
  s += ",\"count\":" + std::to_string(cfg.count);
  s += ",\"packing\":\"" + to_string(cfg.packing) + "\"";
  s += ",\"permutation\":\"" + perm.kind() + "\"";
  s += ",\"seed\":" + std::to_string(perm.seed());
  s += ",\"disclaimer\":\"indistinguishability bounds assume the keyed permutation is an ideal "
       "random permutation; the feistel-demo permutation is not\"";
  s += "}";
  return s;
}

GameResult stream_prefix_game(const Params& p, const Rule& rule, std::uint64_t trials_per_arm,
                              std::uint64_t seed, unsigned workers) {
  if (p.n() > kMaxExplicitBits) throw Error("stream_prefix_game: n must be at most 20");
  if (trials_per_arm == 0) throw Error("stream_prefix_game: trials per arm must be at least 1");
  const std::size_t chunks = chunk_count(trials_per_arm, kGameChunk);
  std::vector<std::uint64_t> fa(chunks, 0);
  std::vector<std::uint64_t> pa(chunks, 0);
  const StreamConfig cfg{p.n(), p.m(), p.q(), 0, Packing::bit_packed};
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    RuleEvaluator eval(p, rule);
    std::vector<std::uint64_t> replies;
    const std::uint64_t begin = c * kGameChunk;
    const std::uint64_t end = std::min(trials_per_arm, begin + kGameChunk);
    Rng function_rng(seed, 2 * c);
    for (std::uint64_t i = begin; i < end; ++i) {
      sample_function_replies(p, function_rng, replies);
      if (eval.accepts(profile_of(replies))) ++fa[c];
    }
    for (std::uint64_t i = begin; i < end; ++i) {
      const auto perm = explicit_permutation(p.n(), mix64(mix64(seed) ^ i));
      VectorSink sink;
      generate_stream(perm, cfg, sink);
      const auto symbols = unpack_stream(sink.bytes, cfg.symbol_bits(), cfg.count, cfg.packing);
      replies.assign(symbols.size(), 0);
      for (std::size_t k = 0; k < symbols.size(); ++k) replies[k] = static_cast<std::uint64_t>(symbols[k]);
      if (eval.accepts(profile_of(replies))) ++pa[c];
    }
  });
  std::uint64_t f = 0;
  std::uint64_t g = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    f += fa[c];
    g += pa[c];
  }
  GameResult r;
  r.trials_per_arm = trials_per_arm;
  const auto n = static_cast<long double>(trials_per_arm);
  r.accept_rate_function = static_cast<long double>(f) / n;
  r.accept_rate_permutation = static_cast<long double>(g) / n;
  r.empirical_advantage = std::fabs(r.accept_rate_permutation - r.accept_rate_function);
  r.standard_error = std::sqrt((r.accept_rate_function * (1 - r.accept_rate_function) +
                                r.accept_rate_permutation * (1 - r.accept_rate_permutation)) /
                               n);
  return r;
}

}  // namespace tpadv::stream
