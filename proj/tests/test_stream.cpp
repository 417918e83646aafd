#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "tpadv/bounds.hpp"
#include "tpadv/exact.hpp"
#include "tpadv/stream.hpp"

using namespace tpadv;
using namespace tpadv::stream;

namespace {

std::vector<std::uint8_t> generate(const KeyedPermutation& perm, StreamConfig cfg, unsigned workers = 1) {
  VectorSink sink;
  const auto written = generate_stream(perm, cfg, sink, workers);
  CHECK(written == sink.bytes.size());
  return sink.bytes;
}

}  // namespace

TEST_CASE("truncate") {
  CHECK(truncate(0b1011, 4, 2) == 0b10);
  CHECK(truncate(0xff, 8, 0) == 0xff);
  CHECK(truncate(0x80, 8, 7) == 1);
  const Block top = Block{1} << 127;
  CHECK(truncate(top, 128, 64) == (Block{1} << 63));
  CHECK(to_string(top) == "170141183460469231731687303715884105728");
  CHECK(to_string(Block{0}) == "0");
}

TEST_CASE("explicit permutation") {
  const auto p = explicit_permutation(10, 3);
  CHECK(p.bits() == 10);
  CHECK(p.kind() == "explicit");
  CHECK(p.seed() == 3);
  CHECK(p.is_bijective());
  std::set<std::uint32_t> seen(p.table().begin(), p.table().end());
  CHECK(seen.size() == 1024);
  CHECK(*seen.rbegin() == 1023);
  const auto same = explicit_permutation(10, 3);
  CHECK(std::equal(p.table().begin(), p.table().end(), same.table().begin()));
  const auto other = explicit_permutation(10, 4);
  CHECK_FALSE(std::equal(p.table().begin(), p.table().end(), other.table().begin()));
  CHECK_THROWS_AS(explicit_permutation(kMaxExplicitBits + 1, 1), Error);

  CHECK_THROWS_AS(TablePermutation::from_table(2, {0, 1, 2}), Error);
  CHECK_THROWS_AS(TablePermutation::from_table(2, {0, 1, 2, 4}), Error);
  CHECK_FALSE(TablePermutation::from_table(2, {0, 1, 1, 3}).is_bijective());
}

TEST_CASE("explicit permutation is uniform on small n") {
  // n = 2: 24 permutations, each should appear about 1/24 of the time.
  std::map<std::vector<std::uint32_t>, int> counts;
  const int draws = 48'000;
  for (int s = 0; s < draws; ++s) {
    const auto p = explicit_permutation(2, static_cast<std::uint64_t>(s));
    counts[{p.table().begin(), p.table().end()}]++;
  }
  CHECK(counts.size() == 24);
  const double expect = draws / 24.0;
  const double sd = std::sqrt(expect * (1 - 1 / 24.0));
  for (const auto& [t, c] : counts) CHECK(std::fabs(c - expect) < 5 * sd);
}

TEST_CASE("Feistel permutation") {
  for (int n : {2, 8, 16, 64, 100, 128}) {
    const FeistelPermutation f(n, 99);
    CHECK(f.kind() == "feistel-demo");
    const Block mask = n == 128 ? ~Block{0} : (Block{1} << n) - 1;
    for (std::uint64_t i = 0; i < 500; ++i) {
      const Block x = (Block{mix64(i)} << 64 | mix64(i + 1000)) & mask;
      const Block y = f.apply(x);
      CHECK(y <= mask);
      CHECK(f.inverse(y) == x);
    }
  }
  for (int n : {2, 4, 12}) {
    std::set<Block> image;
    const auto f = demo_permutation(n, 5);
    for (Block x = 0; x < (Block{1} << n); ++x) image.insert(f.apply(x));
    CHECK(image.size() == (std::size_t{1} << n));
  }
  CHECK_THROWS_AS(FeistelPermutation(7, 1), Error);
  CHECK_THROWS_AS(FeistelPermutation(130, 1), Error);
  CHECK_THROWS_AS(FeistelPermutation(0, 1), Error);
}

TEST_CASE("packing names") {
  CHECK(to_string(Packing::bit_packed) == "bit-packed");
  CHECK(to_string(Packing::byte_aligned) == "byte-aligned");
  CHECK(parse_packing("bit") == Packing::bit_packed);
  CHECK(parse_packing("byte-aligned") == Packing::byte_aligned);
  CHECK_THROWS_AS(parse_packing("nibble"), Error);
}

TEST_CASE("generate_stream examples") {
  const auto ident = TablePermutation::from_table(3, {0, 1, 2, 3, 4, 5, 6, 7});
  SUBCASE("empty stream") {
    CHECK(generate(ident, {3, 1, 0, 0, Packing::bit_packed}).empty());
  }
  SUBCASE("identity, n=3, m=1: prefixes 0,0,1,1,2,2,3,3") {
    // 2-bit symbols 00 00 01 01 10 10 11 11 -> 0x05 0xAF.
    const auto bytes = generate(ident, {3, 1, 8, 0, Packing::bit_packed});
    REQUIRE(bytes.size() == 2);
    CHECK(bytes[0] == 0x05);
    CHECK(bytes[1] == 0xAF);
    const auto aligned = generate(ident, {3, 1, 8, 0, Packing::byte_aligned});
    CHECK(aligned == std::vector<std::uint8_t>{0, 0, 1, 1, 2, 2, 3, 3});
  }
  SUBCASE("final byte is zero-padded") {
    // Three 2-bit symbols 01 01 10 -> 0101 1000.
    const auto bytes = generate(ident, {3, 1, 3, 2, Packing::bit_packed});
    CHECK(bytes == std::vector<std::uint8_t>{0x58});
  }
  SUBCASE("n=8, m=4, 256 symbols -> 128 bytes") {
    const auto p = explicit_permutation(8, 1);
    CHECK(generate(p, {8, 4, 256, 0, Packing::bit_packed}).size() == 128);
    CHECK(generate(p, {8, 4, 256, 0, Packing::byte_aligned}).size() == 256);
  }
  SUBCASE("wide symbols are big-endian") {
    const auto f = demo_permutation(16, 2);
    const auto bytes = generate(f, {16, 4, 1, 7, Packing::byte_aligned});
    const Block sym = truncate(f.apply(7), 16, 4);
    REQUIRE(bytes.size() == 2);
    CHECK(bytes[0] == static_cast<std::uint8_t>(sym >> 8));
    CHECK(bytes[1] == static_cast<std::uint8_t>(sym & 0xff));
  }
}

TEST_CASE("StreamConfig validation") {
  CHECK_THROWS_AS((StreamConfig{3, 3, 1, 0}).validate(), Error);
  CHECK_THROWS_AS((StreamConfig{3, 1, 9, 0}).validate(), Error);
  CHECK_THROWS_AS((StreamConfig{3, 1, 2, 7}).validate(), Error);
  CHECK_NOTHROW((StreamConfig{3, 1, 1, 7}).validate());
  CHECK_THROWS_AS((StreamConfig{129, 1, 1, 0}).validate(), Error);
  CHECK_NOTHROW((StreamConfig{128, 64, 5, ~Block{0} - 4}).validate());
  CHECK_THROWS_AS((StreamConfig{128, 64, 6, ~Block{0} - 4}).validate(), Error);
}

TEST_CASE("unpack round trip for every symbol width") {
  for (int n : {4, 8, 12, 20, 64, 128}) {
    const auto f = demo_permutation(n, 17);
    for (int m : {0, 1, n / 2, n - 1}) {
      for (auto packing : {Packing::bit_packed, Packing::byte_aligned}) {
        const StreamConfig cfg{n, m, 300, 5, packing};
        const auto count = std::min<std::uint64_t>(cfg.count, (std::uint64_t{1} << std::min(n, 20)) - 5);
        StreamConfig c = cfg;
        c.count = count;
        const auto bytes = generate(f, c);
        CHECK(Integer(static_cast<unsigned long>(bytes.size())) ==
              stream_length_bytes(n, m, to_integer(count), packing));
        const auto symbols = unpack_stream(bytes, n - m, count, packing);
        REQUIRE(symbols.size() == count);
        for (std::uint64_t i = 0; i < count; ++i) {
          CHECK(symbols[i] == truncate(f.apply(5 + i), n, m));
        }
      }
    }
  }
}

TEST_CASE("bit-packed and byte-aligned carry the same symbols") {
  const auto p = explicit_permutation(12, 8);
  const StreamConfig a{12, 3, 4096, 0, Packing::bit_packed};
  const StreamConfig b{12, 3, 4096, 0, Packing::byte_aligned};
  CHECK(unpack_stream(generate(p, a), 9, 4096, Packing::bit_packed) ==
        unpack_stream(generate(p, b), 9, 4096, Packing::byte_aligned));
}

TEST_CASE("stream bytes do not depend on the worker count") {
  const auto f = demo_permutation(40, 3);
  // Several chunks plus an odd tail, with 5-bit symbols so chunk joins are unaligned.
  const StreamConfig cfg{40, 35, 3 * kStreamChunk + 13, 123, Packing::bit_packed};
  const auto one = generate(f, cfg, 1);
  CHECK(generate(f, cfg, 2) == one);
  CHECK(generate(f, cfg, 4) == one);
  CHECK(generate(f, cfg, 7) == one);
  const auto sym = unpack_stream(one, 5, cfg.count, Packing::bit_packed);
  CHECK(sym[kStreamChunk] == truncate(f.apply(123 + kStreamChunk), 40, 35));
}

TEST_CASE("balance check") {
  for (int n : {4, 8, 12}) {
    for (int m = 0; m < n; m += 3) {
      const auto r = balance_check(explicit_permutation(n, 21), m);
      CHECK(r.pass);
      CHECK(r.histogram.size() == (std::size_t{1} << (n - m)));
      for (auto c : r.histogram) CHECK(c == (std::uint64_t{1} << m));
    }
  }
  CHECK(balance_check(demo_permutation(16, 1), 5).pass);
  // Negative control: one duplicated output breaks the balance.
  auto t = explicit_permutation(8, 1);
  std::vector<std::uint32_t> bad(t.table().begin(), t.table().end());
  const auto j = std::find(bad.begin(), bad.end(), 0u) - bad.begin();
  const auto k = std::find(bad.begin(), bad.end(), 255u) - bad.begin();
  bad[k] = bad[j];
  const auto broken = TablePermutation::from_table(8, bad);
  CHECK_FALSE(broken.is_bijective());
  const auto r = balance_check(broken, 4);
  CHECK_FALSE(r.pass);
  CHECK(r.histogram.front() == 17);
  CHECK(r.histogram.back() == 15);
  CHECK_THROWS_AS(balance_check(demo_permutation(26, 1), 3), Error);
}

TEST_CASE("security margin and stream length at n=128") {
  CHECK(security_margin(128, 64, 0x1p64L) == 0x1p-32L);
  CHECK(security_margin(128, 64, 0x1p64L) == bounds::stam_simplified(128, 64, 0x1p64L).value);
  CHECK(std::log2(security_margin(128, 0, 0x1p32L)) == doctest::Approx(-32.0));
  CHECK_THROWS_AS(security_margin(8, 4, 200), Error);
  // 2^64 symbols of 64 bits.
  CHECK(stream_length_bytes(128, 64, pow2(64)) == pow2(67));
  CHECK(stream_length_bytes(128, 64, pow2(64), Packing::byte_aligned) == pow2(67));
  CHECK(stream_length_bytes(8, 5, 3) == 2);
  CHECK(stream_length_bytes(8, 5, 3, Packing::byte_aligned) == 3);
  CHECK(stream_length_bytes(8, 5, 0) == 0);
}

TEST_CASE("throughput") {
  const auto f = demo_permutation(128, 4);
  const StreamConfig small{128, 64, 1 << 14, 0, Packing::bit_packed};
  const auto t = throughput_bench(f, small, 3);
  CHECK(t.bytes == (1u << 14) * 8);
  CHECK(t.bytes_per_second > 0);
  CHECK(t.ns_per_symbol > 0);
  CHECK(t.median_seconds > 0);
  const StreamConfig big{128, 64, 1 << 18, 0, Packing::bit_packed};
  const auto u = throughput_bench(f, big, 3);
  CHECK(u.bytes == 16 * t.bytes);
  // Work is linear in the symbol count: the per-symbol cost stays within a
  // loose factor between the two sizes.
  CHECK(u.ns_per_symbol < 10 * t.ns_per_symbol);
  CHECK(t.ns_per_symbol < 10 * u.ns_per_symbol);
}

TEST_CASE("stream metadata") {
  const auto f = demo_permutation(128, 77);
  const StreamConfig cfg{128, 64, 10, Block{1} << 100, Packing::byte_aligned};
  const auto j = nlohmann::json::parse(stream_metadata(f, cfg));
  CHECK(j["n"] == 128);
  CHECK(j["m"] == 64);
  CHECK(j["count"] == 10);
  CHECK(j["start_counter"] == "1267650600228229401496703205376");
  CHECK(j["packing"] == "byte-aligned");
  CHECK(j["permutation"] == "feistel-demo");
  CHECK(j["seed"] == 77);
  CHECK(j.contains("disclaimer"));
}

TEST_CASE("stream prefix game matches the exact optimal advantage") {
  const Params p(6, 2, 12);
  const Rational exact = exact_advantage(p).value.rational();
  const auto g = stream_prefix_game(p, optimal_rule(Direction::r_greater), 50'000, 13, 2);
  CHECK(std::fabs(g.empirical_advantage - to_long_double(exact)) <= 4 * g.standard_error);
  const auto h = stream_prefix_game(p, optimal_rule(Direction::r_greater), 50'000, 13, 1);
  CHECK(g.empirical_advantage == h.empirical_advantage);
}
