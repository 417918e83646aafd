#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tpadv/numeric.hpp"

namespace tpadv::cli {

enum class Format { csv, json };

/// Inclusive integer range; `hi` may be left open ("full") and resolved per n.
struct Range {
  std::vector<long double> values;  // explicit list, if given as a,b,c
  long double lo = 0;
  long double hi = 0;
  bool hi_full = false;             // hi = 2^n
  bool hi_three_quarters = false;   // hi = floor(3/4 * 2^n)
  bool is_list() const { return !values.empty(); }
};

/// Parses "7", "2^10", "lo:hi", "lo:full", "lo:3/4", or "a,b,c".
Range parse_range(const std::string& text);
/// Parses a single non-negative integer or power "2^k".
long double parse_count(const std::string& text);

struct RunConfig {
  std::string command;
  std::optional<std::string> n, m, q;        // single values
  std::optional<std::string> n_range, m_range, q_range;
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  Arithmetic mode = Arithmetic::exact;
  Format format = Format::csv;
  std::string out;  // empty = stdout

  // Command-specific options.
  std::string direction = "R>1";
  std::string rule = "optimal";
  std::optional<long double> threshold;
  std::optional<std::uint64_t> buckets;
  std::string action = "balance";
  std::string perm = "explicit";
  std::string packing = "bit-packed";
  std::uint64_t count = 0;
  std::string start = "0";
  std::string stream_out;
  unsigned repetitions = 5;
  std::uint64_t max_profiles = 1'000'000;
  std::uint64_t max_transcripts = 10'000'000;
};

/// One output cell. Real values keep their full decimal text.
struct Cell {
  enum class Kind { text, integer, real, boolean, empty };
  Kind kind = Kind::empty;
  std::string text;
  bool flag = false;
};

Cell text(std::string s);
Cell integer(std::uint64_t v);
Cell integer_signed(long long v);
Cell real(long double v);
Cell boolean(bool b);
Cell empty();

struct Row {
  std::vector<std::pair<std::string, Cell>> cells;
  Row& add(std::string column, Cell c) {
    cells.emplace_back(std::move(column), std::move(c));
    return *this;
  }
};

struct Table {
  std::vector<Row> rows;
  bool all_pass = true;
};

/// Writes CSV (header from the first row) or JSON Lines.
void write_table(const Table& t, Format f, std::ostream& os);

/// Version string embedded in every row.
const char* version();

/// Validates the configuration and runs the command. Throws tpadv::Error on
/// invalid input before doing any work.
Table run(const RunConfig& cfg);

Table cmd_exact(const RunConfig& cfg);
Table cmd_bounds(const RunConfig& cfg);
Table cmd_mc(const RunConfig& cfg);
Table cmd_game(const RunConfig& cfg);
Table cmd_moments(const RunConfig& cfg);
Table cmd_lemmas(const RunConfig& cfg);
Table cmd_stream(const RunConfig& cfg);
Table cmd_bench(const RunConfig& cfg);

const std::vector<std::string>& commands();

}  // namespace tpadv::cli
