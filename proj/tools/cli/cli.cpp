#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include <json.hpp>

#include "tpadv/bounds.hpp"
#include "tpadv/exact.hpp"
#include "tpadv/game.hpp"
#include "tpadv/lemmas.hpp"
#include "tpadv/moments.hpp"
#include "tpadv/stream.hpp"

#ifndef TPADV_VERSION_STRING
#define TPADV_VERSION_STRING "0.0.0"
#endif

namespace tpadv::cli {
namespace {

using Clock = std::chrono::steady_clock;

std::string format_real(long double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.18Lg", v);
  return buf;
}

Cell milliseconds(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return {Cell::Kind::real, buf, false};
}

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid expansion
// ---------------------------------------------------------------------------

struct GridCell {
  int n = 0;
  int m = 0;
  long double q = 0;
};

Range resolve_range(const std::optional<std::string>& single, const std::optional<std::string>& range,
                    const char* name) {
  if (single && range) throw Error(std::string("give either --") + name + " or --" + name + "-range, not both");
  if (single) {
    Range r;
    r.lo = r.hi = parse_count(*single);
    return r;
  }
  if (range) return parse_range(*range);
  throw Error(std::string("missing --") + name + " or --" + name + "-range");
}

std::vector<long double> expand(const Range& r, int n) {
  if (r.is_list()) return r.values;
  long double hi = r.hi;
  if (r.hi_full) hi = std::exp2(static_cast<long double>(n));
  if (r.hi_three_quarters) hi = std::floor(0.75L * std::exp2(static_cast<long double>(n)));
  if (hi < r.lo) return {};
  if (hi - r.lo > 10'000'000) throw Error("sweep range too large");
  std::vector<long double> out;
  const auto span = static_cast<std::uint64_t>(hi - r.lo);
  for (std::uint64_t i = 0; i <= span; ++i) out.push_back(r.lo + static_cast<long double>(i));
  return out;
}

// q values above 2^n are kept only when `allow_beyond_domain` (bounds).
std::vector<GridCell> expand_grid(const RunConfig& cfg, int max_n, bool allow_beyond_domain) {
  const Range nr = resolve_range(cfg.n, cfg.n_range, "n");
  if (nr.hi_full || nr.hi_three_quarters) throw Error("--n-range cannot use 'full' or '3/4'");
  std::optional<Range> mr;
  if (cfg.m || cfg.m_range) mr = resolve_range(cfg.m, cfg.m_range, "m");
  const Range qr = resolve_range(cfg.q, cfg.q_range, "q");
  if (!nr.is_list() && nr.lo > nr.hi) throw Error("--n-range is empty");
  if (mr && !mr->is_list() && !mr->hi_full && mr->lo > mr->hi) throw Error("--m-range is empty");
  if (!qr.is_list() && !qr.hi_full && !qr.hi_three_quarters && qr.lo > qr.hi) {
    throw Error("--q-range is empty");
  }

  std::vector<GridCell> cells;
  for (long double nv : expand(nr, 0)) {
    if (nv < 1 || nv > max_n) {
      throw Error("n must be in [1, " + std::to_string(max_n) + "], got " + format_real(nv));
    }
    const int n = static_cast<int>(nv);
    std::vector<long double> ms;
    if (mr) {
      ms = expand(*mr, n);
    } else {
      for (int m = 0; m < n; ++m) ms.push_back(m);
    }
    for (long double mv : ms) {
      if (mv < 0 || mv >= n) continue;
      const long double domain = std::exp2(static_cast<long double>(n));
      for (long double q : expand(qr, n)) {
        if (q < 0 || std::floor(q) != q) throw Error("q must be a non-negative integer");
        if (!allow_beyond_domain && (q < 1 || q > domain)) continue;
        cells.push_back({n, static_cast<int>(mv), q});
      }
    }
  }
  if (cells.empty()) throw Error("the sweep contains no valid (n, m, q) cell");
  return cells;
}

std::uint64_t as_u64(long double q) {
  if (q > 9.2e18L) throw Error("q too large for this command");
  return static_cast<std::uint64_t>(q);
}

Row base_row(const RunConfig& cfg) {
  Row r;
  r.add("command", text(cfg.command))
      .add("version", text(version()))
      .add("seed", integer(cfg.seed))
      .add("workers", integer(cfg.workers))
      .add("mode", text(to_string(cfg.mode)));
  return r;
}

// Integral long doubles beyond 2^63 (such as 2^64) printed exactly.
std::string exact_integer_text(long double q) {
  Integer z;
  mpz_set_d(z.get_mpz_t(), static_cast<double>(q));
  return z.get_str();
}

void add_params(Row& r, int n, int m, long double q) {
  r.add("n", integer(static_cast<std::uint64_t>(n)))
      .add("m", integer(static_cast<std::uint64_t>(m)))
      .add("q", q <= 9.2e18L ? integer(static_cast<std::uint64_t>(q)) : text(exact_integer_text(q)));
}

void finish_row(Table& t, Row r, bool pass, const std::string& reason, Clock::time_point started) {
  r.add("reason", reason.empty() ? empty() : text(reason));
  r.add("pass", boolean(pass));
  r.add("elapsed_ms", milliseconds(elapsed_ms(started)));
  t.all_pass = t.all_pass && pass;
  t.rows.push_back(std::move(r));
}

Direction parse_direction(const std::string& s) {
  if (s == "R>1" || s == "greater" || s == "r_greater") return Direction::r_greater;
  if (s == "R<1" || s == "less" || s == "r_less") return Direction::r_less;
  throw Error("unknown direction '" + s + "' (expected R>1 or R<1)");
}

EnumerationLimits limits_of(const RunConfig& cfg) {
  return {cfg.max_profiles, cfg.max_transcripts};
}

// adv <= combined_upper, exactly when adv is rational.
bool dominated(const Scalar& adv, const Params& p) {
  if (adv.is_exact()) {
    const Rational& a = adv.rational();
    if (a > bounds::birthday_upper_rational(p.n(), p.q())) return false;
    if (a > 1) return false;
    return 4 * a * a <= bounds::stam_radicand(p.n(), p.m(), p.q());
  }
  const long double c = bounds::combined_upper(p.n(), p.m(), static_cast<long double>(p.q()));
  return adv.real() <= c * (1 + 1e-12L);
}

// Exact reference for Monte Carlo comparisons, when cheap enough.
std::optional<long double> reference_advantage(const Params& p, const RunConfig& cfg) {
  if (!exact_arithmetic_supported(p)) return std::nullopt;
  try {
    ExactOptions o;
    o.limits = limits_of(cfg);
    o.workers = cfg.workers;
    return exact_advantage(p, o).value.real();
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Cells, tables, parsing
// ---------------------------------------------------------------------------

Cell text(std::string s) { return {Cell::Kind::text, std::move(s), false}; }
Cell integer(std::uint64_t v) { return {Cell::Kind::integer, std::to_string(v), false}; }
Cell integer_signed(long long v) { return {Cell::Kind::integer, std::to_string(v), false}; }
Cell real(long double v) { return {Cell::Kind::real, format_real(v), false}; }
Cell boolean(bool b) { return {Cell::Kind::boolean, b ? "true" : "false", b}; }
Cell empty() { return {}; }

const char* version() { return TPADV_VERSION_STRING; }

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = {"exact", "bounds", "mc", "game",
                                             "moments", "lemmas", "stream", "bench"};
  return c;
}

long double parse_count(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw Error("empty number");
  const auto caret = s.find('^');
  try {
    if (caret != std::string::npos) {
      if (s.substr(0, caret) != "2") throw Error("only powers of two are supported: " + s);
      std::size_t used = 0;
      const int e = std::stoi(s.substr(caret + 1), &used);
      if (used != s.size() - caret - 1 || e < 0 || e > 128) throw Error("bad exponent in " + s);
      return std::exp2(static_cast<long double>(e));
    }
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size() || s[0] == '-') throw Error("not a non-negative integer: " + s);
    return static_cast<long double>(v);
  } catch (const std::invalid_argument&) {
    throw Error("not a number: " + s);
  } catch (const std::out_of_range&) {
    throw Error("number out of range: " + s);
  }
}

Range parse_range(const std::string& raw) {
  const std::string s = trim(raw);
  Range r;
  if (s.find(',') != std::string::npos) {
    for (const auto& part : split(s, ',')) r.values.push_back(parse_count(part));
    return r;
  }
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    r.lo = r.hi = parse_count(parts[0]);
    return r;
  }
  if (parts.size() != 2) throw Error("range must look like lo:hi, got '" + s + "'");
  r.lo = parse_count(parts[0]);
  if (parts[1] == "full") {
    r.hi_full = true;
  } else if (parts[1] == "3/4") {
    r.hi_three_quarters = true;
  } else {
    r.hi = parse_count(parts[1]);
    if (r.lo > r.hi) throw Error("range '" + s + "' is empty");
  }
  return r;
}

void write_table(const Table& t, Format f, std::ostream& os) {
  if (f == Format::json) {
    for (const auto& row : t.rows) {
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& [col, c] : row.cells) {
        switch (c.kind) {
          case Cell::Kind::integer:
            if (c.text.starts_with('-')) {
              j[col] = std::stoll(c.text);
            } else {
              j[col] = std::stoull(c.text);
            }
            break;
          case Cell::Kind::boolean: j[col] = c.flag; break;
          case Cell::Kind::empty: j[col] = nullptr; break;
          case Cell::Kind::text:
          case Cell::Kind::real: j[col] = c.text; break;
        }
      }
      os << j.dump() << '\n';
    }
    return;
  }
  auto escape = [](const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string e = "\"";
    for (char ch : v) {
      if (ch == '"') e += '"';
      e += ch;
    }
    return e + "\"";
  };
  if (t.rows.empty()) return;
  bool first = true;
  for (const auto& [col, c] : t.rows.front().cells) {
    os << (first ? "" : ",") << col;
    first = false;
  }
  os << '\n';
  for (const auto& row : t.rows) {
    first = true;
    for (const auto& [col, c] : row.cells) {
      os << (first ? "" : ",") << escape(c.text);
      first = false;
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

Table cmd_exact(const RunConfig& cfg) {
  const auto grid = expand_grid(cfg, 63, false);
  const Direction dir = parse_direction(cfg.direction);
  Table t;
  for (const auto& g : grid) {
    const auto started = Clock::now();
    const Params p(g.n, g.m, as_u64(g.q));
    Row r = base_row(cfg);
    add_params(r, g.n, g.m, g.q);
    r.add("direction", text(to_string(dir)));
    const long double combined = bounds::combined_upper(g.n, g.m, g.q);
    const long double theta = bounds::theta_envelope(g.n, g.m, g.q);
    try {
      ExactOptions o;
      o.direction = dir;
      o.arithmetic = cfg.mode;
      o.limits = limits_of(cfg);
      o.workers = cfg.workers;
      const auto res = exact_advantage(p, o);
      const bool dom = dominated(res.value, p);
      r.add("adv_exact", text(res.value.to_string()))
          .add("adv_decimal", real(res.value.real()))
          .add("profiles", integer(res.profiles_enumerated))
          .add("combined_upper", real(combined))
          .add("theta_envelope", real(theta))
          .add("ratio_theta", real(res.value.real() / theta))
          .add("dominated", boolean(dom));
      finish_row(t, std::move(r), dom, "", started);
    } catch (const InfeasibleError&) {
      r.add("adv_exact", empty()).add("adv_decimal", empty()).add("profiles", empty());
      r.add("combined_upper", real(combined)).add("theta_envelope", real(theta));
      r.add("ratio_theta", empty()).add("dominated", empty());
      finish_row(t, std::move(r), true, "ceiling", started);
    } catch (const NotApplicableError&) {
      r.add("adv_exact", empty()).add("adv_decimal", empty()).add("profiles", empty());
      r.add("combined_upper", real(combined)).add("theta_envelope", real(theta));
      r.add("ratio_theta", empty()).add("dominated", empty());
      finish_row(t, std::move(r), true, "ceiling", started);
    }
  }
  return t;
}

Table cmd_bounds(const RunConfig& cfg) {
  const auto grid = expand_grid(cfg, 128, true);
  Table t;
  for (const auto& g : grid) {
    const auto started = Clock::now();
    const auto b = bounds::report(g.n, g.m, g.q);
    Row r = base_row(cfg);
    add_params(r, g.n, g.m, g.q);
    r.add("birthday_exact", b.birthday_exact.valid ? real(b.birthday_exact.value) : empty())
        .add("birthday_upper", real(b.birthday_upper))
        .add("hall_lower_ref", real(b.hall_lower_ref.value))
        .add("hall_lower_valid", boolean(b.hall_lower_ref.valid))
        .add("hall_upper", real(b.hall_upper))
        .add("bi_upper", real(b.bi_upper.value))
        .add("bi_valid", boolean(b.bi_upper.valid))
        .add("gg_upper", real(b.gg_upper.value))
        .add("gg_branch", text(bounds::to_string(b.gg_upper.branch)))
        .add("stam_full", b.stam_full.valid ? real(b.stam_full.value) : empty())
        .add("stam_simplified", real(b.stam_simplified.value))
        .add("stam_simplified_valid", boolean(b.stam_simplified.valid))
        .add("combined_upper", real(b.combined_upper))
        .add("theta_envelope", real(b.theta_envelope));
    // Structural invariants of the report.
    long double expect = std::min(b.birthday_upper, 1.0L);
    if (b.stam_full.valid) expect = std::min(expect, b.stam_full.value);
    const bool ok = b.birthday_upper >= 0 && b.hall_upper >= 0 && b.gg_upper.value >= 0 &&
                    b.combined_upper >= 0 && b.combined_upper <= 1 && b.theta_envelope >= 0 &&
                    b.theta_envelope <= 1 && b.combined_upper == expect;
    finish_row(t, std::move(r), ok, "", started);
  }
  return t;
}

Table cmd_mc(const RunConfig& cfg) {
  const auto grid = expand_grid(cfg, 63, false);
  const Direction dir = parse_direction(cfg.direction);
  if (cfg.trials < 1) throw Error("--trials must be at least 1");
  Table t;
  for (const auto& g : grid) {
    const auto started = Clock::now();
    const Params p(g.n, g.m, as_u64(g.q));
    Row r = base_row(cfg);
    add_params(r, g.n, g.m, g.q);
    McOptions o;
    o.direction = dir;
    o.arithmetic = cfg.mode == Arithmetic::exact && exact_arithmetic_supported(p) ? Arithmetic::exact
                                                                                   : Arithmetic::fast;
    o.workers = cfg.workers;
    const auto est = mc_advantage(p, cfg.trials, cfg.seed, o);
    const auto ref = reference_advantage(p, cfg);
    r.add("direction", text(to_string(dir)))
        .add("trials", integer(cfg.trials))
        .add("estimate", real(est.mean))
        .add("standard_error", est.standard_error ? real(*est.standard_error) : empty())
        .add("adv_exact", ref ? real(*ref) : empty());
    bool pass = true;
    if (ref && est.standard_error) {
      pass = std::fabs(est.mean - *ref) <= 4 * *est.standard_error + 1e-15L;
      r.add("within_4se", boolean(pass));
    } else {
      r.add("within_4se", empty());
    }
    finish_row(t, std::move(r), pass, ref ? "" : "no-reference", started);
  }
  return t;
}

Table cmd_game(const RunConfig& cfg) {
  const auto grid = expand_grid(cfg, 63, false);
  if (cfg.trials < 1) throw Error("--trials must be at least 1");
  const std::set<std::string> rules = {"optimal", "optimal-less", "collision", "constant0", "constant1"};
  if (!rules.count(cfg.rule)) {
    throw Error("unknown rule '" + cfg.rule + "' (optimal, optimal-less, collision, constant0, constant1)");
  }
  Table t;
  for (const auto& g : grid) {
    const auto started = Clock::now();
    const Params p(g.n, g.m, as_u64(g.q));
    Rule rule;
    if (cfg.rule == "optimal") rule = optimal_rule(Direction::r_greater);
    if (cfg.rule == "optimal-less") rule = optimal_rule(Direction::r_less);
    if (cfg.rule == "constant0") rule = Rule::constant(false);
    if (cfg.rule == "constant1") rule = Rule::constant(true);
    if (cfg.rule == "collision") {
      rule = Rule::collision(cfg.threshold ? *cfg.threshold : collision_rule_threshold(p));
    }
    const auto res = play_game(p, rule, cfg.trials, cfg.seed, cfg.workers);
    std::optional<long double> ref;
    const bool likelihood = cfg.rule == "optimal" || cfg.rule == "optimal-less";
    if (likelihood) {
      ref = reference_advantage(p, cfg);
    } else if (cfg.rule.starts_with("constant")) {
      ref = 0.0L;
    } else if (exact_arithmetic_supported(p)) {
      try {
        ref = to_long_double(rule_advantage_exact(p, rule, limits_of(cfg)));
      } catch (const InfeasibleError&) {
      }
    }
    Row r = base_row(cfg);
    add_params(r, g.n, g.m, g.q);
    r.add("rule", text(rule.to_string()))
        .add("trials", integer(cfg.trials))
        .add("accept_rate_function", real(res.accept_rate_function))
        .add("accept_rate_permutation", real(res.accept_rate_permutation))
        .add("empirical_advantage", real(res.empirical_advantage))
        .add("standard_error", real(res.standard_error))
        .add("adv_exact", ref ? real(*ref) : empty());
    bool pass = true;
    if (ref) {
      // With zero observed variance, allow one trial's worth of slack.
      const long double slack = std::max(4 * res.standard_error, 1.0L / static_cast<long double>(cfg.trials));
      pass = std::fabs(res.empirical_advantage - *ref) <= slack;
      r.add("within_4se", boolean(pass));
    } else {
      r.add("within_4se", empty());
    }
    finish_row(t, std::move(r), pass, ref ? "" : "no-reference", started);
  }
  return t;
}

Table cmd_moments(const RunConfig& cfg) {
  struct BCell {
    std::uint64_t buckets;
    std::uint64_t q;
    int n = -1;
    int m = -1;
  };
  std::vector<BCell> cells;
  if (cfg.buckets) {
    if (*cfg.buckets < 1) throw Error("--buckets must be at least 1");
    const Range qr = resolve_range(cfg.q, cfg.q_range, "q");
    if (qr.hi_full || qr.hi_three_quarters) throw Error("--q-range with --buckets needs a numeric upper end");
    for (long double q : expand(qr, 0)) {
      if (q < 1) continue;
      cells.push_back({*cfg.buckets, as_u64(q)});
    }
    if (cells.empty()) throw Error("the sweep contains no valid q");
  } else {
    for (const auto& g : expand_grid(cfg, 63, false)) {
      cells.push_back({std::uint64_t{1} << (g.n - g.m), as_u64(g.q), g.n, g.m});
    }
  }
  Table t;
  for (const auto& c : cells) {
    const auto started = Clock::now();
    Row r = base_row(cfg);
    r.add("n", c.n >= 0 ? integer(static_cast<std::uint64_t>(c.n)) : empty())
        .add("m", c.m >= 0 ? integer(static_cast<std::uint64_t>(c.m)) : empty())
        .add("q", integer(c.q))
        .add("buckets", integer(c.buckets));
    const auto closed = moments_closed_form(c.buckets, c.q);
    r.add("m1", text(closed.m1.get_str()))
        .add("m2", text(closed.m2.get_str()))
        .add("m3", text(closed.m3.get_str()))
        .add("m4", text(closed.m4.get_str()));
    bool pass = true;
    try {
      const bool eq = moments_brute(c.buckets, c.q, cfg.max_transcripts) == closed;
      pass = pass && eq;
      r.add("brute_equal", boolean(eq));
    } catch (const InfeasibleError&) {
      r.add("brute_equal", empty());
    }
    r.add("trials", integer(cfg.trials));
    if (cfg.trials >= 2 && c.buckets <= (std::uint64_t{1} << 24)) {
      const auto est = moments_empirical(c.buckets, c.q, cfg.trials, cfg.seed, cfg.workers);
      const Rational* exact_k[4] = {&closed.m1, &closed.m2, &closed.m3, &closed.m4};
      bool within = true;
      for (int k = 0; k < 4; ++k) {
        r.add("emp_m" + std::to_string(k + 1), real(est.value[k]));
        r.add("se_m" + std::to_string(k + 1), real(est.standard_error[k]));
        const long double ref = to_long_double(*exact_k[k]);
        within = within && std::fabs(est.value[k] - ref) <= 4 * est.standard_error[k] + 1e-12L * std::fabs(ref);
      }
      r.add("within_4se", boolean(within));
      pass = pass && within;
    } else {
      for (int k = 1; k <= 4; ++k) {
        r.add("emp_m" + std::to_string(k), empty());
        r.add("se_m" + std::to_string(k), empty());
      }
      r.add("within_4se", empty());
    }
    finish_row(t, std::move(r), pass, "", started);
  }
  return t;
}

Table cmd_lemmas(const RunConfig& cfg) {
  lemmas::SuiteOptions o;
  o.tail_trials = cfg.trials;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  Table t;
  auto started = Clock::now();
  for (const auto& c : lemmas::run_suite(o)) {
    Row r = base_row(cfg);
    r.add("check", text(c.name))
        .add("cases", integer(c.cases))
        .add("violations", integer(c.violations))
        .add("worst_slack", real(c.worst_slack))
        .add("detail", text(c.detail));
    finish_row(t, std::move(r), c.pass, "", started);
    started = Clock::now();
  }
  return t;
}

namespace {

std::unique_ptr<stream::KeyedPermutation> make_permutation(const std::string& kind, int n,
                                                           std::uint64_t seed) {
  if (kind == "explicit") {
    return std::make_unique<stream::TablePermutation>(stream::explicit_permutation(n, seed));
  }
  if (kind == "feistel") return std::make_unique<stream::FeistelPermutation>(n, seed);
  throw Error("unknown permutation '" + kind + "' (explicit or feistel)");
}

// FNV-1a over the emitted bytes, so runs can be compared without storing them.
class DigestSink final : public stream::ByteSink {
 public:
  explicit DigestSink(stream::ByteSink* inner) : inner_(inner) {}
  void write(const std::uint8_t* data, std::size_t size) override {
    for (std::size_t i = 0; i < size; ++i) {
      hash_ = (hash_ ^ data[i]) * 0x100000001b3ULL;
    }
    if (inner_) inner_->write(data, size);
  }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
    return buf;
  }

 private:
  stream::ByteSink* inner_;
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

stream::Block parse_block(const std::string& s) {
  const std::string v = trim(s);
  if (v.find('^') != std::string::npos) {
    const long double p = parse_count(v);
    const int e = static_cast<int>(std::log2(p));
    if (e >= 128) throw Error("start counter out of range");
    return stream::Block{1} << e;
  }
  stream::Block b = 0;
  if (v.empty()) throw Error("empty start counter");
  for (char ch : v) {
    if (ch < '0' || ch > '9') throw Error("start counter must be a decimal integer");
    const stream::Block next = b * 10 + static_cast<unsigned>(ch - '0');
    if (next / 10 != b) throw Error("start counter out of range");
    b = next;
  }
  return b;
}

}  // namespace

Table cmd_stream(const RunConfig& cfg) {
  const std::set<std::string> actions = {"balance", "generate", "bench", "margin"};
  if (!actions.count(cfg.action)) {
    throw Error("unknown stream action '" + cfg.action + "' (balance, generate, bench, margin)");
  }
  const auto grid = expand_grid(
      [&] {
        RunConfig c = cfg;
        if (!c.q && !c.q_range) c.q = "1";
        return c;
      }(),
      128, true);
  Table t;
  for (const auto& g : grid) {
    const auto started = Clock::now();
    Row r = base_row(cfg);
    add_params(r, g.n, g.m, g.q);
    r.add("action", text(cfg.action));
    bool pass = true;
    if (cfg.action == "margin") {
      const auto margin = stream::security_margin(g.n, g.m, g.q);
      Integer qz;
      mpz_set_d(qz.get_mpz_t(), static_cast<double>(g.q));
      r.add("security_margin", real(margin))
          .add("log2_margin", real(std::log2(margin)))
          .add("stream_bytes", text(stream::stream_length_bytes(g.n, g.m, qz).get_str()));
      finish_row(t, std::move(r), pass, "", started);
      continue;
    }
    const auto perm = make_permutation(cfg.perm, g.n, cfg.seed);
    r.add("perm", text(perm->kind()));
    if (cfg.action == "balance") {
      const auto b = stream::balance_check(*perm, g.m);
      const auto [lo, hi] = std::minmax_element(b.histogram.begin(), b.histogram.end());
      r.add("prefixes", integer(b.histogram.size()))
          .add("expected_count", integer(std::uint64_t{1} << g.m))
          .add("min_count", integer(*lo))
          .add("max_count", integer(*hi));
      pass = b.pass;
    } else {
      stream::StreamConfig sc;
      sc.n = g.n;
      sc.m = g.m;
      sc.count = cfg.count;
      sc.start = parse_block(cfg.start);
      sc.packing = stream::parse_packing(cfg.packing);
      sc.validate();
      r.add("start", text(stream::to_string(sc.start)))
          .add("count", integer(sc.count))
          .add("packing", text(stream::to_string(sc.packing)));
      if (cfg.action == "generate") {
        std::unique_ptr<std::ofstream> file;
        std::unique_ptr<stream::OstreamSink> file_sink;
        if (!cfg.stream_out.empty()) {
          file = std::make_unique<std::ofstream>(cfg.stream_out, std::ios::binary);
          if (!*file) throw Error("cannot open " + cfg.stream_out);
          file_sink = std::make_unique<stream::OstreamSink>(*file);
          std::ofstream meta(cfg.stream_out + ".json");
          meta << stream::stream_metadata(*perm, sc) << '\n';
        }
        DigestSink sink(file_sink.get());
        const auto bytes = stream::generate_stream(*perm, sc, sink, cfg.workers);
        r.add("bytes", integer(bytes)).add("fnv1a64", text(sink.hex()));
        r.add("stream_out", cfg.stream_out.empty() ? empty() : text(cfg.stream_out));
      } else {
        const auto tp = stream::throughput_bench(*perm, sc, cfg.repetitions, cfg.workers);
        r.add("bytes", integer(tp.bytes))
            .add("bytes_per_second", real(tp.bytes_per_second))
            .add("ns_per_symbol", real(tp.ns_per_symbol))
            .add("median_seconds", real(tp.median_seconds));
        pass = tp.bytes_per_second > 0 || sc.count == 0;
      }
    }
    finish_row(t, std::move(r), pass, "", started);
  }
  return t;
}

Table cmd_bench(const RunConfig& cfg) {
  Table t;
  auto add = [&](const std::string& task, int n, int m, std::uint64_t q, double seconds,
                 double rate, const std::string& unit) {
    Row r = base_row(cfg);
    add_params(r, n, m, static_cast<long double>(q));
    r.add("task", text(task))
        .add("seconds", real(seconds))
        .add("rate", real(rate))
        .add("unit", text(unit));
    r.add("reason", empty()).add("pass", boolean(true)).add("elapsed_ms", milliseconds(seconds * 1e3));
    t.rows.push_back(std::move(r));
  };
  auto time = [](auto&& fn) {
    const auto s = Clock::now();
    fn();
    return std::chrono::duration<double>(Clock::now() - s).count();
  };
  {
    const Params p(8, 4, 64);
    std::uint64_t profiles = 0;
    const double s = time([&] {
      ExactOptions o;
      o.workers = cfg.workers;
      profiles = exact_advantage(p, o).profiles_enumerated;
    });
    add("exact_advantage", 8, 4, 64, s, static_cast<double>(profiles) / s, "profiles/s");
  }
  {
    const Params p(16, 8, 256);
    const double s = time([&] {
      McOptions o;
      o.workers = cfg.workers;
      mc_advantage(p, cfg.trials, cfg.seed, o);
    });
    add("mc_advantage", 16, 8, 256, s, static_cast<double>(cfg.trials) / s, "trials/s");
  }
  {
    const Params p(16, 8, 256);
    const double s = time([&] { play_game(p, optimal_rule(Direction::r_greater), cfg.trials, cfg.seed, cfg.workers); });
    add("play_game", 16, 8, 256, s, 2.0 * static_cast<double>(cfg.trials) / s, "transcripts/s");
  }
  {
    const auto perm = stream::demo_permutation(128, cfg.seed);
    stream::StreamConfig sc{128, 64, std::uint64_t{1} << 20, 0, stream::Packing::bit_packed};
    const auto tp = stream::throughput_bench(perm, sc, cfg.repetitions, cfg.workers);
    add("stream_feistel", 128, 64, sc.count, tp.median_seconds, tp.bytes_per_second, "bytes/s");
  }
  return t;
}

Table run(const RunConfig& cfg) {
  if (cfg.workers < 1) throw Error("--workers must be at least 1");
  if (cfg.command == "exact") return cmd_exact(cfg);
  if (cfg.command == "bounds") return cmd_bounds(cfg);
  if (cfg.command == "mc") return cmd_mc(cfg);
  if (cfg.command == "game") return cmd_game(cfg);
  if (cfg.command == "moments") return cmd_moments(cfg);
  if (cfg.command == "lemmas") return cmd_lemmas(cfg);
  if (cfg.command == "stream") return cmd_stream(cfg);
  if (cfg.command == "bench") return cmd_bench(cfg);
  throw Error("unknown command '" + cfg.command + "'");
}

}  // namespace tpadv::cli
