#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using namespace tpadv;
using namespace tpadv::cli;

TEST_CASE("parse_count") {
  CHECK(parse_count("17") == 17.0L);
  CHECK(parse_count(" 2^64 ") == 0x1p64L);
  CHECK_THROWS_AS(parse_count("3^2"), Error);
  CHECK_THROWS_AS(parse_count("-4"), Error);
  CHECK_THROWS_AS(parse_count("12x"), Error);
  CHECK_THROWS_AS(parse_count(""), Error);
  CHECK_THROWS_AS(parse_count("2^200"), Error);
}

TEST_CASE("parse_range") {
  const auto one = parse_range("5");
  CHECK(one.lo == 5);
  CHECK(one.hi == 5);
  const auto span = parse_range("2:10");
  CHECK(span.lo == 2);
  CHECK(span.hi == 10);
  CHECK(parse_range("1:full").hi_full);
  CHECK(parse_range("2:3/4").hi_three_quarters);
  const auto list = parse_range("1,4,2^4");
  REQUIRE(list.is_list());
  CHECK(list.values == std::vector<long double>{1, 4, 16});
  CHECK_THROWS_AS(parse_range("9:2"), Error);
  CHECK_THROWS_AS(parse_range("1:2:3"), Error);
}

TEST_CASE("write_table") {
  Table t;
  Row r;
  r.add("a", integer(3)).add("b", text("x,y")).add("c", boolean(true)).add("d", empty()).add("e", real(0.5L));
  t.rows.push_back(r);
  std::ostringstream csv;
  write_table(t, Format::csv, csv);
  CHECK(csv.str().rfind("a,b,c,d,e\n3,\"x,y\",", 0) == 0);

  std::ostringstream js;
  write_table(t, Format::json, js);
  const auto j = nlohmann::json::parse(js.str());
  CHECK(j["a"] == 3);
  CHECK(j["b"] == "x,y");
  CHECK(j["c"] == true);
  CHECK(j["d"].is_null());
  CHECK(j["e"].is_string());
  CHECK(integer_signed(-4).text == "-4");
}

TEST_CASE("run: exact rows and input validation") {
  RunConfig cfg;
  cfg.command = "exact";
  cfg.n = "2";
  cfg.m = "1";
  cfg.q_range = "2:4";
  const auto t = run(cfg);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.all_pass);
  auto column = [](const Row& row, const std::string& name) {
    for (const auto& [c, v] : row.cells) {
      if (c == name) return v.text;
    }
    return std::string("<missing>");
  };
  CHECK(column(t.rows[0], "adv_exact") == "1/6");
  CHECK(column(t.rows[1], "adv_exact") == "1/4");
  CHECK(column(t.rows[2], "adv_exact") == "5/8");
  CHECK(t.rows[0].cells.front().first == "command");
  CHECK(t.rows[0].cells.back().first == "elapsed_ms");

  RunConfig bad = cfg;
  bad.command = "nope";
  CHECK_THROWS_AS(run(bad), Error);
  bad = cfg;
  bad.workers = 0;
  CHECK_THROWS_AS(run(bad), Error);
  bad = cfg;
  bad.n.reset();
  CHECK_THROWS_AS(run(bad), Error);
}
