#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace tpadv::cli;
  RunConfig cfg;
  std::string mode = "exact";
  std::string format = "csv";

  CLI::App app{"Distinguishing advantage of truncated random permutations"};
  app.set_version_flag("--version", version());
  app.add_option("command", cfg.command, "exact | bounds | mc | game | moments | lemmas | stream | bench")
      ->required()
      ->check(CLI::IsMember(commands()));

  app.add_option("--n", cfg.n, "Block width n (integer)");
  app.add_option("--m", cfg.m, "Truncated bits m");
  app.add_option("--q", cfg.q, "Number of queries (integer or 2^k)");
  app.add_option("--n-range", cfg.n_range, "lo:hi or a,b,c");
  app.add_option("--m-range", cfg.m_range, "lo:hi or a,b,c (default: 0..n-1)");
  app.add_option("--q-range", cfg.q_range, "lo:hi, lo:full (2^n), lo:3/4 ((3/4)2^n) or a,b,c");
  app.add_option("--trials", cfg.trials, "Monte Carlo trials (per arm for game)");
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--mode", mode, "Arithmetic: exact | fast")->check(CLI::IsMember({"exact", "fast"}));
  app.add_option("--format", format, "Output: csv | json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", cfg.out, "Output path (default: stdout)");

  app.add_option("--direction", cfg.direction, "Advantage identity: R>1 | R<1");
  app.add_option("--rule", cfg.rule, "game rule: optimal | optimal-less | collision | constant0 | constant1");
  app.add_option("--threshold", cfg.threshold, "collision rule threshold (default: from q and B)");
  app.add_option("--buckets", cfg.buckets, "moments: number of buckets B (overrides n, m)");
  app.add_option("--max-profiles", cfg.max_profiles, "exact: profile ceiling");
  app.add_option("--max-transcripts", cfg.max_transcripts, "brute force: transcript ceiling");

  app.add_option("--action", cfg.action, "stream: balance | generate | bench | margin");
  app.add_option("--perm", cfg.perm, "stream: explicit | feistel");
  app.add_option("--packing", cfg.packing, "stream: bit-packed | byte-aligned");
  app.add_option("--count", cfg.count, "stream: number of symbols");
  app.add_option("--start", cfg.start, "stream: first counter value");
  app.add_option("--stream-out", cfg.stream_out, "stream: file for raw bytes (metadata goes to FILE.json)");
  app.add_option("--repetitions", cfg.repetitions, "stream/bench: timing repetitions");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.mode = tpadv::parse_arithmetic(mode);
    cfg.format = format == "json" ? Format::json : Format::csv;
    const Table table = run(cfg);
    if (cfg.out.empty()) {
      write_table(table, cfg.format, std::cout);
    } else {
      std::ofstream os(cfg.out);
      if (!os) throw tpadv::Error("cannot open " + cfg.out);
      write_table(table, cfg.format, os);
    }
    return table.all_pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "tpadv: " << e.what() << '\n';
    return 2;
  }
}
