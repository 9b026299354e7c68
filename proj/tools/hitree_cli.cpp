// Command-line front end: run, explore, parse-check, and corpus regression
// over lambda programs (.lpc files or built-in corpus names).

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hitree/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"interaction-tree interpreter for the lambda language with par and call/cc"};
  app.require_subcommand(1);

  std::string program;
  std::uint64_t fuel = 1'000'000;

  CLI::App* run = app.add_subcommand("run", "evaluate a program deterministically");
  run->add_option("program", program, "corpus name or .lpc file")->required();
  run->add_option("--fuel", fuel, "step budget")->envname("HITREE_FUEL");

  hitree::cli::ExploreConfig ecfg;
  std::string query = "all-outcomes";
  CLI::App* explore = app.add_subcommand("explore", "enumerate schedules and choices");
  explore->add_option("program", program, "corpus name or .lpc file");
  explore->add_option("--max-depth", ecfg.bounds.max_depth, "per-path effect-step bound");
  explore->add_option("--max-branches", ecfg.bounds.max_branches, "total expansion budget");
  explore->add_option("--enum-locs", ecfg.enum_locs, "fresh-location candidates");
  explore->add_option("--query", query, "any-failure | value-set | all-outcomes");
  explore->add_option("--replay", ecfg.replay_file, "verify a saved trace document");
  explore->add_flag("--json", ecfg.json, "emit the trace document");

  CLI::App* check = app.add_subcommand("check", "parse a program and print its syntax tree");
  check->add_option("program", program, "corpus name or .lpc file")->required();

  CLI::App* corpus = app.add_subcommand("corpus", "regress all built-in programs");
  corpus->add_option("--fuel", fuel, "step budget")->envname("HITREE_FUEL");

  CLI11_PARSE(app, argc, argv);

  hitree::cli::RunConfig rcfg{fuel, 65536};
  if (run->parsed()) return hitree::cli::cmd_run(program, rcfg, std::cout);
  if (explore->parsed()) {
    if (auto q = hitree::cli::parse_query(query)) {
      ecfg.query = *q;
    } else {
      std::cerr << "unknown query '" << query << "'\n";
      return 3;
    }
    if (program.empty() && ecfg.replay_file.empty()) {
      std::cerr << "explore needs a program or --replay FILE\n";
      return 3;
    }
    return hitree::cli::cmd_explore(program, ecfg, std::cout);
  }
  if (check->parsed()) return hitree::cli::cmd_check(program, std::cout);
  return hitree::cli::cmd_corpus(rcfg, std::cout);
}
