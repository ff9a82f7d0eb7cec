#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "robustdp/cli.hpp"
#include "robustdp/errors.hpp"

using robustdp::cli::json;

int main(int argc, char** argv) {
  CLI::App app{"Robust sup-inf dynamic programming on scenario lattices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", robustdp::cli::kVersion);

  std::string config, out;
  unsigned workers = 0;
  std::uint64_t budget_strategies = 0, budget_selections = 0;
  bool no_doubling = false;

  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"solve", "backward induction, policy extraction and policy evaluation"},
           {"oracle", "compare the solver with exhaustive enumeration"},
           {"na-check", "no-arbitrage diagnostics"},
           {"dump-values", "solve and dump the value field"}}) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "problem config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "write the report here instead of standard output");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--budget-strategies", budget_strategies, "max adapted strategies for enumeration");
    sub->add_option("--budget-selections", budget_selections, "max kernel selections for enumeration");
    sub->add_flag("--no-doubling-check", no_doubling, "skip the re-solve with doubled action windows");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : robustdp::cli::kValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  robustdp::cli::Overrides ov;
  if (workers) ov.workers = workers;
  if (budget_strategies) ov.budget_strategies = budget_strategies;
  if (budget_selections) ov.budget_selections = budget_selections;
  ov.no_doubling_check = no_doubling;

  json doc;
  try {
    doc = robustdp::cli::read_json_file(config);
  } catch (const robustdp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return robustdp::cli::kValidation;
  }

  const auto res = robustdp::cli::run_command(command, doc, ov);
  std::cerr << res.diagnostics;
  const std::string text = robustdp::cli::serialize(res.report);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) {
      std::cerr << "error: cannot write '" << out << "'\n";
      return robustdp::cli::kInternal;
    }
    f << text;
  }
  return res.exit_code;
}
