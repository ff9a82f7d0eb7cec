#include <doctest.h>

#include <filesystem>

#include "robustdp/cli.hpp"
#include "robustdp/errors.hpp"

using namespace robustdp;
using namespace robustdp::cli;

namespace {

const std::filesystem::path kRoot = ROBUSTDP_SOURCE_DIR;

json data(const std::string& name) { return read_json_file((kRoot / "tests" / "data" / name).string()); }

std::vector<std::filesystem::path> samples() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(kRoot / "samples"))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("samples meet their expectations") {
    const auto files = samples();
    CHECK(files.size() >= 10);
    for (const auto& f : files) {
      const auto doc = read_json_file(f.string());
      for (const char* cmd : {"solve", "oracle", "na-check"}) {
        INFO(f.filename().string() << " " << cmd);
        const auto r = run_command(cmd, doc);
        CHECK(r.exit_code == kOk);
      }
    }
  }

  TEST_CASE("zero spacing is a validation error") {
    const auto r = run_command("solve", data("zero_spacing.json"));
    CHECK(r.exit_code == kValidation);
    CHECK(r.report.dump().find("grid condition") != std::string::npos);
  }

  TEST_CASE("infeasible stopping problem") {
    CHECK(run_command("solve", data("infeasible_stopping.json")).exit_code == kInfeasible);
  }

  TEST_CASE("oversized oracle reports the strategy count") {
    const auto r = run_command("oracle", data("oversized_oracle.json"));
    CHECK(r.exit_code == kBudget);
    CHECK(r.report.dump().find("96889010407") != std::string::npos);
  }

  TEST_CASE("unknown fields are rejected") {
    CHECK(run_command("solve", data("unknown_field.json")).exit_code == kValidation);
    CHECK_THROWS_AS(load_problem(data("unknown_field.json")), ConfigError);
    auto doc = read_json_file((kRoot / "samples" / "binomial_band.json").string());
    doc["schema_version"] = 2;
    CHECK_THROWS_AS(load_problem(doc), ConfigError);
  }

  TEST_CASE("unknown command") {
    const auto doc = read_json_file((kRoot / "samples" / "binomial_band.json").string());
    CHECK(run_command("frobnicate", doc).exit_code != kOk);
  }

  TEST_CASE("the worker count does not enter the hash") {
    const auto doc = read_json_file((kRoot / "samples" / "binomial_band.json").string());
    const auto a = load_problem(doc);
    const auto b = load_problem(doc, Overrides{.workers = 6});
    CHECK(a.hash == b.hash);
    CHECK(a.hash.size() == 16);
    CHECK(b.solver.workers == 6);
    const auto c = load_problem(doc, Overrides{.budget_strategies = 99});
    CHECK(c.hash != a.hash);
  }

  TEST_CASE("reports round-trip through text") {
    for (const auto& f : samples()) {
      const auto doc = read_json_file(f.string());
      for (const char* cmd : {"solve", "dump-values"}) {
        const auto text = serialize(run_command(cmd, doc).report);
        CHECK(serialize(json::parse(text)) == text);
      }
    }
  }

  TEST_CASE("extended reals in json") {
    CHECK(to_json(NEG_INF) == json("-inf"));
    CHECK(to_json(XReal(0.25)) == json(0.25));
  }
}
