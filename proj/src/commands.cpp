#include <chrono>
#include <cmath>

#include "robustdp/cli.hpp"
#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"
#include "robustdp/noarb.hpp"
#include "robustdp/oracle.hpp"
#include "robustdp/solver.hpp"

namespace robustdp::cli {

json to_json(XReal v) {
  if (v.is_neg_inf()) return "-inf";
  return v.value();
}

std::string serialize(const json& report) { return report.dump(2) + "\n"; }

namespace {

json actions_json(const AdaptedStrategy& h) { return h.actions; }

json point_json(std::span<const double> a) { return std::vector<double>(a.begin(), a.end()); }

json policy_json(const ScenarioTree& tree, const AdaptedStrategy& h) {
  json out = json::array();
  for (std::size_t id = 0; id < tree.internal_count(); ++id)
    out.push_back({{"node", id}, {"depth", tree.depth_of(id)}, {"index", tree.index_of(id)}, {"action", point_json(h.at(id))}});
  return out;
}

// expected-vs-actual bookkeeping for the config's expect block
class Expectations {
 public:
  explicit Expectations(const json& expect) : expect_(expect) {}

  void value(const std::string& key, XReal actual, double tol) {
    if (!expect_.contains(key)) return;
    const json& e = expect_[key];
    bool ok;
    if (e.is_string()) ok = e.get<std::string>() == "-inf" && actual.is_neg_inf();
    else ok = e.is_number() && actual.is_finite() && std::fabs(actual.value() - e.get<double>()) <= tol;
    record(key, e, to_json(actual), ok);
  }

  void exact(const std::string& key, const json& actual) {
    if (!expect_.contains(key)) return;
    record(key, expect_[key], actual, expect_[key] == actual);
  }

  json report() const { return {{"checked", checked_}, {"failed", failed_}, {"results", results_}}; }
  bool ok() const noexcept { return failed_ == 0; }

 private:
  void record(const std::string& key, const json& expected, const json& actual, bool ok) {
    ++checked_;
    if (!ok) ++failed_;
    results_.push_back({{"key", key}, {"expected", expected}, {"actual", actual}, {"passed", ok}});
  }

  const json& expect_;
  int checked_ = 0, failed_ = 0;
  json results_ = json::array();
};

struct Solved {
  std::unique_ptr<ValueField> values;  // the policy points into its prefix tree
  std::optional<PolicyTable> policy;
  PolicyEvaluation eval;
};

std::unique_ptr<Solved> solve(const Problem& p, json& report, Expectations& ex, std::string& diag, bool doubling) {
  SolveOptions opts;
  opts.workers = p.solver.workers;
  opts.tolerance = p.solver.tolerance;
  auto s = std::make_unique<Solved>();
  s->values = std::make_unique<ValueField>(backward_induct(*p.tree, *p.kernel, *p.model, opts));
  s->policy.emplace(*s->values, *p.tree, p.solver.tolerance);
  s->eval = evaluate_policy(*p.tree, *p.kernel, *p.model, s->policy->realized(), p.solver.budget_selections);
  const XReal root = s->values->root();
  if (!near(s->eval.pinned, root, 1e-9))
    throw ConsistencyError("policy value " + to_string(s->eval.pinned) + " differs from root value " + to_string(root));

  report["root_value"] = to_json(root);
  report["root_action"] = point_json(s->policy->realized().at(0));
  report["policy"] = policy_json(*p.tree, s->policy->realized());
  json pv = {{"pinned", to_json(s->eval.pinned)}, {"selections", s->eval.selections}};
  pv["enumerated"] = s->eval.enumerated ? to_json(*s->eval.enumerated) : json(nullptr);
  report["policy_value"] = pv;
  const double tol = p.expect.value("root_value_tol", 1e-6);
  ex.value("root_value", root, tol);
  ex.value("policy_value", s->eval.pinned, tol);
  ex.exact("root_action", report["root_action"]);

  if (doubling) {
    json d = {{"checked", false}};
    if (!p.solver.doubling_check) {
      d["reason"] = "disabled";
    } else if (auto wider = p.model->with_doubled_window()) {
      try {
        const XReal r2 = backward_induct(*p.tree, *p.kernel, *wider, opts).root();
        const bool moved = !near(r2, root, 1e-9);
        d = {{"checked", true}, {"root_value_doubled", to_json(r2)}, {"truncation_warning", moved}};
        if (moved) diag += "warning: root value moves when the action window is doubled (" + to_string(root) + " -> " +
                           to_string(r2) + "); the window may truncate the optimum\n";
        ex.exact("truncation_warning", moved);
      } catch (const BudgetError& e) {
        d["reason"] = std::string("budget: ") + e.what();
      }
    } else {
      d["reason"] = "intrinsic domain";
    }
    report["doubling"] = d;
  }
  return s;
}

json dump_values(const Problem& p, const ValueField& vf) {
  const auto& tree = *p.tree;
  const auto& pt = vf.prefixes();
  json levels = json::array();
  for (std::size_t t = 0; t <= tree.horizon(); ++t) {
    json prefixes = json::array();
    for (std::size_t q = 0; q < pt.size(t); ++q) prefixes.push_back(pt.prefix(t, q));
    json psi = json::array();
    for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
      json row = json::array();
      for (std::size_t q = 0; q < pt.size(t); ++q) row.push_back(to_json(vf.psi(t, i, q)));
      psi.push_back(std::move(row));
    }
    json lvl = {{"depth", t}, {"prefixes", std::move(prefixes)}, {"psi", std::move(psi)}};
    if (t < tree.horizon()) {
      json phi = json::array();
      for (std::size_t i = 0; i < tree.nodes_at(t); ++i) {
        json row = json::array();
        for (std::size_t q = 0; q < pt.size(t + 1); ++q) row.push_back(to_json(vf.phi(t, i, q)));
        phi.push_back(std::move(row));
      }
      lvl["phi"] = std::move(phi);
    }
    levels.push_back(std::move(lvl));
  }
  return levels;
}

int run_oracle(const Problem& p, json& report, Expectations& ex, std::string& diag) {
  auto s = solve(p, report, ex, diag, false);
  const EnumerationBudget budget{p.solver.budget_strategies, p.solver.budget_selections};
  const auto o = supinf_bruteforce(*p.tree, *p.kernel, *p.model, budget, p.solver.workers, p.solver.tolerance);
  const XReal root = s->values->root();
  const bool agree = near(o.value, root, 1e-9);
  json oj = {{"value", to_json(o.value)},
             {"argmax", actions_json(o.argmax)},
             {"strategies", o.strategies},
             {"selections", o.selections},
             {"agree", agree}};
  oj["delta"] = (o.value.is_finite() && root.is_finite()) ? json(std::fabs(o.value.value() - root.value())) : json(nullptr);
  const XReal policy_by_oracle = oracle_value(*p.tree, *p.kernel, *p.model, s->policy->realized(), budget);
  oj["solver_policy_value"] = to_json(policy_by_oracle);
  oj["root_action_matches"] = std::equal(o.argmax.at(0).begin(), o.argmax.at(0).end(), s->policy->realized().at(0).begin());
  bool ok = agree && near(policy_by_oracle, o.value, 1e-9);
  ex.value("oracle_value", o.value, p.expect.value("root_value_tol", 1e-6));

  if (const auto* sm = dynamic_cast<const StoppingModel*>(p.model.get())) {
    const auto so = stopping_bruteforce(*p.tree, *p.kernel, *sm, budget, p.solver.tolerance);
    const bool sagree = near(so.value, root, 1e-9);
    json sj = {{"value", to_json(so.value)}, {"tau", so.tau.at_leaf}, {"stopping_times", so.stopping_times}, {"agree", sagree}};
    sj["delta"] = (so.value.is_finite() && root.is_finite()) ? json(std::fabs(so.value.value() - root.value())) : json(nullptr);
    oj["stopping"] = sj;
    ok = ok && sagree;
    ex.value("stopping_value", so.value, p.expect.value("root_value_tol", 1e-6));
    ex.exact("stopping_tau", sj["tau"]);
  }
  report["oracle"] = oj;
  if (!ok) {
    diag += "error: oracle and solver disagree beyond 1e-9\n";
    return kInternal;
  }
  return kOk;
}

int run_nacheck(const Problem& p, json& report, Expectations& ex, std::string& diag) {
  NaOptions opts;
  opts.max_strategies = p.solver.budget_strategies;
  opts.workers = p.solver.workers;
  const auto r = arbitrage_report(*p.tree, *p.kernel, *p.model, opts);
  json g = {{"verdict", to_string(r.global.verdict)}, {"method", r.global.method}, {"strategies", r.global.strategies}};
  g["witness"] = r.global.witness ? actions_json(*r.global.witness) : json(nullptr);
  json per = json::array();
  json first = json::array();
  for (const auto& s : r.per_selection) {
    json w = json::array();
    for (const auto& h : s.witnesses) w.push_back(actions_json(h));
    per.push_back({{"selection", s.selection}, {"choice", s.choice.choice}, {"witnesses", std::move(w)}});
    first.push_back(s.witnesses.empty() ? json(nullptr) : actions_json(s.witnesses.front()));
  }
  json cones = json::array();
  for (const auto& c : r.local_cones) {
    json m = json::array();
    for (const auto& a : c.members) m.push_back(a);
    cones.push_back({{"depth", c.depth},
                     {"index", c.index},
                     {"label", c.exact ? "EXACT" : "SURROGATE"},
                     {"members", std::move(m)}});
  }
  report["na"] = {{"global", g},
                  {"horizon_dp", to_string(r.horizon_dp)},
                  {"per_selection", per},
                  {"per_selection_skipped", r.per_selection_skipped},
                  {"local_cones", cones}};
  ex.exact("na", to_string(r.global.verdict));
  ex.exact("witness", g["witness"]);
  if (!r.per_selection_skipped) ex.exact("per_selection_first_witness", first);

  // truncation guard for the witness search
  if (p.solver.doubling_check && r.global.verdict == Verdict::Holds) {
    if (auto wider = p.model->with_doubled_window()) {
      try {
        const auto g2 = global_na_check(*p.tree, *p.kernel, *wider, opts);
        report["na"]["doubling"] = {{"checked", true}, {"verdict", to_string(g2.verdict)}};
        if (g2.verdict != r.global.verdict) diag += "warning: NA verdict changes when the window is doubled\n";
      } catch (const BudgetError& e) {
        report["na"]["doubling"] = {{"checked", false}, {"reason", std::string("budget: ") + e.what()}};
      }
    }
  }
  if (r.global.verdict == Verdict::Inconclusive) {
    diag += "NA check inconclusive: the numeric horizon did not stabilize\n";
    return kInconclusive;
  }
  return kOk;
}

json error_json(const std::string& kind, const std::string& msg) { return {{"kind", kind}, {"message", msg}}; }

}  // namespace

CommandResult run_command(const std::string& command, const json& doc, const Overrides& ov) {
  CommandResult res;
  json& report = res.report;
  report = {{"schema_version", kSchemaVersion}, {"tool_version", kVersion}, {"command", command}};
  const auto start = std::chrono::steady_clock::now();
  try {
    if (command != "solve" && command != "oracle" && command != "na-check" && command != "dump-values")
      throw ConfigError("unknown command '" + command + "'");
    const Problem p = load_problem(doc, ov);
    report["config_hash"] = p.hash;
    if (doc.contains("name")) report["name"] = doc["name"];
    report["model"] = std::string(p.model->tag());
    const auto ing = ingest_checks(*p.model, *p.kernel);
    report["ingestion"] = {{"spacing", ing.spacing},
                           {"upper_bound", p.model->upper_bound()},
                           {"zero_strategy_value", to_json(ing.zero_strategy_value)},
                           {"bound_probes", ing.bound_probes}};
    Expectations ex(p.expect);
    int code = kOk;
    if (command == "solve") {
      solve(p, report, ex, res.diagnostics, true);
    } else if (command == "dump-values") {
      auto s = solve(p, report, ex, res.diagnostics, false);
      report["values"] = dump_values(p, *s->values);
    } else if (command == "oracle") {
      code = run_oracle(p, report, ex, res.diagnostics);
    } else {
      code = run_nacheck(p, report, ex, res.diagnostics);
    }
    report["expectations"] = ex.report();
    if (code == kOk && !ex.ok()) {
      code = kExpectation;
      res.diagnostics += "error: embedded expectations failed\n";
    }
    res.exit_code = code;
  } catch (const GridConditionViolation& e) {
    report["error"] = error_json("grid_condition", e.what());
    res.exit_code = kValidation;
  } catch (const ConfigError& e) {
    report["error"] = error_json("validation", e.what());
    res.exit_code = kValidation;
  } catch (const InfeasibleProblem& e) {
    report["error"] = error_json("infeasible", e.what());
    res.exit_code = kInfeasible;
  } catch (const BudgetError& e) {
    report["error"] = error_json("budget", e.what());
    report["error"]["count"] = e.count();
    report["error"]["limit"] = e.limit();
    report["error"]["count_saturated"] = e.saturated();
    res.exit_code = kBudget;
  } catch (const ConsistencyError& e) {
    report["error"] = error_json("consistency", e.what());
    res.exit_code = kInternal;
  } catch (const std::exception& e) {
    report["error"] = error_json("internal", e.what());
    res.exit_code = kInternal;
  }
  if (report.contains("error")) res.diagnostics += "error: " + report["error"]["message"].get<std::string>() + "\n";
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  res.diagnostics += command + ": " + std::to_string(ms) + " ms\n";
  return res;
}

}  // namespace robustdp::cli
