#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "robustdp/cli.hpp"
#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"

namespace robustdp::cli {

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown field '" + it.key() + "'");
}

const json& need(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing field '" + key + "'");
  return *it;
}

// number, or the string "-inf" when allowed
double num(const json& v, const std::string& where, bool allow_neg_inf = false) {
  if (v.is_number()) return v.get<double>();
  if (allow_neg_inf && v.is_string() && v.get<std::string>() == "-inf") return -std::numeric_limits<double>::infinity();
  throw ConfigError(where + ": expected a number");
}

double num_or(const json& obj, const std::string& key, double dflt, const std::string& where) {
  auto it = obj.find(key);
  return it == obj.end() ? dflt : num(*it, where + "." + key);
}

std::uint64_t count_field(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(where + ": expected a nonnegative integer");
}

std::vector<double> num_list(const json& v, const std::string& where, bool allow_neg_inf = false) {
  if (v.is_number()) return {num(v, where)};
  if (!v.is_array()) throw ConfigError(where + ": expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(num(v[i], where + "[" + std::to_string(i) + "]", allow_neg_inf));
  return out;
}

// ---------------------------------------------------------------- tree / kernel

std::vector<Outcome> parse_stage(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected a list of outcomes");
  std::vector<Outcome> st;
  for (std::size_t k = 0; k < v.size(); ++k) st.push_back(num_list(v[k], where + "[" + std::to_string(k) + "]"));
  return st;
}

std::shared_ptr<const ScenarioTree> parse_tree(const json& j) {
  check_keys(j, {"stages", "horizon", "outcomes"}, "tree");
  std::vector<std::vector<Outcome>> stages;
  if (j.contains("stages")) {
    if (j.contains("horizon") || j.contains("outcomes")) throw ConfigError("tree: give either stages or horizon+outcomes");
    const auto& s = j["stages"];
    if (!s.is_array()) throw ConfigError("tree.stages: expected a list");
    for (std::size_t t = 0; t < s.size(); ++t) stages.push_back(parse_stage(s[t], "tree.stages[" + std::to_string(t) + "]"));
  } else {
    const auto T = count_field(need(j, "horizon", "tree"), "tree.horizon");
    if (T > 64) throw ConfigError("tree.horizon: too large");
    const auto st = parse_stage(need(j, "outcomes", "tree"), "tree.outcomes");
    stages.assign(T, st);
  }
  return std::make_shared<const ScenarioTree>(std::move(stages));
}

std::vector<ProbVector> parse_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected a list of probability vectors");
  std::vector<ProbVector> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_array()) throw ConfigError(where + ": each probability vector must be a list");
    out.push_back(num_list(v[k], where + "[" + std::to_string(k) + "]"));
  }
  return out;
}

std::shared_ptr<const AmbiguityKernel> parse_kernel(const json& j, const ScenarioTree& tree) {
  check_keys(j, {"homogeneous", "per_depth", "per_node"}, "kernel");
  if (j.size() != 1) throw ConfigError("kernel: give exactly one of homogeneous, per_depth, per_node");
  const std::size_t T = tree.horizon();
  if (j.contains("homogeneous")) {
    const auto l = parse_list(j["homogeneous"], "kernel.homogeneous");
    return std::make_shared<const AmbiguityKernel>(AmbiguityKernel::homogeneous(tree, std::vector(T, l)));
  }
  if (j.contains("per_depth")) {
    const auto& v = j["per_depth"];
    if (!v.is_array() || v.size() != T) throw ConfigError("kernel.per_depth: one list per depth 0..T-1");
    std::vector<std::vector<ProbVector>> per;
    for (std::size_t t = 0; t < T; ++t) per.push_back(parse_list(v[t], "kernel.per_depth[" + std::to_string(t) + "]"));
    return std::make_shared<const AmbiguityKernel>(AmbiguityKernel::homogeneous(tree, per));
  }
  const auto& v = j["per_node"];
  if (!v.is_array() || v.size() != T) throw ConfigError("kernel.per_node: one level per depth 0..T-1");
  std::vector<std::vector<std::vector<ProbVector>>> lists(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::string w = "kernel.per_node[" + std::to_string(t) + "]";
    if (!v[t].is_array() || v[t].size() != tree.nodes_at(t))
      throw ConfigError(w + ": needs " + std::to_string(tree.nodes_at(t)) + " node lists");
    for (std::size_t i = 0; i < v[t].size(); ++i) lists[t].push_back(parse_list(v[t][i], w + "[" + std::to_string(i) + "]"));
  }
  return std::make_shared<const AmbiguityKernel>(tree, std::move(lists));
}

// ---------------------------------------------------------------- model parts

Utility parse_utility(const json& j, const std::string& where) {
  const std::string name = need(j, "name", where).get<std::string>();
  if (name == "exponential") {
    check_keys(j, {"name", "alpha"}, where);
    return Utility::exponential(num_or(j, "alpha", 1.0, where));
  }
  if (name == "capped_log") {
    check_keys(j, {"name", "cap"}, where);
    return Utility::capped_log(num(need(j, "cap", where), where + ".cap"));
  }
  if (name == "capped_power") {
    check_keys(j, {"name", "gamma", "cap"}, where);
    return Utility::capped_power(num(need(j, "gamma", where), where + ".gamma"), num(need(j, "cap", where), where + ".cap"));
  }
  if (name == "linear") {
    check_keys(j, {"name"}, where);
    return Utility::linear();
  }
  throw ConfigError(where + ": unknown utility '" + name + "'");
}

PriceProcess parse_price(const json& j, const ScenarioTree& tree, const std::string& where) {
  check_keys(j, {"s0", "mode", "coords", "scale"}, where);
  const auto s0 = num_list(need(j, "s0", where), where + ".s0");
  const std::string mode = j.value("mode", std::string("multiplicative"));
  PriceProcess::Mode m;
  if (mode == "multiplicative") m = PriceProcess::Mode::Multiplicative;
  else if (mode == "additive") m = PriceProcess::Mode::Additive;
  else if (mode == "level") m = PriceProcess::Mode::Level;
  else throw ConfigError(where + ".mode: unknown mode '" + mode + "'");
  std::vector<std::size_t> coords;
  if (j.contains("coords")) {
    if (!j["coords"].is_array()) throw ConfigError(where + ".coords: expected a list");
    for (const auto& c : j["coords"]) coords.push_back(count_field(c, where + ".coords"));
  } else {
    for (std::size_t i = 0; i < s0.size(); ++i) coords.push_back(i);
  }
  std::vector<double> scale;
  if (j.contains("scale")) scale = num_list(j["scale"], where + ".scale");
  return PriceProcess::build(tree, s0, m, coords, scale);
}

NodeProcess parse_process(const json& j, const ScenarioTree& tree, const std::string& where, bool allow_neg_inf) {
  check_keys(j, {"constant", "per_depth", "per_node", "from_outcome"}, where);
  if (j.size() != 1) throw ConfigError(where + ": give exactly one of constant, per_depth, per_node, from_outcome");
  if (j.contains("constant")) return NodeProcess::constant(tree, num(j["constant"], where + ".constant", allow_neg_inf));
  if (j.contains("per_depth"))
    return NodeProcess::per_depth(tree, num_list(j["per_depth"], where + ".per_depth", allow_neg_inf));
  if (j.contains("per_node")) {
    const auto& v = j["per_node"];
    if (!v.is_array()) throw ConfigError(where + ".per_node: expected a list of levels");
    std::vector<std::vector<double>> lv;
    for (std::size_t t = 0; t < v.size(); ++t)
      lv.push_back(num_list(v[t], where + ".per_node[" + std::to_string(t) + "]", allow_neg_inf));
    return NodeProcess::per_node(tree, std::move(lv));
  }
  const auto& f = j["from_outcome"];
  const std::string w = where + ".from_outcome";
  check_keys(f, {"initial", "coord", "scale", "offset"}, w);
  const std::size_t coord = f.contains("coord") ? count_field(f["coord"], w + ".coord") : 0;
  return NodeProcess::from_outcome(tree, num(need(f, "initial", w), w + ".initial"), coord, num_or(f, "scale", 1.0, w),
                                   num_or(f, "offset", 0.0, w));
}

Window1D parse_window1(const json& j, const std::string& where) {
  check_keys(j, {"radius", "lo", "hi", "step", "points"}, where);
  if (j.contains("radius")) {
    if (j.size() != 1) throw ConfigError(where + ": radius excludes other fields");
    const auto r = count_field(j["radius"], where + ".radius");
    if (r > 100000) throw ConfigError(where + ".radius: too large");
    return Window1D::radius(static_cast<long>(r));
  }
  if (j.contains("points")) {
    if (j.size() != 1) throw ConfigError(where + ": points excludes other fields");
    Window1D w;
    w.points = num_list(j["points"], where + ".points");
    if (w.points.empty()) throw ConfigError(where + ".points: empty");
    return w;
  }
  Window1D w;
  w.lo = num(need(j, "lo", where), where + ".lo");
  w.hi = num(need(j, "hi", where), where + ".hi");
  w.step = num_or(j, "step", 1.0, where);
  return w;
}

std::vector<Window1D> parse_windows(const json& j, const std::string& where) {
  if (j.is_object()) return {parse_window1(j, where)};
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a window or a list of windows");
  std::vector<Window1D> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_window1(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::shared_ptr<const Integrand> parse_model(const json& j, const std::shared_ptr<const ScenarioTree>& tree) {
  const std::string type = need(j, "type", "model").get<std::string>();
  const ScenarioTree& tr = *tree;
  if (type == "frictionless") {
    check_keys(j, {"type", "price", "utility", "x0", "window"}, "model");
    return std::make_shared<FrictionlessModel>(tree, parse_price(need(j, "price", "model"), tr, "model.price"),
                                               parse_utility(need(j, "utility", "model"), "model.utility"),
                                               num_or(j, "x0", 0.0, "model"),
                                               parse_windows(need(j, "window", "model"), "model.window"));
  }
  if (type == "semi_static") {
    check_keys(j, {"type", "price", "utility", "x0", "window", "static_payoffs", "static_window"}, "model");
    const auto& sp = need(j, "static_payoffs", "model");
    if (!sp.is_array()) throw ConfigError("model.static_payoffs: expected a list of per-leaf payoff lists");
    std::vector<std::vector<double>> f;
    for (std::size_t i = 0; i < sp.size(); ++i)
      f.push_back(num_list(sp[i], "model.static_payoffs[" + std::to_string(i) + "]"));
    std::vector<Window1D> sw;
    if (!f.empty()) sw = parse_windows(need(j, "static_window", "model"), "model.static_window");
    return std::make_shared<SemiStaticModel>(tree, parse_price(need(j, "price", "model"), tr, "model.price"),
                                             parse_utility(need(j, "utility", "model"), "model.utility"),
                                             num_or(j, "x0", 0.0, "model"),
                                             parse_windows(need(j, "window", "model"), "model.window"), std::move(f),
                                             std::move(sw));
  }
  if (type == "stopping") {
    check_keys(j, {"type", "payoff"}, "model");
    return std::make_shared<StoppingModel>(tree, parse_process(need(j, "payoff", "model"), tr, "model.payoff", true));
  }
  if (type == "liquidation") {
    check_keys(j, {"type", "price", "shares", "utility", "x0", "impact"}, "model");
    const auto M = count_field(need(j, "shares", "model"), "model.shares");
    std::optional<LiquidationModel::Impact> impact;
    if (j.contains("impact")) {
      const auto& im = j["impact"];
      check_keys(im, {"kappa", "depth"}, "model.impact");
      impact = LiquidationModel::Impact{num(need(im, "kappa", "model.impact"), "model.impact.kappa"),
                                        parse_process(need(im, "depth", "model.impact"), tr, "model.impact.depth", false)};
    }
    const Utility u = j.contains("utility") ? parse_utility(j["utility"], "model.utility") : Utility::linear();
    return std::make_shared<LiquidationModel>(tree, parse_price(need(j, "price", "model"), tr, "model.price"),
                                              static_cast<long>(std::min<std::uint64_t>(M, 1u << 30)), u,
                                              num_or(j, "x0", 0.0, "model"), std::move(impact));
  }
  if (type == "roch_soner") {
    check_keys(j, {"type", "price", "depth", "kappa", "utility", "x0", "window"}, "model");
    return std::make_shared<RochSonerModel>(tree, parse_price(need(j, "price", "model"), tr, "model.price"),
                                            parse_process(need(j, "depth", "model"), tr, "model.depth", false),
                                            num(need(j, "kappa", "model"), "model.kappa"),
                                            parse_utility(need(j, "utility", "model"), "model.utility"),
                                            num_or(j, "x0", 0.0, "model"),
                                            parse_window1(need(j, "window", "model"), "model.window"));
  }
  throw ConfigError("model.type: unknown model '" + type + "'");
}

SolverConfig parse_solver(const json& j) {
  check_keys(j, {"tolerance", "workers", "doubling_check", "budget_strategies", "budget_selections"}, "solver");
  SolverConfig s;
  s.tolerance = num_or(j, "tolerance", s.tolerance, "solver");
  if (!(s.tolerance >= 0.0) || !std::isfinite(s.tolerance)) throw ConfigError("solver.tolerance: must be >= 0");
  if (j.contains("workers")) {
    const auto w = count_field(j["workers"], "solver.workers");
    if (w < 1 || w > 1024) throw ConfigError("solver.workers: must lie in 1..1024");
    s.workers = static_cast<unsigned>(w);
  }
  if (j.contains("doubling_check")) {
    if (!j["doubling_check"].is_boolean()) throw ConfigError("solver.doubling_check: expected true or false");
    s.doubling_check = j["doubling_check"].get<bool>();
  }
  if (j.contains("budget_strategies")) s.budget_strategies = count_field(j["budget_strategies"], "solver.budget_strategies");
  if (j.contains("budget_selections")) s.budget_selections = count_field(j["budget_selections"], "solver.budget_selections");
  return s;
}

const std::set<std::string> kExpectKeys = {"root_value",   "root_value_tol", "root_action",
                                           "policy_value", "na",             "witness",
                                           "per_selection_first_witness",    "oracle_value",
                                           "stopping_value", "stopping_tau", "truncation_warning"};

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string config_hash(const json& doc) {
  const std::string s = doc.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Problem load_problem(const json& doc, const Overrides& ov) {
  try {
    check_keys(doc, {"schema_version", "name", "description", "tree", "kernel", "model", "solver", "expect"}, "config");
    const auto& ver = need(doc, "schema_version", "config");
    if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
      throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion));
    for (const char* k : {"name", "description"})
      if (doc.contains(k) && !doc[k].is_string()) throw ConfigError(std::string("config.") + k + ": expected a string");

    Problem p;
    p.tree = parse_tree(need(doc, "tree", "config"));
    p.kernel = parse_kernel(need(doc, "kernel", "config"), *p.tree);
    p.model = parse_model(need(doc, "model", "config"), p.tree);
    p.solver = doc.contains("solver") ? parse_solver(doc["solver"]) : SolverConfig{};
    if (doc.contains("expect")) {
      check_keys(doc["expect"], kExpectKeys, "expect");
      p.expect = doc["expect"];
    } else {
      p.expect = json::object();
    }
    if (ov.workers) {
      if (*ov.workers < 1 || *ov.workers > 1024) throw ConfigError("--workers: must lie in 1..1024");
      p.solver.workers = *ov.workers;
    }
    if (ov.budget_strategies) p.solver.budget_strategies = *ov.budget_strategies;
    if (ov.budget_selections) p.solver.budget_selections = *ov.budget_selections;
    if (ov.no_doubling_check) p.solver.doubling_check = false;

    p.effective = doc;
    json s = json::object();
    s["tolerance"] = p.solver.tolerance;
    s["doubling_check"] = p.solver.doubling_check;
    s["budget_strategies"] = p.solver.budget_strategies;
    s["budget_selections"] = p.solver.budget_selections;
    p.effective["solver"] = s;
    p.hash = config_hash(p.effective);
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace robustdp::cli
