#include "robustdp/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "robustdp/errors.hpp"

namespace robustdp {

namespace {

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

// Horizon function of an integrand with a bounded domain: only the zero
// direction survives, and only if Psi is proper on this path.
XReal bounded_domain_horizon(const Integrand& psi, std::size_t leaf, std::span<const double> x) {
  if (!all_zero(x)) return NEG_INF;
  if (psi.evaluate(leaf, x).is_finite()) return XReal(0.0);
  for (const auto& p : enumerate_domain(psi))
    if (psi.evaluate(leaf, p).is_finite()) return XReal(0.0);
  return NEG_INF;
}

bool on_window_lattice(double v, const Window1D& w) {
  const double j = (v - w.lo) / w.step;
  return std::fabs(j - std::round(j)) <= 1e-9;
}

bool in_list(double v, const std::vector<double>& list) {
  return std::find(list.begin(), list.end(), v) != list.end();
}

void require_capped(const Utility& u, const char* model) {
  if (!u.cap()) throw ConfigError(std::string(model) + ": utility must be bounded above (linear is not allowed)");
}

std::vector<std::size_t> path_nodes(const ScenarioTree& tree, std::size_t leaf) {
  const std::size_t T = tree.horizon();
  std::vector<std::size_t> idx(T + 1);
  for (std::size_t t = 0; t <= T; ++t) idx[t] = tree.ancestor(T, leaf, t);
  return idx;
}

}  // namespace

// ---------------------------------------------------------------- utility

Utility Utility::exponential(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("exponential utility: alpha must be > 0");
  return Utility(Kind::Exponential, alpha, 0.0);
}

Utility Utility::capped_log(double cap) {
  if (!std::isfinite(cap)) throw ConfigError("capped log utility: cap must be finite");
  return Utility(Kind::CappedLog, cap, 0.0);
}

Utility Utility::capped_power(double gamma, double cap) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("capped power utility: gamma must lie in (0,1)");
  if (!std::isfinite(cap)) throw ConfigError("capped power utility: cap must be finite");
  return Utility(Kind::CappedPower, gamma, cap);
}

Utility Utility::linear() { return Utility(Kind::Linear, 0.0, 0.0); }

XReal Utility::operator()(double v) const {
  switch (kind_) {
    case Kind::Exponential: {
      const double r = 1.0 - std::exp(-p1_ * v);
      return std::isinf(r) ? NEG_INF : XReal(r);
    }
    case Kind::CappedLog:
      if (!(v > 0.0)) return NEG_INF;
      return XReal(std::min(std::log(v), p1_));
    case Kind::CappedPower:
      if (v < 0.0) return NEG_INF;
      return XReal(std::min(std::pow(v, p1_) / p1_, p2_));
    case Kind::Linear:
      return XReal(v);
  }
  return NEG_INF;
}

std::string Utility::name() const {
  switch (kind_) {
    case Kind::Exponential: return "exp";
    case Kind::CappedLog: return "capped_log";
    case Kind::CappedPower: return "capped_power";
    case Kind::Linear: return "linear";
  }
  return "?";
}

std::optional<double> Utility::cap() const {
  switch (kind_) {
    case Kind::Exponential: return 1.0;
    case Kind::CappedLog: return p1_;
    case Kind::CappedPower: return p2_;
    case Kind::Linear: return std::nullopt;
  }
  return std::nullopt;
}

XReal Utility::horizon(double v) const {
  if (kind_ == Kind::Linear) return XReal(std::min(v, 0.0));
  return v >= 0.0 ? XReal(0.0) : NEG_INF;
}

// ---------------------------------------------------------------- processes

NodeProcess NodeProcess::constant(const ScenarioTree& tree, double v) {
  return per_depth(tree, std::vector<double>(tree.horizon() + 1, v));
}

NodeProcess NodeProcess::per_depth(const ScenarioTree& tree, const std::vector<double>& v) {
  if (v.size() != tree.horizon() + 1) throw ConfigError("per-depth process needs T+1 values");
  NodeProcess p;
  for (std::size_t t = 0; t <= tree.horizon(); ++t) p.values.emplace_back(tree.nodes_at(t), v[t]);
  return p;
}

NodeProcess NodeProcess::per_node(const ScenarioTree& tree, std::vector<std::vector<double>> v) {
  if (v.size() != tree.horizon() + 1) throw ConfigError("per-node process needs T+1 levels");
  for (std::size_t t = 0; t <= tree.horizon(); ++t)
    if (v[t].size() != tree.nodes_at(t))
      throw ConfigError("per-node process: depth " + std::to_string(t) + " needs " +
                        std::to_string(tree.nodes_at(t)) + " values");
  return NodeProcess{std::move(v)};
}

NodeProcess NodeProcess::from_outcome(const ScenarioTree& tree, double initial, std::size_t coord, double scale,
                                      double offset) {
  NodeProcess p;
  p.values.emplace_back(1, initial);
  for (std::size_t t = 1; t <= tree.horizon(); ++t) {
    std::vector<double> lvl(tree.nodes_at(t));
    for (std::size_t i = 0; i < lvl.size(); ++i) {
      const auto& o = tree.outcome(t, i);
      if (coord >= o.size()) throw ConfigError("process: outcome coordinate out of range");
      lvl[i] = scale * o[coord] + offset;
    }
    p.values.push_back(std::move(lvl));
  }
  return p;
}

PriceProcess PriceProcess::build(const ScenarioTree& tree, const std::vector<double>& s0, Mode mode,
                                 const std::vector<std::size_t>& coords, const std::vector<double>& scale) {
  const std::size_t d = s0.size();
  if (d == 0) throw ConfigError("price process: at least one asset is required");
  if (coords.size() != d) throw ConfigError("price process: one outcome coordinate per asset");
  if (!scale.empty() && scale.size() != d) throw ConfigError("price process: one scale per asset");
  PriceProcess p;
  p.dim = d;
  p.values.push_back(s0);
  for (std::size_t t = 1; t <= tree.horizon(); ++t) {
    std::vector<double> lvl(tree.nodes_at(t) * d);
    for (std::size_t j = 0; j < tree.nodes_at(t); ++j) {
      const auto& o = tree.outcome(t, j);
      const std::size_t par = tree.parent(t, j);
      for (std::size_t i = 0; i < d; ++i) {
        if (coords[i] >= o.size()) throw ConfigError("price process: outcome coordinate out of range");
        const double w = o[coords[i]];
        const double prev = p.values[t - 1][par * d + i];
        switch (mode) {
          case Mode::Multiplicative: lvl[j * d + i] = prev * w; break;
          case Mode::Additive: lvl[j * d + i] = prev + w; break;
          case Mode::Level: lvl[j * d + i] = (scale.empty() ? 1.0 : scale[i]) * w; break;
        }
      }
    }
    p.values.push_back(std::move(lvl));
  }
  return p;
}

// ---------------------------------------------------------------- windows

std::vector<double> Window1D::values() const {
  if (!points.empty()) {
    std::vector<double> v = points;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }
  if (!(step > 0.0) || !std::isfinite(step))
    throw GridConditionViolation("grid condition violated: window step must be > 0");
  if (!(lo <= hi)) throw ConfigError("window: lo must not exceed hi");
  const double span = (hi - lo) / step;
  if (span > 1e6) throw ConfigError("window: too many points");
  std::vector<double> v;
  for (long j = 0; j <= static_cast<long>(std::floor(span + 1e-9)); ++j) {
    double x = lo + static_cast<double>(j) * step;
    if (std::fabs(x) < 1e-12 * step) x = 0.0;
    v.push_back(x);
  }
  return v;
}

Window1D Window1D::doubled() const {
  Window1D w = *this;
  if (!points.empty()) return w;
  w.lo = 2.0 * lo;
  w.hi = 2.0 * hi;
  return w;
}

std::vector<Point> window_product(const std::vector<Window1D>& windows) {
  std::vector<Point> out{Point{}};
  for (const auto& w : windows) {
    std::vector<Point> next;
    for (const auto& p : out)
      for (double v : w.values()) {
        Point q = p;
        q.push_back(v);
        next.push_back(std::move(q));
      }
    out = std::move(next);
  }
  sort_by_tie_break(out);
  return out;
}

namespace {

double min_step(const std::vector<Window1D>& windows) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& w : windows) {
    auto v = w.values();
    for (std::size_t i = 1; i < v.size(); ++i) s = std::min(s, v[i] - v[i - 1]);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------- frictionless

FrictionlessModel::FrictionlessModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, Utility u,
                                     double x0, std::vector<Window1D> window)
    : Integrand(std::move(tree)), prices_(std::move(prices)), u_(u), x0_(x0), window_(std::move(window)) {
  require_capped(u_, "frictionless model");
  if (window_.size() == 1 && prices_.dim > 1) window_.assign(prices_.dim, window_[0]);
  if (window_.size() != prices_.dim) throw ConfigError("frictionless model: one window per asset");
  for (const auto& w : window_) coord_values_.push_back(w.values());
  actions_ = window_product(window_);
  grid_.dim = prices_.dim;
  grid_.periods.assign(horizon(), actions_);
  const double s = min_step(window_);
  if (std::isfinite(s)) grid_.declared_spacing.assign(horizon(), s);
  upper_ = *u_.cap();
}

std::vector<Point> FrictionlessModel::feasible_actions(std::size_t t, std::span<const double> prefix) const {
  if (t >= horizon() || prefix.size() != t * prices_.dim)
    throw std::logic_error("frictionless model: prefix of wrong length");
  for (std::size_t k = 0; k < prefix.size(); ++k)
    if (!in_list(prefix[k], coord_values_[k % prices_.dim]))
      throw std::logic_error("frictionless model: infeasible prefix");
  return actions_;
}

bool FrictionlessModel::in_domain(std::span<const double> x) const {
  if (x.size() != horizon() * prices_.dim) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!in_list(x[k], coord_values_[k % prices_.dim])) return false;
  return true;
}

double FrictionlessModel::increment(std::size_t leaf, std::size_t t, std::size_t i) const {
  const auto& tree = this->tree();
  const std::size_t T = tree.horizon();
  return prices_.at(t + 1, tree.ancestor(T, leaf, t + 1), i) - prices_.at(t, tree.ancestor(T, leaf, t), i);
}

std::optional<double> FrictionlessModel::gain(std::size_t leaf, std::span<const double> x) const {
  const std::size_t d = prices_.dim;
  double g = 0.0;
  for (std::size_t t = 0; t < horizon(); ++t)
    for (std::size_t i = 0; i < d; ++i) g += x[t * d + i] * increment(leaf, t, i);
  return g;
}

XReal FrictionlessModel::evaluate(std::size_t leaf, std::span<const double> x) const {
  if (!in_domain(x)) return NEG_INF;
  return u_(x0_ + *gain(leaf, x));
}

DomainShape FrictionlessModel::domain_shape() const {
  for (const auto& w : window_)
    if (!w.is_lattice()) return DomainShape::Finite;
  return DomainShape::Lattice;
}

bool FrictionlessModel::on_lattice(std::span<const double> x) const {
  if (x.size() != horizon() * prices_.dim) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!on_window_lattice(x[k], window_[k % prices_.dim])) return false;
  return true;
}

XReal FrictionlessModel::evaluate_unbounded(std::size_t leaf, std::span<const double> x) const {
  if (domain_shape() == DomainShape::Finite) return evaluate(leaf, x);
  if (!on_lattice(x)) return NEG_INF;
  return u_(x0_ + *gain(leaf, x));
}

std::vector<double> FrictionlessModel::lattice_spacing() const {
  std::vector<double> s;
  for (std::size_t t = 0; t < horizon(); ++t)
    for (const auto& w : window_) s.push_back(w.step);
  return s;
}

std::optional<XReal> FrictionlessModel::analytic_horizon(std::size_t leaf, std::span<const double> x) const {
  if (domain_shape() == DomainShape::Finite) return bounded_domain_horizon(*this, leaf, x);
  return u_.horizon(*gain(leaf, x));
}

std::unique_ptr<Integrand> FrictionlessModel::with_doubled_window() const {
  std::vector<Window1D> w;
  for (const auto& x : window_) w.push_back(x.doubled());
  return std::make_unique<FrictionlessModel>(tree_ptr(), prices_, u_, x0_, std::move(w));
}

// ---------------------------------------------------------------- semi-static

SemiStaticModel::SemiStaticModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, Utility u, double x0,
                                 std::vector<Window1D> window, std::vector<std::vector<double>> static_payoffs,
                                 std::vector<Window1D> static_window)
    : Integrand(std::move(tree)),
      prices_(std::move(prices)),
      u_(u),
      x0_(x0),
      d_(prices_.dim),
      window_(std::move(window)),
      static_window_(std::move(static_window)),
      statics_(std::move(static_payoffs)) {
  require_capped(u_, "semi-static model");
  if (window_.size() == 1 && d_ > 1) window_.assign(d_, window_[0]);
  if (window_.size() != d_) throw ConfigError("semi-static model: one window per asset");
  if (static_window_.size() == 1 && statics_.size() > 1) static_window_.assign(statics_.size(), static_window_[0]);
  if (static_window_.size() != statics_.size()) throw ConfigError("semi-static model: one static window per claim");
  for (const auto& f : statics_) {
    if (f.size() != this->tree().leaf_count()) throw ConfigError("semi-static model: static payoff needs one value per leaf");
    for (double v : f)
      if (!std::isfinite(v)) throw ConfigError("semi-static model: static payoffs must be finite");
  }
  for (const auto& w : window_) coord_values_.push_back(w.values());
  for (const auto& w : static_window_) coord_values_.push_back(w.values());
  std::vector<Window1D> all = window_;
  all.insert(all.end(), static_window_.begin(), static_window_.end());
  first_actions_ = window_product(all);
  stock_actions_ = window_product(window_);
  grid_.dim = action_dim();
  grid_.periods.push_back(first_actions_);
  // later periods: every stock action with every static position (g is pinned by the prefix)
  for (std::size_t t = 1; t < horizon(); ++t) grid_.periods.push_back(first_actions_);
  const double s = min_step(all);
  if (std::isfinite(s)) grid_.declared_spacing.assign(horizon(), s);
  upper_ = *u_.cap();
}

std::vector<Point> SemiStaticModel::feasible_actions(std::size_t t, std::span<const double> prefix) const {
  const std::size_t k = action_dim();
  if (t >= horizon() || prefix.size() != t * k) throw std::logic_error("semi-static model: prefix of wrong length");
  for (std::size_t j = 0; j < prefix.size(); ++j)
    if (!in_list(prefix[j], coord_values_[j % k])) throw std::logic_error("semi-static model: infeasible prefix");
  if (t == 0) return first_actions_;
  std::vector<Point> out;
  out.reserve(stock_actions_.size());
  for (const auto& a : stock_actions_) {
    Point p = a;
    p.insert(p.end(), prefix.begin() + static_cast<std::ptrdiff_t>(d_), prefix.begin() + static_cast<std::ptrdiff_t>(k));
    out.push_back(std::move(p));
  }
  return out;
}

bool SemiStaticModel::static_pinned(std::span<const double> x) const {
  const std::size_t k = action_dim();
  for (std::size_t t = 1; t < horizon(); ++t)
    for (std::size_t i = d_; i < k; ++i)
      if (x[t * k + i] != x[i]) return false;
  return true;
}

bool SemiStaticModel::in_domain(std::span<const double> x) const {
  const std::size_t k = action_dim();
  if (x.size() != horizon() * k) return false;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!in_list(x[j], coord_values_[j % k])) return false;
  return static_pinned(x);
}

std::optional<double> SemiStaticModel::gain(std::size_t leaf, std::span<const double> x) const {
  const auto& tree = this->tree();
  const std::size_t T = tree.horizon(), k = action_dim();
  double g = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t a = tree.ancestor(T, leaf, t), b = tree.ancestor(T, leaf, t + 1);
    for (std::size_t i = 0; i < d_; ++i) g += x[t * k + i] * (prices_.at(t + 1, b, i) - prices_.at(t, a, i));
  }
  for (std::size_t i = 0; i < statics_.size(); ++i) g += x[d_ + i] * statics_[i][leaf];
  return g;
}

XReal SemiStaticModel::evaluate(std::size_t leaf, std::span<const double> x) const {
  if (!in_domain(x)) return NEG_INF;
  return u_(x0_ + *gain(leaf, x));
}

DomainShape SemiStaticModel::domain_shape() const {
  for (const auto& w : window_)
    if (!w.is_lattice()) return DomainShape::Finite;
  for (const auto& w : static_window_)
    if (!w.is_lattice()) return DomainShape::Finite;
  return DomainShape::Lattice;
}

bool SemiStaticModel::on_lattice(std::span<const double> x) const {
  const std::size_t k = action_dim();
  if (x.size() != horizon() * k) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const std::size_t c = j % k;
    const Window1D& w = c < d_ ? window_[c] : static_window_[c - d_];
    if (!on_window_lattice(x[j], w)) return false;
  }
  return static_pinned(x);
}

XReal SemiStaticModel::evaluate_unbounded(std::size_t leaf, std::span<const double> x) const {
  if (domain_shape() == DomainShape::Finite) return evaluate(leaf, x);
  if (!on_lattice(x)) return NEG_INF;
  return u_(x0_ + *gain(leaf, x));
}

std::vector<double> SemiStaticModel::lattice_spacing() const {
  std::vector<double> s;
  for (std::size_t t = 0; t < horizon(); ++t) {
    for (const auto& w : window_) s.push_back(w.step);
    for (const auto& w : static_window_) s.push_back(w.step);
  }
  return s;
}

std::optional<XReal> SemiStaticModel::analytic_horizon(std::size_t leaf, std::span<const double> x) const {
  if (domain_shape() == DomainShape::Finite) return bounded_domain_horizon(*this, leaf, x);
  // g must stay constant along the ray; otherwise no lattice point is nearby
  if (!static_pinned(x)) return NEG_INF;
  return u_.horizon(*gain(leaf, x));
}

std::unique_ptr<Integrand> SemiStaticModel::with_doubled_window() const {
  std::vector<Window1D> w, sw;
  for (const auto& x : window_) w.push_back(x.doubled());
  for (const auto& x : static_window_) sw.push_back(x.doubled());
  return std::make_unique<SemiStaticModel>(tree_ptr(), prices_, u_, x0_, std::move(w), statics_, std::move(sw));
}

// ---------------------------------------------------------------- stopping

StoppingModel::StoppingModel(std::shared_ptr<const ScenarioTree> tree, NodeProcess payoff)
    : Integrand(std::move(tree)), payoff_(std::move(payoff)) {
  const auto& tr = this->tree();
  if (payoff_.values.size() != tr.horizon() + 1) throw ConfigError("stopping model: payoff needs T+1 levels");
  upper_ = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t <= tr.horizon(); ++t) {
    if (payoff_.values[t].size() != tr.nodes_at(t)) throw ConfigError("stopping model: payoff level size mismatch");
    for (double g : payoff_.values[t]) {
      if (std::isnan(g) || g == std::numeric_limits<double>::infinity())
        throw ConfigError("stopping model: payoff must be < +inf");
      upper_ = std::max(upper_, g);
    }
  }
  if (!std::isfinite(upper_)) throw ConfigError("stopping model: payoff is -inf everywhere");
  grid_.dim = 1;
  grid_.periods.assign(tr.horizon(), {Point{0.0}, Point{1.0}});
  grid_.declared_spacing.assign(tr.horizon(), 1.0);
}

std::vector<Point> StoppingModel::feasible_actions(std::size_t t, std::span<const double> prefix) const {
  if (t >= horizon() || prefix.size() != t) throw std::logic_error("stopping model: prefix of wrong length");
  double prev = 1.0;
  for (double h : prefix) {
    if (!((h == 0.0 || h == 1.0) && h <= prev)) throw std::logic_error("stopping model: infeasible prefix");
    prev = h;
  }
  if (prev == 0.0) return {Point{0.0}};
  return {Point{0.0}, Point{1.0}};
}

bool StoppingModel::in_domain(std::span<const double> x) const {
  if (x.size() != horizon()) return false;
  double prev = 1.0;
  for (double h : x) {
    if (!((h == 0.0 || h == 1.0) && h <= prev)) return false;
    prev = h;
  }
  return true;
}

XReal StoppingModel::evaluate(std::size_t leaf, std::span<const double> x) const {
  if (!in_domain(x)) return NEG_INF;
  const auto& tree = this->tree();
  const std::size_t T = tree.horizon();
  double prev = 1.0;
  for (std::size_t t = 0; t <= T; ++t) {
    const double h = t < T ? x[t] : 0.0;
    if (prev - h == 1.0) {
      const double g = payoff_.at(t, tree.ancestor(T, leaf, t));
      return std::isinf(g) ? NEG_INF : XReal(g);
    }
    prev = h;
  }
  return NEG_INF;  // unreachable: h_{-1} = 1, h_T = 0
}

std::optional<XReal> StoppingModel::analytic_horizon(std::size_t leaf, std::span<const double> x) const {
  return bounded_domain_horizon(*this, leaf, x);
}

StoppingTime to_stopping_time(const ScenarioTree& tree, const AdaptedStrategy& h) {
  const std::size_t T = tree.horizon();
  StoppingTime tau;
  tau.at_leaf.assign(tree.leaf_count(), T);
  for (std::size_t l = 0; l < tree.leaf_count(); ++l)
    for (std::size_t t = 0; t < T; ++t)
      if (h.at(tree.id(t, tree.ancestor(T, l, t)))[0] == 0.0) {
        tau.at_leaf[l] = t;
        break;
      }
  return tau;
}

bool is_stopping_time(const ScenarioTree& tree, const StoppingTime& tau) {
  const std::size_t T = tree.horizon();
  if (tau.at_leaf.size() != tree.leaf_count()) return false;
  for (std::size_t l = 0; l < tree.leaf_count(); ++l)
    if (tau.at_leaf[l] > T) return false;
  // {tau <= t} must be decided by the node at depth t
  for (std::size_t t = 0; t <= T; ++t) {
    std::vector<int> decided(tree.nodes_at(t), -1);
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
      const std::size_t a = tree.ancestor(T, l, t);
      const int v = tau.at_leaf[l] <= t ? static_cast<int>(tau.at_leaf[l]) : -2;
      if (decided[a] == -1) decided[a] = v;
      else if (decided[a] != v) return false;
    }
  }
  return true;
}

AdaptedStrategy from_stopping_time(const ScenarioTree& tree, const StoppingTime& tau) {
  if (!is_stopping_time(tree, tau)) throw std::invalid_argument("from_stopping_time: not a stopping time");
  const std::size_t T = tree.horizon();
  AdaptedStrategy h = zero_strategy(tree, 1);
  for (std::size_t l = 0; l < tree.leaf_count(); ++l)
    for (std::size_t t = 0; t < T; ++t)
      h.at(tree.id(t, tree.ancestor(T, l, t)))[0] = tau.at_leaf[l] > t ? 1.0 : 0.0;
  return h;
}

// ---------------------------------------------------------------- liquidation

LiquidationModel::LiquidationModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, long shares,
                                   Utility u, double x0, std::optional<Impact> impact)
    : Integrand(std::move(tree)), prices_(std::move(prices)), shares_(shares), u_(u), x0_(x0),
      impact_(std::move(impact)) {
  if (shares_ < 1) throw ConfigError("liquidation model: initial position M must be a positive integer");
  if (shares_ > 10000) throw ConfigError("liquidation model: initial position too large");
  if (prices_.dim != 1) throw ConfigError("liquidation model: exactly one asset");
  if (impact_ && !(impact_->kappa > 0.0 && impact_->kappa < 1.0))
    throw ConfigError("liquidation model: kappa must lie in (0,1)");
  grid_.dim = 1;
  std::vector<Point> pts;
  for (long m = 0; m <= shares_; ++m) pts.push_back(Point{static_cast<double>(m)});
  grid_.periods.assign(this->tree().horizon(), pts);
  grid_.declared_spacing.assign(this->tree().horizon(), 1.0);
  if (auto c = u_.cap()) upper_ = *c;
  else upper_ = exhaustive_upper_bound(*this);
}

std::vector<Point> LiquidationModel::feasible_actions(std::size_t t, std::span<const double> prefix) const {
  if (t >= horizon() || prefix.size() != t) throw std::logic_error("liquidation model: prefix of wrong length");
  double prev = static_cast<double>(shares_);
  for (double h : prefix) {
    if (!(h >= 0.0 && h <= prev && h == std::floor(h))) throw std::logic_error("liquidation model: infeasible prefix");
    prev = h;
  }
  if (t + 1 == horizon()) return {Point{0.0}};
  std::vector<Point> out;
  for (long m = 0; m <= static_cast<long>(prev); ++m) out.push_back(Point{static_cast<double>(m)});
  return out;
}

bool LiquidationModel::in_domain(std::span<const double> x) const {
  if (x.size() != horizon()) return false;
  double prev = static_cast<double>(shares_);
  for (double h : x) {
    if (!(h >= 0.0 && h <= prev && h == std::floor(h))) return false;
    prev = h;
  }
  return x.back() == 0.0;
}

double LiquidationModel::proceeds(std::size_t leaf, std::span<const double> x) const {
  const auto& tree = this->tree();
  const std::size_t T = tree.horizon();
  const auto node = path_nodes(tree, leaf);
  const double M = static_cast<double>(shares_);
  double v = M * prices_.at(0, 0, 0);
  if (!impact_) {
    for (std::size_t t = 0; t < T; ++t) v += x[t] * (prices_.at(t + 1, node[t + 1], 0) - prices_.at(t, node[t], 0));
    return v;
  }
  double ell = 0.0, prev = M;
  for (std::size_t t = 0; t < T; ++t) {
    const double m0 = impact_->depth.at(t, node[t]), m1 = impact_->depth.at(t + 1, node[t + 1]);
    const double dS = prices_.at(t + 1, node[t + 1], 0) - prices_.at(t, node[t], 0);
    const double h = x[t];
    v += h * dS - impact_->kappa * ell * h - (m1 - m0) * h * h;
    ell = (1.0 - impact_->kappa) * ell + 2.0 * m1 * (h - prev);
    prev = h;
  }
  return v;
}

XReal LiquidationModel::evaluate(std::size_t leaf, std::span<const double> x) const {
  if (!in_domain(x)) return NEG_INF;
  return u_(x0_ + proceeds(leaf, x));
}

std::optional<XReal> LiquidationModel::analytic_horizon(std::size_t leaf, std::span<const double> x) const {
  return bounded_domain_horizon(*this, leaf, x);
}

// ---------------------------------------------------------------- Roch-Soner

RochSonerModel::RochSonerModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, NodeProcess depth,
                               double kappa, Utility u, double x0, Window1D window)
    : Integrand(std::move(tree)), prices_(std::move(prices)), depth_(std::move(depth)), kappa_(kappa), u_(u), x0_(x0),
      window_(std::move(window)) {
  if (!(kappa_ > 0.0 && kappa_ < 1.0)) throw ConfigError("roch-soner model: kappa must lie in (0,1)");
  if (prices_.dim != 1) throw ConfigError("roch-soner model: exactly one asset");
  const auto& tr = this->tree();
  if (depth_.values.size() != tr.horizon() + 1) throw ConfigError("roch-soner model: depth needs T+1 levels");
  for (std::size_t t = 0; t <= tr.horizon(); ++t) {
    if (depth_.values[t].size() != tr.nodes_at(t)) throw ConfigError("roch-soner model: depth level size mismatch");
    for (double m : depth_.values[t])
      if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("roch-soner model: depth m_t must be > 0");
  }
  values_ = window_.values();
  for (double v : values_) actions_.push_back(Point{v});
  sort_by_tie_break(actions_);
  grid_.dim = 1;
  grid_.periods.assign(tr.horizon(), actions_);
  const double s = min_step({window_});
  if (std::isfinite(s)) grid_.declared_spacing.assign(tr.horizon(), s);
  if (auto c = u_.cap()) upper_ = *c;
  else upper_ = exhaustive_upper_bound(*this);
}

std::vector<Point> RochSonerModel::feasible_actions(std::size_t t, std::span<const double> prefix) const {
  if (t >= horizon() || prefix.size() != t) throw std::logic_error("roch-soner model: prefix of wrong length");
  for (double h : prefix)
    if (!in_list(h, values_)) throw std::logic_error("roch-soner model: infeasible prefix");
  return actions_;
}

bool RochSonerModel::in_domain(std::span<const double> x) const {
  if (x.size() != horizon()) return false;
  for (double h : x)
    if (!in_list(h, values_)) return false;
  return true;
}

RochSonerModel::Path RochSonerModel::simulate(std::size_t leaf, std::span<const double> x) const {
  const auto& tree = this->tree();
  const std::size_t T = tree.horizon();
  const auto node = path_nodes(tree, leaf);
  Path p;
  p.impact.assign(T + 1, 0.0);
  p.wealth.assign(T + 1, 0.0);
  double prev = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double h = x[t];
    const double m0 = depth_.at(t, node[t]), m1 = depth_.at(t + 1, node[t + 1]);
    const double dS = prices_.at(t + 1, node[t + 1], 0) - prices_.at(t, node[t], 0);
    p.impact[t + 1] = (1.0 - kappa_) * p.impact[t] + 2.0 * m1 * (h - prev);
    p.wealth[t + 1] = p.wealth[t] + h * dS - kappa_ * p.impact[t] * h - (m1 - m0) * h * h;
    prev = h;
  }
  return p;
}

XReal RochSonerModel::evaluate(std::size_t leaf, std::span<const double> x) const {
  if (!in_domain(x)) return NEG_INF;
  return u_(x0_ + simulate(leaf, x).wealth.back());
}

std::optional<XReal> RochSonerModel::analytic_horizon(std::size_t leaf, std::span<const double> x) const {
  return bounded_domain_horizon(*this, leaf, x);
}

std::unique_ptr<Integrand> RochSonerModel::with_doubled_window() const {
  return std::make_unique<RochSonerModel>(tree_ptr(), prices_, depth_, kappa_, u_, x0_, window_.doubled());
}

// ---------------------------------------------------------------- helpers

double exhaustive_upper_bound(const Integrand& psi) {
  double c = -std::numeric_limits<double>::infinity();
  const auto points = enumerate_domain(psi);
  for (std::size_t l = 0; l < psi.tree().leaf_count(); ++l)
    for (const auto& p : points) {
      const XReal v = psi.evaluate(l, p);
      if (v.is_finite()) c = std::max(c, v.value());
    }
  if (!std::isfinite(c)) throw ConfigError("model '" + std::string(psi.tag()) + "' is -inf on its whole domain");
  return c;
}

}  // namespace robustdp
