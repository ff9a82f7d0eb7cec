#ifndef ROBUSTDP_MODELS_HPP
#define ROBUSTDP_MODELS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "robustdp/integrand.hpp"

namespace robustdp {

// ------------------------------------------------------------------ utility

/// Utilities bounded above on the region where they are used.
class Utility {
 public:
  enum class Kind { Exponential, CappedLog, CappedPower, Linear };

  static Utility exponential(double alpha = 1.0);          // 1 - exp(-alpha v)
  static Utility capped_log(double cap);                   // min(log v, cap), -inf for v <= 0
  static Utility capped_power(double gamma, double cap);   // min(v^gamma / gamma, cap), -inf for v < 0
  static Utility linear();                                 // v; only for bounded domains

  XReal operator()(double v) const;
  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  // sup of U, nullopt for Linear
  std::optional<double> cap() const;
  // U^inf(v) = lim U(lambda v)/lambda: 0 for v >= 0, -inf otherwise
  XReal horizon(double v) const;

 private:
  Utility(Kind k, double a, double b) : kind_(k), p1_(a), p2_(b) {}
  Kind kind_;
  double p1_, p2_;
};

// ------------------------------------------------------------------ processes

/// Scalar adapted process: one value per node, values[t][index].
struct NodeProcess {
  std::vector<std::vector<double>> values;

  double at(std::size_t t, std::size_t index) const { return values.at(t).at(index); }
  static NodeProcess constant(const ScenarioTree& tree, double v);
  static NodeProcess per_depth(const ScenarioTree& tree, const std::vector<double>& v);
  static NodeProcess per_node(const ScenarioTree& tree, std::vector<std::vector<double>> v);
  // value at depth t >= 1 is scale * (last outcome)[coord] + offset; depth 0 is `initial`
  static NodeProcess from_outcome(const ScenarioTree& tree, double initial, std::size_t coord, double scale,
                                  double offset);
};

/// d-dimensional price process S_t, S[t][index * d + i].
struct PriceProcess {
  enum class Mode { Multiplicative, Additive, Level };

  std::size_t dim = 1;
  std::vector<std::vector<double>> values;

  double at(std::size_t t, std::size_t index, std::size_t i) const { return values.at(t).at(index * dim + i); }
  // asset i reads outcome coordinate coords[i]; Level: S = scale_i * omega
  static PriceProcess build(const ScenarioTree& tree, const std::vector<double>& s0, Mode mode,
                            const std::vector<std::size_t>& coords, const std::vector<double>& scale = {});
};

// ------------------------------------------------------------------ windows

/// One coordinate's action set: lo, lo+step, ..., hi, or an explicit list.
struct Window1D {
  double lo = 0.0, hi = 0.0, step = 1.0;
  std::vector<double> points;  // explicit list; overrides lo/hi/step when non-empty

  static Window1D radius(long r) { return Window1D{-static_cast<double>(r), static_cast<double>(r), 1.0, {}}; }
  bool is_lattice() const noexcept { return points.empty(); }
  std::vector<double> values() const;  // throws GridConditionViolation when step <= 0
  Window1D doubled() const;
};

// product of per-coordinate windows, sorted by tie-break
std::vector<Point> window_product(const std::vector<Window1D>& windows);

// ------------------------------------------------------------------ models

/// U(x0 + sum_t <h_t, S_{t+1} - S_t>) on the action window, NEG_INF outside.
class FrictionlessModel : public Integrand {
 public:
  FrictionlessModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, Utility u, double x0,
                    std::vector<Window1D> window);

  std::string_view tag() const override { return "frictionless"; }
  std::size_t action_dim() const override { return prices_.dim; }
  double upper_bound() const override { return upper_; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const override;
  bool in_domain(std::span<const double> x) const override;
  XReal evaluate(std::size_t leaf, std::span<const double> x) const override;
  DomainShape domain_shape() const override;
  XReal evaluate_unbounded(std::size_t leaf, std::span<const double> x) const override;
  std::vector<double> lattice_spacing() const override;
  std::optional<XReal> analytic_horizon(std::size_t leaf, std::span<const double> x) const override;
  std::optional<double> gain(std::size_t leaf, std::span<const double> x) const override;
  std::unique_ptr<Integrand> with_doubled_window() const override;

  const PriceProcess& prices() const noexcept { return prices_; }
  // S_{t+1} - S_t along the path to `leaf`, asset i
  double increment(std::size_t leaf, std::size_t t, std::size_t i) const;

 private:
  bool on_lattice(std::span<const double> x) const;

  PriceProcess prices_;
  Utility u_;
  double x0_;
  std::vector<Window1D> window_;
  std::vector<std::vector<double>> coord_values_;
  std::vector<Point> actions_;
  GridDomain grid_;
  double upper_;
};

/// Frictionless trading plus static positions g in claims f_i(omega), chosen
/// once at t = 0. Each action is (h_t, g) in R^{d+I}; g is pinned after t = 0.
class SemiStaticModel : public Integrand {
 public:
  // static_payoffs[i][leaf]
  SemiStaticModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, Utility u, double x0,
                  std::vector<Window1D> window, std::vector<std::vector<double>> static_payoffs,
                  std::vector<Window1D> static_window);

  std::string_view tag() const override { return "semi_static"; }
  std::size_t action_dim() const override { return d_ + statics_.size(); }
  double upper_bound() const override { return upper_; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const override;
  bool in_domain(std::span<const double> x) const override;
  XReal evaluate(std::size_t leaf, std::span<const double> x) const override;
  DomainShape domain_shape() const override;
  XReal evaluate_unbounded(std::size_t leaf, std::span<const double> x) const override;
  std::vector<double> lattice_spacing() const override;
  std::optional<XReal> analytic_horizon(std::size_t leaf, std::span<const double> x) const override;
  std::optional<double> gain(std::size_t leaf, std::span<const double> x) const override;
  std::unique_ptr<Integrand> with_doubled_window() const override;

 private:
  bool static_pinned(std::span<const double> x) const;
  bool on_lattice(std::span<const double> x) const;

  PriceProcess prices_;
  Utility u_;
  double x0_;
  std::size_t d_;
  std::vector<Window1D> window_, static_window_;
  std::vector<std::vector<double>> statics_;
  std::vector<std::vector<double>> coord_values_;  // d + I coordinates
  std::vector<Point> first_actions_;
  std::vector<Point> stock_actions_;
  GridDomain grid_;
  double upper_;
};

/// Optimal stopping of G via decreasing 0/1 holdings h_0..h_{T-1} with the
/// endpoints h_{-1} = 1 and h_T = 0 pinned:
/// Psi(h) = sum_{t=0}^T (h_{t-1} - h_t) G_t.
class StoppingModel : public Integrand {
 public:
  StoppingModel(std::shared_ptr<const ScenarioTree> tree, NodeProcess payoff);

  std::string_view tag() const override { return "stopping"; }
  std::size_t action_dim() const override { return 1; }
  double upper_bound() const override { return upper_; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const override;
  bool in_domain(std::span<const double> x) const override;
  XReal evaluate(std::size_t leaf, std::span<const double> x) const override;
  std::optional<XReal> analytic_horizon(std::size_t leaf, std::span<const double> x) const override;

  const NodeProcess& payoff() const noexcept { return payoff_; }

 private:
  NodeProcess payoff_;
  GridDomain grid_;
  double upper_;
};

/// tau(leaf) in {0..T}
struct StoppingTime {
  std::vector<std::size_t> at_leaf;
};

// tau = inf{t : h_t = 0} with h_T = 0
StoppingTime to_stopping_time(const ScenarioTree& tree, const AdaptedStrategy& h);
// h_t(node) = 1 iff tau > t on that node; throws std::invalid_argument if tau is not a stopping time
AdaptedStrategy from_stopping_time(const ScenarioTree& tree, const StoppingTime& tau);
bool is_stopping_time(const ScenarioTree& tree, const StoppingTime& tau);

/// Liquidation of M shares: integer holdings M = h_{-1} >= h_0 >= ... >= h_{T-1} = 0.
/// Proceeds use the gain form x0 + M S_0 + sum_t h_t (S_{t+1} - S_t); with
/// impact enabled the gain comes from the Roch-Soner recursion started at
/// holding M.
class LiquidationModel : public Integrand {
 public:
  struct Impact {
    double kappa;
    NodeProcess depth;
  };

  LiquidationModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, long shares, Utility u, double x0,
                   std::optional<Impact> impact = std::nullopt);

  std::string_view tag() const override { return "liquidation"; }
  std::size_t action_dim() const override { return 1; }
  double upper_bound() const override { return upper_; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const override;
  bool in_domain(std::span<const double> x) const override;
  XReal evaluate(std::size_t leaf, std::span<const double> x) const override;
  std::optional<XReal> analytic_horizon(std::size_t leaf, std::span<const double> x) const override;

  double proceeds(std::size_t leaf, std::span<const double> x) const;

 private:
  PriceProcess prices_;
  long shares_;
  Utility u_;
  double x0_;
  std::optional<Impact> impact_;
  GridDomain grid_;
  double upper_;
};

/// Roch-Soner limit order book with resilience kappa and depth m_t:
///   l_{t+1} = (1 - kappa) l_t + 2 m_{t+1} (h_t - h_{t-1}),
///   V_{t+1} = V_t + h_t (S_{t+1} - S_t) - kappa l_t h_t - (m_{t+1} - m_t) h_t^2,
/// with V_0 = l_0 = 0 and h_{-1} = 0; Psi(h) = U(x0 + V_T) on an integer window.
class RochSonerModel : public Integrand {
 public:
  RochSonerModel(std::shared_ptr<const ScenarioTree> tree, PriceProcess prices, NodeProcess depth, double kappa,
                 Utility u, double x0, Window1D window);

  struct Path {
    std::vector<double> impact;  // l_0..l_T
    std::vector<double> wealth;  // V_0..V_T
  };

  std::string_view tag() const override { return "roch_soner"; }
  std::size_t action_dim() const override { return 1; }
  double upper_bound() const override { return upper_; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t t, std::span<const double> prefix) const override;
  bool in_domain(std::span<const double> x) const override;
  XReal evaluate(std::size_t leaf, std::span<const double> x) const override;
  std::optional<XReal> analytic_horizon(std::size_t leaf, std::span<const double> x) const override;
  std::unique_ptr<Integrand> with_doubled_window() const override;

  Path simulate(std::size_t leaf, std::span<const double> x) const;
  double kappa() const noexcept { return kappa_; }

 private:
  PriceProcess prices_;
  NodeProcess depth_;
  double kappa_;
  Utility u_;
  double x0_;
  Window1D window_;
  std::vector<double> values_;
  std::vector<Point> actions_;
  GridDomain grid_;
  double upper_;
};

// max of Psi over every leaf and every point of the (finite) domain
double exhaustive_upper_bound(const Integrand& psi);

}  // namespace robustdp

#endif
