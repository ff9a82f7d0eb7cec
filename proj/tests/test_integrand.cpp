#include <doctest.h>

#include <cmath>

#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"
#include "support/instances.hpp"

using namespace robustdp;

namespace {

std::shared_ptr<const ScenarioTree> binomial(std::size_t T) {
  return std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>(T, {{1.5}, {0.5}}));
}

FrictionlessModel band_model(std::size_t T = 1, long radius = 3) {
  auto tree = binomial(T);
  return FrictionlessModel(tree, PriceProcess::build(*tree, {1.0}, PriceProcess::Mode::Multiplicative, {0}),
                           Utility::exponential(), 1.0, {Window1D::radius(radius)});
}

// no closed form horizon
class Bare : public Integrand {
 public:
  explicit Bare(std::shared_ptr<const ScenarioTree> t) : Integrand(std::move(t)) {
    grid_.periods.assign(horizon(), {Point{0.0}, Point{1.0}});
  }
  std::string_view tag() const override { return "bare"; }
  std::size_t action_dim() const override { return 1; }
  double upper_bound() const override { return 1.0; }
  const GridDomain& grid() const override { return grid_; }
  std::vector<Point> feasible_actions(std::size_t, std::span<const double>) const override {
    return grid_.periods[0];
  }
  bool in_domain(std::span<const double> x) const override {
    for (double v : x)
      if (v != 0.0 && v != 1.0) return false;
    return true;
  }
  XReal evaluate(std::size_t, std::span<const double> x) const override {
    return in_domain(x) ? XReal(x[0] - 1.0) : NEG_INF;
  }

 private:
  GridDomain grid_;
};

}  // namespace

TEST_SUITE("integrand") {
  TEST_CASE("extended reals") {
    CHECK_THROWS_AS(XReal(std::numeric_limits<double>::infinity()), std::domain_error);
    CHECK_THROWS_AS(XReal(std::nan("")), std::domain_error);
    CHECK((NEG_INF + XReal(5.0)).is_neg_inf());
    CHECK((2.0 * NEG_INF).is_neg_inf());
    CHECK(0.0 * NEG_INF == XReal(0.0));
    CHECK(xmax(NEG_INF, XReal(-7.0)) == XReal(-7.0));
    CHECK(NEG_INF < XReal(-1e300));
    CHECK(to_string(NEG_INF) == "-inf");
  }

  TEST_CASE("grid condition spacing") {
    GridDomain a;
    a.dim = 1;
    for (int t = 0; t < 2; ++t) a.periods.push_back({{-2.0}, {-1.0}, {0.0}, {1.0}, {2.0}});
    CHECK(check_grid_condition(a) == std::vector<double>{1.0, 1.0});

    GridDomain b;
    b.dim = 2;
    b.periods.push_back({{0.0, 0.0}, {0.0, 0.5}, {0.5, 0.0}, {0.5, 0.5}});
    CHECK(check_grid_condition(b)[0] == 0.5);

    GridDomain c;
    c.dim = 1;
    c.periods.push_back({{0.0}, {1.0}, {1.0}});
    CHECK(check_grid_condition(c)[0] == 1.0);
  }

  TEST_CASE("grid condition violations") {
    GridDomain z;
    z.dim = 1;
    z.periods.push_back({{0.0}, {1e-13}});
    CHECK_THROWS_AS(check_grid_condition(z), GridConditionViolation);
    try {
      check_grid_condition(z);
    } catch (const GridConditionViolation& e) {
      CHECK(std::string(e.what()).find("grid condition") != std::string::npos);
    }
    GridDomain nz;
    nz.dim = 1;
    nz.periods.push_back({{1.0}, {2.0}});
    CHECK_THROWS_AS(check_grid_condition(nz), GridConditionViolation);
    GridDomain declared;
    declared.dim = 1;
    declared.periods.push_back({{0.0}, {1.0}});
    declared.declared_spacing = {0.5};
    CHECK_THROWS_AS(check_grid_condition(declared), GridConditionViolation);
    Window1D w{0.0, 1.0, 0.0, {}};
    CHECK_THROWS_AS(w.values(), GridConditionViolation);
  }

  TEST_CASE("numeric horizon on a bounded domain") {
    auto tree = binomial(2);
    StoppingModel m(tree, NodeProcess::per_depth(*tree, {0.0, 2.0, 1.0}));
    const std::vector<double> zero{0.0, 0.0};
    for (std::size_t l = 0; l < tree->leaf_count(); ++l) {
      auto h0 = horizon_numeric(m, l, zero);
      CHECK(h0.stabilized);
      CHECK(h0.value == XReal(0.0));
      auto h1 = horizon_numeric(m, l, std::vector<double>{1.0, 0.0});
      CHECK(h1.stabilized);
      CHECK(h1.value.is_neg_inf());
      auto h2 = horizon_numeric(m, l, std::vector<double>{0.3, -0.2});
      CHECK(h2.value.is_neg_inf());
    }
  }

  TEST_CASE("frictionless horizon: nonnegative gain gives 0, negative gain gives -inf") {
    const auto m = band_model(1);
    // leaf 0 is the up move (gain h/2), leaf 1 the down move (gain -h/2)
    const std::vector<double> up{1.0};
    CHECK(horizon_analytic(m, 0, up) == XReal(0.0));
    CHECK(horizon_analytic(m, 1, up).is_neg_inf());
    auto n0 = horizon_numeric(m, 0, up);
    CHECK(n0.stabilized);
    CHECK(n0.value == XReal(0.0));
    auto n1 = horizon_numeric(m, 1, up);
    CHECK(n1.stabilized);
    CHECK(n1.value.is_neg_inf());
    CHECK(horizon_analytic(m, 1, std::vector<double>{0.0}) == XReal(0.0));
  }

  TEST_CASE("analytic horizon is positively homogeneous and nonpositive") {
    const auto m = band_model(2);
    testkit::Rng rng(3);
    for (int rep = 0; rep < 300; ++rep) {
      std::vector<double> x{testkit::uniform(rng, -2, 2), testkit::uniform(rng, -2, 2)};
      const std::size_t l = testkit::pick(rng, 0, 3);
      const double lambda = testkit::uniform(rng, 0.1, 10.0);
      const XReal a = horizon_analytic(m, l, x);
      std::vector<double> y{lambda * x[0], lambda * x[1]};
      CHECK(horizon_analytic(m, l, y) == lambda * a);
      CHECK(a <= XReal(0.0));
    }
  }

  TEST_CASE("missing closed form") {
    Bare b(binomial(1));
    CHECK_THROWS_AS(horizon_analytic(b, 0, std::vector<double>{0.0}), NotAvailable);
    auto h = horizon_numeric(b, 0, std::vector<double>{0.0});
    CHECK(h.stabilized);
    CHECK(h.value == XReal(0.0));
  }

  TEST_CASE("upper bound holds on random probes for every model") {
    testkit::Rng rng(5);
    for (int rep = 0; rep < 6; ++rep) {
      auto tree = testkit::random_tree(rng, 3, 3);
      for (auto m : {testkit::random_frictionless(rng, tree), testkit::random_stopping(rng, tree),
                     testkit::random_roch_soner(rng, tree), testkit::random_liquidation(rng, tree),
                     testkit::random_semi_static(rng, tree)})
        CHECK(verify_upper_bound(*m, 10000, 17 + rep));
    }
  }

  TEST_CASE("ingestion rejects an infeasible zero strategy") {
    auto tree = binomial(1);
    StoppingModel m(tree, NodeProcess::per_node(*tree, {{-std::numeric_limits<double>::infinity()}, {1.0, 1.0}}));
    auto k = AmbiguityKernel::homogeneous(*tree, {{{0.5, 0.5}}});
    CHECK_THROWS_AS(ingest_checks(m, k), InfeasibleProblem);
    const auto ok = band_model();
    auto s = ingest_checks(ok, k);
    CHECK(s.spacing == std::vector<double>{1.0});
    CHECK(s.zero_strategy_value == XReal(1.0 - std::exp(-1.0)));
  }

  TEST_CASE("domain enumeration") {
    const auto m = band_model(2, 1);
    CHECK(enumerate_domain(m).size() == 9);
    CHECK_THROWS_AS(enumerate_domain(m, 5), BudgetError);
  }
}
