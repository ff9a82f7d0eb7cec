#include <doctest.h>

#include <cmath>

#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"
#include "robustdp/oracle.hpp"
#include "support/instances.hpp"

using namespace robustdp;

namespace {

std::shared_ptr<const ScenarioTree> binary(std::size_t T) {
  return std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>(T, {{1.0, 1.0}, {-1.0, 2.0}}));
}

RochSonerModel rs_model(std::size_t T, long radius = 2) {
  auto tree = binary(T);
  return RochSonerModel(tree, PriceProcess::build(*tree, {10.0}, PriceProcess::Mode::Additive, {0}),
                        NodeProcess::constant(*tree, 1.0), 0.5, Utility::linear(), 0.0, Window1D::radius(radius));
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("utilities") {
    CHECK(Utility::exponential(2.0)(0.0) == XReal(0.0));
    CHECK(Utility::exponential(1.0)(1.0).value() == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(Utility::capped_log(1.0)(0.0).is_neg_inf());
    CHECK(Utility::capped_log(1.0)(100.0) == XReal(1.0));
    CHECK(Utility::capped_power(0.5, 3.0)(-1.0).is_neg_inf());
    CHECK(Utility::capped_power(0.5, 3.0)(4.0) == XReal(3.0));
    CHECK_FALSE(Utility::linear().cap().has_value());
    CHECK(Utility::exponential().horizon(-0.1).is_neg_inf());
    CHECK(Utility::exponential().horizon(0.0) == XReal(0.0));
  }

  TEST_CASE("frictionless terminal value at the zero strategy is U(x0)") {
    testkit::Rng rng(1);
    for (int rep = 0; rep < 50; ++rep) {
      auto tree = testkit::random_tree(rng, testkit::pick(rng, 1, 3), 3);
      auto m = testkit::random_frictionless(rng, tree);
      const auto h = zero_strategy(*tree, 1);
      const auto ref = m->evaluate_strategy(0, h);
      for (std::size_t l = 0; l < tree->leaf_count(); ++l) CHECK(m->evaluate_strategy(l, h) == ref);
      CHECK(m->gain(0, h.along_path(*tree, 0)) == 0.0);
    }
  }

  TEST_CASE("frictionless rejects a linear utility") {
    auto tree = binary(1);
    CHECK_THROWS_AS(FrictionlessModel(tree, PriceProcess::build(*tree, {1.0}, PriceProcess::Mode::Additive, {0}),
                                      Utility::linear(), 0.0, {Window1D::radius(1)}),
                    ConfigError);
  }

  TEST_CASE("stopping: terminal value and feasible actions") {
    auto tree = binary(2);
    StoppingModel m(tree, NodeProcess::per_depth(*tree, {1.0, 10.0, 100.0}));
    CHECK(m.evaluate(0, std::vector<double>{0.0, 0.0}) == XReal(1.0));
    CHECK(m.evaluate(0, std::vector<double>{1.0, 0.0}) == XReal(10.0));
    CHECK(m.evaluate(0, std::vector<double>{1.0, 1.0}) == XReal(100.0));
    CHECK(m.evaluate(0, std::vector<double>{0.0, 1.0}).is_neg_inf());
    CHECK(m.feasible_actions(1, std::vector<double>{1.0}).size() == 2);
    CHECK(m.feasible_actions(1, std::vector<double>{0.0}) == std::vector<Point>{{0.0}});
    CHECK(count_adapted(m) == 5);
    CHECK(count_stopping_times(*tree) == 5);
  }

  TEST_CASE("stopping: exactly one payoff term is collected") {
    testkit::Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
      auto tree = testkit::random_tree(rng, testkit::pick(rng, 1, 3), 3);
      std::vector<double> g;
      for (std::size_t t = 0; t <= tree->horizon(); ++t) g.push_back(std::pow(1000.0, static_cast<double>(t)));
      StoppingModel m(tree, NodeProcess::per_depth(*tree, g));
      enumerate_adapted(m, [&](const AdaptedStrategy& h) {
        const auto tau = to_stopping_time(*tree, h);
        CHECK(is_stopping_time(*tree, tau));
        const auto back = from_stopping_time(*tree, tau);
        CHECK(back.actions == h.actions);
        for (std::size_t l = 0; l < tree->leaf_count(); ++l)
          CHECK(m.evaluate_strategy(l, h) == XReal(g[tau.at_leaf[l]]));
      });
    }
  }

  TEST_CASE("stopping times that peek ahead are rejected") {
    auto tree = binary(1);
    StoppingTime tau{{0, 1}};
    CHECK_FALSE(is_stopping_time(*tree, tau));
    CHECK_THROWS_AS(from_stopping_time(*tree, tau), std::invalid_argument);
  }

  TEST_CASE("liquidation") {
    auto tree = binary(3);
    auto prices = PriceProcess::build(*tree, {10.0}, PriceProcess::Mode::Additive, {0});
    LiquidationModel m(tree, prices, 3, Utility::linear(), 0.0);
    CHECK(m.feasible_actions(2, std::vector<double>{3.0, 3.0}) == std::vector<Point>{{0.0}});
    CHECK(m.feasible_actions(0, {}).size() == 4);
    CHECK(m.feasible_actions(1, std::vector<double>{1.0}).size() == 2);
    // selling everything at once realises M S_0
    const std::vector<double> now{0.0, 0.0, 0.0};
    for (std::size_t l = 0; l < tree->leaf_count(); ++l) CHECK(m.proceeds(l, now) == 30.0);
    CHECK(m.evaluate(0, std::vector<double>{1.0, 2.0, 0.0}).is_neg_inf());
    CHECK(m.evaluate(0, std::vector<double>{2.0, 1.0, 1.0}).is_neg_inf());
    // leaf 0 goes up every period
    CHECK(m.proceeds(0, std::vector<double>{3.0, 3.0, 0.0}) == 36.0);
  }

  TEST_CASE("roch-soner hand path") {
    const auto m = rs_model(2);
    // x0 = 0, S up then down: h = (1, 0)
    const std::vector<double> x{1.0, 0.0};
    const auto p = m.simulate(1, x);
    CHECK(p.impact[1] == 2.0);
    CHECK(p.impact[2] == 0.5 * 2.0 - 2.0);
    // V1 = 1 * (11 - 10) - 0 - 0; V2 = V1 + 0 - 0.5 * 2 * 0 - 0
    CHECK(p.wealth[1] == 1.0);
    CHECK(p.wealth[2] == 1.0);
    CHECK(m.evaluate(1, x) == XReal(1.0));
  }

  TEST_CASE("roch-soner: one-unit trade change moves the next impact by 2m") {
    testkit::Rng rng(4);
    const auto m = rs_model(3, 4);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> x(3);
      for (auto& v : x) v = static_cast<double>(static_cast<long>(testkit::pick(rng, 0, 6)) - 3);
      const std::size_t s = testkit::pick(rng, 0, 2);
      auto y = x;
      y[s] += 1.0;
      const std::size_t leaf = testkit::pick(rng, 0, 7);
      const auto a = m.simulate(leaf, x), b = m.simulate(leaf, y);
      for (std::size_t t = 0; t <= s; ++t) CHECK(a.impact[t] == b.impact[t]);
      CHECK(b.impact[s + 1] - a.impact[s + 1] == doctest::Approx(2.0));
    }
  }

  TEST_CASE("roch-soner parameter checks") {
    auto tree = binary(1);
    auto prices = PriceProcess::build(*tree, {10.0}, PriceProcess::Mode::Additive, {0});
    CHECK_THROWS_AS(RochSonerModel(tree, prices, NodeProcess::constant(*tree, 1.0), 0.0, Utility::linear(), 0.0,
                                   Window1D::radius(1)),
                    ConfigError);
    CHECK_THROWS_AS(RochSonerModel(tree, prices, NodeProcess::constant(*tree, -1.0), 0.5, Utility::linear(), 0.0,
                                   Window1D::radius(1)),
                    ConfigError);
  }

  TEST_CASE("semi-static with no claim position is frictionless trading") {
    testkit::Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
      auto tree = testkit::random_tree(rng, testkit::pick(rng, 1, 2), 3);
      auto prices = PriceProcess::build(*tree, {1.0}, PriceProcess::Mode::Multiplicative, {0});
      std::vector<double> f(tree->leaf_count());
      for (auto& v : f) v = testkit::uniform(rng, -1, 1);
      Window1D g;
      g.points = {0.0};
      SemiStaticModel ss(tree, prices, Utility::exponential(), 1.0, {Window1D::radius(1)}, {f}, {g});
      FrictionlessModel fr(tree, prices, Utility::exponential(), 1.0, {Window1D::radius(1)});
      enumerate_adapted(fr, [&](const AdaptedStrategy& h) {
        AdaptedStrategy hs{2, {}};
        for (double a : h.actions) hs.actions.insert(hs.actions.end(), {a, 0.0});
        for (std::size_t l = 0; l < tree->leaf_count(); ++l)
          CHECK(ss.evaluate_strategy(l, hs) == fr.evaluate_strategy(l, h));
      });
    }
  }

  TEST_CASE("exhaustive upper bound stays below C") {
    testkit::Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
      auto tree = testkit::random_tree(rng, 2, 2);
      for (auto m : {testkit::random_stopping(rng, tree), testkit::random_liquidation(rng, tree),
                     testkit::random_roch_soner(rng, tree)})
        CHECK(exhaustive_upper_bound(*m) <= m->upper_bound() + 1e-12);
    }
  }
}
