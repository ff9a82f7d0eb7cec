#include <doctest.h>

#include <set>

#include "robustdp/errors.hpp"
#include "robustdp/models.hpp"
#include "robustdp/oracle.hpp"
#include "robustdp/solver.hpp"
#include "support/classical_dp.hpp"
#include "support/instances.hpp"

using namespace robustdp;

namespace {

std::shared_ptr<const ScenarioTree> tree_of(std::size_t T, std::size_t b) {
  std::vector<Outcome> st;
  for (std::size_t k = 0; k < b; ++k) st.push_back({1.0 + 0.25 * static_cast<double>(k), 1.0});
  return std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>(T, st));
}

FrictionlessModel window_model(std::shared_ptr<const ScenarioTree> tree, Window1D w) {
  return FrictionlessModel(tree, PriceProcess::build(*tree, {1.0}, PriceProcess::Mode::Multiplicative, {0}),
                           Utility::exponential(), 1.0, {std::move(w)});
}

StoppingModel stopping_one_period(double g0) {
  auto tree = std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>{{{1.0}, {0.0}}});
  return StoppingModel(tree, NodeProcess::per_node(*tree, {{g0}, {2.0, 0.0}}));
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("adapted strategy counts") {
    Window1D three;
    three.points = {-1.0, 0.0, 1.0};
    CHECK(count_adapted(window_model(tree_of(2, 2), three)) == 27);
    CHECK(count_adapted(window_model(tree_of(1, 2), Window1D::radius(3))) == 7);
    auto t2 = tree_of(2, 2);
    CHECK(count_adapted(StoppingModel(t2, NodeProcess::constant(*t2, 0.0))) == 5);
  }

  TEST_CASE("every strategy is visited once, in tie-break order") {
    Window1D three;
    three.points = {-1.0, 0.0, 1.0};
    const auto m = window_model(tree_of(2, 2), three);
    std::set<std::vector<double>> seen;
    std::optional<AdaptedStrategy> prev;
    enumerate_adapted(m, [&](const AdaptedStrategy& h) {
      seen.insert(h.actions);
      if (prev) CHECK(strategy_tie_less(*prev, h));
      prev = h;
    });
    CHECK(seen.size() == 27);
  }

  TEST_CASE("budget refusal carries the exact count") {
    const auto m = window_model(tree_of(3, 3), Window1D::radius(3));
    bool thrown = false;
    try {
      enumerate_adapted(m, [](const AdaptedStrategy&) {}, 1000);
    } catch (const BudgetError& e) {
      thrown = true;
      CHECK(e.count() == sat_pow(7, 13));
      CHECK_FALSE(e.saturated());
    }
    CHECK(thrown);
  }

  TEST_CASE("constant payoff") {
    auto tree = std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>(2, {{1.0}, {1.0}}));
    const auto m = window_model(tree, Window1D::radius(1));
    auto k = AmbiguityKernel::homogeneous(*tree, {{{0.5, 0.5}, {1.0, 0.0}}, {{0.2, 0.8}}});
    const auto r = supinf_bruteforce(*tree, k, m);
    CHECK(r.value.value() == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
    for (double a : r.argmax.actions) CHECK(a == 0.0);
    CHECK(r.strategies == 27);
  }

  TEST_CASE("binomial band") {
    auto tree = std::make_shared<const ScenarioTree>(std::vector<std::vector<Outcome>>{{{1.5}, {0.5}}});
    FrictionlessModel m(tree, PriceProcess::build(*tree, {1.0}, PriceProcess::Mode::Multiplicative, {0}),
                        Utility::exponential(), 1.0, {Window1D::radius(3)});
    auto k = AmbiguityKernel::homogeneous(*tree, {{{0.3, 0.7}, {0.7, 0.3}}});
    const auto r = supinf_bruteforce(*tree, k, m);
    CHECK(r.value.value() == doctest::Approx(0.6321206).epsilon(1e-7));
    CHECK(r.argmax.actions == std::vector<double>{0.0});
  }

  TEST_CASE("single prior matches classical dynamic programming") {
    testkit::Rng rng(31);
    for (int rep = 0; rep < 30; ++rep) {
      testkit::Instance in;
      do {
        in.tree = testkit::random_tree(rng, testkit::pick(rng, 1, 2), 3);
        in.kernel = testkit::singleton_kernel(rng, *in.tree);
        in.model = rep % 2 ? testkit::random_stopping(rng, in.tree) : testkit::random_frictionless(rng, in.tree);
      } while (!testkit::affordable(in, 2e5));
      const double ref = testkit::classical_value(*in.model, *in.kernel);
      if (std::isinf(ref)) continue;
      CHECK(supinf_bruteforce(*in.tree, *in.kernel, *in.model).value.value() == doctest::Approx(ref).epsilon(1e-10));
    }
  }

  TEST_CASE("pinned recursion equals the minimum over selections") {
    testkit::Rng rng(37);
    for (int rep = 0; rep < 40; ++rep) {
      const auto in = testkit::random_instance(rng, 2e5);
      const auto h = random_adapted_strategy(*in.model, rng);
      const auto pinned = pinned_value_process(*in.tree, *in.kernel, *in.model, h);
      CHECK(near(pinned[0], oracle_value(*in.tree, *in.kernel, *in.model, h), 1e-12));
    }
  }

  TEST_CASE("results do not depend on the worker count") {
    testkit::Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
      const auto in = testkit::random_instance(rng, 5e5);
      const auto a = supinf_bruteforce(*in.tree, *in.kernel, *in.model, {}, 1);
      const auto b = supinf_bruteforce(*in.tree, *in.kernel, *in.model, {}, 4);
      CHECK(a.value.value() == b.value.value());
      CHECK(a.argmax.actions == b.argmax.actions);
    }
  }

  TEST_CASE("stopping oracle") {
    {
      const auto m = stopping_one_period(1.0);
      auto k = AmbiguityKernel::homogeneous(m.tree(), {{{0.3, 0.7}, {0.7, 0.3}}});
      const auto r = stopping_bruteforce(m.tree(), k, m);
      CHECK(r.value == XReal(1.0));
      CHECK(r.tau.at_leaf == std::vector<std::size_t>{0, 0});
      CHECK(r.stopping_times == 2);
    }
    {
      const auto m = stopping_one_period(0.5);
      auto k = AmbiguityKernel::homogeneous(m.tree(), {{{0.3, 0.7}, {0.7, 0.3}}});
      const auto r = stopping_bruteforce(m.tree(), k, m);
      CHECK(r.value.value() == doctest::Approx(0.6).epsilon(1e-14));
      CHECK(r.tau.at_leaf == std::vector<std::size_t>{1, 1});
    }
    {
      auto tree = tree_of(2, 2);
      StoppingModel m(tree, NodeProcess::per_depth(*tree, {0.0, 2.0, 1.0}));
      auto k = AmbiguityKernel::homogeneous(*tree, {{{0.5, 0.5}}, {{0.1, 0.9}, {0.9, 0.1}}});
      const auto r = stopping_bruteforce(*tree, k, m);
      CHECK(r.value == XReal(2.0));
      CHECK(r.tau.at_leaf == std::vector<std::size_t>{1, 1, 1, 1});
      CHECK(r.stopping_times == 5);
    }
  }
}
