#include "doctest.h"

#include <cmath>
#include <random>

#include "octerm/approx.hpp"
#include "octerm/oracle.hpp"
#include "octerm/qualitative.hpp"
#include "oracles.hpp"

using namespace octerm;

namespace {

OcSsg single_decrement() { return OcSsg({{"q", Owner::Random}}, {{0, -1, 0, Rational(1)}}); }

OcSsg min_loop() { return OcSsg({{"m", Owner::Min}}, {{0, -1, 0, std::nullopt}, {0, +1, 0, std::nullopt}}); }

/// Max picks between the walk and Min's state; Min either gives Max the
/// fair coin towards g or pushes the counter up into the walk.
OcSsg duel() {
  std::vector<State> states{{"s", Owner::Max}, {"m", Owner::Min}, {"r", Owner::Random},
                            {"t", Owner::Random}, {"g", Owner::Random}, {"b", Owner::Random}};
  std::vector<Rule> rules{{0, 0, 2, std::nullopt},     {0, 0, 1, std::nullopt},
                          {1, 0, 3, std::nullopt},     {1, +1, 2, std::nullopt},
                          {2, +1, 0, Rational(2, 3)},  {2, -1, 0, Rational(1, 3)},
                          {3, 0, 4, Rational(1, 2)},   {3, 0, 5, Rational(1, 2)},
                          {4, -1, 4, Rational(1)},     {5, +1, 5, Rational(1)}};
  return OcSsg(std::move(states), std::move(rules));
}

std::vector<StateId> ids(std::initializer_list<StateId> v) { return v; }

}  // namespace

TEST_CASE("fig2 LimInf values") {
  OcSsg m = builtin_example("fig2");
  SureStates sure = liminf_sure_states(m);
  CHECK(sure.D == ids({3}));
  CHECK(value_one_states(m) == ids({3}));
  LiminfResult r = liminf_values_mdp(m);
  CHECK(r.nu == std::vector<Rational>{Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1), Rational(0)});
  CHECK(r.T == ids({3}));
  CHECK(r.sigma_star.at(0) == m.find_rule(0, 0, 2));
  CHECK_FALSE(r.pi_star);

  // reachability of {g} by brute force over Max's memoryless profiles
  auto brute = testing_oracles::brute_force_values(to_finite(m, {3}));
  CHECK(brute == r.nu);
}

TEST_CASE("degenerate LimInf fixtures") {
  OcSsg bw = builtin_example("biased-walk");
  CHECK(liminf_sure_states(bw).D.empty());
  CHECK(value_one_states(bw).empty());
  CHECK(liminf_values_mdp(bw).nu == std::vector<Rational>{Rational(0)});

  OcSsg dec = single_decrement();
  CHECK(liminf_sure_states(dec).D == ids({0}));
  CHECK(value_one_states(dec) == ids({0}));
  CHECK(liminf_values_mdp(dec).nu == std::vector<Rational>{Rational(1)});
}

TEST_CASE("Min state with a decrement and an increment loop") {
  OcSsg g = min_loop();
  LiminfResult r = liminf_values_ssg(g);
  CHECK(r.nu == std::vector<Rational>{Rational(0)});
  REQUIRE(r.pi_star);
  CHECK(r.pi_star->at(0) == g.find_rule(0, +1, 0));
}

TEST_CASE("SSG values are the pointwise minimum over Min strategies") {
  OcSsg g = duel();
  LiminfResult r = liminf_values_ssg(g);
  REQUIRE(r.pi_star);
  std::vector<Rational> pointwise(g.num_states(), Rational(1));
  for_each_counterless(g, Owner::Min, kDefaultEnumCap, [&](const CounterlessStrategy& pi) {
    LiminfResult fixed = liminf_values_mdp(fix_min_strategy(g, pi));
    for (StateId q = 0; q < g.num_states(); ++q) {
      CHECK(r.nu[q] <= fixed.nu[q]);
      pointwise[q] = min(pointwise[q], fixed.nu[q]);
    }
  });
  CHECK(r.nu == pointwise);
  CHECK(liminf_values_mdp(fix_min_strategy(g, *r.pi_star)).nu == r.nu);
  // Min sends the run back into the walk, so s keeps only the walk's LimInf value
  CHECK(r.nu[0] == Rational(0));
  CHECK(r.pi_star->at(1) == g.find_rule(1, +1, 2));
}

TEST_CASE("Max-only input gives the same answer through the SSG entry point") {
  OcSsg m = builtin_example("fig2");
  LiminfResult a = liminf_values_mdp(m);
  LiminfResult b = liminf_values_ssg(m);
  CHECK(a.nu == b.nu);
  CHECK(a.sigma_star == b.sigma_star);
}

TEST_CASE("idling detection") {
  OcSsg idle = builtin_example("idle-loop");
  CounterlessStrategy only{Owner::Max, {RuleId{0}}};
  CHECK(is_idling(only, idle) == std::optional<StateId>(0));

  OcSsg bw = builtin_example("biased-walk");
  CHECK_FALSE(is_idling(CounterlessStrategy{Owner::Max, {std::nullopt}}, bw));

  OcSsg fig2 = builtin_example("fig2");
  CounterlessStrategy via_r{Owner::Max, std::vector<std::optional<RuleId>>(fig2.num_states())};
  via_r.choice[0] = fig2.find_rule(0, 0, 1);
  CHECK_FALSE(is_idling(via_r, fig2));
}

TEST_CASE("enumeration cap is enforced") {
  OcSsg fig2 = builtin_example("fig2");
  CHECK(count_strategies(fig2, Owner::Max, 10) == 2);
  CHECK_THROWS_AS(count_strategies(fig2, Owner::Max, 1), CapExceeded);
  CHECK_THROWS_AS(liminf_values_mdp(fig2, 1), CapExceeded);
}

TEST_CASE("random models: structural LimInf properties") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 60; ++i) {
    testing_oracles::RandomModelOptions opt;
    opt.with_min = i % 3 == 2;
    OcSsg m = testing_oracles::random_model(rng, opt);
    LiminfResult r = m.has_owner(Owner::Min) ? liminf_values_ssg(m) : liminf_values_mdp(m);
    for (StateId q = 0; q < m.num_states(); ++q) {
      CHECK(r.nu[q].sign() >= 0);
      CHECK(r.nu[q] <= Rational(1));
      bool in_t = std::find(r.T.begin(), r.T.end(), q) != r.T.end();
      CHECK(in_t == (r.nu[q] == Rational(1)));
    }
    for (StateId q : r.D) CHECK(std::find(r.T.begin(), r.T.end(), q) != r.T.end());
    // nu never exceeds the termination value, whose upper bound the oracle provides
    auto table = finite_horizon_table(m, 3, 40);
    for (std::size_t c = 1; c < table.size(); ++c) {
      for (StateId q = 0; q < m.num_states(); ++q) CHECK(r.nu[q] <= table[c][q].upper);
    }
  }
}

TEST_CASE("simulated LimInf strategy approaches nu") {
  OcSsg m = builtin_example("fig2");
  LiminfResult r = liminf_values_mdp(m);
  ModeSwitchStrategy sigma{Owner::Max, 0, 0, {}, r.sigma_star};
  const std::uint64_t runs = 20000;
  SimReport rep = simulate(m, &sigma, nullptr, {0, 20}, 5000, runs, 5);
  const double p = r.nu[0].to_double();
  CHECK(std::fabs(rep.frequency.to_double() - p) <= 3 * std::sqrt(p * (1 - p) / runs));
}
