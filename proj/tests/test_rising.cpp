#include "doctest.h"

#include <random>

#include "octerm/martingale.hpp"
#include "octerm/oracle.hpp"
#include "octerm/rising.hpp"
#include "oracles.hpp"

using namespace octerm;

namespace {

OcSsg collapsed_random(std::mt19937_64& rng) {
  OcSsg m = testing_oracles::random_model(rng);
  return collapse_value_one(m, value_one_states(m)).model;
}

}  // namespace

TEST_CASE("collapse fig2") {
  OcSsg fig2 = builtin_example("fig2");
  CollapsedModel c = collapse_value_one(fig2, {3});
  REQUIRE(c.model.num_states() == 5);
  CHECK(c.model.name(c.trap) == "trap");
  std::vector<std::string> names;
  for (StateId q = 0; q < 5; ++q) names.push_back(c.model.name(q));
  CHECK(names == std::vector<std::string>{"s", "r", "t", "b", "trap"});
  CHECK_FALSE(c.state_map[3]);
  const StateId t = *c.state_map[2];
  auto redirected = c.model.find_rule(t, 0, c.trap);
  REQUIRE(redirected);
  CHECK(*c.model.rule(*redirected).prob == Rational(1, 2));
  REQUIRE(c.model.outgoing(c.trap).size() == 1);
  const Rule& trap_rule = c.model.rule(c.model.outgoing(c.trap)[0]);
  CHECK(trap_rule.delta == 1);
  CHECK(trap_rule.dst == c.trap);
  CHECK(value_one_states(c.model).empty());
  CHECK(validate(c.model).empty());
}

TEST_CASE("collapse with empty and full value-one sets") {
  OcSsg bw = builtin_example("biased-walk");
  CollapsedModel c = collapse_value_one(bw, {});
  CHECK(c.model.num_states() == 2);
  CHECK(c.trap == 1);
  OcSsg dec({{"q", Owner::Random}}, {{0, -1, 0, Rational(1)}});
  CollapsedModel all = collapse_value_one(dec, {0});
  CHECK(all.model.num_states() == 1);
}

TEST_CASE("unpruned rising state counts") {
  OcSsg bw = builtin_example("biased-walk");
  RisingOptions opts;
  opts.prune = false;
  RisingModel r = rising_construction(bw, opts);
  CHECK(r.model.num_states() == 28);
  CHECK(rising_state_count(1, 2) == 28);

  OcSsg fig2 = collapse_value_one(builtin_example("fig2"), {3}).model;
  RisingModel rf = rising_construction(fig2, opts);
  CHECK(rf.model.num_states() == rising_state_count(fig2.num_states(), fig2.num_rules()));
  CHECK(validate(rf.model).empty());
}

TEST_CASE("rising model structure") {
  OcSsg fig2 = collapse_value_one(builtin_example("fig2"), {3}).model;
  for (bool prune : {false, true}) {
    RisingOptions opts;
    opts.prune = prune;
    RisingModel r = rising_construction(fig2, opts);
    CHECK_FALSE(r.model.has_owner(Owner::Min));
    REQUIRE(r.f.size() == fig2.num_states());
    for (StateId q = 0; q < fig2.num_states(); ++q) {
      const RisingTag& tag = r.tags[r.f[q]];
      CHECK(tag.kind == RisingTag::Kind::Triple);
      CHECK(tag.q == q);
      CHECK(tag.n == 0);
      CHECK(tag.m == 0);
    }
    const int nq = static_cast<int>(fig2.num_states());
    std::size_t traps = 0;
    for (StateId s = 0; s < r.model.num_states(); ++s) {
      const RisingTag& tag = r.tags[s];
      if (tag.kind == RisingTag::Kind::Trap) {
        ++traps;
        REQUIRE(r.model.outgoing(s).size() == 1);
        const Rule& rule = r.model.rule(r.model.outgoing(s)[0]);
        CHECK(rule.delta == 1);
        CHECK(rule.dst == s);
        continue;
      }
      CHECK(tag.n <= nq + 1);
      CHECK(tag.m <= nq * nq + 1);
      const Owner expected = tag.kind == RisingTag::Kind::Triple ? Owner::Max : Owner::Random;
      CHECK(r.model.owner(s) == expected);
    }
    CHECK(traps == 1);
  }
}

TEST_CASE("rising construction rejects value-one states") {
  OcSsg fig2 = builtin_example("fig2");
  CHECK_THROWS_AS(rising_construction(fig2), InvalidArgument);
}

TEST_CASE("no idling strategies in rising models") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 15; ++i) {
    OcSsg base = collapsed_random(rng);
    RisingModel r = rising_construction(base);
    const auto max_states = r.model.states_of(Owner::Max);
    std::uint64_t total = 1;
    bool small = true;
    for (StateId s : max_states) {
      total *= r.model.outgoing(s).size();
      if (total > 4096) {
        small = false;
        break;
      }
    }
    if (small) {
      for_each_counterless(r.model, Owner::Max, kDefaultEnumCap, [&](const CounterlessStrategy& st) {
        CHECK_FALSE(is_idling(st, r.model));
      });
    } else {
      std::mt19937_64 pick(i);
      for (int k = 0; k < 100; ++k) {
        CounterlessStrategy st{Owner::Max, std::vector<std::optional<RuleId>>(r.model.num_states())};
        for (StateId s : max_states) {
          const auto& out = r.model.outgoing(s);
          st.choice[s] = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(pick)];
        }
        CHECK_FALSE(is_idling(st, r.model));
      }
    }
  }
}

TEST_CASE("rising construction preserves termination values") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 12; ++i) {
    OcSsg base = collapsed_random(rng);
    RisingModel r = rising_construction(base);
    auto orig = finite_horizon_table(base, 6, 60);
    auto lifted = finite_horizon_table(r.model, 6, 120);
    for (std::size_t c = 0; c <= 6; ++c) {
      for (StateId q = 0; q < base.num_states(); ++q) {
        const BoundPair& a = orig[c][q];
        const BoundPair& b = lifted[c][r.f[q]];
        CHECK(a.lower <= b.upper);
        CHECK(b.lower <= a.upper);
      }
    }
  }
}

TEST_CASE("rising models have positive drift") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    OcSsg base = collapsed_random(rng);
    RisingModel r = rising_construction(base);
    LpSolution sol = solve_drift_lp(r.model);
    CHECK(sol.x_bar.sign() > 0);
    CHECK(check_submartingale(r.model, sol.x_bar, sol.z_bar).ok);
  }
}
