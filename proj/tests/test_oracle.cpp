#include "doctest.h"

#include <cmath>
#include <random>

#include "octerm/oracle.hpp"
#include "oracles.hpp"

using namespace octerm;

TEST_CASE("finite-horizon bounds on fixtures") {
  OcSsg fig2 = builtin_example("fig2");
  BoundPair z = finite_horizon_bounds(fig2, {0, 0}, 0);
  CHECK(z.lower == Rational(1));
  CHECK(z.upper == Rational(1));
  BoundPair two = finite_horizon_bounds(fig2, {0, 1}, 2);
  CHECK(two.lower == Rational(1, 3));

  OcSsg bw = builtin_example("biased-walk");
  BoundPair w = finite_horizon_bounds(bw, {0, 1}, 25);
  CHECK(w.lower == Rational::parse("419930909347/847288609443"));
  CHECK(w.lower >= Rational(49, 100));
  CHECK(w.lower <= Rational(1, 2));
  CHECK(w.upper <= Rational(1));
}

TEST_CASE("bounds are monotone in the horizon") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    testing_oracles::RandomModelOptions opt;
    opt.with_min = k % 2 == 1;
    OcSsg m = testing_oracles::random_model(rng, opt);
    std::vector<std::vector<BoundPair>> prev;
    for (std::int64_t t = 0; t <= 24; t += 4) {
      auto cur = finite_horizon_table(m, 3, t);
      for (std::size_t c = 0; c < cur.size(); ++c) {
        for (StateId q = 0; q < m.num_states(); ++q) {
          CHECK(cur[c][q].lower <= cur[c][q].upper);
          CHECK(cur[c][q].lower.sign() >= 0);
          CHECK(cur[c][q].upper <= Rational(1));
          if (!prev.empty()) {
            CHECK(prev[c][q].lower <= cur[c][q].lower);
            CHECK(cur[c][q].upper <= prev[c][q].upper);
          }
        }
      }
      prev = std::move(cur);
    }
  }
}

TEST_CASE("table agrees with single queries") {
  OcSsg fig2 = builtin_example("fig2");
  auto table = finite_horizon_table(fig2, 4, 15);
  for (std::int64_t c = 0; c <= 4; ++c) {
    for (StateId q = 0; q < fig2.num_states(); ++q) {
      BoundPair b = finite_horizon_bounds(fig2, {q, c}, 15);
      CHECK(b.lower == table[c][q].lower);
      CHECK(b.upper == table[c][q].upper);
    }
  }
}

TEST_CASE("oracle size cap") {
  OcSsg fig2 = builtin_example("fig2");
  CHECK_THROWS_AS(finite_horizon_bounds(fig2, {0, 10}, 100, 1000), CapExceeded);
  CHECK_THROWS_AS(finite_horizon_bounds(fig2, {0, 1}, -1), InvalidArgument);
  // counters above the horizon are settled without building their rows
  BoundPair far = finite_horizon_bounds(fig2, {0, 1000000}, 10, 2000);
  CHECK(far.lower == Rational(0));
  CHECK(far.upper == Rational(1));
}

TEST_CASE("seed mixing is fixed") {
  CHECK(splitmix64_mix(0) == 0);
  CHECK(splitmix64_mix(0x9E3779B97F4A7C15ULL) == 0xE220A8397B1DCDAFULL);
  CHECK(run_seed(42, 0) != run_seed(42, 1));
  CHECK(run_seed(42, 3) == run_seed(42, 3));
}

TEST_CASE("simulation of the biased walk") {
  OcSsg bw = builtin_example("biased-walk");
  SimReport zero = simulate(bw, nullptr, nullptr, {0, 0}, 10, 50, 1);
  CHECK(zero.frequency == Rational(1));

  const std::uint64_t runs = 20000;
  SimReport rep = simulate(bw, nullptr, nullptr, {0, 5}, 2000, runs, 42);
  CHECK(rep.runs == runs);
  CHECK(rep.terminated <= runs);
  CHECK(rep.frequency == Rational(static_cast<std::int64_t>(rep.terminated), static_cast<std::int64_t>(runs)));
  const double p = 1.0 / 32;
  CHECK(std::fabs(rep.frequency.to_double() - p) <= 3 * std::sqrt(p * (1 - p) / runs));

  SimReport again = simulate(bw, nullptr, nullptr, {0, 5}, 2000, runs, 42);
  CHECK(again.terminated == rep.terminated);
  SimReport other = simulate(bw, nullptr, nullptr, {0, 5}, 2000, runs, 43);
  CHECK(other.seed == 43);
}

TEST_CASE("simulation requires strategies for present players") {
  OcSsg fig2 = builtin_example("fig2");
  CHECK_THROWS_AS(simulate(fig2, nullptr, nullptr, {0, 1}, 10, 10, 0), InvalidArgument);
  ModeSwitchStrategy partial{Owner::Max, 4, 4, {}, CounterlessStrategy{Owner::Max, {RuleId{0}}}};
  CHECK_THROWS_AS(simulate(fig2, &partial, nullptr, {0, 1}, 10, 10, 0), InvalidArgument);
  CHECK_THROWS_AS(simulate(fig2, nullptr, nullptr, {0, 1}, 10, 0, 0), InvalidArgument);
}
