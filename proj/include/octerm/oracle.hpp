#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "octerm/approx.hpp"
#include "octerm/model.hpp"

namespace octerm {

/// Bracket [lower, upper] around a termination value.
struct BoundPair {
  Rational lower;
  Rational upper;
};

inline constexpr std::uint64_t kDefaultOracleCap = 50'000'000;

/// Bellman backward induction over t steps. `lower` is the optimal
/// probability of reaching counter 0 within t steps; `upper` additionally
/// counts runs still alive after t steps as terminating.
/// Throws CapExceeded when |Q| * (counter + t + 1) * t exceeds `cap`.
BoundPair finite_horizon_bounds(const OcSsg& game, const Config& start, std::int64_t t,
                                std::uint64_t cap = kDefaultOracleCap);

/// Same induction for every counter 0..max_counter at once:
/// result[i][q] brackets v(q, i).
std::vector<std::vector<BoundPair>> finite_horizon_table(const OcSsg& game, std::int64_t max_counter, std::int64_t t,
                                                         std::uint64_t cap = kDefaultOracleCap);

struct SimReport {
  std::uint64_t runs = 0;
  std::uint64_t terminated = 0;
  std::int64_t horizon = 0;
  std::uint64_t seed = 0;
  Rational frequency;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// Seed of run `run`: splitmix64_mix(seed ^ splitmix64_mix(run + 1)).
/// Each run then draws splitmix64_mix(state += 0x9E3779B97F4A7C15).
std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run);

/// Monte-Carlo estimate of the termination probability within `horizon`
/// steps. Random moves are sampled exactly from their rational
/// probabilities. A strategy may be omitted when its owner has no states.
SimReport simulate(const OcSsg& game, const ModeSwitchStrategy* sigma, const ModeSwitchStrategy* pi,
                   const Config& start, std::int64_t horizon, std::uint64_t runs, std::uint64_t seed);

}  // namespace octerm
