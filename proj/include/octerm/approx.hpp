#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "octerm/finite_solver.hpp"
#include "octerm/martingale.hpp"
#include "octerm/model.hpp"
#include "octerm/qualitative.hpp"
#include "octerm/rising.hpp"

namespace octerm {

/// Min states become Random states that take their chosen rule with
/// probability 1; everything else is unchanged.
OcSsg fix_min_strategy(const OcSsg& game, const CounterlessStrategy& pi);

struct TailBound {
  std::int64_t N = 0;
  std::optional<Certificate> certificate;  // absent when every state has value one
  bool used_rising = false;       // LP solved on the rising construction
  std::size_t lp_states = 0;      // states of the model the LP was solved on
  std::optional<DecayCertificate> decay;  // exponential bound on the same model

  /// Segment height: the smaller of the two certified counter bounds.
  std::int64_t height() const { return decay ? std::min(N, decay->N) : N; }

  /// Upper bound on v(q,i) - nu_q, or nothing when neither certificate applies.
  std::optional<Rational> excess_bound(std::int64_t i) const;
};

struct PipelineOptions {
  std::uint64_t enum_cap = kDefaultEnumCap;
  bool prune = true;
  LpMethod lp_method = LpMethod::Auto;
};

/// Counter bound N with v(q,i) - nu_q <= epsilon for all i >= N.
TailBound termination_tail_bound(const OcSsg& game, const CounterlessStrategy* pi_star, const Rational& epsilon,
                                 const PipelineOptions& options = {});

/// Segment game on counters 0..N: rows are laid out level by level, state
/// (q,i) has id i*|Q| + q; s0 = |Q|(N+1), s1 = s0 + 1. Target {s0}.
FiniteSsg build_segment_game(const OcSsg& game, const std::vector<Rational>& nu, std::int64_t N);

/// Pure strategy that follows a counter-indexed table for counters in
/// [1, switch_level) and, from the first visit to a counter >= switch_level
/// on, the counterless strategy forever.
struct ModeSwitchStrategy {
  Owner owner = Owner::Max;
  std::int64_t N = 0;
  std::int64_t switch_level = 0;  // <= N
  std::vector<std::vector<std::optional<RuleId>>> below;  // below[i-1][state]
  CounterlessStrategy at_or_above;

  /// Rule to play at (state, counter), updating the mode bit.
  RuleId choose(StateId state, std::int64_t counter, bool& switched) const;

  friend bool operator==(const ModeSwitchStrategy&, const ModeSwitchStrategy&) = default;
};

/// Translates a memoryless strategy of the segment game into a
/// mode-switch strategy with switch level N.
ModeSwitchStrategy assemble_strategy(const OcSsg& game, const FiniteSsg& segment,
                                     const MemorylessStrategy& segment_strategy,
                                     const CounterlessStrategy& counterless, std::int64_t N);

struct ApproxOptions : PipelineOptions {
  std::int64_t table_rows = 32;     // counters reported besides the start and the top rows
  std::size_t exact_segment_limit = 4000;  // larger segment games use extended precision
};

struct ApproxReport {
  Rational epsilon;
  Config start;
  std::int64_t N = 0;
  Rational value;  // approximation of v(start)
  std::vector<Rational> nu;
  std::vector<StateId> T;
  std::map<std::int64_t, std::vector<Rational>> values;  // counter -> per-state value
  ModeSwitchStrategy sigma_bar;
  std::optional<ModeSwitchStrategy> pi_bar;
  std::optional<Certificate> certificate;
  std::optional<DecayCertificate> decay;
  std::int64_t azuma_N = 0;  // counter bound of `certificate` alone
  bool exact_segment = true;  // false when solved in extended precision
  bool used_rising = false;
  std::size_t lp_states = 0;
  std::map<std::string, double> timings;  // seconds per stage (not serialized to JSON)
};

ApproxReport approximate_termination(const OcSsg& game, const Config& start, const Rational& epsilon,
                                     const ApproxOptions& options = {});

}  // namespace octerm
