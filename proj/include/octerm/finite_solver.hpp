#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octerm/model.hpp"

namespace octerm {

using EdgeId = std::size_t;

struct Edge {
  StateId src;
  StateId dst;
  std::optional<Rational> prob;  // set iff src is Random
  int reward = 0;
};

/// Finite simple stochastic game with a reachability target set.
class FiniteSsg {
public:
  FiniteSsg() = default;
  FiniteSsg(std::vector<State> states, std::vector<Edge> edges, std::vector<StateId> targets);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  Owner owner(StateId s) const { return states_[s].owner; }
  const std::vector<EdgeId>& outgoing(StateId s) const { return outgoing_[s]; }
  bool is_target(StateId s) const { return target_[s]; }
  std::vector<StateId> targets() const;
  bool has_owner(Owner owner) const;

  /// Same game with a different target set.
  FiniteSsg with_targets(const std::vector<StateId>& targets) const;

private:
  std::vector<State> states_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> outgoing_;
  std::vector<bool> target_;
};

/// Drops the counter: one edge per rule (same index), reward = delta.
FiniteSsg to_finite(const OcSsg& model, const std::vector<StateId>& targets = {});

/// Memoryless strategy over edge ids, defined on the owner's states.
struct MemorylessStrategy {
  Owner owner = Owner::Max;
  std::vector<std::optional<EdgeId>> choice;

  std::optional<EdgeId> at(StateId s) const { return s < choice.size() ? choice[s] : std::nullopt; }
  friend bool operator==(const MemorylessStrategy&, const MemorylessStrategy&) = default;
};

struct ReachResult {
  std::vector<Rational> values;
  MemorylessStrategy strategy;
};

struct GameResult {
  std::vector<Rational> values;
  MemorylessStrategy max_strategy;
  MemorylessStrategy min_strategy;
};

/// Optimal reachability for a game without Min states (policy iteration).
ReachResult max_reach_values(const FiniteSsg& game);
/// Optimal reachability for a game without Max states.
ReachResult min_reach_values(const FiniteSsg& game);
/// Game values and optimal memoryless strategies for both players.
GameResult ssg_reach_values(const FiniteSsg& game);

/// Same computations in extended precision; used for warm starts and for
/// games too large for exact arithmetic.
struct ApproxReachResult {
  std::vector<long double> values;
  MemorylessStrategy strategy;
};
ApproxReachResult max_reach_values_approx(const FiniteSsg& game);

struct ApproxGameResult {
  std::vector<long double> values;
  MemorylessStrategy max_strategy;
  MemorylessStrategy min_strategy;
};
ApproxGameResult ssg_reach_values_approx(const FiniteSsg& game);

/// Values when the given strategies are fixed and the remaining player(s)
/// respond optimally.
std::vector<Rational> response_values(const FiniteSsg& game, const MemorylessStrategy* max_fixed,
                                      const MemorylessStrategy* min_fixed);
std::vector<long double> response_values_approx(const FiniteSsg& game, const MemorylessStrategy* max_fixed,
                                                const MemorylessStrategy* min_fixed);

/// Reachability values of the chain obtained by fixing both strategies.
/// Missing strategies are allowed when the corresponding owner is absent.
std::vector<Rational> evaluate_reach(const FiniteSsg& game, const MemorylessStrategy* max_strategy,
                                     const MemorylessStrategy* min_strategy);

/// States of a Min-free game with maximal reachability probability 1.
std::vector<StateId> almost_sure_reach(const FiniteSsg& game, const std::vector<StateId>& targets);

/// Strategy for Max that reaches `targets` almost surely from every state of
/// `almost_sure_reach(game, targets)`; undefined choices elsewhere are left
/// empty.
MemorylessStrategy almost_sure_strategy(const FiniteSsg& game, const std::vector<StateId>& targets);

/// Maximal end components, each sorted, ordered by smallest member.
std::vector<std::vector<StateId>> decompose_end_components(const FiniteSsg& game);

struct EcMeanPayoff {
  Rational value;
  MemorylessStrategy strategy;  // Max choices on the component's Max states
};

/// Minimal mean payoff (edge rewards) achievable inside an end component.
/// Throws CapExceeded when the number of confined strategies exceeds `cap`.
EcMeanPayoff ec_min_mean_payoff(const FiniteSsg& game, const std::vector<StateId>& ec,
                                std::uint64_t cap = std::uint64_t{1} << 20);

struct BsccInfo {
  std::vector<StateId> states;  // sorted
  std::vector<Rational> stationary;  // aligned with `states`
  Rational mean;
  bool has_decrease = false;  // some edge with reward -1 inside
  bool potential_consistent = false;  // every cycle has reward sum 0
};

/// BSCC analysis of a chain (every state Random), in order of smallest member.
std::vector<BsccInfo> chain_mean_and_decrease(const FiniteSsg& chain);

/// Chain induced by fixing Max's and Min's memoryless choices: those states
/// become Random with a single probability-1 edge. Edge ids are not kept.
FiniteSsg induced_chain(const FiniteSsg& game, const MemorylessStrategy* max_strategy,
                        const MemorylessStrategy* min_strategy);

/// Strongly connected components (Tarjan) of the graph with the given
/// edge subset; components sorted internally and by smallest member.
std::vector<std::vector<StateId>> strongly_connected_components(
    std::size_t n, const std::vector<std::pair<StateId, StateId>>& arcs);

}  // namespace octerm
