#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "octerm/model.hpp"

namespace octerm {

inline constexpr std::uint64_t kDefaultEnumCap = std::uint64_t{1} << 20;

/// Values of the LimInf = -infinity objective and optimal counterless
/// strategies.
struct LiminfResult {
  std::vector<Rational> nu;       // per state, counter independent
  std::vector<StateId> T;         // states with nu = 1
  std::vector<StateId> D;         // states certified by a single strategy
  CounterlessStrategy sigma_star;  // Max
  std::optional<CounterlessStrategy> pi_star;  // Min, absent without Min states
};

/// States from which some counterless Max strategy yields LimInf = -inf
/// almost surely. Also returns a strategy certifying every member.
struct SureStates {
  std::vector<StateId> D;
  CounterlessStrategy certificate;
};
SureStates liminf_sure_states(const OcSsg& mdp, std::uint64_t enum_cap = kDefaultEnumCap);

std::vector<StateId> value_one_states(const OcSsg& mdp, std::uint64_t enum_cap = kDefaultEnumCap);

LiminfResult liminf_values_mdp(const OcSsg& mdp, std::uint64_t enum_cap = kDefaultEnumCap);
LiminfResult liminf_values_ssg(const OcSsg& game, std::uint64_t enum_cap = kDefaultEnumCap);

/// A state witnessing that `strategy` is idling, if any.
std::optional<StateId> is_idling(const CounterlessStrategy& strategy, const OcSsg& mdp);

/// Number of pure counterless strategies of `owner`; throws CapExceeded
/// above `cap`.
std::uint64_t count_strategies(const OcSsg& model, Owner owner, std::uint64_t cap);

/// Calls f(strategy) for every pure counterless strategy of `owner`, in
/// mixed-radix order over the owner's states (first state varies fastest).
template <class F>
void for_each_counterless(const OcSsg& model, Owner owner, std::uint64_t cap, F&& f) {
  std::uint64_t total = count_strategies(model, owner, cap);
  std::vector<StateId> states = model.states_of(owner);
  std::vector<std::size_t> digit(states.size(), 0);
  CounterlessStrategy st{owner, std::vector<std::optional<RuleId>>(model.num_states())};
  for (std::uint64_t k = 0; k < total; ++k) {
    for (std::size_t i = 0; i < states.size(); ++i) st.choice[states[i]] = model.outgoing(states[i])[digit[i]];
    f(st);
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (++digit[i] < model.outgoing(states[i]).size()) break;
      digit[i] = 0;
    }
  }
}

}  // namespace octerm
