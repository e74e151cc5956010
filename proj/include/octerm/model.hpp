#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "octerm/error.hpp"
#include "octerm/rational.hpp"

namespace octerm {

using StateId = std::size_t;
using RuleId = std::size_t;

enum class Owner { Max, Min, Random };

std::string_view to_string(Owner owner);

struct State {
  std::string name;
  Owner owner;
};

/// A transition (src, delta, dst). `prob` is set iff src is a Random state.
struct Rule {
  StateId src;
  int delta;
  StateId dst;
  std::optional<Rational> prob;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// One-counter simple stochastic game. Immutable once constructed. The
/// constructor only checks that rule endpoints are in range; use
/// `validate` for the full invariant check.
class OcSsg {
public:
  OcSsg() = default;
  OcSsg(std::vector<State> states, std::vector<Rule> rules);

  std::size_t num_states() const { return states_.size(); }
  std::size_t num_rules() const { return rules_.size(); }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const State& state(StateId id) const { return states_.at(id); }
  const Rule& rule(RuleId id) const { return rules_.at(id); }
  Owner owner(StateId id) const { return states_.at(id).owner; }
  const std::string& name(StateId id) const { return states_.at(id).name; }

  /// Rules leaving `id`, in declaration order.
  const std::vector<RuleId>& outgoing(StateId id) const { return outgoing_.at(id); }

  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<RuleId> find_rule(StateId src, int delta, StateId dst) const;

  bool has_owner(Owner owner) const;
  std::vector<StateId> states_of(Owner owner) const;

  friend bool operator==(const OcSsg& a, const OcSsg& b) {
    return a.rules_ == b.rules_ && a.state_names_equal(b);
  }

private:
  bool state_names_equal(const OcSsg& other) const;

  std::vector<State> states_;
  std::vector<Rule> rules_;
  std::vector<std::vector<RuleId>> outgoing_;
  std::unordered_map<std::string, StateId> by_name_;
};

struct Config {
  StateId state = 0;
  std::int64_t counter = 0;
};

/// Pure counterless strategy: one rule per state of `owner`.
struct CounterlessStrategy {
  Owner owner = Owner::Max;
  std::vector<std::optional<RuleId>> choice;  // indexed by state

  std::optional<RuleId> at(StateId s) const { return s < choice.size() ? choice[s] : std::nullopt; }
  friend bool operator==(const CounterlessStrategy&, const CounterlessStrategy&) = default;
};

/// Parses the line-oriented model format and validates the result.
/// Throws ParseError on syntax problems and ValidationError on invariant
/// violations.
OcSsg parse_ocssg(std::string_view text);

/// Emits states then rules, one per line, in declaration order.
std::string serialize(const OcSsg& model);

/// Empty iff every model invariant holds.
std::vector<Diagnostic> validate(const OcSsg& model);

/// Throws ValidationError if `validate` reports anything.
void require_valid(const OcSsg& model);

/// Built-in fixtures: fig2, fig2-no-st, biased-walk, idle-loop.
OcSsg builtin_example(std::string_view name);
std::vector<std::string> builtin_example_names();

/// Checks that `strategy` picks an outgoing rule for every state of its
/// owner. Throws InvalidArgument otherwise.
void require_total(const OcSsg& model, const CounterlessStrategy& strategy);

/// Formats a rule as it appears in the model text ("s 0 r").
std::string describe_rule(const OcSsg& model, RuleId id);

}  // namespace octerm
