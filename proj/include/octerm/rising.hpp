#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octerm/model.hpp"
#include "octerm/qualitative.hpp"

namespace octerm {

/// Result of redirecting every rule that enters the value-one set to an
/// absorbing, always-incrementing trap.
struct CollapsedModel {
  OcSsg model;
  std::vector<std::optional<StateId>> state_map;  // original id -> new id (empty for T)
  StateId trap = 0;
};

CollapsedModel collapse_value_one(const OcSsg& mdp, const std::vector<StateId>& T);

/// Provenance of a state of the rising model.
struct RisingTag {
  enum class Kind { Trap, Triple, Tuple };
  Kind kind = Kind::Trap;
  StateId q = 0;  // original state
  int n = 0;      // counter change since the last reset
  int m = 0;      // steps since the last reset
  RuleId rule = 0;  // committed rule (Tuple only)

  std::string label(const OcSsg& original) const;
};

struct RisingModel {
  OcSsg model;
  std::vector<StateId> f;  // original state -> state [q,0,0]
  std::vector<RisingTag> tags;
};

struct RisingOptions {
  bool prune = true;               // drop states unreachable from the f-images
  bool check_precondition = true;  // verify the value-one set is empty
  std::uint64_t enum_cap = kDefaultEnumCap;
};

RisingModel rising_construction(const OcSsg& mdp, const RisingOptions& options = {});

/// State count of the unpruned construction.
std::uint64_t rising_state_count(std::uint64_t num_states, std::uint64_t num_rules);

}  // namespace octerm
