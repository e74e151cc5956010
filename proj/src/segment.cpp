#include <string>

#include "octerm/approx.hpp"

namespace octerm {

FiniteSsg build_segment_game(const OcSsg& game, const std::vector<Rational>& nu, std::int64_t N) {
  if (N < 1) throw InvalidArgument("segment game needs N >= 1");
  const std::size_t nq = game.num_states();
  if (nu.size() != nq) throw InvalidArgument("boundary vector has wrong size");
  const std::size_t rows = static_cast<std::size_t>(N) + 1;
  const StateId s0 = nq * rows;
  const StateId s1 = s0 + 1;

  std::vector<State> states;
  states.reserve(s0 + 2);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < rows; ++i) {
    for (StateId q = 0; q < nq; ++q) {
      const StateId id = i * nq + q;
      const bool interior = i > 0 && i + 1 < rows;
      states.push_back({"(" + game.name(q) + "," + std::to_string(i) + ")",
                        interior ? game.owner(q) : Owner::Random});
      if (i == 0) {
        edges.push_back({id, s0, Rational(1), 0});
      } else if (!interior) {
        if (nu[q].sign() > 0) edges.push_back({id, s0, nu[q], 0});
        if (nu[q] < Rational(1)) edges.push_back({id, s1, Rational(1) - nu[q], 0});
      } else {
        for (RuleId r : game.outgoing(q)) {
          const Rule& rule = game.rule(r);
          const std::size_t j = static_cast<std::size_t>(static_cast<std::int64_t>(i) + rule.delta);
          edges.push_back({id, j * nq + rule.dst, rule.prob, rule.delta});
        }
      }
    }
  }
  states.push_back({"s0", Owner::Random});
  states.push_back({"s1", Owner::Random});
  edges.push_back({s0, s0, Rational(1), 0});
  edges.push_back({s1, s1, Rational(1), 0});
  return FiniteSsg(std::move(states), std::move(edges), {s0});
}

RuleId ModeSwitchStrategy::choose(StateId state, std::int64_t counter, bool& switched) const {
  if (counter <= 0) throw InvalidArgument("no move at counter 0");
  if (!switched && counter >= switch_level) switched = true;
  std::optional<RuleId> r;
  if (switched) {
    r = at_or_above.at(state);
  } else {
    const auto& row = below.at(static_cast<std::size_t>(counter - 1));
    if (state < row.size()) r = row[state];
  }
  if (!r) throw InvalidArgument("strategy undefined at state " + std::to_string(state));
  return *r;
}

ModeSwitchStrategy assemble_strategy(const OcSsg& game, const FiniteSsg& segment,
                                     const MemorylessStrategy& segment_strategy,
                                     const CounterlessStrategy& counterless, std::int64_t N) {
  const std::size_t nq = game.num_states();
  if (N < 1 || segment.num_states() != nq * static_cast<std::size_t>(N + 1) + 2) {
    throw InvalidArgument("segment game does not match N");
  }
  const Owner owner = counterless.owner;
  ModeSwitchStrategy out{owner, N, N, {}, counterless};
  out.below.assign(static_cast<std::size_t>(N - 1), std::vector<std::optional<RuleId>>(nq));
  for (std::size_t i = 1; i < static_cast<std::size_t>(N); ++i) {
    for (StateId q = 0; q < nq; ++q) {
      if (game.owner(q) != owner) continue;
      const StateId id = i * nq + q;
      std::optional<EdgeId> e = segment_strategy.at(id);
      if (!e) throw InvalidArgument("segment strategy undefined at " + segment.states()[id].name);
      const auto& outs = segment.outgoing(id);
      std::size_t k = 0;
      while (k < outs.size() && outs[k] != *e) ++k;
      if (k == outs.size()) throw InvalidArgument("segment strategy picks a foreign edge");
      out.below[i - 1][q] = game.outgoing(q)[k];
    }
  }
  return out;
}

}  // namespace octerm
