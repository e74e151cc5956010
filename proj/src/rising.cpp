#include "octerm/rising.hpp"

#include <deque>
#include <map>
#include <tuple>

namespace octerm {

CollapsedModel collapse_value_one(const OcSsg& mdp, const std::vector<StateId>& T) {
  const std::size_t n = mdp.num_states();
  std::vector<char> in_t(n, 0);
  for (StateId s : T) {
    if (s >= n) throw InvalidArgument("collapse_value_one: state id out of range");
    in_t[s] = 1;
  }
  CollapsedModel out;
  out.state_map.assign(n, std::nullopt);
  std::vector<State> states;
  for (StateId s = 0; s < n; ++s) {
    if (in_t[s]) continue;
    out.state_map[s] = states.size();
    states.push_back(mdp.state(s));
  }
  std::string trap_name = "trap";
  while (mdp.find_state(trap_name) && !in_t[*mdp.find_state(trap_name)]) trap_name += "_";
  out.trap = states.size();
  states.push_back({trap_name, Owner::Random});

  std::vector<Rule> rules;
  std::map<std::tuple<StateId, int, StateId>, std::size_t> seen;
  for (const Rule& r : mdp.rules()) {
    if (in_t[r.src]) continue;
    StateId src = *out.state_map[r.src];
    StateId dst = in_t[r.dst] ? out.trap : *out.state_map[r.dst];
    auto key = std::make_tuple(src, r.delta, dst);
    auto it = seen.find(key);
    if (it != seen.end()) {
      // several rules now coincide: merge their probability mass
      if (r.prob) rules[it->second].prob = *rules[it->second].prob + *r.prob;
      continue;
    }
    seen.emplace(key, rules.size());
    rules.push_back({src, r.delta, dst, r.prob});
  }
  rules.push_back({out.trap, +1, out.trap, Rational(1)});
  out.model = OcSsg(std::move(states), std::move(rules));
  return out;
}

std::uint64_t rising_state_count(std::uint64_t q, std::uint64_t d) {
  return 1 + q * (q + 2) * (q * q + 2) + d * (q + 2) * (q * q + 2);
}

std::string RisingTag::label(const OcSsg& original) const {
  switch (kind) {
    case Kind::Trap:
      return "trap";
    case Kind::Triple:
      return "[" + original.name(q) + "," + std::to_string(n) + "," + std::to_string(m) + "]";
    case Kind::Tuple: {
      const Rule& r = original.rule(rule);
      std::string k = r.delta > 0 ? "+1" : std::to_string(r.delta);
      return "[" + original.name(q) + "," + std::to_string(n) + "," + std::to_string(m) + "," + k + "," +
             original.name(r.dst) + "]";
    }
  }
  return "?";
}

RisingModel rising_construction(const OcSsg& mdp, const RisingOptions& options) {
  if (mdp.has_owner(Owner::Min)) throw InvalidArgument("rising_construction: model has Min states");
  if (options.check_precondition && !value_one_states(mdp, options.enum_cap).empty()) {
    throw InvalidArgument("rising_construction: value-one set is not empty");
  }
  const std::size_t nq = mdp.num_states();
  const std::size_t nd = mdp.num_rules();
  const int n_max = static_cast<int>(nq) + 1;       // n in [0, |Q|+1]
  const int m_max = static_cast<int>(nq * nq) + 1;  // m in [0, |Q|^2+1]
  const std::size_t n_span = nq + 2;
  const std::size_t m_span = nq * nq + 2;
  const std::size_t triple_base = 1;
  const std::size_t tuple_base = triple_base + nq * n_span * m_span;
  const std::size_t total = tuple_base + nd * n_span * m_span;

  auto triple = [&](StateId q, int n, int m) { return triple_base + (q * n_span + n) * m_span + m; };
  auto tuple = [&](RuleId r, int n, int m) { return tuple_base + (r * n_span + n) * m_span + m; };

  std::vector<RisingTag> tags(total);
  std::vector<Owner> owners(total, Owner::Random);
  for (StateId q = 0; q < nq; ++q) {
    for (int n = 0; n <= n_max; ++n) {
      for (int m = 0; m <= m_max; ++m) {
        std::size_t id = triple(q, n, m);
        tags[id] = {RisingTag::Kind::Triple, q, n, m, 0};
        owners[id] = Owner::Max;
      }
    }
  }
  for (RuleId r = 0; r < nd; ++r) {
    for (int n = 0; n <= n_max; ++n) {
      for (int m = 0; m <= m_max; ++m) tags[tuple(r, n, m)] = {RisingTag::Kind::Tuple, mdp.rule(r).src, n, m, r};
    }
  }

  // rules per state, built in state order
  std::vector<std::vector<Rule>> out(total);
  out[0].push_back({0, +1, 0, Rational(1)});
  for (StateId q = 0; q < nq; ++q) {
    for (int n = 0; n <= n_max; ++n) {
      for (int m = 0; m <= m_max; ++m) {
        std::size_t id = triple(q, n, m);
        for (RuleId r : mdp.outgoing(q)) out[id].push_back({id, 0, tuple(r, n, m), std::nullopt});
      }
    }
  }
  for (RuleId ri = 0; ri < nd; ++ri) {
    const Rule& rule = mdp.rule(ri);
    const bool random = mdp.owner(rule.src) == Owner::Random;
    for (int n = 0; n <= n_max; ++n) {
      for (int m = 0; m <= m_max; ++m) {
        std::size_t id = tuple(ri, n, m);
        auto& rs = out[id];
        if (m == m_max || n == n_max) {
          rs.push_back({id, +1, 0, Rational(1)});
          continue;
        }
        for (RuleId other : mdp.outgoing(rule.src)) {
          const Rule& o = mdp.rule(other);
          if (other == ri) {
            const int next = n + rule.delta;
            if (next >= 0) {
              rs.push_back({id, rule.delta, triple(rule.dst, next, m + 1), rule.prob});
            } else {
              rs.push_back({id, rule.delta, triple(rule.dst, 0, 0), rule.prob});
            }
          } else if (random) {
            rs.push_back({id, o.delta, triple(o.dst, 0, 0), o.prob});
          }
        }
        if (rs.size() == 1) rs.front().prob = Rational(1);
      }
    }
  }
  for (std::size_t id = 0; id < total; ++id) {
    if (out[id].empty()) {
      out[id].push_back({id, +1, id, owners[id] == Owner::Random ? std::optional<Rational>(Rational(1)) : std::nullopt});
    }
  }

  std::vector<char> keep(total, 1);
  if (options.prune) {
    std::fill(keep.begin(), keep.end(), 0);
    std::deque<std::size_t> queue;
    keep[0] = 1;
    for (StateId q = 0; q < nq; ++q) {
      std::size_t id = triple(q, 0, 0);
      if (!keep[id]) {
        keep[id] = 1;
        queue.push_back(id);
      }
    }
    while (!queue.empty()) {
      std::size_t id = queue.front();
      queue.pop_front();
      for (const Rule& r : out[id]) {
        if (!keep[r.dst]) {
          keep[r.dst] = 1;
          queue.push_back(r.dst);
        }
      }
    }
  }
  std::vector<std::size_t> new_id(total, SIZE_MAX);
  RisingModel result;
  std::vector<State> states;
  for (std::size_t id = 0; id < total; ++id) {
    if (!keep[id]) continue;
    new_id[id] = states.size();
    states.push_back({tags[id].label(mdp), owners[id]});
    result.tags.push_back(tags[id]);
  }
  std::vector<Rule> rules;
  for (std::size_t id = 0; id < total; ++id) {
    if (!keep[id]) continue;
    for (const Rule& r : out[id]) rules.push_back({new_id[r.src], r.delta, new_id[r.dst], r.prob});
  }
  result.model = OcSsg(std::move(states), std::move(rules));
  for (StateId q = 0; q < nq; ++q) result.f.push_back(new_id[triple(q, 0, 0)]);
  return result;
}

}  // namespace octerm
