#include "octerm/qualitative.hpp"

#include <deque>

#include "octerm/approx.hpp"
#include "octerm/finite_solver.hpp"

namespace octerm {

std::uint64_t count_strategies(const OcSsg& model, Owner owner, std::uint64_t cap) {
  std::uint64_t total = 1;
  for (StateId s : model.states_of(owner)) {
    std::uint64_t d = model.outgoing(s).size();
    if (d == 0) throw InvalidArgument("state '" + model.name(s) + "' has no outgoing rule");
    if (total > cap / d) throw CapExceeded("enumeration cap exceeded");
    total *= d;
  }
  return total;
}

namespace {

MemorylessStrategy as_memoryless(const CounterlessStrategy& c) { return {c.owner, c.choice}; }

void require_max_only(const OcSsg& mdp, const char* op) {
  if (mdp.has_owner(Owner::Min)) throw InvalidArgument(std::string(op) + ": model has Min states");
}

/// States of the induced chain all of whose reachable BSCCs force the
/// counter to -infinity.
std::vector<char> certified_by(const OcSsg& mdp, const CounterlessStrategy& tau) {
  FiniteSsg g = to_finite(mdp);
  MemorylessStrategy m = as_memoryless(tau);
  FiniteSsg chain = induced_chain(g, &m, nullptr);
  const std::size_t n = mdp.num_states();
  std::vector<char> good_bscc(n, 0);
  for (const BsccInfo& b : chain_mean_and_decrease(chain)) {
    bool bad = b.mean.sign() < 0 || (b.mean.is_zero() && !b.potential_consistent);
    if (!bad) {
      for (StateId s : b.states) good_bscc[s] = 1;
    }
  }
  // states that can reach a good BSCC are not certified
  std::vector<std::vector<StateId>> rev(n);
  for (const Edge& e : chain.edges()) rev[e.dst].push_back(e.src);
  std::vector<char> reaches_good = good_bscc;
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    if (good_bscc[s]) queue.push_back(s);
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : rev[s]) {
      if (!reaches_good[p]) {
        reaches_good[p] = 1;
        queue.push_back(p);
      }
    }
  }
  std::vector<char> out(n);
  for (StateId s = 0; s < n; ++s) out[s] = !reaches_good[s];
  return out;
}

}  // namespace

SureStates liminf_sure_states(const OcSsg& mdp, std::uint64_t enum_cap) {
  require_max_only(mdp, "liminf_sure_states");
  const std::size_t n = mdp.num_states();
  std::vector<char> in_d(n, 0);
  CounterlessStrategy cert{Owner::Max, std::vector<std::optional<RuleId>>(n)};
  // Each state keeps the first strategy certifying it. Along any run the
  // index of the assigned strategy can only decrease, so the glued strategy
  // eventually follows one certifying strategy inside its certified set.
  for_each_counterless(mdp, Owner::Max, enum_cap, [&](const CounterlessStrategy& tau) {
    std::vector<char> g = certified_by(mdp, tau);
    for (StateId s = 0; s < n; ++s) {
      if (g[s] && !in_d[s]) {
        in_d[s] = 1;
        if (mdp.owner(s) == Owner::Max) cert.choice[s] = tau.choice[s];
      }
    }
  });
  SureStates out{{}, std::move(cert)};
  for (StateId s = 0; s < n; ++s) {
    if (in_d[s]) out.D.push_back(s);
  }
  return out;
}

std::vector<StateId> value_one_states(const OcSsg& mdp, std::uint64_t enum_cap) {
  SureStates d = liminf_sure_states(mdp, enum_cap);
  return almost_sure_reach(to_finite(mdp), d.D);
}

LiminfResult liminf_values_mdp(const OcSsg& mdp, std::uint64_t enum_cap) {
  SureStates d = liminf_sure_states(mdp, enum_cap);
  FiniteSsg g = to_finite(mdp);
  std::vector<StateId> t = almost_sure_reach(g, d.D);
  ReachResult reach = max_reach_values(g.with_targets(t));
  MemorylessStrategy to_d = almost_sure_strategy(g, d.D);

  const std::size_t n = mdp.num_states();
  std::vector<char> in_d(n, 0), in_t(n, 0);
  for (StateId s : d.D) in_d[s] = 1;
  for (StateId s : t) in_t[s] = 1;

  LiminfResult out;
  out.nu = reach.values;
  out.T = t;
  out.D = d.D;
  out.sigma_star = CounterlessStrategy{Owner::Max, std::vector<std::optional<RuleId>>(n)};
  for (StateId s = 0; s < n; ++s) {
    if (mdp.owner(s) != Owner::Max) continue;
    if (in_d[s]) {
      out.sigma_star.choice[s] = d.certificate.choice[s];
    } else if (in_t[s]) {
      out.sigma_star.choice[s] = to_d.choice[s];
    } else {
      out.sigma_star.choice[s] = reach.strategy.choice[s];
    }
  }
  for (StateId s = 0; s < n; ++s) {
    if ((out.nu[s] == Rational(1)) != (in_t[s] != 0)) {
      throw InternalError("value-one set disagrees with reachability values");
    }
  }
  return out;
}

LiminfResult liminf_values_ssg(const OcSsg& game, std::uint64_t enum_cap) {
  if (!game.has_owner(Owner::Min)) return liminf_values_mdp(game, enum_cap);
  count_strategies(game, Owner::Max, enum_cap);
  std::vector<std::pair<CounterlessStrategy, LiminfResult>> all;
  std::optional<std::vector<Rational>> lowest;
  for_each_counterless(game, Owner::Min, enum_cap, [&](const CounterlessStrategy& pi) {
    LiminfResult r = liminf_values_mdp(fix_min_strategy(game, pi), enum_cap);
    if (!lowest) {
      lowest = r.nu;
    } else {
      for (StateId s = 0; s < game.num_states(); ++s) (*lowest)[s] = min((*lowest)[s], r.nu[s]);
    }
    all.emplace_back(pi, std::move(r));
  });
  for (auto& [pi, r] : all) {
    if (r.nu != *lowest) continue;
    LiminfResult out = std::move(r);
    // Min states were Random in the fixed model; restore ownership view
    out.sigma_star.choice.resize(game.num_states());
    for (StateId s = 0; s < game.num_states(); ++s) {
      if (game.owner(s) != Owner::Max) out.sigma_star.choice[s].reset();
    }
    out.pi_star = pi;
    return out;
  }
  throw InternalError("no single Min strategy attains the pointwise minimal values");
}

std::optional<StateId> is_idling(const CounterlessStrategy& strategy, const OcSsg& mdp) {
  require_max_only(mdp, "is_idling");
  require_total(mdp, strategy);
  FiniteSsg g = to_finite(mdp);
  MemorylessStrategy m = as_memoryless(strategy);
  for (const BsccInfo& b : chain_mean_and_decrease(induced_chain(g, &m, nullptr))) {
    if (b.potential_consistent) return b.states.front();
  }
  return std::nullopt;
}

}  // namespace octerm
