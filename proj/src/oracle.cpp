#include "octerm/oracle.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace octerm {

namespace {

struct Tables {
  std::vector<Rational> lower;
  std::vector<Rational> upper;
};

/// Values after t steps for counters 0..top, laid out as c * |Q| + q.
Tables bellman(const OcSsg& game, std::int64_t top, std::int64_t t, std::uint64_t cap) {
  if (t < 0) throw InvalidArgument("horizon must be non-negative");
  if (top < 0) throw InvalidArgument("counter must be non-negative");
  const std::size_t nq = game.num_states();
  const long double cells = static_cast<long double>(nq) * static_cast<long double>(top + 1) *
                            static_cast<long double>(std::max<std::int64_t>(t, 1));
  if (cells > static_cast<long double>(cap)) throw CapExceeded("oracle table exceeds the size cap");
  for (StateId q = 0; q < nq; ++q) {
    if (game.outgoing(q).empty()) throw InvalidArgument("state '" + game.name(q) + "' has no outgoing rule");
  }

  const std::size_t width = static_cast<std::size_t>(top + 1) * nq;
  Tables cur{std::vector<Rational>(width), std::vector<Rational>(width, Rational(1))};
  for (StateId q = 0; q < nq; ++q) cur.lower[q] = Rational(1);
  Tables next = cur;

  auto idx = [&](std::int64_t c, StateId q) {
    return static_cast<std::size_t>(std::min(c, top)) * nq + q;
  };
  for (std::int64_t k = 1; k <= t; ++k) {
    // Only counters with c + k <= top are still needed.
    const std::int64_t hi = top - (t - k);
    for (std::int64_t c = 1; c <= hi; ++c) {
      for (StateId q = 0; q < nq; ++q) {
        const auto& rules = game.outgoing(q);
        const Owner owner = game.owner(q);
        Rational lo, up;
        bool first = true;
        for (RuleId r : rules) {
          const Rule& rule = game.rule(r);
          const std::size_t j = idx(c + rule.delta, rule.dst);
          if (owner == Owner::Random) {
            lo += *rule.prob * cur.lower[j];
            up += *rule.prob * cur.upper[j];
          } else if (first) {
            lo = cur.lower[j];
            up = cur.upper[j];
          } else if (owner == Owner::Max) {
            lo = max(lo, cur.lower[j]);
            up = max(up, cur.upper[j]);
          } else {
            lo = min(lo, cur.lower[j]);
            up = min(up, cur.upper[j]);
          }
          first = false;
        }
        next.lower[idx(c, q)] = std::move(lo);
        next.upper[idx(c, q)] = std::move(up);
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace

BoundPair finite_horizon_bounds(const OcSsg& game, const Config& start, std::int64_t t, std::uint64_t cap) {
  if (start.state >= game.num_states()) throw InvalidArgument("start state out of range");
  if (t < 0) throw InvalidArgument("horizon must be non-negative");
  if (start.counter > t) return {Rational(0), Rational(1)};  // zero is out of reach
  auto table = finite_horizon_table(game, start.counter, t, cap);
  return table[static_cast<std::size_t>(start.counter)][start.state];
}

std::vector<std::vector<BoundPair>> finite_horizon_table(const OcSsg& game, std::int64_t max_counter, std::int64_t t,
                                                         std::uint64_t cap) {
  if (max_counter < 0) throw InvalidArgument("counter must be non-negative");
  if (t < 0) throw InvalidArgument("horizon must be non-negative");
  // From a counter above t no run reaches zero within t steps: lower 0, upper 1.
  const std::int64_t solved = std::min(max_counter, t);
  Tables tab = bellman(game, solved + t, t, cap);
  const std::size_t nq = game.num_states();
  std::vector<std::vector<BoundPair>> out(static_cast<std::size_t>(max_counter + 1));
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].reserve(nq);
    for (StateId q = 0; q < nq; ++q) {
      if (static_cast<std::int64_t>(c) > solved) {
        out[c].push_back({Rational(0), Rational(1)});
      } else {
        out[c].push_back({tab.lower[c * nq + q], tab.upper[c * nq + q]});
      }
    }
  }
  return out;
}

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) {
  return splitmix64_mix(seed ^ splitmix64_mix(run + 1));
}

namespace {

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next() { return splitmix64_mix(state_ += 0x9E3779B97F4A7C15ULL); }

  /// Uniform integer in [0, bound), exact (multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

private:
  std::uint64_t state_;
};

struct Move {
  int delta;
  StateId dst;
};

struct Sampler {
  std::uint64_t denominator = 0;
  std::vector<std::uint64_t> cumulative;  // scaled numerators, running sum
  std::vector<Move> moves;
};

Sampler make_sampler(const OcSsg& game, StateId q) {
  mpz_class den = 1;
  for (RuleId r : game.outgoing(q)) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), game.rule(r).prob->raw().get_den_mpz_t());
  if (den > mpz_class("4611686018427387904")) {
    throw InvalidArgument("probability denominators at state '" + game.name(q) + "' are too large to sample");
  }
  Sampler s;
  s.denominator = den.get_ui();
  std::uint64_t acc = 0;
  for (RuleId r : game.outgoing(q)) {
    const mpq_class& p = game.rule(r).prob->raw();
    mpz_class scaled = p.get_num() * (den / p.get_den());
    acc += scaled.get_ui();
    s.cumulative.push_back(acc);
    s.moves.push_back({game.rule(r).delta, game.rule(r).dst});
  }
  return s;
}

/// States from which a decrement is reachable once both players follow
/// their counterless tables.
std::vector<char> can_decrease(const OcSsg& game, const ModeSwitchStrategy* sigma, const ModeSwitchStrategy* pi) {
  const std::size_t nq = game.num_states();
  std::vector<std::vector<StateId>> rev(nq);
  std::vector<char> mark(nq, 0);
  std::deque<StateId> queue;
  for (StateId q = 0; q < nq; ++q) {
    const ModeSwitchStrategy* st = game.owner(q) == Owner::Max ? sigma : game.owner(q) == Owner::Min ? pi : nullptr;
    for (RuleId r : game.outgoing(q)) {
      if (st && st->at_or_above.at(q) != r) continue;
      const Rule& rule = game.rule(r);
      rev[rule.dst].push_back(q);
      if (rule.delta < 0 && !mark[q]) {
        mark[q] = 1;
        queue.push_back(q);
      }
    }
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : rev[s]) {
      if (!mark[p]) {
        mark[p] = 1;
        queue.push_back(p);
      }
    }
  }
  return mark;
}

void check_strategy(const OcSsg& game, const ModeSwitchStrategy* st, Owner owner) {
  if (!game.has_owner(owner)) return;
  const char* who = owner == Owner::Max ? "Max" : "Min";
  if (!st) throw InvalidArgument(std::string(who) + " strategy required");
  if (st->owner != owner) throw InvalidArgument(std::string(who) + " strategy has the wrong owner");
  for (StateId q : game.states_of(owner)) {
    auto ok = [&](std::optional<RuleId> r) { return r && *r < game.num_rules() && game.rule(*r).src == q; };
    if (!ok(st->at_or_above.at(q))) throw InvalidArgument("counterless part undefined at '" + game.name(q) + "'");
    if (st->switch_level < 1) continue;
    if (st->below.size() + 1 < static_cast<std::size_t>(st->switch_level)) {
      throw InvalidArgument("strategy table is shorter than its switch level");
    }
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(st->switch_level); ++i) {
      if (!ok(q < st->below[i].size() ? st->below[i][q] : std::nullopt)) {
        throw InvalidArgument("strategy table undefined at '" + game.name(q) + "'");
      }
    }
  }
}

}  // namespace

SimReport simulate(const OcSsg& game, const ModeSwitchStrategy* sigma, const ModeSwitchStrategy* pi,
                   const Config& start, std::int64_t horizon, std::uint64_t runs, std::uint64_t seed) {
  if (runs < 1) throw InvalidArgument("runs must be positive");
  if (horizon < 0) throw InvalidArgument("horizon must be non-negative");
  if (start.counter < 0) throw InvalidArgument("start counter must be non-negative");
  if (start.state >= game.num_states()) throw InvalidArgument("start state out of range");
  check_strategy(game, sigma, Owner::Max);
  check_strategy(game, pi, Owner::Min);
  if (!game.has_owner(Owner::Max)) sigma = nullptr;
  if (!game.has_owner(Owner::Min)) pi = nullptr;

  const std::size_t nq = game.num_states();
  std::vector<Sampler> samplers(nq);
  for (StateId q = 0; q < nq; ++q) {
    if (game.owner(q) == Owner::Random) samplers[q] = make_sampler(game, q);
  }
  const std::vector<char> alive = can_decrease(game, sigma, pi);
  std::vector<Owner> owners(nq);
  for (StateId q = 0; q < nq; ++q) owners[q] = game.owner(q);
  const bool idle_players = !sigma && !pi;

  SimReport rep;
  rep.runs = runs;
  rep.horizon = horizon;
  rep.seed = seed;
  for (std::uint64_t run = 0; run < runs; ++run) {
    SplitMix64 rng(run_seed(seed, run));
    StateId q = start.state;
    std::int64_t c = start.counter;
    bool sigma_switched = false;
    bool pi_switched = false;
    bool hit = c == 0;
    for (std::int64_t step = 0; step < horizon && !hit; ++step) {
      if (c > horizon - step) break;  // cannot reach zero in the remaining steps
      if (!alive[q] && (idle_players || ((sigma_switched || !sigma) && (pi_switched || !pi)))) break;
      Move m;
      const Owner owner = owners[q];
      if (owner == Owner::Random) {
        const Sampler& s = samplers[q];
        const std::uint64_t u = s.denominator == 1 ? 0 : rng.below(s.denominator);
        std::size_t k = 0;
        while (u >= s.cumulative[k]) ++k;
        m = s.moves[k];
      } else {
        const bool is_max = owner == Owner::Max;
        const Rule& rule = game.rule(is_max ? sigma->choose(q, c, sigma_switched) : pi->choose(q, c, pi_switched));
        m = {rule.delta, rule.dst};
      }
      c += m.delta;
      q = m.dst;
      hit = c == 0;
      // The mode bit flips on visiting a counter >= the switch level.
      if (sigma && !sigma_switched && c >= sigma->switch_level) sigma_switched = true;
      if (pi && !pi_switched && c >= pi->switch_level) pi_switched = true;
    }
    if (hit) ++rep.terminated;
  }
  rep.frequency = Rational(static_cast<std::int64_t>(rep.terminated), static_cast<std::int64_t>(runs));
  return rep;
}

}  // namespace octerm
