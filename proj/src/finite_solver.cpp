#include "octerm/finite_solver.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>
#include <type_traits>

#include "sparse_elim.hpp"

namespace octerm {

FiniteSsg::FiniteSsg(std::vector<State> states, std::vector<Edge> edges, std::vector<StateId> targets)
    : states_(std::move(states)),
      edges_(std::move(edges)),
      outgoing_(states_.size()),
      target_(states_.size(), false) {
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.src >= states_.size() || edge.dst >= states_.size()) {
      throw InvalidArgument("edge " + std::to_string(e) + " references an unknown state");
    }
    outgoing_[edge.src].push_back(e);
  }
  for (StateId t : targets) {
    if (t >= states_.size()) throw InvalidArgument("target out of range");
    target_[t] = true;
  }
}

std::vector<StateId> FiniteSsg::targets() const {
  std::vector<StateId> out;
  for (StateId s = 0; s < states_.size(); ++s) {
    if (target_[s]) out.push_back(s);
  }
  return out;
}

bool FiniteSsg::has_owner(Owner owner) const {
  return std::any_of(states_.begin(), states_.end(), [&](const State& s) { return s.owner == owner; });
}

FiniteSsg FiniteSsg::with_targets(const std::vector<StateId>& targets) const {
  return FiniteSsg(states_, edges_, targets);
}

FiniteSsg to_finite(const OcSsg& model, const std::vector<StateId>& targets) {
  std::vector<Edge> edges;
  edges.reserve(model.num_rules());
  for (const Rule& r : model.rules()) edges.push_back({r.src, r.dst, r.prob, r.delta});
  return FiniteSsg(model.states(), std::move(edges), targets);
}

namespace {

using Choice = std::vector<std::optional<EdgeId>>;

template <class T>
T edge_prob(const Edge& e);

template <>
Rational edge_prob<Rational>(const Edge& e) {
  return e.prob ? *e.prob : Rational(1);
}

template <>
long double edge_prob<long double>(const Edge& e) {
  return e.prob ? e.prob->to_long_double() : 1.0L;
}

/// Edges active in the chain where controlled states follow `choice`.
template <class F>
void for_active_edges(const FiniteSsg& g, const Choice& choice, StateId s, F&& f) {
  if (g.owner(s) == Owner::Random) {
    for (EdgeId e : g.outgoing(s)) f(e);
  } else if (choice[s]) {
    f(*choice[s]);
  }
}

/// Values of the chain induced by `choice`. States flagged in `zero` are
/// pinned to 0, targets to 1.
template <class T>
std::vector<T> evaluate_chain(const FiniteSsg& g, const Choice& choice, const std::vector<char>& zero) {
  const std::size_t n = g.num_states();
  std::vector<std::vector<StateId>> rev(n);
  for (StateId s = 0; s < n; ++s) {
    if (g.is_target(s) || zero[s]) continue;
    for_active_edges(g, choice, s, [&](EdgeId e) { rev[g.edge(e).dst].push_back(s); });
  }
  std::vector<char> reach(n, 0);
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    if (g.is_target(s)) {
      reach[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : rev[s]) {
      if (!reach[p]) {
        reach[p] = 1;
        queue.push_back(p);
      }
    }
  }
  std::vector<std::size_t> index(n, SIZE_MAX);
  std::vector<StateId> unknowns;
  for (StateId s = 0; s < n; ++s) {
    if (reach[s] && !g.is_target(s) && !zero[s]) {
      index[s] = unknowns.size();
      unknowns.push_back(s);
    }
  }
  std::vector<detail::AbsorptionRow<T>> rows(unknowns.size());
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    StateId s = unknowns[i];
    for_active_edges(g, choice, s, [&](EdgeId e) {
      const Edge& edge = g.edge(e);
      T p = edge_prob<T>(edge);
      if (edge.dst == s) return;
      if (g.is_target(edge.dst)) {
        rows[i].exit += p;
        rows[i].rhs += p;
      } else if (index[edge.dst] != SIZE_MAX) {
        rows[i].off[index[edge.dst]] += p;
      } else {
        rows[i].exit += p;
      }
    });
  }
  std::vector<T> x = detail::solve_absorption(std::move(rows));
  std::vector<T> values(n, T(0));
  for (StateId s = 0; s < n; ++s) {
    if (g.is_target(s)) values[s] = T(1);
  }
  for (std::size_t i = 0; i < unknowns.size(); ++i) values[unknowns[i]] = x[i];
  return values;
}

template <class T>
bool strictly_greater(const T& a, const T& b);

template <>
bool strictly_greater<Rational>(const Rational& a, const Rational& b) {
  return a > b;
}

template <>
bool strictly_greater<long double>(const long double& a, const long double& b) {
  return a > b + 64 * LDBL_EPSILON * std::max(1.0L, std::fabs(b));
}

/// States that can reach a target when controlled states in `fixed` are
/// restricted to their fixed edge. Also returns BFS distances.
std::vector<std::size_t> backward_distance(const FiniteSsg& g, const Choice& fixed) {
  const std::size_t n = g.num_states();
  std::vector<std::vector<EdgeId>> rev(n);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (fixed[edge.src] && *fixed[edge.src] != e) continue;
    rev[edge.dst].push_back(e);
  }
  std::vector<std::size_t> dist(n, SIZE_MAX);
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    if (g.is_target(s)) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (EdgeId e : rev[s]) {
      StateId p = g.edge(e).src;
      if (dist[p] == SIZE_MAX) {
        dist[p] = dist[s] + 1;
        queue.push_back(p);
      }
    }
  }
  return dist;
}

/// Max policy iteration. `fixed` pins the choice of some controlled states
/// (used for Min states when solving the inner MDP of a game).
template <class T>
std::pair<std::vector<T>, Choice> max_policy_iteration(const FiniteSsg& g, const Choice& fixed,
                                                       const Choice* warm) {
  const std::size_t n = g.num_states();
  std::vector<std::size_t> dist = backward_distance(g, fixed);
  const std::vector<char> no_zero(n, 0);

  auto proper_start = [&]() {
    Choice c = fixed;
    for (StateId s = 0; s < n; ++s) {
      if (g.owner(s) != Owner::Max || g.outgoing(s).empty()) continue;
      EdgeId best = g.outgoing(s).front();
      for (EdgeId e : g.outgoing(s)) {
        if (dist[g.edge(e).dst] < dist[g.edge(best).dst]) best = e;
      }
      c[s] = best;
    }
    return c;
  };

  Choice choice;
  std::vector<T> v;
  bool started = false;
  if (warm) {
    choice = fixed;
    for (StateId s = 0; s < n; ++s) {
      if (g.owner(s) == Owner::Max) choice[s] = (*warm)[s];
    }
    v = evaluate_chain<T>(g, choice, no_zero);
    started = true;
    for (StateId s = 0; s < n; ++s) {
      if (dist[s] != SIZE_MAX && !(v[s] > T(0))) {
        started = false;
        break;
      }
    }
  }
  if (!started) {
    choice = proper_start();
    v = evaluate_chain<T>(g, choice, no_zero);
  }
  while (true) {
    bool changed = false;
    for (StateId s = 0; s < n; ++s) {
      if (g.owner(s) != Owner::Max || g.is_target(s)) continue;
      EdgeId cur = *choice[s];
      T best = v[g.edge(cur).dst];
      for (EdgeId e : g.outgoing(s)) {
        if (strictly_greater(v[g.edge(e).dst], best)) {
          best = v[g.edge(e).dst];
          cur = e;
        }
      }
      if (cur != *choice[s]) {
        choice[s] = cur;
        changed = true;
      }
    }
    if (!changed) break;
    v = evaluate_chain<T>(g, choice, no_zero);
  }
  return {std::move(v), std::move(choice)};
}

/// States where Min can surely avoid the targets: complement of the
/// attractor in which Max and Random need one edge and Min all edges.
/// States pinned in `fixed` only use their fixed edge.
std::vector<char> min_safe_region(const FiniteSsg& g, const Choice& fixed) {
  const std::size_t n = g.num_states();
  std::vector<char> attr(n, 0);
  std::vector<std::size_t> remaining(n, 0);
  std::vector<std::vector<StateId>> rev(n);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Edge& edge = g.edge(e);
    if (fixed[edge.src] && *fixed[edge.src] != e) continue;
    rev[edge.dst].push_back(edge.src);
  }
  std::deque<StateId> queue;
  for (StateId s = 0; s < n; ++s) {
    remaining[s] = g.outgoing(s).size();
    if (g.is_target(s)) {
      attr[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : rev[s]) {
      if (attr[p]) continue;
      if (g.owner(p) == Owner::Min && !fixed[p]) {
        if (--remaining[p] > 0) continue;
      }
      attr[p] = 1;
      queue.push_back(p);
    }
  }
  std::vector<char> safe(n);
  for (StateId s = 0; s < n; ++s) safe[s] = !attr[s];
  return safe;
}

/// Fills Min's choices into `c`: an edge staying safe where possible,
/// otherwise the first edge.
void initial_min_choice(const FiniteSsg& g, const std::vector<char>& safe, Choice& c) {
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.owner(s) != Owner::Min || g.outgoing(s).empty()) continue;
    c[s] = g.outgoing(s).front();
    if (safe[s]) {
      for (EdgeId e : g.outgoing(s)) {
        if (safe[g.edge(e).dst]) {
          c[s] = e;
          break;
        }
      }
    }
  }
}

/// One round of Min improvement: strict decrease only, lowest index among
/// the minimal edges. Safe-region states never move.
template <class T>
bool improve_min(const FiniteSsg& g, const std::vector<T>& v, const std::vector<char>& safe, Choice& choice) {
  bool changed = false;
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.owner(s) != Owner::Min || g.is_target(s) || safe[s]) continue;
    EdgeId cur = *choice[s];
    T best = v[g.edge(cur).dst];
    for (EdgeId e : g.outgoing(s)) {
      if (strictly_greater(best, v[g.edge(e).dst])) {
        best = v[g.edge(e).dst];
        cur = e;
      }
    }
    if (cur != *choice[s]) {
      choice[s] = cur;
      changed = true;
    }
  }
  return changed;
}

/// Min policy iteration with Max's choices pinned by `fixed`.
template <class T>
std::pair<std::vector<T>, Choice> min_policy_iteration(const FiniteSsg& g, const Choice& fixed) {
  std::vector<char> safe = min_safe_region(g, fixed);
  Choice choice = fixed;
  initial_min_choice(g, safe, choice);
  std::vector<T> v = evaluate_chain<T>(g, choice, safe);
  while (improve_min(g, v, safe, choice)) v = evaluate_chain<T>(g, choice, safe);
  return {std::move(v), std::move(choice)};
}

/// Strategy improvement for Min around exact inner Max policy iteration.
template <class T>
std::tuple<std::vector<T>, Choice, Choice> ssg_policy_iteration(const FiniteSsg& g) {
  const Choice none(g.num_states());
  std::vector<char> safe = min_safe_region(g, none);
  Choice min_choice = none;
  initial_min_choice(g, safe, min_choice);
  std::optional<Choice> warm;
  while (true) {
    std::pair<std::vector<T>, Choice> inner;
    if constexpr (std::is_same_v<T, Rational>) {
      auto approx = max_policy_iteration<long double>(g, min_choice, warm ? &*warm : nullptr);
      inner = max_policy_iteration<Rational>(g, min_choice, &approx.second);
    } else {
      inner = max_policy_iteration<T>(g, min_choice, warm ? &*warm : nullptr);
    }
    warm = inner.second;
    if (!improve_min(g, inner.first, safe, min_choice)) {
      return {std::move(inner.first), std::move(inner.second), std::move(min_choice)};
    }
  }
}

MemorylessStrategy restrict_to(const FiniteSsg& g, const Choice& c, Owner owner) {
  MemorylessStrategy out{owner, Choice(g.num_states())};
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.owner(s) == owner) out.choice[s] = c[s];
  }
  return out;
}

void require_no(const FiniteSsg& g, Owner owner, const char* what) {
  if (g.has_owner(owner)) throw InvalidArgument(what);
}

void require_edges(const FiniteSsg& g) {
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.outgoing(s).empty()) throw InvalidArgument("state '" + g.states()[s].name + "' has no outgoing edge");
  }
}

/// Choices of `owner` taken from `st`, validated.
void pin(const FiniteSsg& g, const MemorylessStrategy* st, Owner owner, Choice& c) {
  if (!st) return;
  for (StateId s = 0; s < g.num_states(); ++s) {
    if (g.owner(s) != owner) continue;
    if (!st->at(s) || *st->at(s) >= g.num_edges() || g.edge(*st->at(s)).src != s) {
      throw InvalidArgument("strategy undefined at state '" + g.states()[s].name + "'");
    }
    c[s] = st->at(s);
  }
}

template <class T>
std::vector<T> response(const FiniteSsg& g, const MemorylessStrategy* max_fixed, const MemorylessStrategy* min_fixed) {
  require_edges(g);
  Choice c(g.num_states());
  pin(g, max_fixed, Owner::Max, c);
  pin(g, min_fixed, Owner::Min, c);
  const bool max_free = !max_fixed && g.has_owner(Owner::Max);
  const bool min_free = !min_fixed && g.has_owner(Owner::Min);
  if (max_free && min_free) return std::get<0>(ssg_policy_iteration<T>(g));
  if (max_free) {
    if constexpr (std::is_same_v<T, Rational>) {
      auto approx = max_policy_iteration<long double>(g, c, nullptr);
      return max_policy_iteration<Rational>(g, c, &approx.second).first;
    } else {
      return max_policy_iteration<T>(g, c, nullptr).first;
    }
  }
  if (min_free) return min_policy_iteration<T>(g, c).first;
  return evaluate_chain<T>(g, c, std::vector<char>(g.num_states(), 0));
}

}  // namespace

ReachResult max_reach_values(const FiniteSsg& game) {
  require_no(game, Owner::Min, "max_reach_values: game has Min states");
  require_edges(game);
  const Choice none(game.num_states());
  auto [approx_v, approx_c] = max_policy_iteration<long double>(game, none, nullptr);
  auto [v, c] = max_policy_iteration<Rational>(game, none, &approx_c);
  return {std::move(v), restrict_to(game, c, Owner::Max)};
}

ApproxReachResult max_reach_values_approx(const FiniteSsg& game) {
  require_no(game, Owner::Min, "max_reach_values: game has Min states");
  require_edges(game);
  const Choice none(game.num_states());
  auto [v, c] = max_policy_iteration<long double>(game, none, nullptr);
  return {std::move(v), restrict_to(game, c, Owner::Max)};
}

ReachResult min_reach_values(const FiniteSsg& game) {
  require_no(game, Owner::Max, "min_reach_values: game has Max states");
  require_edges(game);
  auto [v, c] = min_policy_iteration<Rational>(game, Choice(game.num_states()));
  return {std::move(v), restrict_to(game, c, Owner::Min)};
}

GameResult ssg_reach_values(const FiniteSsg& game) {
  require_edges(game);
  if (!game.has_owner(Owner::Min)) {
    ReachResult r = max_reach_values(game);
    return {std::move(r.values), std::move(r.strategy), MemorylessStrategy{Owner::Min, Choice(game.num_states())}};
  }
  if (!game.has_owner(Owner::Max)) {
    ReachResult r = min_reach_values(game);
    return {std::move(r.values), MemorylessStrategy{Owner::Max, Choice(game.num_states())}, std::move(r.strategy)};
  }
  auto [v, cmax, cmin] = ssg_policy_iteration<Rational>(game);
  return {std::move(v), restrict_to(game, cmax, Owner::Max), restrict_to(game, cmin, Owner::Min)};
}

ApproxGameResult ssg_reach_values_approx(const FiniteSsg& game) {
  require_edges(game);
  const Choice none(game.num_states());
  if (!game.has_owner(Owner::Min)) {
    auto [v, c] = max_policy_iteration<long double>(game, none, nullptr);
    return {std::move(v), restrict_to(game, c, Owner::Max), restrict_to(game, none, Owner::Min)};
  }
  if (!game.has_owner(Owner::Max)) {
    auto [v, c] = min_policy_iteration<long double>(game, none);
    return {std::move(v), restrict_to(game, none, Owner::Max), restrict_to(game, c, Owner::Min)};
  }
  auto [v, cmax, cmin] = ssg_policy_iteration<long double>(game);
  return {std::move(v), restrict_to(game, cmax, Owner::Max), restrict_to(game, cmin, Owner::Min)};
}

std::vector<Rational> response_values(const FiniteSsg& game, const MemorylessStrategy* max_fixed,
                                      const MemorylessStrategy* min_fixed) {
  return response<Rational>(game, max_fixed, min_fixed);
}

std::vector<long double> response_values_approx(const FiniteSsg& game, const MemorylessStrategy* max_fixed,
                                                const MemorylessStrategy* min_fixed) {
  return response<long double>(game, max_fixed, min_fixed);
}

std::vector<Rational> evaluate_reach(const FiniteSsg& game, const MemorylessStrategy* max_strategy,
                                     const MemorylessStrategy* min_strategy) {
  Choice c(game.num_states());
  pin(game, max_strategy, Owner::Max, c);
  pin(game, min_strategy, Owner::Min, c);
  for (StateId s = 0; s < game.num_states(); ++s) {
    if (game.owner(s) != Owner::Random && !c[s]) {
      throw InvalidArgument("strategy undefined at state '" + game.states()[s].name + "'");
    }
  }
  return evaluate_chain<Rational>(game, c, std::vector<char>(game.num_states(), 0));
}

namespace {

/// Largest subset of `candidate` (plus targets) from which Max reaches the
/// targets almost surely.
std::vector<char> almost_sure_region(const FiniteSsg& g, const std::vector<char>& is_target) {
  const std::size_t n = g.num_states();
  std::vector<char> w(n, 1);
  while (true) {
    // backward reachability to targets inside w
    std::vector<std::vector<StateId>> rev(n);
    for (const Edge& e : g.edges()) {
      if (w[e.src] && w[e.dst] && !is_target[e.src]) rev[e.dst].push_back(e.src);
    }
    std::vector<char> r(n, 0);
    std::deque<StateId> queue;
    for (StateId s = 0; s < n; ++s) {
      if (is_target[s]) {
        r[s] = 1;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      StateId s = queue.front();
      queue.pop_front();
      for (StateId p : rev[s]) {
        if (!r[p]) {
          r[p] = 1;
          queue.push_back(p);
        }
      }
    }
    // drop states that cannot stay inside r
    bool pruned = true;
    while (pruned) {
      pruned = false;
      for (StateId s = 0; s < n; ++s) {
        if (!r[s] || is_target[s]) continue;
        bool keep;
        if (g.owner(s) == Owner::Random) {
          keep = std::all_of(g.outgoing(s).begin(), g.outgoing(s).end(),
                             [&](EdgeId e) { return r[g.edge(e).dst] != 0; });
        } else {
          keep = std::any_of(g.outgoing(s).begin(), g.outgoing(s).end(),
                             [&](EdgeId e) { return r[g.edge(e).dst] != 0; });
        }
        if (!keep) {
          r[s] = 0;
          pruned = true;
        }
      }
    }
    if (r == w) return w;
    w = std::move(r);
  }
}

std::vector<char> mask_of(std::size_t n, const std::vector<StateId>& ids) {
  std::vector<char> m(n, 0);
  for (StateId s : ids) {
    if (s >= n) throw InvalidArgument("state id out of range");
    m[s] = 1;
  }
  return m;
}

}  // namespace

std::vector<StateId> almost_sure_reach(const FiniteSsg& game, const std::vector<StateId>& targets) {
  require_no(game, Owner::Min, "almost_sure_reach: game has Min states");
  std::vector<char> w = almost_sure_region(game, mask_of(game.num_states(), targets));
  std::vector<StateId> out;
  for (StateId s = 0; s < game.num_states(); ++s) {
    if (w[s]) out.push_back(s);
  }
  return out;
}

MemorylessStrategy almost_sure_strategy(const FiniteSsg& game, const std::vector<StateId>& targets) {
  require_no(game, Owner::Min, "almost_sure_strategy: game has Min states");
  const std::size_t n = game.num_states();
  std::vector<char> is_target = mask_of(n, targets);
  std::vector<char> w = almost_sure_region(game, is_target);
  // layered distances inside w
  std::vector<std::size_t> dist(n, SIZE_MAX);
  for (StateId s = 0; s < n; ++s) {
    if (is_target[s]) dist[s] = 0;
  }
  MemorylessStrategy out{Owner::Max, Choice(n)};
  bool progress = true;
  for (std::size_t layer = 1; progress; ++layer) {
    progress = false;
    std::vector<StateId> newly;
    for (StateId s = 0; s < n; ++s) {
      if (!w[s] || dist[s] != SIZE_MAX) continue;
      for (EdgeId e : game.outgoing(s)) {
        StateId d = game.edge(e).dst;
        if (w[d] && dist[d] < layer) {
          newly.push_back(s);
          if (game.owner(s) == Owner::Max) out.choice[s] = e;
          break;
        }
      }
    }
    for (StateId s : newly) dist[s] = layer;
    progress = !newly.empty();
  }
  for (StateId s = 0; s < n; ++s) {
    if (!is_target[s] || game.owner(s) != Owner::Max || game.outgoing(s).empty()) continue;
    out.choice[s] = game.outgoing(s).front();
    for (EdgeId e : game.outgoing(s)) {
      if (w[game.edge(e).dst]) {
        out.choice[s] = e;
        break;
      }
    }
  }
  return out;
}

std::vector<std::vector<StateId>> strongly_connected_components(
    std::size_t n, const std::vector<std::pair<StateId, StateId>>& arcs) {
  std::vector<std::vector<StateId>> adj(n);
  for (auto [a, b] : arcs) adj[a].push_back(b);
  std::vector<std::size_t> index(n, SIZE_MAX), low(n, 0);
  std::vector<char> on_stack(n, 0);
  std::vector<StateId> stack;
  std::vector<std::vector<StateId>> comps;
  std::size_t counter = 0;
  struct Frame {
    StateId v;
    std::size_t next;
  };
  for (StateId root = 0; root < n; ++root) {
    if (index[root] != SIZE_MAX) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < adj[f.v].size()) {
        StateId w = adj[f.v][f.next++];
        if (index[w] == SIZE_MAX) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      StateId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::vector<StateId> comp;
        while (true) {
          StateId w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
          if (w == v) break;
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

std::vector<std::vector<StateId>> decompose_end_components(const FiniteSsg& game) {
  require_no(game, Owner::Min, "decompose_end_components: game has Min states");
  const std::size_t n = game.num_states();
  std::vector<char> edge_alive(game.num_edges(), 1);
  std::vector<char> state_alive(n, 1);
  std::vector<std::size_t> comp_of(n);
  while (true) {
    std::vector<std::pair<StateId, StateId>> arcs;
    for (EdgeId e = 0; e < game.num_edges(); ++e) {
      if (edge_alive[e]) arcs.emplace_back(game.edge(e).src, game.edge(e).dst);
    }
    auto comps = strongly_connected_components(n, arcs);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      for (StateId s : comps[c]) comp_of[s] = c;
    }
    bool changed = false;
    for (EdgeId e = 0; e < game.num_edges(); ++e) {
      if (edge_alive[e] && comp_of[game.edge(e).src] != comp_of[game.edge(e).dst]) {
        edge_alive[e] = 0;
        changed = true;
      }
    }
    for (StateId s = 0; s < n; ++s) {
      if (!state_alive[s]) continue;
      bool dead;
      if (game.owner(s) == Owner::Random) {
        // a Random state survives only if all its edges do
        dead = std::any_of(game.outgoing(s).begin(), game.outgoing(s).end(),
                           [&](EdgeId e) { return !edge_alive[e]; });
      } else {
        dead = std::none_of(game.outgoing(s).begin(), game.outgoing(s).end(),
                            [&](EdgeId e) { return edge_alive[e] != 0; });
      }
      if (dead) {
        state_alive[s] = 0;
        changed = true;
        for (EdgeId e : game.outgoing(s)) edge_alive[e] = 0;
        for (EdgeId e = 0; e < game.num_edges(); ++e) {
          if (game.edge(e).dst == s) edge_alive[e] = 0;
        }
      }
    }
    if (!changed) {
      std::vector<std::vector<StateId>> out;
      for (auto& comp : comps) {
        if (state_alive[comp.front()]) out.push_back(std::move(comp));
      }
      return out;
    }
  }
}

FiniteSsg induced_chain(const FiniteSsg& game, const MemorylessStrategy* max_strategy,
                        const MemorylessStrategy* min_strategy) {
  std::vector<State> states = game.states();
  std::vector<Edge> edges;
  for (StateId s = 0; s < game.num_states(); ++s) {
    if (game.owner(s) == Owner::Random) {
      for (EdgeId e : game.outgoing(s)) edges.push_back(game.edge(e));
      continue;
    }
    const MemorylessStrategy* st = game.owner(s) == Owner::Max ? max_strategy : min_strategy;
    if (!st || !st->at(s) || game.edge(*st->at(s)).src != s) {
      throw InvalidArgument("strategy undefined at state '" + game.states()[s].name + "'");
    }
    Edge e = game.edge(*st->at(s));
    e.prob = Rational(1);
    edges.push_back(e);
    states[s].owner = Owner::Random;
  }
  return FiniteSsg(std::move(states), std::move(edges), game.targets());
}

namespace {

/// BSCC analysis on an explicit sub-chain; `members` sorted.
BsccInfo analyze_bscc(const FiniteSsg& chain, std::vector<StateId> members) {
  std::map<StateId, std::size_t> local;
  for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = i;
  std::vector<std::map<std::size_t, Rational>> rows(members.size());
  BsccInfo info;
  std::vector<std::optional<std::int64_t>> potential(members.size());
  potential[0] = 0;
  // potentials by BFS over edges inside the component
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    for (EdgeId e : chain.outgoing(members[i])) {
      const Edge& edge = chain.edge(e);
      std::size_t j = local.at(edge.dst);
      if (!potential[j]) {
        potential[j] = *potential[i] + edge.reward;
        queue.push_back(j);
      }
    }
  }
  info.potential_consistent = true;
  Rational mean(0);
  std::vector<Rational> drift(members.size(), Rational(0));
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (EdgeId e : chain.outgoing(members[i])) {
      const Edge& edge = chain.edge(e);
      std::size_t j = local.at(edge.dst);
      Rational p = edge.prob ? *edge.prob : Rational(1);
      if (edge.reward < 0) info.has_decrease = true;
      if (*potential[j] != *potential[i] + edge.reward) info.potential_consistent = false;
      drift[i] += p * Rational(edge.reward);
      if (j != i) rows[i][j] += p;
    }
  }
  info.stationary = detail::stationary_distribution<Rational>(std::move(rows));
  for (std::size_t i = 0; i < members.size(); ++i) mean += info.stationary[i] * drift[i];
  info.mean = mean;
  info.states = std::move(members);
  return info;
}

}  // namespace

std::vector<BsccInfo> chain_mean_and_decrease(const FiniteSsg& chain) {
  for (StateId s = 0; s < chain.num_states(); ++s) {
    if (chain.owner(s) != Owner::Random) {
      throw InvalidArgument("chain_mean_and_decrease: state '" + chain.states()[s].name + "' is controlled");
    }
  }
  require_edges(chain);
  std::vector<std::pair<StateId, StateId>> arcs;
  for (const Edge& e : chain.edges()) arcs.emplace_back(e.src, e.dst);
  auto comps = strongly_connected_components(chain.num_states(), arcs);
  std::vector<std::size_t> comp_of(chain.num_states());
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (StateId s : comps[c]) comp_of[s] = c;
  }
  std::vector<char> bottom(comps.size(), 1);
  for (const Edge& e : chain.edges()) {
    if (comp_of[e.src] != comp_of[e.dst]) bottom[comp_of[e.src]] = 0;
  }
  std::vector<BsccInfo> out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (bottom[c]) out.push_back(analyze_bscc(chain, comps[c]));
  }
  return out;
}

EcMeanPayoff ec_min_mean_payoff(const FiniteSsg& game, const std::vector<StateId>& ec, std::uint64_t cap) {
  require_no(game, Owner::Min, "ec_min_mean_payoff: game has Min states");
  const std::size_t n = game.num_states();
  std::vector<char> in_ec = mask_of(n, ec);
  std::vector<StateId> max_states;
  std::vector<std::vector<EdgeId>> options;
  for (StateId s : ec) {
    if (game.owner(s) == Owner::Random) {
      for (EdgeId e : game.outgoing(s)) {
        if (!in_ec[game.edge(e).dst]) throw InvalidArgument("ec_min_mean_payoff: set is not an end component");
      }
      continue;
    }
    std::vector<EdgeId> inside;
    for (EdgeId e : game.outgoing(s)) {
      if (in_ec[game.edge(e).dst]) inside.push_back(e);
    }
    if (inside.empty()) throw InvalidArgument("ec_min_mean_payoff: set is not an end component");
    max_states.push_back(s);
    options.push_back(std::move(inside));
  }
  std::uint64_t total = 1;
  for (const auto& o : options) {
    if (total > cap / o.size()) throw CapExceeded("enumeration cap exceeded");
    total *= o.size();
  }
  // sub-game restricted to the component
  std::vector<std::size_t> local(n, SIZE_MAX);
  std::vector<State> states;
  for (StateId s : ec) {
    local[s] = states.size();
    states.push_back(game.states()[s]);
    states.back().owner = Owner::Random;
  }
  std::optional<Rational> best;
  std::vector<StateId> best_bscc;
  Choice best_choice;
  std::vector<std::size_t> digit(options.size(), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    Choice c(n);
    for (std::size_t i = 0; i < max_states.size(); ++i) c[max_states[i]] = options[i][digit[i]];
    std::vector<Edge> edges;
    for (StateId s : ec) {
      auto add = [&](EdgeId e) {
        Edge edge = game.edge(e);
        edge.src = local[edge.src];
        edge.dst = local[edge.dst];
        if (!edge.prob) edge.prob = Rational(1);
        edges.push_back(edge);
      };
      if (game.owner(s) == Owner::Random) {
        for (EdgeId e : game.outgoing(s)) add(e);
      } else {
        add(*c[s]);
      }
    }
    FiniteSsg sub(states, std::move(edges), {});
    for (const BsccInfo& b : chain_mean_and_decrease(sub)) {
      if (!best || b.mean < *best) {
        best = b.mean;
        best_bscc.clear();
        for (StateId l : b.states) best_bscc.push_back(ec[l]);
        best_choice = c;
      }
    }
    for (std::size_t i = 0; i < digit.size(); ++i) {
      if (++digit[i] < options[i].size()) break;
      digit[i] = 0;
    }
  }
  // keep the optimal choices on the best BSCC, steer everything else into it
  MemorylessStrategy out{Owner::Max, Choice(n)};
  std::vector<char> in_best = mask_of(n, best_bscc);
  for (StateId s : best_bscc) {
    if (game.owner(s) == Owner::Max) out.choice[s] = best_choice[s];
  }
  std::vector<State> sub_states = game.states();
  std::vector<Edge> sub_edges;
  for (StateId s = 0; s < n; ++s) {
    for (EdgeId e : game.outgoing(s)) {
      if (in_ec[s] && in_ec[game.edge(e).dst]) sub_edges.push_back(game.edge(e));
    }
  }
  FiniteSsg confined(sub_states, std::move(sub_edges), {});
  MemorylessStrategy steer = almost_sure_strategy(confined, best_bscc);
  for (StateId s : ec) {
    if (game.owner(s) != Owner::Max || in_best[s]) continue;
    const Edge& chosen = confined.edge(*steer.choice[s]);
    for (EdgeId e : game.outgoing(s)) {
      if (game.edge(e).dst == chosen.dst && game.edge(e).reward == chosen.reward) {
        out.choice[s] = e;
        break;
      }
    }
  }
  return {*best, std::move(out)};
}

}  // namespace octerm
