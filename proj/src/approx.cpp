#include "octerm/approx.hpp"

#include <algorithm>
#include <chrono>

namespace octerm {

OcSsg fix_min_strategy(const OcSsg& game, const CounterlessStrategy& pi) {
  if (pi.owner != Owner::Min) throw InvalidArgument("fix_min_strategy: strategy is not Min's");
  require_total(game, pi);
  std::vector<State> states = game.states();
  std::vector<Rule> rules;
  for (RuleId r = 0; r < game.num_rules(); ++r) {
    const Rule& rule = game.rule(r);
    if (game.owner(rule.src) != Owner::Min) {
      rules.push_back(rule);
    } else if (*pi.at(rule.src) == r) {
      rules.push_back({rule.src, rule.delta, rule.dst, Rational(1)});
    }
  }
  for (auto& s : states) {
    if (s.owner == Owner::Min) s.owner = Owner::Random;
  }
  return OcSsg(std::move(states), std::move(rules));
}

TailBound termination_tail_bound(const OcSsg& game, const CounterlessStrategy* pi_star, const Rational& epsilon,
                                 const PipelineOptions& options) {
  if (epsilon.sign() <= 0 || epsilon >= Rational(1)) throw InvalidArgument("epsilon must lie in (0,1)");
  OcSsg fixed = pi_star ? fix_min_strategy(game, *pi_star) : game;
  if (fixed.has_owner(Owner::Min)) throw InvalidArgument("termination_tail_bound: Min strategy required");
  std::vector<StateId> t = value_one_states(fixed, options.enum_cap);
  TailBound out;
  if (t.size() == fixed.num_states()) return out;
  CollapsedModel collapsed = collapse_value_one(fixed, t);
  // Any solution with positive drift certifies the tail bound, so the
  // collapsed model is tried first; the rising construction is only needed
  // when some counterless strategy idles.
  try {
    LpSolution sol = tighten_drift_solution(collapsed.model, solve_drift_lp(collapsed.model, options.lp_method));
    out.decay = decay_certificate(collapsed.model, epsilon);
    out.lp_states = collapsed.model.num_states();
    Certificate cert = tail_certificate(sol.x_bar, sol.z_bar);
    out.N = counter_bound_N(cert, epsilon);
    cert.N = out.N;
    out.certificate = std::move(cert);
    return out;
  } catch (const NotRising&) {
  }
  RisingOptions ro;
  ro.prune = options.prune;
  ro.check_precondition = false;  // the collapsed model has no value-one states
  ro.enum_cap = options.enum_cap;
  out.decay = decay_certificate(collapsed.model, epsilon);
  RisingModel rising = rising_construction(collapsed.model, ro);
  out.used_rising = true;
  out.lp_states = rising.model.num_states();
  LpSolution sol = tighten_drift_solution(rising.model, solve_drift_lp(rising.model, options.lp_method));
  Certificate cert = tail_certificate(sol.x_bar, sol.z_bar);
  out.N = counter_bound_N(cert, epsilon);
  cert.N = out.N;
  out.certificate = std::move(cert);
  return out;
}

std::optional<Rational> TailBound::excess_bound(std::int64_t i) const {
  std::optional<Rational> best;
  if (certificate && i >= certificate->h) best = tail_bound_value(*certificate, i);
  if (decay) {
    Rational d = decay_bound_value(*decay, i);
    if (!best || d < *best) best = std::move(d);
  }
  return best;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Strategy on the K-row segment game that plays `table` on rows 1..K-1.
MemorylessStrategy table_on_segment(const OcSsg& game, const FiniteSsg& seg, const ModeSwitchStrategy& st,
                                    std::int64_t K) {
  const std::size_t nq = game.num_states();
  MemorylessStrategy out{st.owner, std::vector<std::optional<EdgeId>>(seg.num_states())};
  for (std::size_t i = 1; i < static_cast<std::size_t>(K); ++i) {
    for (StateId q = 0; q < nq; ++q) {
      if (game.owner(q) != st.owner) continue;
      const RuleId r = *st.below[i - 1][q];
      const auto& rules = game.outgoing(q);
      const std::size_t k = static_cast<std::size_t>(std::find(rules.begin(), rules.end(), r) - rules.begin());
      out.choice[i * nq + q] = seg.outgoing(i * nq + q)[k];
    }
  }
  return out;
}

ModeSwitchStrategy truncated(const ModeSwitchStrategy& full, std::int64_t K) {
  ModeSwitchStrategy out = full;
  out.switch_level = K;
  out.below.resize(static_cast<std::size_t>(std::max<std::int64_t>(K - 1, 0)));
  return out;
}

ModeSwitchStrategy lifted(const CounterlessStrategy& st, std::int64_t N) {
  return ModeSwitchStrategy{st.owner, N, 0, {}, st};
}

/// Simplest rational within 2^-50 of an extended-precision result.
Rational snap(long double x) {
  const Rational v = Rational::from_long_double(x);
  const Rational tol(mpq_class(1, mpz_class(1) << 50));
  return simplest_between(v - tol, v + tol);
}

struct SegmentSolution {
  std::vector<Rational> values;
  MemorylessStrategy max_strategy;
  MemorylessStrategy min_strategy;
};

SegmentSolution solve_segment(const FiniteSsg& seg, const std::vector<Rational>& nu, std::size_t nq, bool exact) {
  if (exact) {
    GameResult r = ssg_reach_values(seg);
    return {std::move(r.values), std::move(r.max_strategy), std::move(r.min_strategy)};
  }
  ApproxGameResult r = ssg_reach_values_approx(seg);
  SegmentSolution out{{}, std::move(r.max_strategy), std::move(r.min_strategy)};
  out.values.reserve(r.values.size());
  for (std::size_t s = 0; s < r.values.size(); ++s) {
    Rational v = snap(r.values[s]);
    const Rational lo = s + 2 < seg.num_states() ? nu[s % nq] : Rational(0);
    out.values.push_back(std::clamp(v, lo, Rational(1)));
  }
  return out;
}

/// Value at `start` in the K-row segment game with the given boundary when
/// one player's table is fixed and the other responds optimally.
Rational guarantee(const OcSsg& game, const std::vector<Rational>& boundary, const ModeSwitchStrategy& st,
                   const Config& start, std::int64_t K, bool exact) {
  FiniteSsg seg = build_segment_game(game, boundary, K);
  MemorylessStrategy fixed = table_on_segment(game, seg, st, K);
  const MemorylessStrategy* max_fixed = st.owner == Owner::Max ? &fixed : nullptr;
  const MemorylessStrategy* min_fixed = st.owner == Owner::Min ? &fixed : nullptr;
  const std::size_t id = static_cast<std::size_t>(start.counter) * game.num_states() + start.state;
  if (exact) return response_values(seg, max_fixed, min_fixed)[id];
  return snap(response_values_approx(seg, max_fixed, min_fixed)[id]);
}

/// Smallest level in 1, 2, 4, ... below N at which switching to the
/// counterless strategy keeps the guarantee within `slack` of `value`;
/// N itself otherwise.
std::int64_t early_switch_level(const OcSsg& game, const ModeSwitchStrategy& full, const std::vector<Rational>& nu,
                                const TailBound& tb, const Config& start, const Rational& value,
                                const Rational& slack, bool exact) {
  const std::int64_t N = full.N;
  for (std::int64_t K = 1; K < N; K *= 2) {
    if (full.owner == Owner::Max) {
      Rational g = start.counter >= K ? nu[start.state] : guarantee(game, nu, full, start, K, exact);
      if (g >= value - slack) return K;
    } else {
      const std::optional<Rational> tail = tb.excess_bound(K);
      if (!tail) continue;
      std::vector<Rational> upper(nu.size());
      for (std::size_t q = 0; q < nu.size(); ++q) upper[q] = std::min(Rational(1), nu[q] + *tail);
      Rational g = start.counter >= K ? upper[start.state] : guarantee(game, upper, full, start, K, exact);
      if (g <= value + slack) return K;
    }
  }
  return N;
}

}  // namespace

ApproxReport approximate_termination(const OcSsg& game, const Config& start, const Rational& epsilon,
                                     const ApproxOptions& options) {
  if (epsilon.sign() <= 0 || epsilon >= Rational(1)) throw InvalidArgument("epsilon must lie in (0,1)");
  if (start.state >= game.num_states()) throw InvalidArgument("start state out of range");
  if (start.counter < 0) throw InvalidArgument("start counter must be non-negative");
  if (options.table_rows < 0) throw InvalidArgument("table_rows must be non-negative");

  ApproxReport rep;
  rep.epsilon = epsilon;
  rep.start = start;
  const std::size_t nq = game.num_states();

  auto t0 = Clock::now();
  const bool two_player = game.has_owner(Owner::Min);
  LiminfResult lim = two_player ? liminf_values_ssg(game, options.enum_cap) : liminf_values_mdp(game, options.enum_cap);
  rep.nu = lim.nu;
  rep.T = lim.T;
  rep.timings["qualitative"] = seconds_since(t0);

  // Half of epsilon goes to the truncation, the rest to the early switch;
  // a small share is kept back for extended-precision rounding.
  const Rational eps_n = epsilon / Rational(2);
  const Rational slack = epsilon - eps_n - epsilon / Rational(1024);

  t0 = Clock::now();
  TailBound tb = termination_tail_bound(game, lim.pi_star ? &*lim.pi_star : nullptr, eps_n, options);
  rep.timings["tail_bound"] = seconds_since(t0);
  std::int64_t N = tb.height();
  if (tb.decay && N < tb.N) {
    // keep row N - 1 within 2 epsilon of nu as well
    while (N < tb.N && decay_bound_value(*tb.decay, N - 1) > epsilon * Rational(2)) ++N;
  }
  rep.N = N;
  rep.azuma_N = tb.N;
  rep.certificate = tb.certificate;
  rep.decay = tb.decay;
  rep.used_rising = tb.used_rising;
  rep.lp_states = tb.lp_states;

  if (N == 0 || start.counter >= N) {
    rep.value = start.counter == 0 ? Rational(1) : rep.nu[start.state];
    rep.values[0] = std::vector<Rational>(nq, Rational(1));
    if (start.counter > 0) rep.values[start.counter] = rep.nu;
    rep.sigma_bar = lifted(lim.sigma_star, N);
    if (lim.pi_star) rep.pi_bar = lifted(*lim.pi_star, N);
    return rep;
  }

  t0 = Clock::now();
  FiniteSsg seg = build_segment_game(game, rep.nu, N);
  // Extended precision plus snapping stays far below epsilon/1024 unless
  // epsilon itself is tiny.
  rep.exact_segment = seg.num_states() <= options.exact_segment_limit || epsilon < Rational(mpq_class(1, mpz_class(1) << 30));
  SegmentSolution sol = solve_segment(seg, rep.nu, nq, rep.exact_segment);
  rep.timings["segment"] = seconds_since(t0);

  const std::int64_t last = std::min(N, std::max(start.counter, options.table_rows));
  auto row = [&](std::int64_t i) {
    std::vector<Rational> r(nq);
    for (StateId q = 0; q < nq; ++q) r[q] = sol.values[static_cast<std::size_t>(i) * nq + q];
    return r;
  };
  for (std::int64_t i = 0; i <= last; ++i) rep.values[i] = row(i);
  rep.values[N - 1] = row(N - 1);
  rep.values[N] = row(N);
  rep.value = sol.values[static_cast<std::size_t>(start.counter) * nq + start.state];

  t0 = Clock::now();
  ModeSwitchStrategy sigma = assemble_strategy(game, seg, sol.max_strategy, lim.sigma_star, N);
  rep.sigma_bar =
      truncated(sigma, early_switch_level(game, sigma, rep.nu, tb, start, rep.value, slack, rep.exact_segment));
  if (lim.pi_star) {
    ModeSwitchStrategy pi = assemble_strategy(game, seg, sol.min_strategy, *lim.pi_star, N);
    rep.pi_bar =
        truncated(pi, early_switch_level(game, pi, rep.nu, tb, start, rep.value, slack, rep.exact_segment));
  }
  rep.timings["strategies"] = seconds_since(t0);
  return rep;
}

}  // namespace octerm
