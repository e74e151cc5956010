#include "octerm/martingale.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

#include "octerm/finite_solver.hpp"
#include "sparse_elim.hpp"

namespace octerm {

LpSystem build_lp(const OcSsg& model) {
  if (model.has_owner(Owner::Min)) throw InvalidArgument("build_lp: model has Min states");
  LpSystem lp;
  lp.num_states = model.num_states();
  for (StateId q = 0; q < model.num_states(); ++q) {
    if (model.owner(q) == Owner::Max) {
      for (RuleId r : model.outgoing(q)) {
        const Rule& rule = model.rule(r);
        LpConstraint c;
        c.coeffs.emplace_back(0, Rational(1));
        if (rule.dst != q) {
          c.coeffs.emplace_back(1 + q, Rational(1));
          c.coeffs.emplace_back(1 + rule.dst, Rational(-1));
        }
        c.rhs = Rational(rule.delta);
        c.label = "rule " + describe_rule(model, r);
        lp.constraints.push_back(std::move(c));
      }
    } else {
      std::map<std::size_t, Rational> coeff;
      coeff[0] = Rational(1);
      coeff[1 + q] += Rational(1);
      Rational rhs(0);
      for (RuleId r : model.outgoing(q)) {
        const Rule& rule = model.rule(r);
        coeff[1 + rule.dst] -= *rule.prob;
        rhs += *rule.prob * Rational(rule.delta);
      }
      LpConstraint c;
      for (auto& [v, a] : coeff) {
        if (!a.is_zero()) c.coeffs.emplace_back(v, a);
      }
      c.rhs = rhs;
      c.label = "state " + model.name(q);
      lp.constraints.push_back(std::move(c));
    }
  }
  return lp;
}

LpSolution solve_lp_max_x(const LpSystem& lp) {
  // Substituting x = y - 1 (y >= 0) makes the origin feasible: x = -1,
  // z = 0 satisfies every constraint since all right-hand sides are >= -1.
  const std::size_t m = lp.constraints.size();
  const std::size_t nv = 1 + lp.num_states;
  const std::size_t cols = nv + m;
  std::vector<std::vector<Rational>> tab(m, std::vector<Rational>(cols + 1, Rational(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rational x_coeff(0);
    for (auto& [v, a] : lp.constraints[i].coeffs) {
      tab[i][v] += a;
      if (v == 0) x_coeff += a;
    }
    tab[i][cols] = lp.constraints[i].rhs + x_coeff;
    if (tab[i][cols].sign() < 0) throw InternalError("simplex: origin infeasible after shift");
    tab[i][nv + i] = Rational(1);
    basis[i] = nv + i;
  }
  std::vector<Rational> obj(cols + 1, Rational(0));  // reduced costs; obj[cols] = -value
  obj[0] = Rational(1);
  while (true) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (obj[j].sign() > 0) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = m;
    Rational best_ratio;
    for (std::size_t i = 0; i < m; ++i) {
      if (tab[i][enter].sign() <= 0) continue;
      Rational ratio = tab[i][cols] / tab[i][enter];
      if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == m) throw InternalError("simplex: unbounded drift LP");
    Rational piv = tab[leave][enter];
    for (auto& a : tab[leave]) {
      if (!a.is_zero()) a /= piv;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || tab[i][enter].is_zero()) continue;
      Rational f = tab[i][enter];
      for (std::size_t j = 0; j <= cols; ++j) {
        if (!tab[leave][j].is_zero()) tab[i][j] -= f * tab[leave][j];
      }
    }
    if (!obj[enter].is_zero()) {
      Rational f = obj[enter];
      for (std::size_t j = 0; j <= cols; ++j) {
        if (!tab[leave][j].is_zero()) obj[j] -= f * tab[leave][j];
      }
    }
    basis[leave] = enter;
  }
  std::vector<Rational> value(nv, Rational(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < nv) value[basis[i]] = tab[i][cols];
  }
  LpSolution sol;
  sol.x_bar = value[0] - Rational(1);
  sol.z_bar.assign(value.begin() + 1, value.end());
  if (sol.x_bar.sign() <= 0) throw NotRising("drift LP optimum is " + sol.x_bar.str() + " (not positive)");
  return sol;
}

namespace {

struct Succ {
  StateId dst;
  Rational p;
};

struct PolicyEval {
  std::vector<Rational> gain;
  std::vector<Rational> bias;
};

/// Gain and canonical bias (stationary-weighted bias is 0 on each
/// recurrent class) of the chain with immediate costs `cost`.
PolicyEval evaluate_policy(const std::vector<std::vector<Succ>>& succ, const std::vector<Rational>& cost) {
  const std::size_t n = succ.size();
  std::vector<std::pair<StateId, StateId>> arcs;
  for (StateId s = 0; s < n; ++s) {
    for (const Succ& e : succ[s]) arcs.emplace_back(s, e.dst);
  }
  auto comps = strongly_connected_components(n, arcs);
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (StateId s : comps[c]) comp_of[s] = c;
  }
  std::vector<char> bottom(comps.size(), 1);
  for (auto [a, b] : arcs) {
    if (comp_of[a] != comp_of[b]) bottom[comp_of[a]] = 0;
  }
  PolicyEval ev{std::vector<Rational>(n), std::vector<Rational>(n)};
  std::vector<char> recurrent(n, 0);
  std::vector<std::size_t> local(n, SIZE_MAX);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (!bottom[c]) continue;
    const auto& members = comps[c];
    for (std::size_t i = 0; i < members.size(); ++i) {
      local[members[i]] = i;
      recurrent[members[i]] = 1;
    }
    std::vector<std::map<std::size_t, Rational>> rows(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (const Succ& e : succ[members[i]]) {
        if (local[e.dst] != i) rows[i][local[e.dst]] += e.p;
      }
    }
    std::vector<Rational> pi = detail::stationary_distribution<Rational>(std::move(rows));
    Rational g(0);
    for (std::size_t i = 0; i < members.size(); ++i) g += pi[i] * cost[members[i]];
    // bias with the first member pinned to 0, then recentred
    std::vector<detail::AbsorptionRow<Rational>> brow(members.size() - 1);
    for (std::size_t i = 1; i < members.size(); ++i) {
      auto& row = brow[i - 1];
      row.rhs = cost[members[i]] - g;
      for (const Succ& e : succ[members[i]]) {
        std::size_t j = local[e.dst];
        if (j == i) continue;
        if (j == 0) {
          row.exit += e.p;
        } else {
          row.off[j - 1] += e.p;
        }
      }
    }
    std::vector<Rational> hb = detail::solve_absorption(std::move(brow));
    Rational shift(0);
    for (std::size_t i = 1; i < members.size(); ++i) shift += pi[i] * hb[i - 1];
    ev.gain[members[0]] = g;
    ev.bias[members[0]] = -shift;
    for (std::size_t i = 1; i < members.size(); ++i) {
      ev.gain[members[i]] = g;
      ev.bias[members[i]] = hb[i - 1] - shift;
    }
  }
  std::vector<StateId> transient;
  std::vector<std::size_t> tindex(n, SIZE_MAX);
  for (StateId s = 0; s < n; ++s) {
    if (!recurrent[s]) {
      tindex[s] = transient.size();
      transient.push_back(s);
    }
  }
  if (transient.empty()) return ev;
  auto solve_transient = [&](auto&& rhs_of) {
    std::vector<detail::AbsorptionRow<Rational>> rows(transient.size());
    for (std::size_t i = 0; i < transient.size(); ++i) {
      StateId s = transient[i];
      rows[i].rhs = rhs_of(s);
      for (const Succ& e : succ[s]) {
        if (e.dst == s) continue;
        if (recurrent[e.dst]) {
          rows[i].exit += e.p;
        } else {
          rows[i].off[tindex[e.dst]] += e.p;
        }
      }
    }
    return detail::solve_absorption(std::move(rows));
  };
  auto tg = solve_transient([&](StateId s) {
    Rational acc(0);
    for (const Succ& e : succ[s]) {
      if (recurrent[e.dst]) acc += e.p * ev.gain[e.dst];
    }
    return acc;
  });
  for (std::size_t i = 0; i < transient.size(); ++i) ev.gain[transient[i]] = tg[i];
  auto th = solve_transient([&](StateId s) {
    Rational acc = cost[s] - ev.gain[s];
    for (const Succ& e : succ[s]) {
      if (recurrent[e.dst]) acc += e.p * ev.bias[e.dst];
    }
    return acc;
  });
  for (std::size_t i = 0; i < transient.size(); ++i) ev.bias[transient[i]] = th[i];
  return ev;
}

LpSolution solve_by_strategy_iteration(const OcSsg& model) {
  const std::size_t n = model.num_states();
  std::vector<std::optional<RuleId>> choice(n);
  for (StateId q = 0; q < n; ++q) {
    if (model.owner(q) == Owner::Max) choice[q] = model.outgoing(q).front();
  }
  std::vector<Rational> random_cost(n, Rational(0));
  for (StateId q = 0; q < n; ++q) {
    if (model.owner(q) != Owner::Random) continue;
    for (RuleId r : model.outgoing(q)) random_cost[q] += *model.rule(r).prob * Rational(model.rule(r).delta);
  }
  PolicyEval ev;
  while (true) {
    std::vector<std::vector<Succ>> succ(n);
    std::vector<Rational> cost(n);
    for (StateId q = 0; q < n; ++q) {
      if (model.owner(q) == Owner::Max) {
        const Rule& r = model.rule(*choice[q]);
        succ[q].push_back({r.dst, Rational(1)});
        cost[q] = Rational(r.delta);
      } else {
        for (RuleId ri : model.outgoing(q)) succ[q].push_back({model.rule(ri).dst, *model.rule(ri).prob});
        cost[q] = random_cost[q];
      }
    }
    ev = evaluate_policy(succ, cost);
    bool changed = false;
    // gain improvement
    for (StateId q = 0; q < n; ++q) {
      if (model.owner(q) != Owner::Max) continue;
      Rational best = ev.gain[model.rule(*choice[q]).dst];
      RuleId pick = *choice[q];
      for (RuleId r : model.outgoing(q)) {
        if (ev.gain[model.rule(r).dst] < best) {
          best = ev.gain[model.rule(r).dst];
          pick = r;
        }
      }
      if (pick != *choice[q]) {
        choice[q] = pick;
        changed = true;
      }
    }
    if (changed) continue;
    // bias improvement among gain-optimal rules
    for (StateId q = 0; q < n; ++q) {
      if (model.owner(q) != Owner::Max) continue;
      const Rule& cur = model.rule(*choice[q]);
      Rational best = Rational(cur.delta) + ev.bias[cur.dst];
      RuleId pick = *choice[q];
      for (RuleId r : model.outgoing(q)) {
        const Rule& rule = model.rule(r);
        if (ev.gain[rule.dst] != ev.gain[cur.dst]) continue;
        Rational val = Rational(rule.delta) + ev.bias[rule.dst];
        if (val < best) {
          best = val;
          pick = r;
        }
      }
      if (pick != *choice[q]) {
        choice[q] = pick;
        changed = true;
      }
    }
    if (!changed) break;
  }
  Rational x = *std::min_element(ev.gain.begin(), ev.gain.end());
  if (x.sign() <= 0) throw NotRising("drift LP optimum is " + x.str() + " (not positive)");
  // z = h + M g, with M large enough for rules that raise the gain
  Rational big(0);
  for (const Rule& r : model.rules()) {
    if (model.owner(r.src) != Owner::Max) continue;
    Rational dg = ev.gain[r.dst] - ev.gain[r.src];
    if (dg.sign() > 0) {
      big = max(big, (x + ev.bias[r.src] - Rational(r.delta) - ev.bias[r.dst]) / dg);
    }
  }
  std::vector<Rational> z(n);
  for (StateId q = 0; q < n; ++q) z[q] = ev.bias[q] + big * ev.gain[q];
  Rational lowest = *std::min_element(z.begin(), z.end());
  for (auto& v : z) v -= lowest;
  return {x, std::move(z)};
}

template <class T>
T to_num(const Rational& r) {
  if constexpr (std::is_same_v<T, Rational>) {
    return r;
  } else {
    return r.to_long_double();
  }
}

template <class T>
bool strictly_less(const T& a, const T& b) {
  if constexpr (std::is_same_v<T, Rational>) {
    return a < b;
  } else {
    const T scale = std::max<T>({T(1), std::fabs(a), std::fabs(b)});
    return a < b - 64 * std::numeric_limits<T>::epsilon() * scale;
  }
}

/// Stopping policy: per state either stop (-1) or continue with the k-th
/// outgoing rule (Random states always use k = 0 for "continue").
using StopPolicy = std::vector<int>;

template <class T>
T step_cost(const OcSsg& model, StateId q, int k, const T& x, const std::vector<T>& v) {
  const auto& outs = model.outgoing(q);
  if (model.owner(q) == Owner::Max) {
    const Rule& r = model.rule(outs[static_cast<std::size_t>(k)]);
    return T(r.delta) - x + v[r.dst];
  }
  T acc = -x;
  for (RuleId ri : outs) {
    const Rule& r = model.rule(ri);
    acc += to_num<T>(*r.prob) * (T(r.delta) + v[r.dst]);
  }
  return acc;
}

template <class T>
std::vector<T> evaluate_stopping(const OcSsg& model, const StopPolicy& pol, const T& x) {
  const std::size_t n = model.num_states();
  std::vector<std::size_t> idx(n, SIZE_MAX);
  std::vector<StateId> cont;
  for (StateId q = 0; q < n; ++q) {
    if (pol[q] >= 0) {
      idx[q] = cont.size();
      cont.push_back(q);
    }
  }
  std::vector<detail::AbsorptionRow<T>> rows(cont.size());
  for (std::size_t i = 0; i < cont.size(); ++i) {
    const StateId q = cont[i];
    auto add = [&](StateId dst, const T& p) {
      if (dst == q) return;
      if (idx[dst] == SIZE_MAX) {
        rows[i].exit += p;
      } else {
        rows[i].off[idx[dst]] += p;
      }
    };
    const auto& outs = model.outgoing(q);
    if (model.owner(q) == Owner::Max) {
      const Rule& r = model.rule(outs[static_cast<std::size_t>(pol[q])]);
      rows[i].rhs = T(r.delta) - x;
      add(r.dst, T(1));
    } else {
      rows[i].rhs = -x;
      for (RuleId ri : outs) {
        const Rule& r = model.rule(ri);
        rows[i].rhs += to_num<T>(*r.prob) * T(r.delta);
        add(r.dst, to_num<T>(*r.prob));
      }
    }
    T d = rows[i].exit;
    for (auto& [j, p] : rows[i].off) d += p;
    if (!(d > T(0))) throw InternalError("stopping policy has an absorbing continuation");
  }
  std::vector<T> sol = detail::solve_absorption(std::move(rows));
  std::vector<T> v(n, T(0));
  for (std::size_t i = 0; i < cont.size(); ++i) v[cont[i]] = sol[i];
  return v;
}

/// Policy iteration for min over stopping times of the accumulated
/// (delta - x); strict improvements only.
template <class T>
std::vector<T> stopping_iteration(const OcSsg& model, StopPolicy& pol, const T& x) {
  const std::size_t n = model.num_states();
  while (true) {
    std::vector<T> v = evaluate_stopping(model, pol, x);
    bool changed = false;
    for (StateId q = 0; q < n; ++q) {
      T best = v[q];
      int pick = pol[q];
      auto consider = [&](int k, const T& val) {
        if (strictly_less(val, best)) {
          best = val;
          pick = k;
        }
      };
      consider(-1, T(0));
      const int options = model.owner(q) == Owner::Max ? static_cast<int>(model.outgoing(q).size()) : 1;
      for (int k = 0; k < options; ++k) consider(k, step_cost(model, q, k, x, v));
      if (pick != pol[q]) {
        pol[q] = pick;
        changed = true;
      }
    }
    if (!changed) return v;
  }
}

}  // namespace

std::vector<Rational> min_span_potential(const OcSsg& model, const Rational& x) {
  if (model.has_owner(Owner::Min)) throw InvalidArgument("min_span_potential: model has Min states");
  StopPolicy pol(model.num_states(), -1);
  stopping_iteration<long double>(model, pol, x.to_long_double());
  std::vector<Rational> v = stopping_iteration<Rational>(model, pol, x);
  const Rational lowest = *std::min_element(v.begin(), v.end());
  for (auto& z : v) z -= lowest;
  return v;
}

LpSolution tighten_drift_solution(const OcSsg& model, const LpSolution& sol) {
  auto rate = [](const Rational& x, const Rational& span) { return x * x / (span + x + Rational(1)); };
  auto span_of = [](const std::vector<Rational>& z) {
    auto [lo, hi] = std::minmax_element(z.begin(), z.end());
    return *hi - *lo;
  };
  LpSolution best = sol;
  Rational best_rate = rate(sol.x_bar, span_of(sol.z_bar));
  // Coarse search in extended precision, exact evaluation of the winner.
  constexpr int kSteps = 16;
  long double best_ld = best_rate.to_long_double();
  std::optional<Rational> pick;
  StopPolicy pol(model.num_states(), -1);
  for (int k = kSteps - 1; k >= 1; --k) {
    const Rational x = sol.x_bar * Rational(k, kSteps);
    const long double xl = x.to_long_double();
    std::vector<long double> v;
    try {
      v = stopping_iteration<long double>(model, pol, xl);
    } catch (const InternalError&) {
      pol.assign(model.num_states(), -1);
      continue;
    }
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const long double r = xl * xl / (*hi - *lo + xl + 1);
    if (r > best_ld) {
      best_ld = r;
      pick = x;
    }
  }
  if (!pick) return best;
  std::vector<Rational> z = min_span_potential(model, *pick);
  if (!check_submartingale(model, *pick, z).ok) throw InternalError("minimal-span potential violates the drift");
  if (rate(*pick, span_of(z)) > best_rate) best = {*pick, std::move(z)};
  return best;
}

LpSolution solve_drift_lp(const OcSsg& model, LpMethod method) {
  if (model.has_owner(Owner::Min)) throw InvalidArgument("solve_drift_lp: model has Min states");
  if (method == LpMethod::Auto) method = model.num_states() <= 40 ? LpMethod::Simplex : LpMethod::StrategyIteration;
  LpSolution sol = method == LpMethod::Simplex ? solve_lp_max_x(build_lp(model)) : solve_by_strategy_iteration(model);
  SubmartingaleCheck check = check_submartingale(model, sol.x_bar, sol.z_bar);
  if (!check.ok) throw InternalError("drift LP solution violates " + check.witness);
  return sol;
}

SubmartingaleCheck check_submartingale(const OcSsg& model, const Rational& x_bar,
                                       const std::vector<Rational>& z_bar) {
  if (z_bar.size() != model.num_states()) throw InvalidArgument("check_submartingale: z has wrong length");
  for (StateId q = 0; q < model.num_states(); ++q) {
    if (model.owner(q) == Owner::Max) {
      for (RuleId r : model.outgoing(q)) {
        const Rule& rule = model.rule(r);
        if (Rational(rule.delta) + z_bar[rule.dst] - x_bar < z_bar[q]) {
          return {false, q, r, "rule " + describe_rule(model, r)};
        }
      }
    } else if (model.owner(q) == Owner::Random) {
      Rational expected(0);
      for (RuleId r : model.outgoing(q)) {
        const Rule& rule = model.rule(r);
        expected += *rule.prob * (Rational(rule.delta) + z_bar[rule.dst]);
      }
      if (expected - x_bar < z_bar[q]) return {false, q, std::nullopt, "state " + model.name(q)};
    } else {
      throw InvalidArgument("check_submartingale: model has Min states");
    }
  }
  return {};
}

namespace {

/// RAII wrapper for an MPFR variable at certificate precision.
class Mp {
public:
  Mp() { mpfr_init2(v_, kCertificatePrecision); }
  ~Mp() { mpfr_clear(v_); }
  Mp(const Mp&) = delete;
  Mp& operator=(const Mp&) = delete;
  mpfr_ptr get() { return v_; }

  void set(const Rational& q, mpfr_rnd_t rnd) { mpfr_set_q(v_, q.raw().get_mpq_t(), rnd); }

  /// Exact value of the (finite) binary number.
  Rational exact() const {
    mpz_class mant;
    mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), v_);
    mpq_class q(mant);
    if (e >= 0) {
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(e));
    } else {
      mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return Rational(q);
  }

private:
  mpfr_t v_;
};

}  // namespace

Certificate tail_certificate(const Rational& x_bar, const std::vector<Rational>& z_bar) {
  if (x_bar.sign() <= 0) throw InvalidArgument("tail_certificate: x must be positive");
  if (z_bar.empty()) throw InvalidArgument("tail_certificate: empty z");
  Certificate cert;
  cert.x_bar = x_bar;
  cert.z_bar = z_bar;
  auto [lo_it, hi_it] = std::minmax_element(z_bar.begin(), z_bar.end());
  if (lo_it->sign() < 0) throw InvalidArgument("tail_certificate: z must be non-negative");
  cert.z_span = *hi_it - *lo_it;
  cert.h = cert.z_span.ceil().get_si();
  Rational a = x_bar * x_bar / (Rational(2) * (cert.z_span + x_bar + Rational(1)));
  Mp lo, hi;
  lo.set(-a, MPFR_RNDD);
  mpfr_exp(lo.get(), lo.get(), MPFR_RNDD);
  hi.set(-a, MPFR_RNDU);
  mpfr_exp(hi.get(), hi.get(), MPFR_RNDU);
  cert.c = {lo.exact(), hi.exact()};
  if (cert.c.hi >= Rational(1)) throw InternalError("tail constant enclosure reaches 1; drift too small");
  return cert;
}

std::int64_t counter_bound_N(const Certificate& cert, const Rational& epsilon) {
  if (epsilon.sign() <= 0 || epsilon >= Rational(1)) throw InvalidArgument("epsilon must lie in (0,1)");
  if (cert.c.hi >= Rational(1) || cert.c.hi.sign() <= 0) throw InvalidArgument("certificate constant outside (0,1)");
  // N >= ln(eps (1 - c)) / ln(c); the quotient grows with c, so use the
  // upper end and round numerator up, denominator down.
  Mp num, den, q;
  num.set(epsilon * (Rational(1) - cert.c.hi), MPFR_RNDD);
  mpfr_log(num.get(), num.get(), MPFR_RNDD);
  mpfr_neg(num.get(), num.get(), MPFR_RNDU);
  den.set(cert.c.hi, MPFR_RNDU);
  mpfr_log(den.get(), den.get(), MPFR_RNDU);
  mpfr_neg(den.get(), den.get(), MPFR_RNDD);
  mpfr_div(q.get(), num.get(), den.get(), MPFR_RNDU);
  mpfr_ceil(q.get(), q.get());
  if (mpfr_cmp_si(q.get(), std::numeric_limits<std::int64_t>::max() / 4) > 0) {
    throw CapExceeded("counter bound does not fit in 62 bits");
  }
  std::int64_t n = std::max<std::int64_t>(mpfr_get_si(q.get(), MPFR_RNDU), 0);
  return std::max(cert.h, n);
}

Rational tail_bound_value(const Certificate& cert, std::int64_t i) {
  if (i < cert.h) throw InvalidArgument("tail_bound_value: counter below h");
  Mp c, pow, denom;
  c.set(cert.c.hi, MPFR_RNDU);
  mpfr_pow_si(pow.get(), c.get(), static_cast<long>(i), MPFR_RNDU);
  denom.set(Rational(1) - cert.c.hi, MPFR_RNDD);
  mpfr_div(pow.get(), pow.get(), denom.get(), MPFR_RNDU);
  return pow.exact();
}

bool check_decay(const OcSsg& model, const Rational& rho, const std::vector<Rational>& z) {
  if (model.has_owner(Owner::Min)) throw InvalidArgument("check_decay: model has Min states");
  if (z.size() != model.num_states()) throw InvalidArgument("check_decay: z has wrong length");
  if (rho.sign() <= 0 || rho >= Rational(1)) return false;
  const Rational inv = Rational(1) / rho;
  auto factor = [&](int delta) { return delta > 0 ? rho : delta < 0 ? inv : Rational(1); };
  for (StateId q = 0; q < model.num_states(); ++q) {
    if (z[q] < Rational(1)) return false;
    Rational expected(0);
    for (RuleId r : model.outgoing(q)) {
      const Rule& rule = model.rule(r);
      const Rational next = factor(rule.delta) * z[rule.dst];
      if (model.owner(q) == Owner::Max) {
        if (next > z[q]) return false;
      } else {
        expected += *rule.prob * next;
      }
    }
    if (model.owner(q) == Owner::Random && expected > z[q]) return false;
  }
  return true;
}

namespace {

struct DecayCandidate {
  long double rho = 0;
  std::vector<long double> z;
  long double n = 0;
};

struct DecayMoves {
  std::vector<std::vector<std::pair<long double, StateId>>> out;  // factor, destination
};

DecayMoves decay_moves(const OcSsg& model, long double rho) {
  DecayMoves m;
  m.out.resize(model.num_states());
  for (StateId q = 0; q < model.num_states(); ++q) {
    for (RuleId r : model.outgoing(q)) {
      const Rule& rule = model.rule(r);
      long double f = rule.delta > 0 ? rho : rule.delta < 0 ? 1.0L / rho : 1.0L;
      if (model.owner(q) == Owner::Random) f *= rule.prob->to_long_double();
      m.out[q].emplace_back(f, rule.dst);
    }
  }
  return m;
}

/// Least z >= 1 with z >= op(z), by Gauss-Seidel iteration from 1.
std::optional<std::vector<long double>> least_decay_potential(const OcSsg& model, long double rho) {
  const std::size_t n = model.num_states();
  const DecayMoves moves = decay_moves(model, rho);
  constexpr int kMaxSweeps = 20000;
  constexpr long double kHuge = 1e30L;
  std::vector<long double> z(n, 1.0L);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    long double change = 0;
    for (StateId q = 0; q < n; ++q) {
      long double v = 0;
      for (const auto& [f, dst] : moves.out[q]) {
        const long double t = f * z[dst];
        v = model.owner(q) == Owner::Max ? std::max(v, t) : v + t;
      }
      v = std::max(1.0L, v);
      if (v > kHuge) return std::nullopt;
      change = std::max(change, (v - z[q]) / v);
      z[q] = v;
    }
    if (change < 1e-17L) return z;
  }
  return std::nullopt;
}

std::optional<DecayCandidate> decay_candidate(const OcSsg& model, long double rho, long double log_eps) {
  auto z = least_decay_potential(model, rho);
  if (!z) return std::nullopt;
  const long double zmax = *std::max_element(z->begin(), z->end());
  return DecayCandidate{rho, std::move(*z), (std::log(zmax) - log_eps) / -std::log(rho)};
}

/// Dense Gaussian elimination; empty when singular.
std::optional<std::vector<Rational>> solve_dense(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c].sign() == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c].sign() == 0) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 0; c < n; ++c) b[c] /= a[c][c];
  return b;
}

/// Exact z for the stopping/choice policy read off an approximate solution.
std::optional<std::vector<Rational>> exact_decay_potential(const OcSsg& model, const Rational& rho,
                                                           const std::vector<long double>& approx) {
  const std::size_t n = model.num_states();
  const DecayMoves moves = decay_moves(model, rho.to_long_double());
  constexpr long double kTie = 1e-12L;
  std::vector<char> stop(n), resolved(n);
  for (StateId q = 0; q < n; ++q) stop[q] = resolved[q] = approx[q] <= 1.0L + kTie;
  std::vector<std::optional<std::size_t>> choice(n);
  // Max states pick a tied-best rule that leads towards a stopping state.
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId q = 0; q < n; ++q) {
      if (resolved[q]) continue;
      const auto& out = moves.out[q];
      if (model.owner(q) == Owner::Max) {
        long double best = 0;
        for (const auto& [f, dst] : out) best = std::max(best, f * approx[dst]);
        for (std::size_t k = 0; k < out.size(); ++k) {
          if (resolved[out[k].second] && out[k].first * approx[out[k].second] >= best * (1 - kTie)) {
            choice[q] = k;
            resolved[q] = changed = true;
            break;
          }
        }
      } else {
        for (const auto& mv : out) {
          if (resolved[mv.second]) {
            resolved[q] = changed = true;
            break;
          }
        }
      }
    }
  }
  for (StateId q = 0; q < n; ++q) {
    if (!resolved[q]) return std::nullopt;
  }
  std::vector<std::size_t> idx(n, SIZE_MAX);
  std::vector<StateId> cont;
  for (StateId q = 0; q < n; ++q) {
    if (!stop[q]) {
      idx[q] = cont.size();
      cont.push_back(q);
    }
  }
  const Rational inv = Rational(1) / rho;
  auto factor = [&](int delta) { return delta > 0 ? rho : delta < 0 ? inv : Rational(1); };
  const std::size_t m = cont.size();
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m));
  std::vector<Rational> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    const StateId q = cont[i];
    a[i][i] += Rational(1);
    const auto& outs = model.outgoing(q);
    for (std::size_t k = 0; k < outs.size(); ++k) {
      if (model.owner(q) == Owner::Max && k != *choice[q]) continue;
      const Rule& r = model.rule(outs[k]);
      Rational f = factor(r.delta);
      if (model.owner(q) == Owner::Random) f *= *r.prob;
      if (stop[r.dst]) {
        b[i] += f;
      } else {
        a[i][idx[r.dst]] -= f;
      }
    }
  }
  auto sol = solve_dense(std::move(a), std::move(b));
  if (!sol) return std::nullopt;
  std::vector<Rational> z(n, Rational(1));
  for (std::size_t i = 0; i < m; ++i) z[cont[i]] = (*sol)[i];
  return z;
}

Rational dyadic(long double v, int bits, bool up) {
  const long double scaled = std::ldexp(v, bits);
  const long double r = up ? std::ceil(scaled) : std::floor(scaled);
  // r is an integer; its 64-bit mantissa converts exactly
  int e = 0;
  const long double m = std::frexp(r, &e);
  mpz_class num(static_cast<unsigned long>(std::ldexp(m, 64)));
  if (e >= 64) {
    num <<= static_cast<mp_bitcnt_t>(e - 64);
  } else {
    num >>= static_cast<mp_bitcnt_t>(64 - e);
  }
  mpz_class den(1);
  den <<= bits;
  mpq_class q(num, den);
  q.canonicalize();
  return Rational(q);
}

}  // namespace

std::optional<DecayCertificate> decay_certificate(const OcSsg& model, const Rational& epsilon) {
  if (model.has_owner(Owner::Min)) throw InvalidArgument("decay_certificate: model has Min states");
  if (epsilon.sign() <= 0 || epsilon >= Rational(1)) throw InvalidArgument("epsilon must lie in (0,1)");
  constexpr std::size_t kMaxStates = 300;  // dense exact solve below
  if (model.num_states() > kMaxStates) return std::nullopt;
  const long double log_eps = std::log(epsilon.to_long_double());
  constexpr int kBits = 40;
  auto grid_rho = [&](long double k) {
    return dyadic(1.0L - std::exp2(-k), kBits, false).to_long_double();
  };
  // coarse scan over 1 - rho = 2^-k, then refine around the best point
  std::vector<DecayCandidate> found;
  long double best_k = -1, best_n = std::numeric_limits<long double>::infinity();
  for (int step = 1; step <= 160; ++step) {
    const long double k = step / 8.0L;
    if (auto c = decay_candidate(model, grid_rho(k), log_eps)) {
      if (c->n < best_n) {
        best_n = c->n;
        best_k = k;
      }
      found.push_back(std::move(*c));
    }
  }
  if (found.empty()) return std::nullopt;
  for (int step = -8; step <= 8; ++step) {
    const long double k = best_k + step / 64.0L;
    if (k <= 0 || step % 8 == 0) continue;
    if (auto c = decay_candidate(model, grid_rho(k), log_eps)) found.push_back(std::move(*c));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  if (found.size() > 4) found.resize(4);
  for (const DecayCandidate& c : found) {
    DecayCertificate cert;
    cert.rho = dyadic(c.rho, kBits, false);
    auto z = exact_decay_potential(model, cert.rho, c.z);
    if (!z || !check_decay(model, cert.rho, *z)) continue;
    cert.z = std::move(*z);
    // N >= log(zmax / eps) / -log(rho), rounded outward
    const Rational zmax = *std::max_element(cert.z.begin(), cert.z.end());
    Mp num, den, q;
    num.set(zmax / epsilon, MPFR_RNDU);
    mpfr_log(num.get(), num.get(), MPFR_RNDU);
    den.set(cert.rho, MPFR_RNDU);
    mpfr_log(den.get(), den.get(), MPFR_RNDU);
    mpfr_neg(den.get(), den.get(), MPFR_RNDD);
    mpfr_div(q.get(), num.get(), den.get(), MPFR_RNDU);
    mpfr_ceil(q.get(), q.get());
    if (mpfr_cmp_si(q.get(), std::numeric_limits<std::int64_t>::max() / 4) > 0) continue;
    cert.N = std::max<std::int64_t>(mpfr_get_si(q.get(), MPFR_RNDU), 0);
    return cert;
  }
  return std::nullopt;
}

Rational decay_bound_value(const DecayCertificate& cert, std::int64_t i) {
  if (i < 0) throw InvalidArgument("decay_bound_value: negative counter");
  Mp rho, zmax;
  rho.set(cert.rho, MPFR_RNDU);
  mpfr_pow_si(rho.get(), rho.get(), static_cast<long>(i), MPFR_RNDU);
  zmax.set(*std::max_element(cert.z.begin(), cert.z.end()), MPFR_RNDU);
  mpfr_mul(rho.get(), rho.get(), zmax.get(), MPFR_RNDU);
  return rho.exact();
}

std::string decimal_string(const Rational& value, int digits, bool round_up) {
  if (digits < 1) throw InvalidArgument("decimal_string: digits must be positive");
  if (value.sign() == 0) return "0";
  const mpq_class& v = value.raw();
  mpq_class mag = abs(v);
  // e = floor(log10 |v|)
  long e = 0;
  mpq_class p10(1);
  while (mag >= p10 * 10) {
    p10 *= 10;
    ++e;
  }
  while (mag < p10) {
    p10 /= 10;
    --e;
  }
  const long shift = digits - 1 - e;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(shift >= 0 ? shift : -shift));
  mpq_class scaled = shift >= 0 ? mpq_class(v * ten_pow) : mpq_class(v / ten_pow);
  scaled.canonicalize();
  mpz_class r;
  if (round_up) {
    mpz_cdiv_q(r.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  } else {
    mpz_fdiv_q(r.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  }
  const bool negative = r < 0;
  std::string d = mpz_class(abs(r)).get_str();
  long point = static_cast<long>(d.size()) - shift;  // digits before the decimal point
  std::string out;
  if (point <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-point), '0') + d;
  } else if (point >= static_cast<long>(d.size())) {
    out = d + std::string(static_cast<std::size_t>(point) - d.size(), '0');
  } else {
    out = d.substr(0, static_cast<std::size_t>(point)) + "." + d.substr(static_cast<std::size_t>(point));
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative && out != "0" ? "-" + out : out;
}

}  // namespace octerm
