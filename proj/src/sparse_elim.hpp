#pragma once

// Subtraction-free sparse elimination shared by the reachability and
// stationary-distribution solvers. Works for Rational and long double.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace octerm::detail {

/// Row of x_i = sum_j off[j] x_j + rhs, where `off` holds transition
/// probabilities among unknowns (self-loops omitted) and `exit` is the
/// probability mass leaving to states of known value (whose contribution is
/// already in `rhs`). Every unknown must be able to reach an exit, so the
/// pivots off + exit stay positive.
template <class T>
struct AbsorptionRow {
  std::map<std::size_t, T> off;
  T exit{};
  T rhs{};
};

template <class T>
std::vector<T> solve_absorption(std::vector<AbsorptionRow<T>> rows) {
  const std::size_t n = rows.size();
  std::vector<std::set<std::size_t>> refs(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (auto& [j, p] : rows[k].off) refs[j].insert(k);
  }
  std::vector<T> pivot(n);
  for (std::size_t i = 0; i < n; ++i) {
    AbsorptionRow<T>& ri = rows[i];
    T d = ri.exit;
    for (auto& [j, p] : ri.off) d += p;
    pivot[i] = d;
    for (std::size_t k : refs[i]) {
      if (k < i) continue;  // already eliminated rows keep their entry for back substitution
      AbsorptionRow<T>& rk = rows[k];
      auto it = rk.off.find(i);
      T f = it->second / d;
      rk.off.erase(it);
      for (auto& [j, p] : ri.off) {
        if (j == k) continue;
        auto [pos, inserted] = rk.off.try_emplace(j, T{});
        pos->second += f * p;
        if (inserted) refs[j].insert(k);
      }
      rk.exit += f * ri.exit;
      rk.rhs += f * ri.rhs;
    }
    refs[i].clear();
  }
  std::vector<T> x(n);
  for (std::size_t i = n; i-- > 0;) {
    T acc = rows[i].rhs;
    for (auto& [j, p] : rows[i].off) acc += p * x[j];
    x[i] = acc / pivot[i];
  }
  return x;
}

/// Stationary distribution of an irreducible chain given by sparse rows
/// (self-loops omitted), via GTH elimination.
template <class T>
std::vector<T> stationary_distribution(std::vector<std::map<std::size_t, T>> rows) {
  const std::size_t m = rows.size();
  std::vector<std::map<std::size_t, T>> in(m);  // in[j][i] = P[i][j]
  for (std::size_t i = 0; i < m; ++i) {
    for (auto& [j, p] : rows[i]) in[j][i] = p;
  }
  // incoming[n] = censored P[i][n]/s_n at elimination time
  std::vector<std::vector<std::pair<std::size_t, T>>> incoming(m);
  for (std::size_t n = m; n-- > 1;) {
    T s{};
    for (auto& [j, p] : rows[n]) s += p;
    for (auto& [i, pin] : in[n]) {
      T f = pin / s;
      incoming[n].emplace_back(i, f);
      rows[i].erase(n);
      for (auto& [j, p] : rows[n]) {
        if (j == i) continue;
        T add = f * p;
        auto [pos, inserted] = rows[i].try_emplace(j, T{});
        pos->second += add;
        in[j][i] = pos->second;
      }
    }
    for (auto& [j, p] : rows[n]) in[j].erase(n);
    in[n].clear();
  }
  std::vector<T> pi(m);
  if (m == 0) return pi;
  pi[0] = T(1);
  T total = pi[0];
  for (std::size_t n = 1; n < m; ++n) {
    T acc{};
    for (auto& [i, f] : incoming[n]) acc += pi[i] * f;
    pi[n] = acc;
    total += acc;
  }
  for (auto& v : pi) v = v / total;
  return pi;
}

}  // namespace octerm::detail
