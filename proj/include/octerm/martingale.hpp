#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octerm/model.hpp"

namespace octerm {

/// sum coeff * var <= rhs. Variable 0 is x, variable 1+q is z_q.
struct LpConstraint {
  std::vector<std::pair<std::size_t, Rational>> coeffs;
  Rational rhs;
  std::string label;
};

/// Maximize x subject to the constraints and z >= 0 (x is free).
struct LpSystem {
  std::size_t num_states = 0;
  std::vector<LpConstraint> constraints;
};

LpSystem build_lp(const OcSsg& model);

struct LpSolution {
  Rational x_bar;
  std::vector<Rational> z_bar;
};

/// Exact dense simplex with Bland's rule. Throws NotRising when the optimum
/// has x <= 0.
LpSolution solve_lp_max_x(const LpSystem& lp);

enum class LpMethod { Auto, Simplex, StrategyIteration };

/// Solves the drift LP of a Max-only model. The strategy-iteration route
/// computes the optimal minimal gain and bias of the counter increments
/// and builds an optimal (x, z) from them; it scales to large models.
LpSolution solve_drift_lp(const OcSsg& model, LpMethod method = LpMethod::Auto);

/// Potential of smallest span for drift x (x at most the LP optimum):
/// z_q = -min over stopping times of the accumulated (delta - x), shifted
/// to be non-negative.
std::vector<Rational> min_span_potential(const OcSsg& model, const Rational& x);

/// Trades drift against potential span: among x = k/16 of the optimum and
/// the given solution, keeps the one with the fastest tail decay
/// x^2 / (span + x + 1).
LpSolution tighten_drift_solution(const OcSsg& model, const LpSolution& sol);

struct SubmartingaleCheck {
  bool ok = true;
  std::optional<StateId> state;
  std::optional<RuleId> rule;  // violated Max rule; empty for Random states
  std::string witness;
};

SubmartingaleCheck check_submartingale(const OcSsg& model, const Rational& x_bar,
                                       const std::vector<Rational>& z_bar);

/// Closed interval with exact endpoints.
struct Interval {
  Rational lo;
  Rational hi;
};

struct Certificate {
  Rational x_bar;
  std::vector<Rational> z_bar;
  Rational z_span;
  Interval c;  // encloses exp(-x^2 / (2 (z_span + x + 1)))
  std::int64_t h = 0;
  std::optional<std::int64_t> N;
};

/// Working precision (bits) for the transcendental enclosures.
inline constexpr int kCertificatePrecision = 128;

Certificate tail_certificate(const Rational& x_bar, const std::vector<Rational>& z_bar);

/// Smallest N >= h with c^N / (1 - c) <= epsilon, evaluated from the upper
/// end of c with directed rounding (never smaller than the exact bound).
std::int64_t counter_bound_N(const Certificate& cert, const Rational& epsilon);

/// Rational upper bound on c^i / (1 - c) for i >= h.
Rational tail_bound_value(const Certificate& cert, std::int64_t i);

/// Exponential supermartingale z_q * rho^i: every Max rule satisfies
/// rho^delta z_dst <= z_q, every Random state the expected version, and
/// z >= 1. Then Pr(termination from (q,i)) <= z_q rho^i.
struct DecayCertificate {
  Rational rho;
  std::vector<Rational> z;
  std::int64_t N = 0;  // smallest counter with max z * rho^N <= epsilon
};

bool check_decay(const OcSsg& model, const Rational& rho, const std::vector<Rational>& z);

/// Searches rho in (0,1) for the smallest N. Empty when no candidate
/// verifies exactly.
std::optional<DecayCertificate> decay_certificate(const OcSsg& model, const Rational& epsilon);

/// Rational upper bound on max_q z_q rho^i.
Rational decay_bound_value(const DecayCertificate& cert, std::int64_t i);

/// Decimal rendering of an exact rational with `digits` significant digits,
/// rounded down or up.
std::string decimal_string(const Rational& value, int digits, bool round_up);

}  // namespace octerm
