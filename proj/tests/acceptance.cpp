// Acceptance runner: prints one PASS/FAIL line per criterion.
// Usage: acceptance PATH_TO_OCTERM [--only N]

#include <mpfr.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "octerm/approx.hpp"
#include "octerm/json_io.hpp"
#include "octerm/oracle.hpp"
#include "octerm/rising.hpp"
#include "oracles.hpp"

using namespace octerm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

Rational closed_form(int i) { return Rational((std::int64_t{1} << i) + 1, std::int64_t{1} << (i + 1)); }

Rational power_half(int i) { return Rational(1, std::int64_t{1} << i); }

Outcome fig2_closed_form() {
  const auto t0 = Clock::now();
  OcSsg fig2 = builtin_example("fig2");
  const Rational eps(1, 1000);
  Outcome out;
  Rational worst(0);
  for (int i = 0; i <= 12; ++i) {
    ApproxReport r = approximate_termination(fig2, {0, i}, eps);
    Rational err = abs(r.value - closed_form(i));
    worst = max(worst, err);
    if (err > eps) out.pass = false;
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) out.pass = false;
  out.detail = "max error " + fmt(worst.to_double()) + " over i=0..12, " + fmt(secs, 3) + " s";
  return out;
}

Outcome restricted_model() {
  OcSsg m = builtin_example("fig2-no-st");
  const Rational eps(1, 1000);
  Outcome out;
  Rational worst(0);
  for (int i = 0; i <= 12; ++i) {
    ApproxReport r = approximate_termination(m, {0, i}, eps);
    Rational err = abs(r.value - power_half(i));
    worst = max(worst, err);
    if (err > eps) out.pass = false;
  }
  out.detail = "max error " + fmt(worst.to_double()) + " against 2^-i, i=0..12";
  return out;
}

Outcome boundary_facts() {
  OcSsg fig2 = builtin_example("fig2");
  const Rational eps(1, 1000);
  Outcome out;
  Rational worst(0);
  for (int i = 1; i <= 12; ++i) {
    ApproxReport r = approximate_termination(fig2, {2, i}, eps);
    Rational err = abs(r.value - Rational(1, 2));
    worst = max(worst, err);
    if (err > eps) out.pass = false;
  }
  ApproxReport zero = approximate_termination(fig2, {0, 0}, eps);
  if (zero.value != Rational(1)) out.pass = false;
  out.detail = "v(t,i) max error " + fmt(worst.to_double()) + " for i=1..12; v(s,0) = " + zero.value.str();
  return out;
}

Outcome qualitative_fixture() {
  OcSsg fig2 = builtin_example("fig2");
  LiminfResult r = liminf_values_mdp(fig2);
  const std::vector<Rational> expected{Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1), Rational(0)};
  Outcome out;
  out.pass = r.nu == expected && r.T == std::vector<StateId>{3};
  // independent check: reachability of {g} via per-profile linear systems
  auto brute = testing_oracles::brute_force_values(to_finite(fig2, {3}));
  const bool agrees = brute == r.nu;
  out.pass = out.pass && agrees;
  std::string nu;
  for (StateId q = 0; q < fig2.num_states(); ++q) nu += (q ? " " : "") + fig2.name(q) + ":" + r.nu[q].str();
  out.detail = "nu = (" + nu + "), |T| = " + std::to_string(r.T.size()) + ", linear-system oracle " +
               (agrees ? "agrees" : "disagrees");
  return out;
}

/// Encloses exp(-1/24) with directed rounding at high precision.
bool encloses_exp_minus_1_24(const Interval& c) {
  constexpr mpfr_prec_t prec = 512;
  mpfr_t lo, hi;
  mpfr_inits2(prec, lo, hi, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_si(lo, -1, MPFR_RNDD);
  mpfr_div_ui(lo, lo, 24, MPFR_RNDD);
  mpfr_exp(lo, lo, MPFR_RNDD);
  mpfr_set_si(hi, -1, MPFR_RNDU);
  mpfr_div_ui(hi, hi, 24, MPFR_RNDU);
  mpfr_exp(hi, hi, MPFR_RNDU);
  const bool ok = mpfr_cmp_q(lo, c.lo.raw().get_mpq_t()) >= 0 && mpfr_cmp_q(hi, c.hi.raw().get_mpq_t()) <= 0;
  mpfr_clears(lo, hi, static_cast<mpfr_ptr>(nullptr));
  return ok;
}

Outcome lp_micro_case() {
  const auto t0 = Clock::now();
  OcSsg bw = builtin_example("biased-walk");
  LpSolution sol = solve_lp_max_x(build_lp(bw));
  Certificate cert = tail_certificate(sol.x_bar, sol.z_bar);
  const std::int64_t n = counter_bound_N(cert, Rational(1, 100));
  const bool sub = check_submartingale(bw, sol.x_bar, sol.z_bar).ok;
  const bool enclosed = encloses_exp_minus_1_24(cert.c);
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = sol.x_bar == Rational(1, 3) && sol.z_bar == std::vector<Rational>{Rational(0)} && cert.h == 0 &&
             enclosed && n >= 188 && n <= 190 && sub && secs < 1;
  out.detail = "x = " + sol.x_bar.str() + ", z = " + sol.z_bar[0].str() + ", h = " + std::to_string(cert.h) +
               ", c encloses exp(-1/24): " + (enclosed ? "yes" : "no") + ", N = " + std::to_string(n) +
               ", submartingale " + (sub ? "ok" : "violated") + ", " + fmt(secs, 3) + " s";
  return out;
}

constexpr std::uint64_t kSweepSeed = 20240611;
constexpr int kSweepModels = 100;

std::vector<OcSsg> sweep_models() {
  std::mt19937_64 rng(kSweepSeed);
  std::vector<OcSsg> models;
  testing_oracles::RandomModelOptions opt;
  opt.max_states = 4;
  opt.max_out = 3;
  opt.with_min = false;
  for (int k = 0; k < kSweepModels; ++k) models.push_back(testing_oracles::random_model(rng, opt));
  return models;
}

Outcome soundness_sweep() {
  const auto t0 = Clock::now();
  Outcome out;
  int not_rising = 0, violations = 0, certified = 0, rising_route = 0;
  for (const OcSsg& m : sweep_models()) {
    const auto t = value_one_states(m);
    if (t.size() == m.num_states()) continue;
    OcSsg collapsed = collapse_value_one(m, t).model;
    try {
      // the rising construction of the collapsed model must be rising
      RisingModel rm = rising_construction(collapsed);
      LpSolution sol = solve_drift_lp(rm.model);
      if (sol.x_bar.sign() <= 0) ++not_rising;
    } catch (const NotRising&) {
      ++not_rising;
      continue;
    }
    TailBound tb;
    try {
      tb = termination_tail_bound(m, nullptr, Rational(1, 100));
    } catch (const NotRising&) {
      ++not_rising;
      continue;
    }
    if (!tb.certificate) continue;
    ++certified;
    if (tb.used_rising) ++rising_route;
    const Certificate& c = *tb.certificate;
    constexpr std::int64_t kHorizon = 200;
    std::vector<std::vector<BoundPair>> table;
    if (c.h <= kHorizon) table = finite_horizon_table(collapsed, c.h + 10, kHorizon);
    for (std::int64_t i = c.h; i <= c.h + 10; ++i) {
      const Rational bound = tail_bound_value(c, i) + Rational(1, 1000000000);
      for (StateId q = 0; q < collapsed.num_states(); ++q) {
        const Rational lower =
            table.empty() ? finite_horizon_bounds(collapsed, {q, i}, kHorizon).lower : table[i][q].lower;
        if (lower > bound) ++violations;
      }
    }
  }
  const double secs = seconds_since(t0);
  out.pass = not_rising == 0 && violations == 0 && secs < 600;
  out.detail = std::to_string(kSweepModels) + " models, " + std::to_string(certified) + " certified (" +
               std::to_string(rising_route) + " via rising), NotRising " + std::to_string(not_rising) +
               ", bound violations " + std::to_string(violations) + ", " + fmt(secs, 3) + " s";
  return out;
}

Outcome oracle_bracketing() {
  const auto t0 = Clock::now();
  const Rational eps(1, 100);
  Outcome out;
  int checked = 0, violations = 0;
  Rational worst_gap(0);
  for (const OcSsg& m : sweep_models()) {
    ApproxReport r = approximate_termination(m, {0, 1}, eps);
    const std::int64_t top = std::min<std::int64_t>(r.N, 20);
    auto table = finite_horizon_table(m, top, 200);
    for (const auto& [i, row] : r.values) {
      if (i > top) continue;
      for (StateId q = 0; q < m.num_states(); ++q) {
        ++checked;
        const BoundPair& b = table[i][q];
        if (b.lower - eps > row[q] || row[q] > b.upper + eps) ++violations;
        worst_gap = max(worst_gap, b.lower - row[q]);
      }
    }
  }
  const double secs = seconds_since(t0);
  out.pass = violations == 0 && checked > 0;
  out.detail = std::to_string(checked) + " values checked, violations " + std::to_string(violations) +
               ", max (lower - v) " + fmt(worst_gap.to_double()) + ", " + fmt(secs, 3) + " s";
  return out;
}

/// fig2 with r handed to Min: Min picks between the increment and the decrement.
OcSsg fig2_min_r() {
  std::vector<State> states{{"s", Owner::Max}, {"r", Owner::Min}, {"t", Owner::Random}, {"g", Owner::Random},
                            {"b", Owner::Random}};
  std::vector<Rule> rules{{0, 0, 1, std::nullopt},    {0, 0, 2, std::nullopt},    {1, +1, 0, std::nullopt},
                          {1, -1, 0, std::nullopt},   {2, 0, 3, Rational(1, 2)},  {2, 0, 4, Rational(1, 2)},
                          {3, -1, 3, Rational(1)},    {4, +1, 4, Rational(1)}};
  return OcSsg(std::move(states), std::move(rules));
}

Outcome two_player_check() {
  OcSsg g = fig2_min_r();
  const Rational eps(1, 100);
  constexpr std::int64_t rows = 12;
  ApproxReport game = approximate_termination(g, {0, 1}, eps);
  std::vector<std::vector<Rational>> best(rows + 1, std::vector<Rational>(g.num_states(), Rational(1)));
  int strategies = 0;
  for_each_counterless(g, Owner::Min, kDefaultEnumCap, [&](const CounterlessStrategy& pi) {
    ++strategies;
    OcSsg fixed = fix_min_strategy(g, pi);
    for (std::int64_t i = 0; i <= rows; ++i) {
      for (StateId q = 0; q < g.num_states(); ++q) {
        ApproxReport r = approximate_termination(fixed, {q, i}, eps);
        best[i][q] = min(best[i][q], r.value);
      }
    }
  });
  Outcome out;
  Rational worst(0);
  for (std::int64_t i = 0; i <= rows; ++i) {
    for (StateId q = 0; q < g.num_states(); ++q) {
      ApproxReport r = approximate_termination(g, {q, i}, eps);
      Rational err = abs(r.value - best[i][q]);
      worst = max(worst, err);
      if (err > eps * Rational(2)) out.pass = false;
    }
  }
  out.pass = out.pass && game.pi_bar.has_value() && strategies == 2;
  out.detail = std::to_string(strategies) + " Min strategies, counters 0.." + std::to_string(rows) +
               ", max |game - min over pi| " + fmt(worst.to_double()) + ", v(s,1) = " + game.value.str();
  return out;
}

Outcome simulation_check() {
  const auto t0 = Clock::now();
  OcSsg fig2 = builtin_example("fig2");
  ApproxReport r = approximate_termination(fig2, {0, 1}, Rational(1, 100));
  const std::uint64_t runs = 100000;
  SimReport sim = simulate(fig2, &r.sigma_bar, nullptr, {0, 1}, 10000, runs, 7);
  const double p = 0.75;
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(runs));
  const double threshold = 0.75 - 0.01 - 3 * sigma;
  const double freq = sim.frequency.to_double();
  Outcome out;
  out.pass = freq >= threshold;
  out.detail = "frequency " + fmt(freq) + " (" + std::to_string(sim.terminated) + "/" + std::to_string(runs) +
               "), threshold " + fmt(threshold) + ", " + fmt(seconds_since(t0), 3) + " s";
  return out;
}

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run(const std::string& cmd) {
  CommandResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return res;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.output.append(buf.data(), n);
  const int st = pclose(pipe);
  res.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return res;
}

Outcome determinism(const std::string& cli) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("octerm-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string model = (dir / "fig2.ocg").string();
  {
    std::ofstream f(model);
    f << serialize(builtin_example("fig2"));
  }
  const std::string exe = "'" + cli + "'";
  const std::string common = " --model '" + model + "' --state s --counter 1";
  const std::vector<std::string> commands{
      exe + " check --model '" + model + "'",
      exe + " qualitative --model '" + model + "'",
      exe + " bound --model '" + model + "' --epsilon 1/100",
      exe + " approx" + common + " --epsilon 1/100",
      exe + " oracle" + common + " --horizon 50",
      exe + " simulate" + common + " --epsilon 1/100 --horizon 1000 --runs 2000 --seed 5",
      exe + " example --name fig2",
      exe + " approx --name biased-walk --state q --counter 3 --epsilon 1/20",
  };
  Outcome out;
  int identical = 0;
  for (const std::string& c : commands) {
    CommandResult a = run(c + " 2>/dev/null");
    CommandResult b = run(c + " 2>/dev/null");
    if (a.status == 0 && b.status == 0 && !a.output.empty() && a.output == b.output) {
      ++identical;
    } else {
      out.pass = false;
    }
  }
  fs::remove_all(dir);
  out.detail = std::to_string(identical) + "/" + std::to_string(commands.size()) +
               " commands byte-identical across two runs";
  return out;
}

Outcome structural_properties() {
  std::mt19937_64 rng(1111);
  const Rational eps(1, 50);
  Outcome out;
  int antitone = 0, sandwich = 0, overlap = 0, models = 0;
  for (int k = 0; k < 60; ++k) {
    testing_oracles::RandomModelOptions opt;
    opt.with_min = k % 3 == 2;
    OcSsg m = testing_oracles::random_model(rng, opt);
    ApproxReport r = approximate_termination(m, {0, 1}, eps);
    ++models;
    for (const auto& [i, row] : r.values) {
      for (StateId q = 0; q < m.num_states(); ++q) {
        if (r.values.count(i + 1) && r.values.at(i + 1)[q] > row[q]) ++antitone;
        if (row[q] < r.nu[q]) ++sandwich;
        if (r.certificate && i >= r.certificate->h && row[q] > r.nu[q] + tail_bound_value(*r.certificate, i) + eps) {
          ++sandwich;
        }
        if (r.decay && row[q] > r.nu[q] + decay_bound_value(*r.decay, i) + eps) ++sandwich;
      }
    }
  }
  int rising_models = 0;
  for (int draws = 0; rising_models < 20 && draws < 200; ++draws) {
    OcSsg base = testing_oracles::random_model(rng);
    const auto t = value_one_states(base);
    if (t.size() == base.num_states()) continue;
    OcSsg collapsed = collapse_value_one(base, t).model;
    RisingModel rm = rising_construction(collapsed);
    ++rising_models;
    auto orig = finite_horizon_table(collapsed, 6, 60);
    auto lifted = finite_horizon_table(rm.model, 6, 120);
    for (std::int64_t i = 0; i <= 6; ++i) {
      for (StateId q = 0; q < collapsed.num_states(); ++q) {
        const BoundPair& a = orig[i][q];
        const BoundPair& b = lifted[i][rm.f[q]];
        if (a.lower > b.upper || b.lower > a.upper) ++overlap;
      }
    }
  }
  out.pass = antitone == 0 && sandwich == 0 && overlap == 0 && rising_models == 20;
  out.detail = std::to_string(models) + " models: antitonicity violations " + std::to_string(antitone) +
               ", sandwich violations " + std::to_string(sandwich) + "; " + std::to_string(rising_models) +
               " rising models: disjoint oracle intervals " + std::to_string(overlap);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance PATH_TO_OCTERM [--only N]\n";
    return 2;
  }
  const std::string cli = argv[1];
  int only = 0;
  if (argc >= 4 && std::string(argv[2]) == "--only") only = std::stoi(argv[3]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"fig2 closed form", fig2_closed_form},
      {"restricted model", restricted_model},
      {"boundary facts", boundary_facts},
      {"qualitative fixture", qualitative_fixture},
      {"LP certificate micro-case", lp_micro_case},
      {"soundness sweep", soundness_sweep},
      {"oracle bracketing", oracle_bracketing},
      {"two-player check", two_player_check},
      {"strategy simulation", simulation_check},
      {"CLI determinism", [&] { return determinism(cli); }},
      {"structural properties", structural_properties},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (only && only != id) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria[k].first << "] "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
