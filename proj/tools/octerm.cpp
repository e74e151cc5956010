#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "octerm/json_io.hpp"

using namespace octerm;

namespace {

struct Flags {
  std::string model_path;
  std::string name;
  std::string state;
  std::int64_t counter = 0;
  std::string epsilon = "1/100";
  std::int64_t horizon = -1;
  std::uint64_t runs = 10000;
  std::uint64_t seed = 0;
  std::string format = "json";
  bool no_prune = false;
  std::uint64_t enum_cap = kDefaultEnumCap;
  std::uint64_t table_cap = kDefaultOracleCap;
};

/// Exit status 1: bad input. Anything else that escapes is status 2.
struct UsageError : Error {
  using Error::Error;
};

OcSsg load_model(const Flags& f) {
  if (!f.model_path.empty() && !f.name.empty()) throw UsageError("give either --model or --name, not both");
  if (!f.name.empty()) return builtin_example(f.name);
  if (f.model_path.empty()) throw UsageError("--model is required");
  std::ifstream in(f.model_path, std::ios::binary);
  if (!in) throw UsageError("cannot read model file '" + f.model_path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_ocssg(text.str());
}

Rational parse_epsilon(const std::string& text) {
  Rational eps;
  try {
    eps = Rational::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--epsilon: ") + e.what());
  }
  if (eps.sign() <= 0 || eps >= Rational(1)) throw UsageError("--epsilon must lie strictly between 0 and 1");
  return eps;
}

Config parse_start(const OcSsg& model, const Flags& f) {
  if (f.state.empty()) throw UsageError("--state is required");
  auto q = model.find_state(f.state);
  if (!q) throw UsageError("unknown state '" + f.state + "'");
  return {*q, f.counter};
}

ApproxOptions approx_options(const Flags& f) {
  ApproxOptions o;
  o.enum_cap = f.enum_cap;
  o.prune = !f.no_prune;
  return o;
}

std::string text_rational(const Rational& r) { return r.str() + " (~" + decimal_string(r, 8, false) + ")"; }

void print_strategy_text(std::ostream& out, const OcSsg& model, const ModeSwitchStrategy& st, const char* label) {
  out << label << ": switch level " << st.switch_level << "\n";
  for (std::size_t i = 0; i < st.below.size(); ++i) {
    for (StateId q : model.states_of(st.owner)) {
      if (st.below[i][q]) out << "  counter " << i + 1 << "  " << describe_rule(model, *st.below[i][q]) << "\n";
    }
  }
  for (StateId q : model.states_of(st.owner)) {
    if (auto r = st.at_or_above.at(q)) out << "  switched  " << describe_rule(model, *r) << "\n";
  }
}

int cmd_check(const Flags& f, std::ostream& out) {
  std::vector<Diagnostic> diags;
  try {
    OcSsg m = load_model(f);
    (void)m;
  } catch (const ValidationError& e) {
    diags = e.diagnostics();
  } catch (const ParseError& e) {
    diags.push_back({"parse", e.what()});
  }
  if (f.format == "text") {
    if (diags.empty()) out << "ok\n";
    for (const auto& d : diags) out << d.rule << ": " << d.message << "\n";
  } else {
    out << dump(to_json(diags));
  }
  return diags.empty() ? 0 : 1;
}

int cmd_qualitative(const Flags& f, std::ostream& out) {
  OcSsg m = load_model(f);
  LiminfResult r = m.has_owner(Owner::Min) ? liminf_values_ssg(m, f.enum_cap) : liminf_values_mdp(m, f.enum_cap);
  if (f.format == "text") {
    for (StateId q = 0; q < m.num_states(); ++q) out << m.name(q) << "  nu = " << text_rational(r.nu[q]) << "\n";
    for (StateId q : m.states_of(Owner::Max)) out << "sigma*  " << describe_rule(m, *r.sigma_star.at(q)) << "\n";
    if (r.pi_star) {
      for (StateId q : m.states_of(Owner::Min)) out << "pi*  " << describe_rule(m, *r.pi_star->at(q)) << "\n";
    }
  } else {
    out << dump(to_json(m, r));
  }
  return 0;
}

int cmd_bound(const Flags& f, std::ostream& out) {
  OcSsg m = load_model(f);
  Rational eps = parse_epsilon(f.epsilon);
  std::optional<CounterlessStrategy> pi;
  if (m.has_owner(Owner::Min)) pi = liminf_values_ssg(m, f.enum_cap).pi_star;
  TailBound tb = termination_tail_bound(m, pi ? &*pi : nullptr, eps, approx_options(f));
  if (f.format == "text") {
    out << "N = " << tb.N << "\n";
    if (tb.decay) out << "decay rho = " << text_rational(tb.decay->rho) << ", N = " << tb.decay->N << "\n";
    out << "segment height = " << tb.height() << "\n";
    if (tb.certificate) {
      const Certificate& c = *tb.certificate;
      out << "x = " << text_rational(c.x_bar) << "\nspan = " << text_rational(c.z_span) << "\nh = " << c.h
          << "\nc in [" << decimal_string(c.c.lo, 12, false) << ", " << decimal_string(c.c.hi, 12, true) << "]\n";
    }
  } else {
    out << dump(to_json(m, tb, eps));
  }
  return 0;
}

int cmd_approx(const Flags& f, std::ostream& out) {
  OcSsg m = load_model(f);
  Config start = parse_start(m, f);
  Rational eps = parse_epsilon(f.epsilon);
  ApproxReport r = approximate_termination(m, start, eps, approx_options(f));
  if (f.format == "text") {
    out << "value at (" << m.name(start.state) << "," << start.counter << ") = " << text_rational(r.value) << "\n";
    out << "N = " << r.N << "\n";
    for (const auto& [i, vals] : r.values) {
      out << "counter " << i << ":";
      for (StateId q = 0; q < m.num_states(); ++q) out << "  " << m.name(q) << "=" << decimal_string(vals[q], 6, false);
      out << "\n";
    }
    print_strategy_text(out, m, r.sigma_bar, "sigma");
    if (r.pi_bar) print_strategy_text(out, m, *r.pi_bar, "pi");
  } else {
    out << dump(to_json(m, r));
  }
  return 0;
}

int cmd_oracle(const Flags& f, std::ostream& out) {
  OcSsg m = load_model(f);
  Config start = parse_start(m, f);
  const std::int64_t t = f.horizon < 0 ? 200 : f.horizon;
  BoundPair b = finite_horizon_bounds(m, start, t, f.table_cap);
  if (f.format == "text") {
    out << "lower = " << text_rational(b.lower) << "\nupper = " << text_rational(b.upper) << "\n";
  } else {
    out << dump(to_json(m, start, t, b));
  }
  return 0;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  OcSsg m = load_model(f);
  Config start = parse_start(m, f);
  Rational eps = parse_epsilon(f.epsilon);
  if (f.runs < 1) throw UsageError("--runs must be positive");
  const std::int64_t t = f.horizon < 0 ? 10000 : f.horizon;
  ApproxReport r = approximate_termination(m, start, eps, approx_options(f));
  SimReport s = simulate(m, &r.sigma_bar, r.pi_bar ? &*r.pi_bar : nullptr, start, t, f.runs, f.seed);
  if (f.format == "text") {
    out << s.terminated << " of " << s.runs << " runs terminated within " << s.horizon
        << " steps; frequency = " << text_rational(s.frequency) << "\n";
  } else {
    out << dump(to_json(m, start, s));
  }
  return 0;
}

int cmd_example(const Flags& f, std::ostream& out) {
  if (f.name.empty()) throw UsageError("--name is required");
  out << serialize(builtin_example(f.name));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate termination values of one-counter stochastic games"};
  app.require_subcommand(1);
  Flags f;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", f.model_path, "Model file");
    sub->add_option("--name", f.name, "Built-in model instead of a file");
    sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "text"}));
  };
  auto add_start = [&](CLI::App* sub) {
    sub->add_option("--state", f.state, "Start state")->required();
    sub->add_option("--counter", f.counter, "Start counter")->check(CLI::NonNegativeNumber);
  };
  auto add_pipeline = [&](CLI::App* sub) {
    sub->add_option("--epsilon", f.epsilon, "Tolerance as num/den (default 1/100)");
    sub->add_flag("--no-prune", f.no_prune, "Keep unreachable states of the rising construction");
    sub->add_option("--enum-cap", f.enum_cap, "Cap on enumerated counterless strategies (default 2^20)");
  };

  struct Entry {
    CLI::App* sub;
    int (*run)(const Flags&, std::ostream&);
  };
  std::vector<Entry> entries;

  auto* check = app.add_subcommand("check", "Validate a model");
  add_model(check);
  entries.push_back({check, cmd_check});

  auto* qual = app.add_subcommand("qualitative", "LimInf values and counterless strategies");
  add_model(qual);
  qual->add_option("--enum-cap", f.enum_cap, "Cap on enumerated counterless strategies (default 2^20)");
  entries.push_back({qual, cmd_qualitative});

  auto* bound = app.add_subcommand("bound", "Tail certificate and counter bound N");
  add_model(bound);
  add_pipeline(bound);
  entries.push_back({bound, cmd_bound});

  auto* approx = app.add_subcommand("approx", "Approximate termination value and strategies");
  add_model(approx);
  add_start(approx);
  add_pipeline(approx);
  entries.push_back({approx, cmd_approx});

  auto* oracle = app.add_subcommand("oracle", "Finite-horizon lower and upper bounds");
  add_model(oracle);
  add_start(oracle);
  oracle->add_option("--horizon", f.horizon, "Steps (default 200)")->check(CLI::NonNegativeNumber);
  oracle->add_option("--table-cap", f.table_cap, "Cap on |Q|*(counter+horizon+1)*horizon (default 5e7)");
  entries.push_back({oracle, cmd_oracle});

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo check of the computed strategies");
  add_model(sim);
  add_start(sim);
  add_pipeline(sim);
  sim->add_option("--horizon", f.horizon, "Steps per run (default 10000)")->check(CLI::NonNegativeNumber);
  sim->add_option("--runs", f.runs, "Number of runs (default 10000)");
  sim->add_option("--seed", f.seed, "Seed (default 0)");
  entries.push_back({sim, cmd_simulate});

  auto* example = app.add_subcommand("example", "Print a built-in model");
  example->add_option("--name", f.name, "fig2, fig2-no-st, biased-walk or idle-loop");
  entries.push_back({example, cmd_example});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    for (const auto& e : entries) {
      if (e.sub->parsed()) {
        std::ostringstream out;
        int code = e.run(f, out);
        std::cout << out.str();
        return code;
      }
    }
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "invalid model: " << d.rule << ": " << d.message << "\n";
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
