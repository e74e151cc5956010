#include "octerm/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace octerm {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::string out = "invalid model:";
  for (const auto& d : diagnostics) out += "\n  " + d.message;
  return out;
}

std::string delta_text(int delta) {
  if (delta > 0) return "+" + std::to_string(delta);
  return std::to_string(delta);
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

std::string_view to_string(Owner owner) {
  switch (owner) {
    case Owner::Max: return "max";
    case Owner::Min: return "min";
    case Owner::Random: return "rand";
  }
  return "?";
}

OcSsg::OcSsg(std::vector<State> states, std::vector<Rule> rules)
    : states_(std::move(states)), rules_(std::move(rules)), outgoing_(states_.size()) {
  for (StateId s = 0; s < states_.size(); ++s) by_name_.emplace(states_[s].name, s);
  for (RuleId r = 0; r < rules_.size(); ++r) {
    const Rule& rule = rules_[r];
    if (rule.src >= states_.size() || rule.dst >= states_.size()) {
      throw InvalidArgument("rule " + std::to_string(r) + " references an undeclared state");
    }
    outgoing_[rule.src].push_back(r);
  }
}

std::optional<StateId> OcSsg::find_state(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<RuleId> OcSsg::find_rule(StateId src, int delta, StateId dst) const {
  for (RuleId r : outgoing_.at(src)) {
    if (rules_[r].delta == delta && rules_[r].dst == dst) return r;
  }
  return std::nullopt;
}

bool OcSsg::has_owner(Owner owner) const {
  return std::any_of(states_.begin(), states_.end(), [&](const State& s) { return s.owner == owner; });
}

std::vector<StateId> OcSsg::states_of(Owner owner) const {
  std::vector<StateId> out;
  for (StateId s = 0; s < states_.size(); ++s) {
    if (states_[s].owner == owner) out.push_back(s);
  }
  return out;
}

bool OcSsg::state_names_equal(const OcSsg& other) const {
  if (states_.size() != other.states_.size()) return false;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].name != other.states_[i].name || states_[i].owner != other.states_[i].owner) {
      return false;
    }
  }
  return true;
}

std::vector<Diagnostic> validate(const OcSsg& model) {
  std::vector<Diagnostic> out;
  if (model.num_states() == 0) out.push_back({"no-states", "model declares no states"});
  std::set<std::string> seen_names;
  for (const State& s : model.states()) {
    if (!seen_names.insert(s.name).second) {
      out.push_back({"duplicate-state", "state '" + s.name + "' is declared more than once"});
    }
  }
  std::set<std::tuple<StateId, int, StateId>> seen_rules;
  for (RuleId r = 0; r < model.num_rules(); ++r) {
    const Rule& rule = model.rule(r);
    const std::string where = "rule " + describe_rule(model, r);
    if (rule.delta < -1 || rule.delta > 1) {
      out.push_back({"delta-range", where + ": delta out of range"});
    }
    if (!seen_rules.emplace(rule.src, rule.delta, rule.dst).second) {
      out.push_back({"duplicate-rule", where + ": duplicate rule"});
    }
    const bool random = model.owner(rule.src) == Owner::Random;
    if (random && !rule.prob) {
      out.push_back({"missing-probability", where + ": probability required for rand state"});
    } else if (!random && rule.prob) {
      out.push_back({"unexpected-probability", where + ": probability given for non-rand state"});
    } else if (rule.prob && rule.prob->sign() <= 0) {
      out.push_back({"probability-positive", where + ": probability must be positive"});
    }
  }
  for (StateId s = 0; s < model.num_states(); ++s) {
    const auto& out_rules = model.outgoing(s);
    if (out_rules.empty()) {
      out.push_back({"no-outgoing-rule", "state '" + model.name(s) + "' has no outgoing rule"});
      continue;
    }
    if (model.owner(s) != Owner::Random) continue;
    Rational sum(0);
    bool complete = true;
    for (RuleId r : out_rules) {
      if (model.rule(r).prob) {
        sum += *model.rule(r).prob;
      } else {
        complete = false;
      }
    }
    if (complete && sum != Rational(1)) {
      out.push_back({"probability-sum", "state '" + model.name(s) + "': probabilities sum to " +
                                            sum.str() + " \xE2\x89\xA0 1"});
    }
  }
  return out;
}

void require_valid(const OcSsg& model) {
  auto diagnostics = validate(model);
  if (!diagnostics.empty()) throw ValidationError(std::move(diagnostics));
}

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

struct PendingRule {
  std::string src;
  int delta;
  std::string dst;
  std::optional<Rational> prob;
  std::size_t line;
  std::size_t src_column;
  std::size_t dst_column;
};

int parse_delta(const Token& tok, std::size_t line) {
  std::string_view t = tok.text;
  std::string_view digits = t;
  if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) digits.remove_prefix(1);
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ParseError(line, tok.column, "expected counter delta (+1, 0 or -1), got '" + std::string(t) + "'");
  }
  if (digits.size() > 1 && digits.find_first_not_of('0') != std::string_view::npos) {
    throw ParseError(line, tok.column, "delta out of range");
  }
  int magnitude = digits.find_first_not_of('0') == std::string_view::npos ? 0 : digits.back() - '0';
  if (magnitude > 1) throw ParseError(line, tok.column, "delta out of range");
  return t.front() == '-' ? -magnitude : magnitude;
}

}  // namespace

OcSsg parse_ocssg(std::string_view text) {
  std::vector<State> states;
  std::map<std::string, StateId, std::less<>> index;
  std::vector<PendingRule> pending;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const Token& kw = tokens[0];
    if (kw.text == "state") {
      if (tokens.size() != 3) {
        throw ParseError(line_no, kw.column, "expected 'state <name> max|min|rand'");
      }
      Owner owner;
      if (tokens[2].text == "max") {
        owner = Owner::Max;
      } else if (tokens[2].text == "min") {
        owner = Owner::Min;
      } else if (tokens[2].text == "rand") {
        owner = Owner::Random;
      } else {
        throw ParseError(line_no, tokens[2].column,
                         "unknown owner '" + std::string(tokens[2].text) + "' (expected max, min or rand)");
      }
      std::string name(tokens[1].text);
      if (index.count(name)) {
        throw ParseError(line_no, tokens[1].column, "state '" + name + "' declared twice");
      }
      index.emplace(name, states.size());
      states.push_back({std::move(name), owner});
    } else if (kw.text == "rule") {
      if (tokens.size() != 4 && tokens.size() != 5) {
        throw ParseError(line_no, kw.column, "expected 'rule <src> <+1|0|-1> <dst> [<num>/<den>]'");
      }
      PendingRule r;
      r.src = std::string(tokens[1].text);
      r.delta = parse_delta(tokens[2], line_no);
      r.dst = std::string(tokens[3].text);
      r.line = line_no;
      r.src_column = tokens[1].column;
      r.dst_column = tokens[3].column;
      if (tokens.size() == 5) {
        try {
          r.prob = Rational::parse(tokens[4].text);
        } catch (const std::exception& e) {
          throw ParseError(line_no, tokens[4].column, e.what());
        }
      }
      pending.push_back(std::move(r));
    } else {
      throw ParseError(line_no, kw.column, "unknown directive '" + std::string(kw.text) + "'");
    }
    if (end == text.size()) break;
  }

  std::vector<Diagnostic> dangling;
  std::vector<Rule> rules;
  for (const auto& p : pending) {
    auto src = index.find(p.src);
    auto dst = index.find(p.dst);
    if (src == index.end()) {
      dangling.push_back({"dangling-state", "line " + std::to_string(p.line) + ": rule source '" + p.src +
                                                "' is not a declared state"});
    }
    if (dst == index.end()) {
      dangling.push_back({"dangling-state", "line " + std::to_string(p.line) + ": rule target '" + p.dst +
                                                "' is not a declared state"});
    }
    if (src != index.end() && dst != index.end()) {
      rules.push_back({src->second, p.delta, dst->second, p.prob});
    }
  }
  if (!dangling.empty()) throw ValidationError(std::move(dangling));

  OcSsg model(std::move(states), std::move(rules));
  require_valid(model);
  return model;
}

std::string describe_rule(const OcSsg& model, RuleId id) {
  const Rule& r = model.rule(id);
  std::string out = model.name(r.src) + " " + delta_text(r.delta) + " " + model.name(r.dst);
  if (r.prob) out += " " + r.prob->str();
  return out;
}

std::string serialize(const OcSsg& model) {
  std::ostringstream os;
  for (const State& s : model.states()) os << "state " << s.name << " " << to_string(s.owner) << "\n";
  for (RuleId r = 0; r < model.num_rules(); ++r) os << "rule " << describe_rule(model, r) << "\n";
  return os.str();
}

namespace {

OcSsg make_fig2(bool with_st) {
  // s: Max; r, t, g, b: Random.
  std::vector<State> states = {
      {"s", Owner::Max}, {"r", Owner::Random}, {"t", Owner::Random}, {"g", Owner::Random}, {"b", Owner::Random}};
  std::vector<Rule> rules;
  rules.push_back({0, 0, 1, std::nullopt});
  if (with_st) rules.push_back({0, 0, 2, std::nullopt});
  rules.push_back({1, +1, 0, Rational(2, 3)});
  rules.push_back({1, -1, 0, Rational(1, 3)});
  rules.push_back({2, 0, 3, Rational(1, 2)});
  rules.push_back({2, 0, 4, Rational(1, 2)});
  rules.push_back({3, -1, 3, Rational(1)});
  rules.push_back({4, +1, 4, Rational(1)});
  return OcSsg(std::move(states), std::move(rules));
}

}  // namespace

std::vector<std::string> builtin_example_names() {
  return {"fig2", "fig2-no-st", "biased-walk", "idle-loop"};
}

OcSsg builtin_example(std::string_view name) {
  if (name == "fig2") return make_fig2(true);
  if (name == "fig2-no-st") return make_fig2(false);
  if (name == "biased-walk") {
    return OcSsg({{"q", Owner::Random}}, {{0, +1, 0, Rational(2, 3)}, {0, -1, 0, Rational(1, 3)}});
  }
  if (name == "idle-loop") {
    return OcSsg({{"q", Owner::Max}}, {{0, 0, 0, std::nullopt}});
  }
  throw InvalidArgument("unknown example '" + std::string(name) + "'");
}

void require_total(const OcSsg& model, const CounterlessStrategy& strategy) {
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (model.owner(s) != strategy.owner) continue;
    auto c = strategy.at(s);
    if (!c) throw InvalidArgument("strategy has no choice for state '" + model.name(s) + "'");
    if (*c >= model.num_rules() || model.rule(*c).src != s) {
      throw InvalidArgument("strategy picks a rule not leaving state '" + model.name(s) + "'");
    }
  }
}

}  // namespace octerm
