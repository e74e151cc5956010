#include "octerm/json_io.hpp"

namespace octerm {

namespace {

Json header(const char* kind) {
  Json j;
  j["schema"] = std::string("octerm/") + kind + "/" + kSchemaVersion;
  return j;
}

Json per_state(const OcSsg& model, const std::vector<Rational>& values) {
  Json j = Json::object();
  for (StateId q = 0; q < model.num_states(); ++q) j[model.name(q)] = to_json(values[q]);
  return j;
}

Json state_list(const OcSsg& model, const std::vector<StateId>& states) {
  Json j = Json::array();
  for (StateId q : states) j.push_back(model.name(q));
  return j;
}

Json config(const OcSsg& model, const Config& c) {
  return Json{{"state", model.name(c.state)}, {"counter", c.counter}};
}

Json choices(const OcSsg& model, Owner owner, const std::vector<std::optional<RuleId>>& choice) {
  Json j = Json::object();
  for (StateId q = 0; q < model.num_states(); ++q) {
    if (model.owner(q) != owner) continue;
    j[model.name(q)] = q < choice.size() && choice[q] ? Json(describe_rule(model, *choice[q])) : Json(nullptr);
  }
  return j;
}

}  // namespace

Json to_json(const Rational& value) { return value.str(); }

Json to_json(const std::vector<Diagnostic>& diagnostics) {
  Json j = header("check");
  j["ok"] = diagnostics.empty();
  Json list = Json::array();
  for (const auto& d : diagnostics) list.push_back({{"rule", d.rule}, {"message", d.message}});
  j["diagnostics"] = std::move(list);
  return j;
}

Json to_json(const OcSsg& model, const CounterlessStrategy& strategy) {
  return choices(model, strategy.owner, strategy.choice);
}

Json to_json(const OcSsg& model, const LiminfResult& result) {
  Json j = header("qualitative");
  j["nu"] = per_state(model, result.nu);
  j["T"] = state_list(model, result.T);
  j["D"] = state_list(model, result.D);
  j["sigma_star"] = to_json(model, result.sigma_star);
  j["pi_star"] = result.pi_star ? to_json(model, *result.pi_star) : Json(nullptr);
  return j;
}

Json to_json(const Certificate& cert) {
  Json j;
  j["x_bar"] = to_json(cert.x_bar);
  Json z = Json::array();
  for (const auto& v : cert.z_bar) z.push_back(to_json(v));
  j["z_bar"] = std::move(z);
  j["z_span"] = to_json(cert.z_span);
  j["c"] = {{"lo", decimal_string(cert.c.lo, 20, false)},
            {"hi", decimal_string(cert.c.hi, 20, true)},
            {"lo_exact", to_json(cert.c.lo)},
            {"hi_exact", to_json(cert.c.hi)}};
  j["h"] = cert.h;
  j["N"] = cert.N ? Json(*cert.N) : Json(nullptr);
  return j;
}

Json to_json(const DecayCertificate& cert) {
  Json j;
  j["rho"] = to_json(cert.rho);
  Json z = Json::array();
  for (const auto& v : cert.z) z.push_back(to_json(v));
  j["z"] = std::move(z);
  j["N"] = cert.N;
  return j;
}

Json to_json(const OcSsg& /*model*/, const TailBound& bound, const Rational& epsilon) {
  Json j = header("bound");
  j["epsilon"] = to_json(epsilon);
  j["N"] = bound.N;
  j["lp_states"] = bound.lp_states;
  j["used_rising"] = bound.used_rising;
  j["certificate"] = bound.certificate ? to_json(*bound.certificate) : Json(nullptr);
  j["decay"] = bound.decay ? to_json(*bound.decay) : Json(nullptr);
  j["height"] = bound.height();
  return j;
}

Json to_json(const OcSsg& model, const ModeSwitchStrategy& strategy) {
  Json j;
  j["owner"] = std::string(to_string(strategy.owner));
  j["semantics"] =
      "mode starts unswitched; on reaching a counter >= switch_level it switches for good; unswitched play at "
      "counter i uses below[i-1], switched play uses at_or_above";
  j["N"] = strategy.N;
  j["switch_level"] = strategy.switch_level;
  Json rows = Json::array();
  for (std::size_t i = 0; i < strategy.below.size(); ++i) {
    rows.push_back({{"counter", i + 1}, {"choices", choices(model, strategy.owner, strategy.below[i])}});
  }
  j["below"] = std::move(rows);
  j["at_or_above"] = choices(model, strategy.owner, strategy.at_or_above.choice);
  return j;
}

Json to_json(const OcSsg& model, const ApproxReport& report) {
  Json j = header("approx");
  j["epsilon"] = to_json(report.epsilon);
  j["start"] = config(model, report.start);
  j["value"] = to_json(report.value);
  j["value_decimal"] = decimal_string(report.value, 12, false);
  j["N"] = report.N;
  j["nu"] = per_state(model, report.nu);
  j["T"] = state_list(model, report.T);
  Json rows = Json::array();
  for (const auto& [i, vals] : report.values) rows.push_back({{"counter", i}, {"values", per_state(model, vals)}});
  j["values"] = std::move(rows);
  j["sigma_bar"] = to_json(model, report.sigma_bar);
  j["pi_bar"] = report.pi_bar ? to_json(model, *report.pi_bar) : Json(nullptr);
  j["certificate"] = report.certificate ? to_json(*report.certificate) : Json(nullptr);
  j["azuma_N"] = report.azuma_N;
  j["decay"] = report.decay ? to_json(*report.decay) : Json(nullptr);
  j["segment"] = {{"exact", report.exact_segment}};
  j["lp"] = {{"states", report.lp_states}, {"used_rising", report.used_rising}};
  return j;
}

Json to_json(const OcSsg& model, const Config& start, std::int64_t horizon, const BoundPair& bounds) {
  Json j = header("oracle");
  j["start"] = config(model, start);
  j["horizon"] = horizon;
  j["lower"] = to_json(bounds.lower);
  j["upper"] = to_json(bounds.upper);
  j["lower_decimal"] = decimal_string(bounds.lower, 12, false);
  j["upper_decimal"] = decimal_string(bounds.upper, 12, true);
  return j;
}

Json to_json(const OcSsg& model, const Config& start, const SimReport& report) {
  Json j = header("simulate");
  j["start"] = config(model, start);
  j["runs"] = report.runs;
  j["terminated"] = report.terminated;
  j["horizon"] = report.horizon;
  j["seed"] = report.seed;
  j["frequency"] = to_json(report.frequency);
  j["frequency_decimal"] = decimal_string(report.frequency, 12, false);
  return j;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace octerm
