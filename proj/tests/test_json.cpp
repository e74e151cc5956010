#include "doctest.h"

#include "octerm/json_io.hpp"

using namespace octerm;

TEST_CASE("rationals serialize as num/den strings") {
  CHECK(to_json(Rational(3, 4)) == Json("3/4"));
  CHECK(to_json(Rational(2)) == Json("2/1"));
  CHECK(to_json(Rational(-1, 3)) == Json("-1/3"));
}

TEST_CASE("check documents") {
  Json ok = to_json(std::vector<Diagnostic>{});
  CHECK(ok["schema"] == "octerm/check/1");
  CHECK(ok["ok"] == true);
  Json bad = to_json(std::vector<Diagnostic>{{"probability-sum", "sum"}});
  CHECK(bad["ok"] == false);
  CHECK(bad["diagnostics"].size() == 1);
}

TEST_CASE("approx report document") {
  OcSsg fig2 = builtin_example("fig2");
  ApproxReport r = approximate_termination(fig2, {0, 2}, Rational(1, 10));
  Json j = to_json(fig2, r);
  CHECK(j["schema"] == "octerm/approx/1");
  CHECK(j["start"]["state"] == "s");
  CHECK(j["value"] == r.value.str());
  CHECK(j["nu"]["g"] == "1/1");
  CHECK(j["T"] == Json::array({"g"}));
  CHECK(j["sigma_bar"]["owner"] == "max");
  CHECK(j["sigma_bar"]["at_or_above"]["s"] == "s 0 t");
  CHECK(j["sigma_bar"]["below"][0]["choices"]["s"] == "s 0 r");
  CHECK(j["pi_bar"].is_null());
  CHECK(j["certificate"]["c"]["lo"].is_string());
  CHECK_FALSE(j.contains("timings"));
  // identical inputs give identical text
  ApproxReport again = approximate_termination(fig2, {0, 2}, Rational(1, 10));
  CHECK(dump(j) == dump(to_json(fig2, again)));
}

TEST_CASE("oracle and simulation documents") {
  OcSsg bw = builtin_example("biased-walk");
  Json b = to_json(bw, Config{0, 1}, 25, finite_horizon_bounds(bw, {0, 1}, 25));
  CHECK(b["lower"] == "419930909347/847288609443");
  CHECK(b["horizon"] == 25);
  SimReport s = simulate(bw, nullptr, nullptr, {0, 1}, 100, 10, 7);
  Json sj = to_json(bw, Config{0, 1}, s);
  CHECK(sj["runs"] == 10);
  CHECK(sj["seed"] == 7);
  CHECK(sj["frequency"] == s.frequency.str());
}

TEST_CASE("qualitative and bound documents") {
  OcSsg fig2 = builtin_example("fig2");
  Json q = to_json(fig2, liminf_values_mdp(fig2));
  CHECK(q["nu"]["s"] == "1/2");
  CHECK(q["D"] == Json::array({"g"}));
  CHECK(q["pi_star"].is_null());
  TailBound tb = termination_tail_bound(fig2, nullptr, Rational(1, 8));
  Json bj = to_json(fig2, tb, Rational(1, 8));
  CHECK(bj["N"] == tb.N);
  CHECK(bj["certificate"]["N"] == tb.N);
  CHECK(bj["certificate"]["h"] == tb.certificate->h);
}

TEST_CASE("directed decimal rendering") {
  CHECK(decimal_string(Rational(73, 100), 12, false) == "0.73");
  CHECK(decimal_string(Rational(1, 3), 5, false) == "0.33333");
  CHECK(decimal_string(Rational(1, 3), 5, true) == "0.33334");
  CHECK(decimal_string(Rational(-1, 3), 3, false) == "-0.334");
  CHECK(decimal_string(Rational(12345), 2, true) == "13000");
  CHECK(decimal_string(Rational(2, 3), 1, false) == "0.6");
  CHECK(decimal_string(Rational(1, 1000), 4, false) == "0.001");
  CHECK(decimal_string(Rational(0), 4, true) == "0");
}
