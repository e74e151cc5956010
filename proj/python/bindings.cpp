#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "octerm/json_io.hpp"

namespace py = pybind11;
using namespace octerm;

namespace {

Rational epsilon_arg(const std::string& text) {
  Rational eps = Rational::parse(text);
  if (eps.sign() <= 0 || eps >= Rational(1)) throw InvalidArgument("epsilon must lie strictly between 0 and 1");
  return eps;
}

Config start_arg(const OcSsg& model, const std::string& state, std::int64_t counter) {
  auto q = model.find_state(state);
  if (!q) throw InvalidArgument("unknown state '" + state + "'");
  return {*q, counter};
}

std::optional<CounterlessStrategy> min_strategy(const OcSsg& m, std::uint64_t enum_cap) {
  if (!m.has_owner(Owner::Min)) return std::nullopt;
  return liminf_values_ssg(m, enum_cap).pi_star;
}

ApproxOptions options(std::uint64_t enum_cap, bool prune) {
  ApproxOptions o;
  o.enum_cap = enum_cap;
  o.prune = prune;
  return o;
}

}  // namespace

PYBIND11_MODULE(_octerm, m) {
  m.doc() = "Termination values of one-counter stochastic games (JSON-returning core bindings)";

  auto base = py::register_exception<Error>(m, "OctermError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<CapExceeded>(m, "CapExceeded", base.ptr());
  py::register_exception<NotRising>(m, "NotRising", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());

  py::class_<OcSsg>(m, "Model")
      .def_static("parse", &parse_ocssg, py::arg("text"))
      .def_static("builtin", [](const std::string& name) { return builtin_example(name); }, py::arg("name"))
      .def_static("builtin_names", &builtin_example_names)
      .def_property_readonly("num_states", &OcSsg::num_states)
      .def_property_readonly("num_rules", &OcSsg::num_rules)
      .def_property_readonly("state_names",
                             [](const OcSsg& g) {
                               std::vector<std::string> names;
                               for (StateId q = 0; q < g.num_states(); ++q) names.push_back(g.name(q));
                               return names;
                             })
      .def("to_text", [](const OcSsg& g) { return serialize(g); })
      .def("__eq__", [](const OcSsg& a, const OcSsg& b) { return a == b; })
      .def("__repr__", [](const OcSsg& g) {
        return "<Model with " + std::to_string(g.num_states()) + " states, " + std::to_string(g.num_rules()) +
               " rules>";
      });

  m.def(
      "check_json", [](const std::string& text) {
        std::vector<Diagnostic> diags;
        try {
          (void)parse_ocssg(text);
        } catch (const ValidationError& e) {
          diags = e.diagnostics();
        } catch (const ParseError& e) {
          diags.push_back({"parse", e.what()});
        }
        return dump(to_json(diags));
      },
      py::arg("text"));

  m.def(
      "qualitative_json", [](const OcSsg& g, std::uint64_t enum_cap) {
        py::gil_scoped_release nogil;
        LiminfResult r = g.has_owner(Owner::Min) ? liminf_values_ssg(g, enum_cap) : liminf_values_mdp(g, enum_cap);
        return dump(to_json(g, r));
      },
      py::arg("model"), py::arg("enum_cap") = kDefaultEnumCap);

  m.def(
      "bound_json", [](const OcSsg& g, const std::string& epsilon, std::uint64_t enum_cap, bool prune) {
        const Rational eps = epsilon_arg(epsilon);
        py::gil_scoped_release nogil;
        auto pi = min_strategy(g, enum_cap);
        TailBound tb = termination_tail_bound(g, pi ? &*pi : nullptr, eps, options(enum_cap, prune));
        return dump(to_json(g, tb, eps));
      },
      py::arg("model"), py::arg("epsilon"), py::arg("enum_cap") = kDefaultEnumCap, py::arg("prune") = true);

  m.def(
      "approx_json",
      [](const OcSsg& g, const std::string& state, std::int64_t counter, const std::string& epsilon,
         std::uint64_t enum_cap, bool prune) {
        const Config start = start_arg(g, state, counter);
        const Rational eps = epsilon_arg(epsilon);
        py::gil_scoped_release nogil;
        return dump(to_json(g, approximate_termination(g, start, eps, options(enum_cap, prune))));
      },
      py::arg("model"), py::arg("state"), py::arg("counter"), py::arg("epsilon"),
      py::arg("enum_cap") = kDefaultEnumCap, py::arg("prune") = true);

  m.def(
      "oracle_json",
      [](const OcSsg& g, const std::string& state, std::int64_t counter, std::int64_t horizon, std::uint64_t cap) {
        const Config start = start_arg(g, state, counter);
        py::gil_scoped_release nogil;
        return dump(to_json(g, start, horizon, finite_horizon_bounds(g, start, horizon, cap)));
      },
      py::arg("model"), py::arg("state"), py::arg("counter"), py::arg("horizon") = 200,
      py::arg("cap") = kDefaultOracleCap);

  m.def(
      "simulate_json",
      [](const OcSsg& g, const std::string& state, std::int64_t counter, const std::string& epsilon,
         std::int64_t horizon, std::uint64_t runs, std::uint64_t seed) {
        const Config start = start_arg(g, state, counter);
        const Rational eps = epsilon_arg(epsilon);
        py::gil_scoped_release nogil;
        ApproxReport r = approximate_termination(g, start, eps);
        SimReport s = simulate(g, &r.sigma_bar, r.pi_bar ? &*r.pi_bar : nullptr, start, horizon, runs, seed);
        return dump(to_json(g, start, s));
      },
      py::arg("model"), py::arg("state"), py::arg("counter"), py::arg("epsilon"), py::arg("horizon") = 10000,
      py::arg("runs") = 10000, py::arg("seed") = 0);
}
