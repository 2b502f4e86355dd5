#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fonbw/cli.hpp"
#include "fonbw/compensate.hpp"
#include "fonbw/errors.hpp"
#include "fonbw/fracdiff.hpp"
#include "fonbw/identify.hpp"
#include "fonbw/io.hpp"
#include "fonbw/loops.hpp"
#include "fonbw/models.hpp"
#include "fonbw/signals.hpp"

namespace py = pybind11;
using namespace fonbw;

namespace {

// Parameter sets cross the boundary as JSON text; the Python side wraps them in dicts.
ModelParams parse_params(const std::string& kind, const std::string& text) {
  return model_params_from_json(model_kind_from_string(kind), json::parse(text));
}

Memory to_memory(std::optional<std::size_t> n) { return n ? Memory::samples(*n) : Memory::unbounded(); }

SimOptions sim_options(std::optional<std::size_t> memory, double guard) { return {to_memory(memory), guard}; }

py::array_t<double> as_array(std::span<const double> v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

CompensatorParams compensator_params(const std::string& kind, const std::string& text) {
  const ModelParams p = parse_params(kind, text);
  if (const auto* f = std::get_if<FonbwParams>(&p)) return *f;
  if (const auto* c = std::get_if<CbwGainParams>(&p)) return *c;
  if (const auto* z = std::get_if<ZhuParams>(&p)) return *z;
  throw InvalidArgument("compensator kind must be fonbw, cbw or zhu");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bouc-Wen family hysteresis models, GL fractional derivatives and DE identification";
  m.attr("__version__") = std::string(version());

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init([](double t0, double dt, std::vector<double> values, std::string unit) {
             return TimeSeries(t0, dt, std::move(values), std::move(unit));
           }),
           py::arg("t0"), py::arg("dt"), py::arg("values"), py::arg("unit") = "")
      .def_property_readonly("t0", &TimeSeries::t0)
      .def_property_readonly("dt", &TimeSeries::dt)
      .def_property_readonly("unit", &TimeSeries::unit)
      .def_property_readonly("values", [](const TimeSeries& s) { return as_array(s.values()); })
      .def_property_readonly("times", [](const TimeSeries& s) {
        std::vector<double> t(s.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = s.time(k);
        return as_array(t);
      })
      .def("time", &TimeSeries::time)
      .def("__len__", &TimeSeries::size)
      .def("__getitem__", [](const TimeSeries& s, std::size_t k) {
        if (k >= s.size()) throw py::index_error();
        return s[k];
      })
      .def("__repr__", [](const TimeSeries& s) {
        return "TimeSeries(t0=" + format_double(s.t0()) + ", dt=" + format_double(s.dt()) +
               ", n=" + std::to_string(s.size()) + ")";
      });

  m.def("gen_sine_offset", &gen_sine_offset, py::arg("amplitude"), py::arg("frequency"), py::arg("duration"),
        py::arg("dt") = kDefaultDt, py::arg("unit") = "V");
  m.def("gen_sweep", &gen_sweep, py::arg("duration") = 10.0, py::arg("dt") = kDefaultDt);
  m.def("gen_multifreq", &gen_multifreq, py::arg("duration"), py::arg("dt") = kDefaultDt);

  m.def(
      "gl_weights",
      [](double lambda, std::size_t p) {
        const GlWeightTable w(lambda, p);
        return as_array(w.weights());
      },
      py::arg("lam"), py::arg("p"));
  m.def(
      "gl_derivative",
      [](const TimeSeries& f, double lambda, std::optional<std::size_t> memory) {
        return gl_derivative(f, lambda, to_memory(memory));
      },
      py::arg("f"), py::arg("lam"), py::arg("memory") = py::none());

  m.def(
      "_simulate",
      [](const std::string& kind, const std::string& params, const TimeSeries& u, std::optional<std::size_t> memory,
         double guard) {
        const ModelParams p = parse_params(kind, params);
        py::gil_scoped_release release;
        return simulate(p, u, sim_options(memory, guard));
      },
      py::arg("kind"), py::arg("params"), py::arg("u"), py::arg("memory") = py::none(),
      py::arg("divergence_guard") = kDefaultDivergenceGuard);

  m.def("_normalize_cbw", [](const std::string& params) {
    return to_json(normalize_cbw(cbw_params_from_json(json::parse(params)))).dump();
  });
  m.def("_scale_cbw", [](const std::string& params, double c) {
    return to_json(scale_cbw(cbw_params_from_json(json::parse(params)), c)).dump();
  });

  m.def(
      "_loop_metrics",
      [](const TimeSeries& u, const TimeSeries& H, std::optional<std::size_t> period) {
        return to_json(loop_metrics(u, H, period)).dump();
      },
      py::arg("u"), py::arg("H"), py::arg("period_samples") = py::none());

  m.def("rms_error", &rms_error, py::arg("measured"), py::arg("model"));

  m.def("theta_names", [](const std::string& kind, std::size_t order) {
    return theta_names(model_kind_from_string(kind), order);
  }, py::arg("kind"), py::arg("poly_order") = 3);

  m.def(
      "_identify",
      [](const std::string& kind, const TimeSeries& u, const TimeSeries& H, std::vector<std::pair<double, double>> bounds,
         std::size_t population_size, std::size_t max_generations, std::uint64_t seed, std::size_t poly_order,
         std::optional<double> target, std::optional<std::size_t> memory, std::size_t threads) {
        IdentificationProblem problem(model_kind_from_string(kind), u, H, poly_order, sim_options(memory, kDefaultDivergenceGuard));
        DeConfig cfg;
        cfg.population_size = population_size;
        cfg.max_generations = max_generations;
        cfg.seed = seed;
        cfg.target_objective = target;
        cfg.threads = threads;
        for (const auto& [lo, hi] : bounds) cfg.bounds.push_back({lo, hi});
        IdentificationResult r;
        {
          py::gil_scoped_release release;
          r = identify(problem, cfg);
        }
        return to_json(r, problem.theta_names()).dump();
      },
      py::arg("kind"), py::arg("u"), py::arg("H"), py::arg("bounds"), py::arg("population_size") = 50,
      py::arg("max_generations") = 300, py::arg("seed") = 42, py::arg("poly_order") = 3,
      py::arg("target_objective") = py::none(), py::arg("memory") = py::none(), py::arg("threads") = 1);

  m.def(
      "_compensate",
      [](const std::string& kind, const std::string& params, const TimeSeries& H_d, std::size_t iterations,
         std::optional<std::size_t> memory) {
        const CompensatorParams p = compensator_params(kind, params);
        py::gil_scoped_release release;
        return compensate(H_d, p, {sim_options(memory, kDefaultDivergenceGuard), iterations});
      },
      py::arg("kind"), py::arg("params"), py::arg("H_d"), py::arg("fixed_point_iterations") = 0,
      py::arg("memory") = py::none());

  m.def(
      "_evaluate_cascade",
      [](const std::string& comp_kind, const std::string& comp_params, const std::string& plant_kind,
         const std::string& plant_params, const TimeSeries& H_d, std::size_t iterations,
         std::optional<std::size_t> memory) {
        const CompensatorParams c = compensator_params(comp_kind, comp_params);
        const ModelParams p = parse_params(plant_kind, plant_params);
        std::optional<CompensationReport> r;
        {
          py::gil_scoped_release release;
          r = evaluate_cascade(c, p, H_d, {sim_options(memory, kDefaultDivergenceGuard), iterations});
        }
        py::dict out;
        out["u_cmd"] = r->u_cmd;
        out["H_achieved"] = r->H_achieved;
        out["rms_tracking_error"] = r->rms_tracking_error;
        out["rms_input"] = r->rms_input;
        return out;
      },
      py::arg("compensator_kind"), py::arg("compensator_params"), py::arg("plant_kind"), py::arg("plant_params"),
      py::arg("H_d"), py::arg("fixed_point_iterations") = 0, py::arg("memory") = py::none());
}
