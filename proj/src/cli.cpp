#include "fonbw/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "fonbw/errors.hpp"
#include "fonbw/fracdiff.hpp"
#include "fonbw/loops.hpp"

#ifndef FONBW_VERSION
#define FONBW_VERSION "0.0.0"
#endif

namespace fonbw {

namespace fs = std::filesystem;

std::string_view version() noexcept { return FONBW_VERSION; }

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Identify: return "identify";
    case Command::Compensate: return "compensate";
    case Command::Fracdiff: return "fracdiff";
    case Command::Normalize: return "normalize";
    case Command::Metrics: return "metrics";
  }
  return "?";
}

Command command_from_string(std::string_view name) {
  for (Command c : {Command::Simulate, Command::Identify, Command::Compensate, Command::Fracdiff, Command::Normalize,
                    Command::Metrics})
    if (to_string(c) == name) return c;
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

// ------------------------------------------------------------ config parsing

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& section) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
}

double num(const json& j, const char* key, const std::string& section) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("section '" + section + "' needs '" + key + "'");
  if (!it->is_number()) throw ConfigError("'" + section + "." + key + "' must be a number");
  return it->get<double>();
}

std::optional<double> opt_num(const json& j, const char* key, const std::string& section) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return num(j, key, section);
}

std::size_t count(const json& j, const char* key, const std::string& section, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ConfigError("'" + section + "." + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

std::string str(const json& j, const char* key, const std::string& section) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError("section '" + section + "' needs '" + key + "'");
  if (!it->is_string()) throw ConfigError("'" + section + "." + key + "' must be a string");
  return it->get<std::string>();
}

ModelKind parse_kind(const json& j, const char* key, const std::string& section) {
  try {
    return model_kind_from_string(str(j, key, section));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

template <class F>
auto with_config_errors(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

Memory parse_memory(const json& v) {
  if (v.is_string()) return memory_from_string(v.get<std::string>());
  if (v.is_number_unsigned() && v.get<std::size_t>() > 0) return Memory::samples(v.get<std::size_t>());
  throw ConfigError("solver.memory must be a positive sample count or \"unbounded\"");
}

SignalSpec parse_signal(const json& j, const fs::path& base) {
  allow_keys(j, {"generator", "csv", "amplitude", "frequency", "duration"}, "signal");
  const bool has_gen = j.contains("generator");
  const bool has_csv = j.contains("csv");
  if (has_gen == has_csv) throw ConfigError("signal needs exactly one of 'generator' or 'csv'");
  SignalSpec s;
  if (has_csv) {
    if (j.size() != 1) throw ConfigError("a CSV signal takes no generator arguments");
    fs::path p = str(j, "csv", "signal");
    if (p.is_relative()) p = base / p;
    if (!fs::is_regular_file(p)) throw ConfigError("signal file not found: " + p.string());
    s.csv = p;
    return s;
  }
  s.generator = str(j, "generator", "signal");
  if (s.generator == "sine_offset") {
    s.amplitude = num(j, "amplitude", "signal");
    s.frequency = num(j, "frequency", "signal");
    s.duration = num(j, "duration", "signal");
    if (!(s.amplitude >= 0.0 && s.frequency > 0.0 && s.duration > 0.0))
      throw ConfigError("sine_offset needs amplitude >= 0, frequency > 0 and duration > 0");
  } else if (s.generator == "sweep" || s.generator == "multifreq") {
    if (j.contains("amplitude") || j.contains("frequency"))
      throw ConfigError("generator '" + s.generator + "' takes only 'duration'");
    s.duration = opt_num(j, "duration", "signal").value_or(10.0);
    if (!(s.duration > 0.0)) throw ConfigError("signal.duration must be positive");
  } else {
    throw ConfigError("unknown generator '" + s.generator + "' (sine_offset, sweep, multifreq)");
  }
  return s;
}

IdentifySpec parse_identify(const json& j) {
  allow_keys(j,
             {"poly_order", "population_size", "max_generations", "bounds", "bounds_scale", "f_init", "cr_init",
              "tau1", "tau2", "f_lo", "f_hi", "target_objective", "threads", "max_objective"},
             "identify");
  IdentifySpec s;
  const std::string sec = "identify";
  s.poly_order = count(j, "poly_order", sec, 3);
  s.de.population_size = count(j, "population_size", sec, s.de.population_size);
  s.de.max_generations = count(j, "max_generations", sec, s.de.max_generations);
  s.de.f_init = opt_num(j, "f_init", sec).value_or(s.de.f_init);
  s.de.cr_init = opt_num(j, "cr_init", sec).value_or(s.de.cr_init);
  s.de.tau1 = opt_num(j, "tau1", sec).value_or(s.de.tau1);
  s.de.tau2 = opt_num(j, "tau2", sec).value_or(s.de.tau2);
  s.de.f_lo = opt_num(j, "f_lo", sec).value_or(s.de.f_lo);
  s.de.f_hi = opt_num(j, "f_hi", sec).value_or(s.de.f_hi);
  s.de.target_objective = opt_num(j, "target_objective", sec);
  s.de.threads = count(j, "threads", sec, 1);
  if (s.de.threads == 0) s.de.threads = std::max(1u, std::thread::hardware_concurrency());
  s.max_objective = opt_num(j, "max_objective", sec);

  const bool has_bounds = j.contains("bounds");
  const bool has_scale = j.contains("bounds_scale");
  if (has_bounds == has_scale) throw ConfigError("identify needs exactly one of 'bounds' or 'bounds_scale'");
  if (has_bounds) {
    if (!j.at("bounds").is_object()) throw ConfigError("identify.bounds must map parameter names to [lo, hi]");
    s.explicit_bounds = j.at("bounds");
  } else {
    const json& b = j.at("bounds_scale");
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      throw ConfigError("identify.bounds_scale must be [lo, hi]");
    s.bounds_scale = std::pair{b[0].get<double>(), b[1].get<double>()};
    if (!(s.bounds_scale->first > 0.0 && s.bounds_scale->first < s.bounds_scale->second))
      throw ConfigError("identify.bounds_scale needs 0 < lo < hi");
  }
  return s;
}

CompensateSpec parse_compensate(const json& j) {
  allow_keys(j, {"model", "params", "fixed_point_iterations"}, "compensate");
  CompensateSpec s;
  const ModelKind kind = parse_kind(j, "model", "compensate");
  if (!j.contains("params")) throw ConfigError("section 'compensate' needs 'params'");
  const ModelParams p = model_params_from_json(kind, j.at("params"));
  switch (kind) {
    case ModelKind::Fonbw: s.params = std::get<FonbwParams>(p); break;
    case ModelKind::Cbw: s.params = std::get<CbwGainParams>(p); break;
    case ModelKind::Zhu: s.params = std::get<ZhuParams>(p); break;
    default: throw ConfigError("compensate.model must be fonbw, cbw or zhu");
  }
  s.fixed_point_iterations = count(j, "fixed_point_iterations", "compensate", 0);
  if (s.fixed_point_iterations > 10) throw ConfigError("compensate.fixed_point_iterations is at most 10");
  return s;
}

}  // namespace

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  allow_keys(doc,
             {"command", "model", "params", "signal", "solver", "output", "seed", "identify", "compensate",
              "fracdiff", "metrics", "normalize"},
             "top level");
  RunConfig cfg;
  cfg.document = doc;
  if (doc.contains("command")) cfg.command = command_from_string(str(doc, "command", "top level"));

  if (doc.contains("model")) cfg.model_kind = parse_kind(doc, "model", "top level");
  if (doc.contains("params")) {
    if (!cfg.model_kind) throw ConfigError("'params' needs a 'model' kind");
    cfg.params = model_params_from_json(*cfg.model_kind, doc.at("params"));
    with_config_errors([&] { std::visit([](const auto& p) { p.validate(); }, *cfg.params); });
  }

  if (doc.contains("signal")) cfg.signal = parse_signal(doc.at("signal"), base_dir);

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    allow_keys(s, {"dt", "memory", "divergence_guard"}, "solver");
    cfg.solver.dt = opt_num(s, "dt", "solver");
    if (cfg.solver.dt && !(*cfg.solver.dt > 0.0 && std::isfinite(*cfg.solver.dt)))
      throw ConfigError("solver.dt must be positive");
    if (s.contains("memory")) cfg.solver.memory = parse_memory(s.at("memory"));
    cfg.solver.divergence_guard = opt_num(s, "divergence_guard", "solver").value_or(kDefaultDivergenceGuard);
    if (!(cfg.solver.divergence_guard > 0.0)) throw ConfigError("solver.divergence_guard must be positive");
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    allow_keys(o, {"dir", "plot_data"}, "output");
    if (o.contains("dir")) {
      fs::path d = str(o, "dir", "output");
      cfg.output_dir = d.is_relative() ? base_dir / d : d;
    } else {
      cfg.output_dir = base_dir / "out";
    }
    if (o.contains("plot_data")) {
      if (!o.at("plot_data").is_boolean()) throw ConfigError("output.plot_data must be true or false");
      cfg.plot_data = o.at("plot_data").get<bool>();
    }
  } else {
    cfg.output_dir = base_dir / "out";
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("identify")) cfg.identify = parse_identify(doc.at("identify"));
  if (doc.contains("compensate")) cfg.compensate = parse_compensate(doc.at("compensate"));
  if (doc.contains("fracdiff")) {
    allow_keys(doc.at("fracdiff"), {"lambda"}, "fracdiff");
    cfg.fracdiff_lambda = num(doc.at("fracdiff"), "lambda", "fracdiff");
    if (!(cfg.fracdiff_lambda > 0.0 && cfg.fracdiff_lambda <= 1.0)) throw ConfigError("fracdiff.lambda must lie in (0, 1]");
  }
  if (doc.contains("metrics")) {
    allow_keys(doc.at("metrics"), {"period_samples"}, "metrics");
    if (doc.at("metrics").contains("period_samples"))
      cfg.period_samples = count(doc.at("metrics"), "period_samples", "metrics", 0);
  }
  if (doc.contains("normalize")) {
    allow_keys(doc.at("normalize"), {"scale"}, "normalize");
    cfg.normalize_scale = opt_num(doc.at("normalize"), "scale", "normalize").value_or(1.0);
    if (!(cfg.normalize_scale > 0.0)) throw ConfigError("normalize.scale must be positive");
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_run_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.command) {
    cfg.command = *o.command;
    cfg.document["command"] = std::string(to_string(*o.command));
  }
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.document["seed"] = *o.seed;
  }
  if (o.out) {
    cfg.output_dir = *o.out;
    cfg.document["output"]["dir"] = o.out->string();
  }
  if (o.dt) {
    if (!(*o.dt > 0.0 && std::isfinite(*o.dt))) throw ConfigError("--dt must be positive");
    cfg.solver.dt = *o.dt;
    cfg.document["solver"]["dt"] = *o.dt;
  }
  if (o.memory) {
    cfg.solver.memory = *o.memory;
    cfg.document["solver"]["memory"] = memory_to_string(*o.memory);
  }
}

// ------------------------------------------------------------------ running

namespace {

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  json report;
  json artifacts = json::array();

  void wrote(const fs::path& p) {
    artifacts.push_back(p.filename().string());
    log << "fonbw: wrote " << p.string() << '\n';
  }
};

const ModelParams& require_params(const RunConfig& cfg) {
  if (!cfg.params) throw ConfigError("command '" + std::string(to_string(cfg.command)) + "' needs 'model' and 'params'");
  return *cfg.params;
}

SignalPair load_signal_from(const RunConfig& cfg) {
  if (!cfg.signal) throw ConfigError("command '" + std::string(to_string(cfg.command)) + "' needs a 'signal' section");
  const SignalSpec& s = *cfg.signal;
  if (s.from_csv()) {
    SignalPair pair = load_csv(s.csv);
    if (cfg.solver.dt && std::abs(*cfg.solver.dt - pair.u.dt()) > 1e-9 * pair.u.dt())
      throw DataError("solver dt differs from the CSV time step " + format_double(pair.u.dt()));
    return pair;
  }
  const double dt = cfg.solver.dt.value_or(kDefaultDt);
  return with_config_errors([&]() -> SignalPair {
    if (s.generator == "sine_offset") return {gen_sine_offset(s.amplitude, s.frequency, s.duration, dt), std::nullopt};
    if (s.generator == "sweep") return {gen_sweep(s.duration, dt), std::nullopt};
    return {gen_multifreq(s.duration, dt), std::nullopt};
  });
}

SignalPair load_signal(Context& ctx) {
  SignalPair sig = load_signal_from(ctx.cfg);
  ctx.report["dt"] = sig.u.dt();
  ctx.report["samples"] = sig.u.size();
  return sig;
}

/// Measured output from the CSV, or synthesized from the configured parameters.
TimeSeries output_for(const RunConfig& cfg, const SignalPair& sig) {
  if (sig.H) return *sig.H;
  if (!cfg.params) throw DataError("signal has no H column and no parameters are given to synthesize it");
  return simulate(*cfg.params, sig.u, cfg.solver.sim());
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_loops(Context& ctx, const TimeSeries& u, const TimeSeries& H) {
  const fs::path path = ctx.cfg.output_dir / "loops.csv";
  const auto rate = sample_rate(u);
  std::string out = "period,t,u,H,branch\n";
  std::size_t index = 0;
  for (const PeriodSpan& p : full_periods(u)) {
    for (std::size_t k = p.begin; k <= p.end; ++k) {
      out += std::to_string(index) + ',' + format_double(u.time(k)) + ',' + format_double(u[k]) + ',' +
             format_double(H[k]) + ',' + (rate[k] >= 0.0 ? "ascending" : "descending") + '\n';
    }
    ++index;
  }
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << out;
  ctx.wrote(path);
}

json metrics_or_null(const TimeSeries& u, const TimeSeries& H, std::optional<std::size_t> period) {
  try {
    return to_json(loop_metrics(u, H, period));
  } catch (const InvalidArgument&) {
    return nullptr;
  }
}

void run_simulate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams& p = require_params(cfg);
  const SignalPair sig = load_signal(ctx);
  const TimeSeries H = simulate(p, sig.u, cfg.solver.sim());
  const fs::path path = cfg.output_dir / "simulation.csv";
  save_csv(path, sig.u, &H);
  ctx.wrote(path);
  ctx.report["results"] = {{"samples", H.size()},
                           {"output_min", H.min()},
                           {"output_max", H.max()},
                           {"loop_metrics", metrics_or_null(sig.u, H, cfg.period_samples)}};
  if (cfg.plot_data) write_loops(ctx, sig.u, H);
}

std::vector<ParamBounds> resolve_bounds(const RunConfig& cfg, const IdentifySpec& spec,
                                        const std::vector<std::string>& names) {
  std::vector<ParamBounds> bounds;
  if (spec.bounds_scale) {
    if (!cfg.params) throw ConfigError("identify.bounds_scale needs reference 'params'");
    const std::vector<double> ref = theta_from_params(*cfg.params);
    if (ref.size() != names.size())
      throw ConfigError("reference params do not match the identified parameter list (check poly_order)");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const double a = ref[i] * spec.bounds_scale->first;
      const double b = ref[i] * spec.bounds_scale->second;
      if (a == b) throw ConfigError("cannot scale bounds around zero-valued parameter '" + names[i] + "'");
      bounds.push_back({std::min(a, b), std::max(a, b)});
    }
    return bounds;
  }
  for (const auto& [key, _] : spec.explicit_bounds.items())
    if (std::find(names.begin(), names.end(), key) == names.end())
      throw ConfigError("identify.bounds names unknown parameter '" + key + "'");
  for (const auto& name : names) {
    if (!spec.explicit_bounds.contains(name)) throw ConfigError("identify.bounds is missing '" + name + "'");
    const json& b = spec.explicit_bounds.at(name);
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      throw ConfigError("identify.bounds." + name + " must be [lo, hi]");
    bounds.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  return bounds;
}

void run_identify(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.identify) throw ConfigError("command 'identify' needs an 'identify' section");
  if (!cfg.model_kind) throw ConfigError("command 'identify' needs a 'model' kind");
  const IdentifySpec& spec = *cfg.identify;
  const SignalPair sig = load_signal(ctx);
  const TimeSeries H = output_for(cfg, sig);

  const IdentificationProblem problem = with_config_errors(
      [&] { return IdentificationProblem(*cfg.model_kind, sig.u, H, spec.poly_order, cfg.solver.sim()); });
  const auto names = problem.theta_names();
  DeConfig de = spec.de;
  de.seed = cfg.seed;
  de.bounds = resolve_bounds(cfg, spec, names);
  with_config_errors([&] { de.validate(names.size()); });

  ctx.log << "fonbw: identifying " << names.size() << " parameters, population " << de.population_size << '\n';
  const IdentificationResult res = identify(problem, de);
  const ModelParams best = params_from_theta(*cfg.model_kind, res.best_theta, spec.poly_order);

  const bool usable = res.best_objective < kPenaltyObjective;
  const bool accepted = usable && (!spec.max_objective || res.best_objective <= *spec.max_objective);
  ctx.report["de"] = to_json(de, names);
  ctx.report["results"] = to_json(res, names);
  ctx.report["results"]["best_params"] = to_json(best);
  ctx.report["results"]["output_range"] = H.range();
  ctx.report["results"]["status"] = accepted ? "ok" : "failed";

  if (usable) {
    const TimeSeries fit = simulate(best, sig.u, cfg.solver.sim());
    const fs::path path = cfg.output_dir / "fit.csv";
    save_columns(path, sig.u, {"u", "H", "H_fit"},
                 {{sig.u.values().begin(), sig.u.values().end()},
                  {H.values().begin(), H.values().end()},
                  {fit.values().begin(), fit.values().end()}});
    ctx.wrote(path);
  }
  if (!usable) throw IdentificationError("no candidate produced a finite simulation");
  if (!accepted)
    throw IdentificationError("best objective " + format_double(res.best_objective) + " exceeds identify.max_objective");
}

void run_compensate(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.compensate) throw ConfigError("command 'compensate' needs a 'compensate' section");
  const SignalPair sig = load_signal(ctx);
  const TimeSeries& H_d = sig.H ? *sig.H : sig.u;
  CompensatorOptions opts{cfg.solver.sim(), cfg.compensate->fixed_point_iterations};

  ctx.report["compensator"] = std::visit([](const auto& q) { return to_json(q); }, cfg.compensate->params);
  const fs::path path = cfg.output_dir / "command.csv";
  std::vector<std::string> names{"u", "H_d"};
  std::vector<std::vector<double>> cols;
  if (cfg.params) {
    const CompensationReport rep = with_config_errors([&] { return evaluate_cascade(cfg.compensate->params, *cfg.params, H_d, opts); });
    names.push_back("H");
    cols = {{rep.u_cmd.values().begin(), rep.u_cmd.values().end()},
            {H_d.values().begin(), H_d.values().end()},
            {rep.H_achieved.values().begin(), rep.H_achieved.values().end()}};
    ctx.report["results"] = {{"rms_tracking_error", rep.rms_tracking_error},
                             {"rms_input", rep.rms_input},
                             {"reference_range", H_d.range()}};
  } else {
    const TimeSeries u = with_config_errors([&] { return compensate(H_d, cfg.compensate->params, opts); });
    cols = {{u.values().begin(), u.values().end()}, {H_d.values().begin(), H_d.values().end()}};
    ctx.report["results"] = {{"rms_input", rms_error(u, u.with_values(std::vector<double>(u.size(), 0.0)))},
                             {"reference_range", H_d.range()}};
  }
  save_columns(path, H_d, names, cols);
  ctx.wrote(path);
}

void run_fracdiff(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SignalPair sig = load_signal(ctx);
  const TimeSeries d = gl_derivative(sig.u, cfg.fracdiff_lambda, cfg.solver.memory);
  const fs::path path = cfg.output_dir / "fracdiff.csv";
  save_columns(path, sig.u, {"u", "D"},
               {{sig.u.values().begin(), sig.u.values().end()}, {d.values().begin(), d.values().end()}});
  ctx.wrote(path);
  ctx.report["results"] = {{"lambda", cfg.fracdiff_lambda}, {"samples", d.size()}};
}

CbwParams classic_form(const ModelParams& p) {
  if (const auto* c = std::get_if<CbwGainParams>(&p)) {
    const double k = c->k_a + c->k_b;
    if (k == 0.0) throw ConfigError("normalize needs k_a + k_b != 0");
    return CbwParams{c->k_a / k, k, c->D, c->A, c->beta, c->gamma, c->n, c->h_init};
  }
  throw ConfigError("command 'normalize' needs a CBW parameter set");
}

void run_normalize(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const CbwParams cbw = classic_form(require_params(cfg));
  const CbwParams scaled = with_config_errors([&] { return scale_cbw(cbw, cfg.normalize_scale); });
  const NbwParams nbw = with_config_errors([&] { return normalize_cbw(scaled); });
  ctx.report["results"] = {{"scaled", to_json(scaled)}, {"h0", cbw_h0(scaled)}, {"normalized", to_json(nbw)}};
  if (cfg.signal) {
    const SignalPair sig = load_signal(ctx);
    const TimeSeries a = simulate_cbw(cbw, sig.u, cfg.solver.sim());
    const TimeSeries b = simulate_nbw(nbw, sig.u, cfg.solver.sim());
    double diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
    ctx.report["results"]["max_abs_difference"] = diff;
    ctx.report["results"]["output_range"] = a.range();
    const fs::path path = cfg.output_dir / "simulation.csv";
    save_columns(path, sig.u, {"u", "H_cbw", "H_nbw"},
                 {{sig.u.values().begin(), sig.u.values().end()},
                  {a.values().begin(), a.values().end()},
                  {b.values().begin(), b.values().end()}});
    ctx.wrote(path);
  }
}

void run_metrics(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const SignalPair sig = load_signal(ctx);
  const TimeSeries H = output_for(cfg, sig);
  LoopMetrics m;
  try {
    m = loop_metrics(sig.u, H, cfg.period_samples);
  } catch (const InvalidArgument& e) {
    throw DataError(e.what());
  }
  ctx.report["results"] = to_json(m);
  if (cfg.plot_data) write_loops(ctx, sig.u, H);
}

}  // namespace

json execute(const RunConfig& cfg, std::ostream& log) {
  Context ctx{cfg, log, json::object()};
  ctx.report["version"] = std::string(version());
  ctx.report["command"] = std::string(to_string(cfg.command));
  ctx.report["model"] = cfg.model_kind ? json(std::string(to_string(*cfg.model_kind))) : json(nullptr);
  ctx.report["seed"] = cfg.seed;
  ctx.report["dt"] = cfg.solver.dt ? json(*cfg.solver.dt) : json(nullptr);
  ctx.report["memory"] = memory_to_string(cfg.solver.memory);
  ctx.report["divergence_guard"] = cfg.solver.divergence_guard;
  if (cfg.params) ctx.report["params"] = to_json(*cfg.params);
  ctx.report["config"] = cfg.document;

  std::exception_ptr failure;
  try {
    switch (cfg.command) {
      case Command::Simulate: run_simulate(ctx); break;
      case Command::Identify: run_identify(ctx); break;
      case Command::Compensate: run_compensate(ctx); break;
      case Command::Fracdiff: run_fracdiff(ctx); break;
      case Command::Normalize: run_normalize(ctx); break;
      case Command::Metrics: run_metrics(ctx); break;
    }
  } catch (const IdentificationError&) {
    failure = std::current_exception();  // the report still records the best candidate
  }
  ctx.report["artifacts"] = ctx.artifacts;
  ctx.report["artifacts"].push_back("report.json");
  const fs::path path = cfg.output_dir / "report.json";
  write_json(path, ctx.report);
  log << "fonbw: wrote " << path.string() << '\n';
  if (failure) std::rethrow_exception(failure);
  return ctx.report;
}

int exit_code_for_current_exception(std::ostream& log) {
  try {
    throw;
  } catch (const ConfigError& e) {
    log << "fonbw: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    log << "fonbw: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    log << "fonbw: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DivergenceError& e) {
    log << "fonbw: solver divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const SolverError& e) {
    log << "fonbw: solver failure: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const IdentificationError& e) {
    log << "fonbw: identification failed: " << e.what() << '\n';
    return kExitIdentification;
  } catch (const std::exception& e) {
    log << "fonbw: error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, char** argv, std::ostream& log) {
  CLI::App app{"Bouc-Wen hysteresis simulation, identification and compensation", "fonbw"};
  std::string command, config, memory;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> dt;
  app.add_option("command", command, "simulate | identify | compensate | fracdiff | normalize | metrics");
  app.add_option("--config", config, "JSON run configuration")->required();
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--dt", dt, "step size of generated signals [s]");
  app.add_option("--memory", memory, "GL history length: sample count or 'unbounded'");
  app.set_version_flag("--version", std::string(version()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, log, log);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    Overrides o;
    if (!command.empty()) o.command = command_from_string(command);
    o.seed = seed;
    if (out) o.out = fs::path(*out);
    o.dt = dt;
    if (!memory.empty()) o.memory = memory_from_string(memory);
    RunConfig cfg = load_run_config(config);
    apply_overrides(cfg, o);
    execute(cfg, log);
    return kExitOk;
  } catch (...) {
    return exit_code_for_current_exception(log);
  }
}

}  // namespace fonbw
