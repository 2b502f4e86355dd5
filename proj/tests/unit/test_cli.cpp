#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "fonbw/cli.hpp"
#include "fonbw/errors.hpp"
#include "fonbw/io.hpp"

using namespace fonbw;
using namespace fonbw::testing;
namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("fonbw_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path write(const std::string& file, const std::string& text) const {
    const fs::path p = dir / file;
    std::ofstream(p) << text;
    return p;
  }
  fs::path config(const json& doc, const std::string& file = "run.json") const { return write(file, doc.dump(2)); }
};

int run(std::vector<std::string> args, std::string* log_out = nullptr) {
  args.insert(args.begin(), "fonbw");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream log;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), log);
  if (log_out) *log_out = log.str();
  return rc;
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json fonbw_doc() {
  return {{"model", "fonbw"},
          {"params", to_json(identified_fonbw())},
          {"signal", {{"generator", "sweep"}, {"duration", 1.0}}},
          {"solver", {{"dt", 1e-3}}}};
}

}  // namespace

TEST_CASE("command names") {
  for (auto c : {Command::Simulate, Command::Identify, Command::Compensate, Command::Fracdiff, Command::Normalize,
                 Command::Metrics})
    CHECK(command_from_string(to_string(c)) == c);
  CHECK_THROWS_AS(command_from_string("plot"), ConfigError);
}

TEST_CASE("simulate writes a trace and a report") {
  Workspace ws("simulate");
  json doc = fonbw_doc();
  doc["output"] = {{"dir", "res"}, {"plot_data", true}};
  const fs::path cfg = ws.config(doc);
  std::string log;
  REQUIRE(run({"simulate", "--config", cfg.string()}, &log) == kExitOk);
  CHECK(log.find("fonbw: wrote") != std::string::npos);

  const SignalPair sim = load_csv(ws.dir / "res" / "simulation.csv");
  REQUIRE(sim.H.has_value());
  CHECK(sim.u.size() == 1001);
  const TimeSeries direct = simulate(identified_fonbw(), gen_sweep(1.0, 1e-3));
  for (std::size_t k = 0; k < direct.size(); k += 97) CHECK((*sim.H)[k] == direct[k]);

  const json rep = read_json(ws.dir / "res" / "report.json");
  CHECK(rep["command"] == "simulate");
  CHECK(rep["model"] == "fonbw");
  CHECK(rep["seed"] == 42);
  CHECK(rep["memory"] == "unbounded");
  CHECK(rep["samples"] == 1001);
  CHECK(rep["results"]["output_max"].get<double>() == doctest::Approx(direct.max()));
  CHECK(rep["params"]["lambda2"] == identified_fonbw().lambda2);
  json echoed = doc;
  echoed["command"] = "simulate";
  CHECK(rep["config"] == echoed);
  const auto artifacts = rep["artifacts"].get<std::vector<std::string>>();
  CHECK(std::find(artifacts.begin(), artifacts.end(), "loops.csv") != artifacts.end());
  CHECK(fs::exists(ws.dir / "res" / "loops.csv"));
}

TEST_CASE("command-line overrides reach the report") {
  Workspace ws("overrides");
  json doc = fonbw_doc();
  doc["command"] = "fracdiff";
  const fs::path cfg = ws.config(doc);
  const fs::path out = ws.dir / "over";
  REQUIRE(run({"simulate", "--config", cfg.string(), "--seed", "7", "--dt", "0.002", "--memory", "100", "--out",
               out.string()}) == kExitOk);
  const json rep = read_json(out / "report.json");
  CHECK(rep["command"] == "simulate");
  CHECK(rep["seed"] == 7);
  CHECK(rep["dt"] == 0.002);
  CHECK(rep["memory"] == "100");
  CHECK(rep["samples"] == 501);
  CHECK(rep["config"]["solver"]["memory"] == "100");
  CHECK_FALSE(fs::exists(ws.dir / "out"));
}

TEST_CASE("metrics of a linear trace") {
  Workspace ws("metrics");
  std::string csv = "t,u[V],H[um]\n";
  const TimeSeries u = gen_sine_offset(5, 2, 1.0, 1e-3);
  for (std::size_t k = 0; k < u.size(); ++k)
    csv += format_double(u.time(k)) + "," + format_double(u[k]) + "," + format_double(2.0 * u[k]) + "\n";
  ws.write("lin.csv", csv);
  const fs::path cfg = ws.config({{"command", "metrics"}, {"signal", {{"csv", "lin.csv"}}}});
  REQUIRE(run({"--config", cfg.string()}) == kExitOk);
  const json rep = read_json(ws.dir / "out" / "report.json");
  CHECK(std::abs(rep["results"]["area"].get<double>()) < 1e-9);
  CHECK(rep["results"]["max_width"].get<double>() < 1e-9);
}

TEST_CASE("identify is reproducible for a fixed seed") {
  Workspace ws("identify");
  const NbwParams truth = normalize_cbw(demo_cbw());
  const TimeSeries u = gen_sine_offset(5, 1, 2.0, 1e-3);
  const TimeSeries H = simulate(truth, u);
  save_csv(ws.dir / "data.csv", u, &H);
  const json doc = {{"command", "identify"},
                    {"model", "nbw"},
                    {"params", to_json(truth)},
                    {"signal", {{"csv", "data.csv"}}},
                    {"identify",
                     {{"population_size", 12}, {"max_generations", 6}, {"bounds_scale", {0.5, 2.0}}, {"threads", 2}}}};
  const fs::path cfg = ws.config(doc);
  REQUIRE(run({"--config", cfg.string(), "--out", (ws.dir / "a").string()}) == kExitOk);
  REQUIRE(run({"--config", cfg.string(), "--out", (ws.dir / "b").string()}) == kExitOk);
  const json a = read_json(ws.dir / "a" / "report.json");
  const json b = read_json(ws.dir / "b" / "report.json");
  CHECK(a["results"] == b["results"]);
  CHECK(a["results"]["evaluations"] == 12 * 7);
  CHECK(a["results"]["status"] == "ok");
  CHECK(read_text(ws.dir / "a" / "fit.csv") == read_text(ws.dir / "b" / "fit.csv"));

  // An unreachable acceptance threshold fails with its own status but still leaves a report.
  json strict = doc;
  strict["identify"]["max_objective"] = 0.0;
  strict["identify"]["max_generations"] = 1;
  const fs::path cfg2 = ws.config(strict, "strict.json");
  CHECK(run({"--config", cfg2.string(), "--out", (ws.dir / "c").string()}) == kExitIdentification);
  CHECK(read_json(ws.dir / "c" / "report.json")["results"]["status"] == "failed");
}

TEST_CASE("compensate, fracdiff and normalize outputs") {
  Workspace ws("misc");
  json comp = {{"command", "compensate"},
               {"model", "fonbw"},
               {"params", to_json(cascade_plant())},
               {"signal", {{"generator", "sine_offset"}, {"amplitude", 5.0}, {"frequency", 5.0}, {"duration", 0.4}}},
               {"solver", {{"dt", 2e-4}}},
               {"compensate", {{"model", "fonbw"}, {"params", to_json(cascade_plant())}}}};
  REQUIRE(run({"--config", ws.config(comp).string(), "--out", (ws.dir / "comp").string()}) == kExitOk);
  const json crep = read_json(ws.dir / "comp" / "report.json");
  CHECK(crep["results"]["rms_tracking_error"].get<double>() <= 0.01 * crep["results"]["reference_range"].get<double>());
  CHECK(fs::exists(ws.dir / "comp" / "command.csv"));

  json frac = {{"command", "fracdiff"},
               {"signal", {{"generator", "sine_offset"}, {"amplitude", 1.0}, {"frequency", 1.0}, {"duration", 1.0}}},
               {"fracdiff", {{"lambda", 0.5}}}};
  REQUIRE(run({"--config", ws.config(frac).string(), "--out", (ws.dir / "frac").string()}) == kExitOk);
  CHECK(read_json(ws.dir / "frac" / "report.json")["results"]["samples"] == 10001);

  json norm = {{"command", "normalize"},
               {"model", "cbw"},
               {"params", to_json(demo_cbw())},
               {"normalize", {{"scale", 2.0}}},
               {"signal", {{"generator", "sweep"}, {"duration", 1.0}}}};
  REQUIRE(run({"--config", ws.config(norm).string(), "--out", (ws.dir / "norm").string()}) == kExitOk);
  const json nrep = read_json(ws.dir / "norm" / "report.json");
  CHECK(nrep["results"]["max_abs_difference"].get<double>() < 1e-8 * nrep["results"]["output_range"].get<double>());
  CHECK(nrep["results"]["scaled"]["D"] == 2.0);
}

TEST_CASE("exit codes") {
  Workspace ws("exit");
  SUBCASE("malformed JSON") { CHECK(run({"simulate", "--config", ws.write("bad.json", "{").string()}) == kExitConfig); }
  SUBCASE("missing config file") {
    CHECK(run({"simulate", "--config", (ws.dir / "none.json").string()}) == kExitConfig);
  }
  SUBCASE("missing --config") { CHECK(run({"simulate"}) == kExitConfig); }
  SUBCASE("unknown command") {
    CHECK(run({"plot", "--config", ws.config(fonbw_doc()).string()}) == kExitConfig);
  }
  SUBCASE("unknown key") {
    json doc = fonbw_doc();
    doc["colour"] = "red";
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitConfig);
  }
  SUBCASE("both signal sources") {
    json doc = fonbw_doc();
    ws.write("x.csv", "t,u\n0,0\n1,1\n");
    doc["signal"]["csv"] = "x.csv";
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitConfig);
  }
  SUBCASE("invalid parameters") {
    json doc = fonbw_doc();
    doc["params"]["lambda2"] = 1.5;
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitConfig);
  }
  SUBCASE("missing CSV file") {
    json doc = fonbw_doc();
    doc["signal"] = {{"csv", "absent.csv"}};
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitConfig);
  }
  SUBCASE("bad memory override") {
    CHECK(run({"simulate", "--config", ws.config(fonbw_doc()).string(), "--memory", "zero"}) == kExitConfig);
  }
  SUBCASE("non-uniform CSV") {
    ws.write("jitter.csv", "t,u\n0,0\n0.1,1\n0.25,2\n");
    json doc = fonbw_doc();
    doc["signal"] = {{"csv", "jitter.csv"}};
    doc.erase("solver");
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitData);
  }
  SUBCASE("CSV step disagrees with solver") {
    ws.write("coarse.csv", "t,u\n0,0\n0.1,1\n0.2,2\n");
    json doc = fonbw_doc();
    doc["signal"] = {{"csv", "coarse.csv"}};
    CHECK(run({"simulate", "--config", ws.config(doc).string()}) == kExitData);
  }
  SUBCASE("metrics without a full period") {
    ws.write("short.csv", "t,u,H\n0,0,0\n0.1,1,1\n0.2,2,2\n");
    CHECK(run({"metrics", "--config", ws.config({{"signal", {{"csv", "short.csv"}}}}).string()}) == kExitData);
  }
  SUBCASE("diverging compensation loop") {
    json doc = fonbw_doc();
    doc["signal"] = {{"generator", "sine_offset"}, {"amplitude", 5.0}, {"frequency", 5.0}, {"duration", 1.0}};
    doc["solver"]["dt"] = 2e-4;
    doc["compensate"] = {{"model", "fonbw"}, {"params", to_json(identified_fonbw())}};
    std::string log;
    CHECK(run({"compensate", "--config", ws.config(doc).string()}, &log) == kExitDivergence);
    CHECK(log.find("diverg") != std::string::npos);
  }
  SUBCASE("help and version") {
    CHECK(run({"--help"}) == kExitOk);
    std::string log;
    CHECK(run({"--version"}, &log) == kExitOk);
    CHECK(log.find(std::string(version())) != std::string::npos);
  }
}

TEST_CASE("config parsing") {
  const fs::path base = fs::temp_directory_path();
  const RunConfig cfg = parse_run_config(fonbw_doc(), base);
  CHECK(cfg.command == Command::Simulate);
  CHECK(cfg.model_kind == ModelKind::Fonbw);
  CHECK(cfg.output_dir == base / "out");
  CHECK(cfg.solver.memory.is_unbounded());
  CHECK(cfg.seed == 42);

  json doc = fonbw_doc();
  doc["signal"] = {{"generator", "sine_offset"}, {"amplitude", 1.0}};
  CHECK_THROWS_AS(parse_run_config(doc, base), ConfigError);
  doc = fonbw_doc();
  doc["seed"] = -1;
  CHECK_THROWS_AS(parse_run_config(doc, base), ConfigError);
  doc = fonbw_doc();
  doc["identify"] = {{"bounds_scale", {0.5, 2.0}}, {"bounds", json::object()}};
  CHECK_THROWS_AS(parse_run_config(doc, base), ConfigError);
  doc = fonbw_doc();
  doc["fracdiff"] = {{"lambda", 0.0}};
  CHECK_THROWS_AS(parse_run_config(doc, base), ConfigError);
  doc = fonbw_doc();
  doc["compensate"] = {{"model", "nbw"}, {"params", to_json(normalize_cbw(demo_cbw()))}};
  CHECK_THROWS_AS(parse_run_config(doc, base), ConfigError);
}
