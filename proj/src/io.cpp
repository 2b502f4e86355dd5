#include "fonbw/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fonbw/errors.hpp"

namespace fonbw {

// ------------------------------------------------------------------- CSV

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Column {
  std::string name;
  std::string unit;
};

Column parse_header_cell(std::string_view cell) {
  const std::size_t open = cell.find('[');
  if (open == std::string_view::npos) return {std::string(cell), {}};
  const std::size_t close = cell.find(']', open);
  if (close == std::string_view::npos) throw DataError("unterminated unit annotation in CSV header");
  return {std::string(trim(cell.substr(0, open))), std::string(cell.substr(open + 1, close - open - 1))};
}

double parse_number(std::string_view cell, std::size_t line) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw DataError("line " + std::to_string(line) + ": cannot parse number '" + std::string(cell) + "'");
  if (!std::isfinite(v)) throw DataError("line " + std::to_string(line) + ": non-finite sample");
  return v;
}

}  // namespace

SignalPair parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Column> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      for (auto cell : split(line)) header.push_back(parse_header_cell(cell));
      break;
    }
  }
  if (header.empty()) throw DataError("CSV file is empty");
  const bool has_h = header.size() == 3;
  if (header.size() < 2 || header.size() > 3 || header[0].name != "t" || header[1].name != "u" ||
      (has_h && header[2].name != "H"))
    throw DataError("CSV header must be 't,u' or 't,u,H'");

  std::vector<double> t, u, h;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    t.push_back(parse_number(cells[0], lineno));
    u.push_back(parse_number(cells[1], lineno));
    if (has_h) h.push_back(parse_number(cells[2], lineno));
  }
  if (t.size() < 2) throw DataError("CSV needs at least two samples to define the time step");

  const std::size_t m = t.size();
  const double dt = (t[m - 1] - t[0]) / static_cast<double>(m - 1);
  if (!(dt > 0.0)) throw DataError("time column must be increasing");
  for (std::size_t k = 0; k < m; ++k)
    if (std::abs(t[k] - (t[0] + static_cast<double>(k) * dt)) > kCsvTimeTolerance)
      throw DataError("time column is not uniform at line " + std::to_string(k + 2));

  SignalPair out{TimeSeries(t[0], dt, std::move(u), header[1].unit), std::nullopt};
  if (has_h) out.H = TimeSeries(t[0], dt, std::move(h), header[2].unit);
  return out;
}

SignalPair load_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open CSV file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

std::string format_csv(const TimeSeries& u, const TimeSeries* H) {
  if (H && !u.same_grid(*H)) throw InvalidArgument("u and H must share a grid");
  auto head = [](const char* name, const std::string& unit) {
    return unit.empty() ? std::string(name) : std::string(name) + "[" + unit + "]";
  };
  std::string out = "t," + head("u", u.unit());
  if (H) out += "," + head("H", H->unit());
  out += '\n';
  for (std::size_t k = 0; k < u.size(); ++k) {
    out += format_double(u.time(k));
    out += ',';
    out += format_double(u[k]);
    if (H) {
      out += ',';
      out += format_double((*H)[k]);
    }
    out += '\n';
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

}  // namespace

void save_csv(const std::filesystem::path& path, const TimeSeries& u, const TimeSeries* H) {
  write_text(path, format_csv(u, H));
}

void save_columns(const std::filesystem::path& path, const TimeSeries& grid, const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& columns) {
  if (names.size() != columns.size()) throw InvalidArgument("one name per column required");
  for (const auto& c : columns)
    if (c.size() != grid.size()) throw InvalidArgument("column length differs from the grid");
  std::string out = "t";
  for (const auto& n : names) out += "," + n;
  out += '\n';
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out += format_double(grid.time(k));
    for (const auto& c : columns) {
      out += ',';
      out += format_double(c[k]);
    }
    out += '\n';
  }
  write_text(path, out);
}

// --------------------------------------------------- parameter documents

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " parameters must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.count(key)) throw ConfigError(std::string("unknown ") + what + " parameter '" + key + "'");
}

double number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing parameter '") + key + "'");
  if (!it->is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
  return it->get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

PolynomialGain poly_from_json(const json& j) {
  const json& list = j.is_object() ? j.at("coeffs") : j;
  if (!list.is_array() || list.empty()) throw ConfigError("poly must be a non-empty list of coefficients");
  PolynomialGain p;
  for (const auto& c : list) {
    if (!c.is_number()) throw ConfigError("polynomial coefficients must be numbers");
    p.coeffs.push_back(c.get<double>());
  }
  return p;
}

json poly_to_json(const PolynomialGain& p) { return json{{"coeffs", p.coeffs}}; }

}  // namespace

json to_json(const CbwParams& p) {
  return {{"alpha", p.alpha}, {"k", p.k},   {"D", p.D}, {"A", p.A},
          {"beta", p.beta},   {"gamma", p.gamma}, {"n", p.n}, {"h_init", p.h_init}};
}

json to_json(const CbwGainParams& p) {
  return {{"k_a", p.k_a},   {"k_b", p.k_b},     {"D", p.D}, {"A", p.A},
          {"beta", p.beta}, {"gamma", p.gamma}, {"n", p.n}, {"h_init", p.h_init}};
}

json to_json(const NbwParams& p) {
  return {{"k_u", p.k_u},     {"k_h", p.k_h}, {"rho", p.rho}, {"sigma", p.sigma},
          {"n", p.n},         {"hbar_init", p.hbar_init}};
}

json to_json(const AnbwParams& p) {
  return {{"poly", poly_to_json(p.poly)}, {"k_h", p.nbw.k_h}, {"rho", p.nbw.rho},
          {"sigma", p.nbw.sigma},         {"n", p.nbw.n},     {"hbar_init", p.nbw.hbar_init}};
}

json to_json(const FonbwParams& p) {
  return {{"poly", poly_to_json(p.poly)}, {"k_h", p.k_h},         {"rho", p.rho},
          {"sigma", p.sigma},             {"n", p.n},             {"lambda1", p.lambda1},
          {"lambda2", p.lambda2},         {"hbar_init", p.hbar_init}};
}

json to_json(const ZhuParams& p) {
  return {{"m0", p.m0},   {"c0", p.c0},     {"k0", p.k0},       {"k1", p.k1},
          {"x0", p.x0},   {"tau", p.tau},   {"A", p.A},         {"beta", p.beta},
          {"gamma", p.gamma}, {"delta", p.delta}, {"n", p.n}};
}

json to_json(const ModelParams& p) {
  return std::visit([](const auto& q) { return to_json(q); }, p);
}

json to_json(const LoopMetrics& m) {
  return {{"area", m.area},
          {"max_width", m.max_width},
          {"center_offset", m.center_offset},
          {"period_begin", m.period.begin},
          {"period_end", m.period.end}};
}

CbwParams cbw_params_from_json(const json& j) {
  check_keys(j, {"alpha", "k", "D", "A", "beta", "gamma", "n", "h_init"}, "CBW");
  CbwParams p{number(j, "alpha"), number(j, "k"),     number(j, "D"), number(j, "A"),
              number(j, "beta"),  number(j, "gamma"), number(j, "n"), number_or(j, "h_init", 0.0)};
  return p;
}

NbwParams nbw_params_from_json(const json& j) {
  check_keys(j, {"k_u", "k_h", "rho", "sigma", "n", "hbar_init"}, "NBW");
  return NbwParams{number(j, "k_u"), number(j, "k_h"), number(j, "rho"),
                   number(j, "sigma"), number(j, "n"), number_or(j, "hbar_init", 0.0)};
}

FonbwParams fonbw_params_from_json(const json& j) {
  check_keys(j, {"poly", "k_h", "rho", "sigma", "n", "lambda1", "lambda2", "hbar_init"}, "FONBW");
  if (!j.contains("poly")) throw ConfigError("missing parameter 'poly'");
  FonbwParams p;
  p.poly = poly_from_json(j.at("poly"));
  p.k_h = number(j, "k_h");
  p.rho = number(j, "rho");
  p.sigma = number(j, "sigma");
  p.n = number(j, "n");
  p.lambda1 = number(j, "lambda1");
  p.lambda2 = number(j, "lambda2");
  p.hbar_init = number_or(j, "hbar_init", 0.0);
  return p;
}

ZhuParams zhu_params_from_json(const json& j) {
  check_keys(j, {"m0", "c0", "k0", "k1", "x0", "tau", "A", "beta", "gamma", "delta", "n"}, "Zhu");
  ZhuParams p;
  p.m0 = number(j, "m0");
  p.c0 = number(j, "c0");
  p.k0 = number(j, "k0");
  p.k1 = number(j, "k1");
  p.x0 = number_or(j, "x0", 0.0);
  p.tau = number(j, "tau");
  p.A = number(j, "A");
  p.beta = number(j, "beta");
  p.gamma = number(j, "gamma");
  p.delta = number(j, "delta");
  p.n = number(j, "n");
  return p;
}

ModelParams model_params_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::Cbw:
      if (j.is_object() && j.contains("k_a")) {
        check_keys(j, {"k_a", "k_b", "D", "A", "beta", "gamma", "n", "h_init"}, "CBW");
        return CbwGainParams{number(j, "k_a"),  number(j, "k_b"),     number(j, "D"), number(j, "A"),
                             number(j, "beta"), number(j, "gamma"), number(j, "n"), number_or(j, "h_init", 0.0)};
      }
      return to_gains(cbw_params_from_json(j));
    case ModelKind::Nbw: return nbw_params_from_json(j);
    case ModelKind::Anbw: {
      check_keys(j, {"poly", "k_h", "rho", "sigma", "n", "hbar_init"}, "ANBW");
      if (!j.contains("poly")) throw ConfigError("missing parameter 'poly'");
      AnbwParams p;
      p.poly = poly_from_json(j.at("poly"));
      p.nbw = NbwParams{0.0, number(j, "k_h"), number(j, "rho"), number(j, "sigma"), number(j, "n"),
                        number_or(j, "hbar_init", 0.0)};
      return p;
    }
    case ModelKind::Fonbw: return fonbw_params_from_json(j);
    case ModelKind::Zhu: return zhu_params_from_json(j);
  }
  throw ConfigError("unknown model kind");
}

json theta_to_json(const std::vector<std::string>& names, const std::vector<double>& theta) {
  json out = json::object();
  for (std::size_t i = 0; i < names.size() && i < theta.size(); ++i) out[names[i]] = theta[i];
  return out;
}

json to_json(const IdentificationResult& r, const std::vector<std::string>& names) {
  return {{"best_theta", theta_to_json(names, r.best_theta)},
          {"best_objective", r.best_objective},
          {"objective_trace", r.objective_trace},
          {"evaluations", r.evaluations},
          {"generations", r.generations},
          {"seed", r.seed}};
}

json to_json(const DeConfig& cfg, const std::vector<std::string>& names) {
  json bounds = json::object();
  for (std::size_t i = 0; i < names.size() && i < cfg.bounds.size(); ++i)
    bounds[names[i]] = {cfg.bounds[i].lo, cfg.bounds[i].hi};
  json out = {{"population_size", cfg.population_size},
              {"max_generations", cfg.max_generations},
              {"bounds", bounds},
              {"f_init", cfg.f_init},
              {"cr_init", cfg.cr_init},
              {"tau1", cfg.tau1},
              {"tau2", cfg.tau2},
              {"f_lo", cfg.f_lo},
              {"f_hi", cfg.f_hi},
              {"seed", cfg.seed},
              {"threads", cfg.threads}};
  out["target_objective"] = cfg.target_objective ? json(*cfg.target_objective) : json(nullptr);
  return out;
}

std::string memory_to_string(Memory m) { return m.is_unbounded() ? "unbounded" : std::to_string(m.limit()); }

Memory memory_from_string(const std::string& text) {
  if (text == "unbounded") return Memory::unbounded();
  std::size_t n = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), n);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || n == 0)
    throw ConfigError("memory must be a positive sample count or 'unbounded'");
  return Memory::samples(n);
}

}  // namespace fonbw
