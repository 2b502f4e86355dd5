#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fonbw/compensate.hpp"
#include "fonbw/identify.hpp"
#include "fonbw/loops.hpp"
#include "fonbw/models.hpp"
#include "fonbw/signals.hpp"

namespace fonbw {

// ------------------------------------------------------------------- CSV
//
// Header `t,u` or `t,u,H`, optionally annotated with units as `u[V]`.
// One sample per line, `.` as decimal point. The time column must be
// uniform to within 1e-9 s.

inline constexpr double kCsvTimeTolerance = 1e-9;

struct SignalPair {
  TimeSeries u;
  std::optional<TimeSeries> H;
};

SignalPair load_csv(const std::filesystem::path& path);
SignalPair parse_csv(const std::string& text);

/// Write `t,u[,H]` with shortest round-trip number formatting.
void save_csv(const std::filesystem::path& path, const TimeSeries& u, const TimeSeries* H = nullptr);
std::string format_csv(const TimeSeries& u, const TimeSeries* H = nullptr);

/// Write a time column plus arbitrary named value columns sharing the grid of `grid`.
void save_columns(const std::filesystem::path& path, const TimeSeries& grid, const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& columns);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

// --------------------------------------------------- parameter documents

using nlohmann::json;

json to_json(const CbwParams& p);
json to_json(const CbwGainParams& p);
json to_json(const NbwParams& p);
json to_json(const AnbwParams& p);
json to_json(const FonbwParams& p);
json to_json(const ZhuParams& p);
json to_json(const ModelParams& p);
json to_json(const LoopMetrics& m);

CbwParams cbw_params_from_json(const json& j);
NbwParams nbw_params_from_json(const json& j);
FonbwParams fonbw_params_from_json(const json& j);
ZhuParams zhu_params_from_json(const json& j);

/// Parameter set of the given kind. CBW accepts either the alpha/k or the k_a/k_b form.
ModelParams model_params_from_json(ModelKind kind, const json& j);

/// Named theta entries as a JSON object.
json theta_to_json(const std::vector<std::string>& names, const std::vector<double>& theta);

json to_json(const IdentificationResult& r, const std::vector<std::string>& names);
json to_json(const DeConfig& cfg, const std::vector<std::string>& names);

std::string memory_to_string(Memory m);
Memory memory_from_string(const std::string& text);

}  // namespace fonbw
