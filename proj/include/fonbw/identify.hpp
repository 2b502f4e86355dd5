#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fonbw/models.hpp"
#include "fonbw/signals.hpp"

namespace fonbw {

/// Objective returned for candidates whose simulation fails or diverges.
inline constexpr double kPenaltyObjective = 1e9;

/// Root-mean-square deviation between measured and modelled output.
double rms_error(const TimeSeries& measured, const TimeSeries& model);

struct ParamBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Self-adaptive differential evolution (DE/rand/1/bin with per-individual F and CR).
struct DeConfig {
  std::size_t population_size = 50;
  std::size_t max_generations = 300;
  std::vector<ParamBounds> bounds;
  double f_init = 0.5;
  double cr_init = 0.9;
  double tau1 = 0.1;  // probability of regenerating F
  double tau2 = 0.1;  // probability of regenerating CR
  double f_lo = 0.1;
  double f_hi = 0.9;
  std::uint64_t seed = 0;
  /// Stop once the best objective is at or below this value. Non-finite values disable it.
  std::optional<double> target_objective;
  /// Worker threads for candidate evaluation; results do not depend on it.
  std::size_t threads = 1;

  void validate(std::size_t dimension) const;
};

struct IdentificationProblem {
  ModelKind model_kind = ModelKind::Fonbw;
  TimeSeries data_u;
  TimeSeries data_H;
  /// Polynomial order N for ANBW and FONBW.
  std::size_t poly_order = 3;
  SimOptions sim;

  IdentificationProblem(ModelKind kind, TimeSeries u, TimeSeries H, std::size_t poly_order = 3,
                        SimOptions sim = {});

  std::vector<std::string> theta_names() const;
  std::size_t dimension() const { return theta_names().size(); }
};

struct IdentificationResult {
  std::vector<double> best_theta;
  double best_objective = 0.0;
  std::vector<double> objective_trace;  // best objective after each generation, initial population first
  std::size_t evaluations = 0;
  std::size_t generations = 0;
  std::uint64_t seed = 0;
};

/// Parameter names in theta order for a model kind:
///   cbw:   k_a k_b D A beta gamma n
///   nbw:   k_u k_h rho sigma n
///   anbw:  k_u1..k_uN k_h rho sigma n
///   fonbw: k_u1..k_uN k_h rho sigma n lambda1 lambda2
///   zhu:   m0 c0 k0 k1 x0 tau A beta gamma delta n
std::vector<std::string> theta_names(ModelKind kind, std::size_t poly_order = 3);

ModelParams params_from_theta(ModelKind kind, std::span<const double> theta, std::size_t poly_order = 3);
std::vector<double> theta_from_params(const ModelParams& p);

/// RMS objective of one candidate; failed simulations score kPenaltyObjective.
double evaluate_candidate(const IdentificationProblem& problem, std::span<const double> theta);

IdentificationResult identify(const IdentificationProblem& problem, const DeConfig& cfg);

}  // namespace fonbw
