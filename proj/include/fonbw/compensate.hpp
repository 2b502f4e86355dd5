#pragma once

#include <cstddef>
#include <variant>

#include "fonbw/models.hpp"
#include "fonbw/signals.hpp"

namespace fonbw {

struct CompensatorOptions {
  SimOptions sim;
  /// 0 resolves the algebraic loop with a one-sample delay on the internal
  /// model input. A positive count (at most 10) instead iterates the inverse
  /// law at each step with the model driven by the current command.
  std::size_t fixed_point_iterations = 0;
};

/// Inverse multiplicative FONBW compensator:
/// u = (H_d - G) / k_u1, G = k_h*hbar + k_u2 u^2 + ... + k_uN u^N.
TimeSeries compensate_fonbw(const TimeSeries& H_d, const FonbwParams& p, const CompensatorOptions& opts = {});

/// CBW-based compensator: u = (H_d - k_b*D*h) / k_a with h from the CBW state
/// equation driven by the delayed command (backward-difference rate).
TimeSeries compensate_cbw(const TimeSeries& H_d, const CbwGainParams& p, const CompensatorOptions& opts = {});

/// Comparison-model compensator:
/// u = tau e^(t/tau) / k1 * (m0 H_d'' + c0 H_d' + k0 H_d - h),
/// reference derivatives by central differences, h driven by the delayed command.
TimeSeries compensate_zhu(const TimeSeries& H_d, const ZhuParams& p, const CompensatorOptions& opts = {});

using CompensatorParams = std::variant<FonbwParams, CbwGainParams, ZhuParams>;

TimeSeries compensate(const TimeSeries& H_d, const CompensatorParams& p, const CompensatorOptions& opts = {});

struct CompensationReport {
  TimeSeries u_cmd;
  TimeSeries H_achieved;
  double rms_tracking_error = 0.0;
  double rms_input = 0.0;
};

/// Run the compensator on H_d, drive the plant with its command and score tracking.
CompensationReport evaluate_cascade(const CompensatorParams& compensator, const ModelParams& plant,
                                    const TimeSeries& H_d, const CompensatorOptions& opts = {});

}  // namespace fonbw
