#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fonbw/signals.hpp"

namespace fonbw {

/// Sample range [begin, end] (inclusive) of one input period.
struct PeriodSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Consecutive input periods, each delimited by two neighbouring local minima of u.
std::vector<PeriodSpan> full_periods(const TimeSeries& u);

/// The last full input period: the segment between the last two local minima of u.
/// Throws InvalidArgument when u holds less than one period.
PeriodSpan last_full_period(const TimeSeries& u);

struct LoopMetrics {
  double area = 0.0;           // signed shoelace area of the closed (u, H) curve
  double max_width = 0.0;      // largest |H_desc - H_asc| at common u
  double center_offset = 0.0;  // loop centroid H minus the midpoint of the H extent
  PeriodSpan period;
};

/// Loop metrics over the last full period, or over the given period length in
/// samples (the final `period_samples` steps).
LoopMetrics loop_metrics(const TimeSeries& u, const TimeSeries& H,
                         std::optional<std::size_t> period_samples = std::nullopt);

/// Ascending and descending branches of one period interpolated onto a shared u grid.
struct BranchCurves {
  std::vector<double> u_grid;
  std::vector<double> ascending;
  std::vector<double> descending;
};

/// Split the period at the maximum of u and resample both branches at `points`
/// cell-centred u values spanning the range both branches cover.
BranchCurves resample_branches(const TimeSeries& u, const TimeSeries& H, PeriodSpan period,
                               std::size_t points = 256);

}  // namespace fonbw
