#include "fonbw/loops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "fonbw/errors.hpp"

namespace fonbw {

std::vector<PeriodSpan> full_periods(const TimeSeries& u) {
  const std::size_t m = u.size();
  if (m < 3) return {};
  const double tol = 1e-9 * std::max(u.range(), 1e-300);

  std::vector<std::size_t> valleys;
  if (u[0] < u[1]) valleys.push_back(0);
  for (std::size_t i = 1; i + 1 < m; ++i)
    if (u[i] <= u[i - 1] && u[i] < u[i + 1]) valleys.push_back(i);
  // The final sample only closes a period if it returns to the previous valley level.
  if (!valleys.empty() && u[m - 1] <= u[m - 2] && u[m - 1] <= u[valleys.back()] + tol) valleys.push_back(m - 1);

  std::vector<PeriodSpan> out;
  for (std::size_t i = 1; i < valleys.size(); ++i) out.push_back({valleys[i - 1], valleys[i]});
  return out;
}

PeriodSpan last_full_period(const TimeSeries& u) {
  const auto periods = full_periods(u);
  if (periods.empty()) throw InvalidArgument("series shorter than one input period");
  return periods.back();
}

namespace {

std::vector<std::pair<double, double>> branch_points(const TimeSeries& u, const TimeSeries& H, std::size_t a,
                                                     std::size_t b) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(b - a + 1);
  for (std::size_t i = a; i <= b; ++i) pts.emplace_back(u[i], H[i]);
  std::stable_sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  return pts;
}

double interpolate(const std::vector<std::pair<double, double>>& pts, double x) {
  auto it = std::lower_bound(pts.begin(), pts.end(), x, [](const auto& p, double v) { return p.first < v; });
  if (it == pts.begin()) return it->second;
  if (it == pts.end()) return pts.back().second;
  const auto& [x1, y1] = *it;
  const auto& [x0, y0] = *std::prev(it);
  if (x1 == x0) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

BranchCurves resample_branches(const TimeSeries& u, const TimeSeries& H, PeriodSpan period, std::size_t points) {
  if (!u.same_grid(H)) throw InvalidArgument("input and output series must share a grid");
  if (period.end <= period.begin || period.end >= u.size()) throw InvalidArgument("invalid period span");
  if (points == 0) throw InvalidArgument("resampling needs at least one point");

  std::size_t peak = period.begin;
  for (std::size_t i = period.begin; i <= period.end; ++i)
    if (u[i] > u[peak]) peak = i;

  const auto asc = branch_points(u, H, period.begin, peak);
  const auto desc = branch_points(u, H, peak, period.end);
  const double lo = std::max(asc.front().first, desc.front().first);
  const double hi = std::min(asc.back().first, desc.back().first);

  BranchCurves c;
  c.u_grid.resize(points);
  c.ascending.resize(points);
  c.descending.resize(points);
  const double step = (hi - lo) / static_cast<double>(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (static_cast<double>(i) + 0.5) * step;
    c.u_grid[i] = x;
    c.ascending[i] = interpolate(asc, x);
    c.descending[i] = interpolate(desc, x);
  }
  return c;
}

LoopMetrics loop_metrics(const TimeSeries& u, const TimeSeries& H, std::optional<std::size_t> period_samples) {
  if (u.size() != H.size()) throw InvalidArgument("input and output series must have equal length");
  if (!u.same_grid(H)) throw InvalidArgument("input and output series must share a grid");

  PeriodSpan span;
  if (period_samples) {
    if (*period_samples < 2 || *period_samples >= u.size())
      throw InvalidArgument("series shorter than one input period");
    span = {u.size() - 1 - *period_samples, u.size() - 1};
  } else {
    span = last_full_period(u);
  }

  // Shoelace and centroid on coordinates centred at the vertex mean.
  const std::size_t count = span.end - span.begin + 1;
  double mu = 0.0, mh = 0.0, hmin = H[span.begin], hmax = H[span.begin];
  for (std::size_t i = span.begin; i <= span.end; ++i) {
    mu += u[i];
    mh += H[i];
    hmin = std::min(hmin, H[i]);
    hmax = std::max(hmax, H[i]);
  }
  mu /= static_cast<double>(count);
  mh /= static_cast<double>(count);

  double twice_area = 0.0, cy = 0.0;
  for (std::size_t i = span.begin; i <= span.end; ++i) {
    const std::size_t j = i == span.end ? span.begin : i + 1;
    const double x0 = u[i] - mu, y0 = H[i] - mh;
    const double x1 = u[j] - mu, y1 = H[j] - mh;
    const double cross = x0 * y1 - x1 * y0;
    twice_area += cross;
    cy += (y0 + y1) * cross;
  }

  LoopMetrics out;
  out.period = span;
  out.area = 0.5 * twice_area;

  double urange = 0.0;
  {
    double umin = u[span.begin], umax = u[span.begin];
    for (std::size_t i = span.begin; i <= span.end; ++i) {
      umin = std::min(umin, u[i]);
      umax = std::max(umax, u[i]);
    }
    urange = umax - umin;
  }
  const double scale = urange * (hmax - hmin);
  const double centroid_h = (std::abs(out.area) > 1e-12 * scale && scale > 0.0) ? mh + cy / (3.0 * twice_area) : mh;
  out.center_offset = centroid_h - 0.5 * (hmax + hmin);

  const auto branches = resample_branches(u, H, span);
  for (std::size_t i = 0; i < branches.u_grid.size(); ++i)
    out.max_width = std::max(out.max_width, std::abs(branches.descending[i] - branches.ascending[i]));
  return out;
}

}  // namespace fonbw
