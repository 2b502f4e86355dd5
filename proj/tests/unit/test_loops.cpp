#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "fonbw/errors.hpp"
#include "fonbw/loops.hpp"
#include "fonbw/models.hpp"

using namespace fonbw;
using namespace fonbw::testing;

namespace {

TimeSeries ellipse_H(const TimeSeries& u, double f, double b) {
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) v[k] = b * std::sin(2.0 * std::numbers::pi * f * u.time(k));
  return u.with_values(std::move(v));
}

}  // namespace

TEST_CASE("period detection") {
  const TimeSeries u = gen_sine_offset(1.0, 2.0, 1.25, 1e-3);
  const auto periods = full_periods(u);
  REQUIRE(periods.size() == 2);
  CHECK(periods[0].begin == 0);
  CHECK(periods[0].end == 500);
  CHECK(periods[1].begin == 500);
  CHECK(periods[1].end == 1000);
  const PeriodSpan last = last_full_period(u);
  CHECK(last.begin == 500);
  CHECK(last.end == 1000);

  // A series ending exactly on a valley closes its final period.
  const TimeSeries exact = gen_sine_offset(1.0, 2.0, 1.0, 1e-3);
  CHECK(last_full_period(exact).end == 1000);

  CHECK_THROWS_AS(last_full_period(gen_sine_offset(1.0, 1.0, 0.7, 1e-3)), InvalidArgument);
  CHECK_THROWS_AS(last_full_period(TimeSeries(0.0, 1.0, {1.0, 2.0})), InvalidArgument);
  CHECK(full_periods(TimeSeries(0.0, 1.0, {1.0})).empty());
}

TEST_CASE("linear response has no loop") {
  const TimeSeries u = gen_sine_offset(60, 1, 2, 1e-3);
  std::vector<double> h(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) h[k] = 2.0 * u[k];
  const LoopMetrics m = loop_metrics(u, u.with_values(h));
  CHECK(std::abs(m.area) <= 1e-9 * 120.0 * 240.0);
  CHECK(m.max_width <= 1e-9 * 240.0);
}

TEST_CASE("ellipse metrics against the closed form") {
  // u = 1 - cos(wt), H = b sin(wt): an ellipse with semi-axes 1 and b, traversed
  // clockwise in the (u, H) plane.
  const double b = 3.0;
  const TimeSeries u = gen_sine_offset(1.0, 1.0, 2.0, 1e-4);
  const TimeSeries H = ellipse_H(u, 1.0, b);
  const LoopMetrics m = loop_metrics(u, H);
  CHECK(m.area == doctest::Approx(-std::numbers::pi * b).epsilon(1e-6));
  CHECK(m.max_width == doctest::Approx(2.0 * b).epsilon(1e-3));
  CHECK(std::abs(m.center_offset) <= 1e-9);
  CHECK(m.period.begin == 10000);
  CHECK(m.period.end == 20000);

  // An explicit period length selects the final samples.
  const LoopMetrics p = loop_metrics(u, H, 10000);
  CHECK(p.area == doctest::Approx(m.area).epsilon(1e-9));
  CHECK_THROWS_AS(loop_metrics(u, H, 0), InvalidArgument);
  CHECK_THROWS_AS(loop_metrics(u, H, u.size() + 5), InvalidArgument);
}

TEST_CASE("centroid offset detects a lopsided loop") {
  // Unit circle with its lower half squashed to 0.25: the area centroid sits at
  // H = (2/3 - 1/24) / (5 pi / 8) = 1/pi, below the extent midpoint 0.375.
  const TimeSeries u = gen_sine_offset(1.0, 1.0, 2.0, 1e-4);
  std::vector<double> v(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double s = std::sin(2.0 * std::numbers::pi * u.time(k));
    v[k] = s > 0 ? s : 0.25 * s;
  }
  const LoopMetrics m = loop_metrics(u, u.with_values(v));
  CHECK(m.center_offset == doctest::Approx(1.0 / std::numbers::pi - 0.375).epsilon(1e-3));
}

TEST_CASE("mismatched inputs are rejected") {
  const TimeSeries u = gen_sine_offset(1.0, 1.0, 2.0, 1e-3);
  CHECK_THROWS_AS(loop_metrics(u, TimeSeries(0.0, 1e-3, {1.0, 2.0})), InvalidArgument);
  CHECK_THROWS_AS(resample_branches(u, u, {10, 5}), InvalidArgument);
  CHECK_THROWS_AS(resample_branches(u, u, {0, u.size()}), InvalidArgument);
  CHECK_THROWS_AS(resample_branches(u, u, {0, 100}, 0), InvalidArgument);
}

TEST_CASE("classical loop area is frequency independent") {
  const TimeSeries u1 = gen_sine_offset(60, 1, 2, 1e-4);
  const TimeSeries u10 = gen_sine_offset(60, 10, 0.2, 1e-5);
  const double a1 = loop_metrics(u1, simulate_cbw(demo_cbw(), u1)).area;
  const double a10 = loop_metrics(u10, simulate_cbw(demo_cbw(), u10)).area;
  CHECK(std::abs(a1) > 1.0);
  CHECK(std::abs(a1 - a10) <= 1e-3 * std::abs(a1));
}

TEST_CASE("asymmetric loop has a nonzero centroid offset") {
  const TimeSeries u = gen_sine_offset(60, 1, 2, 1e-3);
  const NbwParams nb = normalize_cbw(demo_cbw());
  const TimeSeries sym = simulate_nbw(nb, u);
  const TimeSeries asym = simulate_anbw(demo_poly(), nb, u);
  const LoopMetrics ms = loop_metrics(u, sym);
  const LoopMetrics ma = loop_metrics(u, asym);
  CHECK(std::abs(ms.center_offset) <= 1e-3 * sym.range());
  CHECK(std::abs(ma.center_offset) >= 1e-2 * asym.range());
}
