#include <doctest.h>

#include <cmath>

#include "fonbw/errors.hpp"
#include "fonbw/signals.hpp"

using namespace fonbw;

TEST_CASE("TimeSeries grid and validation") {
  TimeSeries s(0.5, 0.25, {1.0, 3.0, 2.0}, "V");
  CHECK(s.size() == 3);
  CHECK(s.time(2) == doctest::Approx(1.0));
  CHECK(s.min() == 1.0);
  CHECK(s.max() == 3.0);
  CHECK(s.range() == 2.0);
  CHECK(s.unit() == "V");
  CHECK(s.same_grid(s.with_values({0.0, 0.0, 0.0})));
  CHECK_FALSE(s.same_grid(TimeSeries(0.5, 0.25, {1.0, 2.0})));
  CHECK_THROWS_AS(TimeSeries(0.0, 0.0, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(TimeSeries(0.0, -1e-3, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(TimeSeries(0.0, 1e-3, {}), InvalidArgument);
  CHECK_THROWS_AS(s.with_values({1.0}), InvalidArgument);
}

TEST_CASE("sample_count keeps whole steps only") {
  CHECK(sample_count(1.0, 1e-4) == 10001);
  CHECK(sample_count(1.00005, 1e-4) == 10001);
  CHECK(sample_count(0.0, 1e-3) == 1);
  CHECK(sample_count(0.25, 0.1) == 3);
}

TEST_CASE("offset sinusoid") {
  const TimeSeries s = gen_sine_offset(60, 5, 1, 1e-4);
  CHECK(s[0] == 0.0);
  CHECK(s.time(1000) == doctest::Approx(0.1));
  CHECK(s[1000] == doctest::Approx(120.0).epsilon(1e-12));
  CHECK(s.unit() == "V");

  const TimeSeries r = gen_sine_offset(5, 5, 1, 1e-4);
  CHECK(r.max() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.min() == 0.0);

  CHECK_THROWS_AS(gen_sine_offset(1, 5, 1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gen_sine_offset(1, 5, 1, -1e-3), InvalidArgument);
  CHECK_THROWS_AS(gen_sine_offset(1, 0.0, 1, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(gen_sine_offset(1, -2.0, 1, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(gen_sine_offset(-1, 5, 1, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(gen_sine_offset(1, 5, 1e-4, 1e-3), InvalidArgument);
}

TEST_CASE("decaying sweep excitation") {
  const TimeSeries s = gen_sweep(10.0, 1e-3);
  CHECK(s.size() == 10001);
  CHECK(s[0] == doctest::Approx(60.0 * (std::cos(-3.15) + 1.0)).epsilon(1e-12));
  CHECK(s[0] == doctest::Approx(0.0021).epsilon(0.02));
  CHECK(s.min() >= 0.0);

  const double envelope = 60.0 * std::exp(-1.3);
  CHECK(envelope == doctest::Approx(16.34).epsilon(1e-3));
  // cos + 1 <= 2, so the tail never exceeds twice the envelope.
  for (std::size_t k = 9000; k < s.size(); ++k) CHECK(s[k] <= 2.0 * 60.0 * std::exp(-0.13 * s.time(k)) + 1e-12);
  CHECK(s[s.size() - 1] <= 2.0 * envelope);
  CHECK_THROWS_AS(gen_sweep(1.0, 0.0), InvalidArgument);
}

TEST_CASE("multi-frequency reference") {
  const TimeSeries s = gen_multifreq(2.0, 1e-4);
  CHECK(s[0] == 0.0);
  CHECK(std::abs(s[10000]) < 1e-12);
  CHECK(s.min() >= 0.0);
  CHECK(s.max() <= 8.0);
  CHECK(s.unit() == "um");
  CHECK_THROWS_AS(gen_multifreq(1.0, -1.0), InvalidArgument);
}

TEST_CASE("generators are bit-reproducible") {
  const auto a = gen_sweep(3.0, 1e-4);
  const auto b = gen_sweep(3.0, 1e-4);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}

TEST_CASE("half-step generation decimates back onto the original grid") {
  const double dt = 1e-3;
  const TimeSeries coarse = gen_sine_offset(60, 3, 2, dt);
  const TimeSeries fine = gen_sine_offset(60, 3, 2, dt / 2);
  const TimeSeries dec = decimate(fine, 2);
  REQUIRE(dec.size() == coarse.size());
  CHECK(dec.dt() == coarse.dt());
  for (std::size_t k = 0; k < coarse.size(); ++k) CHECK(dec[k] == coarse[k]);

  const TimeSeries sw = decimate(gen_sweep(2, dt / 2), 2);
  const TimeSeries sc = gen_sweep(2, dt);
  for (std::size_t k = 0; k < sc.size(); ++k) CHECK(sw[k] == sc[k]);
  CHECK_THROWS_AS(decimate(coarse, 0), InvalidArgument);
}
