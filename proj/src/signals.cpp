#include "fonbw/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fonbw/errors.hpp"

namespace fonbw {

TimeSeries::TimeSeries(double t0, double dt, std::vector<double> values, std::string unit)
    : t0_(t0), dt_(dt), values_(std::move(values)), unit_(std::move(unit)) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw InvalidArgument("time step must be positive and finite");
  if (!std::isfinite(t0_)) throw InvalidArgument("start time must be finite");
  if (values_.empty()) throw InvalidArgument("time series must hold at least one sample");
}

double TimeSeries::min() const { return *std::min_element(values_.begin(), values_.end()); }

double TimeSeries::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool TimeSeries::same_grid(const TimeSeries& other) const noexcept {
  return t0_ == other.t0_ && dt_ == other.dt_ && values_.size() == other.values_.size();
}

TimeSeries TimeSeries::with_values(std::vector<double> values, std::string unit) const {
  if (values.size() != values_.size()) throw InvalidArgument("replacement values change the series length");
  return TimeSeries(t0_, dt_, std::move(values), std::move(unit));
}

std::size_t sample_count(double duration, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw InvalidArgument("duration must be non-negative");
  // Absorb representation error in duration/dt (e.g. 1/1e-4) before truncating.
  const double steps = std::floor(duration / dt * (1.0 + 1e-12));
  return static_cast<std::size_t>(steps) + 1;
}

namespace {

template <class F>
TimeSeries sample(double duration, double dt, std::string unit, F&& f) {
  const std::size_t m = sample_count(duration, dt);
  std::vector<double> v(m);
  for (std::size_t k = 0; k < m; ++k) v[k] = f(static_cast<double>(k) * dt);
  return TimeSeries(0.0, dt, std::move(v), std::move(unit));
}

}  // namespace

TimeSeries gen_sine_offset(double amplitude, double frequency, double duration, double dt, std::string unit) {
  if (!(amplitude >= 0.0)) throw InvalidArgument("amplitude must be non-negative");
  if (!(frequency > 0.0)) throw InvalidArgument("frequency must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(duration >= dt)) throw InvalidArgument("duration must cover at least one step");
  const double w = 2.0 * std::numbers::pi * frequency;
  return sample(duration, dt, std::move(unit), [&](double t) { return amplitude - amplitude * std::cos(w * t); });
}

TimeSeries gen_sweep(double duration, double dt) {
  return sample(duration, dt, "V", [](double t) {
    return 60.0 * std::exp(-0.13 * t) * (std::cos(3.0 * std::numbers::pi * t * std::exp(-0.09 * t) - 3.15) + 1.0);
  });
}

TimeSeries gen_multifreq(double duration, double dt) {
  constexpr double pi = std::numbers::pi;
  return sample(duration, dt, "um", [](double t) {
    return 4.0 - std::cos(2.0 * pi * t) - std::cos(6.0 * pi * t) - std::cos(10.0 * pi * t) -
           std::cos(20.0 * pi * t);
  });
}

TimeSeries decimate(const TimeSeries& s, std::size_t factor) {
  if (factor == 0) throw InvalidArgument("decimation factor must be positive");
  std::vector<double> v;
  v.reserve(s.size() / factor + 1);
  for (std::size_t k = 0; k < s.size(); k += factor) v.push_back(s[k]);
  return TimeSeries(s.t0(), s.dt() * static_cast<double>(factor), std::move(v), s.unit());
}

}  // namespace fonbw
