#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fonbw {

/// Default step size: 10 kHz sampling.
inline constexpr double kDefaultDt = 1e-4;

/// Uniformly sampled signal. Sample k sits at t0 + k*dt; no per-sample
/// timestamps are stored. The unit label is metadata only.
class TimeSeries {
 public:
  TimeSeries(double t0, double dt, std::vector<double> values, std::string unit = {});

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return values_.size(); }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }

  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  const std::string& unit() const noexcept { return unit_; }

  double min() const;
  double max() const;
  double range() const { return max() - min(); }

  /// Same t0, dt and length.
  bool same_grid(const TimeSeries& other) const noexcept;

  /// A new series on this grid with different values.
  TimeSeries with_values(std::vector<double> values, std::string unit = {}) const;

 private:
  double t0_;
  double dt_;
  std::vector<double> values_;
  std::string unit_;
};

/// Number of samples covering [0, duration] with whole steps only.
std::size_t sample_count(double duration, double dt);

/// a - a*cos(2*pi*f*t), starting at exactly 0.
TimeSeries gen_sine_offset(double amplitude, double frequency, double duration,
                           double dt = kDefaultDt, std::string unit = "V");

/// Decaying chirp used as identification excitation:
/// 60*exp(-0.13t)*[cos(3*pi*t*exp(-0.09t) - 3.15) + 1] volts.
TimeSeries gen_sweep(double duration = 10.0, double dt = kDefaultDt);

/// Multi-frequency reference 4 - cos(2pi t) - cos(6pi t) - cos(10pi t) - cos(20pi t), in um.
TimeSeries gen_multifreq(double duration, double dt = kDefaultDt);

/// Keep every `factor`-th sample.
TimeSeries decimate(const TimeSeries& s, std::size_t factor);

}  // namespace fonbw
