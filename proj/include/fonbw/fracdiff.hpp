#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "fonbw/signals.hpp"

namespace fonbw {

/// Length of the history window of a Grünwald–Letnikov sum. Unbounded keeps
/// the full history; a finite window applies the short-memory principle.
class Memory {
 public:
  static constexpr Memory unbounded() noexcept { return Memory(std::numeric_limits<std::size_t>::max()); }
  static Memory samples(std::size_t n);

  bool is_unbounded() const noexcept { return limit_ == std::numeric_limits<std::size_t>::max(); }
  std::size_t limit() const noexcept { return limit_; }
  /// Number of lagged terms used at step k.
  std::size_t window(std::size_t k) const noexcept { return k < limit_ ? k : limit_; }

  friend bool operator==(Memory, Memory) = default;

 private:
  constexpr explicit Memory(std::size_t limit) noexcept : limit_(limit) {}
  std::size_t limit_;
};

/// Grünwald–Letnikov weights w_0..w_p of order lambda, w_j = (-1)^j binom(lambda, j),
/// built with the recursion w_j = (1 - (lambda+1)/j) w_{j-1}.
class GlWeightTable {
 public:
  GlWeightTable(double lambda, std::size_t p);

  double lambda() const noexcept { return lambda_; }
  std::size_t max_index() const noexcept { return weights_.size() - 1; }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t j) const noexcept { return weights_[j]; }

  /// Grow the table so that max_index() >= p. Existing entries are unchanged.
  void extend(std::size_t p);

 private:
  double lambda_;
  std::vector<double> weights_;
};

GlWeightTable gl_weights(double lambda, std::size_t p);

/// D^lambda f on the grid of f, with zero history before t0.
TimeSeries gl_derivative(const TimeSeries& f, double lambda, Memory memory = Memory::unbounded());

/// Lagged part of the GL sum at step k: sum_{i=1..window(k)} w_i h[k-i].
/// `history` must hold at least samples 0..k-1. The 1/dt^lambda scale is not applied.
double gl_history_sum(std::span<const double> history, double lambda, std::ptrdiff_t k,
                      Memory memory = Memory::unbounded());
double gl_history_sum(const GlWeightTable& w, std::span<const double> history, std::ptrdiff_t k,
                      Memory memory = Memory::unbounded());

namespace detail {
/// sum_{i=1..n} w[i] * x[k-i]; requires n <= k and w.size() > n.
double lagged_dot(const double* w, const double* x, std::size_t k, std::size_t n) noexcept;
}  // namespace detail

}  // namespace fonbw
