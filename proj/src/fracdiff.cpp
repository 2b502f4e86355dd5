#include "fonbw/fracdiff.hpp"

#include <cmath>

#include "fonbw/errors.hpp"

namespace fonbw {

Memory Memory::samples(std::size_t n) {
  if (n == 0) throw InvalidArgument("memory window must hold at least one sample");
  return Memory(n);
}

namespace {

void check_order(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("fractional order must lie in (0, 1]");
}

}  // namespace

GlWeightTable::GlWeightTable(double lambda, std::size_t p) : lambda_(lambda) {
  check_order(lambda);
  weights_.reserve(p + 1);
  weights_.push_back(1.0);
  extend(p);
}

void GlWeightTable::extend(std::size_t p) {
  while (weights_.size() <= p) {
    const double j = static_cast<double>(weights_.size());
    weights_.push_back((1.0 - (lambda_ + 1.0) / j) * weights_.back());
  }
}

GlWeightTable gl_weights(double lambda, std::size_t p) { return GlWeightTable(lambda, p); }

namespace detail {

double lagged_dot(const double* w, const double* x, std::size_t k, std::size_t n) noexcept {
  // Four independent partial sums; the summation order is fixed so results are reproducible.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const double* xk = x + k;
  std::size_t i = 1;
  for (; i + 3 <= n; i += 4) {
    s0 += w[i] * xk[-static_cast<std::ptrdiff_t>(i)];
    s1 += w[i + 1] * xk[-static_cast<std::ptrdiff_t>(i + 1)];
    s2 += w[i + 2] * xk[-static_cast<std::ptrdiff_t>(i + 2)];
    s3 += w[i + 3] * xk[-static_cast<std::ptrdiff_t>(i + 3)];
  }
  for (; i <= n; ++i) s0 += w[i] * xk[-static_cast<std::ptrdiff_t>(i)];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

TimeSeries gl_derivative(const TimeSeries& f, double lambda, Memory memory) {
  check_order(lambda);
  const std::size_t m = f.size();
  const GlWeightTable w(lambda, memory.window(m - 1));
  const double scale = std::pow(f.dt(), -lambda);
  const double* x = f.values().data();
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double lag = detail::lagged_dot(w.weights().data(), x, k, memory.window(k));
    out[k] = scale * (x[k] + lag);
  }
  return f.with_values(std::move(out), f.unit());
}

double gl_history_sum(const GlWeightTable& w, std::span<const double> history, std::ptrdiff_t k, Memory memory) {
  if (k < 0) throw InvalidArgument("step index must be non-negative");
  const auto uk = static_cast<std::size_t>(k);
  if (history.size() < uk) throw InvalidArgument("history shorter than the step index");
  const std::size_t n = memory.window(uk);
  if (n > w.max_index()) throw InvalidArgument("weight table too short for the requested window");
  if (n == 0) return 0.0;
  return detail::lagged_dot(w.weights().data(), history.data(), uk, n);
}

double gl_history_sum(std::span<const double> history, double lambda, std::ptrdiff_t k, Memory memory) {
  if (k < 0) throw InvalidArgument("step index must be non-negative");
  const GlWeightTable w(lambda, memory.window(static_cast<std::size_t>(k)));
  return gl_history_sum(w, history, k, memory);
}

}  // namespace fonbw
