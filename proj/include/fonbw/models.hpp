#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "fonbw/fracdiff.hpp"
#include "fonbw/signals.hpp"

namespace fonbw {

inline constexpr double kDefaultDivergenceGuard = 1e12;

struct SimOptions {
  Memory memory = Memory::unbounded();
  /// Any state with magnitude above this aborts the run with DivergenceError.
  double divergence_guard = kDefaultDivergenceGuard;
};

/// Classical Bouc-Wen: H = alpha*k*u + (1-alpha)*D*k*h,
/// dh/dt = (A u' - beta |u'| |h|^(n-1) h - gamma u' |h|^n) / D.
struct CbwParams {
  double alpha = 0.0;
  double k = 1.0;
  double D = 1.0;
  double A = 1.0;
  double beta = 0.5;
  double gamma = 0.5;
  double n = 1.0;
  double h_init = 0.0;

  void validate() const;
};

/// Classical Bouc-Wen with the elastic and hysteretic gains as free constants:
/// H = k_a*u + k_b*D*h. This is the form used for identification and the
/// CBW-based compensator.
struct CbwGainParams {
  double k_a = 1.0;
  double k_b = 0.0;
  double D = 1.0;
  double A = 1.0;
  double beta = 0.5;
  double gamma = 0.5;
  double n = 1.0;
  double h_init = 0.0;

  void validate() const;
};

/// Normalized Bouc-Wen: H = k_u*u + k_h*hbar,
/// dhbar/dt = rho (u' - sigma |u'| |hbar|^(n-1) hbar + (sigma-1) u' |hbar|^n).
/// sigma is left unconstrained; identified sets routinely fall outside (0, 1).
struct NbwParams {
  double k_u = 1.0;
  double k_h = 0.0;
  double rho = 1.0;
  double sigma = 0.5;
  double n = 1.0;
  double hbar_init = 0.0;

  void validate() const;
};

/// g(u) = k_u1 u + k_u2 u^2 + ... + k_uN u^N.
struct PolynomialGain {
  std::vector<double> coeffs;  // k_u1..k_uN

  std::size_t order() const noexcept { return coeffs.size(); }
  double operator()(double u) const noexcept;
  /// g(u) - k_u1 u, the part moved into G(u) by the inverse compensator.
  double higher_terms(double u) const noexcept;
  void validate() const;
};

/// Asymmetric NBW: H = g(u) + k_h*hbar with hbar from the NBW state equation.
/// The k_u field of `nbw` is unused.
struct AnbwParams {
  PolynomialGain poly;
  NbwParams nbw;

  void validate() const;
};

/// Fractional-order normalized Bouc-Wen:
/// H = g(u) + k_h*hbar,
/// D^l2 hbar = rho (D^l1 u - sigma |D^l1 u| |hbar|^(n-1) hbar + (sigma-1) D^l1 u |hbar|^n).
struct FonbwParams {
  PolynomialGain poly;
  double k_h = 0.0;
  double rho = 1.0;
  double sigma = 0.5;
  double n = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double hbar_init = 0.0;

  void validate() const;
};

/// Rate-dependent comparison model:
/// m0 x'' + c0 x' + k0 (x - x0) = (k1/tau) e^(-t/tau) u + h,
/// h' = A u' - beta |u'| |h|^(n-1) h - gamma u' |h|^n + delta u sgn(u').
struct ZhuParams {
  double m0 = 1.0;
  double c0 = 0.0;
  double k0 = 1.0;
  double k1 = 1.0;
  double x0 = 0.0;
  double tau = 1.0;
  double A = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double n = 1.0;

  void validate() const;
};

enum class ModelKind { Cbw, Nbw, Anbw, Fonbw, Zhu };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind model_kind_from_string(std::string_view name);

/// Any simulatable parameter set. CBW is carried in gain form.
using ModelParams = std::variant<CbwGainParams, NbwParams, AnbwParams, FonbwParams, ZhuParams>;

ModelKind kind_of(const ModelParams& p) noexcept;

CbwGainParams to_gains(const CbwParams& p);

/// Redundancy transform: beta -> c^n beta, gamma -> c^n gamma, D -> c D.
CbwParams scale_cbw(const CbwParams& p, double c);

/// Characteristic amplitude h0 = (A / (beta + gamma))^(1/n).
double cbw_h0(const CbwParams& p);

/// Map CBW onto the normalized form; the input-output behaviour is unchanged.
NbwParams normalize_cbw(const CbwParams& p);

/// One CBW gain-form set reproducing the given NBW behaviour (chosen with D = 1, h0 = 1).
CbwGainParams cbw_gains_from_nbw(const NbwParams& p);

/// sgn(x)|x|^n, real for non-integer n.
double signed_pow(double x, double n) noexcept;

/// u' by central differences, one-sided at the ends.
std::vector<double> sample_rate(const TimeSeries& u);

TimeSeries simulate_cbw(const CbwParams& p, const TimeSeries& u, const SimOptions& opts = {});
TimeSeries simulate_cbw(const CbwGainParams& p, const TimeSeries& u, const SimOptions& opts = {});
TimeSeries simulate_nbw(const NbwParams& p, const TimeSeries& u, const SimOptions& opts = {});
TimeSeries simulate_anbw(const PolynomialGain& poly, const NbwParams& p, const TimeSeries& u,
                         const SimOptions& opts = {});
TimeSeries simulate_fonbw(const FonbwParams& p, const TimeSeries& u, const SimOptions& opts = {});
TimeSeries simulate_zhu(const ZhuParams& p, const TimeSeries& u, const SimOptions& opts = {});

/// Dispatch on the parameter alternative.
TimeSeries simulate(const ModelParams& p, const TimeSeries& u, const SimOptions& opts = {});

/// Integer-order hysteresis state h (or hbar) alongside the output.
struct StateTrace {
  std::vector<double> output;
  std::vector<double> state;
};
StateTrace simulate_nbw_state(const NbwParams& p, const TimeSeries& u, const SimOptions& opts = {});

/// FONBW output together with hbar and the fractional input rate D^l1 u.
struct FonbwTrace {
  std::vector<double> output;
  std::vector<double> hbar;
  std::vector<double> input_rate;
};
FonbwTrace simulate_fonbw_trace(const FonbwParams& p, const TimeSeries& u, const SimOptions& opts = {});

/// The four loop segments of the normalized state equation.
enum class Branch { PositiveAscending, PositiveDescending, NegativeDescending, NegativeAscending };

std::string_view to_string(Branch b) noexcept;

/// Segment for state hbar and input rate v; zeros resolve to positive, then ascending.
Branch classify_branch(double hbar, double v) noexcept;

/// Incremental semi-implicit Grünwald–Letnikov stepper for the FONBW state.
///
/// Step k solves
///   dt^-l2 (hbar_k + S_k) = rho (v_k - sigma |v_k| sgn(hbar_k)|hbar_k|^n + (sigma-1) v_k |hbar_k|^n)
/// with S_k the lagged GL sum of hbar and v_k = D^l1 u at step k. For n = 1 the
/// four closed-form branch solutions are used; otherwise a safeguarded Newton
/// iteration with bisection fallback. Step 0 holds hbar at its initial value.
class FonbwStepper {
 public:
  FonbwStepper(const FonbwParams& p, double dt, std::size_t expected_length = 0, const SimOptions& opts = {});

  /// Index of the next step to be taken.
  std::size_t step() const noexcept { return u_.size(); }

  /// hbar the next step would produce for input u, without committing.
  double preview(double u) const;
  /// Commit input u and return the resulting hbar.
  double advance(double u);

  /// D^l1 u the next step would see for input u.
  double input_rate(double u) const noexcept { return rate_scale_ * (u + u_lag_); }
  double last_hbar() const noexcept { return hbar_.empty() ? p_.hbar_init : hbar_.back(); }
  const FonbwParams& params() const noexcept { return p_; }

 private:
  double solve(double v) const;
  double solve_linear(double v, double rhs0) const;
  double solve_newton(double v) const;
  void refresh_lags();

  FonbwParams p_;
  SimOptions opts_;
  GlWeightTable w_u_;
  GlWeightTable w_h_;
  double rate_scale_;   // dt^-l1
  double state_scale_;  // dt^-l2
  std::vector<double> u_;
  std::vector<double> hbar_;
  double u_lag_ = 0.0;
  double hbar_lag_ = 0.0;
};

}  // namespace fonbw
