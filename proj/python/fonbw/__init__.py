"""Bouc-Wen family hysteresis models with fractional-order dynamics.

Parameter sets are plain dicts using the same field names as the JSON run
configuration, e.g. ``{"poly": [0.18], "k_h": 1.0, "rho": 2.0, ...}``.
"""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DataError,
    DivergenceError,
    InvalidArgument,
    SolverError,
    TimeSeries,
    gen_multifreq,
    gen_sine_offset,
    gen_sweep,
    gl_derivative,
    gl_weights,
    rms_error,
    theta_names,
)

__version__ = _core.__version__


def simulate(kind, params, u, memory=None, divergence_guard=1e12):
    """Model output for input series ``u``. ``memory`` is a GL window length or None."""
    return _core._simulate(kind, _json.dumps(params), u, memory, divergence_guard)


def normalize_cbw(params):
    """Normalized parameters (k_u, k_h, rho, sigma, n) of a classical parameter set (alpha, k, D, A, beta, gamma, n)."""
    return _json.loads(_core._normalize_cbw(_json.dumps(params)))


def scale_cbw(params, c):
    """Equivalent classical parameter set with beta, gamma scaled by c**n and D by c."""
    return _json.loads(_core._scale_cbw(_json.dumps(params), c))


def loop_metrics(u, H, period_samples=None):
    """Area, maximum branch width and centroid offset of the last full loop."""
    return _json.loads(_core._loop_metrics(u, H, period_samples))


def identify(kind, u, H, bounds, population_size=50, max_generations=300, seed=42, poly_order=3,
             target_objective=None, memory=None, threads=1):
    """Self-adaptive DE fit. ``bounds`` lists (lo, hi) in ``theta_names(kind, poly_order)`` order."""
    return _json.loads(_core._identify(kind, u, H, [tuple(b) for b in bounds], population_size, max_generations,
                                       seed, poly_order, target_objective, memory, threads))


def compensate(kind, params, H_d, fixed_point_iterations=0, memory=None):
    """Feedforward command for reference ``H_d`` (kind: fonbw, cbw or zhu)."""
    return _core._compensate(kind, _json.dumps(params), H_d, fixed_point_iterations, memory)


def evaluate_cascade(compensator_kind, compensator_params, plant_kind, plant_params, H_d,
                     fixed_point_iterations=0, memory=None):
    """Run the compensator, drive the plant with its command and report tracking."""
    return _core._evaluate_cascade(compensator_kind, _json.dumps(compensator_params), plant_kind,
                                   _json.dumps(plant_params), H_d, fixed_point_iterations, memory)


__all__ = [
    "ConfigError", "DataError", "DivergenceError", "InvalidArgument", "SolverError", "TimeSeries",
    "compensate", "evaluate_cascade", "gen_multifreq", "gen_sine_offset", "gen_sweep", "gl_derivative",
    "gl_weights", "identify", "loop_metrics", "normalize_cbw", "rms_error", "scale_cbw", "simulate",
    "theta_names",
]
