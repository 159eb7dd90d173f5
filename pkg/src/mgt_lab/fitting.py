"""Least-squares decay-law fitting in log coordinates.

Three models, matching the shapes the rate tables produce:

pure-power      v = C t^a                (regressor log t)
log-only        v = C (log t)^b          (regressor log log t, window t > 1)
power-times-log v = C (1+t)^a (log(e+t))^b   (joint two-regressor fit)

``model="auto"`` fits all three and keeps the best two-parameter model unless
the three-parameter one cuts the residual in half (guards against overfitting
slowly varying series).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, NonPositiveValues


@dataclass(frozen=True)
class DecayFit:
    model: str  # "pure-power" | "log-only" | "power-times-log"
    exponent_t: float
    exponent_log: float
    window: tuple[float, float]
    rms_residual: float


def _lstsq(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return coef, float(np.sqrt(np.mean(resid**2)))


def fit_decay(times, values, window: tuple[float, float] | None = None, model: str = "auto") -> DecayFit:
    """Fit a decay law to a positive series over a time window.

    Requires at least 8 samples inside the window, all positive.  The fit is
    scale invariant: rescaling the series changes no exponent.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"need window t_lo < t_hi, got {window}")
    sel = (t >= lo) & (t <= hi)
    t, v = t[sel], v[sel]
    if t.size < 8:
        raise InsufficientData(f"need >= 8 points inside window, got {t.size}")
    if np.any(v <= 0.0) or not np.all(np.isfinite(v)):
        raise NonPositiveValues("log-space fit needs positive finite values")
    y = np.log(v)
    ones = np.ones_like(t)

    fits: dict[str, DecayFit] = {}

    def add(name, exponent_t, exponent_log, rms):
        fits[name] = DecayFit(name, float(exponent_t), float(exponent_log), (lo, hi), rms)

    if model in ("auto", "pure-power"):
        if np.all(t > 0.0):
            coef, rms = _lstsq(np.stack([ones, np.log(t)], axis=1), y)
            add("pure-power", coef[1], 0.0, rms)
        elif model == "pure-power":
            raise ValueError("pure-power fit needs t > 0 in the window")
    if model in ("auto", "log-only"):
        if np.all(t > 1.0):
            coef, rms = _lstsq(np.stack([ones, np.log(np.log(t))], axis=1), y)
            add("log-only", 0.0, coef[1], rms)
        elif model == "log-only":
            raise ValueError("log-only fit needs t > 1 in the window")
    if model in ("auto", "power-times-log"):
        X = np.stack([ones, np.log1p(t), np.log(np.log(math.e + t))], axis=1)
        coef, rms = _lstsq(X, y)
        add("power-times-log", coef[1], coef[2], rms)

    if model != "auto":
        return fits[model]
    two_param = [f for n, f in fits.items() if n != "power-times-log"]
    best2 = min(two_param, key=lambda f: f.rms_residual)
    # parsimony: an adequate two-parameter law wins; the joint model only
    # takes over when both single laws misfit and it clearly helps
    if best2.rms_residual < 0.02:
        return best2
    three = fits.get("power-times-log")
    if three is not None and three.rms_residual < 0.5 * best2.rms_residual:
        return three
    return best2
