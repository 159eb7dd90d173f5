"""Independent high-order time integration of the per-frequency mode ODEs.

This is the validation oracle: it never touches the root/kernel machinery.
The third-order mode equation tau y''' + y'' + beta r^2 y' + r^2 y = 0 is
integrated as a companion first-order system with an adaptive embedded
Runge-Kutta 7(8) pair (13 stages, local extrapolation), stepping exactly onto
the requested output times.  Error control is per unit time against the
running per-component magnitude, so ``tol`` bounds the accumulated estimate
over one time unit.

The same integrator core also handles the second-order strongly damped wave
mode equation (2x2 companion) and whole propagator matrices (one call per
radius instead of one per data slot).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import StepFailure
from .params import ModelParams

# Fehlberg 7(8) tableau; solution propagated with the order-8 weights,
# error estimate from the classical (41/840)(k0 + k10 - k11 - k12) trick.
_A = np.zeros((13, 13))
_A[1, 0] = 2 / 27
_A[2, :2] = [1 / 36, 1 / 12]
_A[3, :3] = [1 / 24, 0, 1 / 8]
_A[4, :4] = [5 / 12, 0, -25 / 16, 25 / 16]
_A[5, :5] = [1 / 20, 0, 0, 1 / 4, 1 / 5]
_A[6, :6] = [-25 / 108, 0, 0, 125 / 108, -65 / 27, 125 / 54]
_A[7, :7] = [31 / 300, 0, 0, 0, 61 / 225, -2 / 9, 13 / 900]
_A[8, :8] = [2, 0, 0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3]
_A[9, :9] = [-91 / 108, 0, 0, 23 / 108, -976 / 135, 311 / 54, -19 / 60, 17 / 6, -1 / 12]
_A[10, :10] = [2383 / 4100, 0, 0, -341 / 164, 4496 / 1025, -301 / 82, 2133 / 4100, 45 / 82, 45 / 164, 18 / 41]
_A[11, :11] = [3 / 205, 0, 0, 0, 0, -6 / 41, -3 / 205, -3 / 41, 3 / 41, 6 / 41, 0]
_A[12, :12] = [-1777 / 4100, 0, 0, -341 / 164, 4496 / 1025, -289 / 82, 2193 / 4100, 51 / 82, 33 / 164, 12 / 41, 0, 1]
_B8 = np.array([0, 0, 0, 0, 0, 34 / 105, 9 / 35, 9 / 35, 9 / 280, 9 / 280, 0, 41 / 840, 41 / 840])
_ERRC = 41 / 840


@numba.njit(cache=True)
def _rk_core(M, Y0, t_out, tol, a, b8):  # pragma: no cover - jitted
    n, k = Y0.shape
    nout = t_out.shape[0]
    out = np.empty((nout, n, k))
    t = 0.0
    Y = Y0.copy()
    scale = np.abs(Y0)
    s0 = np.max(scale)
    if s0 == 0.0:
        s0 = 1.0
    for i in range(n):
        for j in range(k):
            if scale[i, j] < s0:
                scale[i, j] = s0
    anorm = 0.0
    for i in range(n):
        row = 0.0
        for j in range(n):
            row += abs(M[i, j])
        if row > anorm:
            anorm = row
    h = 0.05 / (1.0 + anorm)
    errsum = 0.0
    nsteps = 0
    iout = 0
    K = np.empty((13, n, k))
    if t_out[0] == 0.0:
        out[0] = Y0
        iout = 1
    while iout < nout:
        tt = t_out[iout]
        hit = False
        h_use = h
        if t + h >= tt:
            h_use = tt - t
            hit = True
        K[0] = M @ Y
        for s in range(1, 13):
            Z = K[0] * a[s, 0]
            for j in range(1, s):
                if a[s, j] != 0.0:
                    Z = Z + K[j] * a[s, j]
            K[s] = M @ (Y + h_use * Z)
        Ynew = Y.copy()
        for s in range(13):
            if b8[s] != 0.0:
                Ynew = Ynew + (h_use * b8[s]) * K[s]
        err = 0.0
        for i in range(n):
            for j in range(k):
                e = abs(K[0, i, j] + K[10, i, j] - K[11, i, j] - K[12, i, j]) * h_use * 0.0488095238095238 / scale[i, j]
                if e > err:
                    err = e
        tol_step = tol * h_use
        accept = (err <= tol_step) or (err <= 1e-13)
        if accept:
            t = t + h_use
            Y = Ynew
            errsum += err
            nsteps += 1
            for i in range(n):
                for j in range(k):
                    ay = abs(Y[i, j])
                    if ay > scale[i, j]:
                        scale[i, j] = ay
            if hit:
                out[iout] = Y
                iout += 1
        if err > 0.0:
            fac = 0.9 * (tol_step / err) ** 0.125
        else:
            fac = 4.0
        if fac > 4.0:
            fac = 4.0
        if fac < 0.1:
            fac = 0.1
        if accept and hit:
            if h_use * fac > h:
                h = h_use * fac
        else:
            h = h_use * fac
        if h < 1e-14 * (1.0 + t):
            for q in range(iout, nout):
                out[q] = Y
            return out, errsum, nsteps, 1
    return out, errsum, nsteps, 0


@dataclass
class ModeTrajectory:
    """Sampled solution of one mode: states[i] = (y, y', y'') at times[i]."""

    times: np.ndarray
    states: np.ndarray  # (len(times), dim)
    est_error: float
    n_steps: int


def _companion3(params: ModelParams, r: float) -> np.ndarray:
    tau, beta = params.tau, params.beta
    r2 = r * r
    return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-r2 / tau, -beta * r2 / tau, -1.0 / tau]])


def _run(M: np.ndarray, Y0: np.ndarray, times: np.ndarray, tol: float):
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) <= 0.0) or times[0] < 0.0:
        raise ValueError("output times must be nonnegative and strictly increasing")
    out, errsum, nsteps, status = _rk_core(
        np.ascontiguousarray(M, dtype=np.float64),
        np.ascontiguousarray(Y0, dtype=np.float64),
        times,
        float(tol),
        _A,
        _B8,
    )
    if status != 0:
        raise StepFailure("step size underflow; mode equation is non-stiff, check parameters")
    return out, errsum, nsteps


def integrate_mode(
    params: ModelParams,
    r: float,
    init: tuple[float, float, float],
    T: float,
    tol: float = 1e-10,
    times: np.ndarray | None = None,
) -> ModeTrajectory:
    """Integrate one third-order mode with data (y, y', y'')(0) = init.

    Output is sampled at ``times`` (default: 33 points spanning [0, T]); the
    stepper lands on each sample exactly, so comparisons are colocated.
    """
    if T <= 0.0 or tol <= 0.0:
        raise ValueError("need T > 0 and tol > 0")
    if times is None:
        times = np.linspace(0.0, T, 33)
    times = np.asarray(times, dtype=float)
    Y0 = np.asarray(init, dtype=float).reshape(3, 1)
    out, errsum, nsteps = _run(_companion3(params, r), Y0, times, tol)
    return ModeTrajectory(times=times, states=out[:, :, 0], est_error=errsum, n_steps=nsteps)


def integrate_propagator(
    params: ModelParams,
    r: float,
    times: np.ndarray,
    tol: float = 1e-10,
) -> np.ndarray:
    """All three unit-data trajectories at once.

    Returns (len(times), 3, 3) with entry [i, m, d] the d-th derivative of
    the slot-m solution at times[i] (transpose of the state matrix e^{At}).
    """
    times = np.asarray(times, dtype=float)
    out, _, _ = _run(_companion3(params, r), np.eye(3), times, tol)
    return np.ascontiguousarray(np.swapaxes(out, 1, 2))


def integrate_visco_mode(
    beta: float,
    r: float,
    init: tuple[float, float],
    T: float,
    tol: float = 1e-10,
    times: np.ndarray | None = None,
) -> ModeTrajectory:
    """Second-order strongly damped wave mode, y'' + beta r^2 y' + r^2 y = 0."""
    if T <= 0.0 or tol <= 0.0:
        raise ValueError("need T > 0 and tol > 0")
    if times is None:
        times = np.linspace(0.0, T, 33)
    times = np.asarray(times, dtype=float)
    r2 = r * r
    M = np.array([[0.0, 1.0], [-r2, -beta * r2]])
    Y0 = np.asarray(init, dtype=float).reshape(2, 1)
    out, errsum, nsteps = _run(M, Y0, times, tol)
    return ModeTrajectory(times=times, states=out[:, :, 0], est_error=errsum, n_steps=nsteps)


def warm_up() -> None:
    """Trigger JIT compilation so timed runs exclude the one-off compile cost."""
    integrate_mode(ModelParams(0.5, 1.0), 1.0, (0.0, 0.0, 1.0), 0.1, 1e-6, np.array([0.0, 0.1]))
    integrate_visco_mode(1.0, 1.0, (1.0, 0.0), 0.1, 1e-6, np.array([0.0, 0.1]))
