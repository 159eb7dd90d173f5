"""Pseudospectral evolution on a periodic box approximating free space.

The box is justified by finite propagation speed: with data supported in a
ball of radius rho, no signal reaches the boundary before
T = (L/2 - rho) / sqrt(beta/tau), so the periodic solution coincides with the
free-space one on that window (``box_length`` encodes the sizing rule).

Linear evolution is exact per mode (the 3x3 propagator from the kernel
tables), so the only discretisation errors are the spatial truncation of the
data and, for the semilinear equation, the second-order exponential
predictor-corrector treatment of the power nonlinearity.
"""

from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import Overflow, RadiusExceedsBox, UnsupportedDimension
from .kernels import ModeTable, _phi_tables, _visco_batch, build_mode_table, mode_propagator
from .params import ModelParams


def box_length(rho_supp: float, speed: float, T: float) -> float:
    """Box side sufficient to keep the cone away from the boundary images."""
    return 2.0 * (rho_supp + speed * T) + 4.0


class Grid:
    """Periodic box [-L/2, L/2)^n sampled on N points per dimension."""

    def __init__(self, n: int, L: float, N: int):
        if n not in (1, 2, 3):
            raise UnsupportedDimension(f"box solver supports n in {{1,2,3}}, got n={n}")
        if N < 2 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 2, got N={N}")
        if L <= 0.0:
            raise ValueError(f"need L > 0, got L={L}")
        self.n = n
        self.L = float(L)
        self.N = int(N)
        self.dx = self.L / self.N
        self.shape = (self.N,) * n
        self.x_axis = -self.L / 2 + self.dx * np.arange(self.N)
        k_axis = np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)  # 0..N/2-1, -N/2..-1
        self.k_axis = k_axis
        ksq = np.zeros(self.shape, dtype=np.int64)
        for axis in range(n):
            shp = [1] * n
            shp[axis] = self.N
            ksq = ksq + (k_axis.reshape(shp)) ** 2
        self._ksq_int = ksq
        uniq, inverse = np.unique(ksq.ravel(), return_inverse=True)
        self._uniq_int = uniq
        self._inverse = inverse
        self.r2_unique = (2.0 * np.pi / self.L) ** 2 * uniq.astype(float)
        self.r2 = (2.0 * np.pi / self.L) ** 2 * ksq.astype(float)
        self._tables: dict[tuple[float, float], ModeTable] = {}
        self._prop_cache: OrderedDict = OrderedDict()
        # 2/3-rule mask: drop modes with any |k_i| > N/3
        keep = np.ones(self.shape, dtype=bool)
        for axis in range(n):
            shp = [1] * n
            shp[axis] = self.N
            keep &= (np.abs(k_axis) <= self.N // 3).reshape(shp)
        self.dealias_mask = keep

    def mesh(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*([self.x_axis] * self.n), indexing="ij")

    def xi_axis(self, axis: int) -> np.ndarray:
        """Derivative multiplier along one axis (Nyquist zeroed), broadcastable."""
        xi = (2.0 * np.pi / self.L) * self.k_axis.astype(float)
        xi[self.N // 2] = 0.0
        shp = [1] * self.n
        shp[axis] = self.N
        return xi.reshape(shp)

    def mode_table(self, params: ModelParams) -> ModeTable:
        key = (params.tau, params.beta)
        if key not in self._tables:
            self._tables[key] = build_mode_table(self.r2_unique, params)
        return self._tables[key]

    def gather(self, per_unique: np.ndarray) -> np.ndarray:
        """Expand a per-unique-radius array onto the full mode grid."""
        return per_unique[self._inverse].reshape(self.shape)

    def propagators(self, params: ModelParams, h: float):
        """Cached (E, phi1col, phi2col) tables for one step size."""
        key = (params.tau, params.beta, float(h))
        if key in self._prop_cache:
            self._prop_cache.move_to_end(key)
            return self._prop_cache[key]
        table = self.mode_table(params)
        E = mode_propagator(table, h)
        phi1, phi2 = _phi_tables(h, table)
        self._prop_cache[key] = (E, phi1, phi2)
        if len(self._prop_cache) > 32:
            self._prop_cache.popitem(last=False)
        return E, phi1, phi2


@dataclass
class SpectralField:
    """Discretised state (u, u_t, u_tt) in spectral form, plus current time."""

    grid: Grid
    u_hat: np.ndarray
    ut_hat: np.ndarray
    utt_hat: np.ndarray
    t: float = 0.0

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.u_hat.copy(), self.ut_hat.copy(), self.utt_hat.copy(), self.t)

    def physical(self, slot: int = 0) -> np.ndarray:
        hat = (self.u_hat, self.ut_hat, self.utt_hat)[slot]
        return np.real(sfft.ifftn(hat, workers=_workers()))


@dataclass
class EvolveOutcome:
    """Result of an adaptive run: completion or detected blow-up."""

    status: str  # "completed" | "blowup"
    final: SpectralField
    blowup_bracket: tuple[float, float] | None
    history: dict


def _workers() -> int:
    import os

    try:
        return max(1, int(os.environ.get("MGT_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, workers=_workers())


# ---------------------------------------------------------------------------
# Data profiles
# ---------------------------------------------------------------------------

def gaussian_profile(center=0.0, width: float = 1.0, amplitude: float = 1.0) -> Callable:
    def f(*coords):
        c = np.broadcast_to(np.atleast_1d(center), (len(coords),))
        rr = sum((x - ci) ** 2 for x, ci in zip(coords, c))
        return amplitude * np.exp(-rr / (2.0 * width * width))

    return f


def bump_profile(center=0.0, radius: float = 1.0, amplitude: float = 1.0) -> Callable:
    """Smooth compactly supported bump, exactly zero outside |x - c| >= radius."""

    def f(*coords):
        c = np.broadcast_to(np.atleast_1d(center), (len(coords),))
        rr = sum((x - ci) ** 2 for x, ci in zip(coords, c)) / (radius * radius)
        out = np.zeros_like(rr)
        inside = rr < 1.0
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - rr[inside]))
        return out

    return f


def odd_gaussian_profile(width: float = 1.0, amplitude: float = 1.0) -> Callable:
    """x_1 * gaussian: zero mass by symmetry."""

    def f(*coords):
        rr = sum(x**2 for x in coords)
        return amplitude * coords[0] * np.exp(-rr / (2.0 * width * width))

    return f


def make_field(grid: Grid, data: tuple) -> SpectralField:
    """Transform (u0, u1, u2) samplers or arrays into a spectral state at t=0.

    Warns when data is not negligible near the box boundary (the free-space
    reading of box results needs supported-with-margin data).
    """
    hats = []
    for sampler in data:
        if sampler is None:
            arr = np.zeros(grid.shape)
        elif callable(sampler):
            arr = np.asarray(sampler(*grid.mesh()), dtype=float)
        else:
            arr = np.asarray(sampler, dtype=float)
        if arr.shape != grid.shape:
            raise ValueError(f"data shape {arr.shape} does not match grid {grid.shape}")
        peak = np.abs(arr).max()
        if peak > 0.0:
            edge = 0.0
            for axis in range(grid.n):
                edge = max(edge, np.abs(np.take(arr, 0, axis=axis)).max())
                edge = max(edge, np.abs(np.take(arr, -1, axis=axis)).max())
            if edge > 1e-8 * peak:
                warnings.warn("initial data not negligible at the box boundary", stacklevel=2)
        hats.append(_fftn(arr))
    return SpectralField(grid, hats[0], hats[1], hats[2], t=0.0)


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def _apply_propagator(grid: Grid, K: np.ndarray, slots: tuple[np.ndarray, ...]) -> list[np.ndarray]:
    """new[d] = sum_m K[:, m, d] (gathered) * old[m]."""
    out = []
    for d in range(K.shape[2]):
        acc = grid.gather(K[:, 0, d]) * slots[0]
        for m in range(1, K.shape[1]):
            acc += grid.gather(K[:, m, d]) * slots[m]
        out.append(acc)
    return out


def linear_evolve(state: SpectralField, params: ModelParams, t_target: float) -> SpectralField:
    """Advance every mode exactly by the kernel propagator."""
    dt = t_target - state.t
    if dt < 0.0:
        raise ValueError(f"t_target={t_target} is before state.t={state.t}")
    if dt == 0.0:
        return state.copy()
    K = mode_propagator(state.grid.mode_table(params), dt)
    new = _apply_propagator(state.grid, K, (state.u_hat, state.ut_hat, state.utt_hat))
    return SpectralField(state.grid, new[0], new[1], new[2], t=t_target)


def visco_evolve(state: SpectralField, beta: float, t_target: float) -> SpectralField:
    """Advance the strongly damped wave state (u, u_t slots) exactly.

    The returned utt slot is filled from the equation, u_tt = Lap(u + beta u_t),
    so downstream energies can be formed spectrally.
    """
    dt = t_target - state.t
    if dt < 0.0:
        raise ValueError(f"t_target={t_target} is before state.t={state.t}")
    if dt == 0.0:
        out = state.copy()
    else:
        V = _visco_batch(dt, state.grid.r2_unique, beta)
        new = _apply_propagator(state.grid, V, (state.u_hat, state.ut_hat))
        out = SpectralField(state.grid, new[0], new[1], None, t=t_target)
    out.utt_hat = -state.grid.r2 * (out.u_hat + beta * out.ut_hat)
    return out


def _nonlinear_hat(grid: Grid, u_hat: np.ndarray, p: float, theta: float | None,
                   nonlinearity: Callable | None) -> np.ndarray:
    u = np.real(sfft.ifftn(u_hat, workers=_workers()))
    if not np.all(np.isfinite(u)):
        raise Overflow("field became non-finite")
    if theta is not None and np.abs(u).max() > theta:
        raise Overflow(f"field magnitude exceeded threshold {theta}")
    g = nonlinearity(u) if nonlinearity is not None else np.abs(u) ** p
    g_hat = _fftn(g)
    g_hat[~grid.dealias_mask] = 0.0
    return g_hat


def semilinear_step(
    state: SpectralField,
    params: ModelParams,
    p: float,
    h: float,
    theta: float | None = None,
    nonlinearity: Callable | None = None,
) -> SpectralField:
    """One exponential predictor-corrector step for the power nonlinearity.

    The linear part propagates exactly; the source |u|^p enters the u_tt slot
    divided by tau and is treated to second order (exponential Euler predictor,
    trapezoidal phi2 corrector).  The nonlinear term is evaluated pointwise in
    physical space with 2/3-rule dealiasing; pass ``nonlinearity`` to override
    |u|^p (used to freeze the source in tests).
    """
    if h <= 0.0:
        raise ValueError(f"need h > 0, got h={h}")
    grid = state.grid
    E, phi1, phi2 = grid.propagators(params, h)
    lin = _apply_propagator(grid, E, (state.u_hat, state.ut_hat, state.utt_hat))
    g_n = _nonlinear_hat(grid, state.u_hat, p, theta, nonlinearity) / params.tau
    p1 = [grid.gather(phi1[:, d]) for d in range(3)]
    p2 = [grid.gather(phi2[:, d]) for d in range(3)]
    pred_u = lin[0] + h * p1[0] * g_n
    g_pred = _nonlinear_hat(grid, pred_u, p, theta, nonlinearity) / params.tau
    new = [lin[d] + h * ((p1[d] - p2[d]) * g_n + p2[d] * g_pred) for d in range(3)]
    return SpectralField(grid, new[0], new[1], new[2], t=state.t + h)


@dataclass
class EvolveControls:
    """Adaptive stepping knobs for evolve_until."""

    h_init: float = 1e-2
    h_min: float | None = None  # default 1e-10 * T
    theta: float | None = None  # default 1e8 * (1 + max|u_tt(0)|)
    rtol: float = 1e-6
    h_max: float | None = None
    sample_times: np.ndarray | None = None
    hs_order: float | None = None  # record an extra |D|^s seminorm series


def evolve_until(
    state: SpectralField,
    params: ModelParams,
    p: float | None,
    T: float,
    controls: EvolveControls | None = None,
) -> EvolveOutcome:
    """Adaptive semilinear evolution with blow-up detection.

    Error control is step-doubling on the second-order stepper.  Blow-up is an
    outcome, not an error: it is reported when max|u| exceeds the threshold or
    the step size underflows, with the bracket of the last two accepted times.
    ``p=None`` runs the linear propagator (always completes).
    """
    from . import norms  # local import: norms has no dependency on this module

    controls = controls or EvolveControls()
    h_min = controls.h_min if controls.h_min is not None else 1e-10 * T
    theta = controls.theta
    if theta is None:
        theta = 1e8 * (1.0 + np.abs(state.physical(2)).max())
    samples = controls.sample_times
    if samples is None:
        samples = np.linspace(state.t, T, 65)
    samples = np.asarray(samples, dtype=float)
    samples = samples[samples >= state.t]

    history = {"t": [], "l2": [], "l2_no_mean": [], "linf": [], "h1": []}
    if controls.hs_order is not None:
        history["hs"] = []

    def record(f: SpectralField):
        history["t"].append(f.t)
        history["l2"].append(norms.norm_L2(f))
        history["l2_no_mean"].append(norms.norm_L2_no_mean(f))
        history["linf"].append(norms.norm_Linf(f))
        history["h1"].append(norms.norm_Hs_dot(f, 1.0))
        if controls.hs_order is not None:
            history["hs"].append(norms.norm_Hs_dot(f, controls.hs_order))

    cur = state.copy()
    if samples.size and samples[0] <= cur.t:
        record(cur)
        samples = samples[1:]

    if p is None:
        for ts in samples:
            cur = linear_evolve(cur, params, ts)
            record(cur)
        if not samples.size or samples[-1] < T:
            cur = linear_evolve(cur, params, T)
            record(cur)
        return EvolveOutcome("completed", cur, None, {k: np.array(v) for k, v in history.items()})

    h = min(controls.h_init, T - cur.t) if T > cur.t else controls.h_init
    h_max = controls.h_max if controls.h_max is not None else (T - cur.t) / 8 or 1.0
    isample = 0
    t_prev = cur.t
    while cur.t < T:
        target = samples[isample] if isample < samples.size else T
        if target <= cur.t:
            isample += 1
            continue
        h_use = min(h, h_max, target - cur.t)
        try:
            full = semilinear_step(cur, params, p, h_use, theta=theta)
            half = semilinear_step(cur, params, p, h_use / 2.0, theta=theta)
            half = semilinear_step(half, params, p, h_use / 2.0, theta=theta)
        except Overflow:
            h = h_use / 2.0
            if h < h_min:
                bracket = (t_prev, cur.t + h_use)
                return EvolveOutcome("blowup", cur, bracket, {k: np.array(v) for k, v in history.items()})
            continue
        scale = max(float(np.abs(half.u_hat).max()), 1e-300)
        err = float(np.abs(full.u_hat - half.u_hat).max()) / (controls.rtol * scale)
        if err <= 1.0:
            t_prev = cur.t
            cur = half
            umax = np.abs(cur.physical(0)).max()
            if not np.isfinite(umax) or umax > theta:
                return EvolveOutcome("blowup", cur, (t_prev, cur.t), {k: np.array(v) for k, v in history.items()})
            if isample < samples.size and cur.t >= samples[isample] - 1e-12 * max(1.0, cur.t):
                record(cur)
                isample += 1
            fac = min(2.0, max(0.5, 0.85 * err ** (-1.0 / 3.0) if err > 0 else 2.0))
        else:
            fac = max(0.3, 0.85 * err ** (-1.0 / 3.0))
        h = h_use * fac
        if h < h_min:
            return EvolveOutcome("blowup", cur, (cur.t, cur.t + h_use), {k: np.array(v) for k, v in history.items()})
    return EvolveOutcome("completed", cur, None, {k: np.array(v) for k, v in history.items()})


# ---------------------------------------------------------------------------
# Cone mass and export
# ---------------------------------------------------------------------------

def fps_outside_mass(state: SpectralField, x0, R: float) -> float:
    """Integral of |u|^2 + |u_t|^2 + |grad u|^2 outside the ball |x - x0| > R."""
    grid = state.grid
    if R >= grid.L / 2.0:
        raise RadiusExceedsBox(f"R={R} does not fit inside the box (L/2 = {grid.L / 2})")
    x0 = np.broadcast_to(np.atleast_1d(np.asarray(x0, dtype=float)), (grid.n,))
    mesh = grid.mesh()
    dist2 = sum((x - c) ** 2 for x, c in zip(mesh, x0))
    mask = dist2 > R * R
    u = state.physical(0)
    ut = state.physical(1)
    total = np.abs(u[mask]) ** 2 + np.abs(ut[mask]) ** 2
    for axis in range(grid.n):
        g = np.real(sfft.ifftn(1j * grid.xi_axis(axis) * state.u_hat, workers=_workers()))
        total = total + np.abs(g[mask]) ** 2
    return float(total.sum() * grid.dx**grid.n)


def save_field_bin(state: SpectralField, path) -> None:
    """Flat binary snapshot: header (n, N, L, t) as little-endian float64,
    then the row-major physical samples of u as little-endian float64."""
    header = np.array([state.grid.n, state.grid.N, state.grid.L, state.t], dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(state.physical(0).astype("<f8").tobytes())


def load_field_bin(path) -> tuple[int, int, float, float, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    header = np.frombuffer(raw[:32], dtype="<f8")
    n, N = int(header[0]), int(header[1])
    u = np.frombuffer(raw[32:], dtype="<f8").reshape((N,) * n)
    return n, N, float(header[2]), float(header[3]), u


def export_slice_csv(state: SpectralField, path) -> None:
    """Axis-aligned 1D slice through the box centre: columns x, u."""
    u = state.physical(0)
    idx = tuple([state.grid.N // 2] * (state.grid.n - 1))
    line = u[(slice(None),) + idx] if state.grid.n > 1 else u
    with open(path, "w") as fh:
        fh.write("x,u\n")
        for x, v in zip(state.grid.x_axis, line):
            fh.write(f"{x!r},{v!r}\n")
