"""Exact per-frequency analysis of the characteristic cubic and its kernels.

For a single frequency magnitude ``r`` the evolution reduces to the cubic
``tau L^3 + L^2 + beta r^2 L + r^2 = 0`` with roots ``lam_j(r)``.  This module
computes those roots robustly, the 3x3 Green-kernel matrix (unit data in each
slot, up to two time derivatives), the small/large-frequency root expansions,
pointwise decay envelopes per frequency zone, the small-frequency leading
profile, and the comparison kernel of the second-order strongly damped wave
equation.

Numerical strategy
------------------
Roots come from a companion-matrix eigensolve followed by a Newton polish —
globally robust where closed-form cubic branches are not.  Kernels use the
partial-fraction (Vandermonde) representation when the roots are well
separated and switch to a divided-difference-of-the-exponential (Newton/Opitz)
evaluation near the measure-zero degenerate radii, where partial fractions
lose ~2*log10(scale/gap) digits.  The switch happens at gap <= 1e-4 * scale,
well before accuracy degrades; the ``degenerate`` *flag* keeps its own tighter
threshold ``delta_root = 1e-6 * max(1/tau, sqrt(beta/tau) r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import OutOfZone
from .params import ModelParams

# Evaluation-path switch: relative root gap below which partial fractions are
# abandoned for the confluent form.
_CONFLUENT_GAP = 1e-4
# Flag threshold from the degeneracy design rule.
_DELTA_ROOT = 1e-6


@dataclass(frozen=True)
class CharacteristicTriple:
    """Three roots of the characteristic cubic at one frequency magnitude."""

    roots: np.ndarray  # (3,) complex
    min_gap: float
    degenerate: bool


@dataclass(frozen=True)
class KernelValues:
    """Green-kernel matrix: K[m, d] = d-th time derivative of the kernel
    with unit initial data in slot m (identity at t = 0)."""

    K: np.ndarray  # (3, 3) real


@dataclass(frozen=True)
class ZoneConfig:
    """Small/large frequency thresholds and the cut-off transition width."""

    eps: float
    N: float
    smoothing: float = 0.0

    def __post_init__(self):
        if not self.eps < self.N:
            raise ValueError(f"need eps < N, got eps={self.eps}, N={self.N}")


def default_zones(params: ModelParams) -> ZoneConfig:
    """Zone thresholds scaled to the parameters (the theory leaves them symbolic)."""
    eps = 0.1 * min(1.0 / math.sqrt(params.beta * params.tau), 1.0)
    N = 10.0 * max(1.0 / params.beta, 1.0)
    return ZoneConfig(eps=eps, N=N, smoothing=0.1 * eps)


# ---------------------------------------------------------------------------
# Discriminant and roots
# ---------------------------------------------------------------------------

def discriminant(r: float, params: ModelParams) -> float:
    """Discriminant of the characteristic cubic at frequency magnitude r.

    r^2 * (-4 beta^3 tau r^4 + (18 beta tau + beta^2 - 27 tau^2) r^2 - 4);
    zero exactly on the degenerate set.
    """
    tau, beta = params.tau, params.beta
    r2 = r * r
    return r2 * (-4.0 * beta**3 * tau * r2 * r2 + (18.0 * beta * tau + beta**2 - 27.0 * tau**2) * r2 - 4.0)


def degenerate_radii(params: ModelParams) -> list[float]:
    """Sorted radii where the cubic has a repeated root: 0 plus up to two more.

    The nonzero ones solve a quadratic in r^2; they exist only when
    (18 beta tau + beta^2 - 27 tau^2)^2 >= 64 beta^3 tau.
    """
    tau, beta = params.tau, params.beta
    b = 18.0 * beta * tau + beta**2 - 27.0 * tau**2
    disc = b * b - 64.0 * beta**3 * tau
    out = [0.0]
    if disc >= 0.0:
        root = math.sqrt(disc)
        for sign in (-1.0, 1.0):
            x = (b + sign * root) / (8.0 * beta**3 * tau)
            if x > 0.0:
                out.append(math.sqrt(x))
    return sorted(out)


def _root_scale(r, params: ModelParams):
    """Magnitude scale of the root triple (works on scalars and arrays)."""
    return np.maximum(1.0 / params.tau, math.sqrt(params.beta / params.tau) * r)


def _polish(lam: np.ndarray, r2, tau: float, beta: float) -> np.ndarray:
    """One or two Newton steps on the original cubic to restore last digits."""
    for _ in range(2):
        p = ((tau * lam + 1.0) * lam + beta * r2) * lam + r2
        dp = (3.0 * tau * lam + 2.0) * lam + beta * r2
        safe = np.where(dp == 0, 1.0, dp)
        lam = lam - np.where(dp == 0, 0.0, p / safe)
    return lam


def _roots_batch(r2: np.ndarray, params: ModelParams) -> np.ndarray:
    """Roots for an array of squared radii via stacked companion eigensolve.

    Returns (M, 3) complex; the r = 0 row is set exactly to (0, 0, -1/tau).
    """
    tau, beta = params.tau, params.beta
    r2 = np.asarray(r2, dtype=float)
    M = r2.shape[0]
    comp = np.zeros((M, 3, 3))
    comp[:, 0, 1] = 1.0
    comp[:, 1, 2] = 1.0
    comp[:, 2, 0] = -r2 / tau
    comp[:, 2, 1] = -beta * r2 / tau
    comp[:, 2, 2] = -1.0 / tau
    lam = np.linalg.eigvals(comp).astype(complex)
    lam = _polish(lam, r2[:, None], tau, beta)
    zero = r2 == 0.0
    if np.any(zero):
        lam[zero] = np.array([0.0, 0.0, -1.0 / tau], dtype=complex)
    return lam


def _min_gap(lam: np.ndarray) -> np.ndarray:
    """Smallest pairwise distance, vectorised over a (..., 3) root array."""
    g01 = np.abs(lam[..., 0] - lam[..., 1])
    g02 = np.abs(lam[..., 0] - lam[..., 2])
    g12 = np.abs(lam[..., 1] - lam[..., 2])
    return np.minimum(np.minimum(g01, g02), g12)


def _sort_roots(lam: np.ndarray) -> np.ndarray:
    """Canonical order: descending real part, ties broken by descending imag."""
    order = np.lexsort((-lam.imag, -lam.real))
    return lam[order]


def char_roots(r: float, params: ModelParams) -> CharacteristicTriple:
    """Roots of the characteristic cubic at one radius, Vieta-verified by tests."""
    lam = _roots_batch(np.array([r * r]), params)[0]
    lam = _sort_roots(lam)
    gap = float(_min_gap(lam))
    delta = _DELTA_ROOT * float(_root_scale(r, params))
    return CharacteristicTriple(roots=lam, min_gap=gap, degenerate=gap < delta)


def asymptotic_roots(r: float, params: ModelParams, regime: str) -> CharacteristicTriple:
    """Truncated root expansions.

    small:  +-i r - (beta-tau)/2 r^2   and  -1/tau + (beta-tau) r^2
    large:  -1/beta                    and  +-i sqrt(beta/tau) r - (beta-tau)/(2 beta tau)
    """
    if r <= 0.0:
        raise OutOfZone(f"expansions need r > 0, got r={r}")
    tau, beta = params.tau, params.beta
    if regime == "small":
        pair_re = -0.5 * (beta - tau) * r * r
        lam = np.array(
            [complex(pair_re, r), complex(pair_re, -r), complex(-1.0 / tau + (beta - tau) * r * r, 0.0)]
        )
    elif regime == "large":
        pair_re = -(beta - tau) / (2.0 * beta * tau)
        omega = math.sqrt(beta / tau) * r
        lam = np.array([complex(pair_re, omega), complex(pair_re, -omega), complex(-1.0 / beta, 0.0)])
    else:
        raise ValueError(f"regime must be 'small' or 'large', got {regime!r}")
    lam = _sort_roots(lam)
    gap = float(_min_gap(lam))
    delta = _DELTA_ROOT * float(_root_scale(r, params))
    return CharacteristicTriple(roots=lam, min_gap=gap, degenerate=gap < delta)


# ---------------------------------------------------------------------------
# Kernel evaluation
# ---------------------------------------------------------------------------

def _companion(r2: float, params: ModelParams) -> np.ndarray:
    tau, beta = params.tau, params.beta
    return np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-r2 / tau, -beta * r2 / tau, -1.0 / tau]])


def _kernel_confluent(t: float, r2: float, params: ModelParams, lam: np.ndarray) -> np.ndarray:
    """Newton form of exp(At) with divided differences from the Opitz matrix.

    Exact for any root configuration; used where partial fractions cancel.
    """
    Z = np.diag(lam) + np.diag(np.ones(2, dtype=complex), 1)
    F = expm(Z * t)  # F[i, j] = divided difference of exp(t .) over lam_i..lam_j
    A = _companion(r2, params).astype(complex)
    eye = np.eye(3)
    fA = F[0, 0] * eye + F[0, 1] * (A - lam[0] * eye) + F[0, 2] * (A - lam[0] * eye) @ (A - lam[1] * eye)
    return fA.T.real  # (e^{At})[d, m] -> K[m, d]


def _kernel_pf(t: float, lam: np.ndarray) -> np.ndarray:
    """Partial-fraction kernel: solve the Vandermonde system in the root basis."""
    V = np.vander(lam, 3, increasing=True).T  # V[d, j] = lam_j^d
    C = np.linalg.solve(V, np.eye(3))  # column m: weights of exp(lam_j t) for data slot m
    E = np.exp(lam * t)
    return np.einsum("jm,j,dj->md", C, E, V).real


def kernel_values(t: float, r: float, params: ModelParams) -> KernelValues:
    """Green-kernel matrix at one (t, r); identity at t = 0.

    Each column m of K.T solves the per-frequency mode equation with unit
    initial data in slot m; entry (m, d) carries the d-th time derivative.
    """
    if t < 0.0:
        raise ValueError(f"need t >= 0, got t={t}")
    triple = char_roots(r, params)
    lam = triple.roots
    scale = max(float(np.abs(lam).max()), 1.0 / params.tau)
    if triple.min_gap <= _CONFLUENT_GAP * scale:
        K = _kernel_confluent(t, r * r, params, lam)
    else:
        K = _kernel_pf(t, lam)
    return KernelValues(K=K)


# ---------------------------------------------------------------------------
# Vectorised mode tables (shared by the box solver and radial quadrature)
# ---------------------------------------------------------------------------

@dataclass
class ModeTable:
    """Precomputed root data for a set of radii; time enters only via exp."""

    r2: np.ndarray          # (M,)
    lam: np.ndarray         # (M, 3) complex
    coeff: np.ndarray       # (M, 3, 3); coeff[i, j, m] weights exp(lam_j t) in slot m
    confluent: np.ndarray   # (M,) bool: rows evaluated via the Newton/Opitz path
    params: ModelParams


def build_mode_table(r2: np.ndarray, params: ModelParams) -> ModeTable:
    r2 = np.asarray(r2, dtype=float)
    lam = _roots_batch(r2, params)
    gap = _min_gap(lam)
    scale = np.maximum(np.abs(lam).max(axis=1), 1.0 / params.tau)
    confluent = (gap <= _CONFLUENT_GAP * scale) | (r2 == 0.0)
    V = np.empty((len(r2), 3, 3), dtype=complex)
    for d in range(3):
        V[:, d, :] = lam**d
    coeff = np.zeros_like(V)
    ok = ~confluent
    if np.any(ok):
        coeff[ok] = np.linalg.solve(V[ok], np.broadcast_to(np.eye(3, dtype=complex), (int(ok.sum()), 3, 3)))
    return ModeTable(r2=r2, lam=lam, coeff=coeff, confluent=confluent, params=params)


def _kernel_r0(t: float, tau: float) -> np.ndarray:
    """Closed-form kernel at r = 0 (the cubic degenerates to tau y''' + y'' = 0)."""
    e = math.exp(-t / tau)
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [t, 1.0, 0.0],
            [tau * t + tau * tau * (e - 1.0), tau * (1.0 - e), e],
        ]
    )


def mode_propagator(table: ModeTable, t: float) -> np.ndarray:
    """(M, 3, 3) array: K[i, m, d] = d-th derivative of the slot-m kernel at r_i."""
    M = len(table.r2)
    E = np.exp(table.lam * t)  # (M, 3)
    lam = table.lam
    K = np.empty((M, 3, 3))
    CE = table.coeff * E[:, :, None]  # (M, j, m)
    for d in range(3):
        K[:, :, d] = np.einsum("ijm,ij->im", CE, lam**d).real
    if np.any(table.confluent):
        tau = table.params.tau
        for i in np.nonzero(table.confluent)[0]:
            if table.r2[i] == 0.0:
                K[i] = _kernel_r0(t, tau)
            else:
                K[i] = _kernel_confluent(t, float(table.r2[i]), table.params, lam[i])
    return K


def kernel_slot_series(table: ModeTable, t: float, m: int = 2, d: int = 0) -> np.ndarray:
    """Values of one kernel entry over all radii of the table at one time."""
    vals = np.einsum("ij,ij->i", table.coeff[:, :, m] * np.exp(table.lam * t), table.lam**d).real
    if np.any(table.confluent):
        for i in np.nonzero(table.confluent)[0]:
            if table.r2[i] == 0.0:
                vals[i] = _kernel_r0(t, table.params.tau)[m, d]
            else:
                vals[i] = _kernel_confluent(t, float(table.r2[i]), table.params, table.lam[i])[m, d]
    return vals


# ---------------------------------------------------------------------------
# phi-function columns for the exponential integrator
# ---------------------------------------------------------------------------

def _dd1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """First divided difference of exp: (e^a - e^b)/(a - b), uniformly stable.

    Written as e^{(a+b)/2} sinch((a-b)/2); Re of the nodes is <= 0 here so
    neither factor overflows.
    """
    mid = 0.5 * (a + b)
    half = 0.5 * (a - b)
    small = np.abs(half) < 1e-4
    hs = np.where(small, 1.0, half)
    sinch = np.where(small, 1.0 + half * half / 6.0, np.sinh(hs) / hs)
    return np.exp(mid) * sinch


def _hom_sym_series(nodes: list[np.ndarray], k: int, terms: int = 12) -> np.ndarray:
    """Divided difference of exp over k+1 clustered nodes via the symmetric series.

    exp[z_0..z_k] = sum_j h_j(z) / (k + j)! with complete homogeneous h_j;
    accurate for max|z| <~ 0.3.
    """
    shape = np.broadcast(*nodes).shape
    # complete homogeneous h_j via DP over nodes: H[j] <- H[j] + z * H[j-1]
    Hcur = [np.ones(shape, dtype=complex)] + [np.zeros(shape, dtype=complex) for _ in range(terms - 1)]
    for z in nodes:
        for j in range(1, terms):
            Hcur[j] = Hcur[j] + z * Hcur[j - 1]
    out = np.zeros(shape, dtype=complex)
    for j in range(terms - 1, -1, -1):
        out += Hcur[j] / math.factorial(k + j)
    return out


def _phi_tables(h: float, table: ModeTable) -> tuple[np.ndarray, np.ndarray]:
    """Third columns of phi1(hA) and phi2(hA) for every radius in the table.

    phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 extend to the matrix
    through the Newton form; their divided differences are divided differences
    of exp with the node 0 appended once or twice.
    """
    lam = table.lam
    z = lam * h  # (M, 3)
    M = z.shape[0]
    tau, beta = table.params.tau, table.params.beta

    # Order nodes (a, b, c) so |a - c| is the largest pairwise gap and |a| >= |c|.
    za, zb, zc = z[:, 0].copy(), z[:, 1].copy(), z[:, 2].copy()
    g_ab = np.abs(za - zb)
    g_ac = np.abs(za - zc)
    g_bc = np.abs(zb - zc)
    widest = np.argmax(np.stack([g_bc, g_ac, g_ab]), axis=0)  # index of node NOT in widest pair
    a = np.choose(widest, [zb, za, za])
    b = np.choose(widest, [za, zb, zc])
    c = np.choose(widest, [zc, zc, zb])
    swap = np.abs(a) < np.abs(c)
    a, c = np.where(swap, c, a), np.where(swap, a, c)

    maxabs = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(c))
    series = maxabs <= 0.25
    gap = _min_gap(z)
    loop_rows = (~series) & ((gap <= 1e-3 * (1.0 + maxabs)) | table.confluent)
    direct = ~(series | loop_rows)

    p1 = np.empty((M, 3), dtype=complex)  # phi1 prefixes [a], [a,b], [a,b,c]
    p2 = np.empty((M, 3), dtype=complex)

    if np.any(series):
        aa, bb, cc = a[series], b[series], c[series]
        zz = np.zeros_like(aa)
        p1[series, 0] = _hom_sym_series([aa, zz], 1)
        p1[series, 1] = _hom_sym_series([aa, bb, zz], 2)
        p1[series, 2] = _hom_sym_series([aa, bb, cc, zz], 3)
        p2[series, 0] = _hom_sym_series([aa, zz, zz], 2)
        p2[series, 1] = _hom_sym_series([aa, bb, zz, zz], 3)
        p2[series, 2] = _hom_sym_series([aa, bb, cc, zz, zz], 4)

    if np.any(direct):
        aa, bb, cc = a[direct], b[direct], c[direct]
        zz = np.zeros_like(aa)
        d_ab = _dd1(aa, bb)
        d_b0 = _dd1(bb, zz)
        d_bc = _dd1(bb, cc)
        d_c0 = _dd1(cc, zz)
        phi1_a = _dd1(aa, zz)  # exp[a,0]
        phi1_ab = (d_ab - d_b0) / aa  # exp[a,b,0]
        dd2_abc = (d_ab - d_bc) / (aa - cc)  # exp[a,b,c]
        # exp[b,c,0]: divide by the larger of |b|, |c| (dd's are symmetric)
        use_b = np.abs(bb) >= np.abs(cc)
        num = np.where(use_b, d_bc - d_c0, d_bc - d_b0)
        den = np.where(use_b, bb, cc)
        dd2_bc0 = num / den
        phi1_abc = (dd2_abc - dd2_bc0) / aa  # exp[a,b,c,0]
        phi2_a = (phi1_a - 1.0) / aa  # exp[a,0,0]
        # exp[b,0,0] and exp[c,0,0]: series near 0, phi2 is entire
        small_b = np.abs(bb) < 1e-3
        bb_safe = np.where(small_b, 1.0, bb)
        phi2_b = np.where(small_b, 0.5 + bb / 6.0 + bb * bb / 24.0, (d_b0 - 1.0) / bb_safe)
        phi2_ab = (phi1_ab - phi2_b) / aa  # exp[a,b,0,0]
        small_c = np.abs(cc) < 1e-3
        cc_safe = np.where(small_c, 1.0, cc)
        phi2_c = np.where(small_c, 0.5 + cc / 6.0 + cc * cc / 24.0, (d_c0 - 1.0) / cc_safe)
        num2 = np.where(use_b, dd2_bc0 - phi2_c, dd2_bc0 - phi2_b)
        phi2_bc = num2 / den  # exp[b,c,0,0]
        phi2_abc = (phi1_abc - phi2_bc) / aa  # exp[a,b,c,0,0]
        p1[direct] = np.stack([phi1_a, phi1_ab, phi1_abc], axis=1)
        p2[direct] = np.stack([phi2_a, phi2_ab, phi2_abc], axis=1)

    if np.any(loop_rows):
        for i in np.nonzero(loop_rows)[0]:
            nodes = np.concatenate(([0.0, 0.0], [a[i], b[i], c[i]])).astype(complex)
            T = np.diag(nodes) + np.diag(np.ones(4, dtype=complex), 1)
            E = expm(T)
            p2[i] = np.array([E[0, 2], E[0, 3], E[0, 4]])
            p1[i] = np.array([E[1, 2], E[1, 3], E[1, 4]])

    # Newton form applied to e2 = (0, 0, 1): columns of phi_k(hA).
    r2 = table.r2
    # v1 = (hA - a) e2, v2 = (hA - a)(hA - b) e2
    w0 = np.zeros(M, dtype=complex)
    w1 = np.full(M, h, dtype=complex)
    w2 = -h / tau - b  # (hA - b) e2 third component
    # (hA - a) @ w  with w = (0, h, w2)
    v2_0 = h * w1 - a * w0
    v2_1 = h * w2 - a * w1
    v2_2 = h * (-r2 * w0 - beta * r2 * w1 - w2) / tau - a * w2
    v1_1 = np.full(M, h, dtype=complex)
    v1_2 = -h / tau - a

    def col(p):
        # I e2 feeds only the third component; v1_0 = 0
        c0 = p[:, 2] * v2_0
        c1 = p[:, 1] * v1_1 + p[:, 2] * v2_1
        c2 = p[:, 0] + p[:, 1] * v1_2 + p[:, 2] * v2_2
        return np.stack([c0, c1, c2], axis=1).real

    return col(p1), col(p2)


@lru_cache(maxsize=64)
def _mid_zone_rate_cached(tau: float, beta: float, eps: float, N: float) -> float:
    """Slowest decay rate over the bounded zone: -max_r max_j Re lam_j(r).

    Coarse log scan refined by golden-section search on the best bracket.
    """
    params = ModelParams(tau, beta)

    def worst_re(r: float) -> float:
        lam = _roots_batch(np.array([r * r]), params)[0]
        return float(lam.real.max())

    rs = np.geomspace(eps, N, 200)
    vals = np.array([worst_re(r) for r in rs])
    i = int(np.argmax(vals))
    lo = rs[max(i - 1, 0)]
    hi = rs[min(i + 1, len(rs) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = worst_re(x1), worst_re(x2)
    for _ in range(60):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = worst_re(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = worst_re(x1)
    best = max(vals[i], f1, f2)
    return -best


def mid_zone_decay_rate(params: ModelParams, zones: ZoneConfig | None = None) -> float:
    """Calibrated exponential rate c of the bounded-zone envelope e^{-c t}."""
    zones = zones or default_zones(params)
    return _mid_zone_rate_cached(params.tau, params.beta, zones.eps, zones.N)


def envelope_bound(t: float, r: float, params: ModelParams, zones: ZoneConfig | None = None) -> float:
    """Zone-appropriate pointwise envelope shape (generic constant omitted).

    small zone:  (|cos(rt)| + |sin(rt)|/r) e^{-(beta-tau) r^2 t / 2} + e^{-t/tau}
    bounded:     e^{-c t} with the calibrated c
    large zone:  r^{-2} e^{-min((beta-tau)/(2 beta tau), 1/beta) t}
    """
    if t < 0.0:
        raise ValueError(f"need t >= 0, got t={t}")
    zones = zones or default_zones(params)
    tau, beta = params.tau, params.beta
    if r < zones.eps:
        osc = abs(math.cos(r * t)) + (abs(math.sin(r * t)) / r if r > 0.0 else t)
        return osc * math.exp(-0.5 * (beta - tau) * r * r * t) + math.exp(-t / tau)
    if r <= zones.N:
        c = mid_zone_decay_rate(params, zones)
        return math.exp(-c * t)
    rate = min((beta - tau) / (2.0 * beta * tau), 1.0 / beta)
    return math.exp(-rate * t) / (r * r)


def leading_profile_J(t: float, r: float, params: ModelParams, zones: ZoneConfig | None = None) -> float:
    """Small-frequency leading profile of the vanishing-data kernel.

    J = e^{-(beta-tau) r^2 t/2} / (T0^2 + r^2) *
        (sin(rt)/r * T0 + e^{-t/tau + 3(beta-tau) r^2 t/2} - cos(rt)),
    with T0 = 1/tau - 3(beta-tau) r^2 / 2.  J(0, r) = 0.
    """
    zones = zones or default_zones(params)
    if r >= zones.eps:
        raise OutOfZone(f"leading profile valid for r < eps = {zones.eps}, got r={r}")
    tau, beta = params.tau, params.beta
    T0 = 1.0 / tau - 1.5 * (beta - tau) * r * r
    sin_term = (math.sin(r * t) / r if r > 0.0 else t) * T0
    rest = math.exp(-t / tau + 1.5 * (beta - tau) * r * r * t) - math.cos(r * t)
    return math.exp(-0.5 * (beta - tau) * r * r * t) / (T0 * T0 + r * r) * (sin_term + rest)


# ---------------------------------------------------------------------------
# Viscoelastic comparison kernel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ViscoValues:
    """V[m, d] = d-th time derivative of the slot-m kernel of the second-order
    strongly damped wave mode equation; identity at t = 0."""

    V: np.ndarray  # (2, 2) real


def _visco_batch(t: float, r2: np.ndarray, beta: float) -> np.ndarray:
    """(M, 2, 2) array of kernels y'' + beta r^2 y' + r^2 y = 0 (unit data).

    Double root at r = 2/beta handled by a series in delta*t; elsewhere the
    two-exponential form is exact and cannot overflow (Re mu <= 0).
    """
    r2c = np.asarray(r2, dtype=complex)
    mu_bar = -0.5 * beta * r2c
    delta = np.sqrt(0.25 * beta * beta * r2c * r2c - r2c)
    z = delta * t
    small = np.abs(z) <= 1e-3 * (1.0 + np.abs(mu_bar) * t)

    d_safe = np.where(delta == 0, 1.0, delta)
    e1 = np.exp((mu_bar + delta) * t)
    e2 = np.exp((mu_bar - delta) * t)
    V1_d = (e1 - e2) / (2.0 * d_safe)
    V0_d = (e2 * (mu_bar + delta) - e1 * (mu_bar - delta)) / (2.0 * d_safe)
    dV1_d = ((mu_bar + delta) * e1 - (mu_bar - delta) * e2) / (2.0 * d_safe)

    sinch = 1.0 + z * z / 6.0 + z**4 / 120.0
    cosh_s = 1.0 + z * z / 2.0 + z**4 / 24.0
    ebar = np.exp(mu_bar * t)
    V1_s = ebar * t * sinch
    V0_s = ebar * (cosh_s - mu_bar * t * sinch)
    dV1_s = ebar * (cosh_s + mu_bar * t * sinch)

    V1 = np.where(small, V1_s, V1_d)
    V0 = np.where(small, V0_s, V0_d)
    dV1 = np.where(small, dV1_s, dV1_d)
    dV0 = -r2c * V1

    out = np.empty(r2c.shape + (2, 2))
    out[..., 0, 0] = V0.real
    out[..., 0, 1] = dV0.real
    out[..., 1, 0] = V1.real
    out[..., 1, 1] = dV1.real
    return out


def visco_kernel(t: float, r: float, beta: float) -> ViscoValues:
    """Kernel pair (V0, V1) with first time derivatives at one (t, r)."""
    if t < 0.0:
        raise ValueError(f"need t >= 0, got t={t}")
    if beta <= 0.0:
        raise ValueError(f"need beta > 0, got beta={beta}")
    return ViscoValues(V=_visco_batch(t, np.array([r * r]), beta)[0])
