"""Theoretical decay laws and admissibility windows.

Every rate returned here is a *shape*: the implicit constants of the
underlying estimates are never fixed, so experiments compare measured decay
against these shapes via fitted exponents, not absolute values.

Rate families
-------------
``rate_D``        two-sided optimal rate for mass-carrying weighted-L1 data
                  (sqrt(t), sqrt(log t), or t^{-(n-2)/4}).
``rate_F``        L^m-cap-L2 to L2 rate, four branches selected by comparing
                  q = 2sm + (2-m)n against 2m and 2+m.
``rate_g_tilde``  the m=1 specialisation used by the semilinear theory;
                  ``rate_g(n, t) == rate_g_tilde(n, 0, t)``.
``rate_h``        plain L2-L2 rate (no extra integrability assumed).

Admissibility
-------------
``global_existence_admissible`` encodes the full hypothesis list of the
small-data global existence theorem (dimension/regularity window, p >= 2,
Gagliardo-Nirenberg upper bounds, and the dimension-dependent lower bounds).
``blowup_admissible`` encodes the nonexistence range (all p > 1 in 1D,
p <= (n+1)/(n-1) for n >= 2).  The two regimes are disjoint.

Branch comparisons use exact rational arithmetic when all inputs are ints or
Fractions, and a 1e-12 relative tolerance otherwise: a silently misselected
branch would corrupt every downstream fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import DomainError, InvalidDimension, OutOfRange

_REL_TOL = 1e-12


def _cmp(a, b) -> int:
    """Three-way compare; exact when both sides are int/Fraction."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return (a > b) - (a < b)
    a, b = float(a), float(b)
    scale = max(abs(a), abs(b), 1.0)
    if abs(a - b) <= _REL_TOL * scale:
        return 0
    return (a > b) - (a < b)


@dataclass(frozen=True)
class RateSpec:
    """A decay law evaluable at any admissible t.

    value(t) = (1+t)^power_t * (log(e+t))^power_log, or (log t)^power_log
    when pure_log_of_t is set (then only defined for t > 1).
    """

    power_t: float = 0.0
    power_log: float = 0.0
    pure_log_of_t: bool = False

    def evaluate(self, t: float) -> float:
        if self.pure_log_of_t:
            if t <= 1.0:
                raise DomainError(f"pure-log rate defined for t > 1, got t={t}")
            return math.log(t) ** self.power_log
        if t < 0.0:
            raise DomainError(f"rate defined for t >= 0, got t={t}")
        return (1.0 + t) ** self.power_t * math.log(math.e + t) ** self.power_log


def rate_D(n: int, t: float) -> float:
    """Optimal two-sided rate for data with nonzero mass.

    sqrt(t) for n=1, sqrt(log t) for n=2 (t > 1 only), t^{-(n-2)/4} for n>=3.
    """
    if n < 1:
        raise InvalidDimension(f"need n >= 1, got {n}")
    if n == 2:
        if t <= 1.0:
            raise DomainError(f"rate_D(2, t) defined for t > 1, got t={t}")
        return math.sqrt(math.log(t))
    if t <= 0.0:
        raise DomainError(f"rate_D({n}, t) defined for t > 0, got t={t}")
    if n == 1:
        return math.sqrt(t)
    return t ** (-(n - 2) / 4.0)


def rate_F(m, n: int, s, t: float) -> float:
    """L^m cap L2 -> L2 rate; branch selected by q = 2sm + (2-m)n.

    q >= 2+m gives the main branch (1+t)^{1/2 - s/2 - n(2-m)/(4m)}.  Below
    that threshold the small-frequency singularity changes the picture:
    q < 2m, q = 2m (extra log factor), and 2m < q < 2+m each get their own
    exponent.
    """
    if n < 1:
        raise InvalidDimension(f"need n >= 1, got {n}")
    if _cmp(m, 1) < 0 or _cmp(m, 2) >= 0:
        raise OutOfRange(f"need m in [1, 2), got m={m}")
    if _cmp(s, 0) < 0 or _cmp(s, 2) > 0:
        raise OutOfRange(f"need s in [0, 2], got s={s}")
    if t < 0.0:
        raise DomainError(f"need t >= 0, got t={t}")
    q = 2 * s * m + (2 - m) * n
    main = 0.5 - s / 2 - n * (2 - m) / (4 * m)
    c = _cmp(q, 2 * m)
    if c < 0:
        return (1.0 + t) ** float(1 - s - n * (2 - m) / (2 * m))
    if c == 0:
        return (1.0 + t) ** float(main) * math.log(math.e + t) ** float((2 - m) / (2 * m))
    if _cmp(q, 2 + m) < 0:
        extra = (2 + m - q) / (2 * (2 + m))
        return (1.0 + t) ** float(main + extra)
    return (1.0 + t) ** float(main)


def rate_g_tilde(n: int, s, t: float) -> float:
    """Semilinear-theory rate (the m=1 case), four branches.

    n=2: log^{1/2} at s=0, (1+t)^{(1-5s)/6} for s in (0,1/2),
    (1+t)^{-s/2} for s in [1/2,2].  n>=3: (1+t)^{1/2-s/2-n/4}.
    """
    if n < 2:
        raise InvalidDimension(f"need n >= 2, got {n}")
    if _cmp(s, 0) < 0 or _cmp(s, 2) > 0:
        raise OutOfRange(f"need s in [0, 2], got s={s}")
    if t < 0.0:
        raise DomainError(f"need t >= 0, got t={t}")
    if n == 2:
        if _cmp(s, 0) == 0:
            return math.sqrt(math.log(math.e + t))
        if _cmp(s, 0.5) < 0:
            return (1.0 + t) ** float((1 - 5 * s) / 6)
        return (1.0 + t) ** float(-s / 2)
    return (1.0 + t) ** float(0.5 - s / 2 - n / 4)


def rate_g(n: int, t: float) -> float:
    """Plain-L2 semilinear rate: rate_g_tilde with s = 0."""
    return rate_g_tilde(n, 0, t)


def rate_h(s, t: float) -> float:
    """L2 -> L2 rate: (1+t)^{1-s/2} for s in [0,1), (1+t)^{1/2-s/2} for s in [1,2]."""
    if _cmp(s, 0) < 0 or _cmp(s, 2) > 0:
        raise OutOfRange(f"need s in [0, 2], got s={s}")
    if t < 0.0:
        raise DomainError(f"need t >= 0, got t={t}")
    if _cmp(s, 1) < 0:
        return (1.0 + t) ** float(1 - s / 2)
    return (1.0 + t) ** float(0.5 - s / 2)


def rate_spec_D(n: int) -> RateSpec:
    if n < 1:
        raise InvalidDimension(f"need n >= 1, got {n}")
    if n == 1:
        return RateSpec(power_t=0.5)
    if n == 2:
        return RateSpec(power_log=0.5, pure_log_of_t=True)
    return RateSpec(power_t=-(n - 2) / 4.0)


def rate_spec_g_tilde(n: int, s) -> RateSpec:
    if n < 2:
        raise InvalidDimension(f"need n >= 2, got {n}")
    if n == 2:
        if _cmp(s, 0) == 0:
            return RateSpec(power_log=0.5)
        if _cmp(s, 0.5) < 0:
            return RateSpec(power_t=float((1 - 5 * s) / 6))
        return RateSpec(power_t=float(-s / 2))
    return RateSpec(power_t=float(0.5 - s / 2 - n / 4))


class Admissibility(NamedTuple):
    """Boolean verdict plus the first violated clause (or 'admissible')."""

    ok: bool
    reason: str

    def __bool__(self) -> bool:  # noqa: D105
        return self.ok


def global_existence_admissible(n: int, s, p) -> Admissibility:
    """Check every hypothesis of the small-data global existence theorem.

    Clauses, in order: the (n, s) window; p >= 2; the Gagliardo-Nirenberg
    upper bounds (p <= 2n/(n-s) when s < n <= 3s, p <= n/(n-2s) when
    3s < n <= 4s, no statement when n > 4s); and the dimension-dependent
    lower bound table.  Boundary strictness follows the theorem clause by
    clause: some bounds are strict, some are not.
    """
    if n < 2:
        return Admissibility(False, f"theorem covers n >= 2, got n={n}")
    if n == 2:
        if _cmp(s, 0.5) < 0 or _cmp(s, 2) > 0:
            return Admissibility(False, f"n=2 needs s in [1/2, 2], got s={s}")
    else:
        if _cmp(s, 0) <= 0 or _cmp(s, 2) > 0:
            return Admissibility(False, f"n>=3 needs s in (0, 2], got s={s}")
    if _cmp(p, 2) < 0:
        return Admissibility(False, f"need p >= 2, got p={p}")

    # Gagliardo-Nirenberg upper bounds.
    if _cmp(n, s) <= 0:
        pass  # 1 < n <= s: no upper bound
    elif _cmp(n, 3 * s) <= 0:
        bound = 2 * n / (n - s)
        if _cmp(p, bound) > 0:
            return Admissibility(False, f"need p <= 2n/(n-s) = {float(bound)}, got p={p}")
    elif _cmp(n, 4 * s) <= 0:
        bound = n / (n - 2 * s)
        if _cmp(p, bound) > 0:
            return Admissibility(False, f"need p <= n/(n-2s) = {float(bound)}, got p={p}")
    else:
        return Admissibility(False, f"n > 4s (n={n}, s={s}): theorem inapplicable")

    # Lower bound table; strictness varies per clause.
    s_below_1 = _cmp(s, 1) < 0
    if n == 2:
        if s_below_1:
            if _cmp(p, 5) <= 0:
                return Admissibility(False, f"n=2, s in [1/2,1) needs p > 5, got p={p}")
        else:
            if _cmp(p, s + 3) <= 0:
                return Admissibility(False, f"n=2, s in [1,2] needs p > s+3 = {float(s + 3)}, got p={p}")
    elif n <= 6:
        if s_below_1:
            bound = (n + 3) / (n - 1)
            if _cmp(p, bound) < 0:
                return Admissibility(False, f"3<=n<=6, s<1 needs p >= (n+3)/(n-1) = {float(bound)}, got p={p}")
        else:
            bound = (n + 2) / (n - 1)
            if _cmp(p, bound) <= 0:
                return Admissibility(False, f"3<=n<=6, s>=1 needs p > (n+2)/(n-1) = {float(bound)}, got p={p}")
    else:
        if s_below_1:
            bound = max(3 * n / 2 - 1, n + 3) / (n - 1)
        else:
            bound = (3 * n / 2 - 1) / (n - 1)
        if _cmp(p, bound) < 0:
            return Admissibility(False, f"n>=7 needs p >= {float(bound)}, got p={p}")
    return Admissibility(True, "admissible")


def blowup_admissible(n: int, p) -> bool:
    """Nonexistence range for positive-mean data: all p in 1D, p <= (n+1)/(n-1) else."""
    if n < 1:
        raise InvalidDimension(f"need n >= 1, got {n}")
    if _cmp(p, 1) <= 0:
        raise OutOfRange(f"need p > 1, got p={p}")
    if n == 1:
        return True
    return _cmp(p, (n + 1) / (n - 1)) <= 0
