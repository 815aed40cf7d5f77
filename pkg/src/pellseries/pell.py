"""Exact solutions of v^2 - d u^2 = 4, the fundamental unit
eps_d = (v_d + u_d sqrt(d))/2, its logarithm at controlled precision, and the
power/divisibility structure of the solution group.

All solution arithmetic is exact over Python ints; only log_epsilon touches
floating point, and it does so through mpmath at the configured precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Iterator, Optional

import mpmath

from .arith import require_omega
from .config import DEFAULT_PRECISION_BITS, working
from .reduction import fundamental_automorph

__all__ = [
    "PellSolution",
    "Regulator",
    "pell4_fundamental",
    "pell4_power",
    "pell4_powers",
    "pell4_compose",
    "pell4_brute",
    "nu_exponent",
    "log_epsilon",
]

NU_SEARCH_CAP = 10**6


@dataclass(frozen=True)
class PellSolution:
    """A positive solution (v, u) of v^2 - d u^2 = 4, exact."""
    d: int
    v: int
    u: int

    def __post_init__(self):
        if self.v <= 0 or self.u <= 0:
            raise ValueError(f"PellSolution needs v, u > 0, got ({self.v}, {self.u})")
        if self.v * self.v - self.d * self.u * self.u != 4:
            raise ValueError(f"({self.v}, {self.u}) does not solve "
                             f"v^2 - {self.d} u^2 = 4")

    @property
    def abscissa(self) -> int:
        """d u^2 = v^2 - 4, the Dirichlet-series denominator base."""
        return self.v * self.v - 4


@dataclass(frozen=True)
class Regulator:
    """ln eps_d for the fundamental unit eps_d = (v_d + u_d sqrt(d))/2."""
    d: int
    log_eps: mpmath.mpf

    def __post_init__(self):
        if not self.log_eps > 0:
            raise ValueError(f"regulator must be positive, got {self.log_eps}")


def pell4_fundamental(d: int) -> PellSolution:
    """Smallest positive solution of v^2 - d u^2 = 4.

    Continued-fraction based (principal reduced-form cycle, exact integers);
    never scans, so huge fundamental solutions are fine.
    """
    require_omega(d)
    t, u = fundamental_automorph(d)
    return PellSolution(d, t, u)


def pell4_compose(a: PellSolution, b: PellSolution) -> PellSolution:
    """Group law: (va + ua sqrt d)/2 * (vb + ub sqrt d)/2, exact."""
    if a.d != b.d:
        raise ValueError("cannot compose solutions for different d")
    d = a.d
    nv = a.v * b.v + d * a.u * b.u
    nu = a.v * b.u + a.u * b.v
    if nv % 2 or nu % 2:
        raise RuntimeError(f"composition parity failure for d={d}")
    return PellSolution(d, nv // 2, nu // 2)


def pell4_power(d: int, n: int, fundamental: Optional[PellSolution] = None) -> PellSolution:
    """(v_n, u_n) with (v_n + u_n sqrt d)/2 = eps_d^n, by the exact integer
    recurrence v' = (v1 v + d u1 u)/2, u' = (v1 u + u1 v)/2."""
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    base = fundamental if fundamental is not None else pell4_fundamental(d)
    sol = base
    for _ in range(n - 1):
        sol = pell4_compose(base, sol)
    return sol


def pell4_powers(d: int, fundamental: Optional[PellSolution] = None) -> Iterator[PellSolution]:
    """eps_d, eps_d^2, eps_d^3, ... as exact solutions."""
    base = fundamental if fundamental is not None else pell4_fundamental(d)
    sol = base
    while True:
        yield sol
        sol = pell4_compose(base, sol)


def pell4_brute(d: int, u_max: int) -> Optional[PellSolution]:
    """Scan u = 1..u_max for the first u with d u^2 + 4 a perfect square.

    Test oracle: independent of the continued-fraction path.
    """
    require_omega(d)
    for u in range(1, u_max + 1):
        t = d * u * u + 4
        v = isqrt(t)
        if v * v == t:
            return PellSolution(d, v, u)
    return None


def nu_exponent(d: int, l: int, cap: int = NU_SEARCH_CAP) -> int:
    """Smallest n >= 1 with l | u_n; then the fundamental solution for d*l^2
    is exactly (v_n, u_n / l).

    The u-sequence obeys u_{n+1} = v_1 u_n - u_{n-1} (unit trace recurrence),
    so the search runs mod l without big-integer growth.  Existence is
    guaranteed; the cap only guards against implementation bugs.
    """
    require_omega(d)
    if l < 1:
        raise ValueError(f"scale factor must be >= 1, got {l}")
    if l == 1:
        return 1
    base = pell4_fundamental(d)
    v1 = base.v % l
    prev, cur = 0, base.u % l
    n = 1
    while cur != 0:
        prev, cur = cur, (v1 * cur - prev) % l
        n += 1
        if n > cap:
            raise RuntimeError(
                f"nu_exponent(d={d}, l={l}) exceeded the search cap {cap}; "
                "this indicates a bug, not a data condition")
    return n


def log_epsilon(d: int, precision_bits: int | None = None) -> Regulator:
    """ln eps_d with relative error well below 1e-12.

    eps_d = v/2 + sqrt((v/2)^2 - 1) since d u^2 = v^2 - 4; mpmath keeps only
    the leading bits of v at the working precision, so huge v is cheap and
    never routed through machine floats.
    """
    sol = pell4_fundamental(d)
    return regulator_from_solution(sol, precision_bits)


def regulator_from_solution(sol: PellSolution,
                            precision_bits: int | None = None) -> Regulator:
    bits = precision_bits or DEFAULT_PRECISION_BITS
    with working(bits):
        half = mpmath.mpf(sol.v) / 2
        log_eps = mpmath.log(half + mpmath.sqrt(half * half - 1))
    return Regulator(sol.d, log_eps)
