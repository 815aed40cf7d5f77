"""Class numbers of primitive indefinite binary quadratic forms, the
Dirichlet L-value cross-check, and the scaling of h_d ln eps_d to
non-fundamental discriminants.

h_d counts the cycles of reduced primitive forms under the rho operator
(proper equivalence).  That is the count satisfying Dirichlet's formula
h_d ln eps_d = sqrt(d) L(1, chi_d) with eps_d the fundamental +4-Pell unit,
which the verification suites test at scale.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import gcd, isqrt
from typing import NamedTuple, Optional, Sequence

import mpmath
import numpy as np

from .arith import divisors, kronecker, require_omega, spf_sieve
from .config import (DEFAULT_CROSSCHECK_T, DEFAULT_PRECISION_BITS,
                     DEFAULT_TAIL_CONSTANT, working)
from .pell import PellSolution, pell4_fundamental, regulator_from_solution
from .reduction import cycle_of, reduce_form, rho

__all__ = [
    "QuadForm",
    "ClassData",
    "reduced_forms",
    "class_number",
    "character_table",
    "max_partial_character_sum",
    "L1Value",
    "L1_chi",
    "class_data",
    "hlog_scaled",
    "ensure_class_numbers",
    "clear_caches",
]


@dataclass(frozen=True)
class QuadForm:
    """Primitive integral form a x^2 + b xy + c y^2 of discriminant b^2 - 4ac."""
    a: int
    b: int
    c: int

    def __post_init__(self):
        if gcd(gcd(self.a, self.b), self.c) != 1:
            raise ValueError(f"form ({self.a},{self.b},{self.c}) is not primitive")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        d = self.discriminant
        if d <= 0:
            return False
        sqd = isqrt(d)
        if sqd * sqd == d:
            return False
        b, t = self.b, 2 * abs(self.a)
        if b <= 0 or b > sqd:
            return False
        return (t + b) ** 2 > d and (t <= b or (t - b) ** 2 < d)

    def neighbor(self) -> "QuadForm":
        """Right neighbor under the reduction (rho) step."""
        d = self.discriminant
        g = rho((self.a, self.b, self.c), d, isqrt(d))
        return QuadForm(*g)


def reduced_forms(d: int) -> list[tuple[int, int, int]]:
    """All reduced primitive forms of discriminant d, sorted.

    b runs over the parity class of d in (0, sqrt(d)); for each b the split
    |a| * |c| = (d - b^2)/4 runs over divisors with sqrt(d) - b < 2|a| <
    sqrt(d) + b, in both sign patterns (a, -c), (-a, c).
    """
    require_omega(d)
    sqd = isqrt(d)
    spf_sieve(d // 4 + 1)
    out = []
    b = 2 - (d & 1)
    while b <= sqd:
        m = (d - b * b) // 4
        for a in divisors(m):
            t = 2 * a
            if (t + b) ** 2 <= d:
                continue
            if t > b and (t - b) ** 2 >= d:
                continue
            c = m // a
            if gcd(gcd(a, b), c) != 1:
                continue
            out.append((a, b, -c))
            out.append((-a, b, c))
        b += 2
    out.sort()
    return out


def class_number(d: int) -> int:
    """Number of classes of primitive forms of discriminant d: the count of
    rho cycles partitioning the reduced forms."""
    cached = _h_cache.get(d)
    if cached is not None:
        return cached
    h = _class_number_uncached(d)
    with _cache_lock:
        _h_cache[d] = h
    return h


def _class_number_uncached(d: int) -> int:
    forms = reduced_forms(d)
    sqd = isqrt(d)
    remaining = set(forms)
    h = 0
    for f in forms:
        if f not in remaining:
            continue
        h += 1
        g = f
        while True:
            remaining.discard(g)
            g = rho(g, d, sqd)
            if g == f:
                break
            if g not in remaining and g != f:
                raise RuntimeError(f"rho left the reduced set at {g} (d={d})")
    return h


def ensure_class_numbers(ds: Sequence[int], workers: int = 1) -> None:
    """Precompute class numbers for the given discriminants.

    With workers > 1 the pure-integer counting runs in a process pool; the
    merge is by sorted d, so results are identical to the serial path.
    """
    missing = sorted({d for d in ds if d not in _h_cache})
    if not missing:
        return
    if workers > 1 and len(missing) > 8:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
        with ctx.Pool(workers) as pool:
            hs = pool.map(_class_number_uncached, missing, chunksize=16)
        with _cache_lock:
            _h_cache.update(zip(missing, hs))
    else:
        for d in missing:
            class_number(d)


def character_table(d: int) -> np.ndarray:
    """chi_d(n) = kronecker(d, n) for n = 0..d-1 (period d for d = 0,1 mod 4).

    Built multiplicatively off the smallest-prime-factor sieve; direct symbol
    evaluations happen only at primes.
    """
    spf = spf_sieve(d)
    tab = np.zeros(d, dtype=np.int8)
    if d > 1:
        tab[1] = 1
    for n in range(2, d):
        p = spf[n]
        if p == n:
            tab[n] = kronecker(d, n)
        else:
            tab[n] = tab[p] * tab[n // p]
    return tab


def max_partial_character_sum(d: int) -> int:
    """max_x |sum_{n<=x} chi_d(n)|, exact; the sum over a full period is 0,
    so the maximum over one period is the global maximum."""
    tab = character_table(d)
    period = np.concatenate([tab[1:], tab[:1]]).astype(np.int64)
    sums = np.cumsum(period)
    if sums[-1] != 0:
        raise RuntimeError(f"character sum over a period is {sums[-1]} != 0 (d={d})")
    return int(np.max(np.abs(sums)))


class L1Value(NamedTuple):
    value: mpmath.mpf
    error_bound: mpmath.mpf


def L1_chi(d: int, T: int, tail_constant: float = DEFAULT_TAIL_CONSTANT,
           precision_bits: int | None = None) -> L1Value:
    """Truncated L(1, chi_d) = sum_{n<=T} kronecker(d, n)/n with a rigorous
    tail bound tail_constant * sqrt(d) * ln(d) / T.

    The bound follows from Abel summation against the periodic partial
    character sums; the default constant dominates the exactly computed
    2 * S_max / (T+1) for every admissible d (asserted in the tests).
    """
    require_omega(d)
    if T < d:
        raise ValueError(f"need T >= d, got T={T} < d={d}")
    tab = character_table(d)
    total = 0.0
    chunk = 1 << 20
    for lo in range(1, T + 1, chunk):
        hi = min(lo + chunk - 1, T)
        n = np.arange(lo, hi + 1, dtype=np.int64)
        total += float(np.sum(tab[n % d] / n))
    with working(precision_bits):
        value = mpmath.mpf(total)
        bound = mpmath.mpf(tail_constant) * mpmath.sqrt(d) * mpmath.log(d) / T
    return L1Value(value, bound)


@dataclass(frozen=True)
class ClassData:
    """Per-discriminant record: class number, fundamental Pell solution,
    regulator, and their product h * ln eps (the series coefficient atom,
    computed once so equal coefficients are bit-identical)."""
    d: int
    h: int
    pell: PellSolution
    log_eps: mpmath.mpf
    hlog: mpmath.mpf

    @property
    def abscissa(self) -> int:
        return self.pell.abscissa


_h_cache: dict[int, int] = {}
_cd_cache: dict[tuple[int, int], ClassData] = {}
_cache_lock = threading.Lock()


def clear_caches() -> None:
    with _cache_lock:
        _h_cache.clear()
        _cd_cache.clear()


def class_data(d: int, crosscheck: bool = False,
               T: int = DEFAULT_CROSSCHECK_T,
               tail_constant: float = DEFAULT_TAIL_CONSTANT,
               precision_bits: int | None = None) -> ClassData:
    """Assemble (d, h_d, (v_d, u_d), ln eps_d); optionally cross-check the
    class number formula h ln eps = sqrt(d) L(1, chi_d) against the truncated
    character sum.  A cross-check failure is an internal bug, not data."""
    bits = precision_bits or DEFAULT_PRECISION_BITS
    key = (d, bits)
    cd = _cd_cache.get(key)
    if cd is None:
        sol = pell4_fundamental(d)
        cd = _assemble(sol, bits)
    if crosscheck:
        _crosscheck(cd, max(T, d), tail_constant, bits)
    return cd


def class_data_from_solution(sol: PellSolution,
                             precision_bits: int | None = None) -> ClassData:
    """Same record, with the fundamental solution already known (trace
    enumeration path); cached identically to class_data."""
    bits = precision_bits or DEFAULT_PRECISION_BITS
    cd = _cd_cache.get((sol.d, bits))
    return cd if cd is not None else _assemble(sol, bits)


def _assemble(sol: PellSolution, bits: int) -> ClassData:
    d = sol.d
    h = class_number(d)
    reg = regulator_from_solution(sol, bits)
    with working(bits):
        hlog = mpmath.mpf(h) * reg.log_eps
    cd = ClassData(d=d, h=h, pell=sol, log_eps=reg.log_eps, hlog=hlog)
    with _cache_lock:
        _cd_cache.setdefault((d, bits), cd)
    return _cd_cache[(d, bits)]


def _crosscheck(cd: ClassData, T: int, tail_constant: float, bits: int) -> None:
    l1 = L1_chi(cd.d, T, tail_constant, bits)
    with working(bits):
        sqd = mpmath.sqrt(cd.d)
        lhs = abs(cd.hlog - sqd * l1.value)
        allowed = cd.h * cd.log_eps * mpmath.mpf(2) ** (-(bits - 8)) \
            + sqd * l1.error_bound
    if not lhs <= allowed:
        raise RuntimeError(
            f"class number formula cross-check failed for d={cd.d}: "
            f"|h ln eps - sqrt(d) L1| = {mpmath.nstr(lhs, 8)} exceeds "
            f"{mpmath.nstr(allowed, 8)}")


def hlog_scaled(d: int, k: int, precision_bits: int | None = None) -> mpmath.mpf:
    """h_{d k^2} ln eps_{d k^2} computed from the base record by the exact
    scaling h_{dk^2} ln eps_{dk^2} = k * prod_{p|k} (1 - (d/p)/p) * h_d ln eps_d
    (never by counting forms of discriminant d k^2; that independent path is
    the verifier)."""
    require_omega(d)
    if k < 1:
        raise ValueError(f"scale factor must be >= 1, got {k}")
    require_omega(d * k * k)
    cd = class_data(d, precision_bits=precision_bits)
    if k == 1:
        return cd.hlog
    num = 1
    den = 1
    kk = k
    for p in _prime_divisors(k):
        num *= p - kronecker(d, p)
        den *= p
    with working(precision_bits):
        return cd.hlog * (kk * num) / den


def _prime_divisors(n: int) -> list[int]:
    from .arith import factorize
    return [p for p, _ in factorize(n)]
