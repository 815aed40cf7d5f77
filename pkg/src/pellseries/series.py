"""Dirichlet series term streams and evaluation.

Every family is materialized as a list of terms (x, c) with x = d u^2 the
abscissa and c the folded coefficient, ordered by ascending x with ties
broken by (d, k).  Provenance keeps the per-(d, k, u) breakdown, which also
carries the k-dependent weight k^(1-2s) of the all-solutions family at
evaluation time (the streams themselves stay s-independent and cacheable).

Families:
    l     base stream, coefficients h_d ln eps_d at x = d u_d^2
    lbar  level-N fold: scaled class data over k | N with k | u_d
    LN    all inner solutions of v^2 - d k^2 u^2 = 4, k-weighted at eval
    L     termwise difference lbar - l (base parts tagged k = 0)
    L1    Moebius-weighted form of L, squarefree N only
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Iterator, Optional

import mpmath

from .arith import (divisors, even_part_root, factorize, in_omega, kronecker,
                    moebius)
from .config import DEFAULT_PRECISION_BITS, working
from .pell import PellSolution, pell4_fundamental, pell4_powers
from .quadforms import ClassData, class_data, class_data_from_solution, \
    ensure_class_numbers

__all__ = [
    "FAMILIES",
    "TermPart",
    "SeriesTerm",
    "SeriesSpec",
    "ComplexPoint",
    "trace_solutions",
    "enumerate_by_trace",
    "terms_l",
    "terms_lbar",
    "terms_big_l",
    "terms_l1",
    "terms_ln",
    "terms_for_spec",
    "eval_series",
    "coefficient_partial_sums",
    "write_terms",
    "format_mpf",
]

FAMILIES = ("l", "lbar", "LN", "L", "L1")

# The even-power factor is taken over gcd(d, N/k), following the series
# definition literally; audit note carried into serialized headers.
EVEN_POWER_NOTE = "even-power factor: gcd(d, N/k)"


@dataclass(frozen=True)
class TermPart:
    """One (d, k, u) contribution folded into a term; k = 0 tags the
    subtracted base-stream part of the difference family."""
    d: int
    k: int
    u: int
    value: mpmath.mpf


@dataclass(frozen=True)
class SeriesTerm:
    x: int
    c: mpmath.mpf
    provenance: tuple[TermPart, ...]


@dataclass(frozen=True)
class ComplexPoint:
    """Evaluation point s = sigma + it; the series are defined for sigma > 1/2."""
    sigma: float
    t: float = 0.0


@dataclass(frozen=True)
class SeriesSpec:
    family: str
    level: int = 1
    cutoff: int = 1000
    inner_cutoff: Optional[int] = None

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.level < 1:
            raise ValueError(f"level must be >= 1, got {self.level}")
        if self.cutoff < 5:
            raise ValueError(f"cutoff must be >= 5, got {self.cutoff}")
        if self.family == "L1" and moebius(self.level) == 0:
            raise ValueError(f"family L1 requires squarefree level, got {self.level}")
        if self.family == "LN" and (self.inner_cutoff or 0) < 1:
            raise ValueError("family LN requires inner_cutoff >= 1")


def trace_solutions(X: int) -> Iterator[PellSolution]:
    """All fundamental solutions with abscissa d u^2 = v^2 - 4 <= X, in
    ascending abscissa order (ties by d), by sweeping the trace v.

    For each v the splits v^2 - 4 = d u^2 with d admissible are read off the
    square divisors; the first v at which a d appears gives its fundamental
    solution, and at most tau(v^2 - 4) values of d appear per v.
    """
    seen: set[int] = set()
    v = 3
    while v * v - 4 <= X:
        n = v * v - 4
        batch = []
        u = 1
        while 5 * u * u <= n:
            uu = u * u
            if n % uu == 0:
                d = n // uu
                if d not in seen and in_omega(d):
                    batch.append((d, u))
            u += 1
        for d, u in sorted(batch):
            seen.add(d)
            yield PellSolution(d, v, u)
        v += 1


def enumerate_by_trace(X: int, precision_bits: int | None = None,
                       workers: int = 1) -> Iterator[ClassData]:
    """Class data for every d with fundamental abscissa <= X, ascending x."""
    sols = list(trace_solutions(X))
    ensure_class_numbers([s.d for s in sols], workers)
    for sol in sols:
        yield class_data_from_solution(sol, precision_bits)


def _fold(x: int, parts: list[TermPart],
          precision_bits: int | None) -> SeriesTerm:
    with working(precision_bits):
        c = mpmath.mpf(0)
        for p in parts:
            c = c + p.value
    return SeriesTerm(x=x, c=c, provenance=tuple(parts))


def _scaled_part(cd: ClassData, factor_int: int, num: int, den: int,
                 precision_bits: int | None) -> mpmath.mpf:
    """factor_int * (num/den) * h_d ln eps_d; exact shortcuts keep equal
    coefficients bit-identical across families."""
    if factor_int == 0 or num == 0:
        return mpmath.mpf(0)
    if factor_int == 1 and num == den == 1:
        return cd.hlog
    with working(precision_bits):
        return cd.hlog * (factor_int * num) / den


def terms_l(X: int, precision_bits: int | None = None,
            workers: int = 1) -> list[SeriesTerm]:
    """Base stream: one term h_d ln eps_d at x = d u_d^2 per admissible d."""
    out = []
    for cd in enumerate_by_trace(X, precision_bits, workers):
        part = TermPart(cd.d, 1, cd.pell.u, cd.hlog)
        out.append(SeriesTerm(x=cd.abscissa, c=cd.hlog, provenance=(part,)))
    return out


def _local_factor_int(d: int, level_over_k: int) -> int:
    """even_part_root(gcd(d, N/k)) * prod_{p | N/k} (1 + (d/p)), an integer."""
    f = even_part_root(gcd(d, level_over_k))
    for p, _ in factorize(level_over_k):
        f *= 1 + kronecker(d, p)
        if f == 0:
            return 0
    return f


def _scaling_fraction(d: int, k: int) -> tuple[int, int]:
    """k * prod_{p|k} (1 - (d/p)/p) as an exact fraction (num, den)."""
    num, den = k, 1
    for p, _ in factorize(k):
        num *= p - kronecker(d, p)
        den *= p
    return num, den


def terms_lbar(N: int, X: int, precision_bits: int | None = None,
               workers: int = 1) -> list[SeriesTerm]:
    """Level-N fold: for each d and each k | N with k | u_d, the contribution
    even_part_root(gcd(d, N/k)) * prod_{p|N/k}(1 + (d/p)) * h_{dk^2} ln eps_{dk^2}
    lands at x = d u_d^2 (scaled class data via the exact fraction, never by
    counting forms of discriminant d k^2)."""
    ks = divisors(N)
    out = []
    for cd in enumerate_by_trace(X, precision_bits, workers):
        parts = []
        for k in ks:
            if cd.pell.u % k:
                continue
            f = _local_factor_int(cd.d, N // k)
            num, den = _scaling_fraction(cd.d, k)
            value = _scaled_part(cd, f, num, den, precision_bits)
            parts.append(TermPart(cd.d, k, cd.pell.u, value))
        out.append(_fold(cd.abscissa, parts, precision_bits))
    return out


def terms_big_l(N: int, X: int, precision_bits: int | None = None,
                workers: int = 1) -> list[SeriesTerm]:
    """Termwise difference of the level-N fold and the base stream; the
    subtracted base part is tagged k = 0 in provenance."""
    out = []
    for term in terms_lbar(N, X, precision_bits, workers):
        d = term.provenance[0].d
        u = term.provenance[0].u
        cd = class_data(d, precision_bits=precision_bits)
        parts = list(term.provenance)
        parts.append(TermPart(d, 0, u, -cd.hlog))
        out.append(_fold(term.x, parts, precision_bits))
    return out


def terms_l1(N: int, X: int, precision_bits: int | None = None,
             workers: int = 1) -> list[SeriesTerm]:
    """Moebius-weighted family (squarefree N): for each divisor pair
    (m, k) != (1, 1) with k | u_d, fold k * mu(gcd(m,k))/gcd(m,k) * (d/m)
    * h_d ln eps_d into the term at x = d u_d^2."""
    if moebius(N) == 0:
        raise ValueError(f"level must be squarefree for this family, got {N}")
    ds = divisors(N)
    out = []
    for cd in enumerate_by_trace(X, precision_bits, workers):
        parts = []
        for k in ds:
            if cd.pell.u % k:
                continue
            weight = Fraction(0)
            for m in ds:
                if m == 1 and k == 1:
                    continue
                g = gcd(m, k)
                chi = kronecker(cd.d, m)
                if chi:
                    weight += Fraction(k * moebius(g) * chi, g)
            value = _scaled_part(cd, 1, weight.numerator, weight.denominator,
                                 precision_bits)
            parts.append(TermPart(cd.d, k, cd.pell.u, value))
        out.append(_fold(cd.abscissa, parts, precision_bits))
    return out


def terms_ln(N: int, X: int, U: int, precision_bits: int | None = None,
             workers: int = 1) -> list[SeriesTerm]:
    """All-solutions family: for each k | N and admissible d, the first U
    solutions (v, u) of v^2 - d k^2 u^2 = 4 contribute at x = d u^2 with the
    local factors of level N; the k^(1-2s) weight is applied at evaluation
    time through provenance."""
    if U < 1:
        raise ValueError(f"inner cutoff must be >= 1, got {U}")
    ks = divisors(N)
    raw: list[tuple[int, int, int, int]] = []  # (x, d, k, u)
    needed: set[int] = set()
    for k in ks:
        kk = k * k
        for d in range(5, X + 1):
            if not in_omega(d):
                continue
            fund = pell4_fundamental(d * kk)
            if d * fund.u * fund.u > X:
                continue
            count = 0
            for sol in pell4_powers(d * kk, fund):
                x = d * sol.u * sol.u
                if x > X or count >= U:
                    break
                raw.append((x, d, k, sol.u))
                needed.add(d)
                count += 1
    ensure_class_numbers(sorted(needed), workers)
    raw.sort()
    out = []
    i = 0
    while i < len(raw):
        x = raw[i][0]
        parts = []
        while i < len(raw) and raw[i][0] == x:
            _, d, k, u = raw[i]
            cd = class_data(d, precision_bits=precision_bits)
            f = _local_factor_int(d, N // k)
            num, den = 1, 1
            for p, _ in factorize(k):
                num *= p - kronecker(d, p)
                den *= p
            value = _scaled_part(cd, f, num, den, precision_bits)
            parts.append(TermPart(d, k, u, value))
            i += 1
        out.append(_fold(x, parts, precision_bits))
    return out


def terms_for_spec(spec: SeriesSpec, precision_bits: int | None = None,
                   workers: int = 1) -> list[SeriesTerm]:
    spec.validate()
    if spec.family == "l":
        return terms_l(spec.cutoff, precision_bits, workers)
    if spec.family == "lbar":
        return terms_lbar(spec.level, spec.cutoff, precision_bits, workers)
    if spec.family == "LN":
        return terms_ln(spec.level, spec.cutoff, spec.inner_cutoff or 1,
                        precision_bits, workers)
    if spec.family == "L":
        return terms_big_l(spec.level, spec.cutoff, precision_bits, workers)
    return terms_l1(spec.level, spec.cutoff, precision_bits, workers)


def eval_series(terms: Iterable[SeriesTerm], s: ComplexPoint,
                k_weight: bool = False,
                precision_bits: int | None = None) -> mpmath.mpc:
    """sum c x^(-s) over the stream in ascending-x order, deterministic.

    With k_weight set, each provenance part is weighted by k^(1-2s) (the
    all-solutions family); parts tagged k = 0 are rejected there.  Points
    with Re s <= 1/2 are outside the half-plane of definition.
    """
    if s.sigma <= 0.5:
        raise ValueError(f"evaluation requires Re s > 1/2, got sigma={s.sigma}")
    with working(precision_bits):
        sc = mpmath.mpc(s.sigma, s.t)
        total = mpmath.mpc(0)
        for term in terms:
            if k_weight:
                for part in term.provenance:
                    if part.value == 0:
                        continue
                    if part.k < 1:
                        raise ValueError("k-weighted evaluation needs k >= 1 parts")
                    total += part.value * mpmath.power(part.k, 1 - 2 * sc) \
                        * mpmath.power(term.x, -sc)
            else:
                if term.c != 0:
                    total += term.c * mpmath.power(term.x, -sc)
        return total


def coefficient_partial_sums(terms: Iterable[SeriesTerm],
                             grid: Iterable[int],
                             precision_bits: int | None = None) -> list[tuple[int, mpmath.mpf]]:
    """A(X) = sum_{x <= X} c at each grid point (grid ascending)."""
    points = sorted(grid)
    out = []
    with working(precision_bits):
        acc = mpmath.mpf(0)
        it = iter(sorted(terms, key=lambda t: t.x))
        term = next(it, None)
        for X in points:
            while term is not None and term.x <= X:
                acc = acc + term.c
                term = next(it, None)
            out.append((X, acc))
    return out


def format_mpf(x: mpmath.mpf, digits: int = 18) -> str:
    """Deterministic 18-significant-digit decimal rendering."""
    return mpmath.nstr(x, digits, strip_zeros=False)


def write_terms(terms: Iterable[SeriesTerm], fh, spec: SeriesSpec | None = None) -> None:
    """Line-oriented serialization: x, coefficient (18 significant digits),
    provenance triples d:k:u.  Bit-exact across runs for fixed config."""
    fh.write("# pellseries terms v1\n")
    if spec is not None:
        inner = spec.inner_cutoff if spec.inner_cutoff is not None else "-"
        fh.write(f"# family={spec.family} level={spec.level} "
                 f"cutoff={spec.cutoff} inner_cutoff={inner}\n")
    fh.write(f"# {EVEN_POWER_NOTE}\n")
    for term in terms:
        prov = ";".join(f"{p.d}:{p.k}:{p.u}" for p in term.provenance)
        fh.write(f"{term.x}\t{format_mpf(term.c)}\t{prov}\n")
