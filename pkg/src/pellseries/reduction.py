"""Reduction theory of indefinite binary quadratic forms over exact integers.

Forms are (a, b, c) int triples with b^2 - 4ac = d > 0 non-square.  The rho
(right-neighbor) step is the continued-fraction expansion of the quadratic
irrational (b + sqrt(d)) / 2|c| in disguise; its orbits on reduced forms are
the form-class cycles, and one full traversal of a cycle yields the
fundamental automorph (t, u) with t^2 - d u^2 = 4.
"""

from __future__ import annotations

from math import isqrt

Form = tuple[int, int, int]

_MAX_REDUCE_STEPS = 100_000


def discriminant(f: Form) -> int:
    a, b, c = f
    return b * b - 4 * a * c


def is_reduced(f: Form, d: int, sqd: int) -> bool:
    """Reduced: 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b.

    Exact integer comparisons; d non-square makes all boundaries strict.
    """
    a, b, c = f
    return _is_reduced(a, b, c, d, sqd)


def principal_form(d: int) -> Form:
    """(1, s, (s^2 - d)/4) with s = d mod 2; discriminant d by construction."""
    s = d & 1
    return (1, s, (s * s - d) // 4)


def reduce_form(f: Form, d: int, sqd: int) -> Form:
    """Canonical reduction: apply normalizing rho steps until reduced."""
    a, b, c = f
    for _ in range(_MAX_REDUCE_STEPS):
        if _is_reduced(a, b, c, d, sqd):
            return (a, b, c)
        ac = abs(c)
        big = 2 * ac
        rm = (-b) % big
        if ac > sqd:
            r = rm if rm <= ac else rm - big
        else:
            r = sqd - ((sqd - rm) % big)
        a, b, c = c, r, (r * r - d) // (4 * c)
    raise RuntimeError(f"form reduction did not terminate for d={d}")


def _is_reduced(a: int, b: int, c: int, d: int, sqd: int) -> bool:
    if b <= 0 or b > sqd:
        return False
    t = 2 * abs(a)
    if (t + b) * (t + b) <= d:
        return False
    return t <= b or (t - b) * (t - b) < d


def rho(f: Form, d: int, sqd: int) -> Form:
    """Right neighbor of a reduced form (stays reduced, same discriminant)."""
    g, _ = rho_with_shift(f, d, sqd)
    return g


def rho_with_shift(f: Form, d: int, sqd: int) -> tuple[Form, int]:
    """Rho step plus the integer shift s of the underlying GL2 move
    [[0, -1], [1, s]]; the shifts multiply out to the cycle automorph."""
    _, b, c = f
    big = 2 * abs(c)
    r = sqd - ((sqd + b) % big)
    s, rem = divmod(b + r, 2 * c)
    if rem:
        raise RuntimeError(f"rho parity failure on {f} (d={d})")
    c2, rem = divmod(r * r - d, 4 * c)
    if rem:
        raise RuntimeError(f"rho divisibility failure on {f} (d={d})")
    return (c, r, c2), s


def cycle_of(f: Form, d: int, sqd: int) -> list[Form]:
    """The rho cycle through a reduced form f (f first; even length)."""
    out = [f]
    g = rho(f, d, sqd)
    while g != f:
        out.append(g)
        g = rho(g, d, sqd)
    return out


def fundamental_automorph(d: int) -> tuple[int, int]:
    """Minimal (t, u), t, u > 0, with t^2 - d u^2 = 4, for non-square
    d = 0 or 1 mod 4, d > 4.

    Walks the principal cycle once, accumulating the shift matrices; the
    product is the fundamental automorph of the principal form, whose trace
    and lower-left entry give (t, u).
    """
    sqd = isqrt(d)
    f0 = reduce_form(principal_form(d), d, sqd)
    a0 = f0[0]
    m00, m01, m10, m11 = 1, 0, 0, 1
    g = f0
    while True:
        g, s = rho_with_shift(g, d, sqd)
        m00, m01 = m01, -m00 + m01 * s
        m10, m11 = m11, -m10 + m11 * s
        if g == f0:
            break
    t = m00 + m11
    u, rem = divmod(m10, a0)
    if rem:
        raise RuntimeError(f"automorph entry not divisible by leading "
                           f"coefficient for d={d}")
    if t < 0:
        t, u = -t, -u
    u = abs(u)
    if t * t - d * u * u != 4 or u == 0:
        raise RuntimeError(f"automorph consistency check failed for d={d}")
    return t, u
