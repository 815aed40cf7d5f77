"""Exact elementary number theory: factorization, divisor/Moebius functions,
the Kronecker symbol, and the gcd-derived multiplicative factors used by the
series coefficients.

Everything here is pure, deterministic and exact over Python ints.
"""

from __future__ import annotations

import threading
from array import array
from math import gcd, isqrt

__all__ = [
    "factorize",
    "divisors",
    "moebius",
    "tau",
    "even_part_root",
    "kronecker",
    "in_omega",
    "is_prime",
    "spf_sieve",
]

# Trial division handles everything below this; Pollard rho takes over above.
_TRIAL_LIMIT = 10**12

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)  # deterministic < 3.3e24


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (fixed witness set, valid far past 2^64)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """One nontrivial factor of composite odd n (deterministic: c = 1, 2, ...)."""
    c = 1
    while True:
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1


# Smallest-prime-factor sieve, grown on demand; shared by factorize() and the
# character-table builder.  Guarded by a lock so concurrent callers see a
# consistent array.
_spf: array = array("i", [0, 1])
_spf_lock = threading.Lock()


def spf_sieve(limit: int) -> array:
    """Smallest-prime-factor table for 0..limit (index 0 unused, spf[1] = 1)."""
    global _spf
    with _spf_lock:
        if len(_spf) > limit:
            return _spf
        size = max(limit + 1, 2 * len(_spf), 1 << 10)
        spf = array("i", [0]) * size
        spf[1] = 1
        for i in range(2, size):
            if spf[i] == 0:
                spf[i] = i
                for j in range(i * i, size, i):
                    if spf[j] == 0:
                        spf[j] = i
        _spf = spf
        return _spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization of n >= 1 as (prime, exponent) pairs, primes ascending.

    factorize(1) == []. Trial division below _TRIAL_LIMIT, Pollard rho above.
    """
    if n < 1:
        raise ValueError(f"factorize requires n >= 1, got {n}")
    if n == 1:
        return []
    spf = _spf
    if n < len(spf):
        out: list[tuple[int, int]] = []
        while n > 1:
            p = spf[n]
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out
    if n <= _TRIAL_LIMIT:
        return _factorize_trial(n)
    return sorted(_factorize_rho(n).items())


def _factorize_trial(n: int) -> list[tuple[int, int]]:
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    # remaining factors are 6k +- 1
    f = 5
    step = 2
    while f * f <= n:
        if n % f == 0:
            e = 0
            while n % f == 0:
                n //= f
                e += 1
            out.append((f, e))
        f += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return out


def _factorize_rho(n: int) -> dict[int, int]:
    if n == 1:
        return {}
    if is_prime(n):
        return {n: 1}
    if n % 2 == 0:
        d = 2
    else:
        d = _pollard_rho(n)
    left = _factorize_rho(d)
    right = _factorize_rho(n // d)
    for p, e in right.items():
        left[p] = left.get(p, 0) + e
    return left


def divisors(n: int) -> list[int]:
    """All positive divisors of n >= 1, ascending."""
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def tau(n: int) -> int:
    """Number of positive divisors of n."""
    out = 1
    for _, e in factorize(n):
        out *= e + 1
    return out


def moebius(n: int) -> int:
    """Moebius function: 0 if n has a square factor, else (-1)^(#prime factors)."""
    out = 1
    for _, e in factorize(n):
        if e > 1:
            return 0
        out = -out
    return out


def even_part_root(g: int) -> int:
    """The r with r^2 the greatest square (even prime-power) factor of g.

    r = prod p^floor(e/2) over the factorization of g; r^2 | g and g/r^2 is
    squarefree.
    """
    r = 1
    for p, e in factorize(g):
        r *= p ** (e // 2)
    return r


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n): the completely multiplicative extension of the
    Legendre symbol, with (a/2) = 0 for even a and +-1 by a mod 8, and
    (a/-1) = sign handling. Zero exactly when the arguments share a factor.
    """
    if a == 0 and n == 0:
        raise ValueError("kronecker(0, 0) is undefined")
    if n == 0:
        return 1 if a in (1, -1) else 0
    k = 1
    if n < 0:
        n = -n
        if a < 0:
            k = -k
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        v = 0
        while n % 2 == 0:
            n //= 2
            v += 1
        if v % 2 == 1 and a % 8 in (3, 5):
            k = -k
    # n odd and positive from here; standard reciprocity loop
    a %= n
    while a != 0:
        v = 0
        while a % 2 == 0:
            a //= 2
            v += 1
        if v % 2 == 1 and n % 8 in (3, 5):
            k = -k
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a, n = n % a, a
    return k if n == 1 else 0


def in_omega(d: int) -> bool:
    """Membership in the admissible discriminant set: d > 0, d = 0 or 1 mod 4,
    and d not a perfect square."""
    if d <= 0 or d % 4 not in (0, 1):
        return False
    r = isqrt(d)
    return r * r != d


def require_omega(d: int) -> None:
    """Raise ValueError unless d is an admissible discriminant."""
    if not in_omega(d):
        raise ValueError(f"d = {d} is not an admissible discriminant "
                         "(need d > 0, d = 0 or 1 mod 4, d non-square)")
