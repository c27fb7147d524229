"""Exact integer and modular arithmetic.

Factorization, the classical multiplicative functions, modular inverses,
and complete exponential sums: Kloosterman sums S(m,n;c) with a direct
O(c) evaluation and a CRT fast path, and Ramanujan sums through the
divisor-sum identity S(0,k;d) = sum_{c|(d,k)} c*mu(d/c).

Kloosterman sums are real (the a -> -a symmetry of the defining sum
conjugates every term), so values are returned as a real number plus the
magnitude of the discarded imaginary part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Factorization",
    "ExpSumValue",
    "NotInvertible",
    "factorize",
    "mobius",
    "euler_phi",
    "divisor_tau",
    "divisors",
    "mod_inverse",
    "kloosterman_direct",
    "kloosterman",
    "ramanujan",
]

#: Direct evaluations must leave an imaginary residue below this.
IMAG_TOL = 1e-9

_TRIAL_LIMIT = 10**6
_MAX_N = 2**63 - 1


class NotInvertible(ValueError):
    """gcd(a, c) > 1, so a has no inverse modulo c."""


@dataclass(frozen=True)
class Factorization:
    """An integer with its prime-power decomposition.

    ``factors`` is ordered by increasing prime; exponents are >= 1 and
    the product of prime**exponent equals ``n``.
    """

    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 0
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have strictly increasing primes, exponents >= 1")
            last = p
            prod *= p**e
        if prod != self.n:
            raise ValueError(f"factor product {prod} != n = {self.n}")


@dataclass(frozen=True)
class ExpSumValue:
    """Real value of a complete exponential sum plus the imaginary residue."""

    value: float
    residual_imag: float

    def __post_init__(self):
        if self.residual_imag > IMAG_TOL:
            raise ValueError(
                f"imaginary residue {self.residual_imag:.3e} exceeds tolerance {IMAG_TOL:.1e}"
            )


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """Brent-cycle Pollard rho with a deterministic parameter sweep."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"pollard rho failed on {n}")  # unreachable at desk scale


def factorize(n: int) -> Factorization:
    """Prime-power decomposition of n, 1 <= n <= 2**63 - 1.

    Trial division up to 1e6, then Miller-Rabin plus Pollard rho for any
    remaining cofactor. Deterministic.
    """
    n = int(n)
    if n < 1 or n > _MAX_N:
        raise ValueError(f"factorize requires 1 <= n <= 2**63 - 1, got {n}")
    m = n
    fac: dict[int, int] = {}
    for p in (2, 3, 5):
        while m % p == 0:
            fac[p] = fac.get(p, 0) + 1
            m //= p
    p = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while p * p <= m and p <= _TRIAL_LIMIT:
        while m % p == 0:
            fac[p] = fac.get(p, 0) + 1
            m //= p
        p += wheel[i]
        i = (i + 1) % 8
    if m > 1:
        stack = [m]
        while stack:
            q = stack.pop()
            if _is_prime(q):
                fac[q] = fac.get(q, 0) + 1
                continue
            d = _pollard_rho(q)
            stack.append(d)
            stack.append(q // d)
    return Factorization(n, tuple(sorted(fac.items())))


def mobius(n: int) -> int:
    """Mobius function by the squarefree sign rule."""
    if n < 1:
        raise ValueError("mobius requires n >= 1")
    fac = factorize(n).factors
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    """Count of units modulo n."""
    if n < 1:
        raise ValueError("euler_phi requires n >= 1")
    out = 1
    for p, e in factorize(n).factors:
        out *= (p - 1) * p ** (e - 1)
    return out


def divisor_tau(n: int) -> int:
    """Number of divisors of n."""
    if n < 1:
        raise ValueError("divisor_tau requires n >= 1")
    out = 1
    for _, e in factorize(n).factors:
        out *= e + 1
    return out


def divisors(n: int) -> list[int]:
    """All divisors of n, sorted."""
    out = [1]
    for p, e in factorize(n).factors:
        out = [d * p**j for d in out for j in range(e + 1)]
    return sorted(out)


def mod_inverse(a: int, c: int) -> int:
    """Multiplicative inverse of a modulo c, in [0, c)."""
    if c < 1:
        raise ValueError("mod_inverse requires c >= 1")
    if c == 1:
        return 0
    try:
        return pow(a, -1, c)
    except ValueError as exc:
        raise NotInvertible(f"{a} is not invertible mod {c}") from exc


@lru_cache(maxsize=512)
def _roots_of_unity(c: int) -> np.ndarray:
    """e(j/c) for j = 0..c-1. Cached per modulus; treat as read-only."""
    return np.exp(2j * np.pi * np.arange(c) / c)


@lru_cache(maxsize=512)
def _units_and_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Units a mod c paired with their inverses, as int64 arrays."""
    if c == 1:
        return np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64)
    units = []
    invs = []
    for a in range(1, c):
        if math.gcd(a, c) == 1:
            units.append(a)
            invs.append(pow(a, -1, c))
    return np.asarray(units, dtype=np.int64), np.asarray(invs, dtype=np.int64)


def _kloosterman_complex(m: int, n: int, c: int) -> complex:
    """S(m,n;c) as a complex number, by the defining unit sum.

    Phases n*a + m*abar are reduced exactly mod c and looked up in a
    cached table of c-th roots of unity, so no trig error accumulates.
    """
    if c == 1:
        return 1.0 + 0.0j
    m %= c
    n %= c
    units, invs = _units_and_inverses(c)
    phases = (n * units + m * invs) % c
    return complex(_roots_of_unity(c)[phases].sum())


def kloosterman_direct(m: int, n: int, c: int) -> ExpSumValue:
    """Kloosterman sum S(m,n;c) = sum over units a mod c of e((na + m*abar)/c).

    O(c) work. Negative m, n are reduced mod c.
    """
    if c < 1:
        raise ValueError("kloosterman_direct requires c >= 1")
    if c > 2**31:
        raise ValueError("direct evaluation is O(c); modulus too large")
    z = _kloosterman_complex(m, n, c)
    return ExpSumValue(z.real, abs(z.imag))


def kloosterman(m: int, n: int, c: int) -> ExpSumValue:
    """S(m,n;c) by twisted multiplicativity across the prime powers of c.

    For coprime c1*c2 = c, S(m,n;c) = S(m*c2bar^2, n; c1) * S(m*c1bar^2, n; c2);
    each prime-power factor is evaluated by the direct sum.
    """
    if c < 1:
        raise ValueError("kloosterman requires c >= 1")
    if c == 1:
        return ExpSumValue(1.0, 0.0)
    fac = factorize(c).factors
    value = 1.0
    residual = 0.0
    for p, e in fac:
        q = p**e
        cofactor = c // q
        twist = pow(cofactor, -2, q) if cofactor > 1 else 1
        part = kloosterman_direct(m * twist, n, q)
        # first-order residue propagation through the product
        residual = abs(part.value) * residual + abs(value) * part.residual_imag
        value *= part.value
    return ExpSumValue(value, residual)


def kloosterman_grid(ms, ns, c: int) -> tuple[np.ndarray, float]:
    """S(m,n;c) for all pairs of a small grid, sharing one pass over the
    units mod c. Returns (matrix indexed [i_m, j_n], max imaginary residue)."""
    if c < 1:
        raise ValueError("kloosterman_grid requires c >= 1")
    ms = np.asarray(ms, dtype=np.int64) % c if c > 1 else np.zeros(len(ms), dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64) % c if c > 1 else np.zeros(len(ns), dtype=np.int64)
    if c == 1:
        return np.ones((len(ms), len(ns))), 0.0
    units, invs = _units_and_inverses(c)
    roots = _roots_of_unity(c)
    out = np.empty((len(ms), len(ns)))
    resid = 0.0
    for i, m in enumerate(ms):
        base = (m * invs) % c
        phases = (ns[:, None] * units[None, :] + base[None, :]) % c
        z = roots[phases].sum(axis=1)
        out[i, :] = z.real
        resid = max(resid, float(np.max(np.abs(z.imag))))
    return out, resid


def ramanujan(k: int, d: int) -> int:
    """Ramanujan sum S(0,k;d) via the identity sum_{c|(d,k)} c*mu(d/c)."""
    if d < 1:
        raise ValueError("ramanujan requires d >= 1")
    g = d if k == 0 else math.gcd(d, abs(k))
    total = 0
    for c in divisors(g):
        total += c * mobius(d // c)
    return total
