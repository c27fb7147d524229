"""Cusp-form data: normalized Hecke eigenvalues and the elementary
coefficient sums built on them.

Coefficients are stored Deligne-normalized (lambda, not raw a(n)).
A self-contained oracle for the level-1 weight-12 form computes tau(n)
exactly by multiplying out q * prod (1-q^m)^24 with integer power-series
arithmetic; everything else is ingested from local files or the LMFDB
web service (see rankinlab.lmfdb).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from .arith import divisor_tau, divisors, factorize

__all__ = [
    "CuspForm",
    "CoefficientSource",
    "InsufficientCoefficients",
    "InvariantViolation",
    "MalformedData",
    "delta_oracle",
    "tau_coefficients",
    "load_form",
    "parse_coefficient_file",
    "hecke_check",
    "wilton_sum",
    "rankin_sum",
]


class InsufficientCoefficients(LookupError):
    """The requested range exceeds the stored coefficient table."""


class InvariantViolation(ValueError):
    """A loaded form fails a normalization or bound invariant."""


class MalformedData(ValueError):
    """A coefficient payload could not be parsed; names the failing field."""


@dataclass(frozen=True)
class CuspForm:
    """A holomorphic or Maass newform with a finite eigenvalue table.

    lam[n] holds the normalized Hecke eigenvalue for 1 <= n <= n_max
    (lam[0] is unused). Maass forms are data-only: the spectral parameter
    is trusted metadata, never computed here.
    """

    kind: str                      # "holomorphic" | "maass"
    level: int
    weight: Optional[int]          # even >= 2 for holomorphic
    spectral: Optional[float]      # t_f for maass
    lam: np.ndarray
    is_newform: bool = True
    label: str = ""
    atkin_lehner: Optional[dict[int, float]] = None  # eta(N2) when known
    reflection: Optional[float] = None               # eps_f for maass

    def __post_init__(self):
        if self.kind not in ("holomorphic", "maass"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "holomorphic":
            if self.weight is None or self.weight < 2 or self.weight % 2:
                raise ValueError("holomorphic forms need an even weight >= 2")
        elif self.spectral is None:
            raise ValueError("maass forms need a spectral parameter")
        if self.level < 1:
            raise ValueError("level must be positive")

    @property
    def n_max(self) -> int:
        return len(self.lam) - 1

    def lam_at(self, n: int) -> float:
        if not 1 <= n <= self.n_max:
            raise InsufficientCoefficients(
                f"lambda({n}) requested, table holds n <= {self.n_max}")
        return float(self.lam[n])

    def lam_range(self, n_hi: int) -> np.ndarray:
        """lam[1..n_hi] as a view; raises if the table is too short."""
        if n_hi > self.n_max:
            raise InsufficientCoefficients(
                f"need coefficients to {n_hi}, table holds {self.n_max}")
        return self.lam[1:n_hi + 1]

    @property
    def archimedean_t(self) -> float:
        """t_f: (k-1)/2 for holomorphic, the spectral parameter otherwise."""
        if self.kind == "holomorphic":
            return (self.weight - 1) / 2.0
        return float(self.spectral)

    def whittaker(self, y):
        """The archimedean weight W_f(y) of the unified Fourier expansion."""
        y = np.asarray(y, dtype=float)
        if self.kind == "holomorphic":
            k = self.weight
            return (4 * np.pi * y) ** (k / 2.0) * np.exp(-2 * np.pi * y) \
                / math.sqrt(math.gamma(k))
        from .specialfn import bessel_k_imag_many
        t = float(self.spectral)
        vals, _ = bessel_k_imag_many(t / 2.0, 2 * np.pi * y)
        return np.sqrt(y) * math.cosh(0.5 * math.pi * t) * vals


@dataclass(frozen=True)
class CoefficientSource:
    """Where coefficients come from: a local file or the LMFDB service."""

    kind: str                # "local_file" | "lmfdb"
    location: str            # path, or service base URL ("" = default)
    cache_dir: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("local_file", "lmfdb"):
            raise ValueError(f"unknown source kind {self.kind!r}")


# ---------------------------------------------------------------------------
# Exact eta-product oracle for tau(n)

def _pack_signed(coeffs: list[int], block_bytes: int) -> int:
    """Evaluate sum c_i * B^i at B = 256**block_bytes, c_i of either sign."""
    pos = bytearray(len(coeffs) * block_bytes)
    neg = bytearray(len(coeffs) * block_bytes)
    for i, c in enumerate(coeffs):
        if c > 0:
            pos[i * block_bytes:(i + 1) * block_bytes] = c.to_bytes(block_bytes, "little")
        elif c < 0:
            neg[i * block_bytes:(i + 1) * block_bytes] = (-c).to_bytes(block_bytes, "little")
    return int.from_bytes(bytes(pos), "little") - int.from_bytes(bytes(neg), "little")


def _unpack_balanced(value: int, count: int, block_bytes: int) -> list[int]:
    """Read `count` balanced digits c_i with |c_i| < B/2 from the low blocks."""
    B = 1 << (8 * block_bytes)
    value &= (1 << (8 * block_bytes * count)) - 1  # == mod B**count, in linear time
    raw = value.to_bytes(count * block_bytes, "little")
    out = []
    carry = 0
    for i in range(count):
        d = int.from_bytes(raw[i * block_bytes:(i + 1) * block_bytes], "little") + carry
        if d >= B // 2:
            out.append(d - B)
            carry = 1
        else:
            out.append(d)
            carry = 0
    return out


try:  # GMP multiplication when available; plain int is correct but slower
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    def _mpz(x):
        return x


def _poly_mul_trunc(f: list[int], g: list[int], n_keep: int) -> list[int]:
    """Truncated product of integer coefficient lists, exactly.

    Kronecker substitution: pack into one big integer each, multiply,
    read the result back in balanced digits.
    """
    bound = max(
        max((abs(c) for c in f), default=0) * sum(abs(c) for c in g),
        max((abs(c) for c in g), default=0) * sum(abs(c) for c in f),
        1,
    )
    block_bytes = (bound.bit_length() + 9) // 8 + 1
    prod = int(_mpz(_pack_signed(f, block_bytes)) * _mpz(_pack_signed(g, block_bytes)))
    return _unpack_balanced(prod, n_keep, block_bytes)


def _eta_coeffs(n_max: int) -> list[int]:
    """prod_{m>=1} (1 - q^m) to order n_max, by Euler's pentagonal theorem."""
    out = [0] * (n_max + 1)
    out[0] = 1
    k = 1
    while True:
        placed = False
        for idx in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if idx <= n_max:
                out[idx] = -1 if k % 2 else 1
                placed = True
        if not placed:
            break
        k += 1
    return out


def tau_coefficients(n_max: int) -> list[int]:
    """tau(1..n_max), exactly: coefficients of q prod (1-q^m)^24."""
    if n_max < 1:
        raise ValueError("n_max >= 1 required")
    if n_max > 10**5:
        raise ValueError("oracle capped at n_max <= 1e5")
    e = _eta_coeffs(n_max)  # degree cap n_max - 1 would do; keep simple
    e2 = _poly_mul_trunc(e, e, n_max)
    e4 = _poly_mul_trunc(e2, e2, n_max)
    e8 = _poly_mul_trunc(e4, e4, n_max)
    e16 = _poly_mul_trunc(e8, e8, n_max)
    e24 = _poly_mul_trunc(e16, e8, n_max)
    return e24[:n_max]  # tau(n) = coeff of q^{n-1} in eta^24


def delta_oracle(n_max: int) -> CuspForm:
    """The level-1 weight-12 newform with lambda(n) = tau(n)/n^{11/2}."""
    taus = tau_coefficients(n_max)
    lam = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        # tau(n)/n^{11/2} with the integer part divided exactly first
        lam[n] = float(Fraction(taus[n - 1], n**5)) / math.sqrt(n)
    return CuspForm("holomorphic", 1, 12, None, lam, True, "1.12.a.a",
                    atkin_lehner={1: 1.0})


# ---------------------------------------------------------------------------
# Ingestion

def _validate(form: CuspForm) -> CuspForm:
    if abs(form.lam_at(1) - 1.0) > 1e-12:
        raise InvariantViolation(f"lambda(1) = {form.lam_at(1)!r}, must be 1")
    if form.kind == "holomorphic" and form.is_newform:
        n = np.arange(1, form.n_max + 1)
        taus = np.array([divisor_tau(int(m)) for m in n])
        bad = np.nonzero(np.abs(form.lam[1:]) > taus + 1e-9)[0]
        if len(bad):
            m = int(n[bad[0]])
            raise InvariantViolation(
                f"Deligne bound violated at n={m}: |lambda| = {abs(form.lam[m]):.6f} > tau = {divisor_tau(m)}")
    if form.is_newform and form.level > 1:
        fac = factorize(form.level).factors
        if all(e == 1 for _, e in fac):  # squarefree level
            for p, _ in fac:
                if p <= form.n_max:
                    expected = p ** (-0.5)
                    if abs(abs(form.lam_at(p)) - expected) > 1e-6:
                        raise InvariantViolation(
                            f"|lambda({p})| = {abs(form.lam_at(p)):.8f}, "
                            f"expected {expected:.8f} at prime dividing the level")
    return form


def parse_coefficient_file(text: str) -> CuspForm:
    """Line-oriented local format: a header block, then 'n value' pairs.

    Header keys: kind, level, weight | spectral, label, newform (0/1),
    optional 'atkin_lehner N2 value' and 'reflection value' lines.
    """
    header: dict[str, str] = {}
    pairs: dict[int, float] = {}
    al: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "atkin_lehner":
            if len(parts) != 3:
                raise MalformedData(f"line {lineno}: atkin_lehner needs 'N2 value'")
            al[int(parts[1])] = float(parts[2])
            continue
        if parts[0].isdigit():
            if len(parts) != 2:
                raise MalformedData(f"line {lineno}: coefficient lines are 'n value'")
            try:
                pairs[int(parts[0])] = float(parts[1])
            except ValueError as exc:
                raise MalformedData(f"line {lineno}: bad value field {parts[1]!r}") from exc
            continue
        if len(parts) != 2:
            raise MalformedData(f"line {lineno}: bad header line {line!r}")
        header[parts[0]] = parts[1]

    for key in ("kind", "level", "label"):
        if key not in header:
            raise MalformedData(f"missing header field '{key}'")
    kind = header["kind"]
    if kind == "holomorphic" and "weight" not in header:
        raise MalformedData("missing header field 'weight'")
    if kind == "maass" and "spectral" not in header:
        raise MalformedData("missing header field 'spectral'")
    if not pairs:
        raise MalformedData("no coefficient lines")
    n_max = max(pairs)
    if set(pairs) != set(range(1, n_max + 1)):
        raise MalformedData("coefficient lines must cover n = 1..n_max without gaps")
    lam = np.zeros(n_max + 1)
    for n, v in pairs.items():
        lam[n] = v
    return CuspForm(
        kind=kind,
        level=int(header["level"]),
        weight=int(header["weight"]) if kind == "holomorphic" else None,
        spectral=float(header["spectral"]) if kind == "maass" else None,
        lam=lam,
        is_newform=header.get("newform", "1") not in ("0", "false"),
        label=header["label"],
        atkin_lehner=al or None,
        reflection=float(header["reflection"]) if "reflection" in header else None,
    )


def load_form(src: CoefficientSource, label: str, n_max: int | None = None,
              fetcher=None) -> CuspForm:
    """Load a form and validate its normalization invariants.

    Local files are parsed directly; LMFDB labels go through the caching
    client in rankinlab.lmfdb (raw responses persisted to cache_dir).
    """
    if src.kind == "local_file":
        path = Path(src.location)
        if path.is_dir():
            path = path / f"{label}.coeffs"
        return _validate(parse_coefficient_file(path.read_text()))
    from . import lmfdb
    form = lmfdb.fetch_newform(label, base_url=src.location or None,
                               cache_dir=src.cache_dir, n_max=n_max,
                               fetcher=fetcher)
    return _validate(form)


# ---------------------------------------------------------------------------
# Elementary coefficient sums

def hecke_check(f: CuspForm, m_max: int, n_max: int) -> float:
    """Max violation of psi(m) lambda(n) = sum_{d | (m,n)} psi(m n / d^2)
    over the grid, restricted to (n, level) = 1."""
    if m_max * n_max > f.n_max:
        raise InsufficientCoefficients(
            f"grid needs coefficients to {m_max * n_max}, table holds {f.n_max}")
    worst = 0.0
    for m in range(1, m_max + 1):
        for n in range(1, n_max + 1):
            if math.gcd(n, f.level) != 1:
                continue
            rhs = sum(f.lam[(m * n) // (d * d)]
                      for d in divisors(math.gcd(m, n)))
            worst = max(worst, abs(f.lam[m] * f.lam[n] - rhs))
    return worst


def wilton_sum(f: CuspForm, X: float, alpha: float) -> complex:
    """S(f, X, alpha) = sum_{n <= X} psi(n) e(n alpha) / sqrt(n)."""
    hi = int(math.floor(X))
    if hi < 1:
        return 0.0 + 0.0j
    lam = f.lam_range(hi)
    n = np.arange(1, hi + 1)
    return complex(np.sum(lam * np.exp(2j * np.pi * alpha * n) / np.sqrt(n)))


def rankin_sum(f: CuspForm, x: float) -> float:
    """sum_{n <= x} |lambda(n)|^2 / n; nondecreasing in x."""
    hi = int(math.floor(x))
    if hi < 1:
        return 0.0
    lam = f.lam_range(hi)
    n = np.arange(1, hi + 1)
    return float(np.sum(lam * lam / n))
