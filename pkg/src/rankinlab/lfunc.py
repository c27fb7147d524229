"""The Rankin-Selberg layer.

Dirichlet coefficients of L(s, f x g), the conductor in the coprime
squarefree case, the archimedean factor and its approximate-functional-
equation weight V_s, smoothed pair sums, the geometric-side evaluation of
the spectral second moment, and the evaluator for the second-moment
bound with beta = 11/4875.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.special as sc

from . import specialfn
from .arith import factorize, kloosterman_grid
from .forms import CuspForm, InsufficientCoefficients
from .quad import NonConvergence, QuadConfig, SmoothWindow, integrate
from .specialfn import EvalResult

__all__ = [
    "RankinSelbergPair",
    "AFEConfig",
    "NotCoprimeLevels",
    "TruncationTooShort",
    "BETA",
    "conductor",
    "rs_dirichlet_coeffs",
    "afe_g",
    "afe_weight_V",
    "smoothed_pair_sum",
    "second_moment_geometric",
    "thm1_bound",
    "contour_derivative",
    "write_moment_csv",
]

#: The power saving in the second-moment bound.
BETA = Fraction(11, 4875)


class NotCoprimeLevels(ValueError):
    """Conductor formula only implemented for coprime levels."""


class TruncationTooShort(RuntimeError):
    """The modulus cutoff leaves a tail above the requested tolerance."""


def conductor(f: CuspForm, g: CuspForm) -> int:
    """(MN)^2 for coprime levels; the general case is out of scope."""
    m, n = f.level, g.level
    if math.gcd(m, n) != 1:
        raise NotCoprimeLevels(f"levels {m}, {n} share a factor")
    return (m * n) ** 2


def _mu_infinity(f: CuspForm, g: CuspForm) -> tuple[complex, complex, complex, complex]:
    """The four archimedean shifts of L(s, f x g).

    Convention: for two holomorphic forms of weights k, kappa these are
    (k+kappa)/2 - 1, (k+kappa)/2, |k-kappa|/2, |k-kappa|/2 + 1 (each
    gamma_C split into two gamma_R factors); a Maass partner of spectral
    parameter t contributes (k-1)/2 +- it and (k+1)/2 +- it.
    """
    if f.kind == "maass" and g.kind == "maass":
        raise NotImplementedError("Maass x Maass archimedean factor not needed at desk scale")
    if f.kind == "maass" or g.kind == "maass":
        holo, maass = (g, f) if f.kind == "maass" else (f, g)
        k = holo.weight
        t = float(maass.spectral)
        return ((k - 1) / 2 + 1j * t, (k - 1) / 2 - 1j * t,
                (k + 1) / 2 + 1j * t, (k + 1) / 2 - 1j * t)
    k, kap = f.weight, g.weight
    hi, lo = (k + kap) // 2, abs(k - kap) // 2
    return (hi - 1, hi, lo, lo + 1)


@dataclass(frozen=True)
class RankinSelbergPair:
    f: CuspForm
    g: CuspForm
    conductor: int
    mu_inf: tuple
    eps_phase: Optional[complex] = None  # root number, |eps| = 1 when present

    def __post_init__(self):
        if self.eps_phase is not None and abs(abs(self.eps_phase) - 1.0) > 1e-9:
            raise ValueError("eps_phase must have norm 1")

    @staticmethod
    def build(f: CuspForm, g: CuspForm, eps_phase=None) -> "RankinSelbergPair":
        return RankinSelbergPair(f, g, conductor(f, g), _mu_infinity(f, g), eps_phase)

    def q_infinity(self, s: complex) -> float:
        """Analytic conductor prod (|s| + |mu_i| + 3)^(1/2)."""
        out = 1.0
        for mu in self.mu_inf:
            out *= (abs(s) + abs(mu) + 3.0) ** 0.5
        return out


@dataclass(frozen=True)
class AFEConfig:
    A0: int = 4
    contour_height: Optional[float] = None  # auto from |G| decay when None
    truncation_length: int = 10_000
    prime_cutoff: int = 100_000

    def __post_init__(self):
        if self.A0 < 1:
            raise ValueError("A0 >= 1 required")


def rs_dirichlet_coeffs(pair: RankinSelbergPair, n_max: int) -> np.ndarray:
    """b(n) with L = zeta^(NM)(2s) sum lambda_f lambda_g n^{-s}:

        b(n) = sum_{d^2 | n, (d, NM) = 1} lambda_f(n/d^2) lambda_g(n/d^2).

    Index 0 unused.
    """
    f, g = pair.f, pair.g
    if n_max > min(f.n_max, g.n_max):
        raise InsufficientCoefficients(
            f"need coefficients to {n_max}, tables hold {min(f.n_max, g.n_max)}")
    nm = f.level * g.level
    b = np.zeros(n_max + 1)
    prod = f.lam[:n_max + 1] * g.lam[:n_max + 1]
    for d in range(1, int(math.isqrt(n_max)) + 1):
        if math.gcd(d, nm) != 1:
            continue
        dd = d * d
        b[dd::dd] += prod[1:n_max // dd + 1]
    return b


def afe_g(u: complex, A0: int) -> complex:
    """G(u) = cos(pi u / (4 A0))^(-16 A0); integer power, single-valued."""
    return np.cos(np.pi * np.asarray(u) / (4 * A0)) ** (-16 * A0)


@lru_cache(maxsize=8)
def _primes_to(n: int) -> tuple[int, ...]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


def _zeta_away(z, skip: int, prime_cutoff: int):
    """zeta^(skip)(z) by the Euler product over p <= prime_cutoff, p not
    dividing skip; returns (values, tail bound added by the caller)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    primes = np.array([p for p in _primes_to(prime_cutoff)
                       if skip % p != 0], dtype=float)
    logp = np.log(primes)
    acc = np.zeros(z.shape, dtype=complex)
    for chunk in range(0, len(primes), 2048):
        lp = logp[chunk:chunk + 2048]
        acc += -np.log1p(-np.exp(-np.outer(z, lp))).sum(axis=1)
    sigma = float(np.min(np.real(z)))
    tail = prime_cutoff ** (1.0 - sigma) / max(sigma - 1.0, 0.5)
    return np.exp(acc), tail


def afe_weight_V(s: complex, y: float, pair: RankinSelbergPair,
                 cfg: AFEConfig | None = None) -> EvalResult:
    """V_s(y): the AFE weight, as a contour integral on Re(u) = 3.

        V_s(y) = (1/2 pi i) int G(u) [Linf(s+u)/Linf(s)] zeta^(NM)(2s+2u)
                  y^{-u} du/u.

    Real for real s; the imaginary residue is folded into abs_err.
    """
    cfg = cfg or AFEConfig()
    if np.real(s) <= 0:
        raise ValueError("Re(s) > 0 required")
    if y <= 0:
        raise ValueError("y > 0 required")
    A0 = cfg.A0
    nm = pair.f.level * pair.g.level
    mu = np.asarray(pair.mu_inf, dtype=complex)

    if cfg.contour_height is not None:
        T = float(cfg.contour_height)
    else:
        T = 1.0
        while abs(afe_g(3 + 1j * T, A0)) > 1e-17:
            T *= 1.5
            if T > 1e4:
                raise NonConvergence("G(u) fails to decay on the contour")

    lg_denom = np.sum(sc.loggamma((s + mu) / 2.0))
    zeta_tail_box = [0.0]

    def integrand(tau):
        u = 3.0 + 1j * tau
        g = afe_g(u, A0)
        lg_num = sc.loggamma(((s + u)[:, None] + mu[None, :]) / 2.0).sum(axis=1)
        # Gamma_R(s) = pi^{-s/2} Gamma(s/2): the four pi factors contribute
        # pi^{-4u/2} = pi^{-2u} to the ratio
        gamma_ratio = np.exp(lg_num - lg_denom - 2.0 * u * math.log(math.pi))
        zvals, ztail = _zeta_away(2 * s + 2 * u, nm, cfg.prime_cutoff)
        zeta_tail_box[0] = max(zeta_tail_box[0], ztail)
        vals = g * gamma_ratio * zvals * np.exp(-u * math.log(y)) / u
        return vals / (2.0 * math.pi)

    hint = (abs(math.log(y)) + 1.0) / (2 * math.pi)
    res = integrate(integrand, (-T, T), QuadConfig(rel_tol=1e-9, abs_tol=1e-11,
                                                   oscillation_hint=hint))
    val = res.value
    err = res.abs_err + abs(zeta_tail_box[0]) * abs(val) + 1e-14 * abs(val)
    return EvalResult(float(np.real(val)), err + abs(np.imag(val)))


def smoothed_pair_sum(f: CuspForm, g: CuspForm, h: SmoothWindow, X: float) -> float:
    """sum_n lambda_f(n) lambda_g(n) h(n/X) / sqrt(n); h is a unit-scale window."""
    hi = int(math.floor(h.support[1] * X))
    if hi < 1:
        return 0.0
    if hi > min(f.n_max, g.n_max):
        raise InsufficientCoefficients(
            f"need coefficients to {hi}, tables hold {min(f.n_max, g.n_max)}")
    n = np.arange(1, hi + 1)
    return float(np.sum(f.lam[1:hi + 1] * g.lam[1:hi + 1] * h(n / X) / np.sqrt(n)))


def _petersson_tail(kappa: int, sqrt_nm: float, gcd_max: float, M: int,
                    c_start: float) -> float:
    """Bound on the dropped c > c_start part of the Petersson modulus sum,
    per (m,n) pair: 2 pi sum_{c > c_start, M | c} |S(m,n;c)| |J_{kappa-1}| / c
    with |S| <= tau(c) sqrt(c (m,n,c)) <= 2 c sqrt(gcd) and
    |J_{kappa-1}(x)| <= (x/2)^{kappa-1} / (kappa-1)!."""
    j0 = max(int(c_start // M), 1)
    return (4.0 * math.pi * math.sqrt(gcd_max)
            * (2.0 * math.pi * sqrt_nm) ** (kappa - 1) / math.factorial(kappa - 1)
            * M ** (1 - kappa) * j0 ** (2 - kappa) / (kappa - 2))


def second_moment_geometric(f: CuspForm, kappa: int, M: int, h: SmoothWindow,
                            X: float, c_max: int | None = None,
                            tol: float = 1e-6) -> EvalResult:
    """Geometric side of the weighted spectral second moment

        sum_g w_g^{-1} |sum_n lambda_f(n) lambda_g(n) h(n/X)/sqrt(n)|^2
        = sum_n lambda_f(n)^2 h(n/X)^2 / n
          + 2 pi i^{-kappa} sum_{d = 0 (M)} (1/d) sum_{m,n} S(m,n;d)
            lambda_f(m) lambda_f(n) / sqrt(mn) J_{kappa-1}(4 pi sqrt(mn)/d)
            h(m/X) h(n/X),

    with the modulus sum truncated at c_max and the dropped tail bounded
    explicitly and reported inside abs_err.
    """
    if kappa < 4 or kappa % 2:
        raise ValueError("kappa must be even and >= 4")
    lo = max(1, int(math.floor(h.support[0] * X)))
    hi = int(math.floor(h.support[1] * X))
    if hi < 1:
        return EvalResult(0.0, 0.0)
    if hi > f.n_max:
        raise InsufficientCoefficients(f"need coefficients to {hi}")
    ns = np.arange(lo, hi + 1)
    wts = h(ns / X)
    keep = wts != 0
    ns, wts = ns[keep], wts[keep]
    lam = f.lam[ns]
    diag = float(np.sum(lam * lam * wts * wts / ns))

    if len(ns) == 0:
        return EvalResult(0.0, 0.0)
    sqrt_nm_max = float(ns.max())
    coef_l1 = float(np.sum(np.abs(lam * wts / np.sqrt(ns))))
    if c_max is None:
        c_max = M
        while _petersson_tail(kappa, sqrt_nm_max, sqrt_nm_max, M, c_max) \
                * coef_l1 ** 2 > tol / 10:
            c_max *= 2
            if c_max > 10**7:
                raise TruncationTooShort("cannot reach tolerance with any feasible c_max")
    tail = _petersson_tail(kappa, sqrt_nm_max, sqrt_nm_max, M, c_max) * coef_l1 ** 2
    if tail > tol:
        raise TruncationTooShort(f"tail bound {tail:.2e} above tolerance {tol:.1e}")

    coef = lam * wts / np.sqrt(ns)
    sqrt_nm = np.sqrt(np.outer(ns, ns))
    phase = (1j) ** (-kappa)
    off = 0.0
    j_err = 0.0
    resid = 0.0
    for d in range(M, c_max + 1, M):
        smat, r = kloosterman_grid(ns, ns, d)
        resid = max(resid, r)
        jvals, je = specialfn.bessel_j_fast(kappa - 1, 4 * math.pi * sqrt_nm / d)
        j_err = max(j_err, je)
        off += float(np.real(phase) * np.einsum("i,j,ij,ij->", coef, coef, smat, jvals)) / d
    value = diag + 2 * math.pi * off
    slack = 2 * math.pi * (j_err + resid) * float(np.sum(np.abs(coef))) ** 2 \
        * sum(1.0 / d for d in range(M, c_max + 1, M))
    return EvalResult(value, tail + slack)


def thm1_bound(M: int, N: int, X: float, Z_h: float, eps: float) -> float:
    """The displayed second-moment majorant, beta = 11/4875:

        [1 + X/(MN) + X/M^(1+beta)
           + (1+Z_h)^24 N^(4/3) / M^(1/3+beta) * (1 + sqrt(X/(MN)))]
        * ((1+Z_h) X M N)^eps.
    """
    if M < 1 or N < 1 or math.gcd(M, N) != 1:
        raise ValueError("M, N must be coprime positive integers")
    beta = float(BETA)
    bracket = (1.0
               + X / (M * N)
               + X / M ** (1.0 + beta)
               + (1.0 + Z_h) ** 24 * N ** (4.0 / 3.0) / M ** (1.0 / 3.0 + beta)
               * (1.0 + math.sqrt(X / (M * N))))
    return bracket * ((1.0 + Z_h) * X * M * N) ** eps


def contour_derivative(evaluator, center: complex, j: int, radius: float,
                       nodes: int = 64) -> complex:
    """j-th derivative of an analytic evaluator by Cauchy's formula on a
    circle (trapezoid rule is spectrally accurate there). Documentation
    helper for the derivative-moment reduction."""
    theta = 2 * math.pi * np.arange(nodes) / nodes
    z = center + radius * np.exp(1j * theta)
    vals = np.asarray([evaluator(zz) for zz in z], dtype=complex)
    return math.factorial(j) / radius**j * complex(
        np.mean(vals * np.exp(-1j * j * theta)))


def write_moment_csv(path, rows) -> None:
    """Moment table: columns (M, N, X, lhs_geometric, thm1_bound, ratio)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "N", "X", "lhs_geometric", "thm1_bound", "ratio"])
        for row in rows:
            writer.writerow(list(row))
