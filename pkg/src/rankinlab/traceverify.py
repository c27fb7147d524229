"""Identity verification at desk scale.

Petersson trace-formula checks through the geometric side, two-sided
Voronoi summation, Jutila's circle-method approximation with exact
rational L^2 error, the detection weight w_delta, shifted convolution
sums, and a brute-force experiment for the Kloosterman-sum large sieve
inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import specialfn
from .arith import kloosterman, kloosterman_direct, kloosterman_grid
from .forms import CuspForm, InsufficientCoefficients
from .lfunc import TruncationTooShort, _petersson_tail
from .quad import SmoothWindow, plateau_window
from .specialfn import EvalResult

__all__ = [
    "StepFunction",
    "SieveInstance",
    "EmptyModuli",
    "MissingAtkinLehner",
    "petersson_geometric_R",
    "petersson_rank1_check",
    "Rank1Report",
    "voronoi_lhs",
    "voronoi_rhs",
    "jutila_build",
    "jutila_l2_error",
    "w_delta",
    "shifted_sum_A",
    "large_sieve_lhs",
    "large_sieve_lhs_slow",
    "large_sieve_bound",
    "random_sieve_instance",
    "cusp_sum_partial",
]


class EmptyModuli(ValueError):
    """Jutila construction needs at least one modulus."""


class MissingAtkinLehner(LookupError):
    """Voronoi at this level needs Atkin-Lehner metadata that is absent."""


# ---------------------------------------------------------------------------
# Petersson trace formula, geometric side

def petersson_geometric_R(m: int, n: int, k: int, M: int, c_max: int,
                          tol: float = 1e-9) -> EvalResult:
    """R(m,n) = delta(n,m) + 2 pi i^{-k} sum_{c = 0 (M), c <= c_max}
    S(n,m;c)/c J_{k-1}(4 pi sqrt(nm)/c), with the dropped tail bounded
    explicitly inside abs_err."""
    if k < 4 or k % 2:
        raise ValueError("k must be even and >= 4")
    sqrt_nm = math.sqrt(m * n)
    tail = _petersson_tail(k, sqrt_nm, math.gcd(m, n), M, c_max)
    if tail > tol:
        raise TruncationTooShort(f"tail bound {tail:.2e} exceeds tol {tol:.1e}")
    cs = np.arange(M, c_max + 1, M)
    svals = np.empty(len(cs))
    resid = 0.0
    for i, c in enumerate(cs):
        e = kloosterman(n, m, int(c))
        svals[i] = e.value
        resid = max(resid, e.residual_imag)
    jvals, jerr = specialfn.bessel_j_fast(k - 1, 4 * math.pi * sqrt_nm / cs)
    phase = (-1.0) ** (k // 2)  # i^{-k} for even k
    value = (1.0 if m == n else 0.0) + 2 * math.pi * phase * float(
        np.sum(svals / cs * jvals))
    slack = 2 * math.pi * float(np.sum((jerr + resid * np.abs(jvals)) / cs))
    return EvalResult(value, tail + slack)


@dataclass(frozen=True)
class Rank1Report:
    grid: int
    factorization_defect: float  # max |R(m,n) R(1,1) - R(m,1) R(1,n)|
    ratio_defect: float          # max |R(m,n)/R(1,1) - lam(m) lam(n)|
    tail_bound: float


def petersson_rank1_check(f: CuspForm, grid: int, c_max: int = 5000,
                          M: int = 1, k: int | None = None) -> Rank1Report:
    """On a one-dimensional space (e.g. level 1, weight 12) the spectral
    side is the rank-1 product omega^{-1} psi(m) psi(n); this checks the
    factorization defect of R and the eigenvalue ratios against f."""
    k = k or f.weight
    ns = np.arange(1, grid + 1)
    ns = ns[[math.gcd(int(v), M) == 1 for v in ns]]
    if grid * grid > f.n_max and M == 1:
        pass  # only lam up to grid needed, checked below
    sqrt_nm = np.sqrt(np.outer(ns, ns))
    acc = np.zeros((len(ns), len(ns)))
    for c in range(M, c_max + 1, M):
        smat, _ = kloosterman_grid(ns, ns, c)
        jvals, _ = specialfn.bessel_j_fast(k - 1, 4 * math.pi * sqrt_nm / c)
        acc += smat * jvals / c
    phase = (-1.0) ** (k // 2)
    R = np.eye(len(ns)) + 2 * math.pi * phase * acc
    fac_defect = 0.0
    ratio_defect = 0.0
    r11 = R[0, 0]
    for i in range(len(ns)):
        for j in range(len(ns)):
            fac_defect = max(fac_defect, abs(R[i, j] * r11 - R[i, 0] * R[0, j]))
            lam_prod = f.lam_at(int(ns[i])) * f.lam_at(int(ns[j]))
            ratio_defect = max(ratio_defect, abs(R[i, j] / r11 - lam_prod))
    tail = _petersson_tail(k, float(ns.max()), float(ns.max()), M, c_max)
    return Rank1Report(grid, fac_defect, ratio_defect, tail)


# ---------------------------------------------------------------------------
# Voronoi summation, both sides

def voronoi_lhs(f: CuspForm, a: int, q: int, h: SmoothWindow) -> complex:
    """sum_n lambda(n)/sqrt(n) e(na/q) h(n); h in absolute scale."""
    if q < 1 or math.gcd(a, q) != 1:
        raise ValueError("need q >= 1 and (a, q) = 1")
    hi = int(math.floor(h.support[1]))
    if hi > f.n_max:
        raise InsufficientCoefficients(f"need coefficients to {hi}")
    n = np.arange(1, hi + 1)
    return complex(np.sum(f.lam[1:hi + 1] / np.sqrt(n)
                          * np.exp(2j * np.pi * a * n / q) * h(n)))


def _eta_pair(f: CuspForm, n2: int) -> tuple[complex, complex]:
    if n2 == 1:
        eta = 1.0
    else:
        if not f.atkin_lehner or n2 not in f.atkin_lehner:
            raise MissingAtkinLehner(
                f"eta(N2={n2}) unavailable; provide Atkin-Lehner metadata")
        eta = f.atkin_lehner[n2]
    if f.kind == "holomorphic":
        pref = 1j ** f.weight
        return pref * eta, pref * eta
    if f.reflection is None:
        raise MissingAtkinLehner("Maass dual side needs the reflection eigenvalue")
    return eta, f.reflection * eta


def voronoi_rhs(f: CuspForm, a: int, q: int, h: SmoothWindow,
                n_max: int | None = None, tol: float = 1e-8,
                block: int = 128) -> EvalResult:
    """Dual side of Voronoi summation:

        2 sum_{+-} eta^{+-} sum_n lambda_{f*}(n)/sqrt(n)
            e(-+ n (a N2)bar / q) int h(xi^2 q^2 N2 / n) Jker^{+-}(xi) dxi,

    with the n-sum truncated adaptively once whole blocks stay below
    tol/10 (the dual terms decay superpolynomially past the transition
    range). f* is taken to equal f, exact at level 1 (the only case the
    level data here supports without Atkin-Lehner metadata).
    """
    if q < 1 or math.gcd(a, q) != 1:
        raise ValueError("need q >= 1 and (a, q) = 1")
    level = f.level
    n2 = level // math.gcd(level, q)
    eta_plus, eta_minus = _eta_pair(f, n2)
    inv = pow(a * n2, -1, q) if q > 1 else 0
    c0 = 1.0 / (q * math.sqrt(n2))
    lo_u, hi_u = h.support
    glx, glw = np.polynomial.legendre.leggauss(8)

    if n_max is None:
        n_max = min(f.n_max, 500_000)

    holomorphic = f.kind == "holomorphic"

    def kernel_plus(args):
        if holomorphic:
            vals, err = specialfn.bessel_j_fast(f.weight - 1, args)
            return 2 * math.pi * vals, 2 * math.pi * err
        return specialfn.voronoi_kernel_many("maass", f.spectral, +1, args)

    def kernel_minus(args):
        if holomorphic:
            return np.zeros_like(args), 0.0
        return specialfn.voronoi_kernel_many("maass", f.spectral, -1, args)

    def block_integrals(n_arr, panels):
        edges = np.linspace(lo_u, hi_u, panels + 1)
        pa, pb = edges[:-1], edges[1:]
        half = 0.5 * (pb - pa)
        mid = 0.5 * (pa + pb)
        nodes = (mid[:, None] + half[:, None] * glx[None, :]).ravel()
        wts = (half[:, None] * glw[None, :]).ravel() * h(nodes) / np.sqrt(nodes)
        args = 4 * math.pi * c0 * np.sqrt(np.outer(n_arr, nodes))
        kp, ep = kernel_plus(args.ravel())
        ip = kp.reshape(args.shape) @ wts
        if holomorphic:
            im = np.zeros_like(ip)
            em = 0.0
        else:
            km, em = kernel_minus(args.ravel())
            im = km.reshape(args.shape) @ wts
        kerr = (ep + em) * float(np.sum(np.abs(wts)))
        return ip, im, kerr

    total = 0.0 + 0.0j
    err = 0.0
    quiet = 0
    n0 = 1
    while n0 <= n_max:
        n1 = min(n0 + block - 1, n_max)
        n_arr = np.arange(n0, n1 + 1)
        if n1 > f.n_max:
            raise InsufficientCoefficients(
                f"dual sum needs lambda up to {n1}, table holds {f.n_max}")
        freq = c0 * math.sqrt(float(n1) / lo_u)  # cycles per unit u
        panels = max(8, int(math.ceil((hi_u - lo_u) * freq * 2.0)))
        ip1, im1, kerr = block_integrals(n_arr, panels)
        ip2, im2, _ = block_integrals(n_arr, 2 * panels)
        lam = f.lam[n0:n1 + 1]
        twist = np.exp(-2j * np.pi * inv * n_arr / q)
        scale = 1.0 / (q * math.sqrt(n2))
        term = scale * (eta_plus * np.sum(lam * twist * ip2)
                        + eta_minus * np.sum(lam * np.conj(twist) * im2))
        total += term
        step_err = scale * float(np.sum(np.abs(lam) * (np.abs(ip2 - ip1)
                                                       + np.abs(im2 - im1))))
        err += step_err + scale * kerr * float(np.sum(np.abs(lam)))
        block_mag = scale * float(np.sum(np.abs(lam) * (np.abs(ip2) + np.abs(im2))))
        if block_mag < tol / 10.0:
            quiet += 1
            if quiet >= 3:
                err += tol / 10.0
                return EvalResult(total, err)
        else:
            quiet = 0
        n0 = n1 + 1
    raise TruncationTooShort(
        f"dual sum not yet negligible at n = {n_max}; raise n_max or tol")


# ---------------------------------------------------------------------------
# Jutila's circle method, exact arithmetic

@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function: values[i] on [breakpoints[i],
    breakpoints[i+1]), zero outside. Exact rational data."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values) + 1:
            raise ValueError("need one more breakpoint than values")
        if any(b1 >= b2 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must increase strictly")

    def integral(self) -> Fraction:
        return sum((v * (b2 - b1) for v, b1, b2 in
                    zip(self.values, self.breakpoints, self.breakpoints[1:])),
                   Fraction(0))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        bp = np.array([float(b) for b in self.breakpoints])
        idx = np.searchsorted(bp, x, side="right") - 1
        vals = np.array([float(v) for v in self.values] + [0.0])
        idx = np.where((idx < 0) | (idx >= len(self.values)), len(self.values), idx)
        return vals[idx]


def jutila_build(moduli: Sequence[int], delta) -> StepFunction:
    """The circle-method approximation of the unit-interval indicator:

        (1/(2 delta Lambda)) sum_{q in moduli} sum*_{a mod q}
            indicator[a/q - delta, a/q + delta],

    with exact rational endpoints and heights. Lambda = sum phi(q).
    """
    moduli = [int(q) for q in moduli]
    if not moduli:
        raise EmptyModuli("no moduli supplied")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    events: dict[Fraction, Fraction] = {}
    lam = 0
    for q in moduli:
        for a in range(1, q + 1):
            if math.gcd(a, q) != 1:
                continue
            lam += 1
            center = Fraction(a, q)
            events[center - delta] = events.get(center - delta, Fraction(0)) + 1
            events[center + delta] = events.get(center + delta, Fraction(0)) - 1
    height = Fraction(1, 1) / (2 * delta * lam)
    points = sorted(events)
    values = []
    level = Fraction(0)
    for p in points[:-1]:
        level += events[p]
        values.append(level * height)
    return StepFunction(tuple(points), tuple(values))


def jutila_l2_error(sf: StepFunction) -> Fraction:
    """Exact integral of |indicator[0,1] - sf|^2 by a breakpoint sweep."""
    zero, one = Fraction(0), Fraction(1)
    cuts = sorted(set(sf.breakpoints) | {zero, one})
    total = Fraction(0)
    # squared defect over each constant piece, inside and outside [0,1]
    for b1, b2 in zip(cuts, cuts[1:]):
        v = Fraction(0)
        if sf.breakpoints[0] <= b1 and b2 <= sf.breakpoints[-1]:
            i = _piece_index(sf, b1)
            if i is not None:
                v = sf.values[i]
        ind = one if (zero <= b1 and b2 <= one) else zero
        total += (ind - v) ** 2 * (b2 - b1)
    return total


def _piece_index(sf: StepFunction, point: Fraction) -> Optional[int]:
    lo, hi = 0, len(sf.values) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        if sf.breakpoints[mid + 1] <= point:
            lo = mid + 1
        elif sf.breakpoints[mid] > point:
            hi = mid - 1
        else:
            return mid
    return None


def jutila_l2_bound(moduli: Sequence[int], delta, constant: float = 10.0) -> float:
    """The fitted majorant constant * Q^2/(delta Lambda^2) with Q = max modulus."""
    from .arith import euler_phi
    lam = sum(euler_phi(q) for q in moduli)
    Q = max(moduli)
    return constant * Q * Q / (float(delta) * lam * lam)


def w_delta(delta_shift: float, delta: float) -> float:
    """w_delta(D) = (1/2 delta) int_{-delta}^{delta} e(D x) dx
    = sin(2 pi delta D)/(2 pi delta D), with w(0) = 1."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return float(np.sinc(2.0 * delta * delta_shift))


# ---------------------------------------------------------------------------
# Shifted convolution sums

def shifted_sum_A(f: CuspForm, g: CuspForm, l1: int, l2: int, v: int,
                  x: float) -> float:
    """A(v;x) = sum over m <= x with l1 m - l2 n = v, n >= 1 of
    lambda_f(n) lambda_g(m) / sqrt(nm)."""
    if l1 < 1 or l2 < 1:
        raise ValueError("l1, l2 must be positive")
    hi = int(math.floor(x))
    if hi < 1:
        return 0.0
    if hi > g.n_max:
        raise InsufficientCoefficients(f"need lambda_g to {hi}")
    ms = np.arange(1, hi + 1)
    t = l1 * ms - v
    ok = (t >= l2) & (t % l2 == 0)
    ms = ms[ok]
    ns = t[ok] // l2
    if len(ns) and int(ns.max()) > f.n_max:
        raise InsufficientCoefficients(f"need lambda_f to {int(ns.max())}")
    if len(ms) == 0:
        return 0.0
    return float(np.sum(f.lam[ns] * g.lam[ms] / np.sqrt(ns * ms)))


# ---------------------------------------------------------------------------
# The large sieve experiment

@dataclass(frozen=True)
class SieveInstance:
    """Inputs of the Kloosterman-sum large sieve: moduli sq with (q,r)=1,
    twists v rbar and +-hw, coefficients a(v), b(h,d), and a smooth
    four-variable weight of derivative scale Z built as a product of
    plateau windows over [V,2V] x [H,2H] x [Q,2Q] x [D,2D]."""

    r: int
    s: int
    w: int
    V: int
    H: int
    Q: int
    D: int
    a: np.ndarray        # a[v - V], v in [V, 2V]
    b: np.ndarray        # b[h - H, d - D]
    Z: float = 1.0

    def __post_init__(self):
        if min(self.r, self.s, self.w, self.V, self.H, self.Q, self.D) < 1:
            raise ValueError("all parameters must be positive")
        if math.gcd(self.r, self.s) != 1:
            raise ValueError("(r, s) = 1 required")
        if math.gcd(self.w, self.r * self.s) != 1:
            raise ValueError("(w, rs) = 1 required")
        if len(self.a) != self.V + 1:
            raise ValueError("a must cover v = V..2V")
        if self.b.shape != (self.H + 1, self.D + 1):
            raise ValueError("b must cover [H,2H] x [D,2D]")

    def window(self, name: str) -> SmoothWindow:
        lo = getattr(self, name)
        return plateau_window(float(lo), 2.0 * lo, self.Z)

    def u(self, v, h, q, d) -> float:
        return float(self.window("V")(np.asarray([v]))[0]
                     * self.window("H")(np.asarray([h]))[0]
                     * self.window("Q")(np.asarray([q]))[0]
                     * self.window("D")(np.asarray([d]))[0])


def random_sieve_instance(rng: np.random.Generator, Q: int, Z: float,
                          coeff_dist: str = "pm1",
                          v_max: int = 200, h_max: int = 200) -> SieveInstance:
    """A random admissible instance: r,s,w <= 10 with the required
    coprimality, box sizes within the stated caps, coefficients from
    {+-1} or complex Gaussians."""
    while True:
        r = int(rng.integers(1, 11))
        s = int(rng.integers(1, 11))
        if math.gcd(r, s) == 1:
            break
    while True:
        w = int(rng.integers(1, 11))
        if math.gcd(w, r * s) == 1:
            break
    # lower bounds of 2 keep at least one interior integer in each window
    V = int(rng.integers(2, v_max // 2 + 1))
    H = int(rng.integers(2, h_max // 2 + 1))
    D = int(rng.integers(2, 7))

    def draw(shape):
        if coeff_dist == "pm1":
            return rng.choice([-1.0, 1.0], size=shape).astype(complex)
        if coeff_dist == "gauss":
            return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
                / math.sqrt(2.0)
        raise ValueError(f"unknown coefficient distribution {coeff_dist!r}")

    return SieveInstance(r, s, w, V, H, Q, D,
                         a=draw(V + 1), b=draw((H + 1, D + 1)), Z=Z)


def _unit_inverses(c: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.arange(c)
    units = np.nonzero(np.gcd(a, c) == 1)[0] if c > 1 else np.array([0])
    invs = np.array([pow(int(x), -1, c) for x in units]) if c > 1 else np.array([0])
    return units, invs


def large_sieve_lhs(inst: SieveInstance, sign: int) -> complex:
    """The quadruple sum

        sum_{q, (q,r)=1} sum_d sum_h sum_v (1/q) S(v rbar, +-hw; sq)
            a(v) b(h,d) u(v,h,q,d),

    evaluated exactly (to floating precision). The Kloosterman table per
    modulus is built by an FFT over the units."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    vs = np.arange(inst.V, 2 * inst.V + 1)
    hs = np.arange(inst.H, 2 * inst.H + 1)
    ds = np.arange(inst.D, 2 * inst.D + 1)
    av = inst.a * inst.window("V")(vs.astype(float))
    bd = inst.b @ inst.window("D")(ds.astype(float))  # collapse d
    bh = bd * inst.window("H")(hs.astype(float))
    wq = inst.window("Q")
    total = 0.0 + 0.0j
    for q in range(inst.Q, 2 * inst.Q + 1):
        if math.gcd(q, inst.r) != 1:
            continue
        weight = float(wq(np.asarray([float(q)]))[0])
        if weight == 0.0:
            continue
        c = inst.s * q
        units, invs = _unit_inverses(c)
        rbar = pow(inst.r, -1, c) if c > 1 else 0
        x_idx = (vs * rbar) % c
        y_vals = (sign * hs * inst.w) % c
        uniq_y, inv_map = np.unique(y_vals, return_inverse=True)
        zmat = np.zeros((len(uniq_y), c), dtype=complex)
        roots = np.exp(2j * np.pi * np.arange(c) / c)
        for i, y in enumerate(uniq_y):
            zmat[i, units] = roots[(int(y) * invs) % c]
        table = np.fft.ifft(zmat, axis=1) * c   # table[i, x] = S(x, y_i; c)
        s_hv = table[inv_map][:, x_idx]
        total += weight / q * complex(bh @ s_hv @ av)
    return total


def large_sieve_lhs_slow(inst: SieveInstance, sign: int) -> complex:
    """Independent direct loop over the same quadruple sum, for
    cross-checking the fast assembly. O(everything); keep the ranges small."""
    total = 0.0 + 0.0j
    for q in range(inst.Q, 2 * inst.Q + 1):
        if math.gcd(q, inst.r) != 1:
            continue
        c = inst.s * q
        rbar = pow(inst.r, -1, c) if c > 1 else 0
        for d in range(inst.D, 2 * inst.D + 1):
            for h in range(inst.H, 2 * inst.H + 1):
                for v in range(inst.V, 2 * inst.V + 1):
                    u = inst.u(v, h, q, d)
                    if u == 0.0:
                        continue
                    sv = kloosterman_direct(v * rbar, sign * h * inst.w, c).value
                    total += (sv / q) * inst.a[v - inst.V] \
                        * inst.b[h - inst.H, d - inst.D] * u
    return total


def large_sieve_bound(inst: SieveInstance, theta: float = 7.0 / 64.0) -> float:
    """The majorant of the large sieve inequality with the epsilon factor
    set to 1:

        s sqrt(r) (1 + (Xi/Z)^{-2 theta})/(Z + Xi)
          (Z + Xi + sqrt(V/rs)) (Z + Xi + sqrt(H/rs))
          w^theta ||a||_2 ||B||_2 (1 + Z^8),

    Xi = sqrt(V H w) / (s sqrt(r) Q), B(h) = sum_d |b(h,d)|.
    """
    if not 0 <= theta <= 0.5:
        raise ValueError("theta in [0, 1/2] required")
    r, s, w = inst.r, inst.s, inst.w
    Z = max(inst.Z, 1.0)
    xi = math.sqrt(inst.V * inst.H * w) / (s * math.sqrt(r) * inst.Q)
    a_norm = float(np.linalg.norm(inst.a))
    b_norm = float(np.linalg.norm(np.abs(inst.b).sum(axis=1)))
    return (s * math.sqrt(r)
            * (1.0 + (xi / Z) ** (-2.0 * theta)) / (Z + xi)
            * (Z + xi + math.sqrt(inst.V / (r * s)))
            * (Z + xi + math.sqrt(inst.H / (r * s)))
            * w ** theta * a_norm * b_norm * (1.0 + Z ** 8))


# ---------------------------------------------------------------------------
# Cusp-pair Kloosterman sums (the identity used from the Kuznetsov side)

def cusp_sum_partial(m: int, n: int, r: int, s: int, c_max: int):
    """Partial sums of sum_gamma (1/gamma) S_{inf,1/s}(m,n;gamma) computed
    two ways: directly from the printed right-hand side

        sum_{C > 0, (C,r)=1} e(n sbar/r) S(m rbar, n; sC) / (s sqrt(r) C),

    and through the cusp parametrization gamma = s sqrt(r) C with
    S_{inf,1/s}(m,n;gamma) = e(n sbar/r) S(m rbar, n; sC). Terms must
    agree exactly; the two paths use the CRT and the direct Kloosterman
    evaluations respectively."""
    if math.gcd(r, s) != 1:
        raise ValueError("(r, s) = 1 required")
    sbar = pow(s % r, -1, r) if r > 1 else 0
    phase = np.exp(2j * np.pi * n * sbar / r) if r > 1 else 1.0 + 0.0j
    direct = []
    parametrized = []
    for C in range(1, c_max + 1):
        if math.gcd(C, r) != 1:
            continue
        c = s * C
        rbar = pow(r % c, -1, c) if c > 1 else 0
        sv_fast = kloosterman(m * rbar, n, c).value
        direct.append((C, phase * sv_fast / (s * math.sqrt(r) * C)))
        gamma = s * math.sqrt(r) * C
        s_cusp = phase * kloosterman_direct(m * rbar, n, c).value
        parametrized.append((C, s_cusp / gamma))
    return direct, parametrized
