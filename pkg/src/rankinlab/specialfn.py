"""Bessel kernels.

J of integer and real order through its Taylor series for small argument
and through the oscillatory decomposition J_v(x) = e^{ix}W_v(x) + c.c.
beyond; K and the Y-pair of imaginary order through the Laplace-type
integral representation continued to the imaginary axis; and the Voronoi
kernels built from them.

Every evaluation returns an EvalResult whose abs_err is an engineering
estimate (two-resolution difference plus explicit roundoff terms), not a
proved enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc

from ._panels import refine_edges, uniform_edges

__all__ = [
    "BesselOrder",
    "EvalResult",
    "OverflowSignal",
    "bessel_j",
    "bessel_j_many",
    "phase_w",
    "bessel_k_imag",
    "bessel_k_imag_many",
    "bessel_y_pair",
    "bessel_y_pair_many",
    "voronoi_kernel",
    "voronoi_kernel_many",
]

#: Largest |t| accepted in an imaginary order 2it.
MAX_IMAG_ORDER = 100.0

_EPS = np.finfo(float).eps
_LOG_TINY = math.log(np.finfo(float).tiny)  # ~ -708


class OverflowSignal(ArithmeticError):
    """Intermediate terms exceeded the representable range."""


@dataclass(frozen=True)
class BesselOrder:
    """Order parameter: integer k, real v, or imaginary 2it (storing t)."""

    kind: str  # "integer" | "real" | "imaginary"
    value: float

    def __post_init__(self):
        if self.kind == "integer":
            if self.value < 0 or self.value != int(self.value):
                raise ValueError("integer order must be a nonnegative integer")
        elif self.kind == "real":
            pass
        elif self.kind == "imaginary":
            if abs(self.value) > MAX_IMAG_ORDER:
                raise ValueError(f"imaginary order bounded by |t| <= {MAX_IMAG_ORDER}")
        else:
            raise ValueError(f"unknown order kind {self.kind!r}")

    @staticmethod
    def integer(k: int) -> "BesselOrder":
        return BesselOrder("integer", int(k))

    @staticmethod
    def real(v: float) -> "BesselOrder":
        return BesselOrder("real", float(v))

    @staticmethod
    def imaginary(t: float) -> "BesselOrder":
        return BesselOrder("imaginary", float(t))


@dataclass(frozen=True)
class EvalResult:
    """A numeric value with an absolute-error estimate."""

    value: float | complex
    abs_err: float

    def __post_init__(self):
        if not np.isfinite(self.abs_err):
            raise ValueError("abs_err must be finite")
        if not np.all(np.isfinite([np.real(self.value), np.imag(self.value)])):
            raise ValueError("value must be finite")


def _as_real_order(order) -> float:
    if isinstance(order, BesselOrder):
        if order.kind == "imaginary":
            raise ValueError("imaginary order not supported here; use bessel_k_imag / bessel_y_pair")
        return float(order.value)
    return float(order)


# ---------------------------------------------------------------------------
# J_v by Taylor series (small x, or order dominating the argument)

def _taylor_j_many(v: float, xs: np.ndarray) -> tuple[np.ndarray, float]:
    """J_v on an array by the power series, scaled by its leading term.

    Safe whenever x**2 <= ~55(v+1); the tail is bounded by twice the first
    omitted term and the alternation loss is charged to the error.
    """
    xs = np.asarray(xs, dtype=float)
    vals = np.zeros_like(xs)
    err = 0.0
    pos = xs > 0
    # leading-term log magnitude; x = 0 contributes J_v(0) = (v == 0)
    if v == 0:
        vals[~pos] = 1.0
    if np.any(pos):
        x = xs[pos]
        q = (x / 2.0) ** 2
        log_lead = v * np.log(x / 2.0) - sc.gammaln(v + 1.0)
        if np.any(log_lead > 700):
            raise OverflowSignal("leading Taylor term exceeds representable range")
        term = np.ones_like(x)
        total = np.ones_like(x)
        max_abs = np.ones_like(x)
        m = 0
        while True:
            m += 1
            term = term * (-q / (m * (m + v)))
            total += term
            np.maximum(max_abs, np.abs(term), out=max_abs)
            if np.all(np.abs(term) <= 1e-18 * np.maximum(1.0, np.abs(total))) or m > 600:
                break
        lead = np.exp(log_lead)
        vals[pos] = lead * total
        tail = 2.0 * np.abs(term) * lead
        cancel = _EPS * max_abs * m * lead
        err = float(np.max(tail + cancel)) if len(x) else 0.0
    return vals, err


# ---------------------------------------------------------------------------
# W_v with J_v = e^{ix} W_v(x) + e^{-ix} conj(W_v(x))

def _w_integral_many(v: float, xs: np.ndarray) -> tuple[np.ndarray, float]:
    """The normalized Laplace integral for W_v over an array of x > 0.

    Computes int_0^inf e^{-y} (y(1+iy/2x))^{v-1/2} dy / Gamma(v+1/2) via
    the substitution y = w^2, log-scaled so large orders do not overflow.
    """
    xs = np.asarray(xs, dtype=float)
    x_min = float(xs.min())
    lg = sc.gammaln(v + 0.5)

    def log_mag(w):
        return (-w * w + 2 * v * np.log(np.maximum(w, 1e-300))
                + (v - 0.5) * 0.5 * np.log1p((w * w / (2 * x_min)) ** 2) - lg)

    w_max = math.sqrt(v + 45.0)
    while log_mag(np.asarray([w_max]))[0] > _LOG_TINY / 2:
        w_max *= 1.15

    def f(w):
        w = w[None, :]
        x = xs[:, None]
        z = np.log(np.maximum(w, 1e-300)) * (2 * v) - w * w - lg \
            + (v - 0.5) * np.log1p(1j * w * w / (2 * x))
        return 2.0 * np.exp(z)

    n_panels = max(24, int(2 * w_max + v))
    edges = uniform_edges(0.0, w_max, n_panels)
    vals_c, vals_f, l1 = _batched_two_res(f, edges, len(xs))
    err = float(np.max(np.abs(vals_f - vals_c) + _EPS * l1))
    return vals_f, err


def _batched_two_res(f, edges, nbatch, order=8):
    """Row-batched composite GL: f maps a node array to (nbatch, nodes)."""
    x, w = np.polynomial.legendre.leggauss(order)

    def run(e):
        a, b = e[:-1], e[1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = f(nodes).reshape(nbatch, len(a), order)
        per_panel = (vals * w[None, None, :]).sum(axis=2) * half[None, :]
        l1 = (np.abs(vals) * w[None, None, :]).sum(axis=2) * half[None, :]
        return per_panel.sum(axis=1), l1.sum(axis=1)

    coarse, _ = run(edges)
    fine, l1 = run(refine_edges(edges))
    return coarse, fine, l1


def _w_many(v: float, xs: np.ndarray) -> tuple[np.ndarray, float]:
    # Prefactor e^{-i(pi v/2 + pi/4)}/2 makes e^{ix}W + e^{-ix}conj(W)
    # reproduce J_v exactly (Hankel's loop integral); it is pinned by the
    # reconstruction identity rather than taken on faith.
    xs = np.asarray(xs, dtype=float)
    integral, err = _w_integral_many(v, xs)
    pref = 0.5 * np.exp(-1j * (0.5 * math.pi * v + 0.25 * math.pi)) * np.sqrt(2.0 / (math.pi * xs))
    return pref * integral, err * float(np.max(0.5 * np.sqrt(2.0 / (math.pi * xs))))


def phase_w(order, x: float) -> EvalResult:
    """W_v(x) in the decomposition J_v(x) = e^{ix} W_v(x) + e^{-ix} conj W_v(x).

    Requires Re(v) > -1/2 and x > 0.
    """
    v = _as_real_order(order)
    if v <= -0.5:
        raise ValueError("phase_w requires Re(v) > -1/2")
    if x <= 0:
        raise ValueError("phase_w requires x > 0")
    vals, err = _w_many(v, np.asarray([x]))
    return EvalResult(complex(vals[0]), err)


# ---------------------------------------------------------------------------
# J_v of integer order via the角 integral (transition zone fallback)

def _cos_int_j_many(l: int, xs: np.ndarray) -> tuple[np.ndarray, float]:
    """J_l(x) = (1/pi) int_0^pi cos(x sin u - l u) du, integer l.

    Perfectly conditioned in the transition zone l ~ x where both the
    series and the phase decomposition lose digits.
    """
    xs = np.asarray(xs, dtype=float)
    x_max = float(xs.max())
    n_panels = max(16, int(0.8 * (x_max + l) + 8))

    def f(u):
        return np.cos(xs[:, None] * np.sin(u)[None, :] - l * u[None, :])

    edges = uniform_edges(0.0, math.pi, n_panels)
    coarse, fine, l1 = _batched_two_res(f, edges, len(xs))
    err = float(np.max(np.abs(fine - coarse) + _EPS * l1)) / math.pi
    return fine / math.pi, err


def _j_branch(v: float, x: float) -> str:
    if x <= 12.0 or x * x <= 55.0 * (v + 1.0):
        return "taylor"
    # digits lost in the oscillatory path ~ (v/2) log(1 + v^2/4x^2) / ln 10
    if 0.5 * v * math.log1p(v * v / (4 * x * x)) <= 8.0:
        return "phase"
    if v == int(v):
        return "cosine"
    return "phase"  # large loss; reported honestly in abs_err


def bessel_j_many(order, xs) -> tuple[np.ndarray, float]:
    """J_v on an array of x >= 0; returns (values, max abs-error bound)."""
    v = _as_real_order(order)
    if v <= -0.5:
        raise ValueError("bessel_j requires Re(v) > -1/2")
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0):
        raise ValueError("bessel_j requires x >= 0")
    flat = xs.ravel()
    out = np.empty_like(flat)
    err = 0.0
    branches = np.array([_j_branch(v, float(x)) for x in flat])
    for name in ("taylor", "phase", "cosine"):
        idx = np.nonzero(branches == name)[0]
        if len(idx) == 0:
            continue
        sub = flat[idx]
        if name == "taylor":
            vals, e = _taylor_j_many(v, sub)
        elif name == "phase":
            w, e = _w_many(v, sub)
            vals = 2.0 * np.real(np.exp(1j * sub) * w)
            e = 2.0 * e
        else:
            vals, e = _cos_int_j_many(int(v), sub)
        out[idx] = vals
        err = max(err, e)
    return out.reshape(xs.shape), err


def bessel_j(order, x: float) -> EvalResult:
    """Bessel J of integer or real order at x >= 0."""
    vals, err = bessel_j_many(order, np.asarray([float(x)]))
    return EvalResult(float(vals[0]), err)


# Cached cubic splines of A(x) = W_v(x) sqrt(x) on a log grid, for bulk J
# evaluation inside the trace-formula and Voronoi loops. The spline is
# validated against the direct W integral on random points at build time.
_W_TABLES: dict[int, tuple] = {}
_W_TABLE_LO = 12.0


def _w_table(v: int, x_hi: float):
    entry = _W_TABLES.get(v)
    if entry is not None and entry[0] >= x_hi:
        return entry
    from scipy.interpolate import CubicSpline

    x_hi = max(2.0 * x_hi, 1e4)
    n = 4000
    grid = np.exp(np.linspace(math.log(_W_TABLE_LO), math.log(x_hi), n))
    w, werr = _w_many(float(v), grid)
    scaled = w * np.sqrt(grid)
    spline = CubicSpline(np.log(grid), scaled)
    probe = np.exp(np.random.default_rng(7).uniform(
        math.log(_W_TABLE_LO), math.log(x_hi), 64))
    wp, _ = _w_many(float(v), probe)
    err = float(np.max(np.abs(spline(np.log(probe)) / np.sqrt(probe) - wp))) + werr
    entry = (x_hi, spline, err)
    _W_TABLES[v] = entry
    return entry


def bessel_j_fast(v: int, xs) -> tuple[np.ndarray, float]:
    """J_v on a large array, via the cached W spline for x above the
    series range. Same contract as bessel_j_many, tuned for bulk use."""
    v = int(v)
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    out = np.empty_like(flat)
    cut = max(_W_TABLE_LO, math.sqrt(55.0 * (v + 1.0)))
    small = flat <= cut
    err = 0.0
    if np.any(small):
        vals, err = _taylor_j_many(float(v), flat[small])
        out[small] = vals
    if np.any(~small):
        big = flat[~small]
        x_hi, spline, terr = _w_table(v, float(big.max()))
        w = spline(np.log(big)) / np.sqrt(big)
        out[~small] = 2.0 * np.real(np.exp(1j * big) * w)
        err = max(err, 2.0 * terr)
    return out.reshape(xs.shape), err


# ---------------------------------------------------------------------------
# K of imaginary order through the Laplace representation, continued to
# the imaginary axis for the Y-pair.

def _k_integral_many(t: float, zs: np.ndarray) -> tuple[np.ndarray, float]:
    """sqrt(pi/2z) e^{-z} / Gamma(2it+1/2) * int e^{-u} u^{2it-1/2} (1+u/2z)^{2it-1/2} du

    for an array of z with Re z >= 0 (real axis, or the rotated points ix).
    Substitutes u = e^s; the tail below s0 is integrated analytically to
    second order, the rest by panels sized to the e^{2its} oscillation.
    Log-scaled throughout: prefactor exponents combine before exp().
    """
    zs = np.asarray(zs, dtype=complex)
    w = 2j * t  # the order
    lg = sc.loggamma(w + 0.5)
    zmag = np.abs(zs)
    zmin = float(zmag.min())

    s0 = min(-12.0, math.log(max(zmin, 1e-280) / (1.0 + 2.0 * abs(t))) - 10.0)
    s_max = math.log(50.0 + math.pi * abs(t))
    # analytic tail over (-inf, s0]: integrand ~ e^{(w+1/2)s} (1 + eps*A + eps^2*B)
    A = -1.0 + (w - 0.5) / (2.0 * zs)
    B = 0.5 - (w - 0.5) / (2.0 * zs) + (w - 0.5) * (w - 1.5) / (8.0 * zs * zs)
    e0 = np.exp((w + 0.5) * s0)
    tail = (e0 / (w + 0.5)
            + A * np.exp((w + 1.5) * s0) / (w + 1.5)
            + B * np.exp((w + 2.5) * s0) / (w + 2.5))

    def f(s):
        es = np.exp(s)[None, :]
        z = zs[:, None]
        return np.exp(-es + (w + 0.5) * s[None, :] + (w - 0.5) * np.log1p(es / (2.0 * z)))

    freq = (4.0 * abs(t)) / (2.0 * math.pi)
    n_panels = max(32, int((s_max - s0) * (1.0 + 4.0 * freq)))
    edges = uniform_edges(s0, s_max, n_panels)
    coarse, fine, l1 = _batched_two_res(f, edges, len(zs))
    integral = fine + tail
    quad_err = np.abs(fine - coarse) + _EPS * l1 + np.exp(2.5 * s0) * 10.0

    log_pref = 0.5 * np.log(math.pi / (2.0 * zs)) - zs - lg
    re_log = np.real(log_pref)
    re_log = np.minimum(re_log, 700.0)
    pref = np.exp(re_log + 1j * np.imag(log_pref))
    vals = pref * integral
    err = float(np.max(np.abs(pref) * quad_err))
    return vals, err


def bessel_k_imag_many(t: float, xs) -> tuple[np.ndarray, float]:
    """K_{2it} on an array of real x > 0. Real-valued; conj symmetry in t."""
    if abs(t) > MAX_IMAG_ORDER:
        raise ValueError(f"|t| <= {MAX_IMAG_ORDER} required")
    t = abs(t)  # K_v = K_{-v}
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("bessel_k_imag requires x > 0")
    out = np.zeros_like(xs)
    err = 0.0
    small = xs <= 700.0
    if np.any(small):
        vals, err = _k_integral_many(t, xs[small].astype(complex))
        out[small] = np.real(vals)
        err = max(err, float(np.max(np.abs(np.imag(vals)))))
    if np.any(~small):
        err = max(err, 1e-300)  # underflow: e^{-x} below the representable range
    return out, err


def bessel_k_imag(t: float, x: float) -> EvalResult:
    """K_{2it}(x) for real t, x > 0; underflows to 0 beyond x = 700."""
    vals, err = bessel_k_imag_many(t, np.asarray([float(x)]))
    return EvalResult(float(vals[0]), err)


def bessel_y_pair_many(t: float, xs) -> tuple[np.ndarray, float]:
    """Y_{2it}(x) + Y_{-2it}(x) on an array of x > 0.

    From -pi Y_v(x) = e^{-v pi i/2} K_v(x e^{-pi i/2}) + e^{v pi i/2} K_v(x e^{pi i/2})
    summed over v = ±2it, which collapses to -(4/pi) cosh(pi t) Re K_{2it}(ix).
    """
    if abs(t) > MAX_IMAG_ORDER:
        raise ValueError(f"|t| <= {MAX_IMAG_ORDER} required")
    t = abs(t)
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("bessel_y_pair requires x > 0")
    vals, err = _k_integral_many(t, 1j * xs)
    scale = 4.0 / math.pi * math.cosh(math.pi * t)
    return -scale * np.real(vals), scale * err


def bessel_y_pair(t: float, x: float) -> EvalResult:
    vals, err = bessel_y_pair_many(t, np.asarray([float(x)]))
    return EvalResult(float(vals[0]), err)


# ---------------------------------------------------------------------------
# Voronoi kernels

def voronoi_kernel_many(form_kind: str, param: float, sign: int, ys) -> tuple[np.ndarray, float]:
    """The Voronoi kernels on an array of y > 0.

    holomorphic weight k:  J+ = 2 pi J_{k-1}(4 pi y),  J- = 0.
    maass parameter t:     J+ = (pi/cosh pi t)(Y_{2it}+Y_{-2it})(4 pi y),
                           J- = 4 cosh(pi t) K_{2it}(4 pi y).
    """
    ys = np.asarray(ys, dtype=float)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    if form_kind == "holomorphic":
        k = int(param)
        if k < 2 or k % 2:
            raise ValueError("holomorphic weight must be an even integer >= 2")
        if sign == -1:
            return np.zeros_like(ys), 0.0
        vals, err = bessel_j_many(k - 1, 4.0 * math.pi * ys)
        return 2.0 * math.pi * vals, 2.0 * math.pi * err
    if form_kind == "maass":
        t = float(param)
        if sign == +1:
            pair, err = bessel_y_pair_many(t, 4.0 * math.pi * ys)
            c = math.pi / math.cosh(math.pi * t)
            return c * pair, c * err
        vals, err = bessel_k_imag_many(t, 4.0 * math.pi * ys)
        c = 4.0 * math.cosh(math.pi * t)
        return c * vals, c * err
    raise ValueError(f"unknown form kind {form_kind!r}")


def voronoi_kernel(form_kind: str, param: float, sign: int, y: float) -> EvalResult:
    vals, err = voronoi_kernel_many(form_kind, param, sign, np.asarray([float(y)]))
    return EvalResult(float(vals[0]), err)
