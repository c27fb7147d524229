"""Oscillatory quadrature and the Bessel integral transforms.

The compactly supported test windows live here (SmoothWindow), together
with a generic adaptive panel integrator and the three Kuznetsov-side
transforms

    tilde(l) = int J_l(y)  phi(y) dy/y,
    hat(t)   = (pi/sinh pi t) int (J_{2it}-J_{-2it})/(2i) phi(x) dx/x,
    check(t) = (4/pi) cosh(pi t) int K_{2it}(x) phi(x) dx/x,

plus the two-Bessel kernels I(x,y), I0, I1. Oscillatory integrals are done
by panel subdivision at quarter-period resolution with refinement; the
decay lemmas for these transforms are used as test oracles, never as
evaluation shortcuts. The hat transform goes through the cosine
representation (J_{2it}-J_{-2it})/sinh(pi t) = (4i/pi) int cos(x cosh u) cos(2tu) du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import specialfn
from ._panels import composite_gl, refine_edges, two_resolution, uniform_edges
from .specialfn import EvalResult

__all__ = [
    "SmoothWindow",
    "QuadConfig",
    "DecayEnvelope",
    "NonConvergence",
    "plateau_window",
    "gaussian_bump",
    "scaled_window",
    "integrate",
    "transform_tilde",
    "transform_hat",
    "transform_check",
    "kernel_I",
    "kernel_I0_I1",
]

_EPS = np.finfo(float).eps


class NonConvergence(RuntimeError):
    """The panel budget ran out before the tolerance was met."""


@dataclass
class QuadConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_panels: int = 400_000
    oscillation_hint: float = 0.0  # frequency scale, cycles per unit

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_panels < 16:
            raise ValueError("max_panels >= 16 required")


@dataclass(frozen=True)
class DecayEnvelope:
    """Declared decay of an integrand beyond its core range.

    kind "exp": bound amplitude*e^{-rate*x); kind "power": amplitude*x^{-rate}
    with rate > 1 so the tail integral is finite.
    """

    kind: str
    rate: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "power"):
            raise ValueError("kind must be 'exp' or 'power'")
        if self.kind == "power" and self.rate <= 1:
            raise ValueError("power envelope needs rate > 1")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    def bound(self, x: float) -> float:
        if self.kind == "exp":
            return self.amplitude * math.exp(-self.rate * x)
        return self.amplitude * x ** (-self.rate)

    def tail(self, x: float) -> float:
        if self.kind == "exp":
            return self.amplitude * math.exp(-self.rate * x) / self.rate
        return self.amplitude * x ** (1.0 - self.rate) / (self.rate - 1.0)


def _smoothstep(u):
    """C-infinity step: 0 for u<=0, 1 for u>=1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        fa = np.where(u > 0, np.exp(-1.0 / np.maximum(u, 1e-300)), 0.0)
        fb = np.where(u < 1, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    return fa / (fa + fb)


@dataclass(frozen=True)
class SmoothWindow:
    """Compactly supported smooth test function with derivative scale Z.

    The evaluator is masked to vanish off [support[0], support[1]], so the
    support invariant holds by construction.
    """

    support: tuple[float, float]
    deriv_scale: float
    evaluator: Callable[[np.ndarray], np.ndarray]
    deriv_evaluator: Optional[Callable[[np.ndarray, int], np.ndarray]] = None

    def __post_init__(self):
        a, b = self.support
        if not (0 < a < b):
            raise ValueError("support must satisfy 0 < A < B")
        if self.deriv_scale < 0:
            raise ValueError("deriv_scale must be >= 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.support
        inside = (x > a) & (x < b)
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.evaluator(x[inside])
        return out

    @property
    def width(self) -> float:
        return self.support[1] - self.support[0]

    def fd_derivative(self, x, j: int):
        """Central finite difference of order j <= 4, step = width * 1e-4."""
        if not 0 <= j <= 4:
            raise ValueError("finite differences supported for j <= 4")
        if j == 0:
            return self(x)
        h = self.width * 1e-4
        x = np.asarray(x, dtype=float)
        stencils = {
            1: ((-1, -0.5), (1, 0.5)),
            2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
            3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
            4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
        }
        acc = np.zeros_like(x)
        for off, coef in stencils[j]:
            acc = acc + coef * self(x + off * h)
        return acc / h**j

    def scaled(self, X: float) -> "SmoothWindow":
        """The window x -> self(x / X), supported on X*[A, B]."""
        a, b = self.support
        return SmoothWindow((a * X, b * X), self.deriv_scale,
                            lambda x, _s=self: _s(np.asarray(x) / X))


def plateau_window(a: float, b: float, deriv_scale: float = 1.0) -> SmoothWindow:
    """Smooth bump on [a,b]: rise, plateau, fall; transitions of width
    (b-a)/(2 Z) so the j-th derivative scales like (Z/(b-a))^j."""
    z = max(deriv_scale, 1.0)
    tau = (b - a) / (2.0 * z)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return _smoothstep((x - a) / tau) * _smoothstep((b - x) / tau)

    return SmoothWindow((a, b), deriv_scale, ev)


def gaussian_bump(X: float) -> SmoothWindow:
    """Gaussian-profile bump supported on [X/2, 5X/2], centered at 3X/2.

    A Gaussian of width X/3.5 multiplied by smooth edge cutoffs, so the
    support is exactly compact while the profile stays Gaussian in the bulk.
    """
    a, b = 0.5 * X, 2.5 * X
    c = 1.5 * X
    sigma = X / 3.5
    tau = 0.18 * (b - a)

    def ev(x):
        x = np.asarray(x, dtype=float)
        core = np.exp(-0.5 * ((x - c) / sigma) ** 2)
        return core * _smoothstep((x - a) / tau) * _smoothstep((b - x) / tau)

    return SmoothWindow((a, b), 3.0, ev)


def scaled_window(shape: SmoothWindow, X: float) -> SmoothWindow:
    """h(x/X) for a unit-scale shape h (support [1/2, 5/2] typically)."""
    return shape.scaled(X)


# ---------------------------------------------------------------------------

def integrate(f, domain: tuple[float, float], cfg: QuadConfig | None = None,
              envelope: DecayEnvelope | None = None) -> EvalResult:
    """Adaptive panel quadrature of a piecewise-smooth integrand.

    Panel width starts at a quarter period of cfg.oscillation_hint and
    halves until the two-resolution difference meets the tolerances.
    Infinite upper limits require a declared decay envelope; the domain is
    truncated where the envelope drops below abs_tol/10 and the envelope
    tail is added to abs_err.
    """
    cfg = cfg or QuadConfig()
    a, b = domain
    tail_err = 0.0
    if math.isinf(b):
        if envelope is None:
            raise ValueError("infinite domain requires a declared decay envelope")
        t = a + 1.0
        while envelope.bound(t) > cfg.abs_tol / 10.0:
            t *= 2.0
            if t > 1e300:
                raise NonConvergence("envelope never reaches the tolerance")
        tail_err = envelope.tail(t)
        b = t
    if not (b > a):
        raise ValueError("empty or inverted domain")

    n = 8
    if cfg.oscillation_hint > 0:
        n = max(n, int(math.ceil((b - a) * cfg.oscillation_hint * 4.0)))
    if n > cfg.max_panels:
        raise NonConvergence(f"{n} panels needed at quarter-period resolution, "
                             f"budget is {cfg.max_panels}")
    while True:
        edges = uniform_edges(a, b, n)
        val, err, l1 = two_resolution(f, edges)
        err += _EPS * l1
        if err <= max(cfg.abs_tol, cfg.rel_tol * abs(val)):
            break
        if 2 * n > cfg.max_panels:
            raise NonConvergence(f"tolerance not met within {cfg.max_panels} panels")
        n *= 2
    return EvalResult(val, err + tail_err)


def _window_freq(phi: SmoothWindow) -> float:
    return (1.0 + phi.deriv_scale) / phi.width


def transform_tilde(phi: SmoothWindow, l: int, cfg: QuadConfig | None = None) -> EvalResult:
    """tilde(l) = int_0^inf J_l(y) phi(y) dy/y for integer l >= 1."""
    if l < 1:
        raise ValueError("l >= 1 required")
    cfg = cfg or QuadConfig()
    a, b = phi.support
    j_err_box = [0.0]

    def f(ys):
        vals, jerr = specialfn.bessel_j_many(l, ys)
        j_err_box[0] = max(j_err_box[0], jerr)
        return vals * phi(ys) / ys

    # J_l oscillates with period >= 2 pi in y
    hint = max(cfg.oscillation_hint, 1.0 / (2 * math.pi) + _window_freq(phi))
    res = integrate(f, (a, b), QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_panels, hint))
    slack = j_err_box[0] * (b - a) / a
    return EvalResult(res.value, res.abs_err + slack)


def _hat_inner(cs: np.ndarray, phi: SmoothWindow, per_quarter: int) -> np.ndarray:
    """g(c) = int phi(x) cos(c x) dx / x for a batch of frequencies c."""
    a, b = phi.support
    cmax = float(np.max(cs))
    panels = max(8, int(math.ceil((b - a) * (cmax / (2 * math.pi) + _window_freq(phi)) * per_quarter)))
    x, w = np.polynomial.legendre.leggauss(8)
    edges = uniform_edges(a, b, panels)
    pa, pb = edges[:-1], edges[1:]
    half = 0.5 * (pb - pa)
    mid = 0.5 * (pa + pb)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    amp = phi(nodes) / nodes * weights
    return np.cos(np.outer(cs, nodes)) @ amp


def _hat_cutoff(phi: SmoothWindow, stop_tol: float, r: float) -> float:
    """Smallest checkpoint frequency past which the inner cosine transform
    of phi(x)/x stays below stop_tol (empirical scan over a doubling grid,
    three consecutive quiet checkpoints required)."""
    a, b = phi.support
    c = max(2.0, 4.0 * (1.0 + phi.deriv_scale) / (b - a))
    quiet = 0
    while True:
        weight = math.cosh(2.0 * r * math.acosh(max(c, 1.0))) if r else 1.0
        probes = np.array([c, 1.29 * c, 1.61 * c])
        if np.max(np.abs(_hat_inner(probes, phi, 4))) * weight < stop_tol / 3.0:
            quiet += 1
            if quiet >= 2:
                return 1.61 * c
        else:
            quiet = 0
        c *= 2.0
        if c > 3e6:
            raise NonConvergence("hat transform: inner transform decays too slowly")


def transform_hat(phi: SmoothWindow, t, cfg: QuadConfig | None = None) -> EvalResult:
    """hat(t) through the cosine representation:

        hat(t) = 2 int_0^inf cos(2tu) [ int phi(x) cos(x cosh u) dx/x ] du.

    Real t, or purely imaginary t = ir with 0 < r < 1/2 (cos -> cosh).
    The u-axis is integrated out to arccosh of the empirically detected
    decay point of the inner transform, in blocks sized to the local
    frequency 2|t| + B sinh(u).
    """
    cfg = cfg or QuadConfig()
    t = complex(t)
    if abs(t.real) > 0 and abs(t.imag) > 0:
        raise ValueError("t must be real or purely imaginary")
    r = t.imag
    if r and not (0 < r < 0.5):
        raise ValueError("imaginary t = ir requires 0 < r < 1/2")
    treal = abs(t.real)

    a, b = phi.support
    stop_tol = cfg.abs_tol / 10.0
    u_stop = math.acosh(_hat_cutoff(phi, stop_tol, r))

    total = 0.0
    err = 0.0
    u0 = 0.0
    panels_used = 0
    block_panels = 48
    glx, glw = np.polynomial.legendre.leggauss(8)

    def block(e):
        pa, pb = e[:-1], e[1:]
        half = 0.5 * (pb - pa)
        mid = 0.5 * (pa + pb)
        nodes = (mid[:, None] + half[:, None] * glx[None, :]).ravel()
        g = _hat_inner(np.cosh(nodes), phi, 4)
        osc = np.cosh(2.0 * r * nodes) if r else np.cos(2.0 * treal * nodes)
        vals = (2.0 * osc * g).reshape(len(pa), 8)
        return float(((vals * glw[None, :]).sum(axis=1) * half).sum())

    def freq_at(u):
        return (2.0 * treal + b * math.sinh(u) + 1.0) / (2.0 * math.pi)

    while u0 < u_stop:
        width = min(block_panels / (4.0 * freq_at(u0)), 0.75, u_stop - u0)
        u1 = u0 + width
        n = max(8, int(math.ceil(width * freq_at(u1) * 4.0)))
        edges = uniform_edges(u0, u1, n)
        coarse = block(edges)
        fine = block(refine_edges(edges))
        total += fine
        err += abs(fine - coarse)
        panels_used += 3 * n
        if panels_used > cfg.max_panels:
            raise NonConvergence("hat transform: panel budget exhausted")
        u0 = u1
    tail = 4.0 * stop_tol * (1.0 + u_stop)
    # The J-difference kernel equals MINUS the printed cosine double
    # integral: letting t -> 0 in (J_{2it}-J_{-2it})/sinh(pi t) gives
    # 2i Y_0, while the cosine integral tends to -2i Y_0.
    return EvalResult(-total, err + tail + _EPS * (1.0 + abs(total)))


def transform_check(phi: SmoothWindow, t: float, cfg: QuadConfig | None = None) -> EvalResult:
    """check(t) = (4/pi) cosh(pi t) int K_{2it}(x) phi(x) dx/x."""
    cfg = cfg or QuadConfig()
    a, b = phi.support
    k_err_box = [0.0]

    def f(xs):
        vals, kerr = specialfn.bessel_k_imag_many(t, xs)
        k_err_box[0] = max(k_err_box[0], kerr)
        return vals * phi(xs) / xs

    hint = max(cfg.oscillation_hint, _window_freq(phi), 2.0 * abs(t) / (2 * math.pi * a))
    res = integrate(f, (a, b), QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_panels, hint))
    c = 4.0 / math.pi * math.cosh(math.pi * t)
    slack = k_err_box[0] * (b - a) / a * c
    return EvalResult(c * res.value, c * res.abs_err + slack)


def kernel_I(a: float, b: float, x: float, y: float, h: SmoothWindow,
             k: int, kappa: int, cfg: QuadConfig | None = None) -> EvalResult:
    """I(x,y) = int h(xi) J_{k-1}(4 pi a sqrt(x xi)) J_{kappa-1}(4 pi b sqrt(y xi)) dxi."""
    if min(a, b, x, y) <= 0:
        raise ValueError("a, b, x, y must be positive")
    cfg = cfg or QuadConfig()
    lo, hi = h.support
    err_box = [0.0]

    def f(xi):
        j1, e1 = specialfn.bessel_j_many(k - 1, 4 * math.pi * a * np.sqrt(x * xi))
        j2, e2 = specialfn.bessel_j_many(kappa - 1, 4 * math.pi * b * np.sqrt(y * xi))
        err_box[0] = max(err_box[0], e1 + e2)
        return h(xi) * j1 * j2

    freq = (a * math.sqrt(x) + b * math.sqrt(y)) / math.sqrt(lo) + _window_freq(h)
    res = integrate(f, (lo, hi), QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_panels,
                                            max(cfg.oscillation_hint, freq)))
    return EvalResult(res.value, res.abs_err + err_box[0] * (hi - lo))


def kernel_I0_I1(a: float, b: float, x: float, y: float, h: SmoothWindow,
                 t: float, kappa: int, which: int,
                 cfg: QuadConfig | None = None) -> EvalResult:
    """The Maass-side kernels of the two-Bessel integrals:

    which=0: int h(xi) (Y_{2it}+Y_{-2it})(4 pi a sqrt(x xi)) J_{kappa-1}(4 pi b sqrt(y xi)) dxi
    which=1: same with K_{2it} in place of the Y-pair (exponentially small
             in a sqrt(x)).
    Requires a sqrt(x) > 10.
    """
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    if a * math.sqrt(x) <= 10:
        raise ValueError("kernel_I0_I1 requires a*sqrt(x) > 10")
    cfg = cfg or QuadConfig()
    lo, hi = h.support
    err_box = [0.0]

    def f(xi):
        arg1 = 4 * math.pi * a * np.sqrt(x * xi)
        if which == 0:
            k1, e1 = specialfn.bessel_y_pair_many(t, arg1)
        else:
            k1, e1 = specialfn.bessel_k_imag_many(t, arg1)
        j2, e2 = specialfn.bessel_j_many(kappa - 1, 4 * math.pi * b * np.sqrt(y * xi))
        err_box[0] = max(err_box[0], e1 + e2)
        return h(xi) * k1 * j2

    freq = (a * math.sqrt(x) + b * math.sqrt(y)) / math.sqrt(lo) + _window_freq(h)
    res = integrate(f, (lo, hi), QuadConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_panels,
                                            max(cfg.oscillation_hint, freq)))
    return EvalResult(res.value, res.abs_err + err_box[0] * (hi - lo))
