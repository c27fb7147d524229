"""Derivative-bound "type" calculus.

A type (Z : F_1,...,F_n) asserts |x^I d^I F| << Z * prod F_j^{i_j} for all
multi-indices I. The calculus has three closed operations (derivative,
product, composition) over a tiny symbolic algebra -- constants,
variables, abs, sqrt, sums, products, quotients, min, powers; nothing
more -- plus a finite-difference harness that verifies a claimed type
against a concrete function with a fitted constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "var", "const", "sqrt", "absval", "emin",
    "FuncType", "TypedFunction", "TypeReport",
    "ArityMismatch", "VanishingInner", "NumericallyUnstable",
    "type_derivative", "type_product", "type_compose", "verify_type",
]


class ArityMismatch(ValueError):
    pass


class VanishingInner(ValueError):
    pass


class NumericallyUnstable(ArithmeticError):
    """Finite differences lost more than six digits on most samples."""


# ---------------------------------------------------------------------------
# Expressions

class Expr:
    """Base of the closed symbolic algebra."""

    def __add__(self, other):
        return Add((self, _coerce(other))).fold()

    __radd__ = __add__

    def __mul__(self, other):
        return Mul((self, _coerce(other))).fold()

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        return Mul((self, Pow(other, Fraction(-1)))).fold()

    def __rtruediv__(self, other):
        return _coerce(other).__truediv__(self)

    def __pow__(self, exponent):
        return Pow(self, Fraction(exponent)).fold()

    def fold(self) -> "Expr":
        return self

    def is_nonneg(self) -> bool:
        return False

    def evaluate(self, point: Sequence[float]) -> float:
        raise NotImplementedError

    def subs(self, values: Sequence["Expr"]) -> "Expr":
        raise NotImplementedError

    def key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Expr) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return Const(Fraction(x))


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Fraction

    def evaluate(self, point):
        return float(self.value)

    def subs(self, values):
        return self

    def is_nonneg(self):
        return self.value >= 0

    def key(self):
        return ("const", self.value)

    def __repr__(self):
        return str(self.value)


@dataclass(frozen=True, eq=False)
class Var(Expr):
    index: int
    name: str = ""

    def evaluate(self, point):
        return float(point[self.index])

    def subs(self, values):
        return values[self.index]

    def key(self):
        return ("var", self.index)

    def __repr__(self):
        return self.name or f"x{self.index}"


@dataclass(frozen=True, eq=False)
class Add(Expr):
    terms: tuple

    def fold(self):
        flat = []
        const = Fraction(0)
        for t in self.terms:
            t = t.fold()
            if isinstance(t, Add):
                flat.extend(t.terms)
            elif isinstance(t, Const):
                const += t.value
            else:
                flat.append(t)
        if const != 0:
            flat.append(Const(const))
        if not flat:
            return Const(Fraction(0))
        if len(flat) == 1:
            return flat[0]
        return Add(tuple(sorted(flat, key=lambda e: repr(e.key()))))

    def evaluate(self, point):
        return sum(t.evaluate(point) for t in self.terms)

    def subs(self, values):
        return Add(tuple(t.subs(values) for t in self.terms)).fold()

    def is_nonneg(self):
        return all(t.is_nonneg() for t in self.terms)

    def key(self):
        return ("add",) + tuple(t.key() for t in self.terms)

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    factors: tuple

    def fold(self):
        flat = []
        const = Fraction(1)
        for t in self.factors:
            t = t.fold()
            if isinstance(t, Mul):
                flat.extend(t.factors)
            elif isinstance(t, Const):
                const *= t.value
            else:
                flat.append(t)
        if const == 0:
            return Const(Fraction(0))
        if const != 1:
            flat.append(Const(const))
        if not flat:
            return Const(Fraction(1))
        if len(flat) == 1:
            return flat[0]
        return Mul(tuple(sorted(flat, key=lambda e: repr(e.key()))))

    def evaluate(self, point):
        out = 1.0
        for t in self.factors:
            out *= t.evaluate(point)
        return out

    def subs(self, values):
        return Mul(tuple(t.subs(values) for t in self.factors)).fold()

    def is_nonneg(self):
        return all(t.is_nonneg() for t in self.factors)

    def key(self):
        return ("mul",) + tuple(t.key() for t in self.factors)

    def __repr__(self):
        return "(" + " * ".join(map(repr, self.factors)) + ")"


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: Fraction

    def fold(self):
        base = self.base.fold()
        if self.exponent == 1:
            return base
        if self.exponent == 0:
            return Const(Fraction(1))
        if isinstance(base, Const):
            if self.exponent.denominator == 1:
                return Const(base.value ** int(self.exponent))
            return Pow(base, self.exponent)
        if isinstance(base, Pow):
            return Pow(base.base, base.exponent * self.exponent).fold()
        return Pow(base, self.exponent)

    def evaluate(self, point):
        return self.base.evaluate(point) ** float(self.exponent)

    def subs(self, values):
        return Pow(self.base.subs(values), self.exponent).fold()

    def is_nonneg(self):
        return self.base.is_nonneg() or self.exponent.denominator == 1 \
            and self.exponent.numerator % 2 == 0

    def key(self):
        return ("pow", self.base.key(), self.exponent)

    def __repr__(self):
        return f"{self.base!r}^{self.exponent}"


@dataclass(frozen=True, eq=False)
class AbsVal(Expr):
    arg: Expr

    def fold(self):
        arg = self.arg.fold()
        if arg.is_nonneg():
            return arg
        if isinstance(arg, Const):
            return Const(abs(arg.value))
        return AbsVal(arg)

    def evaluate(self, point):
        return abs(self.arg.evaluate(point))

    def subs(self, values):
        return AbsVal(self.arg.subs(values)).fold()

    def is_nonneg(self):
        return True

    def key(self):
        return ("abs", self.arg.key())

    def __repr__(self):
        return f"|{self.arg!r}|"


@dataclass(frozen=True, eq=False)
class Min(Expr):
    args: tuple

    def fold(self):
        args = tuple(a.fold() for a in self.args)
        if all(isinstance(a, Const) for a in args):
            return Const(min(a.value for a in args))
        return Min(tuple(sorted(args, key=lambda e: repr(e.key()))))

    def evaluate(self, point):
        return min(a.evaluate(point) for a in self.args)

    def subs(self, values):
        return Min(tuple(a.subs(values) for a in self.args)).fold()

    def is_nonneg(self):
        return all(a.is_nonneg() for a in self.args)

    def key(self):
        return ("min",) + tuple(a.key() for a in self.args)

    def __repr__(self):
        return "min(" + ", ".join(map(repr, self.args)) + ")"


def var(index: int, name: str = "") -> Var:
    return Var(index, name)


def const(value) -> Const:
    return Const(Fraction(value))


def sqrt(e) -> Expr:
    return Pow(_coerce(e), Fraction(1, 2)).fold()


def absval(e) -> Expr:
    return AbsVal(_coerce(e)).fold()


def emin(*args) -> Expr:
    return Min(tuple(_coerce(a) for a in args)).fold()


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# ---------------------------------------------------------------------------
# Types and the calculus

@dataclass(frozen=True)
class FuncType:
    """(Z : F_1,...,F_n); F_l = 0 marks independence from x_l."""

    Z: Expr
    F: tuple

    def __init__(self, Z, F):
        object.__setattr__(self, "Z", _coerce(Z).fold())
        object.__setattr__(self, "F", tuple(_coerce(f).fold() for f in F))
        if not self.F:
            raise ValueError("need at least one variable slot")

    @property
    def arity(self) -> int:
        return len(self.F)

    def bound_at(self, point, multi_index) -> float:
        out = self.Z.evaluate(point)
        for f, i in zip(self.F, multi_index):
            if i:
                out *= f.evaluate(point) ** i
        return out


def type_derivative(t: FuncType, k: int) -> FuncType:
    """d/dx_k sends (Z : F) to (Z F_k / x_k : F), same F slots."""
    if not 1 <= k <= t.arity:
        raise ArityMismatch(f"variable index {k} outside 1..{t.arity}")
    fk = t.F[k - 1]
    if fk == ZERO:
        return FuncType(ZERO, t.F)
    z = t.Z * fk / Var(k - 1)
    return FuncType(z, t.F)


def type_product(t1: FuncType, t2: FuncType) -> FuncType:
    """(Z1 Z2 : F_1 + G_1, ..., F_n + G_n)."""
    if t1.arity != t2.arity:
        raise ArityMismatch(f"arity {t1.arity} vs {t2.arity}")
    return FuncType(t1.Z * t2.Z, tuple(a + b for a, b in zip(t1.F, t2.F)))


def type_compose(outer: FuncType, inners: Sequence[tuple[FuncType, Expr]]) -> FuncType:
    """Type of F(G_1(x),...,G_n(x)) from the composition rule:

        Z = Z_F(G),
        F(G)_j = sum_k [F_k(G) Z_{G_k} + G_k] G_{kj} / G_k.

    `inners` pairs each inner type with the value expression G_k.
    """
    if len(inners) != outer.arity:
        raise ArityMismatch(f"outer arity {outer.arity}, got {len(inners)} inners")
    m = inners[0][0].arity
    values = []
    for t, g in inners:
        if t.arity != m:
            raise ArityMismatch("inner types must share one arity")
        g = _coerce(g).fold()
        if g == ZERO:
            raise VanishingInner("an inner value expression is identically zero")
        values.append(g)
    z = outer.Z.subs(values)
    new_f = []
    for j in range(m):
        terms = []
        for k, (t, _) in enumerate(inners):
            gkj = t.F[j]
            if gkj == ZERO:
                continue
            fk_at_g = outer.F[k].subs(values)
            terms.append((fk_at_g * t.Z + values[k]) * gkj / values[k])
        new_f.append(Add(tuple(terms)).fold() if terms else ZERO)
    return FuncType(z, tuple(new_f))


# ---------------------------------------------------------------------------
# Verification harness

@dataclass(frozen=True)
class TypedFunction:
    evaluator: Callable          # point (ndarray shape (n,)) -> float | complex
    claimed: FuncType
    domain_box: tuple            # per-variable (lo, hi), all positive


@dataclass(frozen=True)
class TypeReport:
    passed: bool
    constant: float              # fitted C on the base box
    constant_rescaled: float     # fitted C on the dyadically scaled box
    rows: tuple                  # (point, multi_index, ratio)
    unstable: int

    def __str__(self):
        lines = [f"{'PASS' if self.passed else 'FAIL'}  C = {self.constant:.4g}"
                 f"  (rescaled box: C = {self.constant_rescaled:.4g},"
                 f" unstable samples: {self.unstable})"]
        for point, idx, ratio in self.rows:
            pt = ", ".join(f"{p:.4g}" for p in point)
            lines.append(f"  point ({pt})  I = {idx}  ratio {ratio:.4g}")
        return "\n".join(lines)


_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}


def _fd(evaluator, point: np.ndarray, multi_index, steps: np.ndarray):
    """Tensor-product central difference; returns (value, roundoff bound)."""
    stencils = [_STENCILS[i] for i in multi_index]
    total = 0.0 + 0.0j
    coef_l1 = 0.0
    max_abs = 0.0
    for combo in itertools.product(*stencils):
        shift = point + steps * np.array([c[0] for c in combo], dtype=float)
        coef = math.prod(c[1] for c in combo)
        val = complex(evaluator(shift))
        total += coef * val
        coef_l1 += abs(coef)
        max_abs = max(max_abs, abs(val))
    scale = math.prod(float(h) ** i for h, i in zip(steps, multi_index))
    noise = np.finfo(float).eps * coef_l1 * max_abs / scale
    return total / scale, noise


def _sample_points(box, samples: int, rng: np.random.Generator) -> np.ndarray:
    los = np.array([b[0] for b in box], dtype=float)
    his = np.array([b[1] for b in box], dtype=float)
    if np.any(los <= 0):
        raise ValueError("domain box must have positive coordinates")
    u = rng.random((samples, len(box)))
    return np.exp(np.log(los) + u * (np.log(his) - np.log(los)))


def _fit_constant(tf: TypedFunction, box, multi_indices, samples, rng,
                  keep_rows: bool):
    points = _sample_points(box, samples, rng)
    worst = 0.0
    rows = []
    unstable = 0
    usable = 0
    for point in points:
        steps = point * 1e-3
        for idx in multi_indices:
            deriv, noise = _fd(tf.evaluator, point, idx, steps)
            lhs = abs(deriv) * math.prod(float(p) ** i for p, i in zip(point, idx))
            denom = tf.claimed.bound_at(point, idx)
            noise_lhs = noise * math.prod(float(p) ** i for p, i in zip(point, idx))
            if denom <= 0:
                # independence slot: the derivative itself must vanish
                if lhs > max(noise_lhs * 10.0, 1e-300):
                    worst = math.inf
                continue
            if abs(deriv) > 0 and noise > 0.25 * abs(deriv) \
                    and noise_lhs / denom > 1e-6:
                unstable += 1
                continue
            usable += 1
            ratio = lhs / denom
            if keep_rows:
                rows.append((tuple(point), tuple(idx), ratio))
            worst = max(worst, ratio)
    if usable < max(1, (len(points) * len(multi_indices)) // 3):
        raise NumericallyUnstable(
            f"only {usable} usable finite-difference samples; step too coarse "
            "or the function too rough")
    return worst, rows, unstable


def verify_type(tf: TypedFunction, multi_indices, samples: int = 24,
                seed: int = 1, c_cap: float = 1e3,
                rescale_factor: float = 4.0) -> TypeReport:
    """Fit the constant in |x^I d^I f| <= C Z prod F^i over sampled points.

    PASS when one constant C <= c_cap covers every sample and the fit is
    stable (within rescale_factor) when the domain box is dyadically
    rescaled. Multi-index orders are capped at 3 per variable for
    finite-difference stability.
    """
    multi_indices = [tuple(idx) for idx in multi_indices]
    for idx in multi_indices:
        if len(idx) != tf.claimed.arity:
            raise ArityMismatch("multi-index arity mismatch")
        if any(i > 3 or i < 0 for i in idx):
            raise ValueError("multi-index orders must lie in 0..3")
    rng = np.random.default_rng(seed)
    c1, rows, unstable = _fit_constant(tf, tf.domain_box, multi_indices,
                                       samples, rng, keep_rows=True)
    box2 = tuple((2 * lo, 2 * hi) for lo, hi in tf.domain_box)
    c2, _, _ = _fit_constant(tf, box2, multi_indices, samples, rng,
                             keep_rows=False)
    stable = (max(c1, c2) <= rescale_factor * max(min(c1, c2), 1e-12)) \
        or max(c1, c2) <= 1.0
    passed = np.isfinite(c1) and np.isfinite(c2) and c1 <= c_cap \
        and c2 <= c_cap and stable
    return TypeReport(bool(passed), float(c1), float(c2), tuple(rows), unstable)
