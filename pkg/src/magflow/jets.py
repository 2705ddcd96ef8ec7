"""Order-3 jet arithmetic, parity-constrained periodic profiles and zero finding.

A :class:`Jet3` holds a value together with its first three derivatives with
respect to ``r``.  Every field may be a float or a numpy array, so the same
code evaluates one point or a whole grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergence

ODD = "odd"
EVEN = "even"

DEFAULT_GRID = 4096
DEFAULT_SIMPLE_TOL = 1e-7
MAX_REFINE_ITER = 200


class Jet3:
    """Truncated Taylor jet (value, d1, d2, d3) with derivative propagation."""

    __slots__ = ("value", "d1", "d2", "d3")
    # let ndarray (op) Jet3 fall through to the reflected Jet3 methods
    __array_ufunc__ = None

    def __init__(self, value, d1=0.0, d2=0.0, d3=0.0):
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)
        object.__setattr__(self, "d3", d3)

    def __setattr__(self, name, value):
        raise AttributeError("Jet3 is immutable")

    @classmethod
    def const(cls, c) -> "Jet3":
        z = np.zeros_like(c) if isinstance(c, np.ndarray) else 0.0
        return cls(c, z, z, z)

    @classmethod
    def variable(cls, r) -> "Jet3":
        if isinstance(r, np.ndarray):
            z = np.zeros_like(r, dtype=float)
            return cls(np.asarray(r, dtype=float), z + 1.0, z, z)
        return cls(float(r), 1.0, 0.0, 0.0)

    def astuple(self):
        return (self.value, self.d1, self.d2, self.d3)

    def __iter__(self):
        return iter(self.astuple())

    def __repr__(self):
        return "Jet3(%r, %r, %r, %r)" % self.astuple()

    def derivative(self, n: int):
        return self.astuple()[n]

    def shift(self) -> "Jet3":
        """Jet of the derivative; the third derivative of the result is unknown (0)."""
        z = self.d3 * 0.0
        return Jet3(self.d1, self.d2, self.d3, z)

    def compose(self, p0, p1, p2, p3) -> "Jet3":
        """Jet of phi(self) given phi and its derivatives at self.value (Faa di Bruno)."""
        a1, a2, a3 = self.d1, self.d2, self.d3
        return Jet3(
            p0,
            p1 * a1,
            p2 * a1 * a1 + p1 * a2,
            p3 * a1 * a1 * a1 + 3.0 * p2 * a1 * a2 + p1 * a3,
        )

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.value + other.value, self.d1 + other.d1,
                        self.d2 + other.d2, self.d3 + other.d3)
        return Jet3(self.value + other, self.d1, self.d2, self.d3)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.value, -self.d1, -self.d2, -self.d3)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet3):
            a0, a1, a2, a3 = self.astuple()
            b0, b1, b2, b3 = other.astuple()
            return Jet3(
                a0 * b0,
                a1 * b0 + a0 * b1,
                a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
                a3 * b0 + 3.0 * a2 * b1 + 3.0 * a1 * b2 + a0 * b3,
            )
        return Jet3(self.value * other, self.d1 * other, self.d2 * other, self.d3 * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet3":
        v = self.value
        inv = 1.0 / v
        return self.compose(inv, -inv ** 2, 2.0 * inv ** 3, -6.0 * inv ** 4)

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        n = int(n)
        if n == 0:
            return Jet3.const(np.ones_like(self.value) if isinstance(self.value, np.ndarray) else 1.0)
        v = self.value
        c = [v ** n,
             n * v ** (n - 1),
             n * (n - 1) * v ** (n - 2) if n >= 2 else 0.0 * v,
             n * (n - 1) * (n - 2) * v ** (n - 3) if n >= 3 else 0.0 * v]
        return self.compose(*c)

    def sin(self) -> "Jet3":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(s, c, -s, -c)

    def cos(self) -> "Jet3":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose(c, -s, -c, s)

    def sqrt(self) -> "Jet3":
        v = self.value
        q = np.sqrt(v)
        return self.compose(q, 0.5 / q, -0.25 / (q * v), 0.375 / (q * v * v))


def jet_sin(x):
    return x.sin() if isinstance(x, Jet3) else np.sin(x)


def jet_cos(x):
    return x.cos() if isinstance(x, Jet3) else np.cos(x)


# ---------------------------------------------------------------------------
# profiles


class SmoothProfile:
    """A 2L-periodic scalar function of declared parity, evaluable as a jet."""

    parity: str
    half_period: float

    def jet(self, r) -> Jet3:
        raise NotImplementedError

    def __call__(self, r):
        return self.jet(r).value

    def derivative_jet(self, r) -> Jet3:
        """Jet of g' at r, accurate to order 2."""
        return self.jet(r).shift()

    @property
    def L(self) -> float:
        return self.half_period


class SeriesProfile(SmoothProfile):
    """Trigonometric series on [0, L].

    Odd parity: g(r) = sum_j b_j sin(j pi r / L), coefficients b_1, b_2, ...
    Even parity: g(r) = c_0 + sum_j c_j cos(j pi r / L), coefficients c_0, c_1, ...
    """

    def __init__(self, coeffs: Sequence[float], parity: str, L: float):
        if parity not in (ODD, EVEN):
            raise ValueError("parity must be 'odd' or 'even'")
        if not L > 0:
            raise ValueError("half period must be positive")
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.parity = parity
        self.half_period = float(L)
        if parity == ODD:
            self._modes = np.arange(1, len(self.coeffs) + 1)
        else:
            self._modes = np.arange(0, len(self.coeffs))

    def __repr__(self):
        return "SeriesProfile(%s, %r, L=%r)" % (list(self.coeffs), self.parity, self.half_period)

    def jet(self, r) -> Jet3:
        r_arr = np.asarray(r, dtype=float)
        w = self._modes * (np.pi / self.half_period)
        ph = np.multiply.outer(r_arr, w)
        s, c = np.sin(ph), np.cos(ph)
        b = self.coeffs
        if self.parity == ODD:
            v = s @ b
            d1 = c @ (b * w)
            d2 = -(s @ (b * w ** 2))
            d3 = -(c @ (b * w ** 3))
        else:
            v = c @ b
            d1 = -(s @ (b * w))
            d2 = -(c @ (b * w ** 2))
            d3 = s @ (b * w ** 3)
        if r_arr.ndim == 0:
            return Jet3(float(v), float(d1), float(d2), float(d3))
        return Jet3(v, d1, d2, d3)


class FunctionProfile(SmoothProfile):
    """Profile backed by an arbitrary jet-valued callable r -> Jet3."""

    def __init__(self, fn: Callable[[object], Jet3], parity: str, L: float, label: str = ""):
        self._fn = fn
        self.parity = parity
        self.half_period = float(L)
        self.label = label

    def __repr__(self):
        return "FunctionProfile(%s, %r, L=%r)" % (self.label or "<fn>", self.parity, self.half_period)

    def jet(self, r) -> Jet3:
        return self._fn(r)


def eval_jet(g: SmoothProfile, r, order: int = 3) -> Jet3:
    """Value and derivatives of g at r; entries above `order` are returned as 0."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be in 0..3")
    j = g.jet(r)
    parts = list(j.astuple())
    for i in range(order + 1, 4):
        parts[i] = parts[i] * 0.0
    return Jet3(*parts)


# ---------------------------------------------------------------------------
# zero finding


@dataclass(frozen=True)
class Root:
    r: float
    simple: bool
    residual: float


@dataclass(frozen=True)
class RootList:
    roots: tuple

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    def __getitem__(self, i):
        return self.roots[i]

    @property
    def values(self) -> list:
        return [x.r for x in self.roots]

    def all_simple(self) -> bool:
        return all(x.simple for x in self.roots)

    def near(self, r: float, tol: float) -> bool:
        return any(abs(x.r - r) <= tol for x in self.roots)


def _scalar_jet(g, x):
    j = g(x)
    return float(j.value), float(j.d1)


def _refine_bracket(g, lo, hi, glo, abs_tol, width_tol):
    """Safeguarded Newton inside a sign-change bracket [lo, hi]."""
    x = 0.5 * (lo + hi)
    for _ in range(MAX_REFINE_ITER):
        gx, dx = _scalar_jet(g, x)
        if gx == 0.0:
            return x, 0.0
        if np.sign(gx) == np.sign(glo):
            lo, glo = x, gx
        else:
            hi = x
        if abs(gx) < abs_tol and hi - lo < width_tol:
            return x, abs(gx)
        if abs(gx) < abs_tol:
            # collapse the bracket around the current iterate
            w = 0.5 * width_tol
            a, b = max(lo, x - w), min(hi, x + w)
            ga, _ = _scalar_jet(g, a)
            gb, _ = _scalar_jet(g, b)
            if ga == 0.0:
                return a, 0.0
            if gb == 0.0:
                return b, 0.0
            if np.sign(ga) != np.sign(gb):
                lo, hi, glo = a, b, ga
                return x, abs(gx)
        step_ok = dx != 0.0 and np.isfinite(dx)
        if step_ok:
            xn = x - gx / dx
            step_ok = lo < xn < hi
        x = xn if step_ok else 0.5 * (lo + hi)
    raise NonConvergence("zero refinement exceeded %d iterations near r=%.17g" % (MAX_REFINE_ITER, x))


def _refine_extremum(g, lo, hi, width_tol):
    """Locate a zero of g' in [lo, hi] where g' changes sign, by bisection."""
    _, dlo = _scalar_jet(g, lo)
    for _ in range(MAX_REFINE_ITER):
        mid = 0.5 * (lo + hi)
        _, dm = _scalar_jet(g, mid)
        if dm == 0.0 or hi - lo < width_tol:
            return mid
        if np.sign(dm) == np.sign(dlo):
            lo, dlo = mid, dm
        else:
            hi = mid
    raise NonConvergence("extremum refinement exceeded %d iterations" % MAX_REFINE_ITER)


def find_zeros(g: Callable[[object], Jet3], a: float, b: float, abs_tol: float = 1e-10,
               grid: int = DEFAULT_GRID, simple_tol: float = DEFAULT_SIMPLE_TOL) -> RootList:
    """All zeros of g on [a, b].

    Sign changes on a uniform grid are refined by safeguarded Newton to
    |g| < abs_tol with bracket width below 1e-12*(b-a).  Local extrema of g
    whose refined value is below abs_tol are reported as tangent zeros.  A
    zero is flagged simple when |g'| exceeds simple_tol times max|g'| on the
    grid.
    """
    if not abs_tol > 0:
        raise ValueError("abs_tol must be positive")
    span = b - a
    width_tol = 1e-12 * span
    rs = np.linspace(a, b, grid)
    J = g(rs)
    v = np.asarray(J.value, dtype=float)
    d = np.asarray(J.d1, dtype=float)
    scale = float(np.max(np.abs(d))) or 1.0

    found = []
    for i in np.flatnonzero(v == 0.0):
        found.append(float(rs[i]))
    for end in (0, grid - 1):
        if v[end] != 0.0 and abs(v[end]) < abs_tol:
            found.append(float(rs[end]))
    sc = np.flatnonzero((v[:-1] * v[1:]) < 0)
    for i in sc:
        x, _ = _refine_bracket(g, float(rs[i]), float(rs[i + 1]), float(v[i]), abs_tol, width_tol)
        found.append(x)
    # tangent zeros: extremum of g between grid points without a sign change
    ext = np.flatnonzero(d[:-1] * d[1:] < 0)
    for i in ext:
        if v[i] * v[i + 1] <= 0:
            continue
        if min(abs(v[i]), abs(v[i + 1])) > 1e3 * abs_tol + 1e-3 * scale * (rs[1] - rs[0]):
            continue
        x = _refine_extremum(g, float(rs[i]), float(rs[i + 1]), width_tol)
        gx, _ = _scalar_jet(g, x)
        if abs(gx) < abs_tol:
            found.append(x)

    found.sort()
    merged = []
    for x in found:
        if merged and abs(x - merged[-1]) < 1e3 * width_tol:
            continue
        merged.append(x)
    roots = []
    for x in merged:
        gx, dx = _scalar_jet(g, x)
        roots.append(Root(r=x, simple=bool(abs(dx) > simple_tol * scale), residual=abs(gx)))
    return RootList(tuple(roots))


def profile_zeros(g: SmoothProfile, derivative: int = 0, abs_tol: float = 1e-10,
                  grid: int = DEFAULT_GRID) -> RootList:
    """Zeros on [0, L] of g or of its first derivative."""
    if derivative == 0:
        fn = g.jet
    elif derivative == 1:
        fn = g.derivative_jet
    else:
        raise ValueError("derivative must be 0 or 1")
    return find_zeros(fn, 0.0, g.half_period, abs_tol=abs_tol, grid=grid)
