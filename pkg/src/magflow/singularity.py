"""Admissibility checks and classification of rank-0 points and critical circles.

The flow is defined by a metric profile f (odd) and a magnetic profile
Lambda (even) on [0, L].  Critical circles of the family C1k sit at the
parameters r where f'(r) != 0, with image (h, k) = (a^2/2, Lambda - f*a) and
a = Lambda'/f'.  The equilibria C1Lambda sit at (0, Lambda(r)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DegeneracyError, OnPoleSetError, PoleError
from .jets import (DEFAULT_GRID, EVEN, ODD, Jet3, RootList, SeriesProfile, SmoothProfile,
                   find_zeros, Root)

ELLIPTIC = "Elliptic"
HYPERBOLIC = "Hyperbolic"
PARABOLIC = "Parabolic"
ELLIPTIC_FORK = "EllipticFork"

C1K = "C1k"
C1LAMBDA = "C1Λ"

CONDITION_NAMES = {
    1: "f positive on (0,L), odd and 2L-periodic",
    2: "Lambda even and 2L-periodic",
    3: "boundary slopes f'(0)=1, f'(L)=-1",
    4: "f and Lambda are Morse",
    5: "curve (f, Lambda) is regular",
    6: "f'Lambda''-f''Lambda' has only simple zeros",
    7: "self-intersections of the hyperbolic arc are transversal",
    8: "no line is tangent to the hyperbolic arc and its mirror at three points",
    9: "inflection tangents are tangent nowhere else on the hyperbolic arc",
}


@dataclass
class Tolerances:
    zero: float = 1e-10          # absolute residual for refined zeros
    simple: float = 1e-7         # |g'| > simple * max|g'| declares a simple zero
    boundary: float = 1e-10      # boundary slope check
    regular: float = 1e-14       # f'^2 + Lambda'^2 floor
    disjoint: float = 1e-8       # critical sets separation, times L
    membership: float = 1e-9     # degenerate-type membership, times L
    parity: float = 1e-10
    grid: int = DEFAULT_GRID

    @classmethod
    def from_overrides(cls, overrides: Optional[dict]) -> "Tolerances":
        t = cls()
        for k, v in (overrides or {}).items():
            if not hasattr(t, k):
                raise KeyError("unknown tolerance %r" % k)
            setattr(t, k, int(v) if k == "grid" else float(v))
        return t


class ProfilePair:
    """The pair (f, Lambda) on [0, L]."""

    def __init__(self, f: SmoothProfile, lam: SmoothProfile, L: Optional[float] = None,
                 tol: Optional[Tolerances] = None, name: str = ""):
        self.f = f
        self.lam = lam
        self.L = float(L if L is not None else f.half_period)
        self.tol = tol or Tolerances()
        self.name = name

    def __repr__(self):
        return "ProfilePair(%s, %r, %r, L=%r)" % (self.name or "-", self.f, self.lam, self.L)

    @classmethod
    def from_series(cls, b, c, L=np.pi, name="") -> "ProfilePair":
        return cls(SeriesProfile(b, ODD, L), SeriesProfile(c, EVEN, L), L, name=name)

    @classmethod
    def from_spec(cls, spec) -> "ProfilePair":
        from .dsl import build_profile
        f = build_profile(spec.f_source, ODD, spec.L)
        lam = build_profile(spec.lambda_source, EVEN, spec.L)
        return cls(f, lam, spec.L, Tolerances.from_overrides(spec.tolerances))

    # jets of derived quantities ---------------------------------------------

    def jets(self, r):
        return self.f.jet(r), self.lam.jet(r)

    def det_jet(self, r) -> Jet3:
        """Jet (value, first derivative) of D = f'Lambda'' - f''Lambda'."""
        F, G = self.jets(r)
        v = F.d1 * G.d2 - F.d2 * G.d1
        d1 = F.d1 * G.d3 - F.d3 * G.d1
        z = v * 0.0
        return Jet3(v, d1, z, z)

    def det(self, r):
        return self.det_jet(r).value

    def a(self, r):
        F, G = self.jets(r)
        return G.d1 / F.d1

    def k(self, r):
        F, G = self.jets(r)
        return G.value - F.value * G.d1 / F.d1

    def hk(self, r):
        F, G = self.jets(r)
        a = G.d1 / F.d1
        return 0.5 * a * a, G.value - F.value * a

    def dual_jets(self, r):
        """Jets of a = Lambda'/f' and k = Lambda - f*a, valid to order 2."""
        F, G = self.jets(r)
        a = G.shift() / F.shift()
        k = G - F * a
        return a, k

    def family_usecond(self, r):
        """Second r-derivative of U_{k(r)} at r, Lambda' * D / (f f'^2)."""
        F, G = self.jets(r)
        D = F.d1 * G.d2 - F.d2 * G.d1
        return G.d1 * D / (F.value * F.d1 ** 2)

    def critical_sets(self) -> "CriticalSets":
        return self._critical_sets

    @cached_property
    def _critical_sets(self) -> "CriticalSets":
        return _compute_critical_sets(self)


# ---------------------------------------------------------------------------
# reports and critical sets


@dataclass
class ConditionVerdict:
    condition: int
    name: str
    passed: bool
    witness: Optional[float] = None
    detail: str = ""

    def to_dict(self):
        return {"condition": self.condition, "name": self.name, "passed": self.passed,
                "witness": self.witness, "detail": self.detail}


@dataclass
class ValidationReport:
    verdicts: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, condition) -> ConditionVerdict:
        for v in self.verdicts:
            if v.condition == condition:
                return v
        raise KeyError(condition)

    def failures(self):
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self):
        return {"ok": self.ok, "conditions": [v.to_dict() for v in self.verdicts]}


@dataclass
class CriticalSets:
    rI: RootList
    rStar: RootList
    rCirc: RootList

    def to_dict(self):
        return {name: [x.r for x in getattr(self, name)] for name in ("rI", "rStar", "rCirc")}


def _compute_critical_sets(pair: ProfilePair) -> CriticalSets:
    t = pair.tol
    L = pair.L
    rI = find_zeros(pair.f.derivative_jet, 0.0, L, t.zero, t.grid, t.simple)
    rStar = find_zeros(pair.lam.derivative_jet, 0.0, L, t.zero, t.grid, t.simple)
    # Lambda' vanishes at both poles by parity; make sure the endpoints are present
    roots = list(rStar.roots)
    for end in (0.0, L):
        if not any(abs(x.r - end) <= t.disjoint * L for x in roots):
            j = pair.lam.jet(end)
            roots.append(Root(end, bool(abs(j.d2) > 0), abs(j.d1)))
    roots.sort(key=lambda x: x.r)
    rStar = RootList(tuple(roots))
    rCirc = find_zeros(pair.det_jet, 0.0, L, t.zero, t.grid, t.simple)
    return CriticalSets(rI, rStar, rCirc)


def parity_defect(g: SmoothProfile, points: int = 64):
    """Largest |g(-r) -+ g(r)| or |g(r+2L) - g(r)| on a probe grid, with its location."""
    L = g.half_period
    probe = np.linspace(0.0, 2.0 * L, points, endpoint=False) + L / (3.0 * points)
    v = g(probe)
    sign = -1.0 if g.parity == ODD else 1.0
    defect = np.maximum(np.abs(g(-probe) - sign * v), np.abs(g(probe + 2 * L) - v))
    i = int(np.argmax(defect))
    return float(defect[i]), float(probe[i])


def validate_admissible(pair: ProfilePair) -> ValidationReport:
    """Check the six admissibility conditions, with witnesses on failure."""
    t = pair.tol
    L = pair.L
    rs = np.linspace(0.0, L, t.grid)
    F, G = pair.jets(rs)
    out = []

    # 1. positivity and parity of f
    interior = slice(1, -1)
    fv = F.value[interior]
    i = int(np.argmin(fv))
    defect, where = parity_defect(pair.f)
    if pair.f.parity != ODD:
        out.append(ConditionVerdict(1, CONDITION_NAMES[1], False, None, "f is not declared odd"))
    elif fv[i] <= 0:
        out.append(ConditionVerdict(1, CONDITION_NAMES[1], False, float(rs[interior][i]),
                                    "f = %.3g" % fv[i]))
    elif defect > t.parity:
        out.append(ConditionVerdict(1, CONDITION_NAMES[1], False, where, "parity defect %.3g" % defect))
    else:
        out.append(ConditionVerdict(1, CONDITION_NAMES[1], True))

    # 2. parity of Lambda
    defect, where = parity_defect(pair.lam)
    if pair.lam.parity != EVEN:
        out.append(ConditionVerdict(2, CONDITION_NAMES[2], False, None, "Lambda is not declared even"))
    elif defect > t.parity:
        out.append(ConditionVerdict(2, CONDITION_NAMES[2], False, where, "parity defect %.3g" % defect))
    else:
        out.append(ConditionVerdict(2, CONDITION_NAMES[2], True))

    # 3. boundary slopes
    d0 = F.d1[0] - 1.0
    dL = F.d1[-1] + 1.0
    if abs(d0) >= t.boundary:
        out.append(ConditionVerdict(3, CONDITION_NAMES[3], False, 0.0, "f'(0) - 1 = %.3g" % d0))
    elif abs(dL) >= t.boundary:
        out.append(ConditionVerdict(3, CONDITION_NAMES[3], False, L, "f'(L) + 1 = %.3g" % dL))
    else:
        out.append(ConditionVerdict(3, CONDITION_NAMES[3], True))

    cs = pair.critical_sets()

    # 4. Morse property
    bad = [x for x in cs.rI if not x.simple] + [x for x in cs.rStar if not x.simple]
    if bad:
        out.append(ConditionVerdict(4, CONDITION_NAMES[4], False, bad[0].r, "degenerate critical point"))
    else:
        out.append(ConditionVerdict(4, CONDITION_NAMES[4], True))

    # 5. regularity
    speed = F.d1 ** 2 + G.d1 ** 2
    i = int(np.argmin(speed))
    reg_ok = speed[i] > t.regular
    witness = float(rs[i])
    if reg_ok:
        # the minimum can fall between grid points; check every f' zero as well
        for x in cs.rI:
            j = pair.lam.jet(x.r)
            if j.d1 ** 2 <= t.regular:
                reg_ok, witness = False, x.r
                break
    if reg_ok:
        out.append(ConditionVerdict(5, CONDITION_NAMES[5], True))
    else:
        out.append(ConditionVerdict(5, CONDITION_NAMES[5], False, witness, "f'^2 + Lambda'^2 vanishes"))

    # 6. simple zeros of the determinant
    bad = [x for x in cs.rCirc if not x.simple]
    if bad:
        out.append(ConditionVerdict(6, CONDITION_NAMES[6], False, bad[0].r, "non-simple zero"))
    else:
        out.append(ConditionVerdict(6, CONDITION_NAMES[6], True))

    # pairwise disjointness of the critical sets (implied by 1-6, checked as a guard)
    clash = _first_clash(cs, t.disjoint * L)
    if clash is None:
        out.append(ConditionVerdict(0, "critical sets pairwise disjoint", True))
    else:
        out.append(ConditionVerdict(0, "critical sets pairwise disjoint", False, clash,
                                    "critical sets meet"))
    return ValidationReport(out)


def _first_clash(cs: CriticalSets, tol: float):
    sets = (cs.rI.values, cs.rStar.values, cs.rCirc.values)
    for i in range(3):
        for j in range(i + 1, 3):
            for x in sets[i]:
                for y in sets[j]:
                    if abs(x - y) <= tol:
                        return x
    return None


def critical_sets(pair: ProfilePair) -> CriticalSets:
    cs = pair.critical_sets()
    clash = _first_clash(cs, pair.tol.disjoint * pair.L)
    if clash is not None:
        raise DegeneracyError("critical sets intersect near r=%.10g" % clash)
    return cs


def effective_potential(pair: ProfilePair, k: float, r, order: int = 2) -> Jet3:
    """U_k(r) = (k - Lambda(r))^2 / (2 f(r)^2) with r-derivatives up to `order`."""
    F, G = pair.jets(r)
    if np.any(np.abs(F.value) < 1e-12):
        raise PoleError("effective potential evaluated at a pole")
    w = (k - G) / F
    U = 0.5 * w * w
    parts = list(U.astuple())
    for i in range(order + 1, 4):
        parts[i] = parts[i] * 0.0
    return Jet3(*parts)


def potential_dk(pair: ProfilePair, k, r):
    """Partial derivative of U_k(r) in k, (k - Lambda)/f^2."""
    F, G = pair.jets(r)
    return (k - G.value) / F.value ** 2


@dataclass(frozen=True)
class Rank0Point:
    pole: str
    r: float
    image: tuple
    type: str = "center-center"

    def to_dict(self):
        return {"pole": self.pole, "r": self.r, "h": self.image[0], "k": self.image[1], "type": self.type}


def rank0_points(pair: ProfilePair):
    return (Rank0Point("N", 0.0, (0.0, float(pair.lam(0.0)))),
            Rank0Point("S", pair.L, (0.0, float(pair.lam(pair.L)))))


@dataclass(frozen=True)
class CircleClass:
    family: str
    r: float
    type: str
    sigma: Optional[int]
    image: tuple
    Usecond: float

    def to_dict(self):
        return {"family": self.family, "r": self.r, "type": self.type, "sigma": self.sigma,
                "h": self.image[0], "k": self.image[1], "Usecond": self.Usecond}


def _near(roots: RootList, r: float, tol: float, interior_only: bool = False, L: float = 0.0) -> bool:
    for x in roots:
        if interior_only and (x.r <= tol or x.r >= L - tol):
            continue
        if abs(x.r - r) <= tol:
            return True
    return False


def classify_circle(pair: ProfilePair, r: float) -> CircleClass:
    """Type of the C1k critical circle at parameter r."""
    L = pair.L
    cs = pair.critical_sets()
    tol = pair.tol.membership * L
    if not 0.0 < r < L:
        raise ValueError("r must lie in (0, L)")
    if _near(cs.rI, r, tol):
        raise OnPoleSetError("r=%.10g is a zero of f'; no C1k circle there" % r)
    F, G = pair.jets(r)
    a = G.d1 / F.d1
    image = (0.5 * a * a, G.value - F.value * a)
    D = F.d1 * G.d2 - F.d2 * G.d1
    usecond = G.d1 * D / (F.value * F.d1 ** 2)
    if _near(cs.rCirc, r, tol):
        return CircleClass(C1K, r, PARABOLIC, None, image, usecond)
    if _near(cs.rStar, r, tol, interior_only=True, L=L):
        return CircleClass(C1K, r, ELLIPTIC_FORK, None, image, usecond)
    kind = ELLIPTIC if D * G.d1 > 0 else HYPERBOLIC
    sigma = int(np.sign(-G.d1 / F.d1))
    return CircleClass(C1K, r, kind, sigma, image, usecond)


def classify_equilibrium(pair: ProfilePair, r: float) -> CircleClass:
    """Type of the C1Lambda equilibrium circle at parameter r."""
    L = pair.L
    if not 0.0 < r < L:
        raise ValueError("r must lie in (0, L)")
    F, G = pair.jets(r)
    image = (0.0, G.value)
    usecond = G.d1 ** 2 / F.value ** 2
    cs = pair.critical_sets()
    if _near(cs.rStar, r, pair.tol.membership * L, interior_only=True, L=L):
        return CircleClass(C1LAMBDA, r, ELLIPTIC_FORK, None, image, usecond)
    return CircleClass(C1LAMBDA, r, ELLIPTIC, None, image, usecond)


def breakpoints(pair: ProfilePair):
    cs = pair.critical_sets()
    pts = {0.0, pair.L}
    for s in (cs.rI, cs.rStar, cs.rCirc):
        pts.update(s.values)
    return sorted(pts)


def hyperbolic_intervals(pair: ProfilePair):
    """Maximal open r-intervals, not crossing any zero of f', where D*Lambda' < 0."""
    pts = breakpoints(pair)
    out = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        mid = 0.5 * (lo + hi)
        F, G = pair.jets(mid)
        D = F.d1 * G.d2 - F.d2 * G.d1
        if D * G.d1 < 0:
            out.append((lo, hi))
    return out


def circle_type_intervals(pair: ProfilePair):
    """The arcs of the C1k family between consecutive breakpoints with their type."""
    pts = breakpoints(pair)
    out = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        F, G = pair.jets(mid)
        D = F.d1 * G.d2 - F.d2 * G.d1
        out.append((lo, hi, ELLIPTIC if D * G.d1 > 0 else HYPERBOLIC))
    return out


def validate_strong(pair: ProfilePair) -> ValidationReport:
    """Conditions 7-9 on the hyperbolic part of the profile curve."""
    from .bifdiag import strong_genericity_verdicts
    return ValidationReport(strong_genericity_verdicts(pair))
