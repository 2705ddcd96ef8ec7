"""Bifurcation diagram, dual curve gamma = (a, k) and the bifurcation complex.

The C1k family maps to gamma_1(r) = (a(r)^2/2, k(r)) with a = Lambda'/f' and
k = Lambda - f*a.  Near each zero r_i of f' both a and k blow up and gamma
approaches the line f(r_i)*a - Lambda(r_i) + k = 0; arcs are sampled outside a
collar around r_i and the limiting line is stored instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSliceError, NonBottEnergy
from .jets import Jet3, find_zeros
from .singularity import (ELLIPTIC, ELLIPTIC_FORK, HYPERBOLIC, PARABOLIC, CONDITION_NAMES,
                          ConditionVerdict, ProfilePair, circle_type_intervals,
                          hyperbolic_intervals, rank0_points)

COLLAR = 1e-4
ARC_SAMPLES = 400


@dataclass
class PoleMarker:
    r: float
    slope: float       # -f(r_i)
    intercept: float   # Lambda(r_i)

    def to_dict(self):
        return {"r": self.r, "slope": self.slope, "intercept": self.intercept}


@dataclass
class DualArc:
    r_lo: float
    r_hi: float
    r: np.ndarray
    a: np.ndarray
    k: np.ndarray


@dataclass
class DualCurve:
    arcs: list
    poles: list
    cusps: list
    pair: Optional[ProfilePair] = None

    def a(self, r):
        return self.pair.a(r)

    def k(self, r):
        return self.pair.k(r)

    def jets(self, r):
        return self.pair.dual_jets(r)

    def to_dict(self):
        return {"arcs": [{"rRange": [x.r_lo, x.r_hi], "r": x.r.tolist(), "a": x.a.tolist(),
                          "k": x.k.tolist()} for x in self.arcs],
                "poles": [p.to_dict() for p in self.poles], "cusps": list(self.cusps)}


@dataclass
class Gamma1Arc:
    r_lo: float
    r_hi: float
    type: str
    r: np.ndarray
    h: np.ndarray
    k: np.ndarray

    def to_dict(self):
        return {"rRange": [self.r_lo, self.r_hi], "type": self.type,
                "h": self.h.tolist(), "k": self.k.tolist()}


@dataclass
class BifurcationDiagram:
    gamma1_arcs: list
    gamma2: tuple                 # (k_min, k_max) on h = 0
    rank0: list
    cusps: list                   # (h, k, r)
    tangencies: list              # (0, Lambda(r*), r*)
    self_intersections: list
    asymptote_parabolas: list     # (vertex k, coefficient, r_i)

    def to_dict(self):
        return {
            "gamma1": [a.to_dict() for a in self.gamma1_arcs],
            "gamma2": {"h": 0.0, "k": list(self.gamma2)},
            "rank0": [p.to_dict() for p in self.rank0],
            "cusps": [{"h": h, "k": k, "r": r} for h, k, r in self.cusps],
            "tangencies": [{"h": h, "k": k, "r": r} for h, k, r in self.tangencies],
            "selfIntersections": [x.to_dict() for x in self.self_intersections],
            "asymptoteParabolas": [{"vertex": [0.0, k], "coefficient": c, "r": r}
                                   for k, c, r in self.asymptote_parabolas],
        }


def _pole_free_components(pair: ProfilePair, collar: float):
    """Components of [0, L] minus collars around the zeros of f'."""
    L = pair.L
    cuts = pair.critical_sets().rI.values
    pts = [0.0]
    for r in cuts:
        pts += [r - collar * L, r + collar * L]
    pts.append(L)
    return [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]


def gamma_curves(pair: ProfilePair, samples: int = ARC_SAMPLES, collar: float = COLLAR):
    """Dual curve and raw gamma_1 arcs, sampled outside collars around the zeros of f'."""
    cs = pair.critical_sets()
    arcs = []
    for lo, hi in _pole_free_components(pair, collar):
        r = np.linspace(lo, hi, samples)
        arcs.append(DualArc(lo, hi, r, pair.a(r), pair.k(r)))
    poles = [PoleMarker(x, -float(pair.f(x)), float(pair.lam(x))) for x in cs.rI.values]
    dual = DualCurve(arcs, poles, list(cs.rCirc.values), pair)

    g1 = []
    for lo, hi, kind in circle_type_intervals(pair):
        lo2, hi2 = lo, hi
        for ri in cs.rI.values:
            if abs(lo - ri) < 1e-12:
                lo2 = lo + collar * pair.L
            if abs(hi - ri) < 1e-12:
                hi2 = hi - collar * pair.L
        r = np.linspace(lo2, hi2, samples)
        h, k = pair.hk(r)
        g1.append(Gamma1Arc(lo, hi, kind, r, h, k))
    return dual, g1


def cusp_points(pair: ProfilePair):
    out = []
    for r in pair.critical_sets().rCirc.values:
        h, k = pair.hk(r)
        out.append((float(h), float(k), r))
    return out


def pole_level_crossings(pair: ProfilePair):
    """Points of gamma_1 with h > 0 on the lines k = Lambda(0) and k = Lambda(L)."""
    L = pair.L
    levels = sorted({float(pair.lam(0.0)), float(pair.lam(L))})
    out = []
    for lo, hi in _pole_free_components(pair, COLLAR):
        for c in levels:
            def g(r, c=c):
                a, k = pair.dual_jets(r)
                return k - c
            for x in find_zeros(g, lo, hi, pair.tol.zero, 2048):
                h, k = pair.hk(x.r)
                if h > 1e-12:
                    out.append((float(h), c, x.r))
    return out


def diagram(pair: ProfilePair, samples: int = ARC_SAMPLES) -> BifurcationDiagram:
    cs = pair.critical_sets()
    L = pair.L
    _, arcs = gamma_curves(pair, samples)
    lam_grid = pair.lam(np.linspace(0.0, L, pair.tol.grid))
    interior_star = [r for r in cs.rStar.values if 0.0 < r < L]
    ext = [float(pair.lam(r)) for r in cs.rStar.values]
    gamma2 = (float(min(lam_grid.min(), min(ext))), float(max(lam_grid.max(), max(ext))))
    tangencies = [(0.0, float(pair.lam(r)), r) for r in interior_star]
    parabolas = [(float(pair.lam(r)), float(pair.f(r)), r) for r in cs.rI.values]
    return BifurcationDiagram(arcs, gamma2, list(rank0_points(pair)), cusp_points(pair),
                              tangencies, self_intersections(pair), parabolas)


# ---------------------------------------------------------------------------
# crossings of parametrized plane curves


@dataclass
class Crossing:
    r1: float
    r2: float
    point: tuple
    transversal: bool
    mirrored: bool = False

    def to_dict(self):
        return {"r": [self.r1, self.r2], "point": list(self.point),
                "transversal": self.transversal, "mirrored": self.mirrored}


def _segment_hits(P, Q):
    """Index pairs (i, j) where segment P[i]P[i+1] meets segment Q[j]Q[j+1]."""
    p0, p1 = P[:-1], P[1:]
    q0, q1 = Q[:-1], Q[1:]
    hits = []
    chunk = 512
    for s in range(0, len(p0), chunk):
        a0 = p0[s:s + chunk, None, :]
        a1 = p1[s:s + chunk, None, :]
        d = a1 - a0
        e = (q1 - q0)[None, :, :]
        w = q0[None, :, :] - a0
        den = d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[..., 0] * e[..., 1] - w[..., 1] * e[..., 0]) / den
            u = (w[..., 0] * d[..., 1] - w[..., 1] * d[..., 0]) / den
        ok = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
        ii, jj = np.nonzero(ok)
        for i, j in zip(ii, jj):
            hits.append((s + i, j))
    return hits


def curve_crossings(curve1, curve2, intervals1, intervals2, samples: int = 1500,
                    same: bool = False, tol: float = 1e-9, min_sep: float = 0.0):
    """Intersections of two parametrized plane curves.

    curve(r) returns (x, y, dx, dy) as arrays or floats.  When `same` is true the
    curves coincide and only pairs r1 < r2 separated by more than `min_sep` are
    reported.  Every candidate from the polyline sweep is refined by Newton on
    the 2x2 system curve1(r1) = curve2(r2).
    """
    out = []
    polys1 = [(iv, np.linspace(iv[0], iv[1], samples)) for iv in intervals1]
    polys2 = [(iv, np.linspace(iv[0], iv[1], samples)) for iv in intervals2]
    for iv1, R1 in polys1:
        x1, y1, _, _ = curve1(R1)
        P = np.column_stack([x1, y1])
        for iv2, R2 in polys2:
            x2, y2, _, _ = curve2(R2)
            Q = np.column_stack([x2, y2])
            for i, j in _segment_hits(P, Q):
                r1, r2 = 0.5 * (R1[i] + R1[i + 1]), 0.5 * (R2[j] + R2[j + 1])
                if same and (r2 <= r1 + min_sep):
                    continue
                res = _newton2(curve1, curve2, r1, r2, iv1, iv2, tol)
                if res is None:
                    continue
                r1, r2, pt, transversal = res
                if same and r2 <= r1 + min_sep:
                    continue
                if any(abs(c.r1 - r1) < 1e-7 and abs(c.r2 - r2) < 1e-7 for c in out):
                    continue
                out.append(Crossing(r1, r2, pt, transversal))
    return out


def _newton2(c1, c2, r1, r2, iv1, iv2, tol):
    for _ in range(60):
        x1, y1, dx1, dy1 = (float(v) for v in c1(r1))
        x2, y2, dx2, dy2 = (float(v) for v in c2(r2))
        fx, fy = x1 - x2, y1 - y2
        if max(abs(fx), abs(fy)) < tol:
            n1 = np.hypot(dx1, dy1)
            n2 = np.hypot(dx2, dy2)
            cross = abs(dx1 * dy2 - dy1 * dx2) / (n1 * n2) if n1 * n2 > 0 else 0.0
            return r1, r2, (x1, y1), bool(cross > 1e-8)
        det = -dx1 * dy2 + dy1 * dx2
        if det == 0:
            return None
        d1 = (-fx * dy2 + fy * dx2) / det
        d2 = (dx1 * fy - dy1 * fx) / det
        r1 -= d1
        r2 -= d2
        if not (iv1[0] <= r1 <= iv1[1] and iv2[0] <= r2 <= iv2[1]):
            return None
    return None


def _dual_curve_fn(pair: ProfilePair, mirror: bool = False):
    s = -1.0 if mirror else 1.0

    def fn(r):
        a, k = pair.dual_jets(r)
        return s * a.value, k.value, s * a.d1, k.d1
    return fn


def self_intersections(pair: ProfilePair, samples: int = 1500):
    """Self-intersections of gamma_1 in the (h, k) plane.

    gamma_1(r1) = gamma_1(r2) means k(r1) = k(r2) and a(r1) = +-a(r2), so both
    the dual curve and its mirror image in the k-axis are searched.
    """
    comps = _pole_free_components(pair, COLLAR)
    found = []
    direct = _dual_curve_fn(pair)
    mirror = _dual_curve_fn(pair, True)
    sep = 1e-6 * pair.L
    for c in curve_crossings(direct, direct, comps, comps, samples, same=True, min_sep=sep):
        found.append(c)
    for c in curve_crossings(direct, mirror, comps, comps, samples, same=True, min_sep=sep):
        # points on the k-axis meet their own mirror image; they are tangencies, not crossings
        if abs(c.point[0]) < 1e-9:
            continue
        c.mirrored = True
        found.append(c)
    cusps = pair.critical_sets().rCirc.values
    out = []
    for c in found:
        # both parameters hugging one cusp: the two branches of the cusp, not a crossing
        if any(max(abs(c.r1 - rc), abs(c.r2 - rc)) < 1e-3 * pair.L for rc in cusps):
            continue
        h = 0.5 * c.point[0] ** 2
        out.append(Crossing(c.r1, c.r2, (h, c.point[1]), c.transversal, c.mirrored))
    return out


# ---------------------------------------------------------------------------
# strong genericity (conditions 7-9)


def multiple_points(branches, samples: int = 1500, tol: float = 1e-7):
    """Points where three or more distinct (branch, parameter) pairs of plane curves meet.

    branches: list of (curve, [intervals]) with curve(r) -> (x, y, dx, dy).
    Returns a list of (point, [(branch index, r), ...]).
    """
    hits = []
    n = len(branches)
    for i in range(n):
        for j in range(i, n):
            ci, ivi = branches[i]
            cj, ivj = branches[j]
            for c in curve_crossings(ci, cj, ivi, ivj, samples, same=(i == j), min_sep=1e-6):
                hits.append((c.point, (i, c.r1), (j, c.r2)))
    clusters = []
    for pt, p1, p2 in hits:
        for cl in clusters:
            if np.hypot(cl[0][0] - pt[0], cl[0][1] - pt[1]) < tol:
                cl[1].update([_key(p1), _key(p2)])
                break
        else:
            clusters.append([pt, {_key(p1), _key(p2)}])
    return [(pt, sorted(members)) for pt, members in clusters if len(members) >= 3]


def _key(p):
    return (p[0], round(p[1], 6))


def _profile_curve_fn(pair: ProfilePair):
    def fn(r):
        F, G = pair.jets(r)
        return F.value, G.value, F.d1, G.d1
    return fn


def strong_genericity_verdicts(pair: ProfilePair):
    L = pair.L
    ihyp = hyperbolic_intervals(pair)
    shrink = 1e-6 * L
    ivs = [(lo + shrink, hi - shrink) for lo, hi in ihyp]
    out = []
    if not ivs:
        for c in (7, 8, 9):
            out.append(ConditionVerdict(c, CONDITION_NAMES[c], True, None, "no hyperbolic circles"))
        return out

    gam = _profile_curve_fn(pair)
    bad = [c for c in curve_crossings(gam, gam, ivs, ivs, same=True, min_sep=1e-6 * L)
           if not c.transversal]
    if bad:
        out.append(ConditionVerdict(7, CONDITION_NAMES[7], False, bad[0].r1,
                                    "tangential self-intersection with r=%.10g" % bad[0].r2))
    else:
        out.append(ConditionVerdict(7, CONDITION_NAMES[7], True))

    dual = _dual_curve_fn(pair)
    mirror = _dual_curve_fn(pair, True)
    triples = multiple_points([(dual, ivs), (mirror, ivs)])
    if triples:
        members = triples[0][1]
        out.append(ConditionVerdict(8, CONDITION_NAMES[8], False, members[0][1],
                                    "line tangent at parameters %s" % [m[1] for m in members]))
    else:
        out.append(ConditionVerdict(8, CONDITION_NAMES[8], True))

    witness = None
    for rc in pair.critical_sets().rCirc.values:
        a0, k0 = float(pair.a(rc)), float(pair.k(rc))
        for s in (1.0, -1.0):
            for lo, hi in ivs:
                r = np.linspace(lo, hi, 4000)
                keep = np.abs(r - rc) > 1e-3 * L if s > 0 else np.ones_like(r, dtype=bool)
                d = np.hypot(s * pair.a(r) - a0, pair.k(r) - k0)[keep]
                if d.size and d.min() < 1e-7:
                    witness = float(r[keep][np.argmin(d)])
    if witness is None:
        out.append(ConditionVerdict(9, CONDITION_NAMES[9], True))
    else:
        out.append(ConditionVerdict(9, CONDITION_NAMES[9], False, witness,
                                    "inflection tangent touches the hyperbolic arc again"))
    return out


# ---------------------------------------------------------------------------
# bifurcation complex


@dataclass
class ComplexFace:
    id: int
    members: list      # (slice index, molecule edge id)

    def to_dict(self):
        return {"id": self.id, "members": [list(m) for m in self.members]}


@dataclass
class ComplexCell:
    kind: str          # "edge" or "vertex"
    label: str
    samples: list      # (h, k, r) points on the cell
    right_faces: list  # per sample, number of components adjacent on the right

    def to_dict(self):
        return {"kind": self.kind, "label": self.label,
                "samples": [list(s) for s in self.samples], "rightAdjacent": list(self.right_faces)}


@dataclass
class BifurcationComplex:
    h_max: float
    events: list
    slices: list           # slice energies
    molecules: list
    faces: list
    cells: list
    zero_level_path: list  # k-values of the Reeb graph of Lambda
    resolution: dict = field(default_factory=dict)

    @property
    def right_adjacency_ok(self) -> bool:
        return all(all(n == 1 for n in c.right_faces) for c in self.cells)

    def to_dict(self):
        return {"hMax": self.h_max, "events": self.events, "slices": self.slices,
                "faces": [f.to_dict() for f in self.faces],
                "cells": [c.to_dict() for c in self.cells],
                "rightAdjacencyOk": self.right_adjacency_ok,
                "zeroLevelPath": self.zero_level_path, "resolution": self.resolution,
                "molecules": [m.to_dict() for m in self.molecules]}


def event_energies(pair: ProfilePair, h_max: float):
    hs = {0.0}
    hs.update(h for h, _, _ in cusp_points(pair))
    hs.update(h for h, _, _ in pole_level_crossings(pair))
    hs.update(c.point[0] for c in self_intersections(pair))
    return sorted(h for h in hs if h < h_max)


def _continue_component(gb_factory, k, interval, h0, h1, steps):
    """Follow a motion-domain component at fixed k from h0 to h1; None if it bifurcates."""
    cur = interval
    prev = gb_factory(h0).components(k)
    for h in np.linspace(h0, h1, steps)[1:]:
        comps = gb_factory(h).components(k)
        fwd = [c for c in comps if _overlap(c, cur)]
        if len(fwd) != 1:
            return None
        nxt = fwd[0]
        # no other component may be absorbed into the one we follow
        if len([c for c in prev if _overlap(c, nxt)]) != 1:
            return None
        prev, cur = comps, nxt
    return cur


def _overlap(a, b):
    return a[0] <= b[1] and b[0] <= a[1]


def _atom_keys(mol):
    """Identify atoms by (sign of g, rank of the critical point among those of g in r-order).

    Between consecutive events the critical points of g+ and g- move continuously
    without colliding, so these keys are stable inside a strip of energies.
    """
    ranks = {}
    for sign in (1, -1):
        rs = sorted(r for s, r, _, _ in mol.bounds.critical_points if s == sign)
        for i, r in enumerate(rs):
            ranks[(sign, r)] = i
    keys = {}
    for at in mol.atoms:
        keys[at.id] = frozenset((s, ranks[(s, r)]) for s, r in zip(at.signs, at.circle_params))
    return keys


def _edge_keys(mol):
    ak = _atom_keys(mol)
    return {(ak[e.lower], ak[e.upper]): e.id for e in mol.edges}


def _slice_offset(h_e, lo, hi):
    from .molecule import GATE_ABS, GATE_REL
    room = min(h_e - lo, hi - h_e)
    gate = max(GATE_ABS, GATE_REL * h_e)
    return min(0.25 * room, max(0.02 * room, 5 * gate))


def build_complex(pair: ProfilePair, h_max: float, steps: int = 40, k_samples: int = 9):
    """Sweep energy slices, glue torus families across events and check right adjacency.

    One molecule is built in the middle of every strip between consecutive events.
    Inside a strip edges are matched by atom identity; across an event, molecules
    just below and above it are compared by following components at fixed k.
    """
    from .molecule import GBounds, reeb_molecule

    events = event_energies(pair, h_max)
    cusps = cusp_points(pair)
    if cusps and h_max <= max(h for h, _, _ in cusps):
        raise ValueError("h_max must exceed every cusp abscissa")
    bounds = events + [h_max]
    slices = [0.5 * (a + b) for a, b in zip(bounds[:-1], bounds[1:])]
    for h in slices:
        if any(abs(h - e) < 1e-10 for e in events):
            raise DegenerateSliceError("slice energy %.12g collides with an event" % h)
    mols = [reeb_molecule(pair, h) for h in slices]

    cache = {}

    def gb(h):
        if h not in cache:
            cache[h] = GBounds(pair, h)
        return cache[h]

    parent = {}
    for si, m in enumerate(mols):
        for e in m.edges:
            parent[(si, e.id)] = (si, e.id)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for si in range(len(mols) - 1):
        h_e = bounds[si + 1]
        d = _slice_offset(h_e, bounds[si], bounds[si + 2])
        below, above = reeb_molecule(pair, h_e - d), reeb_molecule(pair, h_e + d)
        to_mid0 = _match_in_strip(below, mols[si])
        to_mid1 = _match_in_strip(above, mols[si + 1])
        for e in below.edges:
            if e.id not in to_mid0:
                continue
            for k in np.linspace(e.k_lo, e.k_hi, k_samples + 2)[1:-1]:
                comp = _edge_component(below, e.id, k)
                if comp is None:
                    continue
                end = _continue_component(gb, k, comp, h_e - d, h_e + d, steps)
                if end is None:
                    continue
                target = above.edge_at(k, 0.5 * (end[0] + end[1]))
                if target in to_mid1:
                    parent[find((si, to_mid0[e.id]))] = find((si + 1, to_mid1[target]))
    groups = {}
    for key in parent:
        groups.setdefault(find(key), []).append(key)
    faces = [ComplexFace(i, sorted(v)) for i, v in enumerate(sorted(groups.values()))]

    cells = _right_adjacency_cells(pair, h_max, gb)
    cs = pair.critical_sets()
    path = [float(pair.lam(r)) for r in cs.rStar.values]
    return BifurcationComplex(h_max, events, slices, mols, faces, cells, path,
                              {"kSamplesPerEdge": k_samples, "energySteps": steps})


def _match_in_strip(m_from, m_to):
    """Edge ids of m_from mapped to edge ids of m_to for two molecules in one strip."""
    src = _edge_keys(m_from)
    dst = _edge_keys(m_to)
    return {eid: dst[key] for key, eid in src.items() if key in dst}


def _edge_component(mol, edge_id, k):
    for lo, hi, ids in mol.gaps:
        if lo < k < hi:
            comps = mol.bounds.components(k)
            if len(comps) == len(ids) and edge_id in ids:
                return comps[ids.index(edge_id)]
    return None


def _grid_components(pair: ProfilePair, h, k, n: int = 20001, tol: float = 1e-10):
    """Components of {g- <= k <= g+} on a uniform grid; robust at critical energies."""
    r = np.linspace(0.0, pair.L, n)
    s = np.sqrt(2.0 * h) * pair.f(r)
    lam = pair.lam(r)
    mask = (lam - s - k <= tol) & (lam + s - k >= -tol)
    runs = []
    i = 0
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            runs.append((float(r[i]), float(r[j])))
            i = j + 1
        else:
            i += 1
    return runs


def _grid_component(pair: ProfilePair, h, k, r):
    """Component of the allowed region at (h, k) containing r; degenerate point if none."""
    for c in _grid_components(pair, h, k):
        if c[0] - 1e-6 <= r <= c[1] + 1e-6:
            return c
    return (r, r)


def _right_adjacency_cells(pair: ProfilePair, h_max: float, gb, per_cell: int = 7):
    """For sample points on every edge and vertex, count right-adjacent components.

    The singular fiber over a point p with circle parameter r_p lies in the
    component of the allowed region containing r_p.  Moving to (h(p) + dh, k(p))
    that component must sit inside exactly one component.
    """
    L = pair.L
    cs = pair.critical_sets()
    cells = []

    def count_right(h, k, r):
        dh = max(1e-7, 1e-4 * max(h, 1e-3))
        base = _grid_component(pair, h, k, r)
        try:
            right = gb(h + dh).components(k)
        except NonBottEnergy:
            right = _grid_components(pair, h + dh, k)
        return len([c for c in right if _overlap(c, base)])

    # gamma_1 arcs
    for lo, hi, kind in circle_type_intervals(pair):
        # spread the samples over the part of the arc below h_max
        rr = np.linspace(lo, hi, 4001)[1:-1]
        for ri in cs.rI.values:
            rr = rr[np.abs(rr - ri) >= COLLAR * L]
        hh, kk = pair.hk(rr)
        keep = np.flatnonzero((hh > 0) & (hh < h_max))
        if keep.size > per_cell:
            keep = keep[np.linspace(0, keep.size - 1, per_cell).round().astype(int)]
        pts = [(float(hh[i]), float(kk[i]), float(rr[i])) for i in keep]
        if pts:
            cells.append(ComplexCell("edge", "gamma1 %s r in (%.6g, %.6g)" % (kind, lo, hi), pts,
                                     [count_right(*p) for p in pts]))
    # gamma_2 pieces: one edge per monotone piece of Lambda
    stars = cs.rStar.values
    for lo, hi in zip(stars[:-1], stars[1:]):
        pts = [(0.0, float(pair.lam(r)), float(r)) for r in np.linspace(lo, hi, per_cell + 2)[1:-1]]
        cells.append(ComplexCell("edge", "gamma2 r in (%.6g, %.6g)" % (lo, hi), pts,
                                 [count_right(*p) for p in pts]))
    # vertices
    for p in rank0_points(pair):
        pt = (0.0, p.image[1], p.r)
        cells.append(ComplexCell("vertex", "rank0 %s" % p.pole, [pt], [count_right(*pt)]))
    for r in stars:
        if 0 < r < L:
            pt = (0.0, float(pair.lam(r)), r)
            cells.append(ComplexCell("vertex", "fork r=%.6g" % r, [pt], [count_right(*pt)]))
    for h, k, r in cusp_points(pair):
        if h < h_max:
            cells.append(ComplexCell("vertex", "cusp r=%.6g" % r, [(h, k, r)], [count_right(h, k, r)]))
    for c in self_intersections(pair):
        h, k = c.point
        if h < h_max:
            cells.append(ComplexCell("vertex", "crossing", [(h, k, c.r1)], [count_right(h, k, c.r1)]))
    return cells


def complex_dot(cx: BifurcationComplex) -> str:
    """Faces as nodes; an edge joins faces whose torus families meet a common saddle atom."""
    lines = ["graph complex {"]
    owner = {}
    for f in cx.faces:
        lines.append('  f%d [label="face %d (%d slices)"];' % (f.id, f.id, len({s for s, _ in f.members})))
        for m in f.members:
            owner[m] = f.id
    links = set()
    for si, mol in enumerate(cx.molecules):
        for at in mol.atoms:
            if at.kind != "V":
                continue
            faces = sorted({owner[(si, e.id)] for e in mol.edges if at.id in (e.lower, e.upper)})
            for i in range(len(faces)):
                for j in range(i + 1, len(faces)):
                    links.add((faces[i], faces[j]))
    for a, b in sorted(links):
        lines.append("  f%d -- f%d;" % (a, b))
    lines.append("}")
    return "\n".join(lines) + "\n"
