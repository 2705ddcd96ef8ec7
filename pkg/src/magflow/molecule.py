"""Fomenko molecules of K on an energy level and their Fomenko-Zieschang marks.

At energy h > 0 the admissible region in the (k, r) strip is

    Pi_h = {(k, r) : g_-(r) <= k <= g_+(r)},   g_+-(r) = Lambda(r) +- sqrt(2h) f(r),

and the molecule is the Reeb graph of k on Pi_h.  Local extrema of g_+ and g_-
inside (0, L) are the only events:

    g_+ local max -> atom A (K maximum)     g_+ local min -> cross, sign +1
    g_- local max -> cross, sign -1         g_- local min -> atom A (K minimum)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import AmbiguousMerge, NonBottEnergy
from .jets import Jet3, find_zeros
from .singularity import ProfilePair

DISK = "Disk"
ANNULUS = "Annulus"
SPHERE = "Sphere"

MANIFOLD = "RP3"
GATE_ABS = 1e-9
GATE_REL = 1e-3
POLE_CONTACT = 1e-6


# ---------------------------------------------------------------------------
# bounds and motion domains


class GBounds:
    """The two boundary functions g_- <= g_+ of Pi_h."""

    def __init__(self, pair: ProfilePair, h: float):
        if not h > 0:
            raise ValueError("energy must be positive")
        self.pair = pair
        self.h = float(h)
        self.s = float(np.sqrt(2.0 * h))

    def jet(self, sign: int, r) -> Jet3:
        F, G = self.pair.jets(r)
        return G + F * (sign * self.s)

    def plus(self, r):
        return self.jet(+1, r).value

    def minus(self, r):
        return self.jet(-1, r).value

    @property
    def critical_points(self):
        """Interior critical points of g_+ and g_- as (sign, r, value, is_max)."""
        if not hasattr(self, "_crit"):
            self._crit = self._find_critical()
        return self._crit

    def _find_critical(self):
        pair = self.pair
        L = pair.L
        t = pair.tol
        out = []
        for sign in (+1, -1):
            roots = find_zeros(lambda r, s=sign: self.jet(s, r).shift(), 0.0, L, t.zero, t.grid, t.simple)
            for x in roots:
                if x.r <= 1e-9 * L or x.r >= L * (1 - 1e-9):
                    continue
                if not x.simple:
                    raise NonBottEnergy(self.h, self.h, "degenerate critical point of g%s at r=%.8g"
                                        % ("+" if sign > 0 else "-", x.r))
                j = self.jet(sign, x.r)
                out.append((sign, x.r, float(j.value), bool(j.d2 < 0)))
        return out

    def level_roots(self, sign: int, k: float):
        """All r with g_sign(r) = k, one per monotone piece."""
        L = self.pair.L
        pts = [0.0] + sorted(r for s, r, _, _ in self.critical_points if s == sign) + [L]
        g = self.plus if sign > 0 else self.minus
        vals = [float(g(p)) - k for p in pts]
        out = []
        for (a, b), (va, vb) in zip(zip(pts[:-1], pts[1:]), zip(vals[:-1], vals[1:])):
            if va == 0.0:
                out.append(a)
            if va * vb < 0:
                out.append(brentq(lambda x: float(g(x)) - k, a, b, xtol=1e-15 * L, rtol=1e-15))
        if vals[-1] == 0.0:
            out.append(L)
        return out

    def components(self, k: float):
        """Maximal closed r-intervals of {g_- <= k <= g_+}, sorted by r."""
        L = self.pair.L
        cuts = sorted(set([0.0, L] + self.level_roots(+1, k) + self.level_roots(-1, k)))
        mids = np.array([0.5 * (a + b) for a, b in zip(cuts[:-1], cuts[1:])])
        if len(mids) == 0:
            return []
        inside = (self.minus(mids) <= k) & (k <= self.plus(mids))
        out = []
        for (a, b), ok in zip(zip(cuts[:-1], cuts[1:]), inside):
            if not ok:
                continue
            if out and abs(out[-1][1] - a) <= 0.0:
                out[-1] = (out[-1][0], b)
            else:
                out.append((a, b))
        # isolated points where both bounds touch k (the poles at k = Lambda(0), Lambda(L))
        for p in (0.0, L):
            if float(self.minus(p)) <= k <= float(self.plus(p)) and not any(a <= p <= b for a, b in out):
                out.append((p, p))
        out.sort()
        return out


@dataclass
class DomainInterval:
    r_lo: float
    r_hi: float
    topology: str

    def to_dict(self):
        return {"rLo": self.r_lo, "rHi": self.r_hi, "topology": self.topology}


def _topology(lo, hi, L):
    tol = POLE_CONTACT * L
    north = lo <= tol
    south = hi >= L - tol
    if north and south:
        return SPHERE
    if north or south:
        return DISK
    return ANNULUS


def motion_domain(pair: ProfilePair, h: float, k: float):
    """Connected components of the allowed r-region at (h, k) with their topology."""
    gb = GBounds(pair, h)
    return [DomainInterval(a, b, _topology(a, b, pair.L)) for a, b in gb.components(k)]


# ---------------------------------------------------------------------------
# regularity


def critical_abscissas(pair: ProfilePair):
    """Energies where K restricted to the level is not Bott, with a reason each."""
    from .bifdiag import cusp_points, pole_level_crossings
    out = [(h, "cusp abscissa") for h, _, _ in cusp_points(pair)]
    out += [(h, "crossing of k=%.10g" % k) for h, k, _ in pole_level_crossings(pair)]
    return sorted(out)


def regularity_gate(pair: ProfilePair, h: float, rel_tol: float = GATE_REL, abs_tol: float = GATE_ABS):
    """List of reasons why h is not a regular energy (empty when it is)."""
    if not h > 0:
        return [(0.0, "energy must be positive")]
    bad = []
    for he, why in critical_abscissas(pair):
        if abs(h - he) <= max(abs_tol, rel_tol * he):
            bad.append((he, why))
    return bad


def ensure_regular(pair: ProfilePair, h: float):
    bad = regularity_gate(pair, h)
    if bad:
        he, why = bad[0]
        raise NonBottEnergy(h, he, why)


# ---------------------------------------------------------------------------
# molecule data


@dataclass
class Atom:
    id: int
    kind: str                 # "A" or "V"
    k: float
    circle_params: list
    signs: list               # one sign per circle, ascending r
    source_rows: list         # 1..4, see the module docstring order
    extremum: Optional[str] = None   # "min" / "max" for A atoms

    @property
    def label(self) -> str:
        if self.kind == "A":
            return "A"
        return "V_{%s}" % "".join("+" if s > 0 else "-" for s in self.signs)

    def to_dict(self):
        return {"id": self.id, "kind": self.kind, "label": self.label, "k": self.k,
                "circleParams": list(self.circle_params), "signs": list(self.signs),
                "sourceRows": list(self.source_rows), "extremum": self.extremum}


def marks_from_matrix(m):
    """Marks (r, eps) from the first row (a, b) of a gluing matrix."""
    a, b = m[0]
    if b == 0:
        return "inf", int(np.sign(a))
    fr = Fraction(int(a), int(b)) % 1
    return str(fr), int(np.sign(b))


def gluing_matrix(lower_kind: str, upper_kind: str, t: int):
    if lower_kind == "A" and upper_kind == "V":
        return ((0, -1), (-1, t))
    if lower_kind == "V" and upper_kind == "A":
        return ((t, 1), (1, 0))
    if lower_kind == "V" and upper_kind == "V":
        return ((1, 0), (-t, -1))
    return ((1, 2), (0, -1))


@dataclass
class MolEdge:
    id: int
    lower: int
    upper: int
    k_lo: float
    k_hi: float
    kD: int = 0
    kS: int = 0
    matrix: tuple = ()
    r_mark: str = ""
    eps: int = 0

    def to_dict(self):
        return {"id": self.id, "lower": self.lower, "upper": self.upper,
                "kInterval": [self.k_lo, self.k_hi], "kDCount": self.kD, "kSCount": self.kS,
                "gluingMatrix": [list(row) for row in self.matrix], "r": self.r_mark, "eps": self.eps}


@dataclass
class MarkedMolecule:
    h: float
    atoms: list
    edges: list
    families: list = field(default_factory=list)
    manifold: str = MANIFOLD
    gaps: list = field(default_factory=list)   # (k_lo, k_hi, [edge ids in r-order])
    bounds: Optional[GBounds] = None

    def atom(self, i) -> Atom:
        return self.atoms[i]

    def is_tree(self) -> bool:
        n = len(self.atoms)
        if len(self.edges) != n - 1:
            return False
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x
        for e in self.edges:
            a, b = find(e.lower), find(e.upper)
            if a == b:
                return False
            parent[a] = b
        return True

    def skeleton(self):
        """Atoms as (kind, k) sorted by k and edges as index pairs in that order."""
        order = sorted(range(len(self.atoms)), key=lambda i: self.atoms[i].k)
        pos = {a: i for i, a in enumerate(order)}
        atoms = [("A" if self.atoms[i].kind == "A" else "V", self.atoms[i].k) for i in order]
        edges = sorted(tuple(sorted((pos[e.lower], pos[e.upper]))) for e in self.edges)
        return Skeleton(atoms, edges)

    def edge_at(self, k: float, r: float) -> Optional[int]:
        """Edge whose torus family at level k has a component containing (or nearest) r."""
        for lo, hi, ids in self.gaps:
            if lo < k < hi:
                comps = self.bounds.components(k)
                if len(comps) != len(ids):
                    return None
                best = min(range(len(comps)), key=lambda i: _dist(comps[i], r))
                return ids[best]
        return None

    def to_dict(self):
        return {"h": self.h, "manifold": self.manifold,
                "atoms": [a.to_dict() for a in self.atoms],
                "edges": [e.to_dict() for e in self.edges],
                "families": [dict(f) for f in self.families]}


def _dist(iv, r):
    a, b = iv
    if a <= r <= b:
        return 0.0
    return min(abs(a - r), abs(b - r))


@dataclass
class Skeleton:
    atoms: list   # (kind, k) sorted by k
    edges: list   # sorted index pairs

    def degree(self, i) -> int:
        return sum(1 for e in self.edges if i in e)


def skeletons_match(s1: Skeleton, s2: Skeleton, k_tol: float) -> bool:
    """Same atoms (kind, k within k_tol), same edges under the k-order matching."""
    if len(s1.atoms) != len(s2.atoms) or len(s1.edges) != len(s2.edges):
        return False
    for (k1, v1), (k2, v2) in zip(s1.atoms, s2.atoms):
        if k1 != k2 or abs(v1 - v2) > k_tol:
            return False
    return s1.edges == s2.edges


# ---------------------------------------------------------------------------
# event sweep


def _row(sign, is_max):
    if sign > 0:
        return 1 if is_max else 2
    return 3 if is_max else 4


def reeb_molecule(pair: ProfilePair, h: float, merge_tol: Optional[float] = None) -> MarkedMolecule:
    """Marked molecule of K on the energy level h by the g+- event sweep."""
    ensure_regular(pair, h)
    gb = GBounds(pair, h)
    L = pair.L
    events = sorted(gb.critical_points, key=lambda e: e[2])
    if not events:
        raise NonBottEnergy(h, h, "no critical points of g+-")
    k_range = max(e[2] for e in events) - min(e[2] for e in events)
    tol = merge_tol if merge_tol is not None else 1e-9 * max(k_range, 1.0)

    # group equal critical values
    levels = []
    for e in events:
        if levels and abs(e[2] - levels[-1][0][2]) <= tol:
            levels[-1].append(e)
            continue
        if levels and abs(e[2] - levels[-1][0][2]) <= 10 * tol:
            raise AmbiguousMerge("critical values %.12g and %.12g are nearly equal; perturb h"
                                 % (levels[-1][0][2], e[2]))
        levels.append([e])
    kvals = [float(np.mean([e[2] for e in lev])) for lev in levels]

    spread = min(2 * gb.s * float(pair.f(r)) for _, r, _, _ in events)
    gaps = [b - a for a, b in zip(kvals[:-1], kvals[1:])]
    eta = 0.1 * min([spread] + gaps) if gaps else 0.1 * spread

    atoms = []
    chains = []          # per chain: [lower atom, upper atom]
    prev_chain_ids = []  # chain ids of components above the previous level, r-order
    gap_records = []

    for li, (kv, lev) in enumerate(zip(kvals, levels)):
        below = gb.components(kv - eta) if li > 0 else []
        above = gb.components(kv + eta) if li < len(levels) - 1 else []
        if li > 0 and len(below) != len(prev_chain_ids):
            raise AmbiguousMerge("component count changed inside a gap near k=%.10g" % kv)
        touched_b = {}
        touched_a = {}
        for ei, (sign, r, _, is_max) in enumerate(lev):
            tb, ta = _touched(sign, is_max, r, below, above)
            touched_b[ei] = tb
            touched_a[ei] = ta
        # group event points sharing components into one atom
        groups = _group_events(lev, touched_b, touched_a)
        comp_atom_b = {}
        comp_atom_a = {}
        for g in groups:
            pts = sorted((lev[i] for i in g), key=lambda e: e[1])
            kinds = {"A" if (e[0] > 0) == e[3] else "V" for e in pts}
            if len(kinds) != 1 or (kinds == {"A"} and len(pts) != 1):
                raise AmbiguousMerge("mixed critical points at the same level k=%.10g" % kv)
            kind = kinds.pop()
            sign, r, val, is_max = pts[0]
            atom = Atom(len(atoms), kind, kv, [e[1] for e in pts], [e[0] for e in pts],
                        [_row(e[0], e[3]) for e in pts],
                        ("max" if is_max else "min") if kind == "A" else None)
            atoms.append(atom)
            for i in g:
                for c in touched_b[i]:
                    comp_atom_b[c] = atom.id
                for c in touched_a[i]:
                    comp_atom_a[c] = atom.id
        # close chains that end at this level
        for c, a_id in comp_atom_b.items():
            chains[prev_chain_ids[c]][1] = a_id
        free_b = [c for c in range(len(below)) if c not in comp_atom_b]
        free_a = [c for c in range(len(above)) if c not in comp_atom_a]
        if len(free_b) != len(free_a):
            raise AmbiguousMerge("inconsistent component bookkeeping at k=%.10g" % kv)
        new_ids = [None] * len(above)
        for cb, ca in zip(free_b, free_a):
            new_ids[ca] = prev_chain_ids[cb]
        for c in range(len(above)):
            if new_ids[c] is None:
                chains.append([comp_atom_a[c], None])
                new_ids[c] = len(chains) - 1
        if li < len(levels) - 1:
            gap_records.append((kv, kvals[li + 1], list(new_ids)))
        prev_chain_ids = new_ids

    if any(c[1] is None for c in chains):
        raise AmbiguousMerge("unterminated torus family")

    edges = []
    for cid, (lo, hi) in enumerate(chains):
        edges.append(MolEdge(cid, lo, hi, atoms[lo].k, atoms[hi].k))

    # pole crossings
    poles = [(0.0, float(pair.lam(0.0))), (L, float(pair.lam(L)))]
    hits = {}
    for pr, c in poles:
        for lo, hi, ids in gap_records:
            if lo < c < hi:
                comps = gb.components(c)
                if len(comps) != len(ids):
                    raise AmbiguousMerge("component count mismatch at pole level %.10g" % c)
                for i, (a, b) in enumerate(comps):
                    if a <= POLE_CONTACT * L and pr == 0.0 or b >= L * (1 - POLE_CONTACT) and pr == L:
                        hits.setdefault((ids[i], c), []).append(pr)
    for (eid, _), prs in hits.items():
        if len(prs) == 2:
            edges[eid].kS += 1
        else:
            edges[eid].kD += 1

    for e in edges:
        t = e.kD + 2 * e.kS
        e.matrix = gluing_matrix(atoms[e.lower].kind, atoms[e.upper].kind, t)
        e.r_mark, e.eps = marks_from_matrix(e.matrix)

    saddles = [a.id for a in atoms if a.kind == "V"]
    families = [{"n": 2, "atoms": saddles}] if saddles else []
    return MarkedMolecule(float(h), atoms, edges, families, MANIFOLD, gap_records, gb)


def _containing(comps, r):
    for i, (a, b) in enumerate(comps):
        if a <= r <= b:
            return i
    return None


def _left_of(comps, r):
    idx = [i for i, (a, b) in enumerate(comps) if b < r]
    return idx[-1] if idx else None


def _right_of(comps, r):
    idx = [i for i, (a, b) in enumerate(comps) if a > r]
    return idx[0] if idx else None


def _touched(sign, is_max, r, below, above):
    if sign > 0 and is_max:          # death of a component
        return _req([_containing(below, r)]), []
    if sign < 0 and not is_max:      # birth
        return [], _req([_containing(above, r)])
    if sign > 0:                     # g_+ min: one component splits in two
        return _req([_containing(below, r)]), _req([_left_of(above, r), _right_of(above, r)])
    return _req([_left_of(below, r), _right_of(below, r)]), _req([_containing(above, r)])


def _req(items):
    if any(i is None for i in items):
        raise AmbiguousMerge("could not resolve the components at a critical level")
    return items


def _group_events(lev, tb, ta):
    n = len(lev)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x
    for i in range(n):
        for j in range(i + 1, n):
            if set(tb[i]) & set(tb[j]) or set(ta[i]) & set(ta[j]):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


# ---------------------------------------------------------------------------
# brute-force oracle


def grid_oracle_reeb(pair: ProfilePair, h: float, resolution: int = 2048):
    """Reeb graph of k on a rasterized Pi_h; returns (Skeleton, k pixel size)."""
    L = pair.L
    s = np.sqrt(2.0 * h)
    rs = np.linspace(0.0, L, resolution)
    F, G = pair.jets(rs)
    gp = G.value + s * F.value
    gm = G.value - s * F.value
    kmin, kmax = float(gm.min()), float(gp.max())
    pad = 1e-3 * (kmax - kmin)
    ks = np.linspace(kmin - pad, kmax + pad, resolution)
    dk = ks[1] - ks[0]
    mask = (gm[None, :] <= ks[:, None]) & (ks[:, None] <= gp[None, :])
    padded = np.zeros((resolution, resolution + 2), dtype=np.int8)
    padded[:, 1:-1] = mask
    d = np.diff(padded, axis=1)
    srow, scol = np.nonzero(d == 1)
    erow, ecol = np.nonzero(d == -1)
    runs = [[] for _ in range(resolution)]
    for rw, a, b in zip(srow, scol, ecol - 1):
        runs[rw].append((a, b))

    nodes = []       # (kind, k)
    arcs_open = {}   # run index in current row -> (start node)
    edges = []

    def new_node(kind, k):
        nodes.append((kind, k))
        return len(nodes) - 1

    prev = []
    for i in range(resolution):
        cur = runs[i]
        links = [(p, c) for p, (a, b) in enumerate(prev) for c, (x, y) in enumerate(cur)
                 if a <= y and x <= b]
        # connected groups of the bipartite overlap graph
        parent = {("p", p): ("p", p) for p in range(len(prev))}
        parent.update({("c", c): ("c", c) for c in range(len(cur))})

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        for p, c in links:
            parent[find(("p", p))] = find(("c", c))
        groups = {}
        for key in parent:
            groups.setdefault(find(key), []).append(key)
        new_open = {}
        for members in groups.values():
            ps = [m[1] for m in members if m[0] == "p"]
            cs = [m[1] for m in members if m[0] == "c"]
            if len(ps) == 1 and len(cs) == 1:
                new_open[cs[0]] = arcs_open[ps[0]]
                continue
            if not ps:
                node = new_node("A", float(ks[i]))
            elif not cs:
                node = new_node("A", float(ks[i - 1]))
            else:
                node = new_node("V", float(0.5 * (ks[i - 1] + ks[i])))
            for p in ps:
                edges.append((arcs_open[p], node))
            for c in cs:
                new_open[c] = node
        arcs_open = new_open
        prev = cur
    for p in range(len(prev)):
        node = new_node("A", float(ks[-1]))
        edges.append((arcs_open[p], node))

    order = sorted(range(len(nodes)), key=lambda j: nodes[j][1])
    pos = {a: j for j, a in enumerate(order)}
    atoms = [nodes[j] for j in order]
    sk_edges = sorted(tuple(sorted((pos[a], pos[b]))) for a, b in edges)
    return Skeleton(atoms, sk_edges), float(dk)


# ---------------------------------------------------------------------------
# serialization


def molecule_dot(mol: MarkedMolecule) -> str:
    lines = ["graph molecule {"]
    for a in mol.atoms:
        lines.append('  n%d [label="%s"];' % (a.id, a.label))
    for e in mol.edges:
        lines.append('  n%d -- n%d [label="r=%s, eps=%d, kD=%d"];' % (e.lower, e.upper, e.r_mark, e.eps, e.kD))
    lines.append("}")
    return "\n".join(lines) + "\n"
