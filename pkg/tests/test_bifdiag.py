import numpy as np
import pytest

from magflow.bifdiag import (build_complex, complex_dot, curve_crossings, diagram, event_energies,
                             gamma_curves, multiple_points, pole_level_crossings, self_intersections)
from magflow.fixtures import random_admissible_pair

R_CIRC = 2.796476102079021


@pytest.fixture(scope="module")
def cx_e1(pair_e1):
    return build_complex(pair_e1, 1.0)


@pytest.fixture(scope="module")
def cx_e2(pair_e2):
    return build_complex(pair_e2, 0.01)


def _interior(pair, n, rng, collar=1e-4):
    r = rng.uniform(0, pair.L, 4 * n)
    for ri in pair.critical_sets().rI.values:
        r = r[np.abs(r - ri) > collar * pair.L]
    return r[:n]


def test_e1_point_values(pair_e1):
    a, k = pair_e1.dual_jets(np.pi / 4)
    assert a.value == pytest.approx(1.0)
    assert k.value == pytest.approx(-np.sqrt(2))
    h, k = pair_e1.hk(np.pi / 4)
    assert h == pytest.approx(0.5)


def test_arcs_satisfy_hyperbola_and_collar(pair_e1):
    dual, arcs = gamma_curves(pair_e1)
    for arc in dual.arcs:
        np.testing.assert_allclose(arc.k ** 2 - arc.a ** 2, 1.0, atol=1e-8)
        assert np.min(np.abs(arc.r - np.pi / 2)) >= 1e-4 * np.pi * (1 - 1e-9)
    for arc in arcs:
        np.testing.assert_allclose(arc.k ** 2 - 2 * arc.h, 1.0, atol=1e-8)
        assert np.all(arc.h >= 0)


def test_diagram_e1(pair_e1):
    d = diagram(pair_e1)
    assert d.cusps == [] and d.tangencies == []
    (k0, c, r), = d.asymptote_parabolas
    assert (k0, c) == (pytest.approx(0.0, abs=1e-15), pytest.approx(1.0))
    assert r == pytest.approx(np.pi / 2)
    assert set(d.gamma2) == {-1.0, 1.0}


def test_diagram_e2(pair_e2):
    d = diagram(pair_e2)
    assert d.gamma2[0] == pytest.approx(-0.7166666666666667, abs=1e-12)
    assert d.gamma2[1] == pytest.approx(1.3)
    (h, k, r), = d.tangencies
    assert h == 0.0 and k == pytest.approx(-0.7166666666666667, abs=1e-12)
    (h, k, r), = d.cusps
    assert h == pytest.approx(1.0794274571513634e-3, rel=1e-9)
    assert k == pytest.approx(-0.6939878537739167, abs=1e-12)
    assert r == pytest.approx(R_CIRC, abs=1e-10)
    ks = sorted(p.image[1] for p in d.rank0)
    assert ks[0] == pytest.approx(-0.7) and ks[1] == pytest.approx(1.3)
    # rank-0 images sit on gamma_2 (the S pole is interior because Lambda dips below it)
    assert all(d.gamma2[0] <= x <= d.gamma2[1] for x in ks)
    assert d.self_intersections == []
    doc = d.to_dict()
    assert set(doc) >= {"gamma1", "gamma2", "rank0", "cusps", "tangencies", "selfIntersections",
                        "asymptoteParabolas"}


def test_pole_level_crossing_e2(pair_e2):
    (h, k, r), = pole_level_crossings(pair_e2)
    assert h == pytest.approx(5.234884711531336e-4, rel=1e-8)
    assert k == pytest.approx(-0.7)
    assert r == pytest.approx(2.65608, abs=1e-5)


def test_no_self_intersections_on_fixtures(pair_e1, pair_e2):
    assert self_intersections(pair_e1) == []
    assert self_intersections(pair_e2) == []


def _line(p, q):
    def fn(t):
        t = np.asarray(t, dtype=float)
        return (p[0] + t * q[0], p[1] + t * q[1], 0 * t + q[0], 0 * t + q[1])
    return fn


def test_synthetic_crossings():
    c1 = _line((0, 0), (1, 1))
    c2 = _line((0, 1), (1, -1))
    (c,), = [curve_crossings(c1, c2, [(0, 1)], [(0, 1)])]
    assert c.point == (pytest.approx(0.5), pytest.approx(0.5))
    assert c.transversal

    def loop(t):
        t = np.asarray(t, dtype=float)
        return (t * t - 1, t * (t * t - 1), 2 * t, 3 * t * t - 1)
    (c,), = [curve_crossings(loop, loop, [(-2, 2)], [(-2, 2)], same=True, min_sep=1e-6)]
    assert (c.r1, c.r2) == (pytest.approx(-1), pytest.approx(1))
    assert c.transversal


def test_shallow_crossings_are_resolved():
    # y = x^2 - 1e-6 crosses y = 0 twice at a very small angle
    para = lambda t: (np.asarray(t, float), np.asarray(t, float) ** 2 - 1e-6, 1.0 + 0 * np.asarray(t, float), 2 * np.asarray(t, float))
    axis = _line((-1, 0), (1, 0))
    hits = curve_crossings(para, axis, [(-0.5, 0.5)], [(0, 2)], samples=4001)
    assert len(hits) == 2
    assert all(h.transversal for h in hits)


def test_multiple_points_triple_line():
    branches = [(_line((-1, -1), (1, 1)), [(0, 2)]),
                (_line((-1, 1), (1, -1)), [(0, 2)]),
                (_line((-1, 0), (1, 0)), [(0, 2)])]
    (pt, members), = multiple_points(branches)
    assert pt == (pytest.approx(0, abs=1e-9), pytest.approx(0, abs=1e-9))
    assert len(members) == 3
    assert multiple_points(branches[:2]) == []


def test_pointwise_duality_and_slope_law(pair_e1, pair_e2):
    rng = np.random.default_rng(7)
    for pair in (pair_e1, pair_e2):
        r = _interior(pair, 500, rng)
        a, k = pair.dual_jets(r)
        F, G = pair.jets(r)
        np.testing.assert_allclose(k.value + a.value * F.value - G.value, 0.0, atol=1e-10)
        m = np.abs(a.d1) > 1e-6
        np.testing.assert_allclose((k.d1 / a.d1)[m], -F.value[m], atol=1e-8)


def test_asymptote_law():
    rng = np.random.default_rng(3)
    for pair in [random_admissible_pair(rng) for _ in range(3)]:
        for ri in pair.critical_sets().rI.values:
            fi, li = float(pair.f(ri)), float(pair.lam(ri))
            for side in (-1, 1):
                r = ri + side * np.array([1e-2, 1e-3, 1e-4])
                d = (fi * pair.a(r) - li + pair.k(r)) / np.hypot(fi, 1.0)
                assert np.all(np.diff(np.abs(d)) < 0)
                assert abs(d[-1]) < 1e-3
            dl = fi * pair.a(ri - 1e-4) - li + pair.k(ri - 1e-4)
            dr = fi * pair.a(ri + 1e-4) - li + pair.k(ri + 1e-4)
            assert np.sign(dl) != np.sign(dr)


def test_event_energies_e2(pair_e2):
    ev = event_energies(pair_e2, 0.01)
    np.testing.assert_allclose(ev, [0.0, 5.234884711531336e-4, 1.0794274571513634e-3], rtol=1e-9)


def test_complex_e1(cx_e1):
    assert len(cx_e1.faces) == 1
    assert cx_e1.right_adjacency_ok
    labels = [c.label for c in cx_e1.cells]
    assert sum(lab.startswith("gamma1") for lab in labels) == 2
    assert not any(lab.startswith(("cusp", "crossing", "fork")) for lab in labels)
    assert cx_e1.zero_level_path == [-1.0, 1.0]


def test_complex_e2_adjacency(cx_e2):
    assert cx_e2.right_adjacency_ok
    for cell in cx_e2.cells:
        assert cell.right_faces and all(n == 1 for n in cell.right_faces), cell.label
    kinds = {c.label.split()[0] for c in cx_e2.cells}
    assert kinds == {"gamma1", "gamma2", "rank0", "fork", "cusp"}
    np.testing.assert_allclose(cx_e2.zero_level_path, [1.3, -0.7166666666666667, -0.7])
    # two torus sheets: see the notes on the face count in the README
    assert len(cx_e2.faces) == 2


def test_complex_requires_hmax_beyond_cusps(pair_e2):
    with pytest.raises(ValueError):
        build_complex(pair_e2, 1e-3)


def test_complex_dot(cx_e2):
    text = complex_dot(cx_e2)
    assert text.startswith("graph complex {") and text.rstrip().endswith("}")
    assert text.count("label=") >= len(cx_e2.faces)
