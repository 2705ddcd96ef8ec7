import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magflow.errors import AmbiguousMerge, NonBottEnergy
from magflow.fixtures import random_admissible_pair
from magflow.molecule import (ANNULUS, DISK, GBounds, gluing_matrix, grid_oracle_reeb,
                              marks_from_matrix, molecule_dot, motion_domain, reeb_molecule,
                              regularity_gate, skeletons_match)
from magflow.singularity import classify_circle


def test_motion_domain_e1(pair_e1):
    (iv,) = motion_domain(pair_e1, 0.5, 0.0)
    assert (iv.r_lo, iv.r_hi) == (pytest.approx(np.pi / 4), pytest.approx(3 * np.pi / 4))
    assert iv.topology == ANNULUS
    (iv,) = motion_domain(pair_e1, 0.5, -1.0)
    assert iv.r_lo == 0.0 and iv.r_hi == pytest.approx(np.pi / 2)
    assert iv.topology == DISK
    assert motion_domain(pair_e1, 0.5, 2.0) == []


def test_gbounds_requires_positive_energy(pair_e1):
    with pytest.raises(ValueError):
        GBounds(pair_e1, 0.0)


def test_e1_molecule(pair_e1):
    m = reeb_molecule(pair_e1, 0.5)
    assert [a.kind for a in m.atoms] == ["A", "A"]
    assert sorted(a.k for a in m.atoms) == [pytest.approx(-np.sqrt(2)), pytest.approx(np.sqrt(2))]
    (e,) = m.edges
    assert (e.r_mark, e.eps, e.kD, e.kS) == ("1/2", 1, 2, 0)
    assert m.families == []
    assert m.manifold == "RP3"


def test_e2_low_energy_molecule(pair_e2):
    m = reeb_molecule(pair_e2, 5e-4)
    (v,) = [a for a in m.atoms if a.kind == "V"]
    assert v.label == "V_{+}"
    assert v.k == pytest.approx(-0.7003437, abs=1e-6)
    leaves = sorted(a.k for a in m.atoms if a.kind == "A")
    np.testing.assert_allclose(leaves, [-0.7349754, -0.6974081, 1.3002273], atol=1e-6)
    assert len(m.edges) == 3 and m.is_tree()
    by_leaf = {}
    for e in m.edges:
        leaf = m.atoms[e.lower] if m.atoms[e.lower].kind == "A" else m.atoms[e.upper]
        by_leaf[round(leaf.k, 3)] = e
    assert (by_leaf[-0.735].r_mark, by_leaf[-0.735].eps, by_leaf[-0.735].kD) == ("0", -1, 0)
    assert (by_leaf[-0.697].r_mark, by_leaf[-0.697].eps, by_leaf[-0.697].kD) == ("0", 1, 1)
    assert (by_leaf[1.3].r_mark, by_leaf[1.3].eps, by_leaf[1.3].kD) == ("0", 1, 1)
    assert m.families == [{"n": 2, "atoms": [v.id]}]


def test_e2_high_energy_molecule(pair_e2):
    m = reeb_molecule(pair_e2, 0.5)
    assert [a.kind for a in m.atoms] == ["A", "A"]
    assert (m.edges[0].r_mark, m.edges[0].eps) == ("1/2", 1)


def test_regularity_gate(pair_e2):
    assert regularity_gate(pair_e2, 5e-4) == []
    assert regularity_gate(pair_e2, 1.080e-3)
    with pytest.raises(NonBottEnergy):
        reeb_molecule(pair_e2, 1.080e-3)
    with pytest.raises(NonBottEnergy):
        reeb_molecule(pair_e2, 5.2349e-4)


def test_ambiguous_merge(pair_e2):
    # saddle and the nearby leaf differ by about 2.9e-3
    with pytest.raises(AmbiguousMerge):
        reeb_molecule(pair_e2, 5e-4, merge_tol=1e-3)


def test_gluing_matrices_and_marks():
    for t in range(4):
        for lo, hi in (("A", "V"), ("V", "A"), ("V", "V"), ("A", "A")):
            m = np.array(gluing_matrix(lo, hi, t))
            assert round(abs(np.linalg.det(m))) == 1
    assert marks_from_matrix(gluing_matrix("A", "V", 1)) == ("0", -1)
    assert marks_from_matrix(gluing_matrix("V", "A", 1)) == ("0", 1)
    assert marks_from_matrix(gluing_matrix("V", "V", 0)) == ("inf", 1)
    assert marks_from_matrix(gluing_matrix("A", "A", 2)) == ("1/2", 1)


def test_oracle_on_fixtures(pair_e1, pair_e2):
    sk, dk = grid_oracle_reeb(pair_e1, 0.5, 1024)
    assert [kind for kind, _ in sk.atoms] == ["A", "A"] and len(sk.edges) == 1
    sk, dk = grid_oracle_reeb(pair_e2, 5e-4, 2048)
    assert sorted(kind for kind, _ in sk.atoms) == ["A", "A", "A", "V"]
    (kv,) = [k for kind, k in sk.atoms if kind == "V"]
    assert abs(kv + 0.70035) <= dk
    assert skeletons_match(reeb_molecule(pair_e2, 5e-4).skeleton(), sk, dk)


@pytest.fixture(scope="module")
def random_cases():
    rng = np.random.default_rng(123)
    out = []
    while len(out) < 12:
        pair = random_admissible_pair(rng)
        h = float(10 ** rng.uniform(-3, 0))
        try:
            out.append((pair, h, reeb_molecule(pair, h)))
        except NonBottEnergy:
            continue
    return out


def test_tree_and_pole_accounting(random_cases):
    for pair, h, m in random_cases:
        assert m.is_tree()
        assert len(m.atoms) == len(m.edges) + 1
        assert sum(e.kD + 2 * e.kS for e in m.edges) == 2
        for e in m.edges:
            assert marks_from_matrix(e.matrix) == (e.r_mark, e.eps)


def test_leaf_and_saddle_types(random_cases):
    for pair, h, m in random_cases:
        for a in m.atoms:
            for r in a.circle_params:
                want = "Elliptic" if a.kind == "A" else "Hyperbolic"
                assert classify_circle(pair, r).type == want


def test_saddle_sign_relation(random_cases):
    seen = 0
    for pair, h, m in random_cases:
        gb = m.bounds
        for a in m.atoms:
            if a.kind != "V":
                continue
            for r, s in zip(a.circle_params, a.signs):
                U2 = classify_circle(pair, r).Usecond
                g2 = gb.jet(s, r).d2
                assert U2 == pytest.approx(-s * gb.s / float(pair.f(r)) * g2, rel=1e-8)
                seen += 1
    assert seen > 0


def test_dot_output(pair_e1):
    text = molecule_dot(reeb_molecule(pair_e1, 0.5))
    assert text.count('[label="A"]') == 2
    assert 'label="r=1/2, eps=1, kD=2"' in text


@settings(max_examples=15, deadline=None)
@given(st.floats(0.02, 2.0))
def test_e1_molecule_is_a_dumbbell_at_every_energy(h):
    from magflow.fixtures import e1
    m = reeb_molecule(e1(), h)
    assert [a.kind for a in m.atoms] == ["A", "A"]
    assert (m.edges[0].r_mark, m.edges[0].eps) == ("1/2", 1)
