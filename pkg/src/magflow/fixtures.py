"""Reference profile pairs and a generator of random admissible pairs."""

from __future__ import annotations

import numpy as np

from .jets import EVEN, ODD, SeriesProfile
from .singularity import ProfilePair, validate_admissible

E1_TEXT = """# uniform field on the round sphere
L = pi
f = sin(r)
lambda = -cos(r)
"""

E2_TEXT = """# nonuniform field: one elliptic fork, one cusp, one hyperbolic family
L = pi
f = sin(r)
lambda = cos(r) + 0.3*cos(2*r)
"""

BAD_TEXT = """# fails the simple-zero condition at r = pi/2
L = pi
f = sin(r)
lambda = cos(2*r)
"""


def e1() -> ProfilePair:
    return ProfilePair.from_series([1.0], [0.0, -1.0], np.pi, name="E1")


def e2() -> ProfilePair:
    return ProfilePair.from_series([1.0], [0.0, 1.0, 0.3], np.pi, name="E2")


def bad_pair() -> ProfilePair:
    return ProfilePair.from_series([1.0], [0.0, 0.0, 1.0], np.pi, name="bad")


def random_series_pair(rng: np.random.Generator, L: float = np.pi) -> ProfilePair:
    """Random trigonometric pair satisfying the boundary slope conditions.

    With w = pi/L the conditions f'(0)=1, f'(L)=-1 read
    sum j*b_j = 1/w over odd j and sum j*b_j = 0 over even j.
    """
    w = np.pi / L
    b = np.zeros(5)
    b[2] = rng.uniform(-0.06, 0.06)           # j = 3
    b[4] = rng.uniform(-0.02, 0.02)           # j = 5
    b[0] = 1.0 / w - 3 * b[2] - 5 * b[4]       # j = 1
    b[1] = rng.uniform(-0.08, 0.08)           # j = 2
    b[3] = -2 * b[1] / 4                      # j = 4
    c = np.zeros(5)
    c[0] = rng.uniform(-0.5, 0.5)
    c[1:] = rng.uniform(-1.0, 1.0, 4) * np.array([1.0, 0.6, 0.35, 0.2])
    return ProfilePair(SeriesProfile(b, ODD, L), SeriesProfile(c, EVEN, L), L, name="random")


def random_admissible_pair(rng: np.random.Generator, L: float = np.pi, attempts: int = 200) -> ProfilePair:
    for _ in range(attempts):
        pair = random_series_pair(rng, L)
        if validate_admissible(pair).ok:
            return pair
    raise RuntimeError("no admissible pair found")
