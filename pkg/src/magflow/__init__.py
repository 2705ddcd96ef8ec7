"""Singularities of integrable magnetic geodesic flows on a sphere of revolution.

A profile is a pair (f, Lambda) on [0, L]: f is the radius of the parallels and
Lambda' the density of the rotation-invariant magnetic field.  The modules
cover profile parsing, critical-set classification, bifurcation diagrams,
marked molecules, projective duality and direct simulation of the flow.
"""

from .dsl import parse_profile
from .errors import MagflowError
from .singularity import ProfilePair, Tolerances

__version__ = "0.1.0"

__all__ = ["parse_profile", "ProfilePair", "Tolerances", "MagflowError", "__version__"]
