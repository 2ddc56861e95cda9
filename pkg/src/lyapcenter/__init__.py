"""Certification toolkit for symmetric Liapunov center bifurcations.

Given a symmetry-invariant potential this package locates critical orbits,
checks the center-theorem hypotheses, certifies the bifurcation through an
equivariant degree / Conley-index computation in the Euler ring of S^1, and
then exhibits the guaranteed periodic orbits with a symmetry-pinned shooting
method.
"""

from lyapcenter import (
    conley,
    critical_orbits,
    euler_ring,
    pipeline,
    potentials,
    shooting,
    symmetry,
)
from lyapcenter.potentials import (
    BlockRadialPolynomial,
    Expression,
    Jet2,
    RadialPolynomial,
    eval_jet2,
    parse_potential,
    print_potential,
)

__version__ = "0.1.0"

__all__ = [
    "potentials",
    "symmetry",
    "critical_orbits",
    "euler_ring",
    "conley",
    "shooting",
    "pipeline",
    "parse_potential",
    "print_potential",
    "eval_jet2",
    "Jet2",
    "RadialPolynomial",
    "BlockRadialPolynomial",
    "Expression",
    "__version__",
]
