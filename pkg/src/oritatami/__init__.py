"""Exact cotranscriptional-folding simulation and shape compilers on the
triangular lattice.

Subpackages cover: lattice geometry, the core system model, the folding
dynamics, shape scaling, Hamiltonian-cycle construction at scale 2, the
hard-coded and delay-1 compilers, delay-separation witnesses, structural
analysis checkers, and a CLI plus HTTP session service.
"""

__version__ = "0.1.0"
