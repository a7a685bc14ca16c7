"""Synthetic high-angular-momentum spins in a driven oscillator.

Submodules: ``operators`` (spin and Fock algebra), ``mem`` (phase combs and
generators), ``synthesis`` (universality, Givens factorization, nonlinear
generator search), ``dynamics`` (full driven open-system model),
``tomography`` (bosonic and spin Wigner functions), ``logical`` (spin-cat
code and gates), ``config`` and ``cli`` (scenario runner).
"""

from . import dynamics, logical, mem, operators, synthesis, tomography
from .errors import MemspinError

__all__ = ["operators", "mem", "synthesis", "dynamics", "tomography", "logical", "MemspinError"]
__version__ = "0.1.0"
