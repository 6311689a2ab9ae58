"""adiaquant: slowly modulated lattice models from phase-space symbols.

Quantizes matrix-valued symbols on flat CW configuration spaces into
lattice Hamiltonians and evaluates the topological invariants on both
sides: bulk/loop Chern numbers of the symbols and real-space defect
invariants (chiral zero-mode indices, spectral flow, windings) of the
quantized operators, together with the correspondence checks relating
them.
"""

from . import configspace, invariants, linalg, quantize, symbols

__version__ = "0.1.0"

__all__ = ["configspace", "invariants", "linalg", "quantize", "symbols"]
