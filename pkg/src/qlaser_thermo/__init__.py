"""Quantum thermodynamics of a laser-driven qubit damped by a thermal bath.

Exact unitary benchmarks with two-point-measurement counting fields, four
counting-field-dressed master equations (generalized Bloch, Floquet, Bloch
from quantum maps, Bloch from Redfield), thermodynamic flows with law-closure
checks, and automated fluctuation-theorem verification.
"""

__version__ = "0.1.0"
