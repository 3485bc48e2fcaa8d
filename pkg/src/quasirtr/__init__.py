"""Outgoing solutions of the 1D Helmholtz equation in locally perturbed quasiperiodic media.

Transparent Robin-to-Robin boundary conditions are built from a periodic lift of
each half-line, with absorption or in the limiting absorption regime.
"""

__version__ = "0.1.0"
