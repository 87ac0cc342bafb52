"""
Spatial prisoner's dilemma with probabilistic abstention on a toroidal lattice.
"""

__version__ = "1.0.0"
