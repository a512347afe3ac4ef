"""Exact and numerical machinery for lifting lattice presentations in SU(2,1)
to the universal cover and certifying residual finiteness of the lifts."""

__version__ = "0.1.0"
