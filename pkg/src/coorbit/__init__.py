"""Coorbit theory for projective representations of SU(1,1), at desk scale."""

__version__ = "0.1.0"
