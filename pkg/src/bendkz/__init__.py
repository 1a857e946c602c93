"""Numerical and exact verification toolkit for bending flows of polygon
linkages, the Jordan-Pochhammer KZ connection and the Gassner representation."""

__version__ = "0.1.0"
