"""Exact SL_n(Z) norm-ball enumeration and Erdos-Kac statistics of matrix entries."""

__version__ = "0.1.0"
