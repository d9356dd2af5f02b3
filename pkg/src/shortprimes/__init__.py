"""Desk-scale laboratory for primes in short arithmetic progressions."""

__version__ = "0.1.0"
