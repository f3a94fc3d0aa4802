"""Numerical lab for surfaces in R⁴: invariants, mixed connection forms, Bonnet mates."""

__version__ = '0.1.0'
