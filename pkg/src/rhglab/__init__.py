"""Desk-scale lab for Floyd metrics, coned-off Cayley graphs and
quasiconvexity testing on a closed family of groups."""

__version__ = "0.1.0"
