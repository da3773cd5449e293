"""Exact samplers and Markov dynamics for Schur processes and two-sided
Schur processes, with brute-force oracles for checking them."""

__version__ = "0.1.0"
