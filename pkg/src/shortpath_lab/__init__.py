"""Numerical laboratory for a flooded-landscape transverse-field optimization algorithm.

The package builds classical cost functions over {+1,-1}^n, the interpolating
stoquastic operator H_b = -X/n + b*g_eta(H/|E*|), and everything needed to
study it at desk scale: exact diagonalization and Lanczos eigensolvers,
spectral-condition checkers, statistical-mechanics entropy bounds, closed-form
overlap/runtime bounds, an idealized two-jump algorithm simulator, and
reproducible experiment drivers with CSV output.

Submodules: cost, transform, spectral, conditions, statmech, bounds, algo,
experiments, hypercube, cli.
"""

__version__ = "0.1.0"
