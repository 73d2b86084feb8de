"""Numerics for the nonlocal KPP equation with free boundaries.

Modules
-------
kernels        dispersal kernels, tail functionals, linear speeds
reactions      KPP reaction terms
fixed_domain   principal eigenvalue and critical length on fixed intervals
free_boundary  time stepping of the moving-front problem
semiwave       semi-wave profiles and the free-boundary speed
experiments    speed/acceleration fits and the comparison harness
cli            configuration-driven command line interface
"""

__version__ = "0.1.0"

from .errors import NlfrontError  # noqa: E402,F401
from .kernels import KernelSpec, c_star, flux_moment, make_kernel, reflect  # noqa: E402,F401
from .reactions import ReactionSpec, make_reaction  # noqa: E402,F401
