"""Prioritized inverse kinematics workbench.

Solvers for a class of prioritized IK solutions on planar chains, sampled
existence/convergence/stability certificates (feedback gains, step-size
bounds, spectral conditions), a Cholesky-based Jacobian preconditioner with
provable bounds, and the simulation experiments that exercise all of it.
"""

__version__ = "0.1.0"

from .matkit import KERNEL_BACKEND

__all__ = ["KERNEL_BACKEND", "__version__"]
