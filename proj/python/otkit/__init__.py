"""Entropic optimal transport and Wasserstein barycenter solvers."""

from ._otkit import (
    ConvergenceError,
    DimensionError,
    DomainError,
    InputError,
    NumericalError,
    OtkitError,
    ParameterError,
    ProtocolError,
    approx_ot,
    barycenter,
    decentralized,
    exact_barycenter,
    exact_ot,
    fenchel_dual_gradient,
    fenchel_dual_ot,
    logsumexp,
    regularized_ot_value,
    round_to_polytope,
    sinkhorn,
)

__all__ = [name for name in dir() if not name.startswith("_")]
