"""Numerical verification of Macdonald's theorem for polynomials.

Inside every closed level curve ``|f(z)| = C`` of an analytic ``f``, f has
exactly one more zero than f'. This package builds the level-set topology of
polynomials in product form, locates the zeros of f', and counts both ways.
"""

__version__ = "0.1.0"

from .core import EvalResult, Instance, RootEntry, derivative_value, evaluate  # noqa: E402
from .critical import CriticalLadder, CriticalPoint, critical_points, merge_brackets  # noqa: E402
from .generator import GenSpec, generate  # noqa: E402
from .verify import VerifyConfig, cluster_experiment, verify_batch, verify_instance  # noqa: E402

__all__ = [
    "CriticalLadder", "CriticalPoint", "EvalResult", "GenSpec", "Instance", "RootEntry",
    "VerifyConfig", "cluster_experiment", "critical_points", "derivative_value", "evaluate",
    "generate", "merge_brackets", "verify_batch", "verify_instance",
]
