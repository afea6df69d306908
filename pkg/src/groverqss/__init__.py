"""Grover-search quantum secret sharing and interception-attack analysis."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    PhaseLabel,
    PureState,
    ReflectionSpec,
    Schedule,
    apply_reflection,
    iteration_schedule,
    optimal_phase,
    success_probability,
)
from .protocol import InitialState, encode, honest_run, padlock_decode  # noqa: E402
from .attack import Strategy, Reduction, aggregate, sweep  # noqa: E402
