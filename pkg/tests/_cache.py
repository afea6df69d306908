"""Helpers shared between test modules; the larger sweeps take tens of seconds."""

from functools import lru_cache

import numpy as np

from groverqss.attack import aggregate, label_table, sweep
from groverqss.core import PhaseLabel


@lru_cache(maxsize=None)
def grid(q, strategy="complete", omega=None, message="avg", reduction="full", k1=None, oracle=None):
    return sweep(q, strategy, omega, message=message, reduction=reduction, k1=k1, oracle=oracle)


@lru_cache(maxsize=None)
def summary(*args, **kwargs):
    return aggregate(grid(*args, **kwargs))


def shifted(q, rows, delta):
    """Row indices after adding the per-qubit quarter-turn shift delta."""
    to_q = np.array([PhaseLabel(i).quarter_turns for i in range(4)])
    to_label = np.array([int(PhaseLabel.from_quarter_turns(i)) for i in range(4)])
    labels = label_table(q)[rows]
    new = to_label[(to_q[labels] + delta) % 4]
    return new @ (4 ** np.arange(q - 1, -1, -1))
