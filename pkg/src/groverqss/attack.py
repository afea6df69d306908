"""Interception attacks and exhaustive sweeps over (true, guessed) state pairs.

Scalar attack functions work on :class:`PureState` objects and reuse the
protocol code. Sweeps use batched numpy kernels over whole blocks of
initial states; the two paths are cross-checked in the tests.

Every attack here is covariant under a common per-qubit phase shift of the
true and the guessed state (the shift is a diagonal unitary, which commutes
with the computational-basis oracle). The success probability therefore
depends only on the per-qubit phase differences, and the ``diff``
reduction evaluates one representative per difference class.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Union

import numpy as np

from .core import (
    DimensionError,
    PhaseLabel,
    PureState,
    ReflectionSpec,
    Schedule,
    apply_reflection,
    iteration_schedule,
    outcome_probability,
)
from .protocol import InitialState, padlock_decode

log = logging.getLogger(__name__)

AVERAGE = "avg"
MessageMode = Union[int, str]

# Largest Q for which a full grid is evaluated or materialized by default.
FULL_GRID_MAX_Q = 6
BLOCK_ELEMENTS = 1 << 20


class Strategy(str, enum.Enum):
    COMPLETE = "complete"
    HALF = "half"
    VARIANT2 = "variant2"
    WRONG_ORACLE = "wrong-oracle"


class Reduction(str, enum.Enum):
    FULL = "full"
    DIFF_CLASS = "diff"


class ResourceGuardError(RuntimeError):
    """Requested computation is too large without an explicit override."""


@dataclass(frozen=True)
class ErrorProfile:
    n_half: int
    n_pi: int


def error_profile(true_s: InitialState, guessed_s: InitialState) -> ErrorProfile:
    if true_s.q != guessed_s.q:
        raise DimensionError("initial states have different qubit counts")
    n_half = n_pi = 0
    for a, b in zip(true_s.labels, guessed_s.labels):
        diff = (b.quarter_turns - a.quarter_turns) % 4
        if diff in (1, 3):
            n_half += 1
        elif diff == 2:
            n_pi += 1
    return ErrorProfile(n_half, n_pi)


def guess_baseline(q: int) -> float:
    if q < 2:
        raise ValueError(f"need at least 2 participants, got {q}")
    return 2.0**-q


# -- scalar attacks ---------------------------------------------------------


def complete_protocol_attack(
    x: PureState, guessed: InitialState, chunk: int, omega: float, sched: Schedule
) -> float:
    """Eve feeds the intercepted register and her guess into the padlock."""
    return outcome_probability(padlock_decode(x, guessed, chunk, omega, sched), chunk)


def half_protocol_attack(x: PureState, guessed: InitialState, chunk: int, omega: float) -> float:
    """Eve only closes the current iteration with her own U'_S and measures."""
    if x.dim != 2**guessed.q:
        raise DimensionError(f"register dim {x.dim} vs {guessed.q} guessed qubits")
    z = apply_reflection(x, ReflectionSpec(guessed.as_state(), omega))
    return outcome_probability(z, chunk)


def variant2_attack(y: PureState, guessed: InitialState, omega: float, chunk: int) -> float:
    if guessed.q != 3:
        raise ValueError("the second variant is defined for 3 participants")
    if y.dim != 8:
        raise DimensionError(f"expected an 8-dim register, got {y.dim}")
    z = apply_reflection(y, ReflectionSpec(guessed.as_state(), omega))
    return outcome_probability(z, chunk)


def wrong_oracle_attack(
    x: PureState,
    guessed: InitialState,
    guessed_chunk: int,
    true_chunk: int,
    omega: float,
    sched: Schedule,
) -> float:
    """No padlock: Eve also guesses the oracle and runs the decode herself."""
    return outcome_probability(padlock_decode(x, guessed, guessed_chunk, omega, sched), true_chunk)


# -- batched kernels --------------------------------------------------------


@lru_cache(maxsize=None)
def label_table(q: int) -> np.ndarray:
    """(4**q, q) labels; row r is the initial state with grid index r + 1."""
    return np.array(list(itertools.product(range(4), repeat=q)), dtype=np.int8).reshape(4**q, q)


@lru_cache(maxsize=None)
def _quarter_table(q: int) -> np.ndarray:
    to_quarter = np.array([PhaseLabel(i).quarter_turns for i in range(4)], dtype=np.int8)
    return to_quarter[label_table(q)]


@lru_cache(maxsize=None)
def product_state_table(q: int) -> np.ndarray:
    """All 4**q initial states as rows of a (4**q, 2**q) complex array."""
    bits = np.array(list(itertools.product((0, 1), repeat=q)), dtype=np.int64).reshape(2**q, q)
    quarters = (_quarter_table(q).astype(np.int64) @ bits.T) % 4
    table = np.array([1, 1j, -1, -1j])[quarters] / math.sqrt(2**q)
    table.setflags(write=False)
    return table


def class_index(q: int, true_rows: np.ndarray, guessed_rows: np.ndarray) -> np.ndarray:
    """0-based difference-class id for (true, guessed) row pairs.

    The class of a pair is the row of the guessed state that has the same
    per-qubit phase differences against the all-|+> state.
    """
    qt = _quarter_table(q).astype(np.int64)
    dq = (qt[guessed_rows] - qt[true_rows]) % 4
    to_label = np.array([int(PhaseLabel.from_quarter_turns(i)) for i in range(4)])
    lab = to_label[dq]
    weights = 4 ** np.arange(q - 1, -1, -1)
    return lab @ weights


def _reflect(psi, axes, factor):
    overlap = np.einsum("...d,...d->...", axes.conj(), psi)
    return psi - factor * overlap[..., None] * axes


def _reflect_basis(psi, m, phase):
    psi = psi.copy()
    if np.ndim(m) == 0:
        psi[..., int(m)] *= phase
    else:
        idx = np.broadcast_to(np.asarray(m), psi.shape[:-1])[..., None]
        vals = np.take_along_axis(psi, idx, axis=-1) * phase
        np.put_along_axis(psi, idx, vals, axis=-1)
    return psi


def _take(psi, m):
    if np.ndim(m) == 0:
        return psi[..., int(m)]
    idx = np.broadcast_to(np.asarray(m), psi.shape[:-1])[..., None]
    return np.take_along_axis(psi, idx, axis=-1)[..., 0]


def _encode_batch(true_states, m, omega, k1):
    phase = np.exp(1j * omega)
    factor = 1 - phase
    if k1 == 0:
        # U_M G^{-1} |S> = U_S^{-1} |S> = e^{-i omega} |S>
        return _reflect(true_states, true_states, 1 - np.conj(phase))
    psi = np.array(true_states, dtype=complex)
    for _ in range(k1 - 1):
        psi = _reflect(_reflect_basis(psi, m, phase), true_states, factor)
    return _reflect_basis(psi, m, phase)


def attack_kernel(strategy, true_states, guessed_states, m, omega, sched, oracle=None):
    """Success probabilities for broadcast-compatible batches of states.

    ``true_states`` and ``guessed_states`` are (..., d) arrays that broadcast
    against each other; ``m`` is the true chunk (scalar or batch-shaped int
    array); ``oracle`` is Eve's guessed chunk for the wrong-oracle attack.
    """
    phase = np.exp(1j * omega)
    factor = 1 - phase
    strategy = Strategy(strategy)
    if strategy is Strategy.VARIANT2:
        y = _reflect_basis(true_states, m, phase)
        y = _reflect(y, true_states, factor)
        y = _reflect_basis(y, m, phase)
        z = _reflect(y, guessed_states, factor)
        return np.abs(_take(z, m)) ** 2
    x = _encode_batch(true_states, m, omega, sched.k1)
    z = _reflect(x, guessed_states, factor)
    if strategy is Strategy.HALF:
        return np.abs(_take(z, m)) ** 2
    marked = m if strategy is Strategy.COMPLETE else oracle
    for _ in range(sched.k2):
        z = _reflect(_reflect_basis(z, marked, phase), guessed_states, factor)
    return np.abs(_take(z, m)) ** 2


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    q: int
    strategy: Strategy
    omega: float
    message: MessageMode
    reduction: Reduction
    k1: int
    oracle: MessageMode | None = None

    @cached_property
    def schedule(self) -> Schedule:
        return iteration_schedule(self.q, self.k1)

    def chunks(self) -> list[int]:
        return list(range(2**self.q)) if self.message == AVERAGE else [int(self.message)]

    def oracles(self) -> list[int | None]:
        if self.strategy is not Strategy.WRONG_ORACLE:
            return [None]
        return list(range(2**self.q)) if self.oracle in (None, AVERAGE) else [int(self.oracle)]


def _block_rows(q: int) -> int:
    n = 4**q
    return max(1, min(n, BLOCK_ELEMENTS // (n * 2**q)))


def _evaluate_rows(cfg: SweepConfig, start: int, stop: int) -> np.ndarray:
    """Grid rows [start, stop) averaged over the configured chunks/oracles."""
    states = product_state_table(cfg.q)
    true_rows = states[start:stop][:, None, :]
    guessed = states[None, :, :]
    acc = np.zeros((stop - start, states.shape[0]))
    pairs = [(m, o) for m in cfg.chunks() for o in cfg.oracles()]
    for m, o in pairs:
        acc += attack_kernel(cfg.strategy, true_rows, guessed, m, cfg.omega, cfg.schedule, o)
    return acc / len(pairs)


def _evaluate_block(args):
    cfg, start, stop = args
    return start, _evaluate_rows(cfg, start, stop)


def _class_task(args):
    cfg, ci, m = args
    states = product_state_table(cfg.q)
    col = np.zeros(states.shape[0])
    oracles = cfg.oracles()
    for o in oracles:
        col += attack_kernel(cfg.strategy, states[:1], states, m, cfg.omega, cfg.schedule, o)
    return ci, col / len(oracles)


def _run_tasks(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


@dataclass
class SweepGrid:
    """Success probabilities indexed by (true S, guessed S') grid rows.

    Row/column r corresponds to the initial state with grid number r + 1.
    A ``diff`` sweep stores one value per difference class and expands on
    demand.
    """

    config: SweepConfig
    class_values: np.ndarray | None = None
    chunk_values: np.ndarray | None = None
    spot_checks: int = 0
    spot_check_max_dev: float = 0.0
    _values: np.ndarray | None = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return self.config.q

    @property
    def strategy(self) -> Strategy:
        return self.config.strategy

    @property
    def omega(self) -> float:
        return self.config.omega

    @property
    def reduction(self) -> Reduction:
        return self.config.reduction

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            if self.q > FULL_GRID_MAX_Q:
                raise ResourceGuardError(f"refusing to expand a {4**self.q}^2 grid")
            n = 4**self.q
            rows = np.repeat(np.arange(n), n)
            cols = np.tile(np.arange(n), n)
            idx = class_index(self.q, rows, cols).reshape(n, n)
            self._values = self.class_values[idx]
        return self._values

    def class_of(self, true_row: int, guessed_row: int) -> int:
        return int(class_index(self.q, np.array([true_row]), np.array([guessed_row]))[0])

    def value(self, true_s: InitialState, guessed_s: InitialState) -> float:
        i, j = true_s.index() - 1, guessed_s.index() - 1
        if self._values is not None:
            return float(self._values[i, j])
        return float(self.class_values[self.class_of(i, j)])


def sweep(
    q: int,
    strategy: Strategy | str = Strategy.COMPLETE,
    omega: float | None = None,
    message: MessageMode = AVERAGE,
    reduction: Reduction | str = Reduction.FULL,
    seed: int = 0,
    *,
    k1: int | None = None,
    oracle: MessageMode | None = None,
    workers: int = 1,
    spot_checks: int = 0,
    allow_full_q7: bool = False,
) -> SweepGrid:
    """Evaluate an attack over every (true, guessed) initial-state pair.

    ``omega`` defaults to the optimal phase. ``message`` is a fixed true
    chunk or ``"avg"`` to average over all of them; ``oracle`` plays the
    same role for Eve's guessed chunk in the wrong-oracle attack. With
    ``reduction="diff"``, ``spot_checks`` random (S, S', chunk) triples are
    re-evaluated directly (seeded by ``seed``) and the largest deviation
    from the class value is recorded.

    The row partition is fixed by q alone, so the grid is bit-identical for
    any worker count.
    """
    if not 2 <= q <= 7:
        raise ValueError(f"sweeps support 2..7 participants, got {q}")
    strategy = Strategy(strategy)
    reduction = Reduction(reduction)
    if strategy is Strategy.VARIANT2 and q != 3:
        raise ValueError("the second variant is defined for 3 participants")
    if message != AVERAGE and not 0 <= int(message) < 2**q:
        raise ValueError(f"message chunk {message} out of range")
    if reduction is Reduction.FULL and q >= 7 and not allow_full_q7:
        raise ResourceGuardError("full sweep at Q=7 needs allow_full_q7=True; use the diff reduction")
    sched = iteration_schedule(q, k1)
    cfg = SweepConfig(
        q=q,
        strategy=strategy,
        omega=sched.omega_star if omega is None else float(omega),
        message=message,
        reduction=reduction,
        k1=sched.k1,
        oracle=oracle,
    )
    n = 4**q
    if reduction is Reduction.FULL:
        step = _block_rows(q)
        tasks = [(cfg, s, min(s + step, n)) for s in range(0, n, step)]
        values = np.empty((n, n))
        for start, rows in _run_tasks(_evaluate_block, tasks, workers):
            values[start : start + rows.shape[0]] = rows
        return SweepGrid(cfg, _values=values)

    tasks = [(cfg, ci, m) for ci, m in enumerate(cfg.chunks())]
    chunk_values = np.empty((n, len(tasks)))
    for ci, col in _run_tasks(_class_task, tasks, workers):
        chunk_values[:, ci] = col
    grid = SweepGrid(cfg, class_values=chunk_values.mean(axis=1), chunk_values=chunk_values)
    if spot_checks:
        grid.spot_checks = spot_checks
        grid.spot_check_max_dev = _spot_check(grid, spot_checks, seed)
        log.info("diff sweep Q=%d: %d spot checks, max dev %.3g", q, spot_checks, grid.spot_check_max_dev)
    return grid


def sample_pairs(q: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    n = 4**q
    return rng.integers(0, n, size=count), rng.integers(0, n, size=count), rng.integers(0, 2**q, size=count)


def evaluate_pairs(cfg: SweepConfig, true_rows, guessed_rows, chunks, batch: int = 4096) -> np.ndarray:
    """Direct evaluation for arbitrary (true row, guessed row, chunk) triples."""
    states = product_state_table(cfg.q)
    out = np.empty(len(true_rows))
    oracles = cfg.oracles()
    for lo in range(0, len(true_rows), batch):
        hi = min(lo + batch, len(true_rows))
        t = states[true_rows[lo:hi]]
        g = states[guessed_rows[lo:hi]]
        m = np.asarray(chunks[lo:hi])
        acc = np.zeros(hi - lo)
        for o in oracles:
            acc += attack_kernel(cfg.strategy, t, g, m, cfg.omega, cfg.schedule, o)
        out[lo:hi] = acc / len(oracles)
    return out


def _spot_check(grid: SweepGrid, count: int, seed: int) -> float:
    cfg = grid.config
    rows, cols, chunks = sample_pairs(cfg.q, count, seed)
    chunk_list = cfg.chunks()
    if len(chunk_list) == 1:
        chunks = np.full(count, chunk_list[0])
        ci = np.zeros(count, dtype=int)
    else:
        ci = chunks
    direct = evaluate_pairs(cfg, rows, cols, chunks)
    expected = grid.chunk_values[class_index(cfg.q, rows, cols), ci]
    return float(np.max(np.abs(direct - expected)))


# -- aggregation ------------------------------------------------------------


@dataclass(frozen=True)
class AttackSummary:
    p_s: float
    p_g: float
    histogram: list[tuple[float, int]]

    def histogram_dict(self) -> dict[float, int]:
        return dict(self.histogram)


def _histogram(values: np.ndarray, weight: int = 1) -> list[tuple[float, int]]:
    rounded = np.round(values.ravel(), 6) + 0.0
    keys, counts = np.unique(rounded, return_counts=True)
    return [(float(k), int(c) * weight) for k, c in sorted(zip(keys, counts), reverse=True)]


def aggregate(grid: SweepGrid) -> AttackSummary:
    """Mean success probability and the rounded-value histogram.

    In a diff sweep every class occurs exactly 4**q times among the 16**q
    pairs, so class statistics scale without expanding the grid.
    """
    p_g = guess_baseline(grid.q)
    if grid.reduction is Reduction.DIFF_CLASS:
        vals = grid.class_values
        return AttackSummary(float(np.mean(vals)), p_g, _histogram(vals, 4**grid.q))
    vals = grid.values
    return AttackSummary(float(np.mean(vals)), p_g, _histogram(vals))
