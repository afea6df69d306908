"""State vectors, phase-matched Grover iterations and the optimal-phase solver.

States are dense complex vectors. Qubit registers use big-endian ordering:
the first qubit in a tensor product is the most significant bit of the
basis index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

NORM_TOL = 1e-9
RENORM_TOL = 1e-12


class PhaseLabel(enum.IntEnum):
    """The four equatorial qubit states, numbered as in the attack grids."""

    PLUS = 0
    MINUS = 1
    PLUS_I = 2
    MINUS_I = 3

    @property
    def phase(self) -> float:
        return _LABEL_PHASE[self]

    @property
    def quarter_turns(self) -> int:
        """Relative phase in units of pi/2."""
        return _LABEL_QUARTERS[self]

    @classmethod
    def from_quarter_turns(cls, q: int) -> "PhaseLabel":
        return _QUARTERS_LABEL[q % 4]

    @property
    def ket(self) -> str:
        return _LABEL_KET[self]


_LABEL_PHASE = {
    PhaseLabel.PLUS: 0.0,
    PhaseLabel.MINUS: math.pi,
    PhaseLabel.PLUS_I: math.pi / 2,
    PhaseLabel.MINUS_I: 3 * math.pi / 2,
}
_LABEL_QUARTERS = {PhaseLabel.PLUS: 0, PhaseLabel.MINUS: 2, PhaseLabel.PLUS_I: 1, PhaseLabel.MINUS_I: 3}
_QUARTERS_LABEL = {q: lab for lab, q in _LABEL_QUARTERS.items()}
_LABEL_KET = {PhaseLabel.PLUS: "|+>", PhaseLabel.MINUS: "|->", PhaseLabel.PLUS_I: "|+i>", PhaseLabel.MINUS_I: "|-i>"}

# e^{i*phase} for each label, exact in floating point (no cos(pi) residue).
LABEL_UNIT = np.array([1.0, -1.0, 1j, -1j], dtype=complex)


class DimensionError(ValueError):
    """Operands live in registers of different dimension."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector of a register.

    The array is copied and frozen on construction, so instances can be
    shared freely between threads and processes.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise ValueError("empty state")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state has non-finite amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} out of range for dim {dim}")
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def uniform(cls, dim: int) -> "PureState":
        return cls(np.full(dim, 1 / math.sqrt(dim), dtype=complex))

    def __getitem__(self, index):
        return self.amplitudes[index]

    def __len__(self):
        return self.dim

    def __repr__(self):
        return f"PureState(dim={self.dim})"


@dataclass(frozen=True)
class ReflectionSpec:
    """Generalized Householder reflection I - (1 - e^{i omega}) |a><a|."""

    axis: PureState
    omega: float

    @property
    def factor(self) -> complex:
        return 1 - np.exp(1j * self.omega)

    def inverse(self) -> "ReflectionSpec":
        return ReflectionSpec(self.axis, (-self.omega) % (2 * math.pi))


@dataclass(frozen=True)
class Schedule:
    """Iteration plan for a 2**Q register.

    ``k1`` Grover steps are spent by the dealer (the last one truncated to
    its oracle reflection) and ``k2`` full steps plus one initial-state
    reflection by the decoder.
    """

    dim: int
    k: int
    k1: int
    k2: int
    omega_star: float

    @property
    def qubits(self) -> int:
        return self.dim.bit_length() - 1


def _check_dims(*states: PureState) -> None:
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")


def _renormalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > RENORM_TOL:
        v = v / norm
    return v


def mub_qubit(label: PhaseLabel | int) -> PureState:
    label = PhaseLabel(label)
    return PureState(np.array([1.0, LABEL_UNIT[label]]) / math.sqrt(2))


def tensor(states: Sequence[PureState]) -> PureState:
    if not states:
        raise ValueError("tensor of an empty list")
    out = states[0].amplitudes
    for s in states[1:]:
        out = np.kron(out, s.amplitudes)
    return PureState(_renormalize(out))


def inner(a: PureState, b: PureState) -> complex:
    """<a|b>, antilinear in the first argument."""
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def outcome_probability(state: PureState, index: int) -> float:
    if not 0 <= index < state.dim:
        raise IndexError(f"outcome {index} out of range for dim {state.dim}")
    return float(abs(state.amplitudes[index]) ** 2)


def apply_reflection(state: PureState, spec: ReflectionSpec) -> PureState:
    # rank-1 update; O(d), never builds the d x d operator
    _check_dims(state, spec.axis)
    a = spec.axis.amplitudes
    psi = state.amplitudes
    out = psi - spec.factor * np.vdot(a, psi) * a
    return PureState(_renormalize(out))


def reflection_matrix(spec: ReflectionSpec) -> np.ndarray:
    """Dense d x d operator; test oracle only."""
    a = spec.axis.amplitudes
    return np.eye(a.size, dtype=complex) - spec.factor * np.outer(a, a.conj())


def grover_iteration(
    state: PureState, oracle_axis: PureState, init_axis: PureState, omega: float
) -> PureState:
    """One Grover step: oracle reflection first, then the initial-state one."""
    _check_dims(state, oracle_axis, init_axis)
    state = apply_reflection(state, ReflectionSpec(oracle_axis, omega))
    return apply_reflection(state, ReflectionSpec(init_axis, omega))


def _solution_amplitudes(d: int, omegas: np.ndarray, k: int) -> np.ndarray:
    """<M|G(omega)^k|S> for many omegas at once.

    S is the all-|+> product state (uniform) and M = |0>. Every MUB product
    state has |<S|M>| = 1/sqrt(d), and the dynamics only see that overlap,
    so the result's modulus is the same for any such pair.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    s = np.full(d, 1 / math.sqrt(d))
    psi = np.tile(s.astype(complex), (omegas.size, 1))
    phase = np.exp(1j * omegas)[:, None]
    factor = 1 - phase
    for _ in range(k):
        psi[:, :1] *= phase
        psi = psi - factor * (psi @ s)[:, None] * s
    return psi[:, 0]


def success_probability(d: int, omega: float, k: int) -> float:
    """Probability of measuring the marked item after k phase-matched steps."""
    if d < 2 or d & (d - 1):
        raise ValueError(f"register dimension must be a power of 2, got {d}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(abs(_solution_amplitudes(d, np.array([omega]), k)[0]) ** 2)


def success_curve(d: int, omegas: Sequence[float], k: int) -> np.ndarray:
    """success_probability over an array of phases in one pass."""
    if d < 2 or d & (d - 1):
        raise ValueError(f"register dimension must be a power of 2, got {d}")
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.abs(_solution_amplitudes(d, np.asarray(omegas, dtype=float), k)) ** 2


def _golden_max(f, lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    e = a + invphi * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    return (a + b) / 2


def optimal_phase(d: int, k: int) -> float:
    """Phase in (0, pi] maximizing the success probability after k steps.

    Coarse scan on a 1e-3 grid, golden-section refinement to 1e-10, then a
    secant polish on the slope. The slope is linear at the peak, so the
    polish resolves the phase well below the sqrt(eps) floor of a pure
    value-comparison search.
    """
    grid = np.arange(1e-3, math.pi, 1e-3)
    grid = np.append(grid, math.pi)
    probs = np.abs(_solution_amplitudes(d, grid, k)) ** 2
    i = int(np.argmax(probs))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]

    def prob(w):
        return float(abs(_solution_amplitudes(d, np.array([w]), k)[0]) ** 2)

    w = _golden_max(prob, lo, hi, 1e-10)
    if w >= math.pi - 1e-9:
        return math.pi

    h = 1e-5

    def slope(x):
        p = np.abs(_solution_amplitudes(d, np.array([x - h, x + h]), k)) ** 2
        return (p[1] - p[0]) / (2 * h)

    x0, x1 = w - 1e-7, w + 1e-7
    g0, g1 = slope(x0), slope(x1)
    for _ in range(20):
        if g1 == g0:
            break
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        x0, g0 = x1, g1
        x1, g1 = x2, slope(x2)
        if abs(x1 - x0) < 1e-15:
            break
    # keep the polish only if it did not wander off the peak
    if abs(x1 - w) < 1e-6 and prob(x1) >= prob(w):
        return float(x1)
    return float(w)


def grover_iterations(d: int) -> tuple[int, float]:
    """(k, k') where k' solves pi/2 = (k' + 1/2) * 2 arcsin(1/sqrt d)."""
    theta = math.asin(1 / math.sqrt(d))
    k_exact = (math.pi / 2 - theta) / (2 * theta)
    if abs(k_exact - round(k_exact)) < 1e-9:
        return int(round(k_exact)), k_exact
    return math.floor(k_exact) + 1, k_exact


def approx_optimal_phase(d: int) -> float:
    """Closed-form starting guess 2 arcsin(sqrt(d) sin(pi / (4J + 6)))."""
    _, k_exact = grover_iterations(d)
    j = math.floor(k_exact)
    return 2 * math.asin(min(1.0, math.sqrt(d) * math.sin(math.pi / (4 * j + 6))))


@lru_cache(maxsize=None)
def _phase_for(d: int, k: int, integral: bool) -> float:
    return math.pi if integral else optimal_phase(d, k)


def iteration_schedule(q: int, k1: int | None = None) -> Schedule:
    """Plan the iterations for q participants.

    The secure split gives the dealer a single oracle reflection (k1 = 1);
    the padlock performs the remaining k - 1 full steps after its
    initial-state reflection. ``k1`` overrides the split for insecure
    experiments; k1 = 0 means the dealer applies U_M G^{-1}.
    """
    if q < 2:
        raise ValueError(f"need at least 2 participants, got {q}")
    d = 2**q
    k, k_exact = grover_iterations(d)
    integral = abs(k_exact - round(k_exact)) < 1e-9
    omega = _phase_for(d, k, integral)
    if k1 is None:
        k1 = 1
    if not 0 <= k1 <= k:
        raise ValueError(f"k1 must lie in [0, {k}], got {k1}")
    return Schedule(dim=d, k=k, k1=k1, k2=k - k1, omega_star=omega)
