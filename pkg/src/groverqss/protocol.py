"""Secret sharing built on Grover search.

The dealer splits the secret into Q-bit chunks. For each chunk it prepares a
random product of equatorial qubit states, runs part of a phase-matched
Grover search with the chunk as the marked item, and hands one qubit to each
participant. After the initial states are announced, the "padlock" (a
trusted device that holds the oracle) finishes the search.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DimensionError,
    PhaseLabel,
    PureState,
    ReflectionSpec,
    Schedule,
    apply_reflection,
    iteration_schedule,
    mub_qubit,
    outcome_probability,
    tensor,
)


class ProtocolVariant(enum.Enum):
    V1_PADLOCK = "v1"
    V2_THREE_PARTY = "v2"


def chunk_message(value: int, q: int) -> list[int]:
    """Split ``value`` into big-endian q-bit groups, left-padding with zeros."""
    if q < 2:
        raise ValueError(f"need at least 2 participants, got {q}")
    if value < 0:
        raise ValueError("secret must be non-negative")
    n_chunks = max(1, -(-value.bit_length() // q))
    mask = (1 << q) - 1
    return [(value >> (q * (n_chunks - 1 - i))) & mask for i in range(n_chunks)]


def join_chunks(chunks: Sequence[int], q: int) -> int:
    value = 0
    for c in chunks:
        if not 0 <= c < 2**q:
            raise ValueError(f"chunk {c} does not fit in {q} bits")
        value = (value << q) | c
    return value


@dataclass(frozen=True)
class InitialState:
    """Dealer's per-qubit choice, first participant first."""

    labels: tuple[PhaseLabel, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(PhaseLabel(lab) for lab in self.labels))
        if not self.labels:
            raise ValueError("initial state needs at least one qubit")

    @property
    def q(self) -> int:
        return len(self.labels)

    def index(self) -> int:
        """1-based grid number: labels read as a base-4 numeral, plus one."""
        n = 0
        for lab in self.labels:
            n = 4 * n + int(lab)
        return n + 1

    @classmethod
    def from_index(cls, index: int, q: int) -> "InitialState":
        if not 1 <= index <= 4**q:
            raise ValueError(f"index {index} out of range for {q} qubits")
        n = index - 1
        digits = []
        for _ in range(q):
            digits.append(n % 4)
            n //= 4
        return cls(tuple(reversed(digits)))

    @classmethod
    def random(cls, q: int, rng: np.random.Generator) -> "InitialState":
        return cls(tuple(int(x) for x in rng.integers(0, 4, size=q)))

    def as_state(self) -> PureState:
        return tensor([mub_qubit(lab) for lab in self.labels])

    def phases(self) -> list[float]:
        return [lab.phase for lab in self.labels]

    def __str__(self):
        return "".join(lab.ket for lab in self.labels)


def state_index(s: InitialState) -> int:
    return s.index()


def product_amplitudes(labels: Sequence[int]) -> np.ndarray:
    """Amplitudes of a product state straight from the phase sum.

    Basis state j picks up e^{i sum phi_l} over the qubits l whose bit is
    set in j, the first qubit being the most significant bit.
    """
    q = len(labels)
    quarters = np.zeros(2**q, dtype=int)
    for pos, lab in enumerate(labels):
        bit = 1 << (q - 1 - pos)
        has_bit = (np.arange(2**q) & bit) != 0
        quarters[has_bit] += PhaseLabel(lab).quarter_turns
    return np.array([1, 1j, -1, -1j])[quarters % 4] / math.sqrt(2**q)


def _oracle(chunk: int, dim: int, omega: float) -> ReflectionSpec:
    return ReflectionSpec(PureState.basis(dim, chunk), omega)


def _check_schedule(s: InitialState, sched: Schedule) -> None:
    if sched.dim != 2**s.q:
        raise DimensionError(f"schedule is for dim {sched.dim}, state has {s.q} qubits")


def encode(chunk: int, s: InitialState, omega: float, sched: Schedule) -> PureState:
    """Dealer side: U_M G^(k1-1) |S>, with G = U_S U_M."""
    _check_schedule(s, sched)
    d = sched.dim
    if not 0 <= chunk < d:
        raise ValueError(f"chunk {chunk} out of range for dim {d}")
    init = s.as_state()
    u_m = _oracle(chunk, d, omega)
    u_s = ReflectionSpec(init, omega)
    psi = init
    if sched.k1 == 0:
        # U_M G^{-1} = U_M U_M^{-1} U_S^{-1}
        return apply_reflection(psi, u_s.inverse())
    for _ in range(sched.k1 - 1):
        psi = apply_reflection(psi, u_m)
        psi = apply_reflection(psi, u_s)
    return apply_reflection(psi, u_m)


def padlock_decode(
    x: PureState, s: InitialState, chunk: int, omega: float, sched: Schedule
) -> PureState:
    """Decoder side: G^k2 U_S |x>, with the claimed initial state ``s``."""
    _check_schedule(s, sched)
    if x.dim != sched.dim:
        raise DimensionError(f"register has dim {x.dim}, schedule expects {sched.dim}")
    u_s = ReflectionSpec(s.as_state(), omega)
    u_m = _oracle(chunk, sched.dim, omega)
    psi = apply_reflection(x, u_s)
    for _ in range(sched.k2):
        psi = apply_reflection(psi, u_m)
        psi = apply_reflection(psi, u_s)
    return psi


def _require_three(s: InitialState) -> None:
    if s.q != 3:
        raise ValueError(f"the second variant is defined for 3 participants, got {s.q}")


def variant2_encode(chunk: int, s: InitialState, omega: float) -> PureState:
    """U_M U_S U_M |S>; decodable without a padlock."""
    _require_three(s)
    init = s.as_state()
    u_m = _oracle(chunk, 8, omega)
    u_s = ReflectionSpec(init, omega)
    psi = apply_reflection(init, u_m)
    psi = apply_reflection(psi, u_s)
    return apply_reflection(psi, u_m)


def variant2_decode(y: PureState, s: InitialState, omega: float) -> PureState:
    _require_three(s)
    if y.dim != 8:
        raise DimensionError(f"expected an 8-dim register, got {y.dim}")
    return apply_reflection(y, ReflectionSpec(s.as_state(), omega))


@dataclass(frozen=True)
class HonestRun:
    value: int
    q: int
    omega: float
    chunks: list[int]
    initial_states: list[InitialState]
    encoded: list[PureState]
    probabilities: list[float]
    decoded_chunks: list[int]

    @property
    def decoded(self) -> int:
        return join_chunks(self.decoded_chunks, self.q)


def resolve_omega(omega, q: int) -> float:
    """Accepts a float, ``"optimal"``/``"opt"`` or ``"pi"``."""
    if isinstance(omega, str):
        key = omega.lower()
        if key in ("optimal", "opt"):
            return iteration_schedule(q).omega_star
        if key == "pi":
            return math.pi
        return float(omega)
    return float(omega)


def honest_run(value: int, q: int, omega="optimal", rng_seed: int = 0) -> HonestRun:
    """Full protocol without an eavesdropper.

    Chunk i draws its initial state and its measurement outcome from a
    generator seeded with ``rng_seed + i``, so chunks are reproducible in
    isolation.
    """
    sched = iteration_schedule(q)
    w = resolve_omega(omega, q)
    chunks = chunk_message(value, q)
    states, encoded, probs, decoded = [], [], [], []
    for i, chunk in enumerate(chunks):
        rng = np.random.default_rng(rng_seed + i)
        s = InitialState.random(q, rng)
        x = encode(chunk, s, w, sched)
        out = padlock_decode(x, s, chunk, w, sched)
        dist = np.abs(out.amplitudes) ** 2
        dist = dist / dist.sum()
        states.append(s)
        encoded.append(x)
        probs.append(outcome_probability(out, chunk))
        decoded.append(int(rng.choice(sched.dim, p=dist)))
    return HonestRun(value, q, w, chunks, states, encoded, probs, decoded)

