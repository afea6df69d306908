"""Closed-form attack probabilities and pair-count combinatorics.

These are independent of the state-vector simulation and serve as oracles
for it. Inner-product forms are the primary implementations; the fully
expanded phase sums are kept as secondary forms, with their known
misprints recorded in ``ERRATA``.

Conventions: qubit 1 is the most significant bit of a chunk, and
``i^{a_M}`` denotes the unnormalized amplitude of basis state M in the
product state, exp(i * sum of phases of the qubits whose bit is set in M).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_DOWN, ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .attack import ErrorProfile
from .core import PhaseLabel

MUB_ANGLES = (0.0, math.pi / 2, math.pi, 3 * math.pi / 2)
_ANGLE_TOL = 1e-9
_UNITS = np.array([1, 1j, -1, -1j])

ERRATA = {
    "pm2_expanded": "printed expansion matches the inner-product form only at omega=pi for chunks 0, 2, 3",
    "pm3_expanded": "V[omega] polynomial (1, 22, 48, -6, -1) disagrees with the inner-product form",
    "pm_half_chunk7": "printed prefactor 2 and constant sqrt(2) replaced by 1/512 and 1/7",
    "table5_rows": "intermediate-row pair fractions Q!/((Q-r)! 2^(Q+r)) disagree with exhaustive counts",
}


def _quarter(angle: float) -> int:
    x = (angle % (2 * math.pi)) / (math.pi / 2)
    n = round(x)
    if abs(x - n) > _ANGLE_TOL:
        raise ValueError(f"angle {angle!r} is not one of the four equatorial phases")
    return n % 4


@dataclass(frozen=True)
class PhaseTuple:
    """True phases ``phi`` and guessed phases ``phi_prime``, qubit 1 first."""

    phi: tuple[float, ...]
    phi_prime: tuple[float, ...]

    def __post_init__(self):
        phi = tuple(float(x) for x in self.phi)
        phi_prime = tuple(float(x) for x in self.phi_prime)
        if len(phi) != len(phi_prime) or not phi:
            raise ValueError("phi and phi_prime need the same, nonzero length")
        for x in phi + phi_prime:
            _quarter(x)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "phi_prime", phi_prime)

    @property
    def q(self) -> int:
        return len(self.phi)

    @classmethod
    def from_labels(cls, true_labels: Sequence[int], guessed_labels: Sequence[int]) -> "PhaseTuple":
        return cls(
            tuple(PhaseLabel(x).phase for x in true_labels),
            tuple(PhaseLabel(x).phase for x in guessed_labels),
        )

    def units(self) -> tuple[np.ndarray, np.ndarray]:
        """Exact e^{i phi} and e^{i phi'} (no trig rounding)."""
        return (
            _UNITS[[_quarter(x) for x in self.phi]],
            _UNITS[[_quarter(x) for x in self.phi_prime]],
        )

    def profile(self) -> ErrorProfile:
        n_half = n_pi = 0
        for a, b in zip(self.phi, self.phi_prime):
            diff = (_quarter(b) - _quarter(a)) % 4
            n_half += diff in (1, 3)
            n_pi += diff == 2
        return ErrorProfile(n_half, n_pi)


def _require_q(phases: PhaseTuple, q: int) -> None:
    if phases.q != q:
        raise ValueError(f"expected {q} qubits, got {phases.q}")


def _check_chunk(chunk: int, q: int) -> None:
    if not 0 <= chunk < 2**q:
        raise ValueError(f"chunk {chunk} out of range for {q} qubits")


def _bits(chunk: int, q: int) -> list[int]:
    return [(chunk >> (q - 1 - j)) & 1 for j in range(q)]


def _basis_phase(units: np.ndarray, chunk: int) -> complex:
    """i^{a_M}: product of e^{i phi_j} over the set bits of the chunk."""
    out = 1 + 0j
    for u, bit in zip(units, _bits(chunk, len(units))):
        if bit:
            out *= u
    return out


def overlap(phases: PhaseTuple) -> complex:
    """<S'|S> for the two product states."""
    a, b = phases.units()
    return complex(np.prod((1 + a * np.conj(b)) / 2))


def pm2_closed(omega: float, phases: PhaseTuple, chunk: int) -> float:
    """Two parties, padlock completion with a guessed initial state."""
    _require_q(phases, 2)
    _check_chunk(chunk, 2)
    a, b = phases.units()
    e = np.exp(1j * omega)
    amp = -(1 - e) / 2 * _basis_phase(b, chunk) * overlap(phases) + _basis_phase(a, chunk) / 8 * (1 + e) ** 2
    return float(abs(amp) ** 2)


def pm2_expanded(omega: float, phases: PhaseTuple, chunk: int) -> float:
    """Printed phase-sum expansion for two parties; see ``ERRATA``."""
    _require_q(phases, 2)
    _check_chunk(chunk, 2)
    p1, p2 = phases.phi
    q1, q2 = phases.phi_prime
    e = np.exp(1j * omega)

    def ex(x):
        return np.exp(1j * x)

    if chunk == 0:
        v = 3 * e + np.exp(-2j * omega) + (e - 1) * (ex(p1 - q1) + ex(p2 - q2) + ex(p1 + p2 - q1 - q2))
    elif chunk == 1:
        v = (e - 1) * (ex(p1 + p2 - q1) + ex(p1 + q1 - q2) + ex(q2)) + 3 * ex(p2 - 2 * omega) * (1 / 3 + e)
    elif chunk == 2:
        v = (e - 1) * (ex(p1 + p2 - q2) + ex(p2 + q1 - q2) + ex(q1)) + 3 * ex(p1 - 2 * omega) * (1 / 3 + e)
    else:
        v = (
            (e - 1) * (-ex(p2 - omega + q1) - ex(p1 - omega + q2) + ex(q1 + q2))
            + 3 * ex(p1 + p2 - 2 * omega) * (1 / 3 + e)
        )
    return float(abs(v) ** 2 / 64)


def pm2_pi_factorized(phases: PhaseTuple) -> float:
    """Omega = pi: product of the single-qubit overlaps squared."""
    _require_q(phases, 2)
    return float(abs(overlap(phases)) ** 2)


def pm3_closed(omega: float, phases: PhaseTuple, chunk: int) -> float:
    """Three parties, padlock completion with a guessed initial state."""
    _require_q(phases, 3)
    _check_chunk(chunk, 3)
    a, b = phases.units()
    e = np.exp(1j * omega)
    rel = _basis_phase(b, chunk) * np.conj(_basis_phase(a, chunk))
    first = -(1 - e) * (1 + 14 * e + e**2) / (16 * math.sqrt(2)) * rel * overlap(phases)
    second = (1 + 20 * e + 22 * e**2 + 20 * e**3 + e**4) / (128 * math.sqrt(2))
    return float(abs(first + second) ** 2)


def pm_factorized(phases: PhaseTuple) -> float:
    """|<S'|S>|^2 as a product over qubits; exact at the optimal phase."""
    return float(abs(overlap(phases)) ** 2)


# -- decimal constants of the expanded three-party form ---------------------


@dataclass(frozen=True)
class ExactConstant:
    printed: str
    label: str
    value: float

    def reproduces_print(self) -> bool:
        """True if rounding or truncating ``value`` gives the printed digits."""
        printed = Decimal(self.printed)
        exp = printed.as_tuple().exponent
        v = Decimal(repr(self.value))
        return printed in (
            v.quantize(Decimal(1).scaleb(exp), rounding=ROUND_HALF_EVEN),
            v.quantize(Decimal(1).scaleb(exp), rounding=ROUND_DOWN),
        )


def reconstruct_constant(printed: str, max_multiple: int = 64, max_power: int = 20) -> ExactConstant | None:
    """First k*sqrt(2) or 2^-n whose digits match the printed decimal."""
    candidates = [(f"{k}*sqrt(2)", k * math.sqrt(2)) for k in range(1, max_multiple + 1)]
    candidates += [(f"2^-{n}", 2.0**-n) for n in range(1, max_power + 1)]
    for label, value in candidates:
        c = ExactConstant(printed, label, value)
        if c.reproduces_print():
            return c
    return None


PM3_CONSTANTS = {
    "prefactor": "0.0000152587890",
    "c1": "1.41421",
    "c22": "31.1126",
    "c48": "67.8822",
    "c6": "8.48528",
    "c13": "18.3847",
}


def _exact(name: str) -> float:
    c = reconstruct_constant(PM3_CONSTANTS[name])
    return c.value if c is not None else float(PM3_CONSTANTS[name])


def pm3_expanded(omega: float, phases: PhaseTuple, chunk: int) -> float:
    """Printed V/W expansion for three parties (exact constants); see ``ERRATA``."""
    _require_q(phases, 3)
    _check_chunk(chunk, 3)
    e = np.exp(1j * omega)
    c1, c22, c48, c6, c13 = (_exact(n) for n in ("c1", "c22", "c48", "c6", "c13"))
    v = e**6 * (c1 + c22 * e + c48 * e**2 - c6 * e**3 - c1 * e**4)
    w = e**7 * (c1 + c13 * e - c13 * e**2 - c1 * e**3)
    # U[M]: true phase where the chunk bit is 1, guessed phase where it is 0
    u = sum(p if bit else pp for p, pp, bit in zip(phases.phi, phases.phi_prime, _bits(chunk, 3)))
    prod = np.prod([np.exp(1j * p) + np.exp(1j * pp) for p, pp in zip(phases.phi, phases.phi_prime)])
    return float(_exact("prefactor") * abs(v * np.exp(1j * u) + w * prod) ** 2)


# -- general Q --------------------------------------------------------------


def pm_general_closed(profile: ErrorProfile) -> float:
    """(1/2)^n_half without pi errors, zero otherwise."""
    if profile.n_half < 0 or profile.n_pi < 0:
        raise ValueError("error counts must be non-negative")
    return 0.0 if profile.n_pi else 0.5**profile.n_half


def pair_fraction(q: int, r: int, pi_errors: int = 0) -> Fraction:
    """Fraction of the 16**q ordered (S, S') pairs in an error class.

    With ``pi_errors == 0`` this is the class with exactly r half-turn
    errors and no pi errors; with ``pi_errors >= 1`` it is the whole class
    of pairs with at least one pi error, and ``r`` is ignored.
    """
    if q < 1:
        raise ValueError(f"need at least one qubit, got {q}")
    if not 0 <= r <= q:
        raise ValueError(f"r must lie in [0, {q}], got {r}")
    if pi_errors < 0:
        raise ValueError("pi_errors must be non-negative")
    if pi_errors:
        return 1 - Fraction(3, 4) ** q
    return Fraction(math.comb(q, r) * 2**r, 4**q)


def pair_count(q: int, r: int, pi_errors: int = 0) -> int:
    return int(pair_fraction(q, r, pi_errors) * 16**q)


def expected_ps_exact(q: int) -> Fraction:
    total = Fraction(0)
    for r in range(q + 1):
        total += pair_fraction(q, r) * Fraction(1, 2**r)
    return total


def expected_ps(q: int) -> float:
    """Mean attack success over all pairs; equals 2^-q."""
    return float(expected_ps_exact(q))


def table5_printed_fraction(q: int, r: int) -> Fraction:
    """Row fraction as printed: explicit rows for r <= 3, general row beyond.

    Explicit rows: 1/4^Q, Q 2^Q/4^Q, Q(Q-1) 2^(Q-1)/4^Q and
    Q(Q-1)(Q-2) 2^(Q-2)/4^Q; general row Q!/((Q-r)! 2^(Q+r)).
    """
    if r == 0:
        return Fraction(1, 4**q)
    if r <= 3:
        falling = math.factorial(q) // math.factorial(q - r)
        return Fraction(falling * 2 ** (q - r + 1), 4**q)
    return Fraction(math.factorial(q), math.factorial(q - r) * 2 ** (q + r))


@dataclass(frozen=True)
class Table5Row:
    r: int | None
    probability: float
    computed: Fraction
    printed: Fraction
    erratum: bool


def table5_rows(q: int) -> list[Table5Row]:
    """Rows for r = 0..q half errors plus the pi-error row."""
    rows = []
    for r in range(q + 1):
        computed = pair_fraction(q, r)
        printed = table5_printed_fraction(q, r)
        rows.append(Table5Row(r, 0.5**r, computed, printed, computed != printed))
    pi = pair_fraction(q, 0, 1)
    rows.append(Table5Row(None, 0.0, pi, 1 - Fraction(3, 4) ** q, False))
    return rows


# -- half-iteration attack, three parties -----------------------------------


def _half_sum(a, b, chunk: int, e: complex, em: complex) -> complex:
    a1, a2, a3 = a
    b1, b2, b3 = b
    if chunk == 0:
        s = (
            a1 / b1 + a2 / b2 + a1 * a2 / (b1 * b2) + a3 / b3
            + a1 * a3 / (b1 * b3) + a2 * a3 / (b2 * b3) + a1 * a2 * a3 / (b1 * b2 * b3)
        )
        return 7 * em + em**2 + (em - 1) * s
    if chunk in (1, 2, 4):
        # single set bit: the same shape with the qubits permuted
        j = {4: 0, 2: 1, 1: 2}[chunk]
        k, l_ = [x for x in range(3) if x != j]
        t = (a[k] * a[l_] + a[l_] * b[k] + a[k] * b[l_]) / (b[k] * b[l_]) * (a[j] + b[j])
        return t - a[j] * em**2 - 7 * a[j] * em - t * em - em * b[j] + b[j]
    if chunk == 3:
        s = (
            a1 * a2 * a3 / b1 + a3 * b2 + a1 * a3 * b2 / b1 + a2 * b3
            + a1 * a2 * b3 / b1 + b2 * b3 + a1 * b2 * b3 / b1
        )
        return s * (em - 1) + 7 * a2 * a3 * em**2 * (1 / 7 + e)
    if chunk == 5:
        s = (
            a1 * a2 * a3 + a2 * a3 * b1 + a3 * b1 * b2 + a1 * a2 * b3
            + a2 * b1 * b3 + a1 * b2 * b3 + b1 * b2 * b3
        )
        return s * em / b2 * (e - 1) - 7 * a1 * a3 * em**2 * (1 / 7 + e)
    if chunk == 6:
        s = (
            a1 * a2 * a3 + a2 * a3 * b1 + a1 * a3 * b2 + a3 * b1 * b2
            + a2 * b1 * b3 + a1 * b2 * b3 + b1 * b2 * b3
        )
        return s * em / b3 * (e - 1) - 7 * a1 * a2 * em**2 * (1 / 7 + e)
    s = (
        a2 * a3 * b1 + a1 * a3 * b2 + a3 * b1 * b2 + a1 * a2 * b3
        + a2 * b1 * b3 + a1 * b2 * b3 + b1 * b2 * b3
    )
    return s * (em - 1) + 7 * a1 * a2 * a3 * em**2 * (1 / 7 + e)


def pm_half_closed(omega: float, phases: PhaseTuple, chunk: int) -> float:
    """Three parties, Eve applies only her own initial-state reflection.

    The printed expressions are written in e^{-i omega}; they describe the
    reflection with the opposite phase sign, so they are evaluated at
    -omega. Chunk 7 uses the pattern-consistent form (see ``ERRATA``).
    """
    _require_q(phases, 3)
    _check_chunk(chunk, 3)
    a, b = phases.units()
    w = -omega
    amp = _half_sum(a, b, chunk, np.exp(1j * w), np.exp(-1j * w))
    return float(abs(amp) ** 2 / 512)


@lru_cache(maxsize=None)
def verify_half_chunk7(omega: float, tol: float = 1e-9) -> bool:
    """Check the substituted chunk-7 form against the simulation."""
    from .attack import Strategy, attack_kernel, label_table, product_state_table
    from .core import iteration_schedule

    labels = label_table(3)
    states = product_state_table(3)
    sched = iteration_schedule(3)
    sim = attack_kernel(Strategy.HALF, states[:, None, :], states[None, :, :], 7, omega, sched)
    for i in range(64):
        for j in range(64):
            p = PhaseTuple.from_labels(labels[i], labels[j])
            if abs(pm_half_closed(omega, p, 7) - sim[i, j]) > tol:
                return False
    return True
