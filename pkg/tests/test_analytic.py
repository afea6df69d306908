import math
from fractions import Fraction

import numpy as np
import pytest

from groverqss.analytic import (
    ERRATA,
    PM3_CONSTANTS,
    PhaseTuple,
    overlap,
    pair_count,
    pair_fraction,
    pm2_closed,
    pm2_expanded,
    pm2_pi_factorized,
    pm3_closed,
    pm3_expanded,
    pm_factorized,
    pm_general_closed,
    pm_half_closed,
    reconstruct_constant,
    expected_ps,
    expected_ps_exact,
    table5_printed_fraction,
    table5_rows,
    verify_half_chunk7,
)
from groverqss.attack import (
    AVERAGE,
    ErrorProfile,
    Strategy,
    SweepConfig,
    attack_kernel,
    error_profile,
    evaluate_pairs,
    label_table,
    product_state_table,
    sample_pairs,
)
from groverqss.core import PhaseLabel, iteration_schedule
from groverqss.protocol import InitialState

import _cache

P, M, PI_, MI = PhaseLabel.PLUS, PhaseLabel.MINUS, PhaseLabel.PLUS_I, PhaseLabel.MINUS_I
W3 = iteration_schedule(3).omega_star


def simulated(q, strategy, omega, chunk):
    """(4^q, 4^q) simulated grid for one chunk."""
    states = product_state_table(q)
    sched = iteration_schedule(q)
    return attack_kernel(strategy, states[:, None, :], states[None, :, :], chunk, omega, sched)


def all_tuples(q):
    labels = label_table(q)
    return [[PhaseTuple.from_labels(labels[i], labels[j]) for j in range(4**q)] for i in range(4**q)]


def test_phase_tuple_validation():
    with pytest.raises(ValueError):
        PhaseTuple((0.3,), (0.0,))
    with pytest.raises(ValueError):
        PhaseTuple((0.0, 0.0), (0.0,))
    t = PhaseTuple.from_labels((PI_, M), (P, P))
    assert t.q == 2
    assert t.profile() == ErrorProfile(1, 1)


def test_profile_matches_attack_module():
    labels = label_table(2)
    for i in range(16):
        for j in range(16):
            t = PhaseTuple.from_labels(labels[i], labels[j])
            s, g = InitialState.from_index(i + 1, 2), InitialState.from_index(j + 1, 2)
            assert t.profile() == error_profile(s, g)


def test_overlap_is_inner_product():
    labels = label_table(3)
    states = product_state_table(3)
    for i, j in [(0, 0), (5, 17), (63, 2)]:
        t = PhaseTuple.from_labels(labels[i], labels[j])
        assert abs(overlap(t) - np.vdot(states[j], states[i])) <= 1e-15


def test_pm2_examples():
    t = PhaseTuple.from_labels((PI_, M), (PI_, M))
    for chunk in range(4):
        assert pm2_closed(math.pi, t, chunk) == pytest.approx(1, abs=1e-12)
    assert pm2_closed(math.pi, PhaseTuple.from_labels((P, P), (PI_, P)), 1) == pytest.approx(0.5, abs=1e-12)
    assert pm2_closed(math.pi, PhaseTuple.from_labels((P, P), (M, P)), 1) == pytest.approx(0, abs=1e-12)


def test_pm2_pi_factorized_examples():
    assert pm2_pi_factorized(PhaseTuple.from_labels((P, MI), (P, MI))) == pytest.approx(1)
    assert pm2_pi_factorized(PhaseTuple.from_labels((P, P), (PI_, P))) == pytest.approx(0.5)
    assert pm2_pi_factorized(PhaseTuple.from_labels((P, P), (PI_, MI))) == pytest.approx(0.25)


@pytest.mark.parametrize("omega", [0.5, 1.33, iteration_schedule(2).omega_star, math.pi, 2 * math.pi - W3])
def test_pm2_closed_matches_simulation(omega):
    tuples = all_tuples(2)
    for chunk in range(4):
        sim = simulated(2, Strategy.COMPLETE, omega, chunk)
        closed = np.array([[pm2_closed(omega, t, chunk) for t in row] for row in tuples])
        assert np.max(np.abs(closed - sim)) <= 1e-10


def test_pm2_closed_at_reflected_optimal_phase():
    omega = 2 * math.pi - iteration_schedule(2).omega_star
    tuples = all_tuples(2)
    for chunk in range(4):
        sim = simulated(2, Strategy.COMPLETE, omega, chunk)
        closed = np.array([[pm2_closed(omega, t, chunk) for t in row] for row in tuples])
        assert np.max(np.abs(closed - sim)) <= 1e-10


def test_pm2_expanded_erratum():
    assert "pm2_expanded" in ERRATA
    tuples = all_tuples(2)
    for chunk in (0, 2, 3):
        dev = max(abs(pm2_expanded(math.pi, t, chunk) - pm2_closed(math.pi, t, chunk)) for row in tuples for t in row)
        assert dev <= 1e-10
    dev = max(abs(pm2_expanded(1.33, t, 1) - pm2_closed(1.33, t, 1)) for row in tuples for t in row)
    assert dev > 1e-3


@pytest.mark.parametrize("omega", [W3, math.pi])
def test_pm3_closed_matches_simulation(omega):
    tuples = all_tuples(3)
    for chunk in range(8):
        sim = simulated(3, Strategy.COMPLETE, omega, chunk)
        closed = np.array([[pm3_closed(omega, t, chunk) for t in row] for row in tuples])
        assert np.max(np.abs(closed - sim)) <= 1e-10


def test_pm3_examples():
    t = PhaseTuple.from_labels((PI_, P, M), (PI_, P, PI_))
    assert pm3_closed(math.pi, t, 1) == pytest.approx(61 / 128, abs=1e-12)
    same = PhaseTuple.from_labels((MI, P, M), (MI, P, M))
    assert pm3_closed(W3, same, 5) == pytest.approx(1, abs=1e-6)
    assert pm3_closed(math.pi, same, 5) == pytest.approx(0.9453, abs=1e-4)


@pytest.mark.parametrize(
    "name, label",
    [("prefactor", "2^-16"), ("c1", "1*sqrt(2)"), ("c22", "22*sqrt(2)"), ("c48", "48*sqrt(2)"),
     ("c6", "6*sqrt(2)"), ("c13", "13*sqrt(2)")],
)
def test_constant_reconstruction(name, label):
    c = reconstruct_constant(PM3_CONSTANTS[name])
    assert c is not None and c.label == label
    assert c.reproduces_print()


def test_reconstruction_rejects_unrelated_decimal():
    assert reconstruct_constant("3.14159") is None


def test_pm3_expanded_is_flagged():
    assert "pm3_expanded" in ERRATA
    tuples = all_tuples(3)
    dev = max(abs(pm3_expanded(W3, t, 1) - pm3_closed(W3, t, 1)) for row in tuples[:8] for t in row)
    assert dev > 0.1


def test_pm_general_examples():
    assert pm_general_closed(ErrorProfile(0, 0)) == 1
    assert pm_general_closed(ErrorProfile(2, 0)) == 0.25
    assert pm_general_closed(ErrorProfile(0, 1)) == 0
    with pytest.raises(ValueError):
        pm_general_closed(ErrorProfile(-1, 0))


def test_pm_factorized_is_general_form_at_optimal_phase():
    labels = label_table(3)
    for i in range(0, 64, 7):
        for j in range(64):
            t = PhaseTuple.from_labels(labels[i], labels[j])
            assert pm_factorized(t) == pytest.approx(pm_general_closed(t.profile()), abs=1e-15)


def general_closed_for_classes(q):
    labels = label_table(q)
    zero = np.zeros(q, dtype=int)
    return np.array([pm_general_closed(PhaseTuple.from_labels(zero, labels[c]).profile()) for c in range(4**q)])


@pytest.mark.parametrize("q", [4, 5])
def test_pm_general_matches_exhaustive_classes(q):
    grid = _cache.grid(q, reduction="diff")
    assert np.max(np.abs(grid.class_values - general_closed_for_classes(q))) <= 1e-6
    for ci in range(grid.chunk_values.shape[1]):
        assert np.max(np.abs(grid.chunk_values[:, ci] - general_closed_for_classes(q))) <= 1e-6


@pytest.mark.parametrize("q", [6, 7])
def test_pm_general_matches_random_pairs(q):
    sched = iteration_schedule(q)
    cfg = SweepConfig(q, Strategy.COMPLETE, sched.omega_star, AVERAGE, "diff", sched.k1)
    rows, cols, chunks = sample_pairs(q, 100_000, seed=q)
    sim = evaluate_pairs(cfg, rows, cols, chunks)
    labels = label_table(q)
    to_q = np.array([PhaseLabel(i).quarter_turns for i in range(4)])
    diff = (to_q[labels[cols]] - to_q[labels[rows]]) % 4
    n_half = np.sum(diff % 2 == 1, axis=1)
    n_pi = np.sum(diff == 2, axis=1)
    closed = np.where(n_pi > 0, 0.0, 0.5**n_half)
    assert np.max(np.abs(sim - closed)) <= 1e-6


def test_pair_fraction_examples():
    assert pair_fraction(2, 1) == Fraction(4, 16)
    assert pair_count(2, 1) == 64
    assert pair_fraction(3, 1) == Fraction(6, 64)
    assert pair_count(3, 1) == 384
    for q in range(2, 8):
        assert pair_fraction(q, 0, 1) == 1 - Fraction(3, 4) ** q
    assert pair_fraction(3, 0, 1) == Fraction(37, 64)
    with pytest.raises(ValueError):
        pair_fraction(3, 4)


@pytest.mark.parametrize("q", range(2, 8))
def test_pair_fractions_partition_all_pairs(q):
    total = sum(pair_fraction(q, r) for r in range(q + 1)) + pair_fraction(q, 0, 1)
    assert total == 1


def test_pair_counts_match_simulated_histograms():
    for q in (2, 3):
        hist = _cache.summary(q).histogram_dict()
        for r in range(q + 1):
            assert hist[0.5**r] == pair_count(q, r)
        assert hist[0.0] == pair_count(q, 0, 1)


@pytest.mark.parametrize("q", range(2, 8))
def test_expected_ps_identity(q):
    assert expected_ps_exact(q) == Fraction(1, 2**q)
    assert expected_ps(q) == 2.0**-q


def test_expected_ps_examples():
    assert expected_ps(2) == 0.25
    assert expected_ps(3) == 0.125
    assert expected_ps(5) == 0.03125


def test_table5_rows():
    rows = table5_rows(3)
    assert [r.r for r in rows] == [0, 1, 2, 3, None]
    assert rows[-1].computed == Fraction(37, 64)
    assert not rows[0].erratum and not rows[-1].erratum
    assert rows[1].erratum
    assert table5_printed_fraction(3, 1) == Fraction(3 * 8, 64)
    assert "table5_rows" in ERRATA


def test_half_examples():
    same = PhaseTuple.from_labels((P, MI, M), (P, MI, M))
    for chunk in range(8):
        assert pm_half_closed(math.pi, same, chunk) == pytest.approx(0.78125, abs=1e-12)
        assert pm_half_closed(W3, same, chunk) == pytest.approx(0.66578, abs=1e-4)


@pytest.mark.parametrize("omega", [W3, math.pi])
def test_half_closed_matches_simulation(omega):
    tuples = all_tuples(3)
    for chunk in range(8):
        sim = simulated(3, Strategy.HALF, omega, chunk)
        closed = np.array([[pm_half_closed(omega, t, chunk) for t in row] for row in tuples])
        assert np.max(np.abs(closed - sim)) <= 1e-9


def test_half_chunk7_substitution_verified():
    assert "pm_half_chunk7" in ERRATA
    assert verify_half_chunk7(W3)
    assert verify_half_chunk7(math.pi)
