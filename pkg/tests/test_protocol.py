import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import groverqss.protocol as protocol
from groverqss.attack import Strategy, attack_kernel, product_state_table
from groverqss.core import (
    DimensionError,
    PhaseLabel,
    PureState,
    ReflectionSpec,
    iteration_schedule,
    outcome_probability,
    reflection_matrix,
)
from groverqss.protocol import (
    InitialState,
    chunk_message,
    encode,
    honest_run,
    join_chunks,
    padlock_decode,
    product_amplitudes,
    resolve_omega,
    state_index,
    variant2_decode,
    variant2_encode,
)

P, M, PI_, MI = PhaseLabel.PLUS, PhaseLabel.MINUS, PhaseLabel.PLUS_I, PhaseLabel.MINUS_I


@pytest.mark.parametrize("value, q, chunks", [(23, 2, [1, 1, 3]), (125, 3, [1, 7, 5]), (0, 3, [0])])
def test_chunk_examples(value, q, chunks):
    assert chunk_message(value, q) == chunks


def test_chunk_errors():
    with pytest.raises(ValueError):
        chunk_message(-1, 2)
    with pytest.raises(ValueError):
        chunk_message(5, 1)
    with pytest.raises(ValueError):
        join_chunks([4], 2)


@given(st.integers(0, 2**30 - 1), st.integers(2, 7))
def test_chunk_roundtrip(value, q):
    assert join_chunks(chunk_message(value, q), q) == value


def test_state_index_examples():
    assert state_index(InitialState((PI_, M))) == 10
    assert InitialState((P, P)).index() == 1
    assert InitialState((MI, MI, MI)).index() == 64
    for i in (1, 10, 37, 64):
        assert InitialState.from_index(i, 3).index() == i
    with pytest.raises(ValueError):
        InitialState.from_index(0, 2)


def test_initial_state_as_state_dim():
    s = InitialState((PI_, P, M, MI))
    assert s.as_state().dim == 16
    assert str(InitialState((PI_, M))) == "|+i>|->"


def test_dealer_order_consistency():
    for labels in itertools.product(range(4), repeat=3):
        s = InitialState(labels)
        assert np.allclose(s.as_state().amplitudes, product_amplitudes(labels), atol=1e-15)


def test_encode_worked_example():
    sched = iteration_schedule(3)
    x = encode(1, InitialState((PI_, P, M)), math.pi, sched)
    expected = np.array([1, 1, 1, -1, 1j, -1j, 1j, -1j]) / (2 * math.sqrt(2))
    assert np.allclose(x.amplitudes, expected, atol=1e-12)
    printed = -expected
    assert np.max(np.abs(np.abs(x.amplitudes) - np.abs(printed))) <= 1e-12


def test_encode_identity_at_zero_phase():
    s = InitialState((MI, PI_))
    x = encode(2, s, 0.0, iteration_schedule(2))
    assert np.allclose(x.amplitudes, s.as_state().amplitudes)


def dense_chain(ops, psi):
    out = psi.amplitudes
    for spec in ops:
        out = reflection_matrix(spec) @ out
    return out


def test_encode_dense_oracle_q4():
    sched = iteration_schedule(4, k1=2)
    s = InitialState((P, P, P, P))
    w = sched.omega_star
    um = ReflectionSpec(PureState.basis(16, 5), w)
    us = ReflectionSpec(s.as_state(), w)
    expected = dense_chain([um, us, um], s.as_state())
    assert np.max(np.abs(encode(5, s, w, sched).amplitudes - expected)) <= 1e-12


def test_encode_with_k1_zero_is_inverse_start():
    sched = iteration_schedule(4, k1=0)
    s = InitialState((P, M, PI_, P))
    w = sched.omega_star
    x = encode(3, s, w, sched)
    # U_M G^{-1} |S> = U_S^{-1} |S>
    assert np.allclose(x.amplitudes, np.exp(-1j * w) * s.as_state().amplitudes)


def test_encode_errors():
    sched = iteration_schedule(3)
    with pytest.raises(DimensionError):
        encode(1, InitialState((P, P)), 1.0, sched)
    with pytest.raises(ValueError):
        encode(8, InitialState((P, P, P)), 1.0, sched)
    with pytest.raises(DimensionError):
        padlock_decode(PureState.uniform(4), InitialState((P, P, P)), 0, 1.0, sched)


def test_padlock_examples():
    for q, omega, expected, tol in [(2, math.pi, 1.0, 1e-12), (3, math.pi, 0.945313, 1e-6), (3, 2.12688, 1.0, 1e-5)]:
        sched = iteration_schedule(q)
        s = InitialState.random(q, np.random.default_rng(q))
        for chunk in range(2**q):
            out = padlock_decode(encode(chunk, s, omega, sched), s, chunk, omega, sched)
            assert outcome_probability(out, chunk) == pytest.approx(expected, abs=tol)


def test_padlock_sequence_q3():
    sched = iteration_schedule(3)
    s = InitialState((MI, P, MI))
    w = sched.omega_star
    x = encode(6, s, w, sched)
    us = ReflectionSpec(s.as_state(), w)
    um = ReflectionSpec(PureState.basis(8, 6), w)
    expected = dense_chain([us, um, us], x)
    assert np.allclose(padlock_decode(x, s, 6, w, sched).amplitudes, expected, atol=1e-12)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_honest_completeness_scalar(q):
    sched = iteration_schedule(q)
    w = sched.omega_star
    for i in range(1, 4**q + 1):
        s = InitialState.from_index(i, q)
        for chunk in range(2**q):
            out = padlock_decode(encode(chunk, s, w, sched), s, chunk, w, sched)
            assert outcome_probability(out, chunk) >= 1 - 1e-9


@pytest.mark.parametrize("q", [5, 6])
def test_honest_completeness_batched(q):
    sched = iteration_schedule(q)
    states = product_state_table(q)
    for chunk in range(2**q):
        p = attack_kernel(Strategy.COMPLETE, states, states, chunk, sched.omega_star, sched)
        assert p.min() >= 1 - 1e-9


@pytest.mark.parametrize("q", [2, 3, 4, 5, 6])
def test_reflection_count(q, monkeypatch):
    calls = []
    real = protocol.apply_reflection

    def counting(state, spec):
        calls.append(spec)
        return real(state, spec)

    monkeypatch.setattr(protocol, "apply_reflection", counting)
    sched = iteration_schedule(q)
    s = InitialState.random(q, np.random.default_rng(0))
    x = encode(1, s, sched.omega_star, sched)
    n_encode = len(calls)
    padlock_decode(x, s, 1, sched.omega_star, sched)
    assert n_encode == 2 * sched.k1 - 1
    assert len(calls) - n_encode == 2 * sched.k2 + 1
    assert len(calls) == 2 * sched.k


def test_variant2_examples():
    s = InitialState((PI_, P, M))
    assert np.allclose(variant2_encode(1, s, 0.0).amplitudes, s.as_state().amplitudes)
    y = PureState.uniform(8)
    assert np.allclose(variant2_decode(y, s, 0.0).amplitudes, y.amplitudes)
    um = ReflectionSpec(PureState.basis(8, 1), math.pi)
    us = ReflectionSpec(s.as_state(), math.pi)
    expected = dense_chain([um, us, um], s.as_state())
    assert np.allclose(variant2_encode(1, s, math.pi).amplitudes, expected, atol=1e-12)
    for w, target, tol in [(math.pi, 0.945313, 1e-6), (iteration_schedule(3).omega_star, 1.0, 1e-5)]:
        out = variant2_decode(variant2_encode(1, s, w), s, w)
        assert outcome_probability(out, 1) == pytest.approx(target, abs=tol)


def test_variant2_requires_three():
    with pytest.raises(ValueError):
        variant2_encode(1, InitialState((P, P)), 1.0)
    with pytest.raises(DimensionError):
        variant2_decode(PureState.uniform(4), InitialState((P, P, P)), 1.0)


@pytest.mark.parametrize("omega", [math.pi, 2.12688, 1.0])
def test_variant_equivalence(omega):
    sched = iteration_schedule(3)
    for i in range(1, 65):
        s = InitialState.from_index(i, 3)
        for chunk in range(8):
            a = variant2_decode(variant2_encode(chunk, s, omega), s, omega)
            b = padlock_decode(encode(chunk, s, omega, sched), s, chunk, omega, sched)
            pa = np.abs(a.amplitudes) ** 2
            pb = np.abs(b.amplitudes) ** 2
            assert np.max(np.abs(pa - pb)) <= 1e-12


def test_honest_run_examples():
    run = honest_run(23, 2, "pi", rng_seed=5)
    assert run.chunks == [1, 1, 3]
    assert all(p == pytest.approx(1, abs=1e-12) for p in run.probabilities)
    assert run.decoded == 23
    run = honest_run(125, 3, "optimal", rng_seed=9)
    assert all(p == pytest.approx(1, abs=1e-9) for p in run.probabilities)
    assert run.decoded == 125
    run = honest_run(125, 3, "pi", rng_seed=9)
    assert all(p == pytest.approx(0.9453125, abs=1e-12) for p in run.probabilities)
    assert honest_run(0, 2, "pi").decoded == 0


def test_honest_run_is_seed_deterministic():
    a = honest_run(987654, 4, "optimal", rng_seed=11)
    b = honest_run(987654, 4, "optimal", rng_seed=11)
    assert a.initial_states == b.initial_states
    assert a.decoded_chunks == b.decoded_chunks


def test_resolve_omega():
    assert resolve_omega("pi", 3) == math.pi
    assert resolve_omega("opt", 3) == iteration_schedule(3).omega_star
    assert resolve_omega(1.5, 3) == 1.5
