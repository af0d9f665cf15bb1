import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coherence_lab.errors import DimensionError, InnerProductError, InvalidStateError, NormalizationError
from coherence_lab.qcore import (
    KET0,
    KET1,
    MINUS,
    PLUS,
    BlochVector,
    CoherenceMeasure,
    bloch_from_density,
    bloch_from_state,
    coherence,
    coherence_from_bloch,
    complete_unitary,
    density,
    density_from_bloch,
    haar_random_pure,
    partial_trace,
    state_from_angles,
    tensor,
    validate_density,
    validate_pure,
    von_neumann_entropy,
)
from conftest import random_density
from oracles import naive_partial_trace

L1 = CoherenceMeasure.L1
RE = CoherenceMeasure.RELATIVE_ENTROPY

angles = st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def test_validate_pure_rejects_bad_norm():
    with pytest.raises(NormalizationError) as err:
        validate_pure([0.6, 0.7])
    # 1 - sqrt(0.85)
    assert err.value.deficit == pytest.approx(1 - math.sqrt(0.85))
    with pytest.raises(DimensionError):
        validate_pure([1, 0, 0])


def test_validate_density_checks():
    with pytest.raises(InvalidStateError):
        validate_density([[0.5, 0.3], [0.1, 0.5]])
    with pytest.raises(NormalizationError):
        validate_density(np.eye(2))
    with pytest.raises(InvalidStateError):
        validate_density([[1.2, 0], [0, -0.2]])


def test_l1_coherence_known_values():
    assert coherence(L1, PLUS) == pytest.approx(1.0, abs=1e-15)
    assert coherence(L1, KET0) == 0.0
    # 2|a||b| for a = 0.6, b = 0.8
    assert coherence(L1, [0.6, 0.8]) == pytest.approx(0.96, abs=1e-15)
    ghz = np.zeros(8, dtype=complex)
    ghz[[0, 7]] = 1 / math.sqrt(2)
    assert coherence(L1, ghz) == pytest.approx(1.0)


def test_relative_entropy_coherence():
    assert coherence(RE, PLUS) == pytest.approx(1.0, abs=1e-12)
    assert coherence(RE, np.eye(2) / 2) == pytest.approx(0.0, abs=1e-12)
    # pure state: S(rho) = 0, so C = H(0.36, 0.64)
    h = -(0.36 * math.log2(0.36) + 0.64 * math.log2(0.64))
    assert coherence(RE, [0.6, 0.8]) == pytest.approx(h, abs=1e-12)


def test_entropy_of_maximally_mixed():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(2.0)


@given(angles)
def test_bloch_roundtrip_and_coherence(tp):
    theta, phi = tp
    psi = state_from_angles(theta, phi)
    v = bloch_from_state(psi)
    assert v.norm() == pytest.approx(1.0, abs=1e-12)
    assert v.mz == pytest.approx(math.cos(theta), abs=1e-12)
    assert coherence_from_bloch(v) == pytest.approx(abs(math.sin(theta)), abs=1e-12)
    assert coherence(L1, psi) == pytest.approx(coherence_from_bloch(v), abs=1e-12)
    np.testing.assert_allclose(density_from_bloch(v), density(psi), atol=1e-12)


def test_bloch_vector_outside_ball():
    with pytest.raises(InvalidStateError):
        BlochVector(1.0, 0.1, 0.0)
    with pytest.raises(DimensionError):
        bloch_from_density(np.eye(4) / 4)


def test_tensor_ordering_and_kinds():
    np.testing.assert_array_equal(tensor([KET0, KET1]), [0, 1, 0, 0])
    assert tensor([KET1, KET0, KET1])[5] == 1
    with pytest.raises(TypeError):
        tensor([KET0, density(KET1)])
    with pytest.raises(ValueError):
        tensor([KET0])


def test_partial_trace_product(rng):
    a, b, c = (random_density(rng, 2) for _ in range(3))
    abc = tensor([a, b, c])
    np.testing.assert_allclose(partial_trace(abc, [0], [2, 2, 2]), a, atol=1e-14)
    np.testing.assert_allclose(partial_trace(abc, [1], [2, 2, 2]), b, atol=1e-14)
    np.testing.assert_allclose(partial_trace(abc, [0, 2], [2, 2, 2]), np.kron(a, c), atol=1e-14)


def test_partial_trace_matches_naive_oracle(rng):
    for dims in ([2, 2], [2, 2, 2], [2, 4]):
        rho = random_density(rng, int(np.prod(dims)))
        for keep in ([0], [1], [0, 1]):
            np.testing.assert_allclose(
                partial_trace(rho, keep, dims), naive_partial_trace(rho, keep, dims), atol=1e-12
            )


def test_partial_trace_bad_dims():
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4) / 4, [0], [2, 2, 2])
    with pytest.raises(DimensionError):
        partial_trace(np.eye(4) / 4, [2], [2, 2])


def test_complete_unitary_maps_prescription(rng):
    ins = [np.kron(PLUS, [1, 0, 0, 0]), np.kron(MINUS, [1, 0, 0, 0])]
    outs = [haar_random_pure(3, rng) for _ in range(2)]
    outs[1] = outs[1] - np.vdot(outs[0], outs[1]) * outs[0]
    outs[1] /= np.linalg.norm(outs[1])
    U = complete_unitary(list(zip(ins, outs)))
    assert np.max(np.abs(U.conj().T @ U - np.eye(8))) <= 1e-10
    for i, o in zip(ins, outs):
        np.testing.assert_allclose(U @ i, o, atol=1e-12)


def test_complete_unitary_is_deterministic():
    pairs = [(KET0, PLUS)]
    np.testing.assert_array_equal(complete_unitary(pairs), complete_unitary(pairs))


def test_complete_unitary_rejects_non_orthogonal():
    with pytest.raises(InnerProductError):
        complete_unitary([(KET0, KET0), (KET1, PLUS)])


def test_haar_reproducible_and_normalized():
    a, b = haar_random_pure(2, 7), haar_random_pure(2, 7)
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert not np.allclose(a, haar_random_pure(2, 8))
    # seeds are taken modulo 2**64
    np.testing.assert_array_equal(haar_random_pure(1, -1), haar_random_pure(1, 2**64 - 1))


def test_haar_first_moment():
    # E|<0|psi>|^2 = 1/2 for Haar qubits
    rng = np.random.default_rng(1)
    p0 = np.mean([abs(haar_random_pure(1, rng)[0]) ** 2 for _ in range(4000)])
    assert abs(p0 - 0.5) < 0.02


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 1))
def test_convexity_both_measures(seed, p):
    rng = np.random.default_rng(seed)
    r1, r2 = random_density(rng, 2), random_density(rng, 2, rank=1)
    mix = p * r1 + (1 - p) * r2
    for m in (L1, RE):
        assert coherence(m, mix) <= p * coherence(m, r1) + (1 - p) * coherence(m, r2) + 1e-12
