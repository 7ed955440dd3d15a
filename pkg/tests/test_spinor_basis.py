import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urfield.fock import make_ladder
from urfield.spinor_basis import (
    BASIS_ROTATION,
    PAULI,
    SpinorAmplitude,
    from_xyzt,
    lift_basis_change,
    to_xyzt,
    weyl_spinor_from_xyzt,
)
from urfield.tensor4 import commutator_matrix, interior_indices, restrict


def test_examples():
    np.testing.assert_array_equal(to_xyzt(SpinorAmplitude(1, 0, 0, 0)), [0.5, 0.5, 0.5, 0.5])
    np.testing.assert_array_equal(to_xyzt(SpinorAmplitude(0.5, 0.5, 0.5, 0.5)), [0, 0, 0, 1])


def test_rotation_is_orthogonal():
    assert np.max(np.abs(BASIS_ROTATION @ BASIS_ROTATION.T - np.eye(4))) <= 1e-15


def test_roundtrip_against_matrix_inverse(rng):
    inv = np.linalg.inv(BASIS_ROTATION)
    for _ in range(100):
        s = SpinorAmplitude(*rng.normal(size=4))
        v = to_xyzt(s)
        np.testing.assert_allclose(inv @ v, s.as_array(), atol=1e-14, rtol=0)
        np.testing.assert_allclose(from_xyzt(v).as_array(), s.as_array(), atol=1e-14, rtol=0)


finite = st.floats(-1e3, 1e3, allow_nan=False)


@settings(max_examples=60)
@given(finite, finite, finite, finite)
def test_spinor_expression_in_new_components(a, b, c, d):
    s = SpinorAmplitude(a, b, c, d)
    np.testing.assert_allclose(weyl_spinor_from_xyzt(to_xyzt(s)), s.weyl_spinor(), atol=1e-9, rtol=1e-12)


@settings(max_examples=60)
@given(finite, finite, finite, finite)
def test_map_preserves_normalization(a, b, c, d):
    s = SpinorAmplitude(a, b, c, d)
    assert np.sum(to_xyzt(s) ** 2) == pytest.approx(s.norm_squared(), rel=1e-12, abs=1e-12)


def test_normalized_amplitude():
    assert SpinorAmplitude(0.5, 0.5, 0.5, 0.5).is_normalized()
    assert not SpinorAmplitude(1, 1, 0, 0).is_normalized()


def test_pauli_constants():
    for k in "xyz":
        s = PAULI[k]
        assert np.array_equal(s @ s, np.eye(2))
        assert np.trace(s) == 0
        assert np.array_equal(s, s.conj().T)
    assert np.array_equal(PAULI["t"], np.eye(2))


def test_lifted_basis_change_canonical():
    n_max = 4
    ops = lift_basis_change(n_max)
    idx = interior_indices(n_max, 1)
    eye = np.eye(len(idx))
    for u, v in itertools.product("xyzt", repeat=2):
        c = restrict(commutator_matrix(ops[u], ops[v].dag()), idx).toarray()
        target = eye if u == v else 0 * eye
        assert np.max(np.abs(c - target)) < 1e-12, (u, v)
        # annihilators mutually commute
        c2 = restrict(commutator_matrix(ops[u], ops[v]), idx).toarray()
        assert np.max(np.abs(c2)) < 1e-12


def test_lifted_basis_change_is_the_linear_combination():
    ops = lift_basis_change(2)
    a = make_ladder("annihilate", 2).dense()
    from conftest import dense_lift

    spinor = [dense_lift(a, p, 2) for p in range(4)]
    for row, label in zip(BASIS_ROTATION, "xyzt"):
        expected = sum(r * m for r, m in zip(row, spinor))
        assert np.max(np.abs(ops[label].dense() - expected)) < 1e-15
