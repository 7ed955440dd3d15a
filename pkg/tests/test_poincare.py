import itertools
import json

import numpy as np
import pytest
import scipy.linalg

from urfield.errors import CutoffError, NormLeakError, PreconditionError
from urfield.fock import make_ladder
from urfield.poincare import (
    LORENTZ,
    MOSTLY_MINUS,
    MOSTLY_PLUS,
    MetricSignature,
    TransformParameters,
    audit_algebra,
    best_sign,
    build_generators,
    build_phase_space,
    poincare_transform,
)
from urfield.position_rep import shifted_vacuum_fidelity
from urfield.tensor4 import (
    ModeId,
    StateVector,
    build_basis_state,
    commutator_matrix,
    interior_indices,
    lift,
    restrict,
    total_number,
    vacuum,
)

from conftest import dense_annihilator, dense_lift, interior_selector


@pytest.fixture(scope="module")
def gens4():
    return build_generators(4)


@pytest.fixture(scope="module")
def gens6():
    return build_generators(6)


def dense_phase_space(n_max):
    """Oracle built from numpy kron products only."""
    a = dense_annihilator(n_max)
    q1 = (a + a.conj().T) / np.sqrt(2)
    p1 = -1j * (a - a.conj().T) / np.sqrt(2)
    q = {lbl: dense_lift(q1, i, n_max) for i, lbl in enumerate("xyzt")}
    p = {lbl: dense_lift(p1, i, n_max) for i, lbl in enumerate("xyzt")}
    return q, p


def test_phase_space_matches_dense_oracle():
    ps = build_phase_space(2)
    q, p = dense_phase_space(2)
    for lbl in "xyzt":
        assert np.max(np.abs(ps.position[lbl].dense() - q[lbl])) < 1e-15
        assert np.max(np.abs(ps.momentum[lbl].dense() - p[lbl])) < 1e-15


def test_hermitian_exactly(gens4):
    ps = gens4.phase_space
    ops = list(ps.position.values()) + list(ps.momentum.values()) + list(gens4.P.values())
    ops += [gens4.M[k] for k in LORENTZ]
    for op in ops:
        m = op.matrix
        assert (m - m.conj().T).count_nonzero() == 0


def test_heisenberg_dense_oracle():
    n = 3
    q, p = dense_phase_space(n)
    idx = interior_selector(n, 1)
    for i, j in itertools.product("xyzt", repeat=2):
        c = (q[i] @ p[j] - p[j] @ q[i])[np.ix_(idx, idx)]
        target = 1j * np.eye(len(idx)) if i == j else 0
        assert np.max(np.abs(c - target)) < 1e-12


def test_disjoint_mode_commutators_exact(gens4):
    ps = gens4.phase_space
    for i, j in itertools.permutations("xyzt", 2):
        assert commutator_matrix(ps.position[i], ps.momentum[j]).count_nonzero() == 0


def test_inverse_relations(gens4):
    ps = gens4.phase_space
    for lbl in "xyzt":
        a = lift(make_ladder("annihilate", 4), ModeId(lbl)).dense()
        rebuilt = ((ps.position[lbl] + 1j * ps.momentum[lbl]) / np.sqrt(2)).dense()
        assert np.max(np.abs(rebuilt - a)) < 1e-14
        rebuilt_dag = ((ps.position[lbl] - 1j * ps.momentum[lbl]) / np.sqrt(2)).dense()
        assert np.max(np.abs(rebuilt_dag - a.conj().T)) < 1e-14


@pytest.mark.parametrize("n_max", [1, 3, 5])
def test_translations_commute_exactly(n_max):
    g = build_generators(n_max)
    for mu, nu in itertools.combinations(range(4), 2):
        assert commutator_matrix(g.P[mu], g.P[nu]).count_nonzero() == 0


def test_m12_p1_is_i_p2_up_to_sign(gens6):
    idx = interior_indices(6, 2)
    lhs = restrict(commutator_matrix(gens6.M[(1, 2)], gens6.P[1]), idx)
    rhs = 1j * restrict(gens6.P[2].matrix, idx)
    s, r = best_sign(lhs, rhs)
    assert r < 1e-10
    # dense evaluation of the same commutator, x p_y - y p_x against p_x
    q, p = dense_phase_space(3)
    m12 = q["x"] @ p["y"] - q["y"] @ p["x"]
    sel = interior_selector(3, 2)
    c = (m12 @ p["x"] - p["x"] @ m12)[np.ix_(sel, sel)]
    assert np.max(np.abs(c - s * 1j * p["y"][np.ix_(sel, sel)])) < 1e-12
    assert s == 1


def test_form_signs_dense_oracle():
    """Expand both printed forms densely and compare for each sign."""
    n = 2
    q, p = dense_phase_space(n)
    a1 = dense_annihilator(n)
    a = {lbl: dense_lift(a1, i, n) for i, lbl in enumerate("xyzt")}
    ad = {k: v.conj().T for k, v in a.items()}
    xp = {
        "M12": q["x"] @ p["y"] - q["y"] @ p["x"],
        "M01": q["t"] @ p["x"] + q["x"] @ p["t"],
    }
    ladder = {
        "M12": 1j * (ad["x"] @ a["y"] - ad["y"] @ a["x"]),
        "M01": 1j * (a["t"] @ a["x"] - ad["x"] @ ad["t"]),
    }
    g = build_generators(n)
    rep = audit_algebra(build_generators(3), MOSTLY_MINUS, 2)
    for name, key in (("M12", (1, 2)), ("M01", (0, 1))):
        plus = np.max(np.abs(xp[name] - ladder[name]))
        minus = np.max(np.abs(xp[name] + ladder[name]))
        oracle_sign = 1 if plus <= minus else -1
        assert min(plus, minus) < 1e-12
        assert rep.form_signs[name] == oracle_sign
        assert np.max(np.abs(g.M[key].dense() - xp[name])) < 1e-14


def test_rotations_conserve_number_exactly(gens4):
    n = total_number(4)
    for k in ((1, 2), (1, 3), (2, 3)):
        assert commutator_matrix(gens4.M[k], n).count_nonzero() == 0


def test_boosts_change_number_by_two(gens4):
    m = gens4.M[(0, 1)].matrix.tocoo()
    totals = np.indices((5,) * 4).reshape(4, -1).sum(axis=0)
    assert set(np.abs(totals[m.row] - totals[m.col])) == {2}


# -- audit ---------------------------------------------------------------------


def test_audit_counts(gens4):
    rep = audit_algebra(gens4, "+---", 2)
    counts = {s: len(rep.sector(s)) for s in ("PP", "MP", "MM", "heisenberg", "form", "rotation_closure")}
    assert counts == {"PP": 6, "MP": 24, "MM": 15, "heisenberg": 16, "form": 6, "rotation_closure": 3}


@pytest.mark.parametrize("sig", [MOSTLY_MINUS, MOSTLY_PLUS])
def test_audit_translation_sector(gens4, sig):
    rep = audit_algebra(gens4, sig, 2)
    assert rep.max_residual("PP") <= 1e-14
    assert rep.signature == str(sig)


def test_rotation_closure_n6(gens6):
    rep = audit_algebra(gens6, "-+++", 2)
    assert rep.max_residual("rotation_closure") < 1e-10
    assert rep.rotation_closure_consistent
    assert rep.failures() == []


def test_signature_changes_realized_signs(gens4):
    a = {e.relation: e.best_sign for e in audit_algebra(gens4, "+---", 2).sector("MP")}
    b = {e.relation: e.best_sign for e in audit_algebra(gens4, "-+++", 2).sector("MP")}
    # [M12, P1] = i eta_11 P2: flipping eta_11 flips the fitted sign
    assert a["[M12,P1]"] == -b["[M12,P1]"]


def test_audit_deterministic(gens4):
    a = audit_algebra(gens4, "+---", 2).to_json()
    b = audit_algebra(build_generators(4), "+---", 2).to_json()
    assert a == b
    doc = json.loads(a)
    entry = doc["entries"][0]
    assert set(entry) >= {"relation", "lhs", "rhs", "signature", "best_sign", "residual", "margin", "cutoff"}


def test_audit_margin_precondition(gens4):
    with pytest.raises(PreconditionError):
        audit_algebra(gens4, "+---", 1)
    with pytest.raises(PreconditionError):
        audit_algebra(gens4, "+---", 4)
    rep = audit_algebra(gens4, "+---", 1, include_boosts=False)
    assert len(rep.sector("form")) == 3


def test_best_sign_tie_prefers_plus():
    import scipy.sparse as sp

    z = sp.csr_matrix((3, 3), dtype=complex)
    assert best_sign(z, z) == (1, 0.0)
    e = sp.identity(3, dtype=complex, format="csr")
    assert best_sign(e, -e)[0] == -1


def test_metric_parse():
    assert MetricSignature.parse("+---") == MOSTLY_MINUS
    assert str(MOSTLY_PLUS) == "-+++"
    for bad in ("++", "++++", "++-+", "+--x"):
        with pytest.raises(ValueError):
            MetricSignature.parse(bad)


# -- transforms ------------------------------------------------------------------


def test_zero_parameters_identity(gens4, rng):
    idx = interior_indices(4, 2)
    c = np.zeros(625, complex)
    c[idx] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    s = StateVector(c, 4)
    out = poincare_transform(s, TransformParameters(), gens4)
    assert np.array_equal(out.state.coefficients, s.coefficients)
    assert out.leak == 0


def test_sparse_exponential_branch_agrees(gens4, monkeypatch):
    import urfield.poincare as pc

    s = StateVector.from_terms({(0, 0, 0, 0): 1.0}, 4)
    params = TransformParameters.rotation(0, 1, 0.1)
    dense = poincare_transform(s, params, gens4).state.coefficients
    monkeypatch.setattr(pc, "DENSE_EXPM_LIMIT", 1)
    sparse = poincare_transform(s, params, gens4).state.coefficients
    assert np.max(np.abs(dense - sparse)) < 1e-12


def test_rotation_quarter_turn(gens4):
    res = poincare_transform(build_basis_state((1, 0, 0, 0), 4), TransformParameters.rotation(1, 2, np.pi / 2), gens4)
    # oracle: on span{|1000>, |0100>} M12 = [[0, -i], [i, 0]]
    block = np.array([[0, -1j], [1j, 0]])
    u = scipy.linalg.expm(1j * np.pi / 2 * block)
    expected = u @ np.array([1, 0])
    got = np.array([res.state.amplitude((1, 0, 0, 0)), res.state.amplitude((0, 1, 0, 0))])
    assert np.max(np.abs(got - expected)) < 1e-12
    assert abs(res.state.amplitude((0, 1, 0, 0))) ** 2 > 1 - 1e-10


def test_m12_block_matches_oracle(gens4):
    i1, i2 = (build_basis_state(o, 4) for o in ((1, 0, 0, 0), (0, 1, 0, 0)))
    m = gens4.M[(1, 2)].matrix
    block = np.array([[np.vdot(a.coefficients, m @ b.coefficients) for b in (i1, i2)] for a in (i1, i2)])
    np.testing.assert_allclose(block, [[0, -1j], [1j, 0]], atol=1e-15)


def test_translation_shifts_vacuum():
    n = 32
    res = poincare_transform(vacuum(n), TransformParameters.shift(1, 0.5), build_generators(n))
    f_minus = shifted_vacuum_fidelity(res.state, -0.5)
    f_plus = shifted_vacuum_fidelity(res.state, 0.5)
    # exp(i a p) moves the packet by -a
    assert f_minus > 0.999
    assert f_plus < 0.7
    assert abs(res.state.norm() - 1) < 1e-8


def test_general_transform_unitary(rng):
    n = 5
    g = build_generators(n)
    s = StateVector.from_terms({(0, 0, 0, 0): 0.6, (1, 0, 0, 0): 0.8j}, n)
    w = np.zeros((4, 4))
    for (mu, nu), v in zip(LORENTZ, rng.normal(scale=0.02, size=6)):
        w[mu, nu], w[nu, mu] = v, -v
    params = TransformParameters(rng.normal(scale=0.05, size=4), w)
    res = poincare_transform(s, params, g)
    assert abs(res.state.norm() - 1) < 1e-8
    # compare against full dense expm of the generator combination
    h = sum(params.translation[mu] * g.P[mu].dense() for mu in range(4))
    h = h + sum(params.omega[k] * g.M[k].dense() for k in LORENTZ)
    expected = scipy.linalg.expm(1j * h) @ s.coefficients
    assert np.max(np.abs(res.state.coefficients - expected)) < 1e-12


def test_leak_threshold(gens4):
    with pytest.raises(NormLeakError) as info:
        poincare_transform(vacuum(4), TransformParameters.shift(1, 3.0), gens4)
    assert info.value.leak > 1e-3


def test_transform_cutoff_mismatch(gens4):
    with pytest.raises(CutoffError):
        poincare_transform(vacuum(3), TransformParameters(), gens4)


def test_omega_must_be_antisymmetric():
    w = np.zeros((4, 4))
    w[1, 2] = 1
    with pytest.raises(ValueError):
        TransformParameters(omega=w)
