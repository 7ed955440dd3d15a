import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_hermite

from urfield.errors import PreconditionError
from urfield.position_rep import (
    GridSpec,
    HermiteEvaluator,
    evaluate,
    gauss_hermite,
    hermite_functions,
    overlap_matrix,
    parseval_check,
    phi,
    phi_product,
    synthesize,
    wavefunction_csv,
)
from urfield.tensor4 import StateVector, build_basis_state, vacuum

from conftest import PI_M1, PI_M14


def phi_closed_form(n, x):
    """Explicit-factorial oracle, fine for small n."""
    return eval_hermite(n, x) * np.exp(-x * x / 2) / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))


def test_ground_state_value():
    assert phi(0, 0.0) == pytest.approx(PI_M14, abs=1e-15)
    assert phi(1, 0.0) == 0.0


@pytest.mark.parametrize("n", range(0, 21))
def test_recurrence_matches_closed_form(n):
    x = np.linspace(-6, 6, 121)
    np.testing.assert_allclose(phi(n, x), phi_closed_form(n, x), atol=1e-12, rtol=0)


def test_orthonormality_by_quadrature():
    g = overlap_matrix(12, 13)
    assert np.max(np.abs(g - np.eye(13))) < 1e-10


def test_orthonormality_independent_of_rule_order():
    # a denser rule must agree, the integrand being polynomial times Gaussian
    assert np.max(np.abs(overlap_matrix(12, 40) - np.eye(13))) < 1e-10


def test_quadrature_exact_to_degree():
    rule = gauss_hermite(5)
    # int x^8 exp(-x^2) = 105 sqrt(pi) / 16
    assert np.dot(rule.weights, rule.nodes**8) == pytest.approx(105 * math.sqrt(math.pi) / 16, rel=1e-13)


def test_stability_bound():
    x = np.linspace(-20, 20, 2001)
    t = hermite_functions(64, x)
    assert np.all(np.isfinite(t))
    assert np.max(np.abs(t)) <= 1.0


def test_high_order_finite():
    v = phi(512, np.linspace(-35, 35, 71))
    assert np.all(np.isfinite(v))
    rule = gauss_hermite(200)
    s = hermite_functions(150, rule.nodes, scaled=True)[150]
    assert np.dot(rule.weights, s * s) == pytest.approx(1.0, abs=1e-10)


def test_order_range():
    with pytest.raises(PreconditionError):
        phi(-1, 0.0)
    ev = HermiteEvaluator(5)
    with pytest.raises(PreconditionError):
        ev(6, 0.0)
    assert ev(2, 0.3) == pytest.approx(phi_closed_form(2, 0.3), abs=1e-15)


def test_phi_product_examples(rng):
    assert phi_product((0, 0, 0, 0), (0, 0, 0, 0)) == pytest.approx(PI_M1, abs=1e-15)
    assert phi_product((1, 0, 0, 0), (0.0, 0.3, -1, 2)) == 0.0
    for _ in range(50):
        n = rng.integers(0, 7, size=4)
        X = rng.normal(size=4)
        expected = np.prod([phi(int(k), float(x)) for k, x in zip(n, X)])
        assert phi_product(tuple(n), tuple(X)) == expected


def test_vacuum_synthesizes_gaussian():
    grid = GridSpec({"x": (-3, 3, 13), "t": (-2, 2, 5)}, {"y": 0.5, "z": -1.0})
    wf = synthesize(vacuum(3), grid)
    X = grid.coordinates()
    expected = PI_M1 * np.exp(-0.5 * np.sum(X**2, axis=1))
    assert np.max(np.abs(wf.values - expected)) < 1e-12


def test_first_excited_profile():
    grid = GridSpec({"x": (-4, 4, 41)})
    wf = synthesize(build_basis_state((1, 0, 0, 0), 2), grid)
    x = grid.points("x")
    expected = math.sqrt(2) * x * PI_M14 * np.exp(-x * x / 2) * PI_M14**3
    assert np.max(np.abs(wf.values - expected)) < 1e-12


def test_synthesize_matches_pointwise_sum(rng):
    n = 2
    c = rng.normal(size=81) + 1j * rng.normal(size=81)
    s = StateVector(c, n)
    grid = GridSpec({"x": (-1, 1, 3), "z": (-2, 1, 4)}, {"t": 0.7})
    wf = synthesize(s, grid)
    for X, v in zip(grid.coordinates(), wf.values):
        expected = sum(s.amplitude(N) * phi_product(N, X) for N in itertools.product(range(3), repeat=4))
        assert v == pytest.approx(expected, abs=1e-12)
        assert evaluate(s, X) == pytest.approx(expected, abs=1e-12)


coeffs = st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=16, max_size=16)


@settings(max_examples=25, deadline=None)
@given(coeffs, coeffs, st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_synthesize_is_linear(u, v, alpha):
    grid = GridSpec({"x": (-2, 2, 5), "y": (-1, 1, 3)})
    a, b = StateVector(np.array(u), 1), StateVector(np.array(v), 1)
    lhs = synthesize(alpha * a + b, grid).values
    rhs = alpha * synthesize(a, grid).values + synthesize(b, grid).values
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_parseval_basis_state():
    coeff, quad = parseval_check(build_basis_state((2, 0, 1, 3), 3), 4)
    assert coeff == 1.0
    assert quad == pytest.approx(1.0, abs=1e-10)


def test_parseval_zero_state():
    assert parseval_check(StateVector.zeros(2), 3) == (0.0, 0.0)


def test_parseval_random_state(rng):
    n = 6
    d = (n + 1) ** 4
    idx = rng.choice(d, size=20, replace=False)
    c = np.zeros(d, complex)
    c[idx] = rng.normal(size=20) + 1j * rng.normal(size=20)
    c /= np.linalg.norm(c)
    coeff, quad = parseval_check(StateVector(c, n), 16)
    assert abs(coeff - quad) < 1e-8


def test_parseval_order_check():
    with pytest.raises(PreconditionError):
        parseval_check(vacuum(6), 6)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec({"x": (1, 0, 5)})
    with pytest.raises(ValueError):
        GridSpec({"x": (0, 1, 1)})
    with pytest.raises(ValueError):
        GridSpec({"w": (0, 1, 3)})
    with pytest.raises(ValueError):
        GridSpec({"x": (0, 1, 3)}, {"x": 0.0})


def test_csv_layout():
    grid = GridSpec({"x": (0, 1, 2), "t": (0, 1, 2)})
    text = wavefunction_csv(synthesize(vacuum(1), grid))
    lines = text.splitlines()
    assert lines[0].startswith("# format_version")
    assert lines[1] == "x,y,z,t,re,im"
    assert len(lines) == 2 + 4
    # row-major, x slowest
    assert [tuple(map(float, l.split(",")[:4])) for l in lines[2:]] == [
        (0, 0, 0, 0), (0, 0, 0, 1), (1, 0, 0, 0), (1, 0, 0, 1)
    ]


@pytest.mark.parametrize("s0,s", [(0.0, 0.0), (0.5, -0.5), (1.0, 2.3), (-1.5, 0.2)])
def test_shifted_vacuum_fidelity_closed_form(s0, s):
    """Displaced Gaussians overlap as exp(-(s - s0)^2 / 2)."""
    from urfield.position_rep import shifted_vacuum_fidelity

    n = 40
    alpha = s0 / math.sqrt(2)
    c = np.zeros((n + 1,) * 4, complex)
    c[:, 0, 0, 0] = [math.exp(-alpha**2 / 2) * alpha**k / math.sqrt(math.factorial(k)) for k in range(n + 1)]
    f = shifted_vacuum_fidelity(StateVector(c.ravel(), n), s)
    assert f == pytest.approx(math.exp(-((s - s0) ** 2) / 2), abs=1e-12)
