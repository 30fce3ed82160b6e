import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walshmap import Polynomial, RootFindingError, aberth

CUBIC = Polynomial([0.5, -0.25, -2.0, 1.0])  # (z - 2)(z^2 - 1/4)
Z_PLUS = (2 + math.sqrt(4.75)) / 3
Z_MINUS = (2 - math.sqrt(4.75)) / 3


def test_evaluate_examples():
    assert Polynomial([0, 0, 0, 0, 0, 1])(1.0) == 1
    assert CUBIC(Z_MINUS) == pytest.approx(0.5075840734, abs=1e-10)
    quartic = Polynomial([1, 0, -8 / 5, 0, 8 / 5])
    assert quartic(0.0) == 1


def test_evaluate_broadcasts():
    z = np.array([[0, 1], [2, 1j]])
    v = CUBIC(z)
    assert v.shape == (2, 2)
    assert v[1, 0] == 0


def test_derivative():
    assert np.allclose(Polynomial([0, 0, 0, 0, 0, 1]).derivative().coeffs, [0, 0, 0, 0, 5])
    assert np.allclose(CUBIC.derivative().coeffs, [-0.25, -4, 3])
    with pytest.raises(ValueError, match="constant has no derivative"):
        Polynomial([7.0]).derivative()


def test_roots_examples():
    assert np.allclose(np.sort(Polynomial([-1, 0, 1]).roots().real), [-1, 1])
    r = CUBIC.derivative().roots()
    assert np.allclose(np.sort(r.real), [Z_MINUS, Z_PLUS], atol=1e-13)
    fifth = Polynomial([-32, 0, 0, 0, 0, 1]).roots()
    assert np.allclose(np.abs(fifth), 2, atol=1e-13)
    gaps = np.abs(fifth[:, None] - fifth[None, :])
    np.fill_diagonal(gaps, np.inf)
    assert gaps.min() > 2.0


def test_multiple_roots_are_clustered():
    P = Polynomial.from_roots([1.5] * 4, leading=3.0) + 2j
    crit = P.critical_points()
    assert len(crit) == 3
    assert np.allclose(crit, 1.5, atol=1e-10)
    assert np.allclose(Polynomial([0, 0, 1]).critical_points(), [0])
    (r, m), = Polynomial.from_roots([0.25] * 3).roots_with_multiplicity()
    assert m == 3 and abs(r - 0.25) < 1e-12


def test_monomial_form():
    alpha, beta, gamma = (Polynomial.from_roots([1] * 5, leading=2j) + 0.3).monomial_form()
    assert abs(alpha - 2j) < 1e-14 and abs(beta - 1) < 1e-12 and abs(gamma - 0.3) < 1e-12
    assert CUBIC.monomial_form() is None


def test_aberth_flags_nonconvergence():
    c = np.array([1.0] + [0.0] * 11 + [1.0])
    _, converged = aberth(c, maxiter=1)
    assert not converged
    _, converged = aberth(c)
    assert converged


def test_roots_error_carries_best_iterate():
    with pytest.raises(RootFindingError) as info:
        Polynomial([1.0] + [0.0] * 11 + [1.0]).roots(maxiter=1)
    assert info.value.best is not None
    assert info.value.residual is not None


coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(st.lists(coeff, min_size=2, max_size=9), coeff.filter(lambda c: abs(c) > 0.1))
def test_roots_reconstruct_polynomial(roots, lead):
    P = Polynomial.from_roots(roots, leading=lead)
    found = P.roots()
    assert len(found) == P.degree
    rebuilt = Polynomial.from_roots(found, leading=lead)
    scale = np.max(np.abs(P.coeffs))
    assert np.max(np.abs(rebuilt.coeffs - P.coeffs)) <= 1e-7 * scale


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=8))
def test_real_polynomial_roots_closed_under_conjugation(coeffs):
    P = Polynomial(coeffs + [1.0])
    r = P.roots()
    d = np.abs(np.conj(r)[:, None] - r[None, :]).min(axis=1)
    assert d.max() <= 1e-6 * (1 + np.abs(r).max())
