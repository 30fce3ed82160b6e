import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walshmap import (
    ModelSet,
    Polynomial,
    UnsolvedError,
    analyze,
    capacity,
    centers_general,
    centers_two_components,
    exponents,
    moment_centers,
    solve,
    validate_scheme,
)
from walshmap.solver import centers_fixed_point, make_scheme

from conftest import CATALOGUE, solved

# mpmath oracle values (30 digits, rounded)
CUBIC_A1 = 0.031271952284405421
CUBIC_A2 = 1.9374560954311892
ELLIPSE_RADIUS = 0.92358279802013656  # (|Psi(0.3i)| / 1.6)^(1/5)
SEGMENT_CUBIC_A = 1.9817664818701716  # a^3 = -(3 sqrt3 / 4) Psi(-16 / (3 sqrt3))


def test_capacity_and_exponents(problem):
    assert capacity(*CATALOGUE["star"]) == pytest.approx(2 ** (-1 / 5), abs=1e-15)
    assert capacity(*CATALOGUE["quartic"]) == pytest.approx(5 ** 0.25 / 2, abs=1e-15)
    assert capacity(*CATALOGUE["cubic"]) == 1.0
    assert exponents(problem("cubic").struct) == (Fraction(2, 3), Fraction(1, 3))
    assert exponents(problem("ellipse_top").struct) == (Fraction(1, 5),) * 5
    assert exponents(problem("star").struct) == (Fraction(1),)


def test_affine(problem):
    sch = problem("affine").scheme
    assert sch.provenance == "linear"
    assert sch.centers[0] == pytest.approx(-0.5, abs=1e-15)
    assert sch.capacity == pytest.approx(0.25, abs=1e-15)


def test_connected_quartic(problem):
    sch = problem("quartic").scheme
    assert sch.provenance == "connected"
    assert abs(sch.centers[0]) < 1e-12


def test_monomial_family(problem):
    sch = problem("ellipse_top").scheme
    assert sch.provenance == "monomial_family"
    expected = 1 + ELLIPSE_RADIUS * np.exp(1j * (-np.pi / 10 + 2 * np.pi * np.arange(5) / 5))
    got = np.array(sch.centers)
    for a in expected:
        assert np.min(np.abs(got - a)) < 1e-12


def test_two_component_cubic(problem):
    pr = problem("cubic")
    assert pr.scheme.provenance == "two_components"
    a1, a2 = pr.scheme.centers
    assert a1 == pytest.approx(CUBIC_A1, abs=1e-12)
    assert a2 == pytest.approx(CUBIC_A2, abs=1e-12)
    # values quoted for this example, at their stated tolerance
    assert abs(a1 - 0.0312680) < 1e-5 and abs(a2 - 1.9374640) < 1e-5


def test_mirrored_cubic_negates_and_swaps(problem):
    P = Polynomial([-0.5, -0.25, 2.0, 1.0])  # -P(-z), same pre-image reflected
    s = analyze(P, ModelSet.disk())
    a = centers_two_components(P, ModelSet.disk(), s)
    assert s.counts == (1, 2)
    assert a[0] == pytest.approx(-CUBIC_A2, abs=1e-12)
    assert a[1] == pytest.approx(-CUBIC_A1, abs=1e-12)


def test_square_two_routes_agree(problem):
    P, D = CATALOGUE["square"]
    s = problem("square").struct
    a = np.array(centers_two_components(P, D, s))
    b = np.array(centers_fixed_point(P, D, s))
    assert np.allclose(a, [-2, 2], atol=1e-12)
    assert np.max(np.abs(a - b)) < 1e-10


def test_fixed_point(problem):
    pr = problem("fixed_point")
    assert pr.scheme.provenance == "fixed_point"
    assert np.allclose(pr.scheme.centers, [-2, 2], atol=1e-12)
    rep = validate_scheme(pr.scheme, pr.P, pr.omega, pr.struct)
    assert rep.residual < 1e-10


def test_general_newton_three_components():
    # odd cubic over the segment, no closed form; ordered, real, summing to 0
    P, S = CATALOGUE["odd_cubic_segment"]
    s = analyze(P, S)
    a = np.array(centers_general(P, S, s))
    assert s.ell == 3
    assert np.allclose(a.imag, 0, atol=1e-12)
    assert np.all(np.diff(a.real) > 0)
    assert a.real == pytest.approx([-SEGMENT_CUBIC_A, 0, SEGMENT_CUBIC_A], abs=1e-10)


def test_general_newton_matches_closed_form(problem):
    pr = problem("ellipse_top")
    a = np.array(centers_general(pr.P, pr.omega, pr.struct))
    assert np.max(np.abs(a - np.array(pr.scheme.centers))) < 1e-8


def test_moment_oracle(problem):
    for name in ("cubic", "ellipse_top", "odd_cubic_segment"):
        pr = problem(name)
        m = np.array(moment_centers(pr.scheme, pr.P, pr.omega, pr.struct))
        assert np.max(np.abs(m - np.array(pr.scheme.centers))) < 1e-10


def test_validation_detects_perturbation(problem):
    pr = problem("cubic")
    good = validate_scheme(pr.scheme, pr.P, pr.omega, pr.struct)
    assert good.ok() and good.residual < 1e-8
    a1, a2 = pr.scheme.centers
    bad = make_scheme(pr.P, pr.omega, [a1, a2 + 1e-3], pr.scheme.counts, "perturbed")
    rep = validate_scheme(bad, pr.P, pr.omega, pr.struct)
    assert rep.residual > 1e-4
    assert not rep.ok()


def test_unsolved_error_carries_diagnostics(problem, monkeypatch):
    import walshmap.solver as solver

    pr = problem("cubic")
    bad = make_scheme(pr.P, pr.omega, [0.0, 2.0], pr.scheme.counts, "wrong")
    monkeypatch.setattr(solver, "centers_two_components", lambda *a, **k: bad.centers)
    monkeypatch.setattr(solver, "centers_general", lambda *a, **k: bad.centers)
    with pytest.raises(UnsolvedError) as info:
        solver.solve(pr.P, pr.omega, pr.struct)
    assert info.value.diagnostics


@pytest.mark.parametrize("name", sorted(CATALOGUE))
def test_scheme_invariants(problem, name):
    pr = problem(name)
    sch = pr.scheme
    n = pr.P.degree
    assert sum(sch.exponents) == 1
    assert [m * n for m in sch.exponents] == list(sch.counts)
    # sum n_j a_j = -p_{n-1} / p_n
    if n > 1:
        total = sum(c * a for c, a in zip(sch.counts, sch.centers))
        assert abs(total + pr.P.subleading / pr.P.leading) < 1e-10 * (1 + abs(total))
    assert sch.capacity == pytest.approx(capacity(pr.P, pr.omega), rel=1e-14)


@pytest.mark.parametrize("name", ["cubic", "square", "fixed_point", "odd_cubic_segment", "quartic", "star"])
def test_real_input_gives_real_ordered_centers(problem, name):
    a = np.array(problem(name).scheme.centers)
    assert np.allclose(a.imag, 0, atol=1e-12)
    assert np.all(np.diff(a.real) > 0)


@given(st.floats(-2, 2), st.floats(0.2, 1.5), st.floats(0.5, 2), st.sampled_from(["disk", "segment"]))
def test_conjugate_input_conjugates_centers(re, im, lead, kind):
    # complex cubic and its conjugate: centers must conjugate
    omega = ModelSet(kind)
    P = Polynomial.from_roots([complex(re, im), -1.0, 2.0 - 0.5j], leading=lead)
    Pc = Polynomial(np.conj(P.coeffs))
    try:
        s, sc = analyze(P, omega), analyze(Pc, omega)
    except Exception:
        return
    a = np.array(solve(P, omega, s).centers)
    b = np.array(solve(Pc, omega, sc).centers)
    d = np.abs(np.conj(a)[:, None] - b[None, :]).min(axis=1)
    assert d.max() < 1e-9
