import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from walshmap import (
    DegenerateConfigurationError,
    ModelSet,
    Polynomial,
    PreimageGreen,
    analyze,
    contour_period,
    trace_boundary,
)

from conftest import CATALOGUE


def test_two_component_cubic(problem):
    s = problem("cubic").struct
    assert s.ell == 2 and s.counts == (2, 1)
    # the left component holds the roots +-1/2
    left = s.contours[0]
    assert left.winding_number(0.5) == 1 and left.winding_number(-0.5) == 1
    assert s.contours[1].winding_number(2.0) == 1
    (zc, v), = s.crit_exterior
    assert zc == pytest.approx((2 + math.sqrt(4.75)) / 3, abs=1e-12)
    assert abs(v) > 1
    assert s.symmetry.per_component_conj_symmetric == (True, True)
    assert s.symmetry.left_to_right


def test_star_and_dots(problem):
    star = problem("star").struct
    assert star.ell == 1 and star.counts == (5,)
    assert star.symmetry.E_conj_symmetric
    top = problem("ellipse_top").struct
    assert top.ell == 5 and top.counts == (1,) * 5
    assert not top.symmetry.E_conj_symmetric
    assert problem("ellipse_bottom").struct.ell == 1


@pytest.mark.parametrize("name", sorted(CATALOGUE))
def test_periods_match_counts(problem, name):
    s = problem(name).struct
    for m, nj in zip(s.periods, s.counts):
        assert m == pytest.approx(nj / s.degree, abs=1e-6)
    assert sum(s.periods) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("name", sorted(CATALOGUE))
def test_exterior_critical_points_count(problem, name):
    s = problem(name).struct
    assert len(s.crit_exterior) == s.ell - 1


def test_degenerate_configuration():
    # P(z) = z^2 + 1 has critical value 1 on the unit circle
    with pytest.raises(DegenerateConfigurationError, match="degenerate"):
        analyze(Polynomial([1, 0, 1]), ModelSet.disk())


def test_trace_identity():
    P, D = Polynomial([0, 1]), ModelSet.disk()
    tr = trace_boundary(P, D, analyze(P, D))
    assert len(tr.loops) == 1
    assert np.allclose(np.abs(tr.loops[0].nodes), 1.0, atol=1e-15)


def test_trace_cubic(problem):
    pr = problem("cubic")
    tr = pr.trace
    M = tr.samples_per_turn
    assert [len(lp.nodes) for lp in tr.loops] == [2 * M, M]
    for lp in tr.loops:
        assert np.allclose(np.abs(pr.P(lp.nodes)), 1.0, atol=1e-12)
        # nodes are distinct: the left loop winds twice in omega, once in z
        assert np.abs(np.diff(lp.samples)).min() > 0


def test_trace_star(problem):
    pr = problem("star")
    tr = pr.trace
    (loop,) = tr.loops
    assert len(loop.nodes) == 5 * tr.samples_per_turn
    u = pr.omega.riemann_map(pr.P(loop.nodes), check=False)
    assert np.allclose(np.abs(u), tr.rho, rtol=1e-12)
    # five arms: the loop reaches |z| = 1 along each fifth root of unity
    far = loop.nodes[np.abs(loop.nodes) > 0.999]
    arms = {int(np.rint(np.angle(z) / (2 * np.pi / 5))) % 5 for z in far}
    assert arms == set(range(5))


def _real_components(P, omega, contours, xs):
    """Indices of the components met along the real axis, left to right."""
    inside = omega.contains(P(xs))
    seen = []
    for x in xs[inside]:
        j = next(k for k, c in enumerate(contours) if c.winding_number(x) == 1)
        if not seen or seen[-1] != j:
            seen.append(j)
    return seen


@pytest.mark.parametrize("name", ["cubic", "square", "fixed_point", "odd_cubic_segment", "quartic"])
def test_interlacing(problem, name):
    pr = problem(name)
    s = pr.struct
    xs = np.linspace(-4, 4, 8001)
    order = _real_components(pr.P, pr.omega, s.contours, xs)
    assert order == list(range(s.ell))  # each E_j meets the axis once, labeled left to right
    crit = sorted(complex(z).real for z, _ in s.crit_exterior)
    assert all(abs(complex(z).imag) < 1e-12 for z, _ in s.crit_exterior)
    for j, x in enumerate(crit):
        lo = max(complex(z).real for z in s.contours[j].samples)
        hi = min(complex(z).real for z in s.contours[j + 1].samples)
        assert lo < x < hi


roots = st.floats(-3, 3)


@given(st.lists(roots, min_size=3, max_size=4, unique=True), st.floats(0.5, 3))
def test_random_real_structure(rs, lead):
    P = Polynomial.from_roots(rs, leading=lead)
    omega = ModelSet.disk()
    try:
        s = analyze(P, omega)
    except DegenerateConfigurationError:
        return
    assert sum(s.counts) == P.degree
    assert len(s.crit_exterior) == s.ell - 1
    field = PreimageGreen(P, omega)
    for c, nj in zip(s.contours, s.counts):
        assert contour_period(field, c) == pytest.approx(nj / P.degree, abs=1e-6)
    # each root of P is enclosed by exactly one contour
    for r in rs:
        assert sum(c.winding_number(r) for c in s.contours) == 1
