import functools
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import settings

from walshmap import ModelSet, Polynomial, analyze, solve, trace_boundary

settings.register_profile("walshmap", deadline=None, max_examples=20, derandomize=True)
settings.load_profile("walshmap")


def _poly(coeffs):
    return Polynomial([complex(c) for c in coeffs])


# name -> (ascending coefficients, model set)
CATALOGUE = {
    "star": (_poly([0, 0, 0, 0, 0, 1]), ModelSet.segment()),
    "ellipse_top": (Polynomial.from_roots([1] * 5) + 0.3j, ModelSet.ellipse(1.25)),
    "ellipse_bottom": (Polynomial.from_roots([1] * 5) + 0.75, ModelSet.ellipse(1.25)),
    "disk_connected": (Polynomial.from_roots([-1] * 7, leading=0.5) + 0.75, ModelSet.disk()),
    "disk_outside": (Polynomial.from_roots([0.5] * 4, leading=2.0) + 3.0, ModelSet.disk()),
    "quartic": (_poly([1, 0, -8 / 5, 0, 8 / 5]), ModelSet.segment()),
    "fixed_point": (_poly([8, -4, -2, 1]), ModelSet.disk()),
    "cubic": (_poly([0.5, -0.25, -2, 1]), ModelSet.disk()),
    "affine": (_poly([1, 2]), ModelSet.segment()),
    "square": (_poly([-4, 0, 1]), ModelSet.disk()),
    "odd_cubic_segment": (_poly([0, -4, 0, 1]), ModelSet.segment()),
}


@dataclass(frozen=True)
class Solved:
    P: Polynomial
    omega: ModelSet
    struct: object
    scheme: object
    trace: object


@functools.lru_cache(maxsize=None)
def solved(name):
    P, omega = CATALOGUE[name]
    struct = analyze(P, omega)
    trace = trace_boundary(P, omega, struct)
    return Solved(P, omega, struct, solve(P, omega, struct, boundary=trace), trace)


@pytest.fixture(scope="session")
def problem():
    return solved


def ring(center, radius, count):
    t = 2 * np.pi * np.arange(count) / count
    return center + radius * np.exp(1j * t)
