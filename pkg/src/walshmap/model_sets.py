"""Model sets Omega: closed unit disk, segment [-1, 1], Chebyshev ellipse.

Each carries its exterior Riemann map ``Psi`` onto the exterior of the closed
unit disk, normalized by ``Psi(z) = d1 z + d0 + O(1/z)`` with ``d1 > 0``.
All maps are vectorized over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ModelSet", "joukowski_exterior", "NotExteriorError"]

KINDS = ("disk", "segment", "ellipse")


class NotExteriorError(ValueError):
    pass


def joukowski_exterior(z):
    """``z + sqrt(z^2 - 1)`` on the branch with modulus >= 1.

    The two values ``z +- sqrt(z^2-1)`` multiply to one, so taking the
    principal product ``sqrt(z-1) sqrt(z+1)`` and inverting whenever the
    modulus drops below one avoids any cut off the segment itself.
    """
    z = np.asarray(z, dtype=complex)
    u = z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(np.abs(u) < 1.0, 1.0 / u, u)
    return u


def _out(x):
    return complex(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class ModelSet:
    """One of the three model sets; ``R`` is only used by the ellipse."""

    kind: str
    R: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model set kind {self.kind!r}")
        if self.kind == "ellipse":
            if self.R is None or not self.R > 1.0:
                raise ValueError("ChebyshevEllipse requires R > 1")
        elif self.R is not None:
            raise ValueError(f"{self.kind} takes no parameter R")

    @classmethod
    def disk(cls):
        return cls("disk")

    @classmethod
    def segment(cls):
        return cls("segment")

    @classmethod
    def ellipse(cls, R):
        return cls("ellipse", float(R))

    def __str__(self):
        return f"ellipse(R={self.R:g})" if self.kind == "ellipse" else self.kind

    # Laurent data at infinity --------------------------------------------
    @property
    def d1(self):
        return {"disk": 1.0, "segment": 2.0}.get(self.kind) or 2.0 / self.R

    @property
    def d0(self):
        # all three maps are odd
        return 0j

    @property
    def capacity(self):
        return 1.0 / self.d1

    def laurent_data(self):
        return self.d1, self.d0, self.capacity

    # Maps -----------------------------------------------------------------
    def _psi(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return z.copy()
        u = joukowski_exterior(z)
        return u if self.kind == "segment" else u / self.R

    def riemann_map(self, z, check=True):
        """Exterior Riemann map; raises for points of Omega when ``check``."""
        u = self._psi(z)
        if check and np.any(~(np.abs(u) > 1.0)):
            raise NotExteriorError("point not in exterior")
        return _out(u)

    def riemann_map_derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return _out(np.ones_like(z))
        u = joukowski_exterior(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = u / (u - z)  # u - z = sqrt(z^2 - 1) on the chosen branch
        return _out(d if self.kind == "segment" else d / self.R)

    def riemann_map_difference(self, x0, h):
        """``Psi(x0 + h) - Psi(x0)`` without cancellation for small ``h``.

        With ``s = u - x`` (``s^2 = x^2 - 1``), ``s1 - s0 = h (x1 + x0) / (s1 + s0)``
        as long as both lie on one branch, which ``|s1 + s0| >= |s0|`` confirms.
        """
        x0 = np.asarray(x0, dtype=complex)
        h = np.asarray(h, dtype=complex)
        if self.kind == "disk":
            return _out(h + 0.0 * x0)
        x1 = x0 + h
        u0, u1 = joukowski_exterior(x0), joukowski_exterior(x1)
        s0, s1 = u0 - x0, u1 - x1
        with np.errstate(divide="ignore", invalid="ignore"):
            small = h + h * (x1 + x0) / (s1 + s0)
        d = np.where(np.abs(s1 + s0) >= np.abs(s0), small, u1 - u0)
        return _out(d if self.kind == "segment" else d / self.R)

    def inverse_riemann_map(self, u):
        """Point of the exterior with ``Psi(z) = u`` (``|u| >= 1``)."""
        u = np.asarray(u, dtype=complex)
        if self.kind == "disk":
            return _out(u.copy())
        s = u if self.kind == "segment" else self.R * u
        return _out(0.5 * (s + 1.0 / s))

    def inverse_riemann_map_derivative(self, u):
        u = np.asarray(u, dtype=complex)
        if self.kind == "disk":
            return _out(np.ones_like(u))
        r = 1.0 if self.kind == "segment" else self.R
        return _out(0.5 * (r - 1.0 / (r * u * u)))

    def boundary(self, t):
        """Positively oriented boundary parameterization ``Psi^{-1}(e^{it})``."""
        return self.inverse_riemann_map(np.exp(1j * np.asarray(t, dtype=float)))

    def green(self, z, check=True):
        """``g_Omega(z) = log|Psi(z)|``."""
        u = self._psi(z)
        if check and np.any(~(np.abs(u) > 1.0)):
            raise NotExteriorError("point not in exterior")
        out = np.log(np.abs(u))
        return float(out) if np.ndim(out) == 0 else out

    # Membership -------------------------------------------------------------
    def contains(self, w, tol=None):
        w = np.asarray(w, dtype=complex)
        if tol is None:
            tol = 1e-12 * (1.0 + np.abs(w))
        if self.kind == "disk":
            out = np.abs(w) <= 1.0 + tol
        else:
            on_seg = (np.abs(w.imag) <= tol) & (np.abs(w.real) <= 1.0 + tol)
            if self.kind == "segment":
                out = on_seg
            else:
                out = on_seg | (np.abs(joukowski_exterior(w)) <= self.R + tol)
        return bool(out) if out.ndim == 0 else out

    def boundary_gap(self, w):
        """Rough distance-like gap between ``w`` and the boundary of Omega.

        Zero on the boundary; used to reject critical values that touch it.
        The segment has empty interior: a critical value anywhere on it
        (endpoints included) puts the critical point on a smooth arc of E,
        so only values outside but numerically close to it are degenerate.
        """
        w = np.asarray(w, dtype=complex)
        if self.kind == "disk":
            out = np.abs(np.abs(w) - 1.0)
        elif self.kind == "segment":
            inside = self.contains(w)
            out = np.where(inside, np.inf, np.log(np.abs(joukowski_exterior(w))))
        else:
            out = np.abs(np.log(np.abs(joukowski_exterior(w)) / self.R))
        return float(out) if out.ndim == 0 else out

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "ellipse":
            d["R"] = self.R
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind")
        if kind == "ellipse":
            return cls.ellipse(d.get("R", float("nan")))
        return cls(kind)
