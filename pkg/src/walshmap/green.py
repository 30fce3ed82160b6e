"""Green's functions with pole at infinity and their contour integrals.

Two fields share one small interface (``value``, ``dz``):

* ``PreimageGreen`` for ``E = P^{-1}(Omega)``:
  ``g_E(z) = log|Psi(P(z))| / n`` and
  ``2 d_z g_E = Psi'(P) P' / (n Psi(P))``.
* ``LemniscateGreen`` for the lemniscatic set of a scheme:
  ``g_L(w) = sum m_j log|w - a_j| - log cap`` and
  ``2 d_w g_L = sum m_j / (w - a_j)``.

``dz`` always returns the full ``2 d_z g`` (an analytic function), which is
the integrand of the period and moment integrals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ContourPath",
    "PreimageGreen",
    "LemniscateGreen",
    "IntegrationAccuracyError",
    "green_E",
    "dz_green_E",
    "green_L",
    "dw_green_L",
    "contour_period",
    "contour_moment",
    "spectral_derivative",
]


class IntegrationAccuracyError(ArithmeticError):
    """Closed-loop integral failed its reality check; double the samples."""


def _out(x):
    return complex(x) if np.ndim(x) == 0 else x


class PreimageGreen:
    def __init__(self, P, omega):
        self.P = P
        self.omega = omega
        self.dP = P.derivative() if P.degree >= 1 else None

    @property
    def n(self):
        return self.P.degree

    def value(self, z, check=True):
        g = self.omega.green(self.P(np.asarray(z, dtype=complex)), check=check) / self.n
        return g

    def dz(self, z, check=True):
        z = np.asarray(z, dtype=complex)
        v = self.P(z)
        psi = self.omega.riemann_map(v, check=check)
        dpsi = self.omega.riemann_map_derivative(v)
        return _out(dpsi * self.dP(z) / (self.n * psi))

    def gradient(self, z):
        """``g_x + i g_y`` as one complex number."""
        return np.conj(self.dz(z, check=False))


class LemniscateGreen:
    def __init__(self, centers, exponents, capacity):
        self.centers = np.asarray(centers, dtype=complex)
        self.exponents = np.asarray([float(m) for m in exponents])
        self.capacity = float(capacity)

    @classmethod
    def from_scheme(cls, scheme):
        return cls(scheme.centers, scheme.exponents, scheme.capacity)

    def value(self, w, check=True):
        w = np.asarray(w, dtype=complex)
        d = np.abs(w[..., None] - self.centers)
        g = np.sum(self.exponents * np.log(d), axis=-1) - np.log(self.capacity)
        return float(g) if np.ndim(g) == 0 else g

    def dz(self, w, check=True):
        w = np.asarray(w, dtype=complex)
        d = w[..., None] - self.centers
        if check and np.any(d == 0):
            raise ZeroDivisionError("pole: w coincides with a center")
        return _out(np.sum(self.exponents / d, axis=-1))


def green_E(P, omega, z):
    return PreimageGreen(P, omega).value(z)


def dz_green_E(P, omega, z):
    """Full ``2 d_z g_E``."""
    return PreimageGreen(P, omega).dz(z)


def green_L(scheme, w):
    return LemniscateGreen.from_scheme(scheme).value(w)


def dw_green_L(scheme, w):
    """Full ``2 d_w g_L``."""
    return LemniscateGreen.from_scheme(scheme).dz(w)


def spectral_derivative(samples):
    """Derivative w.r.t. ``t in [0, 2pi)`` of uniformly sampled periodic data."""
    z = np.asarray(samples, dtype=complex)
    N = len(z)
    k = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return np.fft.ifft(1j * k * np.fft.fft(z))


@dataclass(frozen=True)
class ContourPath:
    """Closed curve sampled uniformly in its parameter ``t in [0, 2pi]``.

    ``samples`` repeats the first point at the end.  ``tangent`` holds
    ``dz/dt`` at the same nodes; when omitted it is computed spectrally.
    """

    samples: np.ndarray
    orientation: str = "positive"
    level: float = float("nan")
    tangent: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if abs(s[0] - s[-1]) > 1e-9 * (1.0 + np.max(np.abs(s))):
            raise ValueError("contour is not closed")
        object.__setattr__(self, "samples", s)
        if self.tangent is None:
            d = spectral_derivative(s[:-1])
            object.__setattr__(self, "tangent", np.append(d, d[0]))
        if self.orientation not in ("positive", "negative"):
            raise ValueError("orientation must be 'positive' or 'negative'")

    @property
    def nodes(self):
        return self.samples[:-1]

    @property
    def dt(self):
        return 2.0 * np.pi / (len(self.samples) - 1)

    def reversed(self):
        return ContourPath(self.samples[::-1], _flip(self.orientation), self.level, -self.tangent[::-1])

    def winding_number(self, z0):
        """Discrete winding number about ``z0`` (sum of argument increments)."""
        d = self.samples - z0
        return int(np.rint(np.sum(np.angle(d[1:] / d[:-1])) / (2.0 * np.pi)))

    def subsample(self, step):
        s = self.samples[:-1][::step]
        t = self.tangent[:-1][::step]
        return ContourPath(np.append(s, s[0]), self.orientation, self.level, np.append(t, t[0]))


def _flip(o):
    return "negative" if o == "positive" else "positive"


def _trapezoid(values, path):
    """``(1/2 pi i) * closed integral of values dz`` over ``path``."""
    f = np.asarray(values, dtype=complex)[: len(path.nodes)]
    return np.sum(f * path.tangent[:-1]) * path.dt / (2j * np.pi)


def contour_period(field, path, imag_tol=1e-8):
    """Period ``(1/2 pi i) closed integral of 2 d_z g dz``; real by theory."""
    val = _trapezoid(field.dz(path.nodes), path)
    if abs(val.imag) > imag_tol:
        raise IntegrationAccuracyError(
            f"period has imaginary part {val.imag:.3e}; refine the contour sampling"
        )
    return float(val.real)


def contour_moment(field, path, f_values=None):
    """``(1/2 pi i) closed integral of f * 2 d_z g dz``.

    ``f_values`` are samples of an analytic ``f`` at the path nodes; with
    ``f`` the identity in the w-plane this is ``m_j a_j``.
    """
    integrand = field.dz(path.nodes)
    if f_values is not None:
        integrand = integrand * np.asarray(f_values, dtype=complex)[: len(path.nodes)]
    return complex(_trapezoid(integrand, path))
