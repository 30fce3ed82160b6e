"""Complex polynomials with coefficients stored in ascending degree.

Root finding uses Aberth-Ehrlich simultaneous iteration; no eigenvalue solver
is involved.  The batched kernel ``aberth`` is also used by the continuation
code, which warm-starts it from the roots of a nearby polynomial.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Polynomial",
    "RootFindingError",
    "aberth",
    "horner",
    "cluster_roots",
    "critical_points",
]

# fixed irrational rotation of the initial circle, breaks symmetric stalls
_INIT_ANGLE = 2.0 * math.pi * (math.sqrt(5.0) - 1.0) / 2.0 / 7.0


class RootFindingError(RuntimeError):
    """Simultaneous iteration failed to converge."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


def horner(coeffs, z):
    """Evaluate ascending ``coeffs`` at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z) + coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def _horner_batch(c, z):
    """Value and derivative of a batch of polynomials.

    c : (..., n+1) ascending coefficients, z : (..., m) points.
    """
    p = np.broadcast_to(c[..., -1:], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(c.shape[-1] - 2, -1, -1):
        dp = dp * z + p
        p = p * z + c[..., k:k + 1]
    return p, dp


def _initial_guess(c):
    n = c.shape[-1] - 1
    lead = c[..., -1:]
    radius = 1.0 + np.max(np.abs(c[..., :-1] / lead), axis=-1, keepdims=True)
    k = np.arange(n)
    ang = 2.0 * np.pi * k / n + _INIT_ANGLE
    return radius * np.exp(1j * ang)


def aberth(c, z0=None, maxiter=500, eps=4e-16):
    """Batched Aberth-Ehrlich iteration.

    Parameters
    ----------
    c : array_like, shape (..., n+1)
        Ascending coefficients; the leading entry must be nonzero.
    z0 : array_like, shape (..., n), optional
        Starting points.  Defaults to a rotated circle of radius
        ``1 + max|p_j / p_n|``.

    Returns
    -------
    roots : ndarray (..., n)
    converged : bool
    """
    c = np.asarray(c, dtype=complex)
    n = c.shape[-1] - 1
    if n == 0:
        return np.zeros(c.shape[:-1] + (0,), dtype=complex), True
    z = _initial_guess(c) if z0 is None else np.array(z0, dtype=complex)
    z = np.broadcast_to(z, c.shape[:-1] + (n,)).copy()
    if n == 1:
        return -c[..., :1] / c[..., 1:2], True
    eye = np.eye(n, dtype=bool)
    active = np.ones(z.shape, dtype=bool)
    cabs = np.abs(c)
    for _ in range(maxiter):
        p, dp = _horner_batch(c, z)
        # backward-error floor: |p(z)| at rounding level of sum |c_k| |z|^k
        floor, _ = _horner_batch(cabs, np.abs(z))
        at_floor = np.abs(p) <= 8.0 * 2.2e-16 * floor.real
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[..., :, None] - z[..., None, :]
            inv = np.where(eye, 0.0, 1.0 / np.where(eye, 1.0, diff))
            s = inv.sum(axis=-1)
            step = ratio / (1.0 - ratio * s)
        bad = ~np.isfinite(step)
        if bad.any():
            # p'(z) = 0 or coincident iterates: nudge off the stall
            step = np.where(bad, -1e-3 * (1.0 + np.abs(z)) * np.exp(1j * _INIT_ANGLE), step)
        step = np.where(active, step, 0.0)
        z = z - step
        small = np.abs(step) <= eps * (1.0 + np.abs(z))
        active = active & ~(small | at_floor)
        if not active.any():
            return z, True
    return z, False


def _linkage_groups(points, radius):
    """Single-linkage clusters of ``points`` at ``radius`` (union-find)."""
    m = len(points)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(points[i] - points[j]) <= radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def cluster_roots(poly, raw):
    """Merge numerically split multiple roots.

    Roots within ``1e-6 * scale`` are merged unconditionally.  Wider groups
    (up to ``1e-3 * scale``, the spread of an m-fold root in double precision)
    are merged only when the lower derivatives vanish at their centroid.

    Returns a list of ``(root, multiplicity)``.
    """
    raw = np.asarray(raw, dtype=complex)
    if raw.size == 0:
        return []
    scale = max(1.0, float(np.max(np.abs(raw))))
    out = []
    for group in _linkage_groups(raw, 1e-3 * scale):
        pts = raw[group]
        if len(group) > 1:
            c = _refine_multiple(poly, complex(pts.mean()), len(group))
            if _is_multiple_root(poly, c, len(group)):
                out.append((c, len(group)))
                continue
        for sub in _linkage_groups(pts, 1e-6 * scale):
            out.append((complex(pts[sub].mean()), len(sub)))
    out.sort(key=lambda rm: (round(rm[0].real, 12), round(rm[0].imag, 12)))
    return out


def _refine_multiple(poly, c, m):
    # an m-fold root is a simple root of the (m-1)-th derivative
    q = poly
    for _ in range(m - 1):
        q = q.derivative()
    dq = q.derivative()
    for _ in range(8):
        d = dq(c)
        if d == 0:
            break
        step = q(c) / d
        c -= step
        if abs(step) <= 1e-16 * (1.0 + abs(c)):
            break
    return complex(c)


def _is_multiple_root(poly, c, m):
    q = poly
    for _ in range(m):
        bound = np.max(np.abs(q.coeffs)) * (1.0 + abs(c)) ** q.degree
        if abs(q(c)) > 1e-6 * bound:
            return False
        if q.degree == 0:
            return False
        q = q.derivative()
    return True


class Polynomial:
    """Complex polynomial ``sum_j p_j z^j`` with ascending coefficients.

    Trailing zero coefficients are stripped so that ``leading`` is nonzero
    (except for the zero polynomial).
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def from_roots(cls, roots, leading=1.0):
        c = np.array([leading], dtype=complex)
        for r in roots:
            c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
        return cls(c)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def leading(self):
        return complex(self.coeffs[-1])

    @property
    def subleading(self):
        return complex(self.coeffs[-2]) if self.degree >= 1 else 0j

    def is_real(self, tol=1e-14):
        scale = float(np.max(np.abs(self.coeffs)))
        return bool(np.all(np.abs(self.coeffs.imag) <= tol * scale))

    def __call__(self, z):
        out = horner(self.coeffs, z)
        return complex(out) if np.ndim(out) == 0 else out

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * other)

    __rmul__ = __mul__

    def __add__(self, other):
        b = other.coeffs if isinstance(other, Polynomial) else np.array([other], dtype=complex)
        n = max(len(self.coeffs), len(b))
        out = np.zeros(n, dtype=complex)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(b)] += b
        return Polynomial(out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def monomial_form(self, rtol=1e-12):
        """``(alpha, beta, gamma)`` with ``p = alpha (z - beta)^n + gamma``, else None."""
        n = self.degree
        if n < 2:
            return None
        alpha = self.leading
        beta = -self.subleading / (n * alpha)
        gamma = self(beta)
        target = Polynomial.from_roots([beta] * n, leading=alpha) + gamma
        scale = float(np.max(np.abs(self.coeffs)))
        if np.max(np.abs(target.coeffs - self.coeffs)) <= rtol * scale * (1.0 + abs(beta)) ** n:
            return alpha, beta, gamma
        return None

    def shift_constant(self, v):
        """Return ``p - v``."""
        c = np.array(self.coeffs)
        c[0] -= v
        return Polynomial(c)

    def derivative(self):
        if self.degree < 1:
            raise ValueError("constant has no derivative of interest")
        j = np.arange(1, self.degree + 1)
        return Polynomial(j * self.coeffs[1:])

    def roots(self, tol=1e-12, maxiter=500):
        """All ``n`` roots repeated by multiplicity."""
        out = []
        for r, m in self.roots_with_multiplicity(tol=tol, maxiter=maxiter):
            out.extend([r] * m)
        return np.array(out, dtype=complex)

    def roots_with_multiplicity(self, tol=1e-12, maxiter=500):
        if self.degree < 1:
            raise ValueError("roots need degree >= 1")
        if tol <= 0:
            raise ValueError("tol must be positive")
        raw, ok = aberth(self.coeffs, maxiter=maxiter)
        resid = np.abs(self(raw))
        bound = tol * (1.0 + np.max(np.abs(self.coeffs)) * (1.0 + np.abs(raw)) ** self.degree)
        if not ok and np.any(resid > bound):
            raise RootFindingError(
                "Aberth iteration did not converge",
                best=raw,
                residual=float(np.max(resid)),
            )
        if np.any(resid > bound):
            raise RootFindingError("root residual above tolerance", best=raw, residual=float(np.max(resid)))
        return cluster_roots(self, raw)

    def critical_points(self, tol=1e-12):
        """Zeros of ``p'`` with multiplicity (``n - 1`` of them)."""
        if self.degree < 2:
            raise ValueError("critical points need degree >= 2")
        return self.derivative().roots(tol=tol)


def critical_points(p, tol=1e-12):
    return p.critical_points(tol)
