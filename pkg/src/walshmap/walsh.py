"""Evaluation of the Walsh map ``Phi`` and its boundary correspondence.

``Phi`` satisfies ``Q(Phi(z)) = Psi(P(z))`` on the exterior of E and is the
branch of ``Q^{-1} o Psi o P`` that behaves like ``z`` at infinity.  Three
evaluators are provided:

* ``phi_track``: continuation from a far anchor.  Each point climbs the
  Green's function of E along a slightly rotated gradient line until it is
  far out, the root of ``Q(w) = Psi(P(z))`` nearest the point is taken there,
  and the root is then carried back along the recorded path with
  predictor-corrector steps.  Paths never enter E since ``g_E`` increases.
* ``phi_closed_form``: explicit formulas for affine ``P``, connected
  pre-images and the family ``alpha (z - beta)^n + gamma``.
* ``phi_cauchy``: trapezoidal Cauchy integral over a sampled boundary
  correspondence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .green import PreimageGreen
from .model_sets import ModelSet
from .preimage import _cycles, _match, track_level_roots

__all__ = [
    "BoundaryCorrespondence",
    "WalshMap",
    "TrackingError",
    "BranchAssignmentError",
    "NearBoundaryError",
    "FamilyMismatchError",
    "phi_track",
    "phi_closed_form",
    "phi_boundary",
    "phi_cauchy",
    "phi_on_level_loops",
    "check_identity",
]

_DISK = ModelSet.disk()
_EPS_ROT = 0.2  # radians; keeps gradient lines off saddle separatrices
# g_E at or below this counts as E: on slits |Psi(P)| = 1 only up to rounding
G_FLOOR = 1e-13


class TrackingError(RuntimeError):
    """Continuation of the root of ``Q(w) = Psi(P(z))`` failed."""


class BranchAssignmentError(RuntimeError):
    """Boundary values could not be matched consistently around a loop."""


class NearBoundaryError(ValueError):
    """Point too close to the sampled boundary for the Cauchy integral."""


class FamilyMismatchError(ValueError):
    """No closed form applies to this polynomial."""


@dataclass(frozen=True)
class BoundaryCorrespondence:
    """Matched samples ``z_i`` on the boundary of E and ``w_i = Phi(z_i)``.

    ``z_loops[j]`` is a positively oriented ContourPath around component j;
    the Cauchy integral uses it with reversed orientation.
    """

    z_loops: tuple
    w_values: tuple  # arrays aligned with z_loops[j].nodes
    counts: tuple
    rho: float

    @property
    def spacing(self):
        return max(float(np.max(np.abs(np.diff(p.samples)))) for p in self.z_loops)

    def closure_residual(self):
        return max(float(abs(w[0] - w[-1])) if len(w) > 1 else 0.0 for w in self.w_closed)

    @property
    def w_closed(self):
        return tuple(np.append(w, w[0]) for w in self.w_values)


class WalshMap:
    """Precomputed data for evaluating ``Phi`` of one scheme."""

    def __init__(self, scheme, P, omega):
        self.scheme = scheme
        self.P = P
        self.omega = omega
        self.n = P.degree
        self.field = PreimageGreen(P, omega)
        self.Q = scheme.Q
        self.dQ = self.Q.derivative()
        self.dP = P.derivative()
        self._a = np.asarray(scheme.centers, dtype=complex)
        self._nj = np.asarray(scheme.counts, dtype=float)
        self._lead = omega.d1 * P.leading
        self.crit_Q = self.dQ.roots() if self.n >= 2 else np.array([], dtype=complex)
        if self.n >= 2:
            crit = P.critical_points()
            inside = omega.contains(P(crit))
            self.crit_ext = crit[~np.asarray(inside, dtype=bool)]
        else:
            self.crit_ext = np.array([], dtype=complex)
        self.center = -P.coeffs[0] / P.coeffs[1] if self.n == 1 else -P.subleading / (self.n * P.leading)
        pts = [P.roots(), self.crit_ext, np.asarray(scheme.centers)]
        spread = max(float(np.max(np.abs(np.asarray(p) - self.center))) for p in pts if len(p)) if self.n > 1 else 0.0
        self.scale = spread + 2.0 * scheme.capacity + 1e-300
        self.R_big = 10.0 * self.scale

    # -- helpers --------------------------------------------------------------
    def exterior(self, z):
        """Mask of points where ``Phi`` is evaluated (``g_E > G_FLOOR``)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            g = self.field.value(np.asarray(z, dtype=complex), check=False)
        return np.nan_to_num(g, nan=-1.0) > G_FLOOR

    def target(self, z):
        return self.omega.riemann_map(self.P(z), check=False)

    def _crit_gap(self, w):
        if len(self.crit_Q) == 0:
            return np.full(np.shape(w), np.inf)
        return np.min(np.abs(np.asarray(w)[..., None] - self.crit_Q), axis=-1)

    def q_and_logderiv(self, w):
        """``Q(w)`` in product form and ``Q'(w) / Q(w)``.

        The product form avoids the cancellation of the expanded
        coefficients near multiple critical points of Q.
        """
        w = np.asarray(w, dtype=complex)
        d = w[..., None] - self._a
        q = self._lead * np.prod(d ** self._nj, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ld = np.sum(self._nj / d, axis=-1)
        return q, ld

    def _newton(self, w, v, iters=30):
        w = np.array(w, dtype=complex)
        for _ in range(iters):
            q, ld = self.q_and_logderiv(w)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = (q - v) / (q * ld)
            step = np.where(np.isfinite(step), step, 0.0)
            w = w - step
            if np.all(np.abs(step) <= 4e-16 * (1.0 + np.abs(w))):
                break
        return w

    # -- forward ascent ---------------------------------------------------------
    def _ascend(self, z, shrink):
        """Record paths from ``z`` to ``|z - c| >= R_big`` along which g_E grows."""
        z = np.array(z, dtype=complex)
        steps = []
        active = np.abs(z - self.center) < self.R_big
        rot = np.exp(1j * _EPS_ROT)
        floor = 1e-9 * self.scale
        for _ in range(20000):
            if not active.any():
                return z, steps
            idx = np.nonzero(active)[0]
            za = z[idx]
            g = self.field.value(za, check=False)
            grad = np.conj(self.field.dz(za, check=False))
            ag = np.abs(grad)
            radial = (za - self.center) / np.maximum(np.abs(za - self.center), 1e-300)
            dirn = np.where(ag > 1e-300, rot * grad / np.where(ag > 1e-300, ag, 1.0), radial)
            h = 0.25 * g / np.maximum(ag, 1e-300)
            if len(self.crit_ext):
                dc = np.min(np.abs(za[:, None] - self.crit_ext[None, :]), axis=1)
                h = np.minimum(h, np.maximum(0.2 * dc, floor))
            h = np.minimum(h, 0.5 * np.abs(za - self.center) + self.scale) * shrink
            znew = za + h * dirn
            for _ in range(30):
                gn = self.field.value(znew, check=False)
                bad = ~(gn > g)
                if not bad.any():
                    break
                h = np.where(bad, 0.5 * h, h)
                znew = za + h * dirn
            else:
                raise TrackingError("ascent stalled: Green's function does not increase")
            steps.append((idx, za))
            z[idx] = znew
            active[idx] = np.abs(znew - self.center) < self.R_big
        raise TrackingError("ascent did not reach the far anchor")

    def _descend(self, z_top, steps):
        w = self._newton(z_top, self.target(z_top))
        unsafe = np.zeros(len(z_top), dtype=bool)
        v = self.target(z_top)
        for idx, zb in reversed(steps):
            vb = self.target(zb)
            w0 = w[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                pred = w0 + (vb - v[idx]) / self.dQ(w0)
            pred = np.where(np.isfinite(pred), pred, w0)
            wn = self._newton(pred, vb, iters=12)
            jump = np.abs(wn - w0)
            unsafe[idx] |= jump > 0.3 * self._crit_gap(w0)
            w[idx] = wn
            v[idx] = vb
        return w, unsafe

    def track(self, z, inside="raise"):
        """Vectorized ``Phi`` by continuation.  Points of E raise or give NaN.

        Near an exterior critical point of P, ``Q(w) = Psi(P(z))`` fixes w
        only to about ``eps**(1/(m+1))``; such points get the mean over a
        surrounding circle instead.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        zf = z.ravel()
        ok = np.atleast_1d(self.exterior(zf))
        if not ok.all() and inside == "raise":
            raise ValueError("point lies in E; Phi is defined on the exterior only")
        out = np.full(zf.shape, np.nan + 0j)
        ill = ok & self._ill_conditioned(zf)
        for i in np.nonzero(ill)[0]:
            out[i] = self.mean_value(zf[i])
        well = ok & ~ill
        out[well] = self._continue(zf[well])
        out = out.reshape(shape)
        return complex(out) if out.ndim == 0 else out

    def _ill_conditioned(self, z):
        if len(self.crit_ext) == 0:
            return np.zeros(z.shape, dtype=bool)
        v = self.target(z)
        dv = self.omega.riemann_map_derivative(self.P(z)) * self.dP(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = 2.2e-16 * (1.0 + np.abs(v)) / np.abs(dv)
        return ~(kappa <= 1e-11 * (self.scale + np.abs(z - self.center)))

    def _continue(self, zf):
        out = np.full(zf.shape, np.nan + 0j)
        todo = np.arange(len(zf))
        shrink = 1.0
        for _ in range(6):
            if len(todo) == 0:
                break
            for chunk in np.array_split(todo, max(1, len(todo) // 20000 + 1)):
                top, steps = self._ascend(zf[chunk], shrink)
                w, unsafe = self._descend(top, steps)
                out[chunk] = w
                out[chunk[unsafe]] = np.nan
            todo = np.nonzero(~np.isfinite(out))[0]
            shrink *= 0.25
        if len(todo):
            raise TrackingError(f"continuation unresolved at {len(todo)} points after step refinement")
        v = self.target(zf)
        res = np.abs(self.Q(out) - v) / (1.0 + np.abs(v))
        if res.size and res.max() > 1e-9:
            raise TrackingError(f"identity residual {res.max():.2e} after continuation")
        return out

    def mean_value(self, z, nodes=32):
        """``Phi(z)`` as the mean over a circle about ``z`` (exact for analytic Phi).

        The radius is halved until the circle four times as large lies in
        the exterior, so the trapezoid error is about ``4**-nodes``.
        """
        roots = self.P.roots()
        r = 0.1 * float(np.min(np.abs(roots - z)))
        t = 2.0 * np.pi * np.arange(nodes) / nodes
        ring = np.exp(1j * t)
        for _ in range(60):
            if np.all(self.exterior(z + 4.0 * r * ring)):
                break
            r *= 0.5
        return complex(np.mean(self._continue(z + r * ring)))

    # -- Phi on closed level curves ---------------------------------------------
    def on_loops(self, loops, counts, rho, theta0, M, anchor_offset=0.0):
        """Values of ``Phi`` at the nodes of level loops ``|Psi(P)| = rho``.

        The loops must come from root continuation on the parameter grid
        ``theta0 + 2 pi k / M``.  Roots of ``Q(w) = rho e^{i theta}`` are
        tracked on the same grid; a ``phi_track`` anchor at each loop's first
        node selects the cycle and its starting root.
        """
        theta, W = track_level_roots(self.Q, _DISK, rho, M, theta0=theta0)
        perm, _ = _match(W[M], W[0])
        if perm is None:
            raise BranchAssignmentError("could not close the w-plane continuation")
        cyc_of = {}
        for cyc in _cycles(list(perm)):
            for pos, i in enumerate(cyc):
                cyc_of[i] = (cyc, pos)
        out = []
        for loop, nj in zip(loops, counts):
            z0 = loop.samples[0]
            za = z0
            if anchor_offset > 0.0:
                grad = np.conj(self.field.dz(z0, check=False))
                za = z0 + anchor_offset * self.scale * grad / abs(grad)
            wa = self.track(za)
            i0 = int(np.argmin(np.abs(W[0] - wa)))
            cyc, pos = cyc_of[i0]
            if len(cyc) != nj:
                raise BranchAssignmentError(
                    f"w-plane cycle has length {len(cyc)}, component has {nj} zeros"
                )
            cyc = cyc[pos:] + cyc[:pos]
            ws = np.concatenate([W[:M, i] for i in cyc])
            if len(ws) != len(loop.nodes):
                raise BranchAssignmentError("sample count mismatch between z and w loops")
            out.append(ws)
        return out


# -- public functions -----------------------------------------------------------

def phi_track(scheme, P, omega, z):
    return WalshMap(scheme, P, omega).track(z)


def phi_on_level_loops(scheme, P, omega, struct):
    """``Phi`` at the nodes of the analysis contours (level ``struct.level``)."""
    wm = WalshMap(scheme, P, omega)
    rho = float(np.exp(P.degree * struct.level))
    M = (len(struct.contours[0].samples) - 1) // struct.counts[0]
    return wm.on_loops(struct.contours, struct.counts, rho, 0.0, M)


def phi_boundary(scheme, P, omega, trace):
    """Boundary correspondence on the loops of a ``BoundaryTrace``."""
    wm = WalshMap(scheme, P, omega)
    g_loop = np.log(trace.rho) / P.degree
    offset = 0.0 if g_loop > 1e-12 else 1e-6
    ws = wm.on_loops(trace.loops, trace.counts, trace.rho, trace.theta0, trace.samples_per_turn, offset)
    for loop, w in zip(trace.loops, ws):
        v = wm.target(loop.nodes)
        res = np.abs(wm.Q(w) - v)
        if res.max() > 1e-8:
            raise BranchAssignmentError(f"boundary identity residual {res.max():.2e}")
        # seam: the continuation of the last node must return to the first
        step = np.max(np.abs(np.diff(w)))
        if abs(w[-1] - w[0]) > 4.0 * step + 1e-8:
            raise BranchAssignmentError("seam mismatch on loop closure")
    return BoundaryCorrespondence(tuple(trace.loops), tuple(ws), tuple(trace.counts), float(trace.rho))


def phi_cauchy(corr, z, guard=3.0):
    """``Phi(z) = z - sum_j (1/2 pi i) oint_{gamma_j} (w - zeta)/(zeta - z) dzeta``.

    The loops are positively oriented, so subtracting their integrals is the
    integral over the negatively oriented boundary.  Any loops enclosing E
    on which ``Phi`` is known will do, e.g. a level curve of ``g_E`` from
    ``trace_boundary(..., rho=...)``: the segment's pre-image has slit ends
    where boundary values are only square-root smooth.
    """
    z = np.asarray(z, dtype=complex)
    zf = np.atleast_1d(z).ravel()
    total = np.zeros(zf.shape, dtype=complex)
    for loop, w in zip(corr.z_loops, corr.w_values):
        nodes = loop.nodes
        spacing = float(np.max(np.abs(np.diff(loop.samples))))
        diff = zf[:, None] - nodes[None, :]
        if np.any(np.abs(diff).min(axis=1) <= guard * spacing):
            raise NearBoundaryError(
                "point within the Cauchy-integral guard zone of the boundary; use phi_track"
            )
        turns = np.sum(np.angle(np.roll(diff, -1, axis=1) / diff), axis=1) / (2.0 * np.pi)
        if np.any(np.abs(turns) > 0.5):
            raise NearBoundaryError("point is enclosed by a boundary loop; the integral does not apply")
        f = (w - nodes)[None, :] / (nodes[None, :] - zf[:, None])
        total += np.sum(f * loop.tangent[:-1][None, :], axis=1) * loop.dt / (2j * np.pi)
    out = (zf - total).reshape(z.shape)
    return complex(out) if out.ndim == 0 else out


def check_identity(scheme, P, omega, z):
    """``(|Q(Phi) - Psi(P)|, ||U(Phi)| - cap |Psi(P)|^(1/n)|)`` maximized over ``z``."""
    wm = WalshMap(scheme, P, omega)
    w = wm.track(z)
    v = wm.target(z)
    r1 = np.abs(scheme.Q(w) - v)
    cap = scheme.capacity
    absU = cap * np.abs(scheme.Q(w)) ** (1.0 / P.degree)
    r2 = np.abs(absU - cap * np.abs(v) ** (1.0 / P.degree))
    return float(np.max(r1)), float(np.max(r2))


# -- closed forms ---------------------------------------------------------------

def _is_even_about(P, c):
    # P(c + x) = P(c - x) as polynomials in x: odd coefficients of the shift vanish
    shifted = _taylor_shift(P.coeffs, c)
    scale = float(np.max(np.abs(shifted)))
    return bool(np.all(np.abs(shifted[1::2]) <= 1e-13 * scale))


def _taylor_shift(coeffs, c):
    c_out = np.array(coeffs, dtype=complex)
    n = len(c_out) - 1
    for k in range(n):
        for j in range(n - 1, k - 1, -1):
            c_out[j] += c * c_out[j + 1]
    return c_out


def _select_root(base, n, rel, rule):
    """Pick the n-th root of ``base`` matching ``rel = z - center`` in argument."""
    r = np.abs(base) ** (1.0 / n) * np.exp(1j * np.angle(base) / n)
    cands = r[..., None] * np.exp(2j * np.pi * np.arange(n) / n)
    if rule == "quadrant":
        q = np.pi / 2.0
        ang = np.angle(rel)
        on_axis = np.abs(np.remainder(ang + q / 2, q) - q / 2) < 1e-12
        ref = np.where(on_axis, ang, (np.floor(ang / q) + 0.5) * q)
    else:
        ref = np.angle(rel)
    dist = np.abs(np.angle(cands * np.exp(-1j * ref)[..., None]))
    k = np.argmin(dist, axis=-1)
    return np.take_along_axis(cands, k[..., None], axis=-1)[..., 0]


def phi_closed_form(P, omega, z):
    """Explicit ``Phi`` for affine, connected and ``alpha (z-beta)^n + gamma`` inputs.

    The n-th root is the one whose argument is closest to ``arg(z - c)``, the
    principal continuation of ``z + O(1/z)``; for real quartics even about
    their center the quadrant of ``z`` is preserved instead.
    """
    z = np.asarray(z, dtype=complex)
    n = P.degree
    d1, d0 = omega.d1, omega.d0
    if n == 1:
        p0, p1 = P.coeffs
        a1 = -(d1 * p0 + d0) / (d1 * p1)
        out = omega.riemann_map(p1 * z + p0) / (d1 * p1) + a1
        return complex(out) if np.ndim(out) == 0 else out
    form = P.monomial_form()
    if form is not None:
        alpha, beta, gamma = form
        center = beta
        if omega.contains(gamma):
            base = omega.riemann_map(P(z)) / (d1 * alpha)
        else:
            # P(z) - gamma = alpha (z - beta)^n exactly; no cancellation near beta
            base = omega.riemann_map_difference(gamma, alpha * (z - beta) ** n) / (d1 * alpha)
    else:
        crit = P.critical_points()
        if not np.all(omega.contains(P(crit))):
            raise FamilyMismatchError("no closed form: E is disconnected and P is not alpha (z-beta)^n + gamma")
        center = -P.subleading / (n * P.leading)
        base = omega.riemann_map(P(z)) / (d1 * P.leading)
    rule = "quadrant" if (n == 4 and P.is_real() and abs(center.imag) < 1e-14 and _is_even_about(P, center)) else "arg"
    out = center + _select_root(base, n, z - center, rule)
    return complex(out) if np.ndim(out) == 0 else out

