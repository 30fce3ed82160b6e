"""Component structure of ``E = P^{-1}(Omega)``.

Level curves of ``g_E`` are obtained in two independent ways:

* marching squares on a sampled ``g_E`` grid, which is used to count
  components;
* root continuation of ``P(z) = Psi^{-1}(rho e^{i theta})`` with
  ``rho = e^{n t}``.  Following all ``n`` roots once around the circle gives
  a permutation whose cycles are the components; each cycle, traversed
  ``n_j`` times in ``theta``, is a smooth closed curve sampled uniformly in
  its parameter.  The trapezoidal rule converges geometrically on it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .green import ContourPath, PreimageGreen, contour_period
from .poly import aberth

__all__ = [
    "DegenerateConfigurationError",
    "GridResolutionError",
    "PreimageStructure",
    "SymmetryFlags",
    "BoundaryTrace",
    "analyze",
    "trace_boundary",
    "detect_symmetry",
    "track_level_roots",
    "level_loops",
]

log = logging.getLogger(__name__)

MAX_GRID = 2048


class DegenerateConfigurationError(ValueError):
    """A critical value touches the boundary of Omega, or roots collide."""


class GridResolutionError(RuntimeError):
    """Marching squares could not separate the components; refine the grid."""


@dataclass(frozen=True)
class SymmetryFlags:
    E_conj_symmetric: bool
    per_component_conj_symmetric: tuple
    left_to_right: bool


@dataclass(frozen=True)
class PreimageStructure:
    degree: int
    ell: int
    counts: tuple
    crit_exterior: tuple  # ((z_k, P(z_k)), ...) with multiplicity
    crit_interior: tuple
    level: float
    contours: tuple  # ContourPath per component, positively oriented
    root_components: tuple  # ((root of P, component index), ...)
    periods: tuple
    symmetry: SymmetryFlags | None = None
    ordering: tuple = ()
    marching_contours: tuple = field(default=(), repr=False)

    @property
    def n(self):
        return self.degree


@dataclass(frozen=True)
class BoundaryTrace:
    """Closed z-loops on the boundary of E, one per component."""

    loops: tuple  # ContourPath per component, parameter runs over n_j turns
    counts: tuple
    rho: float
    theta0: float = 0.0
    samples_per_turn: int = 0


def _omega_coeffs(P, omega_val):
    c = np.array(P.coeffs)
    c[0] -= omega_val
    return c


def _match(old, new):
    """Permutation ``idx`` with ``new[idx[i]]`` nearest ``old[i]``, plus slack."""
    d = np.abs(old[:, None] - new[None, :])
    idx = np.argmin(d, axis=1)
    if len(set(idx.tolist())) != len(idx):
        return None, np.inf
    moved = d[np.arange(len(old)), idx]
    if len(new) > 1:
        sep = np.abs(new[:, None] - new[None, :])
        sep[np.diag_indices(len(new))] = np.inf
        min_sep = sep.min()
    else:
        min_sep = np.inf
    return idx, float(moved.max() / min_sep) if min_sep > 0 else np.inf


def track_level_roots(P, omega, rho, samples_per_turn, theta0=0.0):
    """Follow all roots of ``P(z) = Psi^{-1}(rho e^{i theta})`` over one turn.

    Returns ``(theta, Z)`` with ``Z[k, i]`` the continuation of root ``i`` at
    ``theta[k] = theta0 + 2 pi k / M`` for ``k = 0..M``.

    All nodes are solved at once by batched Aberth iteration and linked by
    the tangent predictor ``dz/dtheta = omega'(theta) / P'(z)``: a link is
    accepted when the predicted move is under a quarter of the minimal root
    separation and every root lands nearest its prediction.  Intervals that
    fail are re-tracked with halved substeps.  Nearest-root matching alone
    would miss two roots swapping in a narrow near-collision.
    """
    n = P.degree
    M = int(samples_per_turn)
    dP = P.derivative()
    theta = theta0 + 2.0 * np.pi * np.arange(M + 1) / M
    h_out = 2.0 * np.pi / M

    def velocity(th, z):
        u = rho * np.exp(1j * np.asarray(th))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (omega.inverse_riemann_map_derivative(u) * 1j * u)[..., None] / dP(z)

    def coeffs(th):
        c = np.broadcast_to(np.asarray(P.coeffs), np.shape(th) + (n + 1,)).copy()
        c[..., 0] -= omega.inverse_riemann_map(rho * np.exp(1j * np.asarray(th)))
        return c

    R, ok = aberth(coeffs(theta))
    if not ok:
        raise DegenerateConfigurationError("root finding failed on the level curve")
    if n == 1:
        return theta, R

    # vectorized links R[k] -> R[k+1]
    vel = velocity(theta[:-1], R[:-1])
    pred = R[:-1] + h_out * vel
    d = np.abs(pred[:, :, None] - R[1:, None, :])
    link = np.argmin(d, axis=2)
    moved = np.take_along_axis(d, link[:, :, None], axis=2)[..., 0]
    sep_new = np.abs(R[1:, :, None] - R[1:, None, :])
    sep_new[:, np.arange(n), np.arange(n)] = np.inf
    sep_old = np.abs(R[:-1, :, None] - R[:-1, None, :])
    sep_old[:, np.arange(n), np.arange(n)] = np.inf
    bijective = np.all(np.sort(link, axis=1) == np.arange(n), axis=1)
    good = (
        bijective
        & np.all(np.isfinite(vel), axis=1)
        & (h_out * np.max(np.abs(vel), axis=1) <= 0.25 * sep_old.min(axis=(1, 2)))
        & (moved.max(axis=1) <= 0.25 * sep_new.min(axis=(1, 2)))
    )
    Z = np.empty((M + 1, n), dtype=complex)
    Z[0] = R[0]
    order = np.arange(n)
    for k in range(M):
        if good[k]:
            order = link[k][order]
            Z[k + 1] = R[k + 1][order]
        else:
            z = _substep(Z[k], theta[k], theta[k + 1], h_out, coeffs, velocity, n)
            dk = np.abs(z[:, None] - R[k + 1][None, :])
            order = np.argmin(dk, axis=1)
            Z[k + 1] = R[k + 1][order]
    return theta, Z


def _substep(z, th, target, h0, coeffs, velocity, n):
    h = h0
    h_min = h0 * 2.0 ** -40
    while th < target - 1e-15:
        h = min(h, target - th)
        vel = velocity(th, z)
        d = np.abs(z[:, None] - z[None, :])
        d[np.diag_indices(n)] = np.inf
        pred = z + h * vel
        accept = bool(np.all(np.isfinite(vel))) and h * np.max(np.abs(vel)) <= 0.25 * d.min()
        if accept:
            new, ok = aberth(coeffs(th + h), z0=pred, maxiter=100)
            idx, slack = _match(pred, new) if ok else (None, np.inf)
            accept = idx is not None and slack <= 0.25
        if not accept:
            h *= 0.5
            if h < h_min:
                raise DegenerateConfigurationError(
                    "roots collide along the level curve (boundary self-touch)"
                )
            continue
        z = new[idx]
        th += h
        h = min(2.0 * h, h0)
    return z


def _cycles(perm):
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        out.append(cyc)
    return out


def level_loops(P, omega, rho, samples_per_turn, level=float("nan"), theta0=0.0):
    """Closed level curves ``|Psi(P(z))| = rho`` as ContourPaths.

    Each path's parameter ``t`` equals ``theta / n_j``; tangents are analytic
    (``dz/dtheta = omega'(theta) / P'(z)``).  Returns ``(paths, counts)``.
    """
    theta, Z = track_level_roots(P, omega, rho, samples_per_turn, theta0=theta0)
    M = len(theta) - 1
    idx, _ = _match(Z[M], Z[0])
    if idx is None:
        raise DegenerateConfigurationError("could not close the root continuation")
    dP = P.derivative()
    u = rho * np.exp(1j * theta[:-1])
    domega = omega.inverse_riemann_map_derivative(u) * 1j * u
    paths, counts = [], []
    for cyc in _cycles(list(idx)):
        zs = np.concatenate([Z[:M, i] for i in cyc])
        dth = np.concatenate([domega / dP(Z[:M, i]) for i in cyc])
        nj = len(cyc)
        tangent = nj * dth
        paths.append(
            ContourPath(np.append(zs, zs[0]), "positive", level, np.append(tangent, tangent[0]))
        )
        counts.append(nj)
    return paths, counts


def _marching_contours(field_, level, box, npts):
    xmin, xmax, ymin, ymax = box
    x = np.linspace(xmin, xmax, npts)
    y = np.linspace(ymin, ymax, npts)
    Zg = x[None, :] + 1j * y[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.maximum(field_.value(Zg, check=False), 0.0)
    g = np.nan_to_num(g, nan=0.0)
    out = []
    for c in measure.find_contours(g, level):
        if np.hypot(*(c[0] - c[-1])) > 1e-9:
            continue  # touches the frame; not a closed component curve
        zc = np.interp(c[:, 1], np.arange(npts), x) + 1j * np.interp(c[:, 0], np.arange(npts), y)
        out.append(zc)
    return out


def _polygon_winding(poly, z0):
    d = poly - z0
    return int(np.rint(np.sum(np.angle(d[1:] / d[:-1])) / (2.0 * np.pi)))


def analyze(P, omega, samples_per_turn=None, grid=256, tol=1e-9):
    """Component count, per-component root counts and enclosing contours.

    Raises DegenerateConfigurationError when a critical value sits on the
    boundary of Omega, GridResolutionError when marching squares cannot
    resolve the components even on a 2048 x 2048 grid.
    """
    n = P.degree
    if n < 1:
        raise ValueError("polynomial must have degree >= 1")
    field_ = PreimageGreen(P, omega)
    crit = P.critical_points() if n >= 2 else np.array([], dtype=complex)
    vals = P(crit) if len(crit) else np.array([], dtype=complex)
    if len(crit) and np.any(omega.boundary_gap(vals) < tol):
        raise DegenerateConfigurationError(
            "degenerate configuration: a critical value lies on the boundary of Omega"
        )
    inside = omega.contains(vals) if len(crit) else np.array([], dtype=bool)
    ext = [(complex(z), complex(v)) for z, v, i in zip(crit, vals, inside) if not i]
    inn = [(complex(z), complex(v)) for z, v, i in zip(crit, vals, inside) if i]
    ell_expected = 1 + len(ext)
    if ext:
        level = 0.5 * min(field_.value(z) for z, _ in ext)
    else:
        level = 1.0
    rho = float(np.exp(n * level))
    M = int(samples_per_turn or max(256, 64 * n))
    if M < 64 * n:
        raise ValueError("samples_per_turn must be >= 64 n")
    paths, counts = level_loops(P, omega, rho, M, level=level)
    if len(paths) != ell_expected:
        raise DegenerateConfigurationError(
            f"continuation found {len(paths)} components, critical points imply {ell_expected}"
        )

    roots = P.roots()
    # component membership by winding (probe omega = 0 lies in every model set)
    wind = np.array([[p.winding_number(r) for r in roots] for p in paths])
    if not np.array_equal(np.sort(wind.sum(axis=0)), np.ones(n, dtype=int)):
        raise DegenerateConfigurationError("winding audit failed: a root is not enclosed exactly once")
    root_counts = wind.sum(axis=1)
    if not np.array_equal(root_counts, counts):
        raise DegenerateConfigurationError("root counts disagree with continuation cycle lengths")

    # marching squares cross-check of the component count
    allpts = np.concatenate([p.samples for p in paths])
    xmin, xmax = allpts.real.min(), allpts.real.max()
    ymin, ymax = allpts.imag.min(), allpts.imag.max()
    pad = 0.15 * max(xmax - xmin, ymax - ymin) + 1e-3
    box = (xmin - pad, xmax + pad, ymin - pad, ymax + pad)
    npts = grid
    while True:
        ms = _marching_contours(field_, level, box, npts)
        if len(ms) == ell_expected:
            ms_sets = sorted(tuple(abs(_polygon_winding(c, r)) for r in roots) for c in ms)
            lift_sets = sorted(tuple(row) for row in wind)
            if ms_sets == lift_sets:
                break
        if npts >= MAX_GRID:
            raise GridResolutionError(
                f"marching squares found {len(ms)} level curves, expected {ell_expected}; "
                "grid too coarse to separate components, refine the grid"
            )
        log.debug("refining marching-squares grid to %d", 2 * npts)
        npts *= 2

    # left to right
    order = sorted(range(len(paths)), key=lambda j: (paths[j].samples.real.min(), paths[j].samples.imag.min()))
    paths = [paths[j] for j in order]
    counts = [int(root_counts[j]) for j in order]
    wind = wind[order]
    periods = []
    for p, nj in zip(paths, counts):
        m_hat = contour_period(field_, p)
        if abs(n * m_hat - nj) >= 0.01:
            raise DegenerateConfigurationError(f"period {m_hat:.6f} does not match count {nj}/{n}")
        periods.append(m_hat)
    root_comp = tuple((complex(r), int(np.argmax(wind[:, i]))) for i, r in enumerate(roots))
    struct = PreimageStructure(
        degree=n,
        ell=len(paths),
        counts=tuple(counts),
        crit_exterior=tuple(ext),
        crit_interior=tuple(inn),
        level=level,
        contours=tuple(paths),
        root_components=root_comp,
        periods=tuple(periods),
        ordering=tuple(order),
        marching_contours=tuple(ms),
    )
    sym = detect_symmetry(P, omega, struct)
    return _replace(struct, symmetry=sym)


def _replace(obj, **kw):
    from dataclasses import replace

    return replace(obj, **kw)


def _conj_stable(samples, tol):
    """Hausdorff-type check that a closed polyline is stable under conjugation."""
    s = samples
    a, b = s[:-1], s[1:]
    q = np.conj(s[:-1])
    ab = b - a
    L2 = np.maximum(np.abs(ab) ** 2, 1e-300)
    # distance from each conjugated node to every segment
    t = np.clip(((q[:, None] - a[None, :]) * np.conj(ab)[None, :]).real / L2[None, :], 0.0, 1.0)
    d = np.abs(q[:, None] - (a[None, :] + t * ab[None, :])).min(axis=1)
    return bool(d.max() <= tol)


def detect_symmetry(P, omega, struct):
    real = P.is_real()
    scale = max(1.0, max(float(np.max(np.abs(c.samples))) for c in struct.contours))
    if real:
        per = []
        for c in struct.contours:
            # a conjugation-stable loop must meet the real axis
            if not np.any(np.diff(np.sign(c.samples.imag)) != 0):
                per.append(False)
                continue
            step = max(1, len(c.samples) // 2048)
            per.append(_conj_stable(c.samples[::step] if step > 1 else c.samples, 1e-6 * scale * step))
    else:
        per = [_conj_stable(c.samples, 1e-6 * scale) for c in struct.contours]
    return SymmetryFlags(real, tuple(per), bool(all(per)))


def trace_boundary(P, omega, struct, samples_per_turn=None, rho=None):
    """Pull the boundary of Omega back through ``P`` by root continuation.

    Each component's loop closes after the boundary parameter winds ``n_j``
    times.  For the segment, interior critical values produce root
    collisions on the boundary itself, so its loops are traced on the level
    ``rho = 1 + 1e-6`` with nodes offset by half a step from the endpoints.
    """
    n = P.degree
    M = int(samples_per_turn or max(256, 64 * n))
    if M < 64 * n:
        raise ValueError("samples_per_turn must be >= 64 n")
    if rho is None:
        rho = 1.0 + 1e-6 if omega.kind == "segment" else 1.0
    theta0 = np.pi / M if omega.kind == "segment" else 0.0
    paths, counts = level_loops(P, omega, rho, M, level=np.log(rho) / n, theta0=theta0)
    # each boundary loop lies inside exactly one of the level-t contours
    ordered = [None] * struct.ell
    for p in paths:
        probes = p.samples[:: max(1, len(p.samples) // 16)]
        hits = {j for j, g in enumerate(struct.contours) if all(g.winding_number(z) == 1 for z in probes)}
        if len(hits) != 1:
            raise DegenerateConfigurationError("boundary loop does not match a single component")
        j = hits.pop()
        if ordered[j] is not None:
            raise DegenerateConfigurationError("two boundary loops claim the same component")
        ordered[j] = p
    if any(p is None for p in ordered):
        raise DegenerateConfigurationError("boundary tracing missed a component")
    return BoundaryTrace(tuple(ordered), tuple(struct.counts), float(rho), float(theta0), M)
