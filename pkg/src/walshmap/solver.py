"""Lemniscatic data ``(a_j, m_j, cap(E), Q)`` of a polynomial pre-image.

Every scheme returned by ``solve`` has passed ``validate_scheme``: the
identity ``Q(Phi(z)) = Psi(P(z))`` on a probe ring, the center-sum
constraint, the critical value relations, ``Phi(z_*) = w_*`` at exterior
critical points, and the moment oracle
``(1/2 pi i) oint_{gamma_j} Phi(z) 2 d_z g_E(z) dz = m_j a_j``.
The last two are what separates the correct n-th root branch from the
others that share its critical values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .green import LemniscateGreen, contour_moment
from .poly import Polynomial
from .preimage import level_loops
from .walsh import BranchAssignmentError, TrackingError, WalshMap, phi_boundary

__all__ = [
    "LemniscaticScheme",
    "ValidationReport",
    "UnsolvedError",
    "AmbiguousBranchError",
    "capacity",
    "exponents",
    "make_scheme",
    "solve",
    "centers_two_components",
    "centers_general",
    "centers_fixed_point",
    "validate_scheme",
    "moment_centers",
    "centers_monomial",
]

VALID_TOL = 1e-8
MOMENT_TOL = 1e-6


class UnsolvedError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AmbiguousBranchError(UnsolvedError):
    pass


@dataclass(frozen=True)
class LemniscaticScheme:
    centers: tuple
    exponents: tuple  # Fractions n_j / n
    counts: tuple
    capacity: float
    Q: Polynomial = field(repr=False)
    provenance: str = ""

    @property
    def ell(self):
        return len(self.centers)

    @property
    def n(self):
        return self.Q.degree

    def contains(self, w):
        """Membership in ``L = {|Q| <= 1}``."""
        return np.abs(self.Q(w)) <= 1.0

    def abs_U(self, w):
        return self.capacity * np.abs(self.Q(w)) ** (1.0 / self.n)

    def green(self):
        return LemniscateGreen.from_scheme(self)


def capacity(P, omega):
    return (omega.capacity / abs(P.leading)) ** (1.0 / P.degree)


def exponents(struct):
    return tuple(Fraction(nj, struct.degree) for nj in struct.counts)


def make_scheme(P, omega, centers, counts, provenance):
    centers = tuple(complex(a) for a in centers)
    counts = tuple(int(c) for c in counts)
    n = P.degree
    if sum(counts) != n:
        raise ValueError("counts must sum to the degree")
    roots = [a for a, c in zip(centers, counts) for _ in range(c)]
    Q = Polynomial.from_roots(roots, leading=omega.d1 * P.leading)
    return LemniscaticScheme(
        centers, tuple(Fraction(c, n) for c in counts), counts, capacity(P, omega), Q, provenance
    )


# -- validation -------------------------------------------------------------------

@dataclass
class ValidationReport:
    ring_identity: float = math.inf
    green_match: float = math.inf
    center_sum: float = math.inf
    critical_values: float = 0.0
    critical_map: float = 0.0
    moments: tuple = ()  # per component |moment / m_j - a_j|
    boundary_modulus: float | None = None
    boundary_identity: float | None = None
    note: str = ""

    @property
    def moment(self):
        return max(self.moments) if self.moments else math.inf

    @property
    def residual(self):
        vals = [self.ring_identity, self.center_sum, self.critical_values, self.critical_map]
        if self.boundary_identity is not None:
            vals.append(self.boundary_identity)
        return max(vals)

    def ok(self, tol=VALID_TOL, moment_tol=MOMENT_TOL):
        return self.residual < tol and self.moment < moment_tol

    def as_dict(self):
        d = {
            "ring_identity": self.ring_identity,
            "green_match": self.green_match,
            "center_sum": self.center_sum,
            "critical_values": self.critical_values,
            "critical_map": self.critical_map,
            "moment": self.moment,
        }
        if self.boundary_modulus is not None:
            d["boundary_modulus"] = self.boundary_modulus
            d["boundary_identity"] = self.boundary_identity
        return d


def _crit_poly_Q(centers, counts):
    """``sum_k n_k prod_{j != k} (w - a_j)``."""
    total = Polynomial([0.0])
    for k, nk in enumerate(counts):
        others = [a for j, a in enumerate(centers) if j != k]
        total = total + Polynomial.from_roots(others, leading=float(nk))
    return total


def _ring(struct, center, probes):
    r = max(float(np.max(np.abs(c.samples - center))) for c in struct.contours)
    t = 2.0 * np.pi * (np.arange(probes) + 0.5) / probes
    return center + 2.0 * r * np.exp(1j * t)


def validate_scheme(scheme, P, omega, struct, probes=512, boundary=None, quick=False):
    """Residual report; ``boundary`` is an optional ``BoundaryTrace``."""
    rep = ValidationReport()
    n = P.degree
    center = -P.coeffs[0] / P.coeffs[1] if n == 1 else -P.subleading / (n * P.leading)
    if n >= 2:
        s = sum(nj * a for nj, a in zip(scheme.counts, scheme.centers))
        rep.center_sum = abs(s + P.subleading / P.leading)
    else:
        a1 = -(omega.d1 * P.coeffs[0] + omega.d0) / (omega.d1 * P.coeffs[1])
        rep.center_sum = abs(scheme.centers[0] - a1)
    try:
        wm = WalshMap(scheme, P, omega)
        # critical points of P outside E against critical points of Q outside L
        zc_all = [z for z, _ in struct.crit_exterior]
        if zc_all:
            wstar = _crit_poly_Q(scheme.centers, scheme.counts).roots() if scheme.ell > 1 else np.array([])
            seen = []
            cv = cm = 0.0
            for z in zc_all:
                if any(abs(z - s_) < 1e-9 * wm.scale for s_ in seen):
                    continue
                seen.append(z)
                wz = wm.mean_value(z)
                k = int(np.argmin(np.abs(wstar - wz)))
                cm = max(cm, abs(wstar[k] - wz))
                v = wm.target(z)
                cv = max(cv, abs(scheme.Q(wstar[k]) - v) / max(1.0, abs(v)))
            rep.critical_values, rep.critical_map = cv, cm
            if quick and rep.critical_map > 1e-6:
                return rep
        ring = _ring(struct, center, probes)
        w = wm.track(ring)
        rep.ring_identity = float(np.max(np.abs(scheme.Q(w) - wm.target(ring))))
        gL = LemniscateGreen.from_scheme(scheme).value(w)
        rep.green_match = float(np.max(np.abs(gL - wm.field.value(ring))))
        rep.moments = tuple(
            abs(mom - a) for mom, a in zip(_moments(wm, struct), scheme.centers)
        )
        if boundary is not None and not quick:
            corr = phi_boundary(scheme, P, omega, boundary)
            bm = bi = 0.0
            for loop, wv in zip(corr.z_loops, corr.w_values):
                q = scheme.Q(wv)
                bm = max(bm, float(np.max(np.abs(np.abs(q) - boundary.rho))))
                bi = max(bi, float(np.max(np.abs(q - wm.target(loop.nodes)))))
            rep.boundary_modulus, rep.boundary_identity = bm, bi
    except (TrackingError, BranchAssignmentError, ZeroDivisionError) as exc:
        rep.note = str(exc)
        rep.ring_identity = math.inf
    return rep


# -- center formulas ----------------------------------------------------------------

def _center_shift(P):
    return -P.subleading / (P.degree * P.leading)


def centers_monomial(P, omega):
    """Centers for ``alpha (z - beta)^n + gamma`` (no labeling applied)."""
    alpha, beta, gamma = P.monomial_form()
    if omega.contains(gamma):
        return [beta]
    base = -omega.riemann_map(gamma) / (omega.d1 * alpha)
    n = P.degree
    r = abs(base) ** (1.0 / n)
    return [beta + r * np.exp(1j * (np.angle(base) + 2.0 * np.pi * k) / n) for k in range(n)]


def _label_by_winding(P, omega, struct, centers, counts, provenance):
    """Order centers so that component j's image loop winds around a_j."""
    trial = make_scheme(P, omega, centers, counts, provenance)
    wm = WalshMap(trial, P, omega)
    rho = float(np.exp(P.degree * struct.level))
    M = (len(struct.contours[0].samples) - 1) // struct.counts[0]
    ws = wm.on_loops(struct.contours, struct.counts, rho, 0.0, M)
    order = []
    for wv in ws:
        loop = np.append(wv, wv[0])
        hits = [i for i, a in enumerate(centers) if abs(round(np.sum(np.angle((loop[1:] - a) / (loop[:-1] - a))) / (2 * np.pi))) == 1]
        if len(hits) != 1:
            raise UnsolvedError("could not attach centers to components")
        order.append(hits[0])
    return [centers[i] for i in order]


def centers_fixed_point(P, omega, struct):
    """Disk case where each component holds a single distinct zero.

    Returns the zeros ``b_j`` when ``P = p_n prod (z - b_j)^{n_j}`` with one
    ``b_j`` per component, else None.
    """
    if omega.kind != "disk":
        return None
    comps = [[] for _ in range(struct.ell)]
    for r, j in struct.root_components:
        comps[j].append(r)
    scale = max(1.0, max(abs(r) for r, _ in struct.root_components))
    b = []
    for roots in comps:
        roots = np.array(roots)
        c = complex(roots.mean())
        if np.max(np.abs(roots - c)) > 1e-6 * scale:
            return None
        b.append(c)
    Qp = Polynomial.from_roots([bj for bj, nj in zip(b, struct.counts) for _ in range(nj)], leading=P.leading)
    if np.max(np.abs(Qp.coeffs - P.coeffs)) > 1e-10 * np.max(np.abs(P.coeffs)):
        return None
    # replace the root centroids by the exact zeros of the factorization
    return b


def _two_component_candidates(P, omega, struct):
    n = P.degree
    n1, n2 = struct.counts
    c = _center_shift(P)
    zs = struct.crit_exterior[0][0]
    v = omega.riemann_map(P(zs))
    K = (n1 / n2) ** n2 * (-1) ** n2 / (omega.d1 * P.leading) * v
    sym = struct.symmetry
    real_like = P.is_real() or Polynomial(1j * np.asarray(P.coeffs)).is_real()
    closed = None
    if real_like and sym is not None and all(sym.per_component_conj_symmetric):
        if K.real > 0 and abs(K.imag) <= 1e-10 * abs(K):
            closed = c + K.real ** (1.0 / n)
    r = abs(K) ** (1.0 / n)
    cands = [c + r * np.exp(1j * (np.angle(K) + 2.0 * np.pi * k) / n) for k in range(n)]
    if closed is not None:
        cands.sort(key=lambda a: abs(a - closed))
        cands[0] = closed
    out = []
    for a2 in cands:
        a1 = -(P.subleading / P.leading + n2 * a2) / n1
        out.append((a1, a2))
    return out, closed is not None


def centers_two_components(P, omega, struct, return_report=False):
    """Centers for two components, selected by residual validation."""
    if struct.ell != 2:
        raise ValueError("centers_two_components needs exactly two components")
    cands, symmetric = _two_component_candidates(P, omega, struct)
    reports = []
    good = []
    for k, (a1, a2) in enumerate(cands):
        sch = make_scheme(P, omega, (a1, a2), struct.counts, "two_components")
        rep = validate_scheme(sch, P, omega, struct, quick=True)
        reports.append(rep)
        if rep.ok():
            good.append(k)
            if symmetric and k == 0:
                break
    if not good:
        raise UnsolvedError(
            "no n-th root branch validates for the two-component formula",
            {"residuals": [r.as_dict() for r in reports]},
        )
    if len(good) > 1:
        raise AmbiguousBranchError(
            f"{len(good)} branches validate; refusing to pick one",
            {"candidates": [cands[k] for k in good]},
        )
    a1, a2 = cands[good[0]]
    if return_report:
        return (complex(a1), complex(a2)), reports[good[0]]
    return complex(a1), complex(a2)


def _crit_groups(struct):
    """Distinct exterior critical points of P as ``[(z, multiplicity), ...]``."""
    groups = []
    for z, _ in struct.crit_exterior:
        z = complex(z)
        for g in groups:
            if abs(g[0] - z) <= 1e-8 * (1.0 + abs(z)):
                g[1] += 1
                break
        else:
            groups.append([z, 1])
    return [(z, k) for z, k in groups]


def _newton_centers(P, omega, struct, a0, groups, w0, maxiter=100):
    """Newton on centers and critical images jointly.

    Unknowns ``a_1..a_l`` and ``w_r`` (one per distinct exterior critical
    point ``z_r`` of multiplicity ``k_r``).  Since ``Q o Phi = Psi o P``,
    ``w_r = Phi(z_r)`` is a critical point of Q of the same multiplicity:
    ``Q(w_r) = Psi(P(z_r))`` and ``Q^(i)(w_r) = 0`` for ``i = 1..k_r``.
    With the center sum this is square and stays regular when critical
    points coincide.
    """
    counts = struct.counts
    n, ell = P.degree, struct.ell
    target_sum = -P.subleading / P.leading
    lead = omega.d1 * P.leading
    S = max(1.0, float(np.max(np.abs(a0))))
    vals = [complex(omega.riemann_map(P(z))) for z, _ in groups]
    norms = [[abs(lead) * math.perm(n, i) * S ** (n - i) for i in range(k + 1)] for _, k in groups]

    def F(x):
        a, w = x[:ell], x[ell:]
        Q = Polynomial.from_roots([aj for aj, nj in zip(a, counts) for _ in range(nj)], leading=lead)
        eqs = []
        for (_, k), wr, vr, nr in zip(groups, w, vals, norms):
            eqs.append((Q(wr) - vr) / max(1.0, abs(vr)))
            D = Q
            for i in range(1, k + 1):
                D = D.derivative()
                eqs.append(D(wr) / nr[i])
        eqs.append((sum(nj * aj for nj, aj in zip(counts, a)) - target_sum) / S)
        return np.array(eqs, dtype=complex)

    x = np.concatenate([np.asarray(a0, dtype=complex), np.asarray(w0, dtype=complex)])
    h = 1e-7 * S
    f = F(x)
    trace = [float(np.linalg.norm(f))]
    for _ in range(maxiter):
        J = np.empty((len(f), len(x)), dtype=complex)
        for k in range(len(x)):
            e = np.zeros(len(x), dtype=complex)
            e[k] = h
            J[:, k] = (F(x + e) - F(x - e)) / (2 * h)
        step = np.linalg.lstsq(J, -f, rcond=None)[0]
        lam = 1.0
        for _ in range(30):
            f_new = F(x + lam * step)
            if np.linalg.norm(f_new) < np.linalg.norm(f) * (1 - 1e-4 * lam) + 1e-15:
                break
            lam *= 0.5
        x, f = x + lam * step, f_new
        trace.append(float(np.linalg.norm(f)))
        if np.max(np.abs(lam * step)) <= 1e-15 * S or trace[-1] < 1e-15:
            return x[:ell], trace
    raise UnsolvedError("Newton iteration for the centers did not converge in 100 steps", {"trace": trace})


def centers_general(P, omega, struct):
    """Centers for three or more components by Newton on the critical-value equations.

    Start: centroids of the analysis contours for the centers, and for the
    critical images first ``w_r = z_r`` (``Phi`` is close to the identity
    away from E), then each pairing with the critical points of the
    starting Q, nearest first, until one candidate validates.
    """
    if struct.ell == 2:
        return centers_two_components(P, omega, struct)
    if struct.ell < 2:
        raise ValueError("centers_general needs at least two components")
    a0 = np.array([np.mean(c.nodes) for c in struct.contours])
    groups = _crit_groups(struct)
    zr = np.array([z for z, _ in groups])
    starts = [zr]
    if all(k == 1 for _, k in groups):
        w_init = _crit_poly_Q(a0, struct.counts).roots()
        perms = sorted(
            itertools.permutations(range(len(zr))),
            key=lambda p: sum(abs(w_init[p[k]] - zr[k]) for k in range(len(zr))),
        )
        starts += [w_init[list(p)] for p in perms[:24]]
    failures = []
    for w0 in starts:
        try:
            a, _ = _newton_centers(P, omega, struct, a0, groups, w0)
        except UnsolvedError as exc:
            failures.append(str(exc))
            continue
        sch = make_scheme(P, omega, a, struct.counts, "general_newton")
        rep = validate_scheme(sch, P, omega, struct, quick=True)
        if rep.ok():
            return tuple(complex(x) for x in a)
        failures.append(f"start {np.round(w0, 6).tolist()}: residual {rep.residual:.2e}, moment {rep.moment:.2e}")
    raise UnsolvedError("Newton solve for the centers found no validated solution", {"attempts": failures})


# -- dispatcher -----------------------------------------------------------------------

def solve(P, omega, struct, boundary=None, tol=VALID_TOL):
    """Lemniscatic scheme of ``E = P^{-1}(Omega)``; raises UnsolvedError."""
    n = P.degree
    counts = struct.counts
    if n == 1:
        a1 = -(omega.d1 * P.coeffs[0] + omega.d0) / (omega.d1 * P.coeffs[1])
        centers, prov = [a1], "linear"
    elif P.monomial_form() is not None:
        centers, prov = centers_monomial(P, omega), "monomial_family"
        if len(centers) != struct.ell:
            raise UnsolvedError("monomial family center count disagrees with the component count")
        if struct.ell > 1:
            centers = _label_by_winding(P, omega, struct, centers, counts, prov)
    elif struct.ell == 1:
        centers, prov = [_center_shift(P)], "connected"
    elif (b := centers_fixed_point(P, omega, struct)) is not None:
        centers, prov = b, "fixed_point"
    elif struct.ell == 2:
        centers, prov = list(centers_two_components(P, omega, struct)), "two_components"
    else:
        centers, prov = list(centers_general(P, omega, struct)), "general_newton"
    scheme = make_scheme(P, omega, centers, counts, prov)
    rep = validate_scheme(scheme, P, omega, struct, boundary=boundary)
    if not rep.ok(tol):
        raise UnsolvedError(
            f"{prov} scheme failed validation (residual {rep.residual:.2e}, moment {rep.moment:.2e})",
            {"report": rep.as_dict(), "note": rep.note},
        )
    return scheme


def _relevel(P, omega, struct, M):
    """Analysis contours re-traced with ``M`` samples per turn, same order."""
    rho = float(np.exp(P.degree * struct.level))
    paths, counts = level_loops(P, omega, rho, M, level=struct.level)
    means = np.array([np.mean(c.nodes) for c in struct.contours])
    out = [None] * len(paths)
    for p in paths:
        j = int(np.argmin(np.abs(means - np.mean(p.nodes))))
        out[j] = p
    if any(p is None for p in out):
        raise BranchAssignmentError("re-traced contours do not match the analysis contours")
    return out


def _moments(wm, struct, tol=1e-11, max_M=8192):
    """Per-component ``(1/m_j)(1/2 pi i) oint Phi 2 d_z g_E dz``.

    The sampling is doubled until the half-resolution estimate agrees.
    """
    P, omega = wm.P, wm.omega
    rho = float(np.exp(P.degree * struct.level))
    M = (len(struct.contours[0].samples) - 1) // struct.counts[0]
    paths = list(struct.contours)
    ex = [float(m) for m in wm.scheme.exponents]
    while True:
        ws = wm.on_loops(paths, struct.counts, rho, 0.0, M)
        full = [contour_moment(wm.field, p, w) / m for p, w, m in zip(paths, ws, ex)]
        half = [contour_moment(wm.field, p.subsample(2), w[::2]) / m for p, w, m in zip(paths, ws, ex)]
        err = max(abs(a - b) for a, b in zip(full, half))
        if err < tol * wm.scale or 2 * M > max_M:
            return full
        M *= 2
        paths = _relevel(P, omega, struct, M)


def moment_centers(scheme, P, omega, struct):
    """Centers recovered from ``(1/2 pi i) oint Phi 2 d_z g_E dz / m_j``."""
    return tuple(complex(c) for c in _moments(WalshMap(scheme, P, omega), struct))
