"""Command line: ``walshmap {analyze,map,render,verify} --config PATH --out DIR``.

Exit codes: 0 success, 1 verification failure, 2 invalid config,
3 solver failure, 4 output could not be written.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .green import ContourPath, contour_period
from .poly import RootFindingError
from .preimage import DegenerateConfigurationError, GridResolutionError, analyze, trace_boundary
from .render import blank, draw_polyline, phase_image, write_ppm
from .solver import UnsolvedError, make_scheme, solve, validate_scheme
from .walsh import BranchAssignmentError, NearBoundaryError, TrackingError, WalshMap, phi_boundary, phi_cauchy

log = logging.getLogger("walshmap")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4

SOLVER_ERRORS = (
    UnsolvedError,
    TrackingError,
    BranchAssignmentError,
    DegenerateConfigurationError,
    GridResolutionError,
    RootFindingError,
)


def fmt(x):
    """Nine significant digits, shortest round-trip text."""
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    v = float(f"{x:.9g}")
    return repr(v + 0.0)  # + 0.0 folds -0.0 into 0.0


def num(x):
    """JSON-ready number with the same rounding as ``fmt``."""
    x = float(x)
    if not math.isfinite(x):
        return fmt(x)
    return float(f"{x:.9g}") + 0.0


def pair(z):
    return [num(complex(z).real), num(complex(z).imag)]


@dataclass
class Problem:
    cfg: object
    struct: object
    scheme: object
    trace: object


def build(cfg):
    P, omega = cfg.polynomial, cfg.omega
    struct = analyze(P, omega)
    trace = trace_boundary(P, omega, struct)
    if cfg.center_override is not None:
        if len(cfg.center_override) != struct.ell:
            raise ConfigError(
                f"overrides.centers has {len(cfg.center_override)} entries, E has {struct.ell} components"
            )
        scheme = make_scheme(P, omega, cfg.center_override, struct.counts, "override")
    else:
        scheme = solve(P, omega, struct, boundary=trace, tol=cfg.tolerances["validation"])
    return Problem(cfg, struct, scheme, trace)


# -- analyze ------------------------------------------------------------------------

def report(prob):
    s, sch = prob.struct, prob.scheme
    rep = validate_scheme(sch, prob.cfg.polynomial, prob.cfg.omega, s, boundary=prob.trace)
    crit = [{"z": pair(z), "value": pair(v), "exterior": True} for z, v in s.crit_exterior]
    crit += [{"z": pair(z), "value": pair(v), "exterior": False} for z, v in s.crit_interior]
    crit.sort(key=lambda d: (d["z"][0], d["z"][1]))
    return {
        "degree": s.degree,
        "omega": prob.cfg.omega.to_dict(),
        "ell": s.ell,
        "counts": list(s.counts),
        "exponents": [f"{m.numerator}/{m.denominator}" for m in sch.exponents],
        "exponents_decimal": [num(float(m)) for m in sch.exponents],
        "capacity": num(sch.capacity),
        "centers": [pair(a) for a in sch.centers],
        "critical_points": crit,
        "periods": [num(p) for p in s.periods],
        "provenance": sch.provenance,
        "residuals": {k: num(v) for k, v in rep.as_dict().items()},
    }


def dump(doc):
    return json.dumps(doc, indent=2) + "\n"


# -- map ----------------------------------------------------------------------------

def grid_values(prob):
    """``(X, Y, inside, phi)`` on the config grid; ``phi`` is NaN inside E."""
    cfg = prob.cfg
    x, y = cfg.grid.axes()
    Z = x[None, :] + 1j * y[:, None]
    wm = WalshMap(prob.scheme, cfg.polynomial, cfg.omega)
    inside = ~wm.exterior(Z)
    phi = np.full(Z.shape, np.nan + 0j)
    if (~inside).any():
        phi[~inside] = wm.track(Z[~inside], inside="nan")
    return Z, inside, phi


def cauchy_loops(prob):
    """Correspondence for the Cauchy integral: the boundary, or for the
    segment a level curve halfway to the analysis contours."""
    P, omega, s = prob.cfg.polynomial, prob.cfg.omega, prob.struct
    trace = prob.trace
    if omega.kind == "segment":
        trace = trace_boundary(P, omega, s, rho=float(np.exp(P.degree * s.level / 2.0)))
    return phi_boundary(prob.scheme, P, omega, trace)


def cauchy_crosscheck(prob, Z, inside, phi, count=64):
    corr = cauchy_loops(prob)
    pts = Z[~inside]
    vals = phi[~inside]
    step = max(1, len(pts) // count)
    worst, checked = 0.0, 0
    for z, w in zip(pts[::step], vals[::step]):
        try:
            wc = phi_cauchy(corr, z)
        except NearBoundaryError:
            continue
        worst = max(worst, abs(wc - w))
        checked += 1
    return worst, checked


def map_csv(Z, inside, phi):
    lines = ["x,y,in_E,re_phi,im_phi"]
    ny, nx = Z.shape
    for i in range(ny):
        for j in range(nx):
            z = Z[i, j]
            if inside[i, j]:
                lines.append(f"{fmt(z.real)},{fmt(z.imag)},1,,")
            else:
                w = phi[i, j]
                lines.append(f"{fmt(z.real)},{fmt(z.imag)},0,{fmt(w.real)},{fmt(w.imag)}")
    return "\n".join(lines) + "\n"


# -- render -------------------------------------------------------------------------

def _grid_lines(cfg, count=11, samples=400):
    g = cfg.grid
    out = []
    for x in np.linspace(g.xmin, g.xmax, count):
        out.append(x + 1j * np.linspace(g.ymin, g.ymax, samples))
    for y in np.linspace(g.ymin, g.ymax, count):
        out.append(np.linspace(g.xmin, g.xmax, samples) + 1j * y)
    return out


def render_panels(prob, Z, inside, phi, which):
    cfg = prob.cfg
    g = cfg.grid
    box = (g.xmin, g.xmax, g.ymin, g.ymax)
    images = {}
    if "phase" in which:
        images["phase"] = phase_image(phi, inside)
    if "domain" in which or "image" in which:
        wm = WalshMap(prob.scheme, cfg.polynomial, cfg.omega)
        lines = _grid_lines(cfg)
        corr = phi_boundary(prob.scheme, cfg.polynomial, cfg.omega, prob.trace)
    if "domain" in which:
        img = blank(g.nx, g.ny)
        img[inside[::-1]] = 210
        for ln in lines:
            gl = wm.field.value(ln, check=False)
            draw_polyline(img, np.where(gl > 0, ln, np.nan), box, (150, 150, 150))
        for loop in prob.trace.loops:
            draw_polyline(img, loop.samples, box)
        images["domain"] = img
    if "image" in which:
        img = blank(g.nx, g.ny)
        in_L = prob.scheme.contains(Z)
        img[in_L[::-1]] = 210
        for ln in lines:
            draw_polyline(img, wm.track(ln, inside="nan"), box, (150, 150, 150))
        for w in corr.w_closed:
            draw_polyline(img, w, box)
        images["image"] = img
    return images


# -- verify -------------------------------------------------------------------------

def verify_table(prob):
    cfg = prob.cfg
    P, omega, s, sch = cfg.polynomial, cfg.omega, prob.struct, prob.scheme
    tol = cfg.tolerances
    rep = validate_scheme(sch, P, omega, s, boundary=prob.trace)
    rows = [
        ("center_sum", rep.center_sum, tol["center_sum"]),
        ("exponent_sum", abs(float(sum(sch.exponents)) - 1.0), 0.0),
        ("ring_identity", rep.ring_identity, tol["identity"]),
        ("critical_identity", rep.critical_values, tol["identity"]),
        ("critical_map", rep.critical_map, tol["validation"]),
        ("green_match", rep.green_match, tol["green"]),
        ("moment_centers", rep.moment, tol["moment"]),
    ]
    if rep.boundary_identity is not None:
        rows.append(("boundary_identity", rep.boundary_identity, tol["boundary"]))
        rows.append(("boundary_modulus", rep.boundary_modulus, tol["boundary"]))
    else:
        rows.append(("boundary_identity", math.inf, tol["boundary"]))
    periods = max(abs(p - float(m)) for p, m in zip(s.periods, sch.exponents))
    rows.append(("periods", periods, tol["period"]))
    rows.append(("period_sum", _global_period_error(P, omega, s), tol["period_sum"]))
    try:
        wm = WalshMap(sch, P, omega)
        center = np.mean(np.concatenate([c.nodes for c in s.contours]))
        r = max(float(np.max(np.abs(c.samples - center))) for c in s.contours)
        probes = center + 1.5 * r * np.exp(2j * np.pi * (np.arange(16) + 0.5) / 16)
        corr = cauchy_loops(prob)
        cau = float(np.max(np.abs(phi_cauchy(corr, probes) - wm.track(probes))))
    except (TrackingError, BranchAssignmentError, NearBoundaryError, ZeroDivisionError):
        cau = math.inf
    rows.append(("cauchy_agreement", cau, 1e-6))
    return [(name, val, thr, bool(val <= thr)) for name, val, thr in rows]


def _global_period_error(P, omega, struct):
    from .green import PreimageGreen

    pts = np.concatenate([c.nodes for c in struct.contours])
    center = complex(np.mean(pts))
    r = 2.0 * float(np.max(np.abs(pts - center)))
    t = 2.0 * np.pi * np.arange(512) / 512
    z = center + r * np.exp(1j * t)
    path = ContourPath(np.append(z, z[0]), tangent=np.append(1j * (z - center), 1j * (z[0] - center)))
    return abs(contour_period(PreimageGreen(P, omega), path) - 1.0)


# -- entry point ----------------------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="walshmap", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=["analyze", "map", "render", "verify"])
    p.add_argument("--config", default="-", help="config JSON path ('-' or omitted: stdin)")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _write(path, data):
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(data)


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text()
        cfg = load_config(text)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        prob = build(cfg)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "analyze":
            text = dump(report(prob))
            _write(out / "report.json", text)
            sys.stdout.write(text)
            return EXIT_OK
        if args.command == "map":
            Z, inside, phi = grid_values(prob)
            _write(out / "map.csv", map_csv(Z, inside, phi))
            worst, checked = cauchy_crosscheck(prob, Z, inside, phi)
            summary = {"rows": int(Z.size), "in_E": int(inside.sum()), "cauchy_checked": checked,
                       "cauchy_max_diff": num(worst), "cauchy_ok": bool(worst <= 1e-6)}
            sys.stdout.write(dump(summary))
            return EXIT_OK
        if args.command == "render":
            which = [o for o in cfg.outputs if o in ("phase", "domain", "image")] or ["phase", "domain", "image"]
            Z, inside, phi = grid_values(prob)
            for name, img in render_panels(prob, Z, inside, phi, which).items():
                write_ppm(out / f"{name}.ppm", img)
                print(out / f"{name}.ppm")
            return EXIT_OK
        rows = verify_table(prob)
        width = max(len(r[0]) for r in rows)
        for name, val, thr, ok in rows:
            print(f"{name:<{width}}  {fmt(val):>16}  <= {fmt(thr):<8}  {'PASS' if ok else 'FAIL'}")
        doc = {"passed": all(r[3] for r in rows),
               "checks": [{"name": n, "value": num(v), "threshold": num(t), "pass": ok} for n, v, t, ok in rows]}
        _write(out / "verify.json", dump(doc))
        return EXIT_OK if doc["passed"] else EXIT_VERIFY
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
