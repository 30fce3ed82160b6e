import hashlib
import json
from importlib import resources

import numpy as np
import pytest

from walshmap.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_VERIFY, fmt, main
from walshmap.render import HUE_TABLE, read_ppm

CONFIGS = sorted(p.name for p in resources.files("walshmap").joinpath("configs").iterdir() if p.name.endswith(".json"))


def bundled(name):
    return json.loads(resources.files("walshmap").joinpath("configs", name).read_text())


def run(tmp_path, doc, command, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return main([command, "--config", str(path), "--out", str(tmp_path / "out")])


def identity_config(n=21):
    return {
        "polynomial": [[0, 0], [1, 0]],
        "omega": {"kind": "disk"},
        "grid": {"xmin": -2, "xmax": 2, "ymin": -2, "ymax": 2, "nx": n, "ny": n},
    }


def test_fmt():
    assert fmt(-0.0) == "0.0"
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(1.93745609543) == "1.9374561"


def test_analyze_cubic(tmp_path, capsys):
    assert run(tmp_path, bundled("cubic_two_components.json"), "analyze") == EXIT_OK
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep == json.loads(capsys.readouterr().out)
    assert rep["ell"] == 2 and rep["counts"] == [2, 1]
    assert rep["exponents"] == ["2/3", "1/3"]
    assert rep["capacity"] == 1.0
    (a1, b1), (a2, b2) = rep["centers"]
    assert abs(a1 - 0.0312680) < 1e-5 and abs(a2 - 1.9374640) < 1e-5 and b1 == b2 == 0
    assert rep["residuals"]["ring_identity"] < 1e-8


def test_analyze_star(tmp_path):
    assert run(tmp_path, bundled("star_segment.json"), "analyze") == EXIT_OK
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["ell"] == 1
    assert rep["capacity"] == pytest.approx(0.8705506, abs=1e-7)
    assert rep["centers"] == [[0.0, 0.0]]


def test_invalid_config_exit_code(tmp_path, capsys):
    doc = bundled("ellipse_dots.json")
    doc["omega"]["R"] = 0.5
    assert run(tmp_path, doc, "analyze") == EXIT_CONFIG
    assert "omega.R must satisfy R > 1" in capsys.readouterr().err
    doc = identity_config()
    doc["grid"]["nx"] = 1
    assert run(tmp_path, doc, "analyze") == EXIT_CONFIG
    (tmp_path / "broken.json").write_text("{")
    assert main(["analyze", "--config", str(tmp_path / "broken.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_override_length_is_config_error(tmp_path):
    doc = bundled("cubic_two_components.json")
    doc["overrides"] = {"centers": [[0, 0]]}
    assert run(tmp_path, doc, "verify") == EXIT_CONFIG


def test_degenerate_is_solver_error(tmp_path, capsys):
    doc = identity_config()
    doc["polynomial"] = [[1, 0], [0, 0], [1, 0]]  # critical value on the unit circle
    assert run(tmp_path, doc, "analyze") == EXIT_SOLVER
    assert "degenerate" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    (tmp_path / "blocker").write_text("")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(identity_config()))
    assert main(["analyze", "--config", str(path), "--out", str(tmp_path / "blocker")]) == EXIT_IO


def test_map_identity(tmp_path, capsys):
    assert run(tmp_path, identity_config(), "map") == EXIT_OK
    lines = (tmp_path / "out" / "map.csv").read_text().splitlines()
    assert lines[0] == "x,y,in_E,re_phi,im_phi"
    assert len(lines) == 1 + 21 * 21
    inside = outside = 0
    for line in lines[1:]:
        x, y, flag, re, im = line.split(",")
        if flag == "1":
            assert re == "" and im == ""
            assert float(x) ** 2 + float(y) ** 2 <= 1 + 1e-12
            inside += 1
        else:
            assert float(re) == pytest.approx(float(x), abs=1e-12)
            assert float(im) == pytest.approx(float(y), abs=1e-12)
            outside += 1
    assert inside and outside
    summary = json.loads(capsys.readouterr().out)
    assert summary["cauchy_ok"]


def test_map_cubic_deforms_grid(tmp_path, capsys):
    doc = bundled("cubic_two_components.json")
    doc["grid"].update(nx=25, ny=25)
    assert run(tmp_path, doc, "map") == EXIT_OK
    rows = [r.split(",") for r in (tmp_path / "out" / "map.csv").read_text().splitlines()[1:]]
    moved = [abs(complex(float(r[3]), float(r[4])) - complex(float(r[0]), float(r[1]))) for r in rows if r[2] == "0"]
    assert 1e-3 < max(moved) < 1.0
    assert json.loads(capsys.readouterr().out)["cauchy_max_diff"] < 1e-6


def test_render_identity_phase(tmp_path):
    assert run(tmp_path, identity_config(41), "render") == EXIT_OK
    img = read_ppm(tmp_path / "out" / "phase.ppm")
    assert img.shape == (41, 41, 3)
    assert (tmp_path / "out" / "phase.ppm").read_bytes().startswith(b"P6\n41 41\n255\n")
    # first row is y = ymax: the top middle pixel has arg pi/2
    k = int(np.floor(0.75 * len(HUE_TABLE)))
    assert tuple(img[0, 20]) == tuple(HUE_TABLE[k])
    # hue depends on the polar angle only: same color along a diagonal ray
    assert tuple(img[0, 40]) == tuple(img[5, 35]) == tuple(img[10, 30])
    assert tuple(img[20, 20]) == (0, 0, 0)  # origin lies in E


def test_render_star_mask_and_hash(tmp_path):
    doc = bundled("star_segment.json")
    doc["grid"].update(nx=101, ny=101)
    assert run(tmp_path, doc, "render") == EXIT_OK
    for panel in ("phase", "domain", "image"):
        assert read_ppm(tmp_path / "out" / f"{panel}.ppm").shape == (101, 101, 3)
    img = read_ppm(tmp_path / "out" / "phase.ppm")
    assert run(tmp_path, doc, "map") == EXIT_OK
    rows = (tmp_path / "out" / "map.csv").read_text().splitlines()[1:]
    in_E = np.array([r.split(",")[2] == "1" for r in rows]).reshape(101, 101)[::-1]
    black = np.all(img == 0, axis=2)
    assert np.array_equal(black, in_E)
    digest = hashlib.sha256((tmp_path / "out" / "phase.ppm").read_bytes()).hexdigest()
    assert digest == STAR_PHASE_SHA256


STAR_PHASE_SHA256 = "1b1be429ce7ae7638f10e2a4173acfd3b09a70f6af31b3aaa63872013ab79b7e"


@pytest.mark.parametrize("name", CONFIGS)
def test_verify_bundled(tmp_path, name):
    assert run(tmp_path, bundled(name), "verify") == EXIT_OK
    doc = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert doc["passed"]


def test_verify_fixed_point_is_exact(tmp_path):
    assert run(tmp_path, bundled("fixed_point.json"), "verify") == EXIT_OK
    checks = {c["name"]: c["value"] for c in json.loads((tmp_path / "out" / "verify.json").read_text())["checks"]}
    assert checks["ring_identity"] < 1e-10 and checks["boundary_identity"] < 1e-10


def test_verify_tampered(tmp_path, capsys):
    doc = bundled("cubic_two_components.json")
    doc["overrides"] = {"centers": [[0.0312719523 + 1e-3, 0], [1.9374560954, 0]]}
    assert run(tmp_path, doc, "verify") == EXIT_VERIFY
    failed = {c["name"] for c in json.loads((tmp_path / "out" / "verify.json").read_text())["checks"] if not c["pass"]}
    assert {"critical_identity", "center_sum"} <= failed
    assert "FAIL" in capsys.readouterr().out
