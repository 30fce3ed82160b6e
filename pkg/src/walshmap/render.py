"""Phase plots and grid panels written as binary PPM (P6)."""

from __future__ import annotations

import colorsys

import numpy as np

__all__ = ["HUE_TABLE", "phase_image", "blank", "draw_polyline", "write_ppm", "read_ppm"]

# 1024 fully saturated colors; hue 0 (arg = -pi) is red, running through
# yellow, green, cyan, blue and magenta back to red
HUE_TABLE = np.array(
    [[round(255 * c) for c in colorsys.hsv_to_rgb(k / 1024, 1.0, 1.0)] for k in range(1024)],
    dtype=np.uint8,
)


def phase_image(values, mask):
    """RGB array for ``values`` (ny, nx), first row at ``ymax``; ``mask`` pixels black."""
    hue = (np.angle(values) + np.pi) / (2.0 * np.pi)
    idx = np.floor(np.nan_to_num(hue) * len(HUE_TABLE)).astype(int) % len(HUE_TABLE)
    rgb = HUE_TABLE[idx]
    rgb[mask | ~np.isfinite(values)] = 0
    return rgb[::-1]


def blank(nx, ny, value=255):
    return np.full((ny, nx, 3), value, dtype=np.uint8)


def draw_polyline(img, pts, box, color=(0, 0, 0)):
    """Rasterize the polyline ``pts`` (complex, NaN breaks it) into ``img``."""
    ny, nx = img.shape[:2]
    xmin, xmax, ymin, ymax = box
    pts = np.asarray(pts, dtype=complex)
    px = (pts.real - xmin) / (xmax - xmin) * (nx - 1)
    py = (ymax - pts.imag) / (ymax - ymin) * (ny - 1)
    for k in range(len(pts) - 1):
        x0, y0, x1, y1 = px[k], py[k], px[k + 1], py[k + 1]
        if not np.isfinite([x0, y0, x1, y1]).all():
            continue
        steps = int(np.ceil(2 * max(abs(x1 - x0), abs(y1 - y0)))) + 1
        if steps > 4 * (nx + ny):
            continue  # jump across the window, not a drawable segment
        t = np.linspace(0.0, 1.0, steps)
        xi = np.rint(x0 + t * (x1 - x0)).astype(int)
        yi = np.rint(y0 + t * (y1 - y0)).astype(int)
        ok = (xi >= 0) & (xi < nx) & (yi >= 0) & (yi < ny)
        img[yi[ok], xi[ok]] = color
    return img


def write_ppm(path, rgb):
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    ny, nx = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path):
    """Read a PPM written by ``write_ppm`` (three header lines, no comments)."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        dims = fh.readline().split()
        maxval = int(fh.readline())
        body = fh.read()
    if magic != b"P6" or maxval != 255:
        raise ValueError("expected an 8-bit binary PPM")
    nx, ny = int(dims[0]), int(dims[1])
    return np.frombuffer(body, dtype=np.uint8, count=nx * ny * 3).reshape(ny, nx, 3)
