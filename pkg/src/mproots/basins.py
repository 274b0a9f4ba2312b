"""Basins of attraction in the complex plane, rendered to binary PPM.

Machine-precision ``complex128`` throughout: the pictures are qualitative and a
multiprecision sweep over a quarter-million pixels buys nothing.  Every method
in :mod:`mproots.solvers` carries over by direct substitution, since divided
differences and the weight polynomials make sense over any field.

Pixel ``(row, col)`` sits at ``re_min + col*dx``, ``im_max - row*dy``, so row 0
is the top edge.  The grid is built from integer offsets around the window
centre, which makes a centred window exactly symmetric in floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .solvers import MethodKind, MethodSpec

__all__ = [
    "BasinConfig",
    "BasinResult",
    "NoRootsFound",
    "PALETTE",
    "compute_basin",
    "grid_points",
    "polynomial_roots",
    "render_basin",
    "write_ppm",
]


class NoRootsFound(ValueError):
    """Root preprocessing failed (degenerate or non-finite polynomial)."""


PALETTE = np.array(
    [
        (230, 57, 70),
        (42, 157, 143),
        (69, 123, 157),
        (244, 162, 97),
        (131, 56, 236),
        (233, 196, 106),
        (29, 53, 87),
        (255, 0, 110),
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class BasinConfig:
    polynomial: tuple  # highest degree first
    window: tuple = (-2.0, 2.0, -2.0, 2.0)  # re_min, re_max, im_min, im_max
    resolution: tuple = (256, 256)  # width, height
    max_iters: int = 25
    tol: float = 1e-8
    method: MethodSpec = field(default_factory=MethodSpec.om8)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.polynomial)
        object.__setattr__(self, "polynomial", coeffs)
        re_min, re_max, im_min, im_max = (float(v) for v in self.window)
        object.__setattr__(self, "window", (re_min, re_max, im_min, im_max))
        if not (re_min < re_max and im_min < im_max):
            raise ValueError(f"empty window {self.window}")
        w, h = (int(v) for v in self.resolution)
        if w < 2 or h < 2:
            raise ValueError(f"resolution must be at least 2x2, got {w}x{h}")
        object.__setattr__(self, "resolution", (w, h))
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if len(np.trim_zeros(np.array(coeffs), "f")) < 3:
            raise NoRootsFound("polynomial degree must be at least 2")
        self.method.validate()


def polynomial_roots(coeffs: Sequence[complex], polish_steps: int = 8) -> np.ndarray:
    """All roots of ``coeffs`` (companion eigenvalues, then Newton-polished)."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if c.size < 3:
        raise NoRootsFound("polynomial degree must be at least 2")
    if not np.all(np.isfinite(c)):
        raise NoRootsFound("non-finite coefficient")
    roots = np.roots(c)
    dc = np.polyder(c)
    with np.errstate(all="ignore"):
        for _ in range(polish_steps):
            d = np.polyval(dc, roots)
            step = np.where(d != 0, np.polyval(c, roots) / np.where(d != 0, d, 1), 0)
            roots = roots - step
    if roots.size != c.size - 1 or not np.all(np.isfinite(roots)):
        raise NoRootsFound("root preprocessing produced non-finite values")
    # order deterministically: by argument, then modulus
    order = np.lexsort((np.abs(roots), np.round(np.angle(roots), 12)))
    return roots[order]


def grid_points(cfg: BasinConfig) -> np.ndarray:
    re_min, re_max, im_min, im_max = cfg.window
    w, h = cfg.resolution
    cr, hr = (re_min + re_max) / 2, (re_max - re_min) / 2
    ci, hi = (im_min + im_max) / 2, (im_max - im_min) / 2
    cols = cr + hr * ((2 * np.arange(w) - (w - 1)) / (w - 1))
    rows = ci + hi * (((h - 1) - 2 * np.arange(h)) / (h - 1))
    return cols[None, :] + 1j * rows[:, None]


# ------------------------------------------------------------ array kernels
# Each kernel maps an array of iterates to the next one.  Division by zero
# yields inf/nan, which the driver treats as divergence.


def _dd(a, fa, b, fb):
    return (fa - fb) / (a - b)


def _om8_tail(f, x, fx, slope, w):
    t1 = fx / slope
    y = x - w.A(t1) * t1
    fy = f(y)
    t2 = fy / fx
    z = y - w.B(t2) * fy / _dd(x, fx, y, fy)
    fz = f(z)
    weight = w.P(t2) + w.Q(fz / fy) + w.R(fz / fx)
    x_next = z - weight * fz / _dd(y, fy, z, fz)
    x_next = np.where(fz == 0, z, x_next)
    return np.where(fy == 0, y, x_next)


def _kernel(method: MethodSpec, f, df):
    kind = method.kind
    if kind is MethodKind.NEWTON:
        return lambda x, fx: x - fx / df(x)
    if kind is MethodKind.STEFFENSEN:
        return lambda x, fx: x - fx * fx / (f(x + fx) - fx)
    if kind is MethodKind.OM8:
        return lambda x, fx: _om8_tail(f, x, fx, df(x), method.weights)
    if kind is MethodKind.OM8DF:
        m, a = method.shift_exponent, float(method.shift_scale)

        def om8df(x, fx):
            node = x + a * fx**m
            return _om8_tail(f, x, fx, (f(node) - fx) / (node - x), method.weights)

        return om8df
    if kind is MethodKind.SM7:
        G, H = method.gh

        def sm7(x, fx):
            y = x - fx / df(x)
            fy = f(y)
            t = fy / fx
            z = y - G(t) * fy / _dd(x, fx, y, fy)
            fz = f(z)
            out = np.where(fz == 0, z, z - H(t) * fz / _dd(y, fy, z, fz))
            return np.where(fy == 0, y, out)

        return sm7
    raise ValueError(f"unsupported method {method.label}")


@dataclass
class BasinResult:
    roots: np.ndarray
    index: np.ndarray  # root index per pixel, -1 where nothing was reached
    iterations: np.ndarray
    final: np.ndarray  # last iterate per pixel


def compute_basin(cfg: BasinConfig) -> BasinResult:
    coeffs = np.asarray(cfg.polynomial, dtype=complex)
    roots = polynomial_roots(coeffs)
    dcoeffs = np.polyder(coeffs)
    f = lambda z: np.polyval(coeffs, z)  # noqa: E731
    df = lambda z: np.polyval(dcoeffs, z)  # noqa: E731
    step = _kernel(cfg.method, f, df)

    z = grid_points(cfg).ravel()
    index = np.full(z.shape, -1, dtype=np.int64)
    iters = np.zeros(z.shape, dtype=np.int64)

    def classify(ids, k):
        dist = np.abs(z[ids, None] - roots[None, :])
        hit = dist < cfg.tol
        found = hit.any(axis=1)
        index[ids[found]] = np.argmax(hit[found], axis=1)
        iters[ids[found]] = k
        return ids[~found]

    active = classify(np.arange(z.size), 0)
    with np.errstate(all="ignore"):
        for k in range(1, cfg.max_iters + 1):
            if not active.size:
                break
            x = z[active]
            fx = f(x)
            nxt = np.where(fx == 0, x, step(x, fx))
            alive = np.isfinite(nxt)
            z[active] = np.where(alive, nxt, x)
            active = classify(active[alive], k)
    shape = cfg.resolution[::-1]
    return BasinResult(roots, index.reshape(shape), iters.reshape(shape), z.reshape(shape))


def _pixels(cfg: BasinConfig, res: BasinResult) -> np.ndarray:
    shade = 1.0 - 0.75 * res.iterations / cfg.max_iters
    colours = PALETTE[res.index % len(PALETTE)] * shade[..., None]
    colours[res.index < 0] = 0
    return np.clip(np.rint(colours), 0, 255).astype(np.uint8)


def render_basin(cfg: BasinConfig) -> bytes:
    """PPM P6 bytes: colour = root reached, brightness falls with iteration count."""
    res = compute_basin(cfg)
    w, h = cfg.resolution
    return f"P6\n{w} {h}\n255\n".encode("ascii") + _pixels(cfg, res).tobytes()


def write_ppm(path, data: bytes) -> Path:
    path = Path(path)
    path.write_bytes(data)
    return path
