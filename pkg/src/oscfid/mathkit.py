"""Quadrature primitives and a few special functions.

The 1D integrator is a globally adaptive Gauss-Kronrod (G7/K15) scheme with
vectorised integrand evaluation; the 2D integrator uses the tensor product of
the same rule on rectangles, or stratified Monte-Carlo for discontinuous
integrands.  Integrands must accept and return numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtri

__all__ = [
    "QuadratureResult",
    "QuadratureBudgetError",
    "Plane",
    "Disk",
    "Rect",
    "integrate_1d",
    "integrate_2d",
    "gaussian_inverse_square",
    "log_gamma",
    "hermite_eval",
    "hermite_functions",
]

# Kronrod 15-point nodes on [-1, 1] (non-negative half) and weights, with the
# embedded 7-point Gauss weights on the odd-indexed nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])           # 15 nodes, ascending
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
_GW = np.zeros(15)
_GW[1:7:2] = _WG[:3]
_GW[7] = _WG[3]
_GW[8:15][1::2] = _WG[:3][::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be at least 1")


class QuadratureBudgetError(RuntimeError):
    """Raised when the evaluation budget runs out before convergence.

    The best available estimate is kept on ``result``.
    """

    def __init__(self, result: QuadratureResult):
        super().__init__(
            f"quadrature did not converge: value={result.value!r}, "
            f"error={result.error_estimate:.3e} after {result.evaluations} evaluations"
        )
        self.result = result


# -- integration domains -----------------------------------------------------

@dataclass(frozen=True)
class Plane:
    """All of R^2."""


@dataclass(frozen=True)
class Disk:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("rectangle bounds must be ordered")


Interval2D = Plane | Disk | Rect


# -- variable substitutions --------------------------------------------------

def _segment_map(a: float, b: float):
    """Return (s0, s1, phi) with x = phi(s) mapping [s0, s1] onto [a, b].

    phi returns (x, dx/ds).  Infinite ends use rational maps so that the
    open Kronrod rule never evaluates the point at infinity.
    """
    if math.isfinite(a) and math.isfinite(b):
        return a, b, lambda s: (s, np.ones_like(s))
    if math.isfinite(a):
        def phi(s):
            d = 1.0 - s
            return a + s / d, 1.0 / (d * d)
        return 0.0, 1.0, phi
    if math.isfinite(b):
        def phi(s):
            d = 1.0 - s
            return b - s / d, 1.0 / (d * d)
        return 0.0, 1.0, phi

    def phi(s):
        d = 1.0 - s * s
        return s / d, (1.0 + s * s) / (d * d)
    return -1.0, 1.0, phi


def _split_domain(a: float, b: float, breakpoints: Sequence[float] | None):
    pts = sorted(float(p) for p in (breakpoints or ()) if a < p < b)
    edges = [a, *pts, b]
    return list(zip(edges[:-1], edges[1:]))


# -- 1D ----------------------------------------------------------------------

def _gk_batch(g: Callable, lo: np.ndarray, hi: np.ndarray):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    s = mid[:, None] + half[:, None] * _NODES[None, :]
    with np.errstate(all="ignore"):
        vals = g(s)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    k = half * (vals @ _KW)
    gauss = half * (vals @ _GW)
    return k, np.abs(k - gauss)


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                 tol: float = 1e-8, rtol: float = 1e-10,
                 breakpoints: Sequence[float] | None = None,
                 max_eval: int = 500_000) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]``; either end may be infinite.

    Converges when the summed error estimate is below
    ``max(tol, rtol * |value|)``.  Integrands with an ``exp(-B/x**2)``
    type endpoint need that point passed in ``breakpoints`` (or used as an
    end), since the open rule then never samples it.
    """
    if not tol >= 0 or not rtol >= 0 or tol == rtol == 0:
        raise ValueError("need tol > 0 or rtol > 0")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0

    pieces = []
    for lo, hi in _split_domain(a, b, breakpoints):
        s0, s1, phi = _segment_map(lo, hi)

        def g(s, phi=phi):
            x, jac = phi(s)
            return f(x) * jac
        pieces.append((s0, s1, g))

    # one interval list per piece; subdivide globally
    los, his, owner = [], [], []
    for i, (s0, s1, _) in enumerate(pieces):
        edges = np.linspace(s0, s1, 5)
        los.extend(edges[:-1]); his.extend(edges[1:]); owner.extend([i] * 4)
    lo = np.array(los); hi = np.array(his); owner = np.array(owner)
    val = np.empty(len(lo)); err = np.empty(len(lo))
    for i, (_, _, g) in enumerate(pieces):
        m = owner == i
        val[m], err[m] = _gk_batch(g, lo[m], hi[m])
    nev = 15 * len(lo)

    while True:
        total, total_err = float(val.sum()), float(err.sum())
        target = max(tol, rtol * abs(total))
        if total_err <= target:
            return QuadratureResult(sign * total, total_err, nev)
        if nev >= max_eval:
            raise QuadratureBudgetError(QuadratureResult(sign * total, total_err, nev))
        # bisect the intervals that carry the bulk of the error
        order = np.argsort(err)[::-1]
        csum = np.cumsum(err[order])
        nsplit = int(np.searchsorted(csum, 0.5 * total_err)) + 1
        nsplit = min(max(nsplit, 1), 256)
        pick = order[:nsplit]
        # intervals too narrow to split further are frozen
        width = hi[pick] - lo[pick]
        scale = np.maximum(np.abs(lo[pick]), np.abs(hi[pick]))
        pick = pick[width > 64 * np.finfo(float).eps * np.maximum(scale, 1e-300)]
        if len(pick) == 0:
            raise QuadratureBudgetError(QuadratureResult(sign * total, total_err, nev))
        keep = np.ones(len(lo), bool); keep[pick] = False
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        new_owner = np.concatenate([owner[pick], owner[pick]])
        new_val = np.empty(len(new_lo)); new_err = np.empty(len(new_lo))
        for i, (_, _, g) in enumerate(pieces):
            m = new_owner == i
            if m.any():
                new_val[m], new_err[m] = _gk_batch(g, new_lo[m], new_hi[m])
        nev += 15 * len(new_lo)
        lo = np.concatenate([lo[keep], new_lo]); hi = np.concatenate([hi[keep], new_hi])
        owner = np.concatenate([owner[keep], new_owner])
        val = np.concatenate([val[keep], new_val]); err = np.concatenate([err[keep], new_err])


# -- 2D ----------------------------------------------------------------------

_KK = np.outer(_KW, _KW)
_GG = np.outer(_GW, _GW)
_GK = np.outer(_GW, _KW)   # Gauss along x, Kronrod along y
_KG = np.outer(_KW, _GW)


def _tensor_batch(g, x0, x1, y0, y1):
    hx = 0.5 * (x1 - x0); mx = 0.5 * (x1 + x0)
    hy = 0.5 * (y1 - y0); my = 0.5 * (y1 + y0)
    xs = mx[:, None] + hx[:, None] * _NODES[None, :]
    ys = my[:, None] + hy[:, None] * _NODES[None, :]
    X = np.broadcast_to(xs[:, :, None], (len(x0), 15, 15))
    Y = np.broadcast_to(ys[:, None, :], (len(x0), 15, 15))
    with np.errstate(all="ignore"):
        vals = g(X, Y)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    area = hx * hy
    k = area * np.einsum("nij,ij->n", vals, _KK)
    ex = np.abs(k - area * np.einsum("nij,ij->n", vals, _GK))
    ey = np.abs(k - area * np.einsum("nij,ij->n", vals, _KG))
    gg = area * np.einsum("nij,ij->n", vals, _GG)
    err = np.maximum(np.abs(k - gg), ex + ey)
    return k, err, ex >= ey


def _quadrature_2d(f, domain, tol, rtol, breaks, max_eval):
    xb, yb = breaks if breaks is not None else ((), ())
    if isinstance(domain, Rect):
        xr, yr = (domain.x0, domain.x1), (domain.y0, domain.y1)
        polar = False
    elif isinstance(domain, Plane):
        xr, yr = (-math.inf, math.inf), (-math.inf, math.inf)
        polar = False
    elif isinstance(domain, Disk):
        # (r, phi) coordinates; the axes x = 0 and y = 0 become cell edges
        xr, yr = (0.0, domain.radius), (0.0, 2 * math.pi)
        polar = True
        xb, yb = (), (0.5 * math.pi, math.pi, 1.5 * math.pi)
    else:
        raise TypeError(f"unsupported domain {domain!r}")

    cells = []
    for xa, xz in _split_domain(*xr, xb):
        sx0, sx1, phx = _segment_map(xa, xz)
        for ya, yz in _split_domain(*yr, yb):
            sy0, sy1, phy = _segment_map(ya, yz)
            cells.append((sx0, sx1, sy0, sy1, phx, phy))

    def make(phx, phy):
        def g(s, t):
            x, jx = phx(s)
            y, jy = phy(t)
            if polar:
                return f(x * np.cos(y), x * np.sin(y)) * x * jx * jy
            return f(x, y) * jx * jy
        return g

    funcs = [make(c[4], c[5]) for c in cells]
    r = []
    for i, (sx0, sx1, sy0, sy1, _, _) in enumerate(cells):
        ex = np.linspace(sx0, sx1, 3); ey = np.linspace(sy0, sy1, 3)
        for a0, a1 in zip(ex[:-1], ex[1:]):
            for b0, b1 in zip(ey[:-1], ey[1:]):
                r.append((a0, a1, b0, b1, i))
    r = np.array(r)
    x0, x1, y0, y1, owner = r[:, 0], r[:, 1], r[:, 2], r[:, 3], r[:, 4].astype(int)

    def evaluate(x0, x1, y0, y1, owner):
        val = np.empty(len(x0)); err = np.empty(len(x0)); sx = np.empty(len(x0), bool)
        for i, g in enumerate(funcs):
            m = owner == i
            if m.any():
                val[m], err[m], sx[m] = _tensor_batch(g, x0[m], x1[m], y0[m], y1[m])
        return val, err, sx

    val, err, split_x = evaluate(x0, x1, y0, y1, owner)
    nev = 225 * len(x0)
    while True:
        total, total_err = float(val.sum()), float(err.sum())
        if total_err <= max(tol, rtol * abs(total)):
            return QuadratureResult(total, total_err, nev)
        if nev >= max_eval:
            raise QuadratureBudgetError(QuadratureResult(total, total_err, nev))
        order = np.argsort(err)[::-1]
        csum = np.cumsum(err[order])
        nsplit = min(int(np.searchsorted(csum, 0.5 * total_err)) + 1, 512)
        pick = order[:nsplit]
        keep = np.ones(len(x0), bool); keep[pick] = False
        sx = split_x[pick]
        xm = 0.5 * (x0[pick] + x1[pick]); ym = 0.5 * (y0[pick] + y1[pick])
        a_x0 = x0[pick]; a_x1 = np.where(sx, xm, x1[pick])
        a_y0 = y0[pick]; a_y1 = np.where(sx, y1[pick], ym)
        b_x0 = np.where(sx, xm, x0[pick]); b_x1 = x1[pick]
        b_y0 = np.where(sx, y0[pick], ym); b_y1 = y1[pick]
        nx0 = np.concatenate([a_x0, b_x0]); nx1 = np.concatenate([a_x1, b_x1])
        ny0 = np.concatenate([a_y0, b_y0]); ny1 = np.concatenate([a_y1, b_y1])
        nown = np.concatenate([owner[pick], owner[pick]])
        nval, nerr, nsx = evaluate(nx0, nx1, ny0, ny1, nown)
        nev += 225 * len(nx0)
        x0 = np.concatenate([x0[keep], nx0]); x1 = np.concatenate([x1[keep], nx1])
        y0 = np.concatenate([y0[keep], ny0]); y1 = np.concatenate([y1[keep], ny1])
        owner = np.concatenate([owner[keep], nown])
        val = np.concatenate([val[keep], nval]); err = np.concatenate([err[keep], nerr])
        split_x = np.concatenate([split_x[keep], nsx])


def _stratified_unit_square(n_samples: int, rng: np.random.Generator):
    """Stratified points in [0,1)^2: k*k cells with m points each."""
    m = 4
    k = max(1, int(math.isqrt(max(n_samples // m, 1))))
    i, j = np.divmod(np.arange(k * k), k)
    a = (i[:, None] + rng.random((k * k, m))) / k
    b = (j[:, None] + rng.random((k * k, m))) / k
    return a, b, k * k, m


def _monte_carlo_2d(f, domain, n_samples, rng, scale):
    a, b, nstrata, m = _stratified_unit_square(n_samples, rng)
    if isinstance(domain, Disk):
        r = domain.radius * np.sqrt(a)
        phi = 2 * math.pi * b
        x, y = r * np.cos(phi), r * np.sin(phi)
        weight = math.pi * domain.radius ** 2
        with np.errstate(all="ignore"):
            vals = f(x, y) * weight
    elif isinstance(domain, Rect):
        x = domain.x0 + (domain.x1 - domain.x0) * a
        y = domain.y0 + (domain.y1 - domain.y0) * b
        weight = (domain.x1 - domain.x0) * (domain.y1 - domain.y0)
        with np.errstate(all="ignore"):
            vals = f(x, y) * weight
    elif isinstance(domain, Plane):
        # importance sampling from an isotropic normal of the given scale
        x = scale * ndtri(a); y = scale * ndtri(b)
        pdf = np.exp(-(x * x + y * y) / (2 * scale * scale)) / (2 * math.pi * scale * scale)
        with np.errstate(all="ignore"):
            vals = f(x, y) / pdf
    else:
        raise TypeError(f"unsupported domain {domain!r}")
    vals = np.where(np.isfinite(vals), vals, 0.0)
    means = vals.mean(axis=1)
    var = vals.var(axis=1, ddof=1) if m > 1 else np.zeros(nstrata)
    value = float(means.mean())
    stderr = float(math.sqrt(var.sum() / m) / nstrata)
    return QuadratureResult(value, stderr, nstrata * m)


def integrate_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], domain: Interval2D,
                 tol: float = 1e-8, method: str = "quadrature", *,
                 rtol: float = 1e-10,
                 breaks: tuple[Sequence[float], Sequence[float]] | None = None,
                 max_eval: int = 20_000_000,
                 n_samples: int = 1_000_000,
                 rng: np.random.Generator | None = None,
                 scale: float = 1.0) -> QuadratureResult:
    """Integrate ``f(x, y)`` over a 2D domain.

    ``method="quadrature"`` runs adaptive tensor Gauss-Kronrod cubature;
    ``breaks`` gives lines ``x = c`` / ``y = c`` to split at (use
    ``breaks=((0.0,), ())`` for integrands singular on the ``x = 0`` axis).
    ``method="monte-carlo"`` uses stratified sampling and reports the
    standard error as ``error_estimate``; it needs a seeded ``rng``.
    On the plane, samples come from a normal distribution of width ``scale``.
    """
    if method == "quadrature":
        if not tol > 0 and not rtol > 0:
            raise ValueError("need tol > 0 or rtol > 0")
        return _quadrature_2d(f, domain, tol, rtol, breaks, max_eval)
    if method == "monte-carlo":
        if rng is None:
            raise ValueError("monte-carlo integration needs an explicit rng")
        return _monte_carlo_2d(f, domain, n_samples, rng, scale)
    raise ValueError(f"unknown method {method!r}")


# -- closed forms and special functions --------------------------------------

def gaussian_inverse_square(A: float, B: float) -> float:
    """Closed form of the integral of exp(-A x^2 - B / x^2) over the real line."""
    if not A > 0:
        raise ValueError("A must be positive")
    if B < 0:
        raise ValueError("B must be non-negative")
    return math.sqrt(math.pi / A) * math.exp(-2.0 * math.sqrt(A * B))


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError("log_gamma needs x > 0")
    return math.lgamma(x)


def hermite_eval(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """Normalised oscillator eigenfunctions phi_0..phi_{n_max} at ``x``.

    Uses the orthonormal recurrence, which stays finite for large n where
    H_n(x) itself overflows.  Returns shape ``(n_max + 1,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out
