"""Classical fidelity: overlap of a phase-space density carried by the
unperturbed flow with the same density carried by the perturbed flow.

Both densities used here are radial, so the integrand only needs the two
"energies" ``X = x^2 + xdot^2`` (unperturbed) and ``Y = y^2 + ydot^2``
(perturbed) as functions of the initial point.

* Stable oscillator: integrate over the initial point ``(q, p)``; energy
  conservation gives ``X = p^2 + q^2`` and
  ``Y = X + 2 g^2 (1/q^2 - 1/y^2)``.
* Inverted oscillator: integrate over ``u = q / sqrt(cosh 2t)``,
  ``v = sqrt(cosh 2t) (p + q tanh 2t)`` (unit Jacobian), in which
  ``X = u^2 + v^2`` and ``Y`` depends on time only through
  ``tau = 1 / cosh 2t``; ``t = inf`` is ``tau = 0`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import perturbed_trajectory
from .mathkit import Disk, Plane, QuadratureResult, Rect, integrate_2d
from .qfidelity import FidelityCurve

__all__ = [
    "Gaussian",
    "BallIndicator",
    "PhaseSpaceDistribution",
    "G_INDEPENDENT",
    "SQRT3",
    "classical_fidelity",
    "classical_fidelity_direct",
    "classical_fidelity_curve",
    "energy_pair",
    "uv_from_pq",
    "BoundEntry",
    "BoundReport",
    "bound_check_stable",
    "bound_check_unstable",
    "asymptotic_value",
    "asymptotic_ball_bound",
    "CuspFit",
    "cusp_slope",
    "default_cusp_windows",
]

G_INDEPENDENT = 1.0 / math.sqrt(2.0)   # coupling at which 2 g^2 = 1
SQRT3 = math.sqrt(3.0)
DEFAULT_SAMPLES = 1_000_000


@dataclass(frozen=True)
class Gaussian:
    """``exp(-(p^2 + q^2) / (2 s^2)) / (sqrt(pi) s)``."""
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("Gaussian scale must be positive")

    @classmethod
    def rescaled(cls, g: float) -> "Gaussian":
        return cls(math.sqrt(g * math.sqrt(2.0)))

    @property
    def normalization(self) -> float:
        return 1.0 / (math.sqrt(math.pi) * self.scale)

    @property
    def tag(self) -> str:
        return f"gaussian(scale={self.scale:.17g})"


@dataclass(frozen=True)
class BallIndicator:
    """``chi(p^2 + q^2 <= R^2) / (sqrt(pi) R)``."""
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def normalization(self) -> float:
        return 1.0 / (math.sqrt(math.pi) * self.radius)

    @property
    def tag(self) -> str:
        return f"ball(radius={self.radius:.17g})"


PhaseSpaceDistribution = Gaussian | BallIndicator


def _tau(t: float) -> float:
    t = abs(t)
    return 0.0 if t > 350 else 1.0 / math.cosh(2.0 * t)


def energy_pair(epsilon: int, g: float, t: float):
    """Return ``h(a, b) -> (X, Y)`` in the integration coordinates of ``epsilon``.

    ``(a, b)`` is ``(q, p)`` for the stable case and ``(u, v)`` for the
    unstable one, where ``t`` enters through ``tau = 1/cosh 2t`` and the
    sign of ``t``.
    """
    k = 2.0 * g * g
    if epsilon == 1:
        s, c = math.sin(t), math.cos(t)

        def h(q, p):
            X = p * p + q * q
            if k == 0.0:
                return X, X
            q2 = q * q
            dy = s * (s * (p * p - q2 + k / q2) + 2.0 * p * q * c)    # y^2 - q^2
            y2 = q2 + dy
            return X, X + k * dy / (q2 * y2)
        return h
    if epsilon == -1:
        tau = _tau(t)
        sig = math.copysign(math.sqrt(max(0.0, 1.0 - tau * tau)), t)   # tanh 2t

        def h(u, v):
            X = u * u + v * v
            if k == 0.0:
                return X, X
            D = v * v * (1.0 - tau) + u * u * (1.0 + tau) + 2.0 * u * v * sig + (1.0 - tau) * k / (u * u)
            return X, X + k / (u * u) - 2.0 * k / D
        return h
    raise ValueError("epsilon must be +1 or -1")


def uv_from_pq(q, p, t: float):
    """Unit-Jacobian change of variables used for the inverted oscillator."""
    ch = math.cosh(2.0 * t)
    return q / math.sqrt(ch), math.sqrt(ch) * (p + q * math.tanh(2.0 * t))


def _integrand(dist, h):
    if isinstance(dist, Gaussian):
        s2 = dist.scale ** 2

        def f(a, b):
            X, Y = h(a, b)
            return np.exp(-(X + Y) / (2.0 * s2)) / (math.pi * s2)
        return f
    R2 = dist.radius ** 2

    def f(a, b):
        X, Y = h(a, b)
        return ((X <= R2) & (Y <= R2)) / (math.pi * R2)
    return f


def classical_fidelity(epsilon: int, g: float, dist: PhaseSpaceDistribution, t: float,
                       tol: float = 1e-8, *, method: str | None = None,
                       rng: np.random.Generator | None = None,
                       n_samples: int = DEFAULT_SAMPLES) -> QuadratureResult:
    """Overlap integral at time ``t`` (``t = inf`` allowed when ``epsilon = -1``).

    Gaussians default to adaptive cubature, ball indicators to stratified
    Monte-Carlo over the support disk (the error is then a standard error).
    """
    if epsilon == 1 and not math.isfinite(t):
        raise ValueError("the stable fidelity has no limit at infinite time")
    g = abs(g)
    if method is None:
        method = "quadrature" if isinstance(dist, Gaussian) else "monte-carlo"
    if method == "monte-carlo" and rng is None:
        rng = np.random.default_rng(0)
    h = energy_pair(epsilon, g, t)
    f = _integrand(dist, h)
    if isinstance(dist, BallIndicator):
        if method != "monte-carlo":
            raise ValueError("indicator integrands need the monte-carlo method")
        return integrate_2d(f, Disk(dist.radius), method="monte-carlo", rng=rng, n_samples=n_samples)
    if method == "monte-carlo":
        return integrate_2d(f, Plane(), method="monte-carlo", rng=rng, n_samples=n_samples,
                            scale=dist.scale)
    return integrate_2d(f, Plane(), tol=tol, rtol=0.1 * tol, breaks=((0.0,), ()))


def classical_fidelity_direct(epsilon: int, g: float, dist: PhaseSpaceDistribution, t: float,
                              tol: float = 1e-8, *, rng: np.random.Generator | None = None,
                              n_samples: int = DEFAULT_SAMPLES) -> QuadratureResult:
    """Same overlap computed from the explicit trajectories in ``(q, p)``.

    Slower and badly conditioned for large ``|t|`` in the unstable case;
    kept as a cross-check of the reduced forms.
    """
    g = abs(g)

    def h(q, p):
        if epsilon == 1:
            C, S = math.cos(t), math.sin(t)
        else:
            C, S = math.cosh(t), math.sinh(t)
        x = q * C + p * S
        xd = p * C - epsilon * q * S
        yy = perturbed_trajectory(q, p, g, epsilon, t)
        return x * x + xd * xd, yy.q ** 2 + yy.p ** 2

    f = _integrand(dist, h)
    if isinstance(dist, Gaussian):
        return integrate_2d(f, Plane(), tol=tol, rtol=0.1 * tol, breaks=((0.0,), ()))
    if rng is None:
        rng = np.random.default_rng(0)
    # support of the unperturbed factor is an ellipse; sample a box around it
    C = math.cosh(t) if epsilon == -1 else 1.0
    L = dist.radius * (C + abs(math.sinh(t)) if epsilon == -1 else 1.0)
    return integrate_2d(f, Rect(-L, L, -L, L), method="monte-carlo", rng=rng, n_samples=n_samples)


def _point_rngs(seed: int, n: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def classical_fidelity_curve(epsilon: int, g: float, dist: PhaseSpaceDistribution,
                             grid: Sequence[float], tol: float = 1e-8, *, seed: int = 0,
                             n_samples: int = DEFAULT_SAMPLES,
                             method: str | None = None) -> FidelityCurve:
    """Sample :func:`classical_fidelity` on ``grid``.

    Grid point ``i`` draws from its own child stream of ``seed``, so a curve
    is reproducible point by point.
    """
    t = np.asarray(grid, dtype=float)
    rngs = _point_rngs(seed, len(t))
    vals, errs = [], []
    for ti, rng in zip(t, rngs):
        r = classical_fidelity(epsilon, g, dist, float(ti), tol, method=method, rng=rng,
                               n_samples=n_samples)
        vals.append(r.value); errs.append(r.error_estimate)
    case = ("stable" if epsilon == 1 else "unstable") + "-classical"
    return FidelityCurve(case, abs(g), dist.tag, t, np.array(vals), np.array(errs),
                         meta={"epsilon": epsilon, "seed": seed, "samples": n_samples})


# -- bounds ------------------------------------------------------------------

@dataclass(frozen=True)
class BoundEntry:
    name: str
    t: float
    value: float
    bound: float
    margin: float          # >= 0 when the claim holds
    error: float           # numerical uncertainty of ``value``

    @property
    def ok(self) -> bool:
        return self.margin >= -self.error


@dataclass
class BoundReport:
    g: float
    entries: list[BoundEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def worst(self, name: str | None = None) -> BoundEntry:
        es = [e for e in self.entries if name is None or e.name == name]
        return min(es, key=lambda e: e.margin + e.error)

    def names(self) -> list[str]:
        return sorted({e.name for e in self.entries})


def _lower(name, t, r, bound, k_sigma):
    return BoundEntry(name, t, r.value, bound, r.value - bound, k_sigma * r.error_estimate)


def _upper(name, t, r, bound, k_sigma):
    return BoundEntry(name, t, r.value, bound, bound - r.value, k_sigma * r.error_estimate)


def bound_check_stable(g: float, grid: Sequence[float], *, ball_radius: float = 1.0,
                       tol: float = 1e-8, seed: int = 0, n_samples: int = DEFAULT_SAMPLES,
                       ball_grid: Sequence[float] | None = None) -> BoundReport:
    """Gaussian lower/upper bounds and ball lower bound on ``grid``, plus the
    vanishing of the ball fidelity at ``pi/2`` once ``g >= 1/sqrt(2)``.

    ``ball_grid`` (default: ``grid``) lets the Monte-Carlo checks run on a
    coarser grid.  Entry errors are 3 standard errors for Monte-Carlo values.
    """
    g = abs(g)
    rep = BoundReport(g)
    grid = [float(t) for t in grid]
    ball_grid = grid if ball_grid is None else [float(t) for t in ball_grid]
    rngs = _point_rngs(seed, len(ball_grid) + 1)
    for t in grid:
        r = classical_fidelity(1, g, Gaussian(), t, tol)
        # quadrature error estimates are conservative; never below round-off
        rr = QuadratureResult(r.value, max(r.error_estimate, 1e-12), r.evaluations)
        rep.entries.append(_lower("lower", t, rr, math.exp(-2 * g), 1.0))
        s = abs(math.sin(t))
        up = min(1.0, math.sqrt(2.0) * math.exp(-g * s / math.sqrt(1 + s * s)))
        rep.entries.append(_upper("upper", t, rr, up, 1.0))
    for t, rng in zip(ball_grid, rngs):
        rb = classical_fidelity(1, g, BallIndicator(ball_radius), t, rng=rng, n_samples=n_samples)
        rep.entries.append(_lower("ball_lower", t, rb, 1 - 2 * g * math.sqrt(2), 3.0))
    if g >= G_INDEPENDENT - 1e-15:
        rb = classical_fidelity(1, g, BallIndicator(ball_radius), 0.5 * math.pi, rng=rngs[-1],
                                n_samples=n_samples)
        rep.entries.append(_upper("ball_zero", 0.5 * math.pi, rb, 0.0, 3.0))
    return rep


def asymptotic_ball_bound() -> float:
    """Upper bound on the t -> inf ball fidelity (disk minus a central strip)."""
    r17 = math.sqrt(17.0)
    return 2.0 * math.atan(r17) / math.pi - r17 / (9.0 * math.pi)


def bound_check_unstable(g: float, grid: Sequence[float], *, ball_radius: float = SQRT3,
                         tol: float = 1e-8, seed: int = 0, n_samples: int = DEFAULT_SAMPLES,
                         include_asymptote: bool = True,
                         ball_grid: Sequence[float] | None = None) -> BoundReport:
    """Uniform lower bounds for the inverted oscillator on ``grid``.

    The g-independent fidelities are the ``g = 1/sqrt(2)`` members of the
    same families, so their bounds (``e^{-sqrt 2}`` and ``1/3``) are the
    ``g = 1/sqrt(2)`` cases of the ones checked here.
    """
    g = abs(g)
    rep = BoundReport(g)
    grid = [float(t) for t in grid]
    ball_grid = grid if ball_grid is None else [float(t) for t in ball_grid]
    rngs = _point_rngs(seed, len(ball_grid) + 1)
    for t in grid:
        r = classical_fidelity(-1, g, Gaussian(), t, tol)
        rr = QuadratureResult(r.value, max(r.error_estimate, 1e-12), r.evaluations)
        rep.entries.append(_lower("lower", t, rr, math.exp(-2 * g), 1.0))
    for t, rng in zip(ball_grid, rngs):
        rb = classical_fidelity(-1, g, BallIndicator(ball_radius), t, rng=rng, n_samples=n_samples)
        rep.entries.append(_lower("ball_lower", t, rb, 1 - 2 * g * math.sqrt(2) / 3, 3.0))
    if include_asymptote:
        rb = classical_fidelity(-1, G_INDEPENDENT, BallIndicator(ball_radius), math.inf,
                                rng=rngs[-1], n_samples=n_samples)
        rep.entries.append(_upper("asymptotic_upper", math.inf, rb, asymptotic_ball_bound(), 3.0))
    return rep


def asymptotic_value(which: str, tol: float = 1e-8, *, rng: np.random.Generator | None = None,
                     n_samples: int = DEFAULT_SAMPLES) -> QuadratureResult:
    """t -> inf limit of the g-independent unstable fidelity (``tau = 0``)."""
    if which == "gaussian":
        return classical_fidelity(-1, G_INDEPENDENT, Gaussian(), math.inf, tol)
    if which == "ball":
        return classical_fidelity(-1, G_INDEPENDENT, BallIndicator(SQRT3), math.inf,
                                  rng=rng if rng is not None else np.random.default_rng(0),
                                  n_samples=n_samples)
    raise ValueError(f"which must be 'gaussian' or 'ball', got {which!r}")


# -- behaviour near t = 0 ----------------------------------------------------

@dataclass
class CuspFit:
    windows: list[tuple[float, float]]
    slopes: list[float]

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.slopes, self.slopes[1:]))

    @property
    def positive(self) -> bool:
        return all(s > 0 for s in self.slopes)


def default_cusp_windows(halvings: int = 3) -> list[tuple[float, float]]:
    return [(1e-2 / 2 ** k, 1e-1 / 2 ** k) for k in range(halvings + 1)]


def cusp_slope(windows: Sequence[tuple[float, float]] | None = None, n_points: int = 16,
               tol: float = 1e-10) -> CuspFit:
    """Fit ``log F_C(t) = -s t`` on each window for the g-independent stable
    Gaussian fidelity and return the slopes ``s``.

    A cusp that is steeper than any exponential shows up as slopes that keep
    growing as the window shrinks towards ``t = 0``.
    """
    windows = list(windows) if windows is not None else default_cusp_windows()
    slopes = []
    for lo, hi in windows:
        if not 0 < lo < hi:
            raise ValueError(f"degenerate window {(lo, hi)!r}")
        ts = np.geomspace(lo, hi, n_points)
        logs = np.array([math.log(classical_fidelity(1, G_INDEPENDENT, Gaussian(), float(t), tol).value)
                         for t in ts])
        slopes.append(float(-np.dot(ts, logs) / np.dot(ts, ts)))
    return CuspFit([tuple(w) for w in windows], slopes)
