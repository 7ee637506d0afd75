"""Quantum fidelity through the return probability of the singular ground state.

The ground state of ``P^2/2 + Q^2/2 + g^2/Q^2`` is ``psi_0 = c_g x^alpha e^{-x^2/2}``
with ``alpha = 1/2 + sqrt(1/4 + 2 g^2)``.  For both signs of the oscillator the
fidelity modulus only depends on time through the rescaled phase
``theta_tilde`` of the unperturbed mode function, and equals
``|sum_n w_n exp(i n theta_tilde)|`` where ``w_n`` are the weights of
``psi_0`` on the oscillator eigenstates ``phi_n``.

Integer ``alpha`` (``g = sqrt(k(k+1)/2)``): ``x^alpha`` is a polynomial,
``psi_0`` is normalised on the whole line and the expansion is finite.
Other ``alpha``: ``psi_0`` lives on the half line and is expanded on the
Dirichlet eigenstates ``sqrt(2) phi_n`` (n odd) restricted to ``x > 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .dynamics import ModeSpec, theta_tilde
from .mathkit import hermite_functions, integrate_1d, log_gamma

__all__ = [
    "CouplingAlpha",
    "GroundState",
    "SpectralWeights",
    "TruncationError",
    "FidelityCurve",
    "alpha_from_g",
    "ground_state",
    "spectral_weights",
    "adaptive_weights",
    "exact_weights",
    "quadrature_weights",
    "fidelity_modulus",
    "quantum_fidelity",
    "quantum_fidelity_curve",
    "quantum_fidelity_limit",
    "minimum_time",
]

_INT_TOL = 1e-9
_CHUNK = 1 << 22


@dataclass(frozen=True)
class CouplingAlpha:
    g: float
    alpha: float

    @property
    def integer_alpha(self) -> int | None:
        k = round(self.alpha)
        return k if abs(self.alpha - k) < _INT_TOL else None


def alpha_from_g(g: float) -> CouplingAlpha:
    g = abs(float(g))
    return CouplingAlpha(g, 0.5 + math.sqrt(0.25 + 2.0 * g * g))


@dataclass(frozen=True)
class GroundState:
    coupling: CouplingAlpha
    norm: float                 # c_g
    full_line: bool

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = self.coupling.alpha
        k = self.coupling.integer_alpha
        if self.full_line:
            return self.norm * x ** k * np.exp(-0.5 * x * x)
        with np.errstate(invalid="ignore"):
            vals = self.norm * np.abs(x) ** a * np.exp(-0.5 * x * x)
        return np.where(x > 0, vals, 0.0)


def ground_state(g: float) -> GroundState:
    ca = alpha_from_g(g)
    full = ca.integer_alpha is not None
    a = ca.integer_alpha if full else ca.alpha
    # int x^{2a} e^{-x^2} over R is Gamma(a + 1/2); over (0, inf) half that
    log_mass = log_gamma(a + 0.5) - (0.0 if full else math.log(2.0))
    return GroundState(ca, math.exp(-0.5 * log_mass), full)


@dataclass
class SpectralWeights:
    """Weights ``|lambda_n|^2`` of psi_0 on oscillator eigenstate ``n``."""
    g: float
    n: np.ndarray
    weights: np.ndarray
    exact: tuple[Fraction, ...] | None = None
    tail: float = 0.0
    method: str = "exact"

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.int64)
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < 0):
            raise ValueError("spectral weights must be non-negative")

    def __iter__(self):
        return iter(zip(self.n.tolist(), self.weights.tolist()))

    def __len__(self):
        return len(self.n)

    @property
    def total(self) -> float:
        return float(math.fsum(self.weights))

    @property
    def single_parity(self) -> bool:
        return len(set((self.n % 2).tolist())) <= 1


class TruncationError(RuntimeError):
    """Tail mass above tolerance at ``n_max``; partial weights on ``.weights``."""

    def __init__(self, weights: SpectralWeights, tol: float):
        super().__init__(
            f"spectral expansion for g={weights.g:g} truncated with tail mass "
            f"{weights.tail:.3e} > {tol:.1e} ({len(weights)} terms kept)")
        self.weights = weights


def _monomial_hermite(k: int) -> dict[int, Fraction]:
    """Coefficients of x^k in the Hermite basis: x^k = sum_n c_n H_n(x)."""
    return {k - 2 * m: Fraction(math.factorial(k), 2 ** k * math.factorial(m) * math.factorial(k - 2 * m))
            for m in range(k // 2 + 1)}


def exact_weights(k: int) -> dict[int, Fraction]:
    """Rational weights of ``x^k e^{-x^2/2}`` (normalised on R) on phi_n."""
    coeffs = _monomial_hermite(k)
    # ||H_n e^{-x^2/2}||^2 = sqrt(pi) 2^n n!, ||x^k e^{-x^2/2}||^2 = sqrt(pi) (2k)! / (4^k k!)
    raw = {n: c * c * 2 ** n * math.factorial(n) for n, c in coeffs.items()}
    mass = Fraction(math.factorial(2 * k), 4 ** k * math.factorial(k))
    return {n: w / mass for n, w in sorted(raw.items())}


def _half_line_weights(alpha: float, n_terms: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights on the Dirichlet eigenstates sqrt(2) phi_n, n = 1, 3, 5, ...

    With M_n = int_0^inf x^alpha e^{-x^2} H_n dx one has
    M_{n+1} = 2 (alpha + 1 - n) M_{n-1}, so the odd moments follow from
    M_1 = Gamma(alpha/2 + 1) without any quadrature.
    """
    n = 2 * np.arange(n_terms, dtype=np.int64) + 1
    fac = 2.0 * np.abs(alpha - n[:-1].astype(float))
    with np.errstate(divide="ignore"):
        log_m = np.concatenate([[gammaln(0.5 * alpha + 1.0)], gammaln(0.5 * alpha + 1.0) + np.cumsum(np.log(fac))])
    log_c2 = math.log(2.0) - gammaln(alpha + 0.5)
    log_norm2 = -(0.5 * math.log(math.pi) + gammaln(n + 1.0) + n * math.log(2.0))
    w = np.exp(math.log(2.0) + log_c2 + log_norm2 + 2.0 * log_m)
    return n, w


def quadrature_weights(g: float, n_max: int, tol: float = 1e-13) -> SpectralWeights:
    """Weights by direct quadrature of <psi_0, phi_n>; an independent check
    on the closed-form routes, practical for moderate ``n_max``."""
    gs = ground_state(g)
    ns = np.arange(n_max + 1) if gs.full_line else np.arange(1, n_max + 1, 2)
    lo = -math.inf if gs.full_line else 0.0
    out = []
    for n in ns:
        def f(x, n=n):
            return gs(x) * hermite_functions(n, x)[n]
        val = integrate_1d(f, lo, math.inf, tol=tol, rtol=1e-13, breakpoints=[0.0]).value
        out.append(val * val * (1.0 if gs.full_line else 2.0))
    w = np.array(out)
    return SpectralWeights(gs.coupling.g, ns, w, tail=max(0.0, 1.0 - math.fsum(w)), method="quadrature")


def spectral_weights(g: float, n_max: int = 200, tol: float = 1e-10,
                     drop_below: float = 0.0) -> SpectralWeights:
    """Expansion weights of psi_0 on the eigenstates of the oscillator.

    For integer alpha the finite expansion is returned with exact rational
    weights.  Otherwise at most ``n_max`` terms are kept; a tail mass above
    ``tol`` raises :class:`TruncationError` carrying the partial weights.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    ca = alpha_from_g(g)
    k = ca.integer_alpha
    if k is not None:
        ex = exact_weights(k)
        keep = [(n, w) for n, w in ex.items() if w > 0]
        return SpectralWeights(ca.g, [n for n, _ in keep], [float(w) for _, w in keep],
                               exact=tuple(w for _, w in keep), method="exact")
    n, w = _half_line_weights(ca.alpha, max(n_max, 1))
    tail = max(0.0, 1.0 - math.fsum(w))
    if drop_below > 0:
        m = w >= drop_below
        n, w = n[m], w[m]
    sw = SpectralWeights(ca.g, n, w, tail=tail, method="gamma-recurrence")
    if tail > tol:
        raise TruncationError(sw, tol)
    return sw


def adaptive_weights(g: float, tol: float = 1e-10, n_cap: int = 1 << 21) -> SpectralWeights:
    """Smallest power-of-two expansion (from 256 terms) with tail mass below ``tol``."""
    n = 256
    while True:
        try:
            return spectral_weights(g, n_max=n, tol=tol)
        except TruncationError:
            if n >= n_cap:
                raise
            n *= 2


def fidelity_modulus(weights: SpectralWeights, theta_tilde) -> np.ndarray | float:
    """``|sum_n w_n exp(i n theta_tilde)|``; vectorised over ``theta_tilde``."""
    th = np.asarray(theta_tilde, dtype=float)
    n0 = int(weights.n.min()) if len(weights) else 0
    shift = (weights.n - n0).astype(float)          # common shifts drop out of the modulus
    flat = th.reshape(-1)
    out = np.empty(flat.shape)
    step = max(1, _CHUNK // max(len(shift), 1))     # bound the size of the phase matrix
    for i in range(0, len(flat), step):
        phase = np.exp(1j * np.multiply.outer(flat[i:i + step], shift))
        out[i:i + step] = np.abs(phase @ weights.weights)
    out = out.reshape(th.shape)
    return out if out.ndim else float(out)


@dataclass
class FidelityCurve:
    case: str                       # "stable-quantum", "unstable-classical", ...
    g: float
    distribution: str
    t: np.ndarray
    value: np.ndarray
    error: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        self.error = np.asarray(self.error, dtype=float)

    def __len__(self):
        return len(self.t)


def _coerce_weights(g, weights):
    return weights if weights is not None else adaptive_weights(g)


def quantum_fidelity(mode: ModeSpec, g: float, t, weights: SpectralWeights | None = None):
    """Fidelity modulus ``|F_Q^epsilon(t, g)|`` for the mode's sign."""
    return fidelity_modulus(_coerce_weights(g, weights), theta_tilde(mode, t))


def quantum_fidelity_curve(mode: ModeSpec, g: float, grid: Sequence[float],
                           weights: SpectralWeights | None = None) -> FidelityCurve:
    w = _coerce_weights(g, weights)
    t = np.asarray(grid, dtype=float)
    vals = np.atleast_1d(quantum_fidelity(mode, g, t, w))
    case = "stable-quantum" if mode.epsilon == 1 else "unstable-quantum"
    return FidelityCurve(case, abs(g), "reference-state", t, vals, np.zeros_like(vals),
                         meta={"mode": (mode.a, mode.b, mode.c, mode.d), "epsilon": mode.epsilon,
                               "tail": w.tail})


def quantum_fidelity_limit(mode: ModeSpec, g: float, direction: int = 1,
                           weights: SpectralWeights | None = None) -> float:
    """Limit of the unstable-case fidelity as ``t -> +-inf``."""
    from .dynamics import theta_tilde_limit
    return fidelity_modulus(_coerce_weights(g, weights), theta_tilde_limit(mode, direction))


def minimum_time(mode: ModeSpec) -> float:
    """Time in [0, pi) at which ``theta_tilde = pi/2 (mod pi)``.

    That is the fidelity minimum for the finite two- and three-term
    expansions; it solves ``tan t = -(a^2 + b^2) / (ac + bd)``.
    """
    if mode.epsilon != 1:
        raise ValueError("minimum_time is defined for the stable oscillator")
    num = mode.a ** 2 + mode.b ** 2
    den = mode.a * mode.c + mode.b * mode.d
    if den == 0:
        return 0.5 * math.pi
    return (-math.atan(num / den)) % math.pi
