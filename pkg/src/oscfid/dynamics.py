"""Closed-form classical motion for the (inverted) oscillator with and
without the repulsive ``g^2/Q^2`` term.

Mode functions are complex solutions ``z(t) = (a + ib) C(t) + (c + id) S(t)``
with ``(C, S) = (cos, sin)`` for ``epsilon = +1`` and ``(cosh, sinh)`` for
``epsilon = -1``.  Writing ``z = exp(u + i theta)``, the Wronskian condition
``ad - bc = 1`` is equivalent to ``d(theta)/dt = exp(-2u)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModeSpec",
    "PhaseSample",
    "PhasePoint",
    "u_theta",
    "theta_tilde",
    "theta_tilde_limit",
    "unperturbed_trajectory",
    "perturbed_trajectory",
    "energy_invariant",
]


def _check_sign(epsilon: int) -> int:
    if epsilon not in (1, -1):
        raise ValueError(f"epsilon must be +1 or -1, got {epsilon!r}")
    return int(epsilon)


def _basis(epsilon: int, t):
    if epsilon == 1:
        return np.cos(t), np.sin(t)
    return np.cosh(t), np.sinh(t)


@dataclass(frozen=True)
class ModeSpec:
    a: float
    b: float
    c: float
    d: float
    epsilon: int = 1

    def __post_init__(self):
        _check_sign(self.epsilon)
        w = self.a * self.d - self.b * self.c
        if abs(w - 1.0) > 1e-12:
            raise ValueError(
                f"mode constants must satisfy the Wronskian condition ad - bc = 1 "
                f"(got {w!r})")

    @classmethod
    def symmetric(cls, epsilon: int = 1) -> "ModeSpec":
        return cls(1.0, 0.0, 0.0, 1.0, epsilon)

    def z(self, t):
        """Complex mode function at ``t``."""
        C, S = _basis(self.epsilon, np.asarray(t, dtype=float))
        return (self.a + 1j * self.b) * C + (self.c + 1j * self.d) * S

    def zdot(self, t):
        t = np.asarray(t, dtype=float)
        if self.epsilon == 1:
            dC, dS = -np.sin(t), np.cos(t)
        else:
            dC, dS = np.sinh(t), np.cosh(t)
        return (self.a + 1j * self.b) * dC + (self.c + 1j * self.d) * dS

    @property
    def theta0(self) -> float:
        return math.atan2(self.b, self.a)

    @property
    def udot0(self) -> float:
        return (self.a * self.c + self.b * self.d) / (self.a ** 2 + self.b ** 2)


@dataclass(frozen=True)
class PhaseSample:
    t: float
    u: float
    theta: float
    theta_tilde: float


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float


def theta_tilde(mode: ModeSpec, t):
    """Unwound phase increment ``theta(t) - theta(0)``; vectorised in ``t``.

    No tracking along a grid is needed: in the stable case the phase gains
    exactly pi per half period, and within one half period the increment
    lies in [0, pi); in the unstable case the total increment over the whole
    real line is below pi, so the principal angle is already the unwound one.
    """
    t = np.asarray(t, dtype=float)
    z0c = np.conj(mode.z(0.0))
    if mode.epsilon == -1:
        w = mode.z(t) * z0c
        out = np.arctan2(w.imag, w.real)
        return out if out.ndim else float(out)
    k = np.floor(t / math.pi)
    s = t - k * math.pi
    w = mode.z(s) * z0c
    ang = np.arctan2(w.imag, w.real)
    # the increment over [0, pi) is in [0, pi); a negative angle is -pi + tiny
    ang = np.where(ang < -0.5 * math.pi, ang + 2 * math.pi, ang)
    out = k * math.pi + ang
    return out if out.ndim else float(out)


def theta_tilde_limit(mode: ModeSpec, direction: int = 1) -> float:
    """Limit of ``theta_tilde`` as ``t -> +inf`` (direction=1) or ``-inf``.

    Only defined for the unstable case, where z(t) ~ e^{|t|} (a +- c + i(b +- d)) / 2.
    """
    if mode.epsilon != -1:
        raise ValueError("the phase only converges in the unstable case")
    s = 1 if direction > 0 else -1
    w = complex(mode.a + s * mode.c, mode.b + s * mode.d) * np.conj(mode.z(0.0))
    return math.atan2(w.imag, w.real)


def u_theta(mode: ModeSpec, t: float) -> PhaseSample:
    z = complex(mode.z(t))
    tt = float(theta_tilde(mode, t))
    return PhaseSample(t=float(t), u=math.log(abs(z)), theta=mode.theta0 + tt, theta_tilde=tt)


def unperturbed_trajectory(q: float, p: float, epsilon: int, t) -> PhasePoint:
    """Flow of ``P^2/2 + epsilon Q^2/2`` from ``(q, p)``."""
    epsilon = _check_sign(epsilon)
    C, S = _basis(epsilon, np.asarray(t, dtype=float))
    x = q * C + p * S
    xdot = p * C - epsilon * q * S
    return PhasePoint(q=x, p=xdot)


def perturbed_trajectory(q, p, g: float, epsilon: int, t) -> PhasePoint:
    """Flow of ``P^2/2 + epsilon Q^2/2 + g^2/Q^2`` from ``(q, p)``.

    Closed form ``y = sqrt(x(t)^2 + 2 g^2 S(t)^2 / q^2)`` with ``x`` the
    unperturbed path; ``y`` is taken non-negative, so the returned momentum
    is the velocity of ``|y|``, matching ``p * sign(q)`` at ``t = 0``.
    Broadcasts over array arguments.
    """
    epsilon = _check_sign(epsilon)
    q = np.asarray(q, dtype=float)
    if g != 0 and np.any(q == 0):
        raise ValueError("q = 0 lies on the singularity of the g^2/Q^2 potential")
    t = np.asarray(t, dtype=float)
    C, S = _basis(epsilon, t)
    x = q * C + p * S
    xdot = p * C - epsilon * q * S
    k = 2.0 * g * g / (q * q) if g != 0 else 0.0
    y = np.sqrt(x * x + k * S * S)
    # d/dt (S^2) = 2 S C in both cases
    with np.errstate(invalid="ignore", divide="ignore"):
        ydot = np.where(y > 0, (x * xdot + k * S * C) / y, np.sign(q) * p)
    if y.ndim == 0:
        return PhasePoint(q=float(y), p=float(ydot))
    return PhasePoint(q=y, p=ydot)


def energy_invariant(q: float, p: float, g: float, epsilon: int) -> float:
    """Conserved energy ``p^2/2 + epsilon q^2/2 + g^2/q^2`` of the perturbed flow."""
    epsilon = _check_sign(epsilon)
    if q == 0:
        raise ValueError("q = 0 lies on the singularity of the g^2/Q^2 potential")
    return 0.5 * (p * p + epsilon * q * q) + g * g / (q * q)
