"""Quantum and classical fidelity for the oscillator ``P^2/2 + eps Q^2/2``
perturbed by a repulsive ``g^2/Q^2`` potential."""
from .dynamics import ModeSpec, theta_tilde
from .qfidelity import (adaptive_weights, exact_weights, minimum_time, quantum_fidelity,
                        quantum_fidelity_limit, spectral_weights)
from .cfidelity import (BallIndicator, Gaussian, asymptotic_value, classical_fidelity,
                        classical_fidelity_curve, cusp_slope)

__version__ = "0.1.0"
