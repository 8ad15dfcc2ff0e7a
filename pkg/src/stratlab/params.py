"""Physical parameters of the stratified Couette problem.

The linearized dynamics around the Couette flow U(y) = y with affine stable
stratification is controlled by three numbers: the buoyancy frequency beta
(beta^2 is also the Richardson number of the flow, since U' = 1), the
viscosity nu and the diffusivity kappa.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalParams:
    """Buoyancy frequency and dissipation coefficients.

    beta : buoyancy (Brunt-Vaisala) frequency, > 0
    nu   : viscosity, >= 0
    kappa: diffusivity, >= 0
    """

    beta: float
    nu: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError("beta must be > 0")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError("nu must be finite and >= 0")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError("kappa must be finite and >= 0")

    @property
    def miles_howard(self) -> bool:
        """Spectral-stability screening: beta^2 > 1/4 (same as beta > 1/2)."""
        return self.beta * self.beta > 0.25

    @property
    def inviscid(self) -> bool:
        return self.nu == 0.0 and self.kappa == 0.0

    @property
    def enhanced_ok(self) -> bool:
        """Comparability condition max/min < 4*beta - 1 for the t^3 decay envelope."""
        if self.nu <= 0 or self.kappa <= 0:
            return False
        hi, lo = max(self.nu, self.kappa), min(self.nu, self.kappa)
        return hi / lo < 4.0 * self.beta - 1.0


def energy_envelope_constant(beta: float) -> float:
    """Two-sided envelope constant for |Z|^2 + |Q|^2 in the inviscid flow.

    C(beta) = [ (2b+1)/(2b-1) * exp(1/(2b-1)) ]^(1/2), defined for beta > 1/2.
    The squared symmetric amplitude stays within [C^-2, C^2] of its initial
    value for every mode; C -> 1 as beta -> infinity (pure wave regime).
    """
    if beta <= 0.5:
        raise ValueError("envelope constant requires beta > 1/2")
    g = 2.0 * beta - 1.0
    return math.sqrt((2.0 * beta + 1.0) / g * math.exp(1.0 / g))


def dissipation_rate(params: PhysicalParams) -> float:
    """Rate constant of the enhanced-dissipation envelope exp(-rate*k^2*t^3/12).

    rate = min(nu,kappa) * (1 - 1/(4 beta) - max/min/(4 beta)); strictly
    positive exactly when the comparability condition holds.
    """
    if params.nu <= 0 or params.kappa <= 0:
        raise ValueError("dissipation rate requires nu > 0 and kappa > 0")
    hi, lo = max(params.nu, params.kappa), min(params.nu, params.kappa)
    return lo * (1.0 - 1.0 / (4.0 * params.beta) - hi / lo / (4.0 * params.beta))
