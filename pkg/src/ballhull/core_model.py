"""Model parameters, scaling exponents and dimensional constants."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the ball model with intensity ``lam * (1 - |x|)**delta``.

    Parameters
    ----------
    d : int
        Ambient dimension, at least 2.
    lam : float
        Intensity scale, positive.
    delta : float
        Boundary exponent, nonnegative.
    """

    d: int
    lam: float
    delta: float = 0.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.d}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"intensity must be positive, got {self.lam}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be >= 0, got {self.delta}")

    @property
    def exponents(self) -> "ScalingExponents":
        return scaling_exponents(self)

    def require_hull_dimension(self) -> None:
        if self.d not in (2, 3):
            raise ValueError(f"hull operations support d in {{2, 3}}, got {self.d}")


@dataclass(frozen=True)
class ScalingExponents:
    beta: float
    gamma: float
    zeta: float
    tau: float


def scaling_exponents(params: ModelParams) -> ScalingExponents:
    """Spatial, radial, integrated and face-count exponents."""
    d, delta = params.d, params.delta
    beta = 1.0 / (d + 1 + 2 * delta)
    gamma = 2.0 * beta
    tau = beta * (d - 1)
    zeta = tau + 2.0 * gamma
    return ScalingExponents(beta=beta, gamma=gamma, zeta=zeta, tau=tau)


def ball_volume(j: int) -> float:
    """Volume kappa_j of the j-dimensional unit ball."""
    if j < 0:
        raise ValueError("j must be >= 0")
    return math.pi ** (j / 2.0) / math.gamma(1.0 + j / 2.0)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d, equal to d * kappa_d."""
    return d * ball_volume(d)


def beta_function(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
