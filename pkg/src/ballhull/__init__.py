"""Random polytopes in the unit ball and their paraboloid scaling limits."""

__version__ = "0.1.0"

from .core_model import ModelParams, ScalingExponents, ball_volume, scaling_exponents
from .samplers import (
    RngStream,
    Window,
    sample_ball_process,
    sample_dual_radial_process,
    sample_halfspace_process,
)

__all__ = [
    "ModelParams",
    "ScalingExponents",
    "RngStream",
    "Window",
    "ball_volume",
    "scaling_exponents",
    "sample_ball_process",
    "sample_dual_radial_process",
    "sample_halfspace_process",
    "__version__",
]
