"""Distances induced by reproducing kernels, with the operator and
Nevanlinna-Pick machinery used to check identities between them."""

from .errors import *  # noqa: F401,F403
from .kernels import (  # noqa: F401
    DHB,
    Custom,
    DirectSum,
    DruryArveson,
    FiniteLengthExample,
    Fock,
    Power,
    Product,
    RadialBergman,
    Rescale,
    Scaling,
    Tagged,
    direct_sum,
    gram,
    kernel_eval,
    kernel_norm,
    moments_from_weight,
    normalized_pairing,
    power,
    product,
    radial_weight_bergman,
    rescale,
)

__version__ = "0.1.0"
