"""Free oscillator and first-order-in-lambda reference partition functions.

First order in the quartic coupling gives

    Z = Z0 [1 - (3 lam/4!) beta (1/4) coth^2(beta omega/2) c(omega)]

where ``Variant.AS_PRINTED`` takes c = 1 (the form usually quoted with
dimensionless units) and ``Variant.OMEGA_RESTORED`` takes c = 1/omega^2, the
standard thermal expectation 3<x^2>^2 with <x^2> = coth(beta omega/2)/(2 omega).
The two agree at omega = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import OutOfRegimeError
from .models import OscillatorModel, ThermalPoint
from .specfun import _bose, _check_operator_args


class Variant(str, enum.Enum):
    AS_PRINTED = "AsPrinted"
    OMEGA_RESTORED = "OmegaRestored"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, Variant):
            return value
        aliases = {"printed": cls.AS_PRINTED, "restored": cls.OMEGA_RESTORED}
        return aliases.get(str(value).lower()) or cls(str(value))


@dataclass(frozen=True)
class WeakCouplingResult:
    Z: float
    variant: Variant
    lnZ: float
    E: float

    def __post_init__(self):
        if not self.Z > 0:
            raise ValueError("weak-coupling Z must be positive")


def free_ln_partition(omega: float, beta: float) -> float:
    """ln Z0 = -beta omega/2 - ln(1 - e^(-beta omega))."""
    _check_operator_args(beta, omega, 0.0)
    x = beta * omega
    return -0.5 * x - math.log(-math.expm1(-x))


def free_partition(omega: float, beta: float) -> float:
    """1 / (2 sinh(beta omega / 2))."""
    return math.exp(free_ln_partition(omega, beta))


def free_mean_energy(omega: float, beta: float) -> float:
    _check_operator_args(beta, omega, 0.0)
    return omega * (0.5 + _bose(beta * omega))


def _coth(x):
    return 1.0 / math.tanh(x)


def first_order_partition(model: OscillatorModel, point: ThermalPoint,
                          variant=Variant.OMEGA_RESTORED) -> WeakCouplingResult:
    if model.potential != "power" or model.p != 2:
        raise OutOfRegimeError("first-order formula is for the quartic interaction")
    variant = Variant.parse(variant)
    w, b = model.omega, point.beta
    c = model.lam / 32.0
    if variant is Variant.OMEGA_RESTORED:
        c /= w * w
    half = 0.5 * b * w
    coth = _coth(half)
    correction = c * b * coth * coth
    bracket = 1.0 - correction
    if not bracket > 0:
        raise OutOfRegimeError(
            f"first-order bracket is {bracket:.3g} <= 0 at lambda={model.lam}; "
            "the coupling is too large for first-order perturbation theory"
        )
    lnz = free_ln_partition(w, b) + math.log(bracket)
    # d/dbeta of the correction: c [coth^2 - beta omega coth csch^2]
    csch2 = coth * coth - 1.0
    dcorr = c * (coth * coth - b * w * coth * csch2)
    energy = free_mean_energy(w, b) + dcorr / bracket
    return WeakCouplingResult(Z=math.exp(lnz), variant=variant, lnZ=lnz, E=energy)
