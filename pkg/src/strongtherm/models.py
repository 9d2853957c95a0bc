"""Parameter containers for the oscillator and the heat bath."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

POTENTIALS = ("power", "cosh")


@dataclass(frozen=True)
class OscillatorModel:
    """H = p^2/2 + omega^2 x^2/2 + interaction, with unit mass.

    ``potential="power"`` gives the interaction lam/(2p)! x^(2p) (p=2 is the
    quartic lam/4! x^4).  ``potential="cosh"`` gives the non-polynomial model
    (omega^4/lam)(cosh(sqrt(lam) x/omega) - 1), whose quadratic part is the
    harmonic term itself.

    ``sigma`` moves a fraction of omega^2 out of the Gaussian kernel and into
    the independent-value functional; it has no effect on the exact spectrum.
    """

    omega: float
    lam: float
    sigma: float = 0.0
    p: int = 2
    potential: str = "power"

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be positive and finite, got {self.omega}")
        # lam = 0 is allowed so the free limit can be reached; formulas that
        # need lam > 0 check for it themselves.
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be non-negative and finite, got {self.lam}")
        if not (0.0 <= self.sigma < 1.0):
            raise DomainError(f"sigma must lie in [0, 1), got {self.sigma}")
        if int(self.p) != self.p or self.p < 2:
            raise DomainError(f"p must be an integer >= 2, got {self.p}")
        if self.potential not in POTENTIALS:
            raise DomainError(f"potential must be one of {POTENTIALS}, got {self.potential!r}")
        if self.potential == "cosh" and self.lam == 0:
            raise DomainError("the cosh potential needs lambda > 0")

    @property
    def has_closed_forms(self) -> bool:
        """True when the closed strong-coupling forms apply (quartic, sigma=0)."""
        return self.potential == "power" and self.p == 2 and self.sigma == 0.0

    def interaction(self, x):
        """Non-harmonic part of the potential, V(x) - omega^2 x^2 / 2."""
        if self.potential == "power":
            return self.lam / math.factorial(2 * self.p) * x ** (2 * self.p)
        import numpy as np

        a = math.sqrt(self.lam) / self.omega
        # cosh(ax) - 1 - (ax)^2/2 with the quadratic piece removed analytically
        ax = np.asarray(a * x, dtype=float)
        small = np.abs(ax) < 1e-2
        series = ax**4 / 24 + ax**6 / 720 + ax**8 / 40320
        with np.errstate(over="ignore"):  # inf is a legitimate answer far out
            full = np.expm1(ax) / 2 + np.expm1(-ax) / 2 - ax**2 / 2
        out = np.where(small, series, full)
        return self.omega**4 / self.lam * out


@dataclass(frozen=True)
class ThermalPoint:
    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")
