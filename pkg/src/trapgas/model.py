"""Physical parameters, derived scales, condensate profile and excitation spectrum.

The gas is a weakly repulsive 1D Bose gas in a harmonic trap, described by a
mass ``m``, a repulsive coupling ``g > 0``, a trap frequency ``Omega``, a
renormalized chemical potential ``Lambda`` (a direct input here) and an
inverse temperature ``beta``.  Boltzmann's constant is fixed to 1, so ``beta``
carries units of inverse energy.  ``hbar`` is kept as an explicit field
(default 1) so no hidden nondimensionalization happens anywhere downstream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "PhysicalParams",
    "DerivedScales",
    "Regime",
    "LevelSpacing",
    "derive_scales",
    "rho_tf",
    "energy_level",
    "level_spacing_expansion",
    "classify_regime",
    "DEFAULT_R_LO",
    "DEFAULT_R_HI",
]

# Default thresholds turning the strong inequalities "beta/alpha << 1" and
# "beta/alpha >> 1" into a concrete classification.
DEFAULT_R_LO = 0.1
DEFAULT_R_HI = 10.0


@dataclass(frozen=True)
class PhysicalParams:
    """Primary inputs. All fields must be strictly positive.

    ``Lambda`` is the renormalized chemical potential, taken as a direct
    input; the over-condensate correction that renormalizes the bare chemical
    potential is not computed here.
    """

    m: float
    g: float
    Omega: float
    Lambda: float
    beta: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "g", "Omega", "Lambda", "beta", "hbar"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"PhysicalParams.{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class DerivedScales:
    """Scales derived from :class:`PhysicalParams`.

    v            sound velocity at the trap center, v = sqrt(Lambda/m)
    R_c          condensate (Thomas-Fermi) radius, R_c^2 = 2 Lambda/(m Omega^2)
    alpha        R_c/(hbar v); same units as beta
    lambda_T     thermal length hbar*beta*v
    regime_ratio beta/alpha, the dimensionless temperature dial
    """

    v: float
    R_c: float
    alpha: float
    lambda_T: float
    regime_ratio: float


class Regime(enum.Enum):
    HIGH_T = "HighT"
    LOW_T = "LowT"
    INTERMEDIATE = "Intermediate"


@dataclass(frozen=True)
class LevelSpacing:
    """Exact level spacing next to mode ``n`` and its truncated expansion."""

    exact: float
    expansion: float

    @property
    def difference(self) -> float:
        return self.exact - self.expansion


def derive_scales(p: PhysicalParams) -> DerivedScales:
    """Compute all derived scales from the primary parameters.

    The exact identities v^2 m = Lambda and R_c^2 m Omega^2 = 2 Lambda hold by
    construction.
    """
    v = math.sqrt(p.Lambda / p.m)
    r_c = math.sqrt(2.0 * p.Lambda / (p.m * p.Omega**2))
    alpha = r_c / (p.hbar * v)
    lambda_t = p.hbar * p.beta * v
    return DerivedScales(v=v, R_c=r_c, alpha=alpha, lambda_T=lambda_t, regime_ratio=p.beta / alpha)


def rho_tf(x, p: PhysicalParams, d: DerivedScales):
    """Thomas-Fermi condensate density (Lambda/g)(1 - x^2/R_c^2), clipped to 0.

    Accepts a scalar or an ndarray of positions; the profile is an inverted
    parabola supported on [-R_c, R_c] and continuous at the edges.
    """
    u2 = np.square(np.asarray(x, dtype=float) / d.R_c)
    out = (p.Lambda / p.g) * np.maximum(0.0, 1.0 - u2)
    if np.ndim(x) == 0:
        return float(out)
    return out


def energy_level(n: int, p: PhysicalParams, d: DerivedScales) -> float:
    """Energy of the n-th low-lying collective mode, hbar*Omega*sqrt(n(n+1)/2)."""
    if n != int(n) or n < 0:
        raise DomainError(f"mode index must be an integer >= 0, got {n!r}")
    n = int(n)
    return p.hbar * p.Omega * math.sqrt(n * (n + 1) / 2.0)


def level_spacing_expansion(n: int, d: DerivedScales) -> LevelSpacing:
    """Exact spacing E_{n+1}-E_n next to n > 1 and the 1/n expansion.

    The expansion is (1/alpha) * (1 + 1/(8 n^2) - 1/(4 n^3)); the term
    proportional to 1/n is absent, so the spectrum is nearly equidistant
    already at moderate n.
    """
    if n != int(n) or n <= 1:
        raise DomainError(f"level_spacing_expansion requires integer n > 1, got {n!r}")
    n = int(n)
    exact = (math.sqrt((n + 1) * (n + 2)) - math.sqrt(n * (n + 1))) / d.alpha
    expansion = (1.0 + 1.0 / (8 * n**2) - 1.0 / (4 * n**3)) / d.alpha
    return LevelSpacing(exact=exact, expansion=expansion)


def classify_regime(d: DerivedScales, r_lo: float = DEFAULT_R_LO, r_hi: float = DEFAULT_R_HI) -> Regime:
    """Classify beta/alpha against the two strong-inequality thresholds."""
    if not (0 < r_lo < r_hi):
        raise ConfigError(f"regime thresholds must satisfy 0 < r_lo < r_hi, got r_lo={r_lo}, r_hi={r_hi}")
    ratio = d.regime_ratio
    if ratio < r_lo:
        return Regime.HIGH_T
    if ratio > r_hi:
        return Regime.LOW_T
    return Regime.INTERMEDIATE
