"""Two-point correlators, closed forms, critical exponents and fits.

The correlator is assembled from Green values as

    Gamma = sqrt(rho_TF(x1) rho_TF(x2)) * exp(-(G(1;2) + G(2;1))/2),

with the Thomas-Fermi density standing in for the renormalized densities of
the prefactor.  All power-law exponents derive from the single stored
quantity theta: homogeneous theta = 2 pi hbar v / g, trapped
theta(S) = 2 pi hbar rho_TF(S) / (m v), correlation length
xi(S) = (hbar beta v / pi) theta(S).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DataError, DomainError, RegimeError
from .green_homogeneous import GreenValue, log_2sin_abs, log_2sinh_abs
from .model import DerivedScales, PhysicalParams, Regime, classify_regime, rho_tf

BOUNDARY_MARGIN = 1e-6

__all__ = [
    "CorrelatorQuery",
    "FitResult",
    "ExponentReport",
    "CoherenceValue",
    "theta_homogeneous",
    "theta_at",
    "xi_at",
    "gamma_from_green",
    "gamma_d1_exact",
    "gamma_d1_quasihom",
    "gamma_homog",
    "gamma_trapped_asymptotic",
    "trapped_window_ratios",
    "coherence_multidim",
    "extract_exponent",
    "exponent_report",
]


@dataclass(frozen=True)
class CorrelatorQuery:
    """Spacetime arguments of one correlator evaluation.

    The midpoint S is always recomputed from x1 and x2.
    """

    x1: float
    tau1: float
    x2: float
    tau2: float
    method: str = "closed-form"  # series | spectral | asymptotic-auto | closed-form

    @property
    def S(self) -> float:
        return 0.5 * (self.x1 + self.x2)

    @property
    def dx(self) -> float:
        return self.x1 - self.x2

    @property
    def dtau(self) -> float:
        return self.tau1 - self.tau2


@dataclass(frozen=True)
class FitResult:
    inv_theta: float
    inv_theta_stderr: float
    intercept: float
    n_samples: int
    sep_range: tuple

    @property
    def theta(self) -> float:
        return 1.0 / self.inv_theta

    @property
    def theta_stderr(self) -> float:
        return self.inv_theta_stderr / self.inv_theta**2


@dataclass(frozen=True)
class ExponentReport:
    theta_hom: float
    theta_S: float
    xi_S: float
    fit: FitResult


@dataclass(frozen=True)
class CoherenceValue:
    gamma1: float
    phase_green: float
    dim: int
    separation: float


def theta_homogeneous(p: PhysicalParams, d: DerivedScales) -> float:
    """theta = 2 pi hbar v / g (equivalently 2 pi hbar rho / (m v), rho = Lambda/g)."""
    return 2.0 * math.pi * p.hbar * d.v / p.g


def theta_at(S: float, p: PhysicalParams, d: DerivedScales) -> float:
    """Position-dependent exponent theta(S) = 2 pi hbar rho_TF(S) / (m v)."""
    rho = rho_tf(S, p, d)
    if rho <= 0.0:
        raise DomainError(f"theta(S) undefined outside the condensate: rho_TF({S}) = 0")
    return 2.0 * math.pi * p.hbar * rho / (p.m * d.v)


def xi_at(S: float, p: PhysicalParams, d: DerivedScales) -> float:
    """Correlation length xi(S) = (hbar beta v / pi) theta(S) = 2 hbar^2 beta rho_TF(S)/m."""
    return (p.hbar * p.beta * d.v / math.pi) * theta_at(S, p, d)


def _sqrt_rho_pair(x1: float, x2: float, p: PhysicalParams, d: DerivedScales) -> float:
    r1 = rho_tf(x1, p, d)
    r2 = rho_tf(x2, p, d)
    if r1 <= 0.0 or r2 <= 0.0:
        raise DomainError(f"correlator prefactor needs interior points; rho_TF vanished at x1={x1} or x2={x2}")
    return math.sqrt(r1 * r2)


def gamma_from_green(
    q: CorrelatorQuery,
    g12,
    g21,
    p: PhysicalParams,
    d: DerivedScales,
    imag_tol: float = 1e-9,
) -> float:
    """Gamma from a symmetrized pair of Green values of one method.

    The symmetrized Green value must be real up to ``imag_tol`` (scaled by its
    magnitude); a larger residual means the two inputs were produced
    inconsistently.
    """
    v12 = g12.value if isinstance(g12, GreenValue) else complex(g12)
    v21 = g21.value if isinstance(g21, GreenValue) else complex(g21)
    if isinstance(g12, GreenValue) and isinstance(g21, GreenValue) and g12.method != g21.method:
        raise ConsistencyError(f"gamma_from_green mixes methods {g12.method!r} and {g21.method!r}")
    sym = 0.5 * (v12 + v21)
    residual = abs(sym.imag)
    if residual > imag_tol * max(1.0, abs(sym.real)):
        raise ConsistencyError(
            f"symmetrized Green value has imaginary residual {residual:.3e} above tolerance {imag_tol:g}"
        )
    return _sqrt_rho_pair(q.x1, q.x2, p, d) * math.exp(-sym.real)


def gamma_d1_exact(x1: float, x2: float, p: PhysicalParams, d: DerivedScales) -> float:
    """Equal-time trapped correlator in closed form.

    sqrt(rho rho') * [ (1 + |dx|/R_c - x1 x2/R_c^2) /
                       (1 - |dx|/R_c - x1 x2/R_c^2) ] ^ (-g R_c/(4 beta hbar^2 v^2))
    """
    du = abs(x1 - x2) / d.R_c
    uu = (x1 / d.R_c) * (x2 / d.R_c)
    num = 1.0 + du - uu
    den = 1.0 - du - uu
    if num <= 0.0 or den <= 0.0:
        raise DomainError(f"closed-form bracket non-positive (num={num:.6g}, den={den:.6g})")
    expo = -p.g * d.R_c / (4.0 * p.beta * (p.hbar * d.v) ** 2)
    return _sqrt_rho_pair(x1, x2, p, d) * (num / den) ** expo


def gamma_d1_quasihom(
    x1: float, x2: float, p: PhysicalParams, d: DerivedScales, window_factor: float = 0.1
) -> float:
    """Quasi-homogeneous limit of the equal-time correlator.

    sqrt(rho rho') * exp(-Lambda |dx| / (2 beta hbar^2 v^2 rho_TF(S))); the
    decay rate is 1/xi(S).
    """
    dx = abs(x1 - x2)
    s_half = 0.5 * (x1 + x2)
    failures = []
    if dx > window_factor * d.R_c:
        failures.append(f"|dx| << R_c violated (|dx|/R_c = {dx / d.R_c:.3g})")
    if dx > window_factor * abs(s_half):
        failures.append(f"|dx| << |S| violated (|dx|/|S| = {dx / max(abs(s_half), 1e-300):.3g})")
    if failures:
        raise RegimeError("quasi-homogeneous window failed: " + "; ".join(failures))
    rate = p.Lambda / (2.0 * p.beta * (p.hbar * d.v) ** 2 * rho_tf(s_half, p, d))
    return _sqrt_rho_pair(x1, x2, p, d) * math.exp(-rate * dx)


def _abs_sinh(z: complex) -> float:
    return 0.5 * math.exp(log_2sinh_abs(z))


def _abs_sin(z: complex) -> float:
    return 0.5 * math.exp(log_2sin_abs(z))


def gamma_homog(
    x1: float,
    tau1: float,
    x2: float,
    tau2: float,
    p: PhysicalParams,
    d: DerivedScales,
    form: str,
) -> float:
    """Homogeneous-gas correlator in one of its three asymptotic forms.

    form = "highT"     |sinh(pi/(hbar beta v) zeta)|^(-1/theta)
    form = "lowT"      |sin(pi/(2 R_c) zeta)|^(-1/theta)
    form = "powerlaw"  |zeta|^(-1/theta)

    with zeta = |dx| + i hbar v dtau and theta = 2 pi hbar v / g.  The
    homogeneous density Lambda/g supplies the prefactor.  Returns inf at
    coincident arguments (divergence marker).
    """
    hv = p.hbar * d.v
    zeta = complex(abs(x1 - x2), hv * (tau1 - tau2))
    theta = theta_homogeneous(p, d)
    rho0 = p.Lambda / p.g
    if form == "highT":
        base = _abs_sinh((math.pi / (p.hbar * p.beta * d.v)) * zeta)
    elif form == "lowT":
        base = _abs_sin((math.pi / (2.0 * d.R_c)) * zeta)
    elif form == "powerlaw":
        base = abs(zeta)
    else:
        raise DomainError(f"unknown homogeneous form {form!r}")
    if base == 0.0:
        return math.inf
    return rho0 * base ** (-1.0 / theta)


def trapped_window_ratios(q: CorrelatorQuery, p: PhysicalParams, d: DerivedScales) -> dict:
    """Dimensionless ratios entering the asymptotic window checks."""
    hv = p.hbar * d.v
    zeta = abs(complex(abs(q.dx), hv * q.dtau))
    rho_s = rho_tf(q.S, p, d)
    rho_var = (
        abs(rho_tf(q.x1, p, d) - rho_tf(q.x2, p, d)) / rho_s if rho_s > 0.0 else math.inf
    )
    return {
        "dx_over_lambdaT": abs(q.dx) / d.lambda_T,
        "dtau_over_beta": abs(q.dtau) / p.beta,
        "lambdaT_over_Rc": d.lambda_T / d.R_c,
        "zeta_over_Rc": zeta / d.R_c,
        "dx_over_Rc": abs(q.dx) / d.R_c,
        "S_over_Rc": abs(q.S) / d.R_c,
        "rho_variation": rho_var,
    }


def _power_law_gamma(q: CorrelatorQuery, p: PhysicalParams, d: DerivedScales) -> float:
    """Shared power-law form: both temperature limits dispatch here, so their
    values coincide bit-for-bit for identical inputs."""
    hv = p.hbar * d.v
    zeta = abs(complex(abs(q.dx), hv * q.dtau))
    if zeta == 0.0:
        return math.inf
    return _sqrt_rho_pair(q.x1, q.x2, p, d) * zeta ** (-1.0 / theta_at(q.S, p, d))


def gamma_trapped_asymptotic(
    q: CorrelatorQuery,
    p: PhysicalParams,
    d: DerivedScales,
    form: str = "auto",
    window_factor: float = 0.1,
    r_lo: float = 0.1,
    r_hi: float = 10.0,
) -> float:
    """Trapped correlator from the regime-dispatched asymptotic closed forms.

    form = "sinh"         high-T sinh power law (quasi-homogeneous window)
    form = "exponential"  high-T exponential decay with xi(S)
    form = "power"        short-separation power law; the high- and
                          low-temperature final estimates coincide and share
                          one implementation
    form = "auto"         pick by regime and window checks; raise RegimeError
                          naming the failed inequalities when nothing applies
    """
    ratios = trapped_window_ratios(q, p, d)
    theta_s = theta_at(q.S, p, d)
    hv = p.hbar * d.v

    def quasihom_ok():
        return (
            ratios["rho_variation"] <= window_factor
            and ratios["dx_over_Rc"] <= window_factor
            and ratios["S_over_Rc"] <= 1.0 - BOUNDARY_MARGIN
        )

    def window_exponential_ok():
        # 1 << |dx|/lambda_T << R_c/lambda_T
        return ratios["dx_over_lambdaT"] >= 1.0 / window_factor and abs(q.dx) <= window_factor * d.R_c

    def window_power_ok():
        # |dx|/lambda_T, dtau/beta << 1 << R_c/lambda_T
        return (
            ratios["dx_over_lambdaT"] <= window_factor
            and ratios["dtau_over_beta"] <= window_factor
            and d.R_c / d.lambda_T >= 1.0 / window_factor
        )

    def lowT_gate_ok():
        return ratios["zeta_over_Rc"] < window_factor

    if form == "sinh":
        if not quasihom_ok():
            raise RegimeError(
                "sinh form requires the quasi-homogeneous window: "
                f"density variation = {ratios['rho_variation']:.3g}, |dx|/R_c = {ratios['dx_over_Rc']:.3g}"
            )
        base = _abs_sinh((math.pi / (p.hbar * p.beta * d.v)) * complex(abs(q.dx), hv * q.dtau))
        if base == 0.0:
            return math.inf
        return _sqrt_rho_pair(q.x1, q.x2, p, d) * base ** (-1.0 / theta_s)
    if form == "exponential":
        if not window_exponential_ok():
            raise RegimeError(
                "exponential form requires 1 << |dx|/lambda_T << R_c/lambda_T: "
                f"|dx|/lambda_T = {ratios['dx_over_lambdaT']:.3g}, |dx|/R_c = {ratios['dx_over_Rc']:.3g}"
            )
        zeta = abs(complex(abs(q.dx), hv * q.dtau))
        return _sqrt_rho_pair(q.x1, q.x2, p, d) * math.exp(-zeta / xi_at(q.S, p, d))
    if form == "power":
        if not (window_power_ok() or lowT_gate_ok()):
            raise RegimeError(
                "power-law form requires |dx|/lambda_T << 1 and dtau/beta << 1 (high T) "
                f"or |zeta|/R_c << 1 (low T): ratios {ratios}"
            )
        return _power_law_gamma(q, p, d)
    if form == "auto":
        regime = classify_regime(d, r_lo, r_hi)
        if regime is Regime.HIGH_T:
            if window_power_ok():
                return _power_law_gamma(q, p, d)
            if window_exponential_ok():
                return gamma_trapped_asymptotic(q, p, d, "exponential", window_factor, r_lo, r_hi)
            if quasihom_ok():
                return gamma_trapped_asymptotic(q, p, d, "sinh", window_factor, r_lo, r_hi)
            raise RegimeError(
                f"no high-temperature window applies: ratios {ratios} against factor {window_factor}"
            )
        if regime is Regime.LOW_T:
            if lowT_gate_ok():
                return _power_law_gamma(q, p, d)
            raise RegimeError(
                f"low-temperature gate |zeta|/R_c << 1 failed (got {ratios['zeta_over_Rc']:.3g})"
            )
        raise RegimeError(
            f"intermediate regime (beta/alpha = {d.regime_ratio:.3g}): no asymptotic form applies"
        )
    raise DomainError(f"unknown form {form!r}")


def coherence_multidim(x1, x2, dim: int, p: PhysicalParams, d: DerivedScales) -> CoherenceValue:
    """First-order coherence across dimensions, plus the raw phase correlator.

    d=3: Gamma^(1) = exp(+Lambda / (4 pi beta hbar^2 v^2 rho_TF(S) |dx|))
    d=2: Gamma^(1) = (lambda_T / |dx|) ^ (Lambda / (2 pi beta hbar^2 v^2 rho_TF(S)))
    d=1: the quasi-homogeneous exponential with the sqrt(rho rho') prefactor.

    The phase correlator G is returned alongside; S is the radial coordinate
    of the midpoint.  Zero separation is a divergence marker (inf) for
    d = 2, 3.
    """
    if dim not in (1, 2, 3):
        raise DomainError(f"dim must be 1, 2 or 3, got {dim}")
    a = np.atleast_1d(np.asarray(x1, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.shape != (dim,) or b.shape != (dim,):
        raise DomainError(f"arguments must be {dim}-vectors, got shapes {a.shape} and {b.shape}")
    sep = float(np.linalg.norm(a - b))
    s_rad = float(np.linalg.norm(0.5 * (a + b)))
    rho_s = rho_tf(s_rad, p, d)
    if rho_s <= 0.0:
        raise DomainError(f"midpoint |S| = {s_rad} lies outside the condensate")
    hv2 = (p.hbar * d.v) ** 2
    if dim == 3:
        if sep == 0.0:
            return CoherenceValue(math.inf, -math.inf, dim, sep)
        green = -p.Lambda / (4.0 * math.pi * p.beta * hv2 * rho_s * sep)
        return CoherenceValue(math.exp(-green), green, dim, sep)
    if dim == 2:
        if sep == 0.0:
            return CoherenceValue(math.inf, -math.inf, dim, sep)
        green = p.Lambda / (2.0 * math.pi * p.beta * hv2 * rho_s) * math.log(sep / d.lambda_T)
        return CoherenceValue(math.exp(-green), green, dim, sep)
    green = p.Lambda * sep / (2.0 * p.beta * hv2 * rho_s)
    gamma = _sqrt_rho_pair(float(a[0]), float(b[0]), p, d) * math.exp(-green)
    return CoherenceValue(gamma, green, dim, sep)


def extract_exponent(separations, gammas, rho_products=None, min_samples: int = 8) -> FitResult:
    """Least-squares power-law exponent from Gamma samples.

    Fits ln(Gamma / sqrt(rho rho')) = intercept - (1/theta) ln|dx| and returns
    -slope as the 1/theta estimate with its standard error.
    """
    sep = np.asarray(separations, dtype=float)
    gam = np.asarray(gammas, dtype=float)
    if rho_products is None:
        rho_products = np.ones_like(gam)
    rp = np.asarray(rho_products, dtype=float)
    if sep.shape != gam.shape or sep.shape != rp.shape:
        raise DataError("separations, gammas and rho_products must have matching shapes")
    if sep.size < min_samples:
        raise DataError(f"need at least {min_samples} samples, got {sep.size}")
    if np.any(gam <= 0.0) or np.any(sep <= 0.0) or np.any(rp <= 0.0):
        raise DataError("all separations, Gamma samples and density products must be positive")
    xs = np.log(sep)
    ys = np.log(gam / rp)
    n = sep.size
    x_mean = xs.mean()
    sxx = float(np.sum((xs - x_mean) ** 2))
    if sxx == 0.0:
        raise DataError("separations are all identical; cannot fit a slope")
    slope = float(np.sum((xs - x_mean) * (ys - ys.mean())) / sxx)
    intercept = float(ys.mean() - slope * x_mean)
    resid = ys - (intercept + slope * xs)
    dof = max(n - 2, 1)
    slope_err = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return FitResult(
        inv_theta=-slope,
        inv_theta_stderr=slope_err,
        intercept=intercept,
        n_samples=n,
        sep_range=(float(sep.min()), float(sep.max())),
    )


def exponent_report(
    S: float,
    separations,
    gammas,
    rho_products,
    p: PhysicalParams,
    d: DerivedScales,
) -> ExponentReport:
    """Bundle the analytic exponents at midpoint S with a fitted exponent."""
    fit = extract_exponent(separations, gammas, rho_products)
    return ExponentReport(
        theta_hom=theta_homogeneous(p, d),
        theta_S=theta_at(S, p, d),
        xi_S=xi_at(S, p, d),
        fit=fit,
    )
