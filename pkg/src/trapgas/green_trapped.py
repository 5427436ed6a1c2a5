"""Green function of the trapped (non-homogeneous) phase-correlation problem.

For each bosonic Matsubara frequency omega = 2 pi l / beta the spectral
density G_omega(x, x') solves

    -(omega^2/(hbar v)^2) G + d/dx[(1 - x^2/R_c^2) dG/dx] = (g/(hbar v)^2) delta(x - x')

on (-R_c, R_c).  Its closed form combines Legendre functions of degree
nu(omega) = -1/2 + sqrt(1/4 - alpha^2 omega^2):

    jump component    K eps(x-x') [ Q_nu(u) P_nu(u') - Q_nu(u') P_nu(u) ]
    smooth component  -K [ (2/pi) Q_nu(u) Q_nu(u') + (pi/2) P_nu(u) P_nu(u') ]

with u = x/R_c, K = g R_c / (2 hbar^2 v^2), the full density being
(jump) + i*(smooth).  For conical degrees the two components are complex
individually and cancel almost completely in the sum, so the full value is
evaluated through the stable product factorization

    G_omega = -i (2K/pi) * W_plus(u_<) * W_minus(u_>),
    W_pm(u) = Q_nu(u) +- i (pi/2) P_nu(u),

with the W brackets computed cancellation-free in scaled arithmetic.  The
real part of the full value is the physical (real, symmetric) spectral
density that enters the Matsubara assembly; the smooth component's extra
content is reported but excluded from correlators.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

from .errors import AccuracyError, DomainError, RegimeError
from .green_homogeneous import GreenValue, log_2sinh_abs
from .legendre import (
    Degree,
    Scaled,
    _cos_pi_scaled,
    _exp_i_pi_nu_scaled,
    _sin_pi_scaled,
    nu_from_omega,
    p_poly_asymptotic,
    p_poly_table,
    p_scaled,
)
from .model import DerivedScales, PhysicalParams, rho_tf

__all__ = [
    "BOUNDARY_EPS",
    "SpectralDensity",
    "LowTControl",
    "spectral_density",
    "closed_form_zero_mode",
    "matsubara_assemble",
    "lowT_legendre_series",
    "lowT_n0_drift",
    "asympt_spectral_highT",
    "asympt_green_highT",
    "asympt_green_lowT",
]

# Evaluations are clamped away from the Thomas-Fermi boundary, where Q_nu has
# its logarithmic singularity.
BOUNDARY_EPS = 1e-6


@dataclass(frozen=True)
class SpectralDensity:
    """G_omega(x, x') at one Matsubara frequency.

    ``re_part``/``im_part`` are the real and imaginary parts of the full
    density.  ``jump_bracket`` and ``smooth_bracket`` are the two closed-form
    components (complex for conical degree; diagnostics only, they may
    overflow to inf at large alpha*omega even though the full value stays
    finite).
    """

    omega: float
    nu: Degree
    x: float
    xp: float
    re_part: float
    im_part: float
    jump_bracket: complex
    smooth_bracket: complex
    err_bound: float

    @property
    def value(self) -> complex:
        return complex(self.re_part, self.im_part)


@dataclass(frozen=True)
class LowTControl:
    """Controls for the low-temperature Legendre series.

    n0        crossover index below which exact polynomials are used
    n_max     cutoff for brute-force reference summations
    u_star    optional cap on the measured smallness parameter u_*
    min_dtau  minimum |tau - tau'| / beta before an accuracy warning
    variant   phase convention of the asymptotic polynomial form
    """

    n0: int = 20
    n_max: int = 200_000
    u_star: float | None = None
    min_dtau: float = 1e-3
    variant: str = "integer"

    def __post_init__(self):
        if self.n0 < 1:
            raise DomainError("n0 must be >= 1")
        if self.variant not in ("integer", "half"):
            raise DomainError(f"variant must be 'integer' or 'half', got {self.variant!r}")


def _clamped_u(x: float, d: DerivedScales, eps: float) -> float:
    u = x / d.R_c
    if abs(u) > 1.0 - eps:
        raise DomainError(
            f"|x|/R_c = {abs(u):.9g} exceeds the boundary clamp 1 - {eps:g}; "
            "trapped evaluations require interior points"
        )
    return u


def _k_coeff(p: PhysicalParams, d: DerivedScales) -> float:
    return p.g * d.R_c / (2.0 * (p.hbar * d.v) ** 2)


def spectral_density(
    omega: float,
    x: float,
    xp: float,
    p: PhysicalParams,
    d: DerivedScales,
    tol: float = 1e-13,
    boundary_eps: float = BOUNDARY_EPS,
) -> SpectralDensity:
    """Evaluate the closed-form spectral density at one Matsubara frequency."""
    u = _clamped_u(x, d, boundary_eps)
    up = _clamped_u(xp, d, boundary_eps)
    deg = nu_from_omega(omega, d)
    k = _k_coeff(p, d)

    if deg.nu == 0:  # omega = 0: integer degree, closed elementary forms
        au, aup = math.atanh(u), math.atanh(up)
        jump = k * abs(au - aup)
        smooth = -k * ((2.0 / math.pi) * au * aup + math.pi / 2.0)
        return SpectralDensity(
            omega=float(omega),
            nu=deg,
            x=x,
            xp=xp,
            re_part=jump,
            im_part=smooth,
            jump_bracket=complex(jump),
            smooth_bracket=complex(smooth),
            err_bound=0.0,
        )

    nu = deg.nu
    p_u, t1, e1 = p_scaled(nu, u, tol)
    p_mu, t2, e2 = p_scaled(nu, -u, tol)
    p_up, t3, e3 = p_scaled(nu, up, tol)
    p_mup, t4, e4 = p_scaled(nu, -up, tol)
    err = e1 + e2 + e3 + e4
    sin_pi = _sin_pi_scaled(nu)
    cos_pi = _cos_pi_scaled(nu)

    def q_of(p_plus: Scaled, p_minus: Scaled) -> Scaled:
        return p_plus.mul(cos_pi).add(p_minus.times(-1.0)).div(sin_pi).times(math.pi / 2.0)

    q_u = q_of(p_u, p_mu)
    q_up = q_of(p_up, p_mup)

    # full value through the cancellation-free product factorization, with the
    # W brackets assembled from the four cached P evaluations
    if u >= up:
        pg, pmg, pl, pml = p_u, p_mu, p_up, p_mup
    else:
        pg, pmg, pl, pml = p_up, p_mup, p_u, p_mu

    def w_of(p_plus: Scaled, p_minus: Scaled, sign: int) -> Scaled:
        phase = _exp_i_pi_nu_scaled(nu, sign)
        return p_plus.mul(phase).add(p_minus.times(-1.0)).div(sin_pi).times(math.pi / 2.0)

    total = w_of(pl, pml, +1).mul(w_of(pg, pmg, -1)).times(-1j * 2.0 * k / math.pi).to_complex()

    # diagnostic brackets (may overflow for large conical degree)
    eps_sign = 0.0 if x == xp else math.copysign(1.0, x - xp)
    jump = q_u.mul(p_up).add(q_up.mul(p_u).times(-1.0)).times(k * eps_sign).to_complex()
    smooth = (
        q_u.mul(q_up).times(2.0 / math.pi).add(p_u.mul(p_up).times(math.pi / 2.0)).times(-k).to_complex()
    )
    return SpectralDensity(
        omega=float(omega),
        nu=deg,
        x=x,
        xp=xp,
        re_part=total.real,
        im_part=total.imag,
        jump_bracket=jump,
        smooth_bracket=smooth,
        err_bound=err,
    )


def closed_form_zero_mode(x: float, xp: float, p: PhysicalParams, d: DerivedScales) -> float:
    """Equal-time zero-mode Green function in closed form.

    (g R_c / (beta (2 hbar v)^2)) * ln[ ((1 + |dx|/2R_c)^2 - s^2)
                                       / ((1 - |dx|/2R_c)^2 - s^2) ],
    with s = (x + x')/(2 R_c).  Algebraically identical to beta^{-1} times the
    real spectral density at omega = 0.
    """
    half_d = abs(x - xp) / (2.0 * d.R_c)
    half_s = (x + xp) / (2.0 * d.R_c)
    num = (1.0 + half_d) ** 2 - half_s**2
    den = (1.0 - half_d) ** 2 - half_s**2
    if num <= 0.0 or den <= 0.0:
        raise DomainError(
            f"zero-mode log argument non-positive (num={num:.6g}, den={den:.6g}); "
            "points too near the condensate boundary"
        )
    hv = p.hbar * d.v
    return p.g * d.R_c / (p.beta * (2.0 * hv) ** 2) * math.log(num / den)


def matsubara_assemble(
    x: float,
    tau: float,
    xp: float,
    taup: float,
    p: PhysicalParams,
    d: DerivedScales,
    l_max: int,
    tol: float = 1e-13,
) -> GreenValue:
    """Assemble G(x,tau;x',tau') = (1/beta) sum_l e^{i omega dtau} G_omega.

    The zero mode is kept (finite for the trap).  The physical real spectral
    densities are even in omega, so folding +-l gives an exactly real value:
    (1/beta) [G_0 + 2 sum_{l>=1} cos(omega_l dtau) Re G_omega].  Truncation is
    estimated from the large-omega envelope exp(-|omega||dx|/hbar v)/|omega|.
    """
    if l_max < 0:
        raise DomainError("l_max must be >= 0")
    dx = x - xp
    dtau = tau - taup
    if dx == 0.0 and (dtau % p.beta) == 0.0:
        raise AccuracyError(
            "matsubara_assemble at coincident points: frequency series is log-divergent",
            achieved=math.inf,
        )
    total = spectral_density(0.0, x, xp, p, d, tol).re_part
    err = 0.0
    for l in range(1, l_max + 1):
        omega = 2.0 * math.pi * l / p.beta
        sd = spectral_density(omega, x, xp, p, d, tol)
        total += 2.0 * math.cos(omega * dtau) * sd.re_part
        err += 2.0 * sd.err_bound

    hv = p.hbar * d.v
    s_half = 0.5 * (x + xp)
    envelope_amp = p.Lambda / (2.0 * hv * rho_tf(s_half, p, d))
    omega_next = 2.0 * math.pi * (l_max + 1) / p.beta
    first_omitted = (2.0 / p.beta) * envelope_amp * math.exp(-omega_next * abs(dx) / hv) / omega_next
    decay = math.exp(-2.0 * math.pi * abs(dx) / (hv * p.beta))
    warning = None
    if decay < 1.0:
        trunc = first_omitted / (1.0 - decay)
    else:
        trunc = first_omitted
        warning = "dx = 0: oscillatory frequency tail, truncation estimate is first omitted term"
    return GreenValue(
        value=complex(total / p.beta),
        method="trapped-assembled",
        trunc_err=trunc + err,
        warning=warning,
        meta={"l_max": l_max, "S": s_half},
    )


# ----------------------------------------------------------------------------
# low-temperature Legendre series
# ----------------------------------------------------------------------------


def _u_star(dx: float, dtau: float, p: PhysicalParams, d: DerivedScales) -> float:
    return abs(complex(abs(dx), p.hbar * d.v * dtau)) / d.R_c


def _gate_lowT(n0: int, u_star: float, ctl: LowTControl):
    failures = []
    if n0 < 5:
        failures.append(f"n0 >= 5 violated (n0 = {n0})")
    if n0 * u_star >= 1.0:
        failures.append(f"n0 * u_* < 1 violated (n0 * u_* = {n0 * u_star:.4g})")
    if ctl.u_star is not None and u_star > ctl.u_star:
        failures.append(f"u_* <= {ctl.u_star} violated (u_* = {u_star:.4g})")
    if failures:
        raise RegimeError("low-temperature validity gate failed: " + "; ".join(failures))


def _geometric_tail(t: float, theta: float, theta_p: float, variant: str) -> float:
    """sum_{n>=1} t^n Pbar_n(cos theta) Pbar_n(cos theta') in closed form.

    Pbar products reduce to cos(n dtheta) and sin(n (theta+theta')) series
    (phases shifted by (theta +- theta')/2 for the 'half' variant), each
    summable through ln(1 - t e^{i phi}).
    """
    d_th = theta - theta_p
    s_th = theta + theta_p
    amp = 1.0 / (math.pi * math.sqrt(math.sin(theta) * math.sin(theta_p)))
    log_d = cmath.log(1.0 - t * cmath.exp(1j * d_th))
    log_s = cmath.log(1.0 - t * cmath.exp(1j * s_th))
    if variant == "integer":
        cos_sum = -log_d.real
        sin_sum = -log_s.imag
    else:
        cos_sum = (-cmath.exp(1j * d_th / 2.0) * log_d).real
        sin_sum = (-cmath.exp(1j * s_th / 2.0) * log_s).imag
    return amp * (cos_sum + sin_sum)


def lowT_legendre_series(
    x: float,
    tau: float,
    xp: float,
    taup: float,
    p: PhysicalParams,
    d: DerivedScales,
    ctl: LowTControl = LowTControl(),
    boundary_eps: float = BOUNDARY_EPS,
) -> GreenValue:
    """Frequency-summed Green function for beta E_n >> 1 (low temperature).

    Value = Bernoulli bracket (the n = 0 frequency line) + exact-minus-
    asymptotic corrections for n <= n0 + closed geometric tail with the
    asymptotic polynomial form; the (omega, n) = (0, 0) term is omitted as
    the series regularization.  Requires tau != tau' for convergence.
    """
    u = _clamped_u(x, d, boundary_eps)
    up = _clamped_u(xp, d, boundary_eps)
    dtau = abs(tau - taup)
    if dtau == 0.0:
        raise DomainError("lowT_legendre_series requires tau != tau'")
    if dtau > p.beta:
        raise DomainError(f"|tau - tau'| = {dtau} exceeds beta = {p.beta}")

    beta_e1 = p.beta * math.sqrt(2.0) / d.alpha
    if beta_e1 < 10.0:
        raise RegimeError(
            f"low-temperature series requires beta E_1 >> 1; got beta E_1 = {beta_e1:.3g} "
            f"(regime_ratio = {d.regime_ratio:.3g})"
        )
    u_star = _u_star(x - xp, dtau, p, d)
    _gate_lowT(ctl.n0, u_star, ctl)

    warning = None
    if dtau < ctl.min_dtau * p.beta:
        warning = (
            f"dtau/beta = {dtau / p.beta:.3g} below min_dtau = {ctl.min_dtau:g}; "
            "omitted-term estimate degrades near coincident times"
        )

    hv = p.hbar * d.v
    theta = math.acos(u)
    theta_p = math.acos(up)
    t = math.exp(-dtau / d.alpha)

    tau_hat = dtau / p.beta
    bracket = -(p.g * p.beta / (4.0 * d.R_c)) * ((0.5 - tau_hat) ** 2 - 1.0 / 12.0)

    pn_u = p_poly_table(ctl.n0, u)
    pn_up = p_poly_table(ctl.n0, up)
    corr = 0.0
    for n in range(1, ctl.n0 + 1):
        root = math.sqrt(n * (n + 1.0))
        w_n = (n + 0.5) / root
        exact = w_n * pn_u[n] * pn_up[n] * math.exp(-root * dtau / d.alpha)
        approx = (
            p_poly_asymptotic(n, theta, ctl.variant)
            * p_poly_asymptotic(n, theta_p, ctl.variant)
            * math.exp(-(n + 0.5) * dtau / d.alpha)
        )
        corr += exact - approx
    corr *= -p.g / (2.0 * hv)

    tail = -(p.g / (2.0 * hv)) * math.exp(-dtau / (2.0 * d.alpha)) * _geometric_tail(t, theta, theta_p, ctl.variant)

    return GreenValue(
        value=complex(bracket + corr + tail),
        method="trapped-lowT-series",
        warning=warning,
        meta={"n0": ctl.n0, "u_star": u_star, "t": t, "variant": ctl.variant},
    )


def lowT_n0_drift(
    x: float,
    tau: float,
    xp: float,
    taup: float,
    p: PhysicalParams,
    d: DerivedScales,
    ctl: LowTControl = LowTControl(),
):
    """Run the series at n0 and 2 n0; report both values and relative drift.

    The validity gate only brackets n0, so results are reported together with
    their sensitivity to doubling it.
    """
    g1 = lowT_legendre_series(x, tau, xp, taup, p, d, ctl)
    g2 = lowT_legendre_series(x, tau, xp, taup, p, d, replace(ctl, n0=2 * ctl.n0))
    v1, v2 = g1.value.real, g2.value.real
    drift = abs(v2 - v1) / max(abs(v1), abs(v2), 1e-300)
    return g1, g2, drift


# ----------------------------------------------------------------------------
# quasi-homogeneous asymptotics
# ----------------------------------------------------------------------------


def _window_quasihom(x: float, xp: float, p: PhysicalParams, d: DerivedScales, factor: float):
    """Quasi-homogeneity gate: the background density must be essentially
    constant across the pair, and the separation small against the trap.

    Expressed through the density variation (rather than |dx|/S directly) so
    that center-symmetric pairs, where S = 0 but the background is flattest,
    pass as they should.
    """
    dx = x - xp
    s_half = 0.5 * (x + xp)
    rho_s = rho_tf(s_half, p, d)
    if rho_s <= 0.0:
        raise RegimeError(f"quasi-homogeneous window failed: midpoint S = {s_half:.6g} outside the condensate")
    checks = {
        "|dx| << R_c": abs(dx) / d.R_c,
        "TF density variation across pair": abs(rho_tf(x, p, d) - rho_tf(xp, p, d)) / rho_s,
    }
    failed = [f"{name} violated (ratio {ratio:.3g} > {factor:g})" for name, ratio in checks.items() if ratio > factor]
    if failed:
        raise RegimeError("quasi-homogeneous window failed: " + "; ".join(failed))
    return max(ratio / factor for ratio in checks.values())


def asympt_spectral_highT(
    omega: float,
    x: float,
    xp: float,
    p: PhysicalParams,
    d: DerivedScales,
    S: float | None = None,
    min_alpha_omega: float = 5.0,
    window_factor: float = 0.5,
) -> float:
    """Large-|omega| spectral density in the quasi-homogeneous window.

    -(Lambda / (2 hbar v rho_TF(S))) * exp(-|omega||dx|/(hbar v)) / |omega|.
    """
    if d.alpha * abs(omega) < min_alpha_omega:
        raise RegimeError(
            f"alpha|omega| >= {min_alpha_omega:g} violated (alpha|omega| = {d.alpha * abs(omega):.3g})"
        )
    s_half = 0.5 * (x + xp) if S is None else S
    _window_quasihom(x, xp, p, d, window_factor)
    hv = p.hbar * d.v
    return -(p.Lambda / (2.0 * hv * rho_tf(s_half, p, d))) * math.exp(-abs(omega) * abs(x - xp) / hv) / abs(omega)


def asympt_green_highT(
    x: float,
    tau: float,
    xp: float,
    taup: float,
    p: PhysicalParams,
    d: DerivedScales,
    r_lo: float = 0.1,
    window_factor: float = 0.5,
) -> GreenValue:
    """High-temperature assembled Green function, up to an additive constant.

    (Lambda / (2 pi hbar v rho_TF(S))) * ln{2 |sinh(pi/(hbar beta v)
    (|dx| + i hbar v dtau))|}; the trap enters only through rho_TF at the
    midpoint S.
    """
    if d.regime_ratio >= r_lo:
        raise RegimeError(f"beta/alpha < {r_lo:g} violated (beta/alpha = {d.regime_ratio:.3g})")
    dx = x - xp
    dtau = tau - taup
    s_half = 0.5 * (x + xp)
    slack = _window_quasihom(x, xp, p, d, window_factor)
    hv = p.hbar * d.v
    z = (math.pi / (p.hbar * p.beta * d.v)) * complex(abs(dx), hv * dtau)
    log_term = log_2sinh_abs(z)
    if math.isinf(log_term):
        return GreenValue(
            value=complex(-math.inf),
            method="trapped-asympt-highT",
            divergent=True,
            const_free=True,
            warning="log divergence at coincident arguments",
        )
    value = p.Lambda / (2.0 * math.pi * hv * rho_tf(s_half, p, d)) * log_term
    return GreenValue(
        value=complex(value),
        method="trapped-asympt-highT",
        const_free=True,
        meta={"window_slack": slack, "S": s_half},
    )


def asympt_green_lowT(
    x: float,
    tau: float,
    xp: float,
    taup: float,
    p: PhysicalParams,
    d: DerivedScales,
    ctl: LowTControl = LowTControl(),
    r_hi: float = 10.0,
) -> GreenValue:
    """Low-temperature leading logarithm, up to an additive constant.

    -(Lambda / (2 pi hbar v rho_TF(S))) * ln(R_c / |dx + i hbar v dtau|),
    valid for u_* << 1 under the crossover gate n0 < 1/u_*.
    """
    if d.regime_ratio <= r_hi:
        raise RegimeError(f"beta/alpha > {r_hi:g} violated (beta/alpha = {d.regime_ratio:.3g})")
    dx = x - xp
    dtau = abs(tau - taup)
    u_star = _u_star(dx, dtau, p, d)
    if u_star == 0.0:
        return GreenValue(
            value=complex(-math.inf),
            method="trapped-asympt-lowT",
            divergent=True,
            const_free=True,
            warning="log divergence at coincident arguments",
        )
    _gate_lowT(ctl.n0, u_star, ctl)
    s_half = 0.5 * (x + xp)
    hv = p.hbar * d.v
    value = -(p.Lambda / (2.0 * math.pi * hv * rho_tf(s_half, p, d))) * math.log(1.0 / u_star)
    return GreenValue(
        value=complex(value),
        method="trapped-asympt-lowT",
        const_free=True,
        meta={"u_star": u_star, "S": s_half, "n0": ctl.n0},
    )
