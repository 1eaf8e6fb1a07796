"""Periodic-case Melnikov function, three independent ways.

The Melnikov function of the sin-forced model is

    M(u, tau) = 4 * int_R beta(u+s) sin(tau + s/eps) ds
              = Im[ I * e^{i(tau - u/eps)} ],      I = 4 * int_R beta(w) e^{iw/eps} dw.

The complex coefficient I is computed by

* ``melnikov_residue``    -- residue sums at the integrand poles (exact up to
  an e^{-pi/eps} contour correction),
* ``melnikov_quadrature`` -- numerical integration along a shifted contour
  (or the real line at raised precision),
* ``melnikov_asymptotic`` -- the closed leading-order formula of the active
  parameter regime.

Phase convention: M = A*sin(tau - u/eps + theta) with A = |I| >= 0 and
theta = arg I; the alternative offset phi = -theta (mod 2*pi) is exposed as
``MelnikovResult.phi``.  mu never enters here: M is the mu-free kernel and
d0 = mu*eps^eta*M/2 is assembled by the lab module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
import mpmath
from mpmath import mp, mpc, mpf

from .model import ALTERNATIVE, STANDARD, ModelSpec, beta, beta_denominator
from .mpnum import (
    DEFAULT_PREC,
    as_mpc,
    as_mpf,
    bits_for_rate,
    default_tol,
    quad_finite,
    quad_semi_infinite,
    residue_double_pole,
)
from .singular import SingularityData, solve_singularities

WIDE_STRIP = "WideStrip"
TRANSITION = "Transition"
INTERMEDIATE = "Intermediate"
NARROW_EXP = "NarrowExp"
NARROW_POLY = "NarrowPoly"

TRANSITION_BAND = 0.15  # half-width of the |ln alpha/ln eps - threshold| band
NARROW_CUT = 0.5  # ln(1-alpha)/ln(eps) above which (1-alpha) is treated as eps-scaling


@dataclass
class Regime:
    tag: str
    sigma: float  # ln(alpha)/ln(eps)
    tau_r: float  # ln(1-alpha)/ln(eps)
    C: float | None = None
    r: float | None = None
    nu: float | None = None
    boundary: bool = False


@dataclass
class MelnikovResult:
    amplitude: mpf
    phase: mpf  # theta in M = A sin(tau - u/eps + theta), in [0, 2*pi)
    rate: mpf  # a in e^{-a/eps}; 0 in non-exponential regimes
    method: str  # Residue | Quadrature | Asymptotic
    error_estimate: mpf
    coefficient: mpc  # I = amplitude * e^{i*phase}
    epsilon: mpf
    precision: int

    @property
    def phi(self):
        """Phase offset in the sin(tau - phi - u/eps) convention."""
        return (-self.phase) % (2 * mpmath.pi)

    def evaluate(self, u, tau):
        """M(u, tau) = Im[I e^{i(tau - u/eps)}]."""
        with mp.workprec(self.precision):
            return (self.coefficient * mpmath.exp(1j * (as_mpf(tau) - as_mpf(u) / self.epsilon))).imag

    def potential(self, u, tau):
        """L(u, tau) = eps * Re[I e^{i(tau - u/eps)}]; satisfies dL/du = M."""
        with mp.workprec(self.precision):
            return self.epsilon * (self.coefficient * mpmath.exp(1j * (as_mpf(tau) - as_mpf(u) / self.epsilon))).real


def classify_regime(epsilon, alpha, case: str = "periodic", scaling: dict | None = None) -> Regime:
    """Regime of the (eps, alpha) pair.

    The exponent sigma = ln(alpha)/ln(eps) measures alpha against powers of
    eps: the wide-strip clause needs sigma above a threshold (2 for periodic
    forcing, 1 for quasiperiodic), the transition sits in a band around it,
    below it the splitting rate comes from Im rho_-.  tau_r = ln(1-alpha)/
    ln(eps) measures the narrow-strip scaling alpha = 1 - C*eps^r: tau_r >= 2
    is the polynomial regime, materially positive tau_r the narrow
    exponential one.  A known scaling law {"C":..., "r":...} or {"nu":...}
    overrides the point-wise inference (a single pair cannot distinguish
    `alpha fixed` from `alpha = 1 - eps^r`).
    """
    if case not in ("periodic", "quasiperiodic"):
        raise ValueError("case must be 'periodic' or 'quasiperiodic'")
    threshold = 2.0 if case == "periodic" else 1.0
    eps = float(epsilon)
    a = float(alpha)
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    sigma = float("inf") if a == 0 else math_log_ratio(a, eps)
    tau_r = math_log_ratio(1.0 - a, eps)
    if scaling and scaling.get("r") is not None:
        r = float(scaling["r"])
        C = float(scaling.get("C", (1.0 - a) / eps ** r))
        tag = NARROW_POLY if r >= 2 else NARROW_EXP
        return Regime(tag, sigma, tau_r, C=C, r=r, boundary=abs(r - 2) < 1e-9)
    if scaling and scaling.get("nu") is not None:
        nu = float(scaling["nu"])
        C = float(scaling.get("C", a / eps ** nu))
        if nu > threshold:
            return Regime(WIDE_STRIP, sigma, tau_r, C=C, nu=nu)
        if abs(nu - threshold) < 1e-9:
            return Regime(TRANSITION, sigma, tau_r, C=C, nu=nu, boundary=True)
        return Regime(INTERMEDIATE, sigma, tau_r, C=C, nu=nu)
    boundary = abs(sigma - threshold) <= TRANSITION_BAND or abs(tau_r - 2.0) <= 0.1
    if abs(sigma - threshold) <= TRANSITION_BAND:
        return Regime(TRANSITION, sigma, tau_r, nu=threshold, boundary=True)
    if sigma > threshold:
        return Regime(WIDE_STRIP, sigma, tau_r, nu=sigma, boundary=boundary)
    if tau_r >= 2.0:
        return Regime(NARROW_POLY, sigma, tau_r, C=(1.0 - a) / eps ** tau_r, r=tau_r, boundary=boundary)
    if tau_r >= NARROW_CUT:
        return Regime(NARROW_EXP, sigma, tau_r, C=(1.0 - a) / eps ** tau_r, r=tau_r, boundary=boundary)
    return Regime(INTERMEDIATE, sigma, tau_r, nu=sigma, boundary=boundary)


def math_log_ratio(x: float, eps: float) -> float:
    import math

    if x <= 0:
        return float("inf")
    return math.log(x) / math.log(eps)


def _pole_residue(m, rho, alpha, variant, prec):
    """Residue of beta(w) e^{i m w} at the double pole rho."""
    a = as_mpf(alpha)

    def N(w):
        return mpmath.sinh(w) * mpmath.cosh(w)

    def D(w):
        return beta_denominator(w, a, variant)

    return residue_double_pole(N, D, rho, m, prec=prec).value


def harmonic_integral(m, alpha, variant: str = STANDARD, prec: int = DEFAULT_PREC,
                      include_rho_plus: bool = True, sing: SingularityData | None = None,
                      poles: str = None):
    """J_m = int_R beta(w) e^{i m w} dw by residues, for real m.

    beta is 2*pi*i-periodic and decays like e^{-2|Re w|} on horizontal lines,
    so shifting the contour through one full period gives the exact identity

        J_m (1 - e^{-2 pi m}) = 2 pi i * sum of residues in 0 <= Im w < 2 pi,

    i.e. the poles rho_-, rho_+ and their conjugates lifted by 2*pi*i.
    ``poles`` selects the summation:

        "all"          the exact four-pole formula (default),
        "minus_family" rho_- and its lifted conjugate (the skipped rho_+
                       pair is added to the error estimate),
        "minus_only"   the single rho_- residue with no periodic factor --
                       this is exactly the closed-form content
                       (m*delta2 + delta1) e^{i m rho_-}/4.

    J_{-m} = conj(J_m) by reality; J_0 is the closed form
    int beta = pi*alpha/(2*(1-alpha^2)^{3/2}) (standard variant; quadrature
    otherwise).  Returns (value, error_estimate).
    """
    if poles is None:
        poles = "all" if include_rho_plus else "minus_family"
    if poles not in ("all", "minus_family", "minus_only"):
        raise ValueError(f"unknown poles selection {poles!r}")
    with mp.workprec(prec + 16):
        m = as_mpf(m)
        a = as_mpf(alpha)
        if m < 0:
            val, err = harmonic_integral(-m, alpha, variant, prec, sing=sing, poles=poles)
            return mpmath.conj(val), err
        if m == 0:
            if variant == STANDARD:
                return mp.pi * a / (2 * (1 - a ** 2) ** mpf(1.5)), mpf(2) ** (-prec + 8)
            res = quad_semi_infinite(lambda s: beta(s, a, variant, prec), "+inf",
                                     decay_rate=2, prec=prec)
            res2 = quad_semi_infinite(lambda s: beta(s, a, variant, prec), "-inf",
                                      decay_rate=2, prec=prec)
            return res.value + res2.value, res.error_estimate + res2.error_estimate
        geom = 1 / (1 - mpmath.exp(-2 * mp.pi * m)) if poles != "minus_only" else mpf(1)
        if a == 0:
            # both variants reduce to sinh/cosh^3 at alpha = 0: triple poles
            # at i*pi/2 and 3*i*pi/2 sum to m^2/2 (e^{-m pi/2} + e^{-3 m pi/2})
            val = 1j * mp.pi * m ** 2 * mpmath.exp(-m * mp.pi / 2)
            if poles != "minus_only":
                val *= (1 + mpmath.exp(-m * mp.pi)) * geom
            return val, abs(val) * mpf(2) ** (-prec + 8)
        if sing is None or sing.variant != variant:
            sing = solve_singularities(a, variant, prec=prec + 16)
        rm, rp = sing.rho_minus.value, sing.rho_plus.value
        two_pi_i = mpc(0, 2 * mp.pi)
        total = _pole_residue(m, rm, a, variant, prec + 16)
        err = mpf(0)
        if poles != "minus_only":
            total += _pole_residue(m, mpmath.conj(rm) + two_pi_i, a, variant, prec + 16)
        if poles == "all":
            total += _pole_residue(m, rp, a, variant, prec + 16)
            total += _pole_residue(m, mpmath.conj(rp) + two_pi_i, a, variant, prec + 16)
        elif poles == "minus_family":
            err += 4 * mp.pi * abs(_pole_residue(m, rp, a, variant, prec)) * geom
        else:
            err += 4 * mp.pi * abs(_pole_residue(m, rp, a, variant, prec))
        val = 2j * mp.pi * total * geom
        err += abs(val) * mpf(2) ** (-(prec // 3))
        return val, err


def melnikov_residue(u, tau, spec: ModelSpec, include_rho_plus: bool = True,
                     prec: int = DEFAULT_PREC) -> MelnikovResult:
    """Melnikov coefficient from the double-pole residues.

    I = 8*pi*i*(Res_{rho_-} + Res_{rho_+}) of beta(w)e^{iw/eps}; the rho_+
    residue is mandatory in the transition regime, where both poles
    contribute at the same exponential order, and is always included for the
    alternative variant (its poles share one height).
    """
    if spec.forcing.kind != "sin":
        raise ValueError("melnikov_residue handles the periodic sin forcing")
    regime = classify_regime(spec.epsilon, spec.alpha)
    if regime.tag in (TRANSITION, WIDE_STRIP) and not include_rho_plus and spec.variant == STANDARD:
        warnings.warn("rho_+ residue is not negligible near alpha ~ eps^2; forcing it on", stacklevel=2)
        include_rho_plus = True
    if spec.variant == ALTERNATIVE:
        include_rho_plus = True
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        sing = solve_singularities(spec.alpha, spec.variant, prec=prec + 16) if spec.alpha > 0 else None
        J, err = harmonic_integral(1 / eps, spec.alpha, spec.variant, prec,
                                   include_rho_plus=include_rho_plus, sing=sing)
        I = 4 * J
        rate = _rate_of(spec, sing)
        return _result_from_coefficient(I, 4 * err, "Residue", eps, rate, prec)


def _rate_of(spec: ModelSpec, sing: SingularityData | None):
    if spec.variant == ALTERNATIVE or spec.alpha == 0:
        return mp.pi / 2
    return sing.rho_minus.value.imag


def _result_from_coefficient(I, err, method, eps, rate, prec) -> MelnikovResult:
    amp = abs(I)
    theta = mpmath.arg(I) % (2 * mp.pi) if amp > 0 else mpf(0)
    return MelnikovResult(
        amplitude=+amp,
        phase=+theta,
        rate=+as_mpf(rate),
        method=method,
        error_estimate=+as_mpf(err),
        coefficient=+as_mpc(I),
        epsilon=+eps,
        precision=prec,
    )


def melnikov_quadrature(u, tau, spec: ModelSpec, contour_shift=None,
                        prec: int = None, kappa: float = 2.0) -> MelnikovResult:
    """Melnikov coefficient by direct integration along Im w = contour_shift.

    The default contour Im w = Im rho_- - kappa*eps already carries the
    exponentially small factor, so no digits cancel; contour_shift = 0 means
    real-line evaluation with the precision raised by the cancellation
    budget Im rho_-/(eps ln 2).  The integrand decays like e^{-2|Re w|} on
    every admissible line (both variants).
    """
    if spec.forcing.kind != "sin":
        raise ValueError("melnikov_quadrature handles the periodic sin forcing")
    eps0 = float(spec.epsilon)
    sing = solve_singularities(spec.alpha, spec.variant, prec=DEFAULT_PREC) if spec.alpha > 0 else None
    im_pole = float(sing.rho_minus.value.imag) if sing is not None else float(mpmath.pi) / 2
    if contour_shift is None:
        contour_shift = max(0.0, im_pole - kappa * eps0)
    shift = float(contour_shift)
    if shift < 0 or (shift > 0 and shift >= im_pole - 0.5 * kappa * eps0):
        raise ValueError("contour_shift must lie in [0, Im rho_- - kappa*eps)")
    rate_over_eps = im_pole / eps0
    if prec is None:
        prec = bits_for_rate(rate_over_eps) if shift == 0 else max(DEFAULT_PREC, bits_for_rate(rate_over_eps) // 2)
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        a = as_mpf(spec.alpha)
        sig = as_mpf(shift)
        damp = mpmath.exp(-sig / eps)  # |e^{iw/eps}| on the line, folded out

        def g(x):
            return beta(mpc(x, sig), a, spec.variant, prec=prec + 16) * mpmath.expj(x / eps)

        tol = default_tol(prec)
        panel = mpf('0.9') * mp.pi * eps
        x0 = mpf(3)
        mid = quad_finite(g, -x0, x0, tol=tol, prec=prec, max_panel=panel)
        mag = 8 / (1 - a) ** 2  # conservative |beta| ceiling off the poles
        right = quad_semi_infinite(g, "+inf", tol=tol, decay_rate=2, s0=x0,
                                   mag_hint=mag, prec=prec, max_panel=panel)
        left = quad_semi_infinite(g, "-inf", tol=tol, decay_rate=2, s0=-x0,
                                  mag_hint=mag, prec=prec, max_panel=panel)
        J = damp * (mid.value + right.value + left.value)
        err = damp * (mid.error_estimate + right.error_estimate + left.error_estimate)
        I = 4 * J
        rate = _rate_of(spec, sing)
        return _result_from_coefficient(I, 4 * err, "Quadrature", eps, rate, prec)


def melnikov_asymptotic(u, tau, spec: ModelSpec, regime: Regime | None = None,
                        prec: int = DEFAULT_PREC) -> MelnikovResult:
    """Leading-order closed formula of the active regime.

    WideStrip      (4*pi/eps^2) e^{-pi/(2 eps)} cos(tau - u/eps)
    Transition     two-pole residue sum, reported through lambda(alpha_*)
                   and phi_* (no closed constant exists)
    Intermediate   |delta2/eps + delta1| e^{-Im rho_-/eps} sin(tau - phi - u/eps)
    NarrowExp      pi/(sqrt2 C eps^{1+r}) e^{-Im rho_-/eps} sin(...)
    NarrowPoly     r = 2: pi e^{-sqrt C}/(sqrt2 C^{3/2} eps^3) sin(...)
                   r > 2: pi/(sqrt2 C^{3/2} eps^{3r/2}) sin(...)

    Phases that the printed formulas leave unspecified are taken from the
    residue computation.
    """
    if regime is None:
        regime = classify_regime(spec.epsilon, spec.alpha)
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        if spec.variant == ALTERNATIVE:
            raise ValueError("printed asymptotics cover the standard variant; "
                             "use melnikov_residue for the alternative model")
        if regime.tag == WIDE_STRIP:
            A = 4 * mp.pi / eps ** 2 * mpmath.exp(-mp.pi / (2 * eps))
            I = mpc(0, 1) * A  # cos(tau - u/eps) == sin(tau - u/eps + pi/2)
            rel = abs(as_mpf(spec.alpha)) / eps ** 2 + mpmath.exp(-mp.pi / (2 * eps))
            return _result_from_coefficient(I, A * rel, "Asymptotic", eps, mp.pi / 2, prec)
        if regime.tag == TRANSITION:
            res = melnikov_residue(u, tau, spec, include_rho_plus=True, prec=prec)
            return MelnikovResult(res.amplitude, res.phase, res.rate, "Asymptotic",
                                  res.error_estimate, res.coefficient, res.epsilon, prec)
        sing = solve_singularities(spec.alpha, STANDARD, prec=prec + 16)
        im_rho = sing.rho_minus.value.imag
        phase = melnikov_residue(u, tau, spec, include_rho_plus=False, prec=prec).phase
        if regime.tag == INTERMEDIATE:
            A = abs(sing.delta2.value / eps + sing.delta1.value) * mpmath.exp(-im_rho / eps)
            rel = eps + mpmath.sqrt(as_mpf(spec.alpha))
        else:
            C = as_mpf(regime.C)
            r = as_mpf(regime.r)
            if regime.tag == NARROW_EXP:
                A = mp.pi / (mpmath.sqrt(2) * C * eps ** (1 + r)) * mpmath.exp(-im_rho / eps)
                rel = eps ** (r / 2) + eps ** (1 - r / 2)
            elif regime.tag == NARROW_POLY and abs(float(r) - 2.0) < 1e-9:
                A = mp.pi * mpmath.exp(-mpmath.sqrt(C)) / (mpmath.sqrt(2) * C ** mpf(1.5) * eps ** 3)
                rel = eps
            elif regime.tag == NARROW_POLY:
                A = mp.pi / (mpmath.sqrt(2) * C ** mpf(1.5) * eps ** (3 * r / 2))
                rel = eps ** (r / 2 - 1)
            else:
                raise ValueError(f"regime mismatch: {regime.tag}")
        rate = mpf(0) if regime.tag == NARROW_POLY else im_rho
        I = A * mpmath.expj(phase)
        return _result_from_coefficient(I, A * rel, "Asymptotic", eps, rate, prec)


def transition_constants(spec: ModelSpec, alpha_star: float = None, prec: int = DEFAULT_PREC):
    """(lambda(alpha_*), phi_*) of the transition regime alpha ~ alpha_* eps^2.

    Defined by the computed two-pole residue sum normalized by
    eps^{-2} e^{-pi/(2 eps)}; the printed formulas leave both unspecified.
    """
    res = melnikov_residue(0, 0, spec, include_rho_plus=True, prec=prec)
    with mp.workprec(prec):
        eps = as_mpf(spec.epsilon)
        lam = res.amplitude * eps ** 2 * mpmath.exp(mp.pi / (2 * eps))
        return +lam, +res.phi


def half_melnikov(u, tau, spec: ModelSpec, side: str, prec: int = None):
    """Half Melnikov functions (past/future part of the integral).

        unstable: -4 * int_{-inf}^0 beta(u+s) sin(tau + s/eps) ds
        stable:   +4 * int_0^{+inf}  (same integrand) ds

    so that M = M^s - M^u.  Each half is O(eps) on its own; the working
    precision is raised by the cancellation budget so the difference keeps
    the exponentially small M to full accuracy.
    """
    if side not in ("unstable", "stable"):
        raise ValueError("side must be 'unstable' or 'stable'")
    if spec.forcing.kind != "sin":
        raise ValueError("half_melnikov handles the periodic sin forcing")
    eps0 = float(spec.epsilon)
    if spec.alpha > 0:
        sing = solve_singularities(spec.alpha, spec.variant, prec=DEFAULT_PREC)
        rate_over_eps = float(sing.rho_minus.value.imag) / eps0
    else:
        rate_over_eps = float(mpmath.pi) / 2 / eps0
    if prec is None:
        prec = bits_for_rate(rate_over_eps)
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        a = as_mpf(spec.alpha)
        ur = as_mpf(u)
        taur = as_mpf(tau)

        def g(s):
            return beta(ur + s, a, spec.variant, prec=prec + 16) * mpmath.sin(taur + s / eps)

        mag = 8 / (1 - a) ** 2 * mpmath.exp(2 * abs(ur))
        direction = "-inf" if side == "unstable" else "+inf"
        res = quad_semi_infinite(g, direction, decay_rate=2, mag_hint=mag,
                                 prec=prec, max_panel=mp.pi * eps / 2)
        sign = -4 if side == "unstable" else 4
        return sign * res.value.real


def melnikov_potential(u, tau, spec: ModelSpec, prec: int = DEFAULT_PREC):
    """Melnikov potential L with dL/du = M, reconstructed in closed form.

    With M = Im[I e^{i(tau-u/eps)}], L = eps*Re[I e^{i(tau-u/eps)}]
    differentiates to M exactly (no quadrature in u involved).
    """
    res = melnikov_residue(u, tau, spec, prec=prec)
    return res.potential(u, tau)
