"""Complex singularities of the Melnikov integrand and residue constants.

For the standard variant the poles closest to the real axis in the upper
half plane are the two solutions of sinh u = alpha + i*sqrt(1-alpha^2) with
0 < Im rho_- < pi/2 < Im rho_+ < pi.  Im rho_- sets the exponential rate
e^{-Im rho_-/eps} of the splitting.  The alternative variant has both poles
at height pi/2 for every alpha, which is exactly why it serves as a control
experiment.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mp, mpc, mpf

from .model import ALTERNATIVE, STANDARD
from .mpnum import DEFAULT_PREC, PrecisionComplex, PrecisionScalar, arcsinh_branch, as_mpf, find_root


@dataclass
class SingularityData:
    rho_minus: PrecisionComplex
    rho_plus: PrecisionComplex
    strip_width: PrecisionScalar
    delta1: PrecisionComplex | None
    delta2: PrecisionComplex | None
    variant: str
    alpha: object
    precision: int

    @property
    def im_rho_minus(self):
        return self.rho_minus.value.imag


def strip_width(alpha, prec: int = DEFAULT_PREC) -> PrecisionScalar:
    """Half-width ln((1 + sqrt(1-alpha^2))/alpha) of the analyticity strip."""
    with mp.workprec(prec + 8):
        a = as_mpf(alpha)
        if a <= 0:
            raise ValueError("alpha must be positive (width diverges at alpha = 0)")
        if a > 1:
            raise ValueError("alpha must be <= 1")
        w = mpmath.log((1 + mpmath.sqrt(1 - a ** 2)) / a)
    return PrecisionScalar(w, prec)


def solve_singularities(alpha, variant: str = STANDARD, prec: int = DEFAULT_PREC) -> SingularityData:
    """Locate rho_-, rho_+ and compute delta_1, delta_2 (standard variant).

    standard: rho_- solves sinh u = alpha + i*sqrt(1-alpha^2) via the
    principal arcsinh branch, then a Newton refinement; rho_+ = i*pi - rho_-
    exactly (identity sinh(i*pi - z) = sinh z), which avoids a second
    branch decision.

    alternative: rho_± = i*pi/2 ± arcsinh(sqrt(2*alpha/(1-alpha))), both at
    height pi/2.
    """
    with mp.workprec(prec + 16):
        a = as_mpf(alpha)
        if not (0 < a < 1):
            raise ValueError("alpha must lie in (0, 1)")
        if variant == STANDARD:
            target = a + 1j * mpmath.sqrt(1 - a ** 2)
            rm = arcsinh_branch(target, "principal", prec=prec + 16).value
            rm = find_root(lambda u: mpmath.sinh(u) - target, rm, prec=prec + 8).value
            rp = mpc(0, mp.pi) - rm
            d1, d2 = _delta_constants_from_root(a, rm)
        elif variant == ALTERNATIVE:
            off = mpmath.asinh(mpmath.sqrt(2 * a / (1 - a)))
            rm = mpc(-off, mp.pi / 2)
            rp = mpc(off, mp.pi / 2)
            d1 = d2 = None
        else:
            raise ValueError(f"unknown variant {variant!r}")
        width = strip_width(a, prec)
    return SingularityData(
        rho_minus=PrecisionComplex(rm, prec),
        rho_plus=PrecisionComplex(rp, prec),
        strip_width=width,
        delta1=PrecisionComplex(d1, prec) if d1 is not None else None,
        delta2=PrecisionComplex(d2, prec) if d2 is not None else None,
        variant=variant,
        alpha=a,
        precision=prec,
    )


def _delta_constants_from_root(a: mpf, rho_minus: mpc):
    """Closed forms of the residue constants at the solved rho_-.

        delta_1 = 2*pi*(sinh rho_- - i*sqrt(1-alpha^2)) / (1-alpha^2)^(3/2)
        delta_2 = 2*pi*sinh rho_- / ((1-alpha^2)*cosh rho_-)

    cosh rho_- is evaluated at the root directly; the square-root shortcut
    cosh = sqrt(2*alpha*sinh rho_-) has an ambiguous branch and is avoided.
    """
    c2 = 1 - a ** 2
    if c2 < mpf(2) ** (-mp.prec // 2):
        raise ValueError("alpha too close to 1: delta constants diverge at this precision")
    sh = mpmath.sinh(rho_minus)
    ch = mpmath.cosh(rho_minus)
    d1 = 2 * mp.pi * (sh - 1j * mpmath.sqrt(c2)) / c2 ** mpf(1.5)
    d2 = 2 * mp.pi * sh / (c2 * ch)
    return d1, d2


def delta_constants(alpha, prec: int = DEFAULT_PREC):
    """(delta_1, delta_2) for the standard variant."""
    sing = solve_singularities(alpha, STANDARD, prec=prec)
    return sing.delta1, sing.delta2
