"""Quasiperiodic Melnikov machinery for the golden-mean forced pendulum.

With forcing F(theta1, theta2) and frequency vector omega = (1, gamma), the
Melnikov function Fourier coefficient at k is

    M^[k](u) = 4 F^[k] e^{-i (k.omega) u / eps} * J_{k.omega/eps},
    J_m = int_R beta(w) e^{i m w} dw,

so |M^[k]| = |F^[k]| * |(k.omega/eps) delta2 + delta1| * e^{-|k.omega| Im rho_-/eps}
for alpha > 0 (single-pole content).  The leading harmonic is a golden
convergent pair k = ±(F_{m+1}, -F_m): the small divisor k.omega = ±gamma^{-m}
trades the spectral penalty r1|k1|+r2|k2| against the exponential rate, which
produces the sqrt(1/eps) exponent and the 2*ln(gamma)-periodic envelope
c(delta).

The k = (0,0) coefficient (a u- and theta-independent mean, equal to
F^[0]*delta1 for alpha > 0) is excluded from the envelope/supremum machinery,
which concerns the oscillatory part, but is included by
:func:`melnikov_qp_eval` so the series matches the direct integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpc, mpf

from .melnikov_p import classify_regime, harmonic_integral
from .model import ModelSpec, STANDARD, beta, golden_mean
from .mpnum import DEFAULT_PREC, as_mpf, default_tol, quad_semi_infinite
from .singular import SingularityData, solve_singularities


@dataclass
class HarmonicAmplitude:
    k: tuple
    small_divisor: mpf  # k.omega = k1 + gamma*k2
    amplitude: mpf
    phase: mpf
    coefficient: mpc  # M^[k](0)


@dataclass
class EnvelopeData:
    r1: float
    r2: float
    C0: mpf
    delta0: mpf  # ln(eps_star)
    eps_star: mpf
    period: mpf  # 2*ln(gamma)
    precision: int


def golden_convergents(n: int) -> list:
    """First n continued-fraction convergents of gamma: (1,1),(2,1),(3,2),..."""
    if n < 1:
        raise ValueError("n >= 1")
    out = []
    a, b = 1, 1
    for _ in range(n):
        out.append((b, a))
        a, b = b, a + b
    return out


def envelope_data(r1: float, r2: float, prec: int = DEFAULT_PREC) -> EnvelopeData:
    """Envelope constants C0, delta0 = ln(eps*), period 2*ln(gamma)."""
    if not (r1 > 0 and r2 > 0):
        raise ValueError("decay rates must be positive")
    with mp.workprec(prec):
        g = golden_mean(prec)
        C0 = 2 * mpmath.sqrt((g * r1 + r2) / (g + 1 / g))
        eps_star = (g + 1 / g) / (g ** 2 * (r1 * g + r2))
        return EnvelopeData(
            r1=float(r1), r2=float(r2), C0=+C0, delta0=+mpmath.log(eps_star),
            eps_star=+eps_star, period=+2 * mpmath.log(g), precision=prec,
        )


def c_of_delta(delta, envelope: EnvelopeData):
    """The 2*ln(gamma)-periodic envelope c(delta) = C0*cosh((delta^-delta0)/2).

    delta is reduced into [delta0 - ln(gamma), delta0 + ln(gamma)] by
    periodicity; the minimum over a period is exactly C0, at delta = delta0.
    """
    with mp.workprec(envelope.precision):
        d = as_mpf(delta)
        dhat = d - envelope.delta0
        dhat = dhat - mpmath.floor(dhat / envelope.period + mpf(1) / 2) * envelope.period
        return +(envelope.C0 * mpmath.cosh(dhat / 2))


def small_divisor(k, prec: int = DEFAULT_PREC) -> mpf:
    with mp.workprec(prec):
        return +(k[0] + golden_mean(prec) * k[1])


def harmonic_amplitude(k, spec: ModelSpec, singular: SingularityData | None = None,
                       prec: int = DEFAULT_PREC, poles: str = "all") -> HarmonicAmplitude:
    """Amplitude/phase of the k-th Fourier coefficient of the QP Melnikov function.

    Computed from the generic double-pole residues of beta(w) e^{i(k.omega/eps)w};
    ``poles`` as in :func:`harmonic_integral` ("minus_only" reproduces the
    closed delta-form exactly).  k = (0,0) is rejected: the envelope
    machinery assumes the zero-mean (oscillatory) part of the forcing.
    """
    k = (int(k[0]), int(k[1]))
    if k == (0, 0):
        raise ValueError("k = (0,0) is the forcing mean; the harmonic machinery is zero-mean")
    if spec.forcing.kind != "qp":
        raise ValueError("harmonic_amplitude needs a quasiperiodic forcing")
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        kw = small_divisor(k, prec + 16)
        Fk = spec.forcing.fourier(k)
        if singular is None and spec.alpha > 0:
            singular = solve_singularities(spec.alpha, spec.variant, prec=prec + 16)
        J, _ = harmonic_integral(kw / eps, spec.alpha, spec.variant, prec,
                                 sing=singular, poles=poles)
        coeff = 4 * Fk * J
        return HarmonicAmplitude(
            k=k, small_divisor=+kw, amplitude=+abs(coeff),
            phase=+(mpmath.arg(coeff) % (2 * mp.pi)) if coeff != 0 else mpf(0),
            coefficient=+coeff,
        )


def harmonic_amplitude_closed(k, spec: ModelSpec, singular: SingularityData | None = None,
                              prec: int = DEFAULT_PREC) -> mpf:
    """Closed-form amplitude |F^[k]| |(|k.omega|/eps) d2 + d1| e^{-|k.omega| Im rho_-/eps}.

    Reality makes the amplitude even in k, so the small divisor enters
    through its modulus.  This is the rho_- content only; the rho_+ term it
    neglects is exponentially smaller whenever |k.omega| (Im rho_+ -
    Im rho_-) >> eps, which holds for the dominant harmonics as eps -> 0.
    """
    if spec.variant != STANDARD or not spec.alpha > 0:
        raise ValueError("closed form needs the standard variant with alpha > 0")
    with mp.workprec(prec + 16):
        if singular is None:
            singular = solve_singularities(spec.alpha, spec.variant, prec=prec + 16)
        eps = as_mpf(spec.epsilon)
        kw = abs(small_divisor(k, prec + 16))
        Fk = spec.forcing.fourier(k)
        d1, d2 = singular.delta1.value, singular.delta2.value
        return +(
            abs(Fk) * abs(kw / eps * d2 + d1)
            * mpmath.exp(-kw * singular.rho_minus.value.imag / eps)
        )


def _candidate_harmonics(spec: ModelSpec, kmax: int):
    """Full half-lattice through the truncation radius (conjugates implied)."""
    km = min(kmax, spec.forcing.spectrum.kmax if spec.forcing.spectrum is not None else kmax)
    out = []
    for k1 in range(-km, km + 1):
        for k2 in range(-km, km + 1):
            if (k1, k2) == (0, 0):
                continue
            if small_divisor((k1, k2), 64) > 0:
                out.append((k1, k2))
    return sorted(out, key=lambda k: (abs(k[1]), k[0]))


def melnikov_qp_coefficients(spec: ModelSpec, kmax: int = None, prec: int = DEFAULT_PREC,
                             rel_cut=None, singular: SingularityData | None = None):
    """Significant Fourier coefficients of the QP Melnikov function at u = 0.

    Candidates are pre-scored with the closed-form size estimate so the exact
    residue engine only runs on harmonics that matter; returns
    (list of HarmonicAmplitude sorted by |k2| then k1, mean term, tail bound).
    """
    if spec.forcing.kind != "qp":
        raise ValueError("needs a quasiperiodic forcing")
    spectrum = spec.forcing.spectrum
    if kmax is None:
        kmax = spectrum.kmax
    kmax = min(kmax, spectrum.kmax)
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        sing = singular
        if sing is None and spec.alpha > 0:
            sing = solve_singularities(spec.alpha, spec.variant, prec=prec + 16)
        if rel_cut is None:
            rel_cut = default_tol(prec) / 100
        # score candidates with the cheap estimate
        cands = _candidate_harmonics(spec, kmax)
        if spec.alpha > 0 and spec.variant == STANDARD:
            d1, d2 = sing.delta1.value, sing.delta2.value
            im_rho = sing.rho_minus.value.imag

            def score(k):
                kw = abs(small_divisor(k, prec))
                return abs(spec.forcing.fourier(k)) * (kw / eps * abs(d2) + abs(d1)) * mpmath.exp(-kw * im_rho / eps)
        else:
            def score(k):
                m = abs(small_divisor(k, prec)) / eps
                return abs(spec.forcing.fourier(k)) * mp.pi * m ** 2 * mpmath.exp(-m * mp.pi / 2)

        scored = [(score(k), k) for k in cands]
        top = max(s for s, _ in scored) if scored else mpf(0)
        keep = [k for s, k in scored if s >= rel_cut * top]
        # factor 4: 2 for the conjugate partners, 2 for the slack of the
        # single-pole estimate when the small divisor is not small
        dropped_sum = 4 * sum(s for s, k in scored if s < rel_cut * top)
        harmonics = []
        for k in sorted(keep, key=lambda k: (abs(k[1]), k[0])):
            harmonics.append(harmonic_amplitude(k, spec, singular=sing, prec=prec))
        # mean term: 4 F^[0] * int beta
        J0, _ = harmonic_integral(0, spec.alpha, spec.variant, prec)
        mean = 4 * spec.forcing.fourier((0, 0)) * J0
        if spec.alpha > 0 and spec.variant == STANDARD:
            # harmonics beyond the truncation carry at most (|d2|/eps + |d1|)
            # times the spectral tail (the exponential factor is <= 1)
            tail_scale = abs(d2) / eps + abs(d1)
        else:
            tail_scale = mpf(3)  # 4*pi*m^2 e^{-m*pi/2} peaks near 2.8, any m
        tail = dropped_sum + spectrum.tail_bound(kmax) * tail_scale
        return harmonics, +mean.real, +tail


def melnikov_qp_eval(u, theta1, theta2, spec: ModelSpec, kmax: int = None,
                     prec: int = DEFAULT_PREC, mode: str = "series",
                     coefficients=None):
    """QP Melnikov function M(u, theta1, theta2).

    series mode sums mean + 2*Re[M^[k] e^{i k.theta}] over the significant
    half-lattice harmonics (translation covariance is exact:
    M(u, theta) = M(0, theta - omega*u/eps)).  quadrature mode integrates
    4*int beta(u+s) F(theta + omega s/eps) ds directly with the certified
    decay rate 2, for cross checks.  Returns (value, error_bound).
    """
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        t1, t2 = as_mpf(theta1), as_mpf(theta2)
        ur = as_mpf(u)
        if mode == "series":
            if coefficients is None:
                coefficients = melnikov_qp_coefficients(spec, kmax=kmax, prec=prec)
            harmonics, mean, tail = coefficients
            g = golden_mean(prec + 16)
            p1 = t1 - ur / eps
            p2 = t2 - g * ur / eps
            total = mpf(mean)
            for h in harmonics:
                total += 2 * (h.coefficient * mpmath.expj(h.k[0] * p1 + h.k[1] * p2)).real
            return +total, +tail
        if mode == "quadrature":
            return _melnikov_qp_quad(ur, t1, t2, spec, prec)
        raise ValueError("mode must be 'series' or 'quadrature'")


def _melnikov_qp_quad(u, t1, t2, spec: ModelSpec, prec: int, side: str = "both"):
    """4*int beta(u+s) F(theta + omega s/eps) ds over R (both), [0,inf) (stable,
    +4) or (-inf,0] (unstable, -4)."""
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        g = golden_mean(prec + 16)
        a = as_mpf(spec.alpha)

        def integrand(s):
            return beta(u + s, a, spec.variant, prec=prec + 16) * spec.forcing.evaluate(
                t1 + s / eps, t2 + g * s / eps, prec=prec + 16
            )

        fmax = 1 / ((mpmath.cosh(as_mpf(spec.forcing.spectrum.r1)) - 1)
                    * (mpmath.cosh(as_mpf(spec.forcing.spectrum.r2)) - 1))
        mag = 8 / (1 - a) ** 2 * mpmath.exp(2 * abs(u)) * fmax
        panel = mpf('0.9') * mp.pi * eps
        total = mpf(0)
        err = mpf(0)
        if side in ("both", "stable"):
            res = quad_semi_infinite(integrand, "+inf", decay_rate=2, mag_hint=mag, prec=prec, max_panel=panel)
            total += 4 * res.value.real
            err += 4 * res.error_estimate
        if side in ("both", "unstable"):
            res = quad_semi_infinite(integrand, "-inf", decay_rate=2, mag_hint=mag, prec=prec, max_panel=panel)
            sign = 4 if side == "both" else -4
            total += sign * res.value.real
            err += 4 * res.error_estimate
        return +total, +err


def melnikov_qp_half(u, theta1, theta2, spec: ModelSpec, side: str, prec: int = DEFAULT_PREC):
    """Half QP Melnikov functions: -4*int_{-inf}^0 (unstable), +4*int_0^inf (stable)."""
    if side not in ("unstable", "stable"):
        raise ValueError("side must be 'unstable' or 'stable'")
    val, _ = _melnikov_qp_quad(as_mpf(u), as_mpf(theta1), as_mpf(theta2), spec, prec, side=side)
    return val


def sup_melnikov_qp(spec: ModelSpec, kmax: int = None, prec: int = DEFAULT_PREC,
                    grid_n: int = 96, include_mean: bool = False, coefficients=None):
    """Supremum over the torus of |M(0, theta)| from the truncated series.

    Returns (sup_estimate, tail_bound, coefficients).  The oscillatory part
    only, unless include_mean is set.  The grid scan runs in double
    precision (coefficients are far above the float underflow range and the
    scan only locates the maximum); the value at the winning grid point is
    re-evaluated at working precision.
    """
    import numpy as np

    if coefficients is None:
        coefficients = melnikov_qp_coefficients(spec, kmax=kmax, prec=prec)
    harmonics, mean, tail = coefficients
    scale = max(h.amplitude for h in harmonics)
    cs = np.array([complex(h.coefficient / scale) for h in harmonics])
    k1 = np.array([h.k[0] for h in harmonics])
    k2 = np.array([h.k[1] for h in harmonics])
    t = 2.0 * math.pi * np.arange(grid_n) / grid_n
    e1 = np.exp(1j * np.outer(k1, t))  # (nh, grid)
    e2 = np.exp(1j * np.outer(k2, t))
    base = float(mean / scale) if include_mean else 0.0
    vals = base + 2.0 * np.real(np.einsum("hi,hj->ij", cs[:, None] * e1, e2))
    i, j = np.unravel_index(np.argmax(np.abs(vals)), vals.shape)
    with mp.workprec(prec):
        t1 = 2 * mp.pi * int(i) / grid_n
        t2 = 2 * mp.pi * int(j) / grid_n
        tot = mpf(mean) if include_mean else mpf(0)
        for h in harmonics:
            tot += 2 * (h.coefficient * mpmath.expj(h.k[0] * t1 + h.k[1] * t2)).real
        return +abs(tot), +tail, coefficients


def leading_harmonic(spec: ModelSpec, singular: SingularityData | None = None,
                     kmax: int = None, prec: int = DEFAULT_PREC) -> HarmonicAmplitude:
    """Harmonic with the largest amplitude (searched over convergent pairs
    with ±2 sidebands in k1 plus the low-order block).

    Raises if the argmax sits at the search boundary (kmax too small)."""
    if kmax is None:
        kmax = spec.forcing.spectrum.kmax
    harmonics, _, _ = melnikov_qp_coefficients(spec, kmax=kmax, prec=prec, singular=singular,
                                               rel_cut=mpf("1e-6"))
    best = max(harmonics, key=lambda h: h.amplitude)
    # largest convergent pair fully inside the search box |k1|,|k2| <= kmax
    fibs = [p for p in golden_convergents(24) if p[0] <= kmax]
    if abs(best.k[1]) >= fibs[-1][1]:
        raise ValueError("leading harmonic at the search boundary; raise kmax")
    return best


def envelope_bounds(spec: ModelSpec, kmax: int = None, prec: int = DEFAULT_PREC):
    """(lower, upper) bracket of sup|M| in the printed envelope form.

    Intermediate range (eps^nu << alpha < 1 - C eps^2):
        C_i/(sqrt(eps*alpha)(1-alpha)^{5/4}) * e^{-c(ln(eps/Im rho_-)) sqrt(Im rho_-/eps)}
    Wide range (alpha <= C eps^nu, nu > 1, including alpha = 0):
        C_i/eps * e^{-c(ln(2 eps/pi)) sqrt(pi/(2 eps))}
    with measured constants C_1 <= C_2 bracketing the supremum of the
    oscillatory part.  Returns (lower, upper, info dict).
    """
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        a = as_mpf(spec.alpha)
        env = envelope_data(spec.forcing.spectrum.r1, spec.forcing.spectrum.r2, prec)
        regime = classify_regime(spec.epsilon, spec.alpha, case="quasiperiodic")
        if regime.tag == "WideStrip" or spec.alpha == 0:
            rate = mpmath.sqrt(mp.pi / (2 * eps))
            cval = c_of_delta(mpmath.log(2 * eps / mp.pi), env)
            base = mpmath.exp(-cval * rate) / eps
        else:
            sing = solve_singularities(spec.alpha, spec.variant, prec=prec + 16)
            im_rho = sing.rho_minus.value.imag
            rate = mpmath.sqrt(im_rho / eps)
            cval = c_of_delta(mpmath.log(eps / im_rho), env)
            base = mpmath.exp(-cval * rate) / (mpmath.sqrt(eps * a) * (1 - a) ** mpf(1.25))
        sup, tail, _ = sup_melnikov_qp(spec, kmax=kmax, prec=prec)
        lower = max(sup - tail, mpf(0))
        upper = sup + tail
        info = {
            "base": +base,
            "c": +cval,
            "C1": +(lower / base),
            "C2": +(upper / base),
            "sup": +sup,
        }
        return +lower, +upper, info


def qp_narrow_bounds(spec: ModelSpec, C: float, r: float, kmax: int = None,
                     prec: int = DEFAULT_PREC):
    """Bracket of sup|M| for the narrow strip alpha = 1 - C*eps^r.

    0 < r < 2: prefactor 1/(sqrt(alpha) eps^{1/2 + 5r/4}) with the envelope
    exponential; r >= 2: polynomial bracket C_i/eps^{3r/2}.  Constants are
    measured, not assumed.  Returns (lower, upper, info).
    """
    if not r > 0:
        raise ValueError("r must be positive")
    with mp.workprec(prec + 16):
        eps = as_mpf(spec.epsilon)
        a = as_mpf(spec.alpha)
        sup, tail, _ = sup_melnikov_qp(spec, kmax=kmax, prec=prec)
        lower = max(sup - tail, mpf(0))
        upper = sup + tail
        if r < 2:
            env = envelope_data(spec.forcing.spectrum.r1, spec.forcing.spectrum.r2, prec)
            sing = solve_singularities(spec.alpha, spec.variant, prec=prec + 16)
            im_rho = sing.rho_minus.value.imag
            base = mpmath.exp(-c_of_delta(mpmath.log(eps / im_rho), env) * mpmath.sqrt(im_rho / eps))
            base /= mpmath.sqrt(a) * eps ** (mpf(1) / 2 + mpf(5) * mpf(r) / 4)
        else:
            base = eps ** (-3 * mpf(r) / 2)
        info = {"base": +base, "C1": +(lower / base), "C2": +(upper / base), "sup": +sup}
        return +lower, +upper, info
