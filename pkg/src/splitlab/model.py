"""Pendulum models, separatrix, Melnikov integrand and forcing spectra.

Two model variants of the fast-forced pendulum

    x'' = sin x + mu*eps^eta * sin x/(1 + alpha*sin x)^2 * f(t/eps)   (standard)
    x'' = sin x + mu*eps^eta * sin x/(1 - alpha*cos x)^2 * f(t/eps)   (alternative)

share every interface.  The forcing is either sin(tau) or a quasiperiodic
F(theta1, theta2) with golden-mean frequency vector (1, gamma), supplied as
a Fourier spectrum with exponential-decay certificate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpc, mpf

from .mpnum import DEFAULT_PREC, as_mpc, as_mpf, quad_finite

STANDARD = "standard"
ALTERNATIVE = "alternative"

GOLDEN_MEAN = "(1+sqrt(5))/2"  # evaluated at working precision where needed


def golden_mean(prec: int = DEFAULT_PREC) -> mpf:
    with mp.workprec(prec):
        return (1 + mpmath.sqrt(5)) / 2


class PoleProximityError(ValueError):
    """Evaluation point too close to a pole/singularity for the working precision."""


@dataclass
class FourierSpectrum:
    """Truncated 2-d Fourier spectrum with a stored decay certificate.

    coeffs maps (k1, k2) -> mpc with the reality convention
    F^[-k] = conj(F^[k]).  The certificate stores the measured constants of
    the exponential-decay envelope |F^[k]| <= K exp(-r1|k1| - r2|k2|) and the
    measured lower-bound constant on golden convergent pairs.
    """

    coeffs: dict
    kmax: int
    r1: float
    r2: float
    decay_K: mpf = None
    lower_a: mpf = None
    lower_k0: int = 1

    def __getitem__(self, k):
        k = (int(k[0]), int(k[1]))
        if k in self.coeffs:
            return self.coeffs[k]
        mk = (-k[0], -k[1])
        if mk in self.coeffs:
            return mpmath.conj(self.coeffs[mk])
        return mpc(0)

    def __contains__(self, k):
        k = (int(k[0]), int(k[1]))
        return k in self.coeffs or (-k[0], -k[1]) in self.coeffs

    def keys(self):
        return self.coeffs.keys()

    def evaluate(self, theta1, theta2, prec: int = DEFAULT_PREC) -> mpf:
        """Reconstruct F(theta1, theta2) from the stored coefficients."""
        with mp.workprec(prec):
            t1, t2 = as_mpf(theta1), as_mpf(theta2)
            total = mpc(0)
            for (k1, k2), c in self.coeffs.items():
                total += c * mpmath.expjpi((k1 * t1 + k2 * t2) / mp.pi)
            return total.real

    def measure_decay(self):
        """Measure K = sup |F^[k]| e^{r1|k1|+r2|k2|} and the convergent lower bound."""
        K = mpf(0)
        for (k1, k2), c in self.coeffs.items():
            K = max(K, abs(c) * mpmath.exp(self.r1 * abs(k1) + self.r2 * abs(k2)))
        self.decay_K = K
        lower = None
        a, b = 1, 1  # consecutive Fibonacci numbers (F_m, F_{m+1})
        while b <= self.kmax:
            pair = (b, -a)
            if pair in self:
                val = self[pair]
                if val.real > 0:
                    scaled = val.real * mpmath.exp(self.r1 * abs(pair[0]) + self.r2 * abs(pair[1]))
                    lower = scaled if lower is None else min(lower, scaled)
            a, b = b, a + b
        self.lower_a = lower
        return K, lower

    def tail_bound(self, kmax_used: int) -> mpf:
        """Geometric bound on sum_{|k1| or |k2| > kmax_used} |F^[k]|."""
        if self.decay_K is None:
            self.measure_decay()
        K, r1, r2 = self.decay_K, mpf(self.r1), mpf(self.r2)
        g1, g2 = mpmath.exp(-r1), mpmath.exp(-r2)
        s1 = 2 * g1 / (1 - g1) + 1
        s2 = 2 * g2 / (1 - g2) + 1
        t1 = 2 * g1 ** (kmax_used + 1) / (1 - g1)
        t2 = 2 * g2 ** (kmax_used + 1) / (1 - g2)
        return K * (t1 * s2 + s1 * t2)

    def to_json(self) -> str:
        recs = [
            {"k1": k1, "k2": k2, "re": mpmath.nstr(c.real, 40), "im": mpmath.nstr(c.imag, 40)}
            for (k1, k2), c in sorted(self.coeffs.items())
        ]
        return json.dumps(
            {"kmax": self.kmax, "r1": self.r1, "r2": self.r2, "coefficients": recs},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "FourierSpectrum":
        doc = json.loads(text)
        coeffs = {
            (int(r["k1"]), int(r["k2"])): mpc(mpf(r["re"]), mpf(r["im"]))
            for r in doc["coefficients"]
        }
        spec = cls(coeffs=coeffs, kmax=int(doc["kmax"]), r1=float(doc["r1"]), r2=float(doc["r2"]))
        spec.measure_decay()
        return spec


@dataclass
class ForcingSpec:
    """Forcing selection: periodic sin(tau) or a quasiperiodic spectrum.

    For the periodic kind the first harmonics are ±1 with coefficients
    ∓i/2 (i.e. exactly sin tau) and everything else vanishes.
    """

    kind: str = "sin"  # "sin" | "qp"
    spectrum: FourierSpectrum | None = None
    closed_form: object = None  # optional callable F(theta1, theta2, prec)

    def __post_init__(self):
        if self.kind not in ("sin", "qp"):
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if self.kind == "qp" and self.spectrum is None:
            raise ValueError("quasiperiodic forcing needs a spectrum")

    def fourier(self, k):
        if self.kind == "sin":
            k = int(k)
            if k == 1:
                return mpc(0, "-0.5")
            if k == -1:
                return mpc(0, "0.5")
            return mpc(0)
        return self.spectrum[k]

    def evaluate(self, *phases, prec: int = DEFAULT_PREC):
        if self.kind == "sin":
            with mp.workprec(prec):
                return mpmath.sin(as_mpf(phases[0]))
        if self.closed_form is not None:
            return self.closed_form(phases[0], phases[1], prec)
        return self.spectrum.evaluate(phases[0], phases[1], prec=prec)


def sin_forcing() -> ForcingSpec:
    return ForcingSpec(kind="sin")


@dataclass
class ModelSpec:
    """Full parameter selection for one experiment."""

    epsilon: float
    mu: float
    eta: float
    alpha: float
    variant: str = STANDARD
    forcing: ForcingSpec = field(default_factory=sin_forcing)
    guard_ceiling: float = 0.5

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not (0 <= self.alpha < 1):
            raise ValueError("alpha must lie in [0, 1)")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.variant not in (STANDARD, ALTERNATIVE):
            raise ValueError(f"unknown variant {self.variant!r}")

    def perturbation_guard(self) -> float:
        """eps^eta/(1-alpha)^(3/2); must stay under guard_ceiling for oracle runs."""
        return float(self.epsilon) ** float(self.eta) / (1.0 - float(self.alpha)) ** 1.5

    def check_guard(self):
        g = self.perturbation_guard()
        if g > self.guard_ceiling:
            raise ValueError(
                f"perturbation guard eps^eta/(1-alpha)^1.5 = {g:.3g} exceeds ceiling "
                f"{self.guard_ceiling}; manifolds may leave the separatrix neighborhood"
            )
        return g

    def mu_eff(self, prec: int = DEFAULT_PREC) -> mpf:
        with mp.workprec(prec):
            return as_mpf(self.mu) * as_mpf(self.epsilon) ** as_mpf(self.eta)


@dataclass
class SeparatrixPoint:
    u: object
    x0: object
    y0: object


def separatrix(u, prec: int = DEFAULT_PREC) -> SeparatrixPoint:
    """Unperturbed separatrix point x0 = 4*arctan(e^u), y0 = 2/cosh u.

    Rejects u within 2^(-prec/2) of the singularities i*pi/2 + i*k*pi.
    """
    with mp.workprec(prec + 8):
        uc = as_mpc(u)
        k = mpmath.nint(uc.imag / mp.pi)
        dist = abs(uc - mpc(0, mp.pi / 2 + k * mp.pi))
        dist = min(dist, abs(uc - mpc(0, mp.pi / 2 + (k - 1) * mp.pi)))
        if dist < mpf(2) ** (-prec // 2):
            raise PoleProximityError("u too close to a separatrix singularity i*pi/2 + i*k*pi")
        x0 = 4 * mpmath.atan(mpmath.exp(uc))
        y0 = 2 / mpmath.cosh(uc)
        if uc.imag == 0:
            x0, y0 = x0.real, y0.real
    return SeparatrixPoint(u=uc if uc.imag != 0 else uc.real, x0=+x0, y0=+y0)


def beta_denominator(u, alpha, variant: str = STANDARD):
    """The function whose square is the Melnikov-integrand denominator."""
    if variant == STANDARD:
        return mpmath.cosh(u) ** 2 - 2 * as_mpf(alpha) * mpmath.sinh(u)
    return (1 - as_mpf(alpha)) * mpmath.cosh(u) ** 2 + 2 * as_mpf(alpha)


def beta(u, alpha, variant: str = STANDARD, prec: int = DEFAULT_PREC):
    """Melnikov integrand kernel.

    standard:     sinh u cosh u / (cosh^2 u - 2 alpha sinh u)^2
    alternative:  cosh u sinh u / ((1-alpha) cosh^2 u + 2 alpha)^2

    2*pi*i-periodic in u and real on the real axis for both variants.
    """
    with mp.workprec(prec + 8):
        uc = as_mpc(u)
        den = beta_denominator(uc, alpha, variant)
        num = mpmath.sinh(uc) * mpmath.cosh(uc)
        if abs(den) < mpf(2) ** (-prec // 2) * max(1, abs(num)):
            raise PoleProximityError("u too close to a pole of the Melnikov integrand")
        val = num / den ** 2
        return +val.real if uc.imag == 0 else +val


def T0_generating(u, prec: int = DEFAULT_PREC):
    """Generating function of the unperturbed separatrix, T0 = 4 e^u/cosh u."""
    with mp.workprec(prec):
        ur = as_mpf(u)
        return 4 * mpmath.exp(ur) / mpmath.cosh(ur)


def dT0_generating(u, prec: int = DEFAULT_PREC):
    """d/du T0 = y0(u)^2 = 4/cosh^2 u."""
    with mp.workprec(prec):
        return 4 / mpmath.cosh(as_mpf(u)) ** 2


def check_T0_identity(u, prec: int = DEFAULT_PREC, tol=None) -> bool:
    """Verify d/du T0(u) = 4/cosh^2 u by central finite differences."""
    with mp.workprec(prec):
        ur = as_mpf(u)
        h = mpf(2) ** (-prec // 3)
        fd = (T0_generating(ur + h, prec) - T0_generating(ur - h, prec)) / (2 * h)
        if tol is None:
            tol = mpf(2) ** (-prec // 3)
        return abs(fd - dT0_generating(ur, prec)) <= tol


def psi_derivative(x, alpha, variant: str = STANDARD, prec: int = DEFAULT_PREC):
    """psi'(x): -sin x/(1+alpha sin x)^2, resp. -sin x/(1-alpha cos x)^2."""
    with mp.workprec(prec):
        xr = as_mpc(x)
        a = as_mpf(alpha)
        if variant == STANDARD:
            val = -mpmath.sin(xr) / (1 + a * mpmath.sin(xr)) ** 2
        else:
            val = -mpmath.sin(xr) / (1 - a * mpmath.cos(xr)) ** 2
        return +val.real if xr.imag == 0 else +val


def psi_potential(x, alpha, variant: str = STANDARD, prec: int = DEFAULT_PREC):
    """Perturbation potential psi(x) = int_0^x psi'(t) dt, psi(0) = 0.

    Computed by quadrature on purpose: only Hamiltonian diagnostics need it
    and quadrature avoids any branch bookkeeping in a closed form.
    """
    with mp.workprec(prec):
        xr = as_mpf(x)
        if not (0 <= xr <= 2 * mp.pi + mpf(2) ** (-20)):
            raise ValueError("psi is only needed on [0, 2*pi]")
        if alpha >= 1:
            raise ValueError("alpha must be < 1")
        if xr == 0:
            return mpf(0)
        res = quad_finite(lambda t: psi_derivative(t, alpha, variant, prec + 16), 0, xr, prec=prec)
        return res.value.real


def example_forcing_spectrum(r1: float, r2: float, kmax: int = None, prec: int = DEFAULT_PREC) -> FourierSpectrum:
    """Spectrum of the product-form quasiperiodic forcing

        F(t1, t2) = cos t1 cos t2 / ((cosh r1 - cos t1)(cosh r2 - cos t2)).

    Each 1-d factor expands through 1/(cosh r - cos t) =
    (1/sinh r)(1 + 2 sum_{k>=1} e^{-kr} cos kt), and the cos t shift gives
    coefficients g_k = (e^{-|k-1|r} + e^{-|k+1|r})/(2 sinh r); the 2-d
    coefficients are the products g_{k1}(r1) g_{k2}(r2).  All coefficients
    are real and positive.
    """
    if not (r1 > 0 and r2 > 0):
        raise ValueError("decay rates r1, r2 must be positive")
    if kmax is None:
        kmax = int(math.ceil(40.0 / min(r1, r2)))
    if kmax < 8:
        raise ValueError("kmax >= 8 required to certify the decay constant")
    with mp.workprec(prec):
        def one_d(r):
            rr = as_mpf(r)
            s = mpmath.sinh(rr)
            return [
                (mpmath.exp(-abs(k - 1) * rr) + mpmath.exp(-abs(k + 1) * rr)) / (2 * s)
                for k in range(0, kmax + 1)
            ]

        g1 = one_d(r1)
        g2 = one_d(r2)
        coeffs = {}
        for k1 in range(-kmax, kmax + 1):
            for k2 in range(-kmax, kmax + 1):
                coeffs[(k1, k2)] = mpc(g1[abs(k1)] * g2[abs(k2)])
    spec = FourierSpectrum(coeffs=coeffs, kmax=kmax, r1=float(r1), r2=float(r2))
    spec.measure_decay()
    return spec


def example_forcing_closed_form(r1: float, r2: float):
    """Callable evaluating the product-form forcing exactly."""

    def F(theta1, theta2, prec: int = DEFAULT_PREC):
        with mp.workprec(prec):
            t1, t2 = as_mpf(theta1), as_mpf(theta2)
            return (
                mpmath.cos(t1) * mpmath.cos(t2)
                / ((mpmath.cosh(as_mpf(r1)) - mpmath.cos(t1)) * (mpmath.cosh(as_mpf(r2)) - mpmath.cos(t2)))
            )

    return F


def qp_forcing(r1: float, r2: float, kmax: int = None, prec: int = DEFAULT_PREC) -> ForcingSpec:
    """ForcingSpec for the product-form quasiperiodic example."""
    spec = example_forcing_spectrum(r1, r2, kmax=kmax, prec=prec)
    return ForcingSpec(kind="qp", spectrum=spec, closed_form=example_forcing_closed_form(r1, r2))
