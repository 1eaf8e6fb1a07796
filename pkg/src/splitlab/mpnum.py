"""Precision-parametric arithmetic, quadrature, root finding and residues.

Everything downstream (singularity solving, Melnikov evaluation, manifold
integration) runs on the primitives in this module.  The substrate is mpmath
(binary floats of configurable precision); this module adds the precision
bookkeeping, branch control, adaptive panel quadrature with error estimates,
and a generic double-pole residue engine for integrands N(w)/D(w)^2 * e^{imw}.

Precision policy
----------------
* default working precision: 128 bits, never below 53;
* when the target quantity is exponentially small with rate ``a/eps``
  (magnitude ``exp(-a/eps)``), real-line evaluation cancels about
  ``a/(eps*ln 2)`` bits, so the working precision is raised to that plus
  64 guard bits (see :func:`bits_for_rate`).

Error estimates are adaptive-heuristic, not certified enclosures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from mpmath import mp, mpc, mpf

DEFAULT_PREC = 128
MIN_PREC = 53

__all__ = [
    "DEFAULT_PREC",
    "MIN_PREC",
    "PrecisionScalar",
    "PrecisionComplex",
    "QuadratureResult",
    "QuadratureError",
    "RootFindError",
    "DegeneratePoleError",
    "bits_for_rate",
    "bits_for_magnitude",
    "default_tol",
    "as_mpf",
    "as_mpc",
    "arcsinh_branch",
    "quad_finite",
    "quad_semi_infinite",
    "residue_double_pole",
    "find_root",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Carries the partial estimate so callers can decide to keep it.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class RootFindError(RuntimeError):
    pass


class DegeneratePoleError(ValueError):
    pass


def bits_for_rate(rate_over_eps) -> int:
    """Working precision for a target of magnitude exp(-rate_over_eps).

    ``rate_over_eps`` is the exponent a/eps itself (a positive real).
    Real-line quadrature of such a target cancels rate/(eps*ln2) bits; 64
    guard bits are added on top, floored at the 128-bit default.
    """
    r = float(rate_over_eps)
    if r < 0:
        raise ValueError("rate must be nonnegative")
    return max(DEFAULT_PREC, int(math.ceil(r / math.log(2))) + 64)


def bits_for_magnitude(magnitude) -> int:
    """Same rule as :func:`bits_for_rate` expressed via the magnitude itself."""
    m = abs(float(magnitude))
    if m == 0 or m >= 1:
        return DEFAULT_PREC
    return max(DEFAULT_PREC, int(math.ceil(-math.log2(m))) + 64)


def default_tol(prec: int) -> mpf:
    """Default relative tolerance at a given precision.

    Anchored at 1e-12 for 128 bits and 1e-25 for 256 bits, interpolated
    linearly in the exponent.
    """
    digits = 12 + 13 * (prec - 128) / 128.0
    return mpf(10) ** (-max(6.0, digits))


def as_mpf(x) -> mpf:
    if isinstance(x, PrecisionScalar):
        return x.value
    if isinstance(x, str):
        return mpf(x)
    return mpf(x)


def as_mpc(x) -> mpc:
    if isinstance(x, PrecisionComplex):
        return x.value
    if isinstance(x, PrecisionScalar):
        return mpc(x.value)
    return mpc(x)


class PrecisionScalar:
    """A real number tagged with the binary precision it was computed at.

    Arithmetic between two scalars is carried out (and rounded) at the
    maximum of the operand precisions, which is also the precision tag of
    the result.  Precision never drops below 53 bits.
    """

    __slots__ = ("value", "precision")

    def __init__(self, value, precision: int = DEFAULT_PREC):
        precision = max(MIN_PREC, int(precision))
        with mp.workprec(precision):
            self.value = as_mpf(value)
        self.precision = precision

    @staticmethod
    def _coerce(other):
        if isinstance(other, PrecisionScalar):
            return other
        return PrecisionScalar(other, MIN_PREC if isinstance(other, (int, float)) else mp.prec)

    def _binop(self, other, op):
        other = self._coerce(other)
        prec = max(self.precision, other.precision)
        with mp.workprec(prec):
            return PrecisionScalar(op(self.value, other.value), prec)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._coerce(other)._binop(self, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._coerce(other)._binop(self, lambda a, b: a / b)

    def __pow__(self, other):
        return self._binop(other, lambda a, b: a ** b)

    def __neg__(self):
        return PrecisionScalar(-self.value, self.precision)

    def __abs__(self):
        return PrecisionScalar(abs(self.value), self.precision)

    def __float__(self):
        return float(self.value)

    def __eq__(self, other):
        return self.value == (other.value if isinstance(other, PrecisionScalar) else as_mpf(other))

    def __lt__(self, other):
        return self.value < (other.value if isinstance(other, PrecisionScalar) else as_mpf(other))

    def __le__(self, other):
        return self.value <= (other.value if isinstance(other, PrecisionScalar) else as_mpf(other))

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"PrecisionScalar({mpmath.nstr(self.value, 17)}, prec={self.precision})"


class PrecisionComplex:
    """Complex companion of :class:`PrecisionScalar` (same precision rules)."""

    __slots__ = ("value", "precision")

    def __init__(self, value, precision: int = DEFAULT_PREC):
        precision = max(MIN_PREC, int(precision))
        with mp.workprec(precision):
            self.value = as_mpc(value)
        self.precision = precision

    @property
    def re(self) -> PrecisionScalar:
        return PrecisionScalar(self.value.real, self.precision)

    @property
    def im(self) -> PrecisionScalar:
        return PrecisionScalar(self.value.imag, self.precision)

    def conjugate(self):
        return PrecisionComplex(mpmath.conj(self.value), self.precision)

    @staticmethod
    def _coerce(other):
        if isinstance(other, PrecisionComplex):
            return other
        if isinstance(other, PrecisionScalar):
            return PrecisionComplex(other.value, other.precision)
        return PrecisionComplex(other, MIN_PREC if isinstance(other, (int, float, complex)) else mp.prec)

    def _binop(self, other, op):
        other = self._coerce(other)
        prec = max(self.precision, other.precision)
        with mp.workprec(prec):
            return PrecisionComplex(op(self.value, other.value), prec)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._coerce(other)._binop(self, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._coerce(other)._binop(self, lambda a, b: a / b)

    def __neg__(self):
        return PrecisionComplex(-self.value, self.precision)

    def __abs__(self):
        with mp.workprec(self.precision):
            return PrecisionScalar(abs(self.value), self.precision)

    def abs2(self) -> PrecisionScalar:
        """|z|^2 computed as re^2 + im^2 at working precision."""
        with mp.workprec(self.precision):
            return PrecisionScalar(self.value.real ** 2 + self.value.imag ** 2, self.precision)

    def __eq__(self, other):
        return self.value == (other.value if isinstance(other, PrecisionComplex) else as_mpc(other))

    def __hash__(self):
        return hash(self.value)

    def __complex__(self):
        return complex(self.value)

    def __repr__(self):
        return f"PrecisionComplex({mpmath.nstr(self.value, 17)}, prec={self.precision})"


@dataclass
class QuadratureResult:
    value: mpc
    error_estimate: mpf
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0:
            raise ValueError("error estimate must be nonnegative")


def arcsinh_branch(z, branch: str = "principal", prec: int = DEFAULT_PREC) -> PrecisionComplex:
    """Inverse of sinh with a controlled branch.

    principal: w = ln(z + sqrt(1+z^2)) with Im w in (-pi/2, pi/2] for
    Re z > 0, extended continuously onto the upper unit circle so that
    z = a + i*sqrt(1-a^2), a in (0,1), maps to 0 < Im w < pi/2.  The
    branch point z = i is resolved by the limit Im w -> pi/2.

    shifted: i*pi - principal(z), the second solution family of sinh w = z
    in the strip 0 < Im w < pi.
    """
    if branch not in ("principal", "shifted"):
        raise ValueError(f"unknown branch {branch!r}")
    with mp.workprec(prec + 16):
        w = mpmath.asinh(as_mpc(z))
        if branch == "shifted":
            w = mpc(0, mp.pi) - w
    return PrecisionComplex(w, prec)


def _panelize(a: mpf, b: mpf, max_panel) -> list:
    """Split [a, b] into equal panels no wider than max_panel."""
    if max_panel is None or b - a <= max_panel:
        return [a, b]
    n = int(mpmath.ceil((b - a) / max_panel))
    return [a + (b - a) * k / n for k in range(n + 1)]


def quad_finite(
    f: Callable,
    a,
    b,
    tol=None,
    prec: int = DEFAULT_PREC,
    max_panel=None,
    max_depth: int = 14,
) -> QuadratureResult:
    """Adaptive panel quadrature of an analytic integrand on [a, b].

    Gauss-Legendre on each panel (degree-adaptive), panels bisected until
    the per-panel error estimate fits the budget.  ``max_panel`` caps the
    initial panel width; callers integrating oscillatory integrands should
    set it to a fraction of the oscillation period.

    Relative tolerance target: |result - true| <= tol*|true| + 2^(16-prec).
    Raises :class:`QuadratureError` (with partial result) on failure.
    """
    with mp.workprec(prec + 16):
        a = as_mpf(a)
        b = as_mpf(b)
        if tol is None:
            tol = default_tol(prec)
        tol = as_mpf(tol)
        floor = mpf(2) ** (16 - prec)
        if tol < floor:
            raise ValueError("tol below precision floor 2^(16-prec)")
        evals = [0]

        def g(x):
            evals[0] += 1
            return as_mpc(f(x))

        panels = _panelize(a, b, as_mpf(max_panel) if max_panel is not None else None)
        segments = [(panels[i], panels[i + 1], 0) for i in range(len(panels) - 1)]
        total = mpc(0)
        err = mpf(0)
        bad = []
        while segments:
            lo, hi, depth = segments.pop()
            val, e = mp.quad(g, [lo, hi], error=True)
            # budget distributed proportionally to panel width
            budget = tol * (abs(total) + abs(val) + floor) * (hi - lo) / (b - a)
            if e > budget and depth < max_depth:
                mid = (lo + hi) / 2
                segments.append((lo, mid, depth + 1))
                segments.append((mid, hi, depth + 1))
            else:
                if e > budget:
                    bad.append((lo, hi, e))
                total += val
                err += e
        if bad and err > tol * abs(total) + floor:
            raise QuadratureError(
                f"quad_finite did not converge on {len(bad)} panel(s); "
                f"error estimate {mpmath.nstr(err, 5)}",
                partial=QuadratureResult(total, err, evals[0]),
            )
        return QuadratureResult(+total, +err, evals[0])


def quad_semi_infinite(
    f: Callable,
    direction: str,
    tol=None,
    decay_rate=None,
    s0=0,
    mag_hint=None,
    prec: int = DEFAULT_PREC,
    max_panel=None,
) -> QuadratureResult:
    """Integrate f over [s0, +inf) or (-inf, s0] given a certified decay rate.

    The caller guarantees |f(s)| <= M * exp(-decay_rate*|s|) beyond s0.  The
    range is truncated at T with exp(-decay_rate*T) below the tolerance times
    the estimated integral magnitude; the certified tail bound M*e^(-lam*T)/lam
    is added to the error estimate.
    """
    if direction not in ("+inf", "-inf", "+", "-"):
        raise ValueError("direction must be '+inf' or '-inf'")
    sign = 1 if direction.startswith("+") else -1
    if decay_rate is None or not decay_rate > 0:
        raise ValueError("a positive decay_rate is required")
    with mp.workprec(prec + 16):
        lam = as_mpf(decay_rate)
        s0 = as_mpf(s0)
        if tol is None:
            tol = default_tol(prec)
        tol = as_mpf(tol)
        if mag_hint is None:
            # crude magnitude probe near the start of the range, decay removed
            samples = []
            for ds in (mpf(0), 1 / lam, 2 / lam, 4 / lam):
                s = s0 + sign * ds
                samples.append(abs(as_mpc(f(s))) * mpmath.exp(lam * abs(s - s0)))
            big = max(samples)
            mag = big if big > 0 else mpf(1)
        else:
            mag = as_mpf(mag_hint)
        # estimated integral magnitude ~ mag/lam; truncation there keeps the
        # tail below tol relative to it
        tail_target = tol * mag / lam / 8
        T = mpmath.log(mag / (lam * tail_target)) / lam if tail_target > 0 else mpf(60)
        T = max(T, 8 / lam)
        lo, hi = (s0, s0 + T) if sign > 0 else (s0 - T, s0)
        res = quad_finite(f, lo, hi, tol=tol, prec=prec, max_panel=max_panel)
        tail = mag * mpmath.exp(-lam * T) / lam
        return QuadratureResult(res.value, res.error_estimate + tail, res.evaluations)


def _derivs_at(fun: Callable, z0: mpc, prec: int):
    """(f, f', f'') at z0 from a degree-4 stencil, step h = 2^(-prec/3).

    Five evaluations on z0 + {0, +-h, +-2h}; the classical 4th-order central
    formulas balance truncation against the 2^-prec evaluation noise.
    """
    with mp.workprec(2 * prec):
        h = mpf(2) ** (-(prec // 3))
        fm2 = as_mpc(fun(z0 - 2 * h))
        fm1 = as_mpc(fun(z0 - h))
        f0 = as_mpc(fun(z0))
        fp1 = as_mpc(fun(z0 + h))
        fp2 = as_mpc(fun(z0 + 2 * h))
        d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h)
        d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
        return f0, d1, d2


def residue_double_pole(N: Callable, D: Callable, rho, k_over_eps, prec: int = DEFAULT_PREC) -> PrecisionComplex:
    """Residue of N(w)/D(w)^2 * exp(i*m*w) at w = rho, m = k_over_eps.

    D must have a simple zero at rho (so the integrand has a double pole);
    N analytic and nonzero nearby.  Closed form:

        e^{i m rho} * [ i*m*N/D'^2 + N'/D'^2 - N*D''/D'^3 ]   (all at rho)

    Derivatives come from the local finite-difference stencil, not symbolics,
    so the engine is generic over integrand families.
    """
    rho = as_mpc(rho)
    m = as_mpf(k_over_eps) if not isinstance(k_over_eps, mpc) else k_over_eps
    with mp.workprec(2 * prec):
        n0, n1, _ = _derivs_at(N, rho, prec)
        d0, d1, d2 = _derivs_at(D, rho, prec)
        scale = max(abs(n0), abs(n1), mpf(1))
        if abs(d1) < mpf(2) ** (-prec // 2) * scale:
            raise DegeneratePoleError(f"|D'(rho)| ~ {mpmath.nstr(abs(d1), 5)}: pole is degenerate")
        if abs(d0) > mpf(2) ** (-prec // 4) * abs(d1):
            raise DegeneratePoleError("D(rho) is not numerically zero; rho is not a pole location")
        val = mpmath.exp(1j * m * rho) * (1j * m * n0 / d1 ** 2 + n1 / d1 ** 2 - n0 * d2 / d1 ** 3)
    return PrecisionComplex(val, prec)


def find_root(
    f: Callable,
    guess,
    tol=None,
    prec: int = DEFAULT_PREC,
    max_iter: int = 80,
    bracket: Sequence | None = None,
) -> PrecisionComplex:
    """Newton iteration (numerical derivative) with bisection fallback.

    Terminates when |f(root)| <= tol.  For real problems a bracket [a, b]
    with a sign change enables the bisection fallback; complex problems rely
    on Newton alone and raise :class:`RootFindError` on divergence.
    """
    with mp.workprec(prec + 16):
        if tol is None:
            tol = mpf(2) ** (8 - prec)
        tol = as_mpf(tol)
        z = as_mpc(guess)
        h = mpf(2) ** (-(prec // 3))
        lo = hi = flo = None
        if bracket is not None:
            lo, hi = as_mpf(bracket[0]), as_mpf(bracket[1])
            flo = as_mpc(f(lo))
            fhi = as_mpc(f(hi))
            if (flo.real > 0) == (fhi.real > 0):
                lo = hi = flo = None  # no sign change: Newton only
        best, best_fz = z, abs(as_mpc(f(z)))
        for _ in range(max_iter):
            fz = as_mpc(f(z))
            if abs(fz) <= tol:
                return PrecisionComplex(z, prec)
            if abs(fz) < best_fz:
                best, best_fz = z, abs(fz)
            df = (as_mpc(f(z + h)) - as_mpc(f(z - h))) / (2 * h)
            step_ok = df != 0
            if step_ok:
                znew = z - fz / df
                step_ok = mpmath.isfinite(znew.real) and mpmath.isfinite(znew.imag)
            if lo is not None:
                # keep the iterate inside the bracket, else bisect
                if not step_ok or not (lo <= znew.real <= hi) or znew.imag != 0:
                    mid = (lo + hi) / 2
                    fmid = as_mpc(f(mid))
                    if (fmid.real > 0) == (flo.real > 0):
                        lo, flo = mid, fmid
                    else:
                        hi = mid
                    znew = mpc((lo + hi) / 2)
            elif not step_ok:
                raise RootFindError("derivative vanished and no bracket available")
            if abs(znew - z) < mpf(2) ** (4 - prec) * max(1, abs(z)) and abs(fz) <= mpmath.sqrt(tol):
                z = znew
                break
            z = znew
        fz = abs(as_mpc(f(z)))
        if fz <= tol:
            return PrecisionComplex(z, prec)
        if best_fz <= tol:
            return PrecisionComplex(best, prec)
        raise RootFindError(f"no convergence after {max_iter} iterations; best |f| = {mpmath.nstr(best_fz, 5)}")
