"""Adaptive Taylor-series integrator for the forced pendulum family.

The right-hand side

    x' = y,   y' = sin x * (1 + mu*eps^eta * g(x) * f(t/eps)),
    g(x) = (1 + alpha*sin x)^(-2)   or   (1 - alpha*cos x)^(-2),

is polynomial in jet space: sin/cos of the state series follow the standard
recurrences, the denominator is handled by a reciprocal series, and the
forcing enters through its own Taylor coefficients in t (sin phase series,
or the product-form quasiperiodic forcing from per-angle factor series).
Coefficients are exact to working precision, so the order can track the
precision (order ~ -ln(tol)/2) and the step size is set by the classical
last-coefficient estimate.  Dense output is the truncated series itself,
which makes section crossings a polynomial root finding problem.

The step ceiling resolves the fast forcing: a degree-N step needs
h/eps well below N, so h_max = min(cap, N*eps/6); with the spec's reference
order 8 this matches a 2*pi*eps/50-type ceiling and scales with the order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
from mpmath import mp, mpf

from .model import STANDARD
from .mpnum import as_mpf

__all__ = ["SinPhaseSeries", "QpProductSeries", "TaylorPendulum", "TaylorVariational", "StepRecord"]


class SinPhaseSeries:
    """Taylor coefficients of sin(tau0 + omega*t) around any t."""

    def __init__(self, omega, tau0=0, prec=128):
        with mp.workprec(prec):
            self.omega = as_mpf(omega)
            self.tau0 = as_mpf(tau0)

    def phase(self, t):
        return self.tau0 + self.omega * t

    def coefficients(self, t, n):
        s = mpmath.sin(self.phase(t))
        c = mpmath.cos(self.phase(t))
        out = [s]
        fac = mpf(1)
        for j in range(1, n + 1):
            fac *= self.omega / j
            s, c = c, -s
            out.append(s * fac)
        return out


def _recip_series(w, n):
    """Series of 1/w given w with w[0] != 0."""
    inv0 = 1 / w[0]
    h = [inv0]
    for k in range(1, n + 1):
        acc = mpf(0)
        for j in range(1, k + 1):
            acc += w[j] * h[k - j]
        h.append(-inv0 * acc)
    return h


def _mul_series(a, b, n):
    return [sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n + 1)]


class QpProductSeries:
    """Taylor coefficients in t of the product-form quasiperiodic forcing

        F = cos th1 cos th2 / ((cosh r1 - cos th1)(cosh r2 - cos th2)),
        th_i(t) = th_i0 + omega_i t.
    """

    def __init__(self, omega1, omega2, r1, r2, theta10=0, theta20=0, prec=128):
        with mp.workprec(prec):
            self.om = (as_mpf(omega1), as_mpf(omega2))
            self.th0 = (as_mpf(theta10), as_mpf(theta20))
            self.chr = (mpmath.cosh(as_mpf(r1)), mpmath.cosh(as_mpf(r2)))

    def phase(self, t):
        return (self.th0[0] + self.om[0] * t, self.th0[1] + self.om[1] * t)

    def coefficients(self, t, n):
        factors = []
        for i in (0, 1):
            th = self.th0[i] + self.om[i] * t
            c = mpmath.cos(th)
            s = mpmath.sin(th)
            cos_ser = [c]
            fac = mpf(1)
            for j in range(1, n + 1):
                fac *= self.om[i] / j
                c, s = -s, c
                cos_ser.append(c * fac)
            den = [self.chr[i] - cos_ser[0]] + [-x for x in cos_ser[1:]]
            factors.append(_mul_series(cos_ser, _recip_series(den, n), n))
        return _mul_series(factors[0], factors[1], n)


@dataclass
class StepRecord:
    t: mpf
    h: mpf
    poly_x: list
    poly_y: list

    def x_at(self, sigma):
        return _horner(self.poly_x, sigma)

    def y_at(self, sigma):
        return _horner(self.poly_y, sigma)


def _horner(coeffs, s):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * s + c
    return acc


class EscapeError(RuntimeError):
    """Trajectory left the separatrix neighborhood (perturbation guard)."""


class TaylorPendulum:
    """Jet integrator for one trajectory of the forced pendulum."""

    def __init__(self, alpha, mu_eff, variant=STANDARD, forcing_series=None,
                 prec=128, tol=None, order=None, h_cap=None, eps=None):
        self.prec = prec
        with mp.workprec(prec):
            self.alpha = as_mpf(alpha)
            self.mu_eff = as_mpf(mu_eff)
        self.variant = variant
        self.forcing = forcing_series
        if tol is None:
            tol = mpf(10) ** (-(prec * 0.28))
        self.tol = as_mpf(tol)
        if order is None:
            order = max(12, int(-math.log(float(self.tol)) / 2) + 4)
        self.order = order
        ceil_forcing = None
        if eps is not None:
            ceil_forcing = self.order * float(eps) / 6.0
        self.h_cap = min(h_cap or 0.9, ceil_forcing or 0.9, 0.9)
        self.steps_taken = 0
        self.err_accum = mpf(0)

    def series(self, t, x, y):
        """Taylor coefficients (X, Y) of the solution through (t, x, y)."""
        n = self.order
        mu = self.mu_eff
        X = [x] + [mpf(0)] * n
        Y = [y] + [mpf(0)] * n
        S = [mpmath.sin(x)] + [mpf(0)] * n
        C = [mpmath.cos(x)] + [mpf(0)] * n
        perturbed = mu != 0 and self.forcing is not None
        if perturbed:
            PHI = self.forcing.coefficients(t, n)
            if self.variant == STANDARD:
                W = [1 + self.alpha * S[0]] + [mpf(0)] * n
            else:
                W = [1 - self.alpha * C[0]] + [mpf(0)] * n
            H = [1 / W[0]] + [mpf(0)] * n
            G = [H[0] * H[0]] + [mpf(0)] * n
            P = [S[0] * G[0]] + [mpf(0)] * n
            Q = [P[0] * PHI[0]] + [mpf(0)] * n
        X[1] = Y[0]
        Y[1] = S[0] + mu * Q[0] if perturbed else S[0]
        for k in range(1, n):
            # trig series of X through index k (X[k] is known)
            sk = mpf(0)
            ck = mpf(0)
            for j in range(1, k + 1):
                jxj = j * X[j]
                sk += jxj * C[k - j]
                ck += jxj * S[k - j]
            S[k] = sk / k
            C[k] = -ck / k
            if perturbed:
                W[k] = self.alpha * S[k] if self.variant == STANDARD else -self.alpha * C[k]
                acc = mpf(0)
                for j in range(1, k + 1):
                    acc += W[j] * H[k - j]
                H[k] = -H[0] * acc if W[0] == 1 else -acc / W[0]
                G[k] = sum(H[j] * H[k - j] for j in range(k + 1))
                P[k] = sum(S[j] * G[k - j] for j in range(k + 1))
                Q[k] = sum(P[j] * PHI[k - j] for j in range(k + 1))
                Y[k + 1] = (S[k] + mu * Q[k]) / (k + 1)
            else:
                Y[k + 1] = S[k] / (k + 1)
            X[k + 1] = Y[k] / (k + 1)
        return X, Y

    def _step_size(self, X, Y):
        n = self.order
        h = mpf(self.h_cap)
        for coeffs, k in ((X, n), (Y, n), (X, n - 1), (Y, n - 1)):
            c = abs(coeffs[k])
            if c > 0:
                h = min(h, (self.tol / c) ** (mpf(1) / k))
        return mpf("0.85") * h

    def step(self, t, x, y, direction=1, h_limit=None) -> StepRecord:
        with mp.workprec(self.prec):
            X, Y = self.series(t, x, y)
            h = self._step_size(X, Y)
            if h_limit is not None:
                h = min(h, abs(h_limit))
            h = h * direction
            self.steps_taken += 1
            self.err_accum += self.tol
            return StepRecord(t=t, h=h, poly_x=X, poly_y=Y)

    def integrate_to_time(self, t0, x, y, t1):
        """State at t1 (either direction)."""
        with mp.workprec(self.prec):
            t = as_mpf(t0)
            t1 = as_mpf(t1)
            x = as_mpf(x)
            y = as_mpf(y)
            direction = 1 if t1 >= t else -1
            while (t1 - t) * direction > 0:
                rec = self.step(t, x, y, direction, h_limit=abs(t1 - t))
                t = t + rec.h
                x = rec.x_at(rec.h)
                y = rec.y_at(rec.h)
            return x, y

    def integrate_to_section(self, t0, x, y, section, direction=1, t_cap=None,
                             x_window=(-1.0, 7.0), y_ceiling=3.5):
        """March until x(t) crosses the section value; Newton on the local series.

        Raises EscapeError when the trajectory leaves the separatrix
        neighborhood, which signals a violated perturbation-size guard.
        """
        with mp.workprec(self.prec):
            t = as_mpf(t0)
            x = as_mpf(x)
            y = as_mpf(y)
            sec = as_mpf(section)
            if t_cap is None:
                t_cap = 200
            while abs(t - t0) <= t_cap:
                rec = self.step(t, x, y, direction)
                t_new = t + rec.h
                x_new = rec.x_at(rec.h)
                y_new = rec.y_at(rec.h)
                f0 = x - sec
                f1 = x_new - sec
                if f0 == 0 or (f0 > 0) != (f1 > 0):
                    sigma = self._locate(rec, sec, rec.h)
                    return t + sigma, rec.x_at(sigma), rec.y_at(sigma)
                if not (x_window[0] < x_new < x_window[1]) or abs(y_new) > y_ceiling:
                    raise EscapeError(
                        "trajectory escaped the separatrix neighborhood; "
                        "check the guard eps^eta/(1-alpha)^(3/2)"
                    )
                t, x, y = t_new, x_new, y_new
            raise EscapeError("section not reached within the time cap")

    def _locate(self, rec: StepRecord, sec, h):
        # bisection start inside [0, h] (signed), then Newton on the series
        lo, hi = mpf(0), h
        flo = rec.x_at(lo) - sec
        for _ in range(8):
            mid = (lo + hi) / 2
            fm = rec.x_at(mid) - sec
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        s = (lo + hi) / 2
        tol = mpf(2) ** (20 - self.prec)
        for _ in range(60):
            f = rec.x_at(s) - sec
            if abs(f) <= tol:
                break
            df = rec.y_at(s)
            s_new = s - f / df
            inside = (s_new - lo) * (s_new - hi) <= 0
            if not inside:
                s_new = (lo + hi) / 2
            if (rec.x_at(s_new) - sec > 0) == (flo > 0):
                lo = s_new
            else:
                hi = s_new
            s = s_new
        return s

    def energy(self, x, y):
        """Unperturbed pendulum energy H0 = y^2/2 + cos x - 1."""
        with mp.workprec(self.prec):
            return as_mpf(y) ** 2 / 2 + mpmath.cos(as_mpf(x)) - 1


class TaylorVariational:
    """Jet integrator of the linearization at the origin/torus:

        x' = y,  y' = (1 + mu_eff * g0 * f(t)) x,

    with g0 = g(0): 1 for the standard variant, (1-alpha)^(-2) for the
    alternative.  Used for Floquet monodromy and local manifold directions.
    """

    def __init__(self, alpha, mu_eff, variant=STANDARD, forcing_series=None,
                 prec=128, tol=None, order=None, eps=None):
        self.prec = prec
        with mp.workprec(prec):
            a = as_mpf(alpha)
            self.g0 = mpf(1) if variant == STANDARD else 1 / (1 - a) ** 2
            self.mu_eff = as_mpf(mu_eff)
        self.forcing = forcing_series
        if tol is None:
            tol = mpf(10) ** (-(prec * 0.28))
        self.tol = as_mpf(tol)
        if order is None:
            order = max(12, int(-math.log(float(self.tol)) / 2) + 4)
        self.order = order
        cap = 0.9
        if eps is not None:
            cap = min(cap, self.order * float(eps) / 6.0)
        self.h_cap = cap

    def _series(self, t, x, y):
        n = self.order
        X = [x] + [mpf(0)] * n
        Y = [y] + [mpf(0)] * n
        c = self.mu_eff * self.g0
        perturbed = c != 0 and self.forcing is not None
        PHI = self.forcing.coefficients(t, n) if perturbed else None
        for k in range(0, n):
            X[k + 1] = Y[k] / (k + 1)
            if perturbed:
                conv = sum(PHI[j] * X[k - j] for j in range(k + 1))
                Y[k + 1] = (X[k] + c * conv) / (k + 1)
            else:
                Y[k + 1] = X[k] / (k + 1)
        return X, Y

    def propagate(self, t0, t1, x, y):
        with mp.workprec(self.prec):
            t = as_mpf(t0)
            t1 = as_mpf(t1)
            x = as_mpf(x)
            y = as_mpf(y)
            direction = 1 if t1 >= t else -1
            while (t1 - t) * direction > 0:
                X, Y = self._series(t, x, y)
                h = mpf(self.h_cap)
                n = self.order
                for coeffs, k in ((X, n), (Y, n)):
                    ck = abs(coeffs[k])
                    if ck > 0:
                        h = min(h, (self.tol / ck) ** (mpf(1) / k))
                h = min(mpf("0.85") * h, abs(t1 - t)) * direction
                x = _horner(X, h)
                y = _horner(Y, h)
                t = t + h
            return x, y

    def monodromy(self, t0, period):
        """Fundamental matrix over [t0, t0 + period], columns (1,0),(0,1)."""
        with mp.workprec(self.prec):
            a11, a21 = self.propagate(t0, t0 + period, mpf(1), mpf(0))
            a12, a22 = self.propagate(t0, t0 + period, mpf(0), mpf(1))
            return ((a11, a12), (a21, a22))
