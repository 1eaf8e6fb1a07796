"""Acceptance checks: every criterion as an executable, self-reporting unit.

Each check returns a dict with ``name``, ``passed``, ``detail`` and the
measured numbers, and prints one PASS/FAIL line.  ``run_all(level)`` runs
the whole battery; level "fast" skips the direct-integration (oracle) items,
level "full" runs everything except the hour-scale QP oracle check, which
needs level "heavy" (or SPLITLAB_HEAVY=1).

Two checks (narrow_r2_prefactor and narrow_oracle) implement printed
formulas whose constant is internally inconsistent with the exact residue
content of the same source at the r = 2 boundary; they are expected to fail
and are reported honestly.  See the repository notes for the analysis.
"""

from __future__ import annotations

import math
import os
import time

import mpmath
from mpmath import mp, mpf

from .lab import fit_rate_prefactor, ydiff_first_order
from .melnikov_p import half_melnikov, harmonic_integral, melnikov_quadrature, melnikov_residue
from .melnikov_qp import (
    c_of_delta,
    envelope_data,
    golden_convergents,
    leading_harmonic,
    melnikov_qp_coefficients,
    sup_melnikov_qp,
)
from .model import ModelSpec, check_T0_identity, qp_forcing
from .oracle import monodromy_floquet, splitting_profile_periodic, splitting_profile_qp
from .singular import delta_constants, solve_singularities


def _report(name, passed, detail, **values):
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line, flush=True)
    rec = {"name": name, "passed": bool(passed), "detail": detail}
    rec.update({k: str(v) for k, v in values.items()})
    return rec


def check_a1_residue_closed_forms():
    """A1: generic double-pole engine reproduces delta_1, delta_2 at 1e-18."""
    worst = mpf(0)
    prec = 256
    with mp.workprec(prec + 16):
        for alpha in ("0.1", "0.3", "0.5", "0.7", "0.9"):
            a = mpf(alpha)
            sing = solve_singularities(a, prec=prec)
            d1, d2 = sing.delta1.value, sing.delta2.value
            rho = sing.rho_minus.value
            for m in (mpf(1), mpf(4)):
                J, _ = harmonic_integral(m, a, prec=prec, poles="minus_only")
                closed = (m * d2 + d1) * mpmath.expj(m * rho) / 4
                worst = max(worst, abs(J - closed) / abs(closed))
    return _report("A1 residue engine vs closed forms", worst <= mpf("1e-18"),
                   f"worst relative deviation {mpmath.nstr(worst, 3)} (tol 1e-18)", worst=worst)


def check_a2_method_triangle():
    """A2: residue vs contour-shifted quadrature, rel diff <= 1e-8."""
    worst = mpf(0)
    for eps in (0.1, 0.2, 0.3):
        for alpha in (0.2, 0.5, 0.8):
            spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=alpha)
            r1 = melnikov_residue(0, 0, spec, prec=128)
            r2 = melnikov_quadrature(0, 0, spec, prec=128)
            worst = max(worst, abs(r1.coefficient - r2.coefficient) / abs(r1.coefficient))
    return _report("A2 method triangle", worst <= mpf("1e-8"),
                   f"worst relative difference {mpmath.nstr(worst, 3)} (tol 1e-8)", worst=worst)


def check_a3_wide_strip():
    """A3: wide-strip formula for alpha = eps^3."""
    ok = True
    details = []
    for eps in (0.05, 0.08, 0.12, 0.2):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=eps ** 3)
        r = melnikov_residue(0, 0, spec, prec=192)
        with mp.workprec(192):
            lead = 4 * mp.pi / mpf(eps) ** 2 * mpmath.exp(-mp.pi / (2 * mpf(eps)))
            dev = abs(r.amplitude / lead - 1)
            bound = 3 * (mpf(eps) ** 3 / mpf(eps) ** 2 + mpmath.exp(-mp.pi / (2 * mpf(eps))))
            if eps == 0.05:
                bound = min(bound, mpf("0.1"))
        ok = ok and dev <= bound
        details.append(f"eps={eps}: dev={mpmath.nstr(dev, 3)}<=bound {mpmath.nstr(bound, 3)}")
    return _report("A3 wide-strip formula", ok, "; ".join(details))


def check_a4_delta2_limit():
    """A4: sqrt(alpha)*|delta_2| -> pi*sqrt(2), deviation <= 5*sqrt(alpha)."""
    ok = True
    details = []
    with mp.workprec(160):
        target = mp.pi * mpmath.sqrt(2)
        for alpha in ("1e-4", "1e-6"):
            a = mpf(alpha)
            _, d2 = delta_constants(a, prec=128)
            dev = abs(abs(mpmath.sqrt(a) * d2.value) - target)
            ok = ok and dev <= 5 * mpmath.sqrt(a)
            details.append(f"alpha={alpha}: dev={mpmath.nstr(dev, 3)} (tol {mpmath.nstr(5 * mpmath.sqrt(a), 3)})")
    return _report("A4 delta2 limit modulus pi*sqrt(2)", ok, "; ".join(details))


def check_a5_narrow_prefactor_r2():
    """A5 (r = 2 leg): amplitude*sqrt2*eps^3*e^{sqrt C}/pi = 1 + O(eps), <= 10 eps.

    Implemented exactly as printed.  The exact amplitude carries the extra
    factor (1 + sqrt(C)) at the r = 2 boundary, so this check fails by
    construction (factor 2 at C = 1); see the notes ledger.
    """
    ok = True
    details = []
    C = 1.0
    for eps in (0.05, 0.1):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=1 - C * eps ** 2)
        r = melnikov_residue(0, 0, spec, prec=192)
        with mp.workprec(192):
            ratio = r.amplitude * mpmath.sqrt(2) * mpf(eps) ** 3 * mpmath.exp(mpmath.sqrt(C)) / mp.pi
            dev = abs(ratio - 1)
        ok = ok and dev <= 10 * eps
        details.append(f"eps={eps}: ratio={mpmath.nstr(ratio, 6)} dev={mpmath.nstr(dev, 4)} (tol {10 * eps})")
    return _report("A5 narrow prefactor r=2 (printed constant)", ok, "; ".join(details))


def check_a5_narrow_prefactor_r3():
    """A5 (r = 3 leg): amplitude*sqrt2*eps^{9/2}/pi = 1 + O(eps^{1/2}), <= 10 eps pattern."""
    ok = True
    details = []
    for eps in (0.05, 0.1):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=1 - eps ** 3)
        r = melnikov_residue(0, 0, spec, prec=192)
        with mp.workprec(192):
            ratio = r.amplitude * mpmath.sqrt(2) * mpf(eps) ** mpf("4.5") / mp.pi
            dev = abs(ratio - 1)
        ok = ok and dev <= 10 * eps
        details.append(f"eps={eps}: ratio={mpmath.nstr(ratio, 6)} dev={mpmath.nstr(dev, 4)} (tol {10 * eps})")
    return _report("A5 narrow prefactor r=3", ok, "; ".join(details))


def check_a6_melnikov_validity():
    """A6: oracle vs Melnikov prediction at eps=0.25, alpha=0.4, eta=2."""
    rels = {}
    for mu in (1e-3, 1e-4):
        spec = ModelSpec(epsilon=0.25, mu=mu, eta=2, alpha=0.4)
        prof = splitting_profile_periodic(spec, "pi", n_phases=16)
        pred, _ = ydiff_first_order(spec, "pi", prec=prof.meta["prec"])
        rels[mu] = abs(prof.fitted_amplitude / pred - 1)
    ok = rels[1e-3] <= mpf("0.05") and rels[1e-4] <= mpf("0.01") and rels[1e-4] <= rels[1e-3]
    detail = (f"rel(mu=1e-3)={mpmath.nstr(rels[1e-3], 3)} (tol 0.05); "
              f"rel(mu=1e-4)={mpmath.nstr(rels[1e-4], 3)} (tol 0.01, shrinks)")
    return _report("A6 Melnikov validity (direct oracle)", ok, detail)


def _alt_interference(alpha: float, eps: float) -> float:
    """|sin(x_a/eps)| two-pole interference factor of the alternative model."""
    xa = math.asinh(math.sqrt(2 * alpha / (1 - alpha)))
    return abs(math.sin(xa / eps))


def check_a7_rate_regression():
    """A7: fitted exponential rates from Melnikov sweeps (standard and alternative)."""
    eps_list = [0.08 * (0.3 / 0.08) ** (j / 9) for j in range(10)]
    pts = []
    for eps in eps_list:
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=0.4)
        pts.append((eps, float(melnikov_residue(0, 0, spec, prec=192).amplitude)))
    rep = fit_rate_prefactor(pts)
    im = float(solve_singularities(0.4, prec=128).rho_minus.value.imag)
    rel_std = abs(rep.rate / im - 1)
    details = [f"standard alpha=0.4: a={rep.rate:.5f} vs {im:.5f} ({100 * rel_std:.2f}%, tol 2%)"]
    ok = rel_std <= 0.02
    for alpha in (0.1, 0.4):
        pts = []
        for eps in eps_list:
            s = _alt_interference(alpha, eps)
            if s < 0.3:
                continue  # too close to a two-pole interference zero
            spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=alpha, variant="alternative")
            pts.append((eps, float(melnikov_residue(0, 0, spec, prec=256).amplitude) / s))
        rep = fit_rate_prefactor(pts)
        rel = abs(rep.rate / (math.pi / 2) - 1)
        ok = ok and rel <= 0.02
        details.append(f"alternative alpha={alpha}: a={rep.rate:.5f} vs pi/2 ({100 * rel:.3f}%, tol 2%)")
    return _report("A7 rate regression (Melnikov sweeps)", ok, "; ".join(details))


def check_a7_oracle_rate():
    """A7 (oracle part): 6-point direct sweep recovers a = Im rho_-(0.4) within 5%."""
    eps_list = [0.1 * (0.3 / 0.1) ** (j / 5) for j in range(6)]
    pts = []
    for eps in eps_list:
        spec = ModelSpec(epsilon=eps, mu=1e-4, eta=2, alpha=0.4)
        prof = splitting_profile_periodic(spec, "pi", n_phases=16)
        pts.append((eps, float(prof.fitted_amplitude)))
    rep = fit_rate_prefactor(pts)
    im = float(solve_singularities(0.4, prec=128).rho_minus.value.imag)
    rel = abs(rep.rate / im - 1)
    return _report("A7 rate regression (oracle sweep)", rel <= 0.05,
                   f"a={rep.rate:.5f} vs Im rho={im:.5f} ({100 * rel:.2f}%, tol 5%)")


def check_a8_nonexponential_oracle():
    """A8: narrow-strip oracle distance vs the printed r = 2 prediction.

    d~ is measured as y^s - y^u at x = 3*pi/2 (the printed definition).
    Expected to fail: the printed denominator misses the (1+sqrt C) factor
    and the stated equality of d~ with 2*sqrt2*D is off by a factor 4
    against its own generating-function chain; see the notes ledger.
    """
    eps, C, mu, eta = 0.1, 1.0, 1e-3, 4.0
    spec = ModelSpec(epsilon=eps, mu=mu, eta=eta, alpha=1 - C * eps ** 2)
    prof = splitting_profile_periodic(spec, "3pi2", n_phases=16)
    with mp.workprec(prof.meta["prec"]):
        denom = 2 * mp.pi * mpf(mu) * mpf(eps) ** (eta - 3) * mpmath.exp(-mpmath.sqrt(C)) / mpf(C) ** mpf(1.5)
        ratio = prof.fitted_amplitude / denom
        dev = abs(ratio - 1)
    return _report("A8 non-exponential splitting (printed constant)", dev <= mpf("0.15"),
                   f"ratio={mpmath.nstr(ratio, 5)} dev={mpmath.nstr(dev, 3)} (tol 0.15)")


def check_a8_nonexponential_exact():
    """Companion to A8: the same oracle run against the exact first-order
    prediction mu*eps^eta*|M(u*)|/sqrt(2); this validates the measurement."""
    eps, C, mu, eta = 0.1, 1.0, 1e-3, 4.0
    spec = ModelSpec(epsilon=eps, mu=mu, eta=eta, alpha=1 - C * eps ** 2)
    prof = splitting_profile_periodic(spec, "3pi2", n_phases=16)
    pred, _ = ydiff_first_order(spec, "3pi2", prec=prof.meta["prec"])
    rel = abs(prof.fitted_amplitude / pred - 1)
    return _report("A8-companion oracle vs exact residue prediction", rel <= mpf("0.02"),
                   f"rel={mpmath.nstr(rel, 3)} (tol 0.02)")


def check_a9_qp_envelope():
    """A9: leading harmonic is a convergent pair; normalized log-sup stays in a ln 4 band."""
    forcing = qp_forcing(1.0, 1.0, kmax=34)
    env = envelope_data(1.0, 1.0, 128)
    fib = set()
    for p, q in golden_convergents(12):
        fib.add((p, -q))
        fib.add((-p, q))
    norms = []
    fib_ok = True
    with mp.workprec(160):
        sing = solve_singularities(0.3, prec=128)
        im = sing.rho_minus.value.imag
        for j in range(7):
            eps = 0.3 * 2 ** -j
            spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=0.3, forcing=forcing)
            lead = leading_harmonic(spec, kmax=34, prec=128)
            fib_ok = fib_ok and (lead.k in fib)
            sup, _, _ = sup_melnikov_qp(spec, kmax=34, prec=128)
            cval = c_of_delta(mpmath.log(mpf(eps) / im), env)
            norms.append(
                mpmath.log(sup) + cval * mpmath.sqrt(im / mpf(eps))
                + mpf("0.5") * mpmath.log(mpf(eps) * mpf("0.3"))
                + mpf("1.25") * mpmath.log(1 - mpf("0.3"))
            )
        band = max(norms) - min(norms)
        ok = fib_ok and band <= mpmath.log(4)
    return _report("A9 QP envelope", ok,
                   f"leading harmonics Fibonacci: {fib_ok}; band width {mpmath.nstr(band, 4)} <= ln4 "
                   f"{mpmath.nstr(mpmath.log(4), 4)}")


def check_a10_qp_validity():
    """A10: QP oracle sup|d| vs mu*eps^eta*sup|M|/2 within 10%; dominant harmonic."""
    forcing = qp_forcing(1.0, 1.0, kmax=32)
    ratios = {}
    dom_ok = True
    for mu, grid_n, block in ((1e-3, 16, 4), (1e-4, 12, 3)):
        spec = ModelSpec(epsilon=0.3, mu=mu, eta=2, alpha=0.3, forcing=forcing)
        prof = splitting_profile_qp(spec, "pi", grid_n=grid_n)
        prec = prof.meta["prec"]
        coeffs = melnikov_qp_coefficients(spec, kmax=32, prec=prec)
        sup_m, _, _ = sup_melnikov_qp(spec, kmax=32, prec=prec, grid_n=grid_n,
                                      include_mean=True, coefficients=coeffs)
        with mp.workprec(prec):
            pred = abs(spec.mu_eff(prec)) * sup_m / 2
            ratios[mu] = abs(prof.sup_abs / pred - 1)
        if mu == 1e-3:
            lead = leading_harmonic(spec, kmax=32, prec=prec)
            k = prof.dominant_harmonic
            dom_ok = k in (lead.k, (-lead.k[0], -lead.k[1]))
    ok = ratios[1e-3] <= mpf("0.1") and ratios[1e-4] <= ratios[1e-3] and dom_ok
    return _report("A10 QP validity (direct oracle)", ok,
                   f"rel(mu=1e-3)={mpmath.nstr(ratios[1e-3], 3)} (tol 0.1), "
                   f"rel(mu=1e-4)={mpmath.nstr(ratios[1e-4], 3)} (improves), dominant harmonic match: {dom_ok}")


def check_a11_structural():
    """A11: structural invariant bundle."""
    failures = []
    # T0 identity
    if not all(check_T0_identity(u, 128) for u in (-1.0, 0.3, 2.0)):
        failures.append("T0 identity")
    # M = M^s - M^u
    spec = ModelSpec(epsilon=0.2, mu=0, eta=0, alpha=0.4)
    Ms = half_melnikov(0, 0.7, spec, "stable")
    Mu = half_melnikov(0, 0.7, spec, "unstable")
    res = melnikov_residue(0, 0, spec, prec=192)
    if abs((Ms - Mu) - res.evaluate(0, 0.7)) > mpf("1e-10"):
        failures.append("half-Melnikov additivity")
    # translation covariance
    spec = ModelSpec(epsilon=0.15, mu=0, eta=0, alpha=0.5)
    r = melnikov_residue(0, 0, spec, prec=128)
    with mp.workprec(144):
        u = mpf("0.4")
        if abs(r.evaluate(u, 1.0) - r.evaluate(0, 1 - u / r.epsilon)) > mpf("1e-25"):
            failures.append("translation covariance")
    # c(delta) periodicity and minimum
    env = envelope_data(1.0, 1.0, 128)
    with mp.workprec(128):
        if abs(c_of_delta(env.delta0, env) - env.C0) > mpf("1e-30"):
            failures.append("c(delta) minimum")
        if abs(c_of_delta(env.delta0 + env.period, env) - env.C0) > mpf("1e-30"):
            failures.append("c(delta) periodicity")
    # mu = 0 => d == 0
    spec0 = ModelSpec(epsilon=0.25, mu=0.0, eta=2, alpha=0.4)
    prof = splitting_profile_periodic(spec0, "pi", n_phases=16, richardson=False)
    if prof.resolved or prof.sup_abs > mpf("1e-20"):
        failures.append(f"mu=0 profile not flat (sup={mpmath.nstr(prof.sup_abs, 3)})")
    # monodromy determinant
    spec = ModelSpec(epsilon=0.25, mu=1e-3, eta=2, alpha=0.4)
    _, _, A = monodromy_floquet(spec, (0.7,), prec=256)
    with mp.workprec(256):
        det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
        if abs(det - 1) > mpf("1e-20"):
            failures.append("monodromy determinant")
    ok = not failures
    return _report("A11 structural invariants", ok,
                   "all hold" if ok else "failed: " + ", ".join(failures))


FAST_CHECKS = [
    check_a1_residue_closed_forms,
    check_a2_method_triangle,
    check_a3_wide_strip,
    check_a4_delta2_limit,
    check_a5_narrow_prefactor_r2,
    check_a5_narrow_prefactor_r3,
    check_a7_rate_regression,
    check_a9_qp_envelope,
]

FULL_CHECKS = FAST_CHECKS + [
    check_a11_structural,
    check_a6_melnikov_validity,
    check_a7_oracle_rate,
    check_a8_nonexponential_oracle,
    check_a8_nonexponential_exact,
]

HEAVY_CHECKS = FULL_CHECKS + [check_a10_qp_validity]


def run_all(level: str = "fast") -> dict:
    checks = {"fast": FAST_CHECKS, "full": FULL_CHECKS, "heavy": HEAVY_CHECKS}.get(level)
    if checks is None:
        raise ValueError("level must be fast, full or heavy")
    results = []
    t0 = time.time()
    for chk in checks:
        t1 = time.time()
        try:
            rec = chk()
        except Exception as exc:  # a crashed check is a failed check
            rec = _report(chk.__name__, False, f"raised {type(exc).__name__}: {exc}")
        rec["seconds"] = round(time.time() - t1, 2)
        results.append(rec)
    n_pass = sum(1 for r in results if r["passed"])
    summary = {
        "level": level,
        "passed": n_pass,
        "failed": len(results) - n_pass,
        "seconds": round(time.time() - t0, 1),
        "results": results,
    }
    print(f"{n_pass}/{len(results)} checks passed in {summary['seconds']}s", flush=True)
    return summary


if __name__ == "__main__":
    import sys

    lvl = sys.argv[1] if len(sys.argv) > 1 else os.environ.get("SPLITLAB_LEVEL", "fast")
    out = run_all(lvl)
    sys.exit(0 if out["failed"] == 0 else 1)
