import math
import warnings

import mpmath
import pytest
from mpmath import mp, mpf

from splitlab.melnikov_p import (
    INTERMEDIATE,
    NARROW_EXP,
    NARROW_POLY,
    TRANSITION,
    WIDE_STRIP,
    classify_regime,
    half_melnikov,
    melnikov_asymptotic,
    melnikov_potential,
    melnikov_quadrature,
    melnikov_residue,
    transition_constants,
)
from splitlab.model import ModelSpec
from splitlab.singular import solve_singularities


def test_classify_regime_examples():
    assert classify_regime(0.1, 1e-4).tag == WIDE_STRIP
    assert classify_regime(0.1, 0.3).tag == INTERMEDIATE
    assert classify_regime(0.1, 1 - 0.1 ** 3).tag == NARROW_POLY
    assert classify_regime(0.1, 0.01).tag == TRANSITION
    assert classify_regime(0.1, 1 - 0.1).tag == NARROW_EXP
    # quasiperiodic threshold sits at 1 instead of 2
    assert classify_regime(0.1, 0.01, case="quasiperiodic").tag == WIDE_STRIP
    assert classify_regime(0.1, 0.1, case="quasiperiodic").tag == TRANSITION
    # scaling laws override the pointwise inference
    r = classify_regime(0.1, 1 - 2 * 0.1 ** 2, scaling={"C": 2.0, "r": 2.0})
    assert r.tag == NARROW_POLY and r.C == 2.0 and r.r == 2.0
    r = classify_regime(0.1, 0.5 * 0.1 ** 3, scaling={"C": 0.5, "nu": 3.0})
    assert r.tag == WIDE_STRIP


def test_residue_mean_free_and_zero_set():
    spec = ModelSpec(epsilon=0.15, mu=0, eta=0, alpha=0.5)
    r = melnikov_residue(0, 0, spec, prec=128)
    with mp.workprec(128):
        vals = [r.evaluate(0, 2 * mp.pi * j / 64) for j in range(64)]
        mean = sum(vals) / 64
        assert abs(mean) < mpf(2) ** -90 * r.amplitude
        # exactly 2 sign changes per period, with slope at the zeros
        signs = [v > 0 for v in vals]
        changes = sum(1 for i in range(64) if signs[i] != signs[(i + 1) % 64])
        assert changes == 2
        assert r.amplitude > 0


def test_residue_intermediate_single_pole_content():
    # at alpha = 0.3, eps = 0.1 the rho_+ correction is exp(-(Im rho_+ - Im rho_-)/eps)
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.3)
    sing = solve_singularities(0.3, prec=192)
    r1 = melnikov_residue(0, 0, spec, include_rho_plus=False, prec=192)
    with mp.workprec(192):
        d1, d2 = sing.delta1.value, sing.delta2.value
        closed = abs(d2 / mpf("0.1") + d1) * mpmath.exp(-sing.rho_minus.value.imag / mpf("0.1"))
        assert abs(r1.amplitude / closed - 1) < mpf("1e-10")
        r2 = melnikov_residue(0, 0, spec, include_rho_plus=True, prec=192)
        gap = mpmath.exp(-(sing.rho_plus.value.imag - sing.rho_minus.value.imag) / mpf("0.1"))
        assert abs(r2.amplitude / r1.amplitude - 1) < 10 * gap


def test_residue_warns_in_transition_without_rho_plus():
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.01)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        melnikov_residue(0, 0, spec, include_rho_plus=False, prec=128)
    assert any("rho_+" in str(x.message) for x in w)


def test_quadrature_matches_residue():
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.3)
    r1 = melnikov_residue(0, 0, spec, prec=160)
    r2 = melnikov_quadrature(0, 0, spec, prec=160)
    assert abs(r1.coefficient - r2.coefficient) <= (
        r1.error_estimate + r2.error_estimate + mpf("1e-10") * r1.amplitude
    )
    assert abs(r1.amplitude - r2.amplitude) / r1.amplitude < mpf("1e-8")


def test_quadrature_real_line_mode():
    spec = ModelSpec(epsilon=0.15, mu=0, eta=0, alpha=0.4)
    r0 = melnikov_quadrature(0, 0, spec, contour_shift=0.0)
    r1 = melnikov_residue(0, 0, spec, prec=192)
    assert abs(r0.amplitude / r1.amplitude - 1) < mpf("1e-9")


def test_quadrature_contour_validation():
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.3)
    im = float(solve_singularities(0.3, prec=128).rho_minus.value.imag)
    with pytest.raises(ValueError):
        melnikov_quadrature(0, 0, spec, contour_shift=im)


def test_translation_covariance():
    spec = ModelSpec(epsilon=0.15, mu=0, eta=0, alpha=0.5)
    r = melnikov_quadrature(0, 0, spec, prec=128)
    with mp.workprec(128):
        v1 = r.evaluate(mpf("0.4"), 1)
        v2 = r.evaluate(0, 1 - mpf("0.4") / r.epsilon)
        assert abs(v1 - v2) < mpf(2) ** -90


def test_wide_strip_amplitude():
    eps = mpf("0.1")
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.001)
    r = melnikov_quadrature(0, 0, spec, prec=160)
    with mp.workprec(160):
        lead = 4 * mp.pi / eps ** 2 * mpmath.exp(-mp.pi / (2 * eps))
        assert abs(r.amplitude / lead - 1) < 3 * (mpf("0.001") / eps ** 2)


def test_asymptotic_formulas():
    # printed prefactors evaluate to their stated numbers
    spec = ModelSpec(epsilon=0.2, mu=0, eta=0, alpha=0.2 ** 4)
    r = melnikov_asymptotic(0, 0, spec, prec=128)
    with mp.workprec(160):
        lead = 4 * mp.pi / r.epsilon ** 2 * mpmath.exp(-mp.pi / (2 * r.epsilon))
        assert abs(r.amplitude - lead) < mpf(2) ** -100
        assert abs(lead - 100 * mp.pi * mpmath.exp(-mp.pi / mpf("0.4"))) < mpf("1e-15")
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=1 - 0.1 ** 2)
    reg = classify_regime(0.1, 1 - 0.1 ** 2, scaling={"C": 1.0, "r": 2.0})
    r = melnikov_asymptotic(0, 0, spec, regime=reg, prec=128)
    with mp.workprec(160):
        printed = mp.pi * mpmath.exp(-1) / (mpmath.sqrt(2) * r.epsilon ** 3)
        assert abs(r.amplitude - printed) / printed < mpf("1e-20")
        assert abs(printed - mpf("817.22")) < mpf("0.01")
    assert r.rate == 0


def test_asymptotic_vs_residue_ratio():
    # each regime's printed formula approaches the exact amplitude at its
    # stated order (the r = 2 narrow clause is excluded: printed constant
    # misses the (1+sqrt C) factor, see notes ledger)
    for eps in (0.08, 0.04):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=eps ** 3)
        reg = classify_regime(eps, eps ** 3, scaling={"C": 1.0, "nu": 3.0})
        ra = melnikov_asymptotic(0, 0, spec, regime=reg, prec=160)
        rr = melnikov_residue(0, 0, spec, prec=160)
        assert abs(ra.amplitude / rr.amplitude - 1) < 3 * (eps ** 3 / eps ** 2)
    for eps in (0.1, 0.05):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=0.3)
        reg = classify_regime(eps, 0.3)
        ra = melnikov_asymptotic(0, 0, spec, regime=reg, prec=160)
        rr = melnikov_residue(0, 0, spec, prec=160)
        assert abs(ra.amplitude / rr.amplitude - 1) < 3 * eps
    for eps in (0.1, 0.05):  # narrow, r = 3 polynomial clause
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=1 - eps ** 3)
        reg = classify_regime(eps, 1 - eps ** 3, scaling={"C": 1.0, "r": 3.0})
        ra = melnikov_asymptotic(0, 0, spec, regime=reg, prec=160)
        rr = melnikov_residue(0, 0, spec, prec=160)
        assert abs(ra.amplitude / rr.amplitude - 1) < 10 * eps


def test_transition_constants():
    spec = ModelSpec(epsilon=0.1, mu=0, eta=0, alpha=0.1 ** 2)
    lam, phi = transition_constants(spec, prec=160)
    assert lam > 0
    # lambda(alpha_*) is an O(1) constant: stable under eps refinement
    spec2 = ModelSpec(epsilon=0.05, mu=0, eta=0, alpha=0.05 ** 2)
    lam2, _ = transition_constants(spec2, prec=160)
    assert abs(float(lam / lam2) - 1) < 0.2


def test_half_melnikov_additivity_and_finiteness():
    spec = ModelSpec(epsilon=0.2, mu=0, eta=0, alpha=0.4)
    Ms = half_melnikov(0, 0.7, spec, "stable")
    Mu = half_melnikov(0, 0.7, spec, "unstable")
    r = melnikov_residue(0, 0, spec, prec=192)
    with mp.workprec(192):
        M = r.evaluate(0, mpf("0.7"))
        assert abs((Ms - Mu) - M) < mpf("1e-11") * max(1, abs(M))
    # both halves finite in the narrow-strip corner
    spec = ModelSpec(epsilon=0.3, mu=0, eta=0, alpha=0.9)
    for side in ("stable", "unstable"):
        v = half_melnikov(0, 0.3, spec, side)
        assert mpmath.isfinite(v)


def test_melnikov_potential():
    spec = ModelSpec(epsilon=0.15, mu=0, eta=0, alpha=0.5)
    r = melnikov_residue(0, 0, spec, prec=192)
    with mp.workprec(192):
        h = mpf("1e-6") * mpf("0.15")
        fd = (r.potential(h, 1) - r.potential(-h, 1)) / (2 * h)
        M = r.evaluate(0, 1)
        assert abs(fd - M) / abs(M) < mpf("1e-8")
        # zero mean over tau and the same translation covariance as M
        vals = [r.potential(0, 2 * mp.pi * j / 32) for j in range(32)]
        assert abs(sum(vals) / 32) < mpf(2) ** -120 * r.amplitude
        assert abs(r.potential(mpf("0.4"), 1) - r.potential(0, 1 - mpf("0.4") / r.epsilon)) < mpf(2) ** -120
    v = melnikov_potential(0, 1, spec, prec=160)
    with mp.workprec(160):
        assert abs(v - r.potential(0, 1)) < mpf("1e-20")


def test_alternative_model_rate():
    # the alternative variant keeps rate pi/2; its amplitude carries the
    # two-pole interference factor |sin(x_a/eps)| with an eps-stable constant
    with mp.workprec(192):
        xa = mpmath.asinh(mpmath.sqrt(2 * mpf("0.4") / mpf("0.6")))
        consts = []
        for eps in (mpf("0.2"), mpf("0.11"), mpf("0.07")):
            spec = ModelSpec(epsilon=float(eps), mu=0, eta=0, alpha=0.4, variant="alternative")
            r = melnikov_residue(0, 0, spec, prec=192)
            assert abs(r.rate - mp.pi / 2) < mpf(2) ** -180
            model = abs(mpmath.sin(xa / eps)) * mpmath.exp(-mp.pi / (2 * eps)) / eps
            consts.append(r.amplitude / model)
        assert abs(consts[1] / consts[0] - 1) < mpf("0.02")
        assert abs(consts[2] / consts[1] - 1) < mpf("0.02")


def test_method_triangle_property():
    for eps in (0.05, 0.3):
        for alpha in (0.05, 0.9):
            spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=alpha)
            r1 = melnikov_residue(0, 0, spec, prec=128)
            r2 = melnikov_quadrature(0, 0, spec, prec=128)
            assert abs(r1.coefficient - r2.coefficient) <= (
                r1.error_estimate + r2.error_estimate + mpf("1e-12") * r1.amplitude
            )
