import mpmath
import pytest
from mpmath import mp, mpf

from splitlab.melnikov_qp import (
    c_of_delta,
    envelope_data,
    envelope_bounds,
    golden_convergents,
    harmonic_amplitude,
    harmonic_amplitude_closed,
    leading_harmonic,
    melnikov_qp_coefficients,
    melnikov_qp_eval,
    melnikov_qp_half,
    qp_narrow_bounds,
    small_divisor,
    sup_melnikov_qp,
)
from splitlab.model import ModelSpec, golden_mean, qp_forcing
from splitlab.singular import solve_singularities

FORCING = qp_forcing(1.0, 1.0, kmax=32)


def _spec(eps=0.3, alpha=0.3, mu=0.0, eta=0.0):
    return ModelSpec(epsilon=eps, mu=mu, eta=eta, alpha=alpha, forcing=FORCING)


def test_golden_convergents():
    assert golden_convergents(5) == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]
    with mp.workprec(128):
        g = golden_mean(128)
        divs = [abs(p - g * q) for p, q in golden_convergents(20)]
        assert all(divs[i] > divs[i + 1] for i in range(len(divs) - 1))
        # alternating sign and |k.omega| < 1/|k2| for the pairs (p, -q)
        for i, (p, q) in enumerate(golden_convergents(20)):
            kw = small_divisor((p, -q), 128)
            assert (kw > 0) == (i % 2 == 1)
            assert abs(kw) < 1 / mpf(q)


def test_envelope_function():
    env = envelope_data(1.0, 1.0, prec=128)
    with mp.workprec(128):
        g = golden_mean(128)
        assert abs(env.C0 - 2 * mpmath.sqrt((g + 1) / mpmath.sqrt(5))) < mpf(2) ** -100
        assert abs(env.C0 - mpf("2.16408")) < mpf("1e-4")
        assert abs(c_of_delta(env.delta0, env) - env.C0) == 0
        assert abs(c_of_delta(env.delta0 + env.period, env) - env.C0) < mpf(2) ** -100
        # max over a period at the half-period point
        mx = env.C0 * mpmath.cosh(env.period / 4)
        assert abs(c_of_delta(env.delta0 + env.period / 2, env) - mx) < mpf(2) ** -100
        # continuity at the period edge
        e1 = c_of_delta(env.delta0 + env.period / 2 - mpf("1e-9"), env)
        e2 = c_of_delta(env.delta0 + env.period / 2 + mpf("1e-9"), env)
        assert abs(e1 - e2) < mpf("1e-8")
        # minimum over a sampled period is C0
        vals = [c_of_delta(env.delta0 + env.period * (k / 64 - mpf("0.5")), env) for k in range(65)]
        assert min(vals) >= env.C0 - mpf(2) ** -100


def test_harmonic_engine_vs_closed_form():
    spec = _spec(eps=0.2, alpha=0.4)
    h = harmonic_amplitude((3, -2), spec, prec=256, poles="minus_only")
    closed = harmonic_amplitude_closed((3, -2), spec, prec=256)
    assert abs(h.amplitude - closed) / closed < mpf("1e-15")


def test_harmonic_symmetry_and_mean_rejection():
    spec = _spec()
    h1 = harmonic_amplitude((3, -2), spec, prec=128)
    h2 = harmonic_amplitude((-3, 2), spec, prec=128)
    assert abs(h1.amplitude - h2.amplitude) <= mpf(2) ** -90 * h1.amplitude
    with pytest.raises(ValueError):
        harmonic_amplitude((0, 0), spec)


def test_harmonic_decay_envelope_invariant():
    spec = _spec(eps=0.25, alpha=0.35)
    sing = solve_singularities(0.35, prec=160)
    K = spec.forcing.spectrum.decay_K
    with mp.workprec(160):
        d1, d2 = sing.delta1.value, sing.delta2.value
        scale = 2 * (abs(d1) + abs(d2))
        for k in [(1, 0), (2, -1), (5, -3), (4, 2), (-3, 5)]:
            h = harmonic_amplitude(k, spec, singular=sing, prec=160)
            kw = abs(small_divisor(k, 160))
            bound = (
                K * mpmath.exp(-abs(k[0]) - abs(k[1]))
                * (1 + kw / mpf("0.25")) * scale
                * mpmath.exp(-kw * sing.rho_minus.value.imag / mpf("0.25"))
            )
            assert h.amplitude <= bound


def test_convergents_dominate_exhaustively():
    # closed-form amplitude over all |k1|,|k2| <= 50: argmax is a convergent pair
    spec50 = ModelSpec(epsilon=0.02, mu=0, eta=0, alpha=0.3, forcing=qp_forcing(1.0, 1.0, kmax=50))
    sing = solve_singularities(0.3, prec=128)
    best, best_k = mpf(0), None
    with mp.workprec(128):
        for k1 in range(-50, 51):
            for k2 in range(-50, 51):
                if (k1, k2) == (0, 0) or small_divisor((k1, k2), 64) <= 0:
                    continue
                a = harmonic_amplitude_closed((k1, k2), spec50, singular=sing, prec=128)
                if a > best:
                    best, best_k = a, (k1, k2)
    fib = set()
    for p, q in golden_convergents(12):
        fib.add((p, -q))
        fib.add((-p, q))
    assert best_k in fib


def test_leading_harmonic_and_boundary():
    spec = _spec(eps=0.05)
    lead = leading_harmonic(spec, kmax=32, prec=128)
    fib = set()
    for p, q in golden_convergents(12):
        fib.add((p, -q))
        fib.add((-p, q))
    assert lead.k in fib
    # insufficient kmax puts the argmax on the boundary and raises
    tiny = ModelSpec(epsilon=0.002, mu=0, eta=0, alpha=0.3, forcing=FORCING)
    with pytest.raises(ValueError):
        leading_harmonic(tiny, kmax=3, prec=128)


def test_series_vs_quadrature_and_translation():
    spec = _spec()
    coeffs = melnikov_qp_coefficients(spec, kmax=32, prec=128)
    t1, t2 = mpf(0.7), mpf(1.3)
    v1, tail = melnikov_qp_eval(0, t1, t2, spec, prec=128, coefficients=coeffs)
    v2, qerr = melnikov_qp_eval(0, t1, t2, spec, prec=128, mode="quadrature")
    assert abs(v1 - v2) <= abs(v2) * mpf("1e-6") + tail + qerr
    with mp.workprec(160):
        g = golden_mean(160)
        u, eps = mpf("0.4"), mpf(0.3)
        w1, _ = melnikov_qp_eval(u, t1, t2, spec, prec=128, coefficients=coeffs)
        w2, _ = melnikov_qp_eval(0, t1 - u / eps, t2 - g * u / eps, spec,
                                 prec=128, coefficients=coeffs)
        assert abs(w1 - w2) < mpf(2) ** -80 * max(1, abs(w1))


def test_qp_halves_sum():
    spec = _spec()
    full, qerr = melnikov_qp_eval(0, 0.7, 1.3, spec, prec=128, mode="quadrature")
    Ms = melnikov_qp_half(0, 0.7, 1.3, spec, "stable", prec=128)
    Mu = melnikov_qp_half(0, 0.7, 1.3, spec, "unstable", prec=128)
    assert abs((Ms - Mu) - full) <= 3 * qerr + mpf("1e-20")


def test_qp_mean_equals_delta1_times_f0():
    # the forcing mean leaks a constant term F^[0]*delta_1 into M
    spec = _spec()
    _, mean, _ = melnikov_qp_coefficients(spec, kmax=32, prec=128)
    with mp.workprec(128):
        d1 = solve_singularities(0.3, prec=128).delta1.value
        f0 = spec.forcing.fourier((0, 0))
        assert abs(mean - (f0 * d1).real) < mpf("1e-25")


def test_envelope_bounds_bracket():
    spec = _spec(eps=0.15)
    lo, hi, info = envelope_bounds(spec, prec=128)
    sup, tail, _ = sup_melnikov_qp(spec, prec=128)
    assert lo <= sup <= hi
    assert info["C1"] > 0


def test_qp_narrow_bounds_polynomial_scaling():
    vals = []
    for eps in (0.15, 0.12, 0.09):
        spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=1 - eps ** 3, forcing=FORCING)
        _, _, info = qp_narrow_bounds(spec, C=1.0, r=3.0, prec=128)
        with mp.workprec(128):
            vals.append(info["sup"] * mpf(eps) ** mpf("4.5"))
    ratio = max(vals) / min(vals)
    assert ratio < 4


def test_qp_narrow_bounds_exponential_r1():
    # r = 1: exponential with Im rho_- ~ sqrt(eps C)
    eps = 0.1
    spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=1 - eps, forcing=FORCING)
    lo, hi, info = qp_narrow_bounds(spec, C=1.0, r=1.0, prec=128)
    sing = solve_singularities(1 - eps, prec=128)
    with mp.workprec(128):
        assert abs(sing.rho_minus.value.imag - mpmath.sqrt(mpf(eps))) < mpf(eps)
    assert lo <= info["sup"] <= hi


def test_sup_independent_of_mu():
    # M is the mu-free kernel: the supremum cannot depend on mu
    s1, _, _ = sup_melnikov_qp(_spec(mu=0.0), prec=128)
    s2, _, _ = sup_melnikov_qp(_spec(mu=0.5, eta=2.0), prec=128)
    assert s1 == s2


def test_leading_harmonic_near_continuous_optimum():
    # the winning |k.omega| = gamma^-m sits within one convergent step of the
    # continuous trade-off minimizer between spectral decay and the
    # exponential rate; this is the mechanism behind the sqrt(1/eps) exponent
    with mp.workprec(128):
        g = golden_mean(128)
        sing = solve_singularities(0.3, prec=128)
        im = sing.rho_minus.value.imag
        for eps in (0.1, 0.05, 0.02):
            spec = ModelSpec(epsilon=eps, mu=0, eta=0, alpha=0.3, forcing=FORCING)
            lead = leading_harmonic(spec, kmax=32, prec=128)
            t_star = mpmath.sqrt(mpmath.sqrt(5) * im / (mpf(eps) * (g + 1)))  # r1 = r2 = 1
            m_star = mpmath.log(t_star) / mpmath.log(g)
            m_lead = -mpmath.log(abs(lead.small_divisor)) / mpmath.log(g)
            assert abs(m_lead - m_star) <= mpf("1.5")
