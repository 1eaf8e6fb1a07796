import mpmath
import pytest
from mpmath import mp, mpf

from splitlab.singular import delta_constants, solve_singularities, strip_width


def test_root_quality_and_layout():
    with mp.workprec(300):
        for alpha in ("0.1", "0.5", "0.9"):
            a = mpf(alpha)
            s = solve_singularities(a, prec=256)
            rm, rp = s.rho_minus.value, s.rho_plus.value
            target = a + 1j * mpmath.sqrt(1 - a ** 2)
            assert abs(mpmath.sinh(rm) - target) <= mpf(2) ** -248
            assert abs(rp - (1j * mp.pi - rm)) < mpf(2) ** -250
            assert 0 < rm.imag < mp.pi / 2 < rp.imag < mp.pi
            # sinh(i pi - z) = sinh z identity
            assert abs(mpmath.sinh(rp) - mpmath.sinh(rm)) < mpf(2) ** -240
            # cosh^2 = 2 alpha sinh on the solution set
            assert abs(mpmath.cosh(rm) ** 2 - 2 * a * mpmath.sinh(rm)) < mpf(2) ** -240


def test_expansions_small_alpha():
    with mp.workprec(200):
        for alpha in ("1e-4", "1e-6", "1e-8"):
            a = mpf(alpha)
            s = solve_singularities(a, prec=192)
            lead_m = 1j * mp.pi / 2 - (-1 + 1j) * mpmath.sqrt(a)
            lead_p = 1j * mp.pi / 2 + (-1 + 1j) * mpmath.sqrt(a)
            assert abs(s.rho_minus.value - lead_m) <= a
            assert abs(s.rho_plus.value - lead_p) <= a


def test_expansion_alpha_near_one():
    with mp.workprec(200):
        a = 1 - mpf("1e-6")
        s = solve_singularities(a, prec=192)
        lead = mpmath.log(1 + mpmath.sqrt(2)) + 1j * mpf("1e-3")
        assert abs(s.rho_minus.value - lead) <= mpf("1e-6")


def test_im_rho_monotone_in_alpha():
    with mp.workprec(128):
        vals = [solve_singularities(mpf(a) / 20, prec=128).rho_minus.value.imag for a in range(1, 20)]
        assert all(vals[i] > vals[i + 1] for i in range(len(vals) - 1))


def test_strip_width_examples():
    with mp.workprec(128):
        assert strip_width(1, 128).value == 0
        assert abs(strip_width(mpf("0.6"), 128).value - mpmath.log(3)) < mpf(2) ** -100
        w = strip_width(mpf("1e-4"), 128).value
        assert abs(w - mpmath.log(2 / mpf("1e-4"))) < mpf("1e-8")
    with pytest.raises(ValueError):
        strip_width(0)


def test_delta_constants():
    with mp.workprec(300):
        # delta_1 = 2 pi alpha/(1-alpha^2)^{3/2} exactly
        for alpha in ("0.2", "0.5", "0.85"):
            a = mpf(alpha)
            d1, d2 = delta_constants(a, prec=256)
            closed = 2 * mp.pi * a / (1 - a ** 2) ** mpf("1.5")
            assert abs(d1.value - closed) < mpf(2) ** -230 * closed
        a = mpf("0.5")
        d1, _ = delta_constants(a, prec=128)
        assert abs(d1.value - mpf("4.8368")) < mpf("1e-3")
        # delta_1 -> 0 as alpha -> 0
        d1, _ = delta_constants(mpf("1e-8"), prec=128)
        assert abs(d1.value) < mpf("1e-7")


def test_delta2_zero_limit_modulus_and_phase():
    with mp.workprec(200):
        target = mp.pi * mpmath.sqrt(2)
        for alpha in ("1e-4", "1e-6"):
            a = mpf(alpha)
            _, d2 = delta_constants(a, prec=160)
            v = mpmath.sqrt(a) * d2.value
            assert abs(abs(v) - target) <= 5 * mpmath.sqrt(a)
            # the principal-branch limit has phase +pi/4 (recorded, not the
            # printed sign convention; only the modulus enters amplitudes)
            assert abs(mpmath.arg(v) - mp.pi / 4) < mpf("0.01")


def test_alternative_variant_heights():
    with mp.workprec(160):
        s = solve_singularities(0.4, variant="alternative", prec=128)
        assert abs(s.rho_minus.value.imag - mp.pi / 2) < mpf(2) ** -100
        assert abs(s.rho_plus.value.imag - mp.pi / 2) < mpf(2) ** -100
        a = mpf(0.4)  # binary float, matching the ModelSpec field
        off = mpmath.asinh(mpmath.sqrt(2 * a / (1 - a)))
        assert abs(s.rho_plus.value.real - off) < mpf(2) ** -100
        assert s.delta1 is None and s.delta2 is None


def test_alpha_range_validation():
    for bad in (0, 1, -0.5, 1.2):
        with pytest.raises(ValueError):
            solve_singularities(bad, prec=128)
