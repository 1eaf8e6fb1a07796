import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpc, mpf

from splitlab.mpnum import (
    PrecisionComplex,
    PrecisionScalar,
    arcsinh_branch,
    bits_for_rate,
    default_tol,
    find_root,
    quad_finite,
    quad_semi_infinite,
    residue_double_pole,
)


def test_precision_scalar_max_propagation():
    a = PrecisionScalar("1.1", 128)
    b = PrecisionScalar("2.3", 192)
    for op in (lambda: a + b, lambda: a * b, lambda: a - b, lambda: a / b):
        assert op().precision == 192
    assert (a + 1).precision == 128
    assert PrecisionScalar("1", 10).precision == 53  # floor at 53 bits


def test_precision_complex_invariants():
    z = PrecisionComplex(mpc("1.25", "-0.75"), 160)
    assert z.conjugate().conjugate() == z
    with mp.workprec(160):
        assert abs(z.abs2().value - (mpf("1.25") ** 2 + mpf("0.75") ** 2)) == 0
    assert (z * z.conjugate()).precision == 160


@pytest.mark.parametrize("z,expected", [
    (1, "0.88137358701954302523"),
    (mpc(0, 1), None),  # i*pi/2 limit
])
def test_arcsinh_principal_examples(z, expected):
    w = arcsinh_branch(z, "principal", prec=128).value
    with mp.workprec(128):
        if expected is None:
            assert abs(w - mpc(0, mp.pi / 2)) < mpf(2) ** -100
        else:
            assert abs(w - mpf(expected)) < mpf(2) ** -60


def test_arcsinh_branch_back_substitution():
    with mp.workprec(256):
        z = mpc(0.5, 0) + 1j * mpmath.sqrt(mpf(3)) / 2
        for branch in ("principal", "shifted"):
            w = arcsinh_branch(z, branch, prec=256).value
            assert abs(mpmath.sinh(w) - z) < mpf(2) ** -240
        wp = arcsinh_branch(z, "principal", prec=256).value
        assert 0 < wp.imag < mp.pi / 2
        ws = arcsinh_branch(z, "shifted", prec=256).value
        assert abs(ws - (mpc(0, mp.pi) - wp)) == 0


def test_arcsinh_unit_circle_branch():
    # image of alpha + i*sqrt(1-alpha^2) sits in the open quarter strip
    with mp.workprec(128):
        for alpha in ("0.999", "0.5", "1e-8"):
            a = mpf(alpha)
            w = arcsinh_branch(a + 1j * mpmath.sqrt(1 - a ** 2), "principal", prec=128).value
            assert 0 < w.imag < mp.pi / 2


def test_quad_finite_examples():
    r = quad_finite(mpmath.sin, 0, mpmath.pi, prec=128)
    with mp.workprec(128):
        assert abs(r.value - 2) <= mpf("1e-12") * 2 + mpf(2) ** -112
    r = quad_finite(lambda s: 1, 0, 1, prec=128)
    assert abs(r.value - 1) < mpf(2) ** -100
    r = quad_finite(lambda s: 1 / mpmath.cosh(s) ** 2, -10, 10, prec=128)
    with mp.workprec(128):
        assert abs(r.value - 2 * mpmath.tanh(10)) < mpf("1e-20")
    assert r.error_estimate >= 0
    assert r.evaluations > 0


def test_quad_finite_split_additivity():
    f = lambda s: mpmath.exp(-s) * mpmath.sin(3 * s)
    whole = quad_finite(f, 0, 2, prec=128)
    left = quad_finite(f, 0, mpf("0.7"), prec=128)
    right = quad_finite(f, mpf("0.7"), 2, prec=128)
    assert abs(whole.value - (left.value + right.value)) <= (
        whole.error_estimate + left.error_estimate + right.error_estimate + mpf(2) ** -100
    )


def test_quad_finite_rejects_sub_floor_tol():
    with pytest.raises(ValueError):
        quad_finite(mpmath.sin, 0, 1, tol=mpf(2) ** -200, prec=128)


def test_quad_semi_infinite_examples():
    r = quad_semi_infinite(lambda s: mpmath.exp(-2 * s), "+inf", decay_rate=2, prec=128)
    assert abs(r.value - mpf("0.5")) <= r.error_estimate + mpf("1e-12")
    r = quad_semi_infinite(lambda s: mpmath.exp(2 * s), "-inf", decay_rate=2, prec=128)
    assert abs(r.value - mpf("0.5")) <= r.error_estimate + mpf("1e-12")
    r = quad_semi_infinite(lambda s: mpmath.exp(-2 * s) * mpmath.cos(s), "+inf", decay_rate=2, prec=128)
    assert abs(r.value - mpf(2) / 5) <= r.error_estimate + mpf("1e-12")


def test_quad_semi_infinite_rejects_bad_rate():
    with pytest.raises(ValueError):
        quad_semi_infinite(lambda s: mpmath.exp(-s), "+inf", decay_rate=0, prec=128)
    with pytest.raises(ValueError):
        quad_semi_infinite(lambda s: mpmath.exp(-s), "sideways", decay_rate=1, prec=128)


def test_residue_double_pole_examples():
    r = residue_double_pole(lambda w: 1, lambda w: w, 0, 0, prec=128)
    assert abs(r.value) < mpf(2) ** -80
    r = residue_double_pole(lambda w: 1, lambda w: w, 0, 1, prec=128)
    assert abs(r.value - mpc(0, 1)) < mpf(2) ** -80


def test_residue_linearity_in_numerator():
    # Res is linear in N: compare N = a*N1 + b*N2 against the combination
    D = lambda w: mpmath.sin(w)
    N1 = lambda w: mpmath.exp(w)
    N2 = lambda w: 1 + w ** 2
    a, b = mpf("1.7"), mpf("-0.4")
    combo = residue_double_pole(lambda w: a * N1(w) + b * N2(w), D, 0, mpf("0.5"), prec=160).value
    parts = (
        a * residue_double_pole(N1, D, 0, mpf("0.5"), prec=160).value
        + b * residue_double_pole(N2, D, 0, mpf("0.5"), prec=160).value
    )
    assert abs(combo - parts) < mpf(2) ** -120 * max(1, abs(combo))


def test_residue_degenerate_pole_rejected():
    from splitlab.mpnum import DegeneratePoleError

    with pytest.raises(DegeneratePoleError):
        residue_double_pole(lambda w: 1, lambda w: w ** 2, 0, 1, prec=128)
    with pytest.raises(DegeneratePoleError):
        # D(rho) != 0: not a pole at all
        residue_double_pole(lambda w: 1, lambda w: 1 + w, 1, 0, prec=128)


def test_find_root_examples():
    with mp.workprec(200):
        r = find_root(lambda x: x ** 2 - 2, 1.5, prec=160)
        assert abs(r.value - mpmath.sqrt(2)) < mpf(2) ** -140
        r = find_root(lambda x: mpmath.sinh(x) - 1, 0.9, prec=160)
        assert abs(r.value - mpmath.log(1 + mpmath.sqrt(2))) < mpf(2) ** -140
        r = find_root(lambda x: mpmath.cos(x), 1.5, prec=160, bracket=(1, 2))
        assert abs(r.value - mp.pi / 2) < mpf(2) ** -140


def test_find_root_divergence_reported():
    from splitlab.mpnum import RootFindError

    with pytest.raises(RootFindError):
        find_root(lambda x: mpmath.exp(x) + 1, 0.0, prec=128, max_iter=12)


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=-1.4, max_value=1.4))
def test_arcsinh_refinement_stability(re, im):
    # doubling the precision moves the result by less than 2^(-P+20) relative
    z = mpc(re, im)
    w1 = arcsinh_branch(z, "principal", prec=128).value
    w2 = arcsinh_branch(z, "principal", prec=256).value
    with mp.workprec(256):
        assert abs(w1 - w2) <= mpf(2) ** (-108) * max(1, abs(w2))


def test_quad_refinement_stability():
    f = lambda s: mpmath.exp(-s * s) * mpmath.cos(2 * s)
    v1 = quad_finite(f, -3, 3, prec=128).value
    v2 = quad_finite(f, -3, 3, prec=256).value
    with mp.workprec(256):
        assert abs(v1 - v2) <= mpf(2) ** -100 * abs(v2)


def test_bits_for_rate_and_tol():
    assert bits_for_rate(0) == 128
    assert bits_for_rate(100) == int(mpmath.ceil(100 / mpmath.log(2))) + 64
    assert default_tol(128) == mpf(10) ** -12
    assert default_tol(256) == mpf(10) ** -25
