"""Acceptance battery, one test per criterion.

Each test runs the corresponding check from splitlab.acceptance (which
prints its own PASS/FAIL line) and asserts the verdict.

Two criteria quote printed constants that are inconsistent with the exact
residue content of the same source at the narrow-strip r = 2 boundary
(the printed prefactor misses a (1 + sqrt C) factor, and the stated
d~ = 2*sqrt2*D identity is off by a factor 4 against the generating-function
chain y = dT/du / y0).  Those two tests fail by construction and are kept
red on purpose; the companion checks (narrow r = 3, and the oracle against
the exact residue prediction) pass and isolate the defect.  Analysis in the
project notes.

The hour-scale QP oracle criterion runs only with SPLITLAB_HEAVY=1.
"""

import os

import pytest

from splitlab import acceptance as acc

heavy = pytest.mark.skipif(
    os.environ.get("SPLITLAB_HEAVY", "0") != "1",
    reason="hour-scale direct-integration check; set SPLITLAB_HEAVY=1",
)


def _run(check):
    rec = check()
    assert rec["passed"], rec["detail"]


def test_a1_residue_engine_reproduces_closed_forms():
    _run(acc.check_a1_residue_closed_forms)


def test_a2_method_triangle():
    _run(acc.check_a2_method_triangle)


def test_a3_wide_strip_formula():
    _run(acc.check_a3_wide_strip)


def test_a4_delta2_limit_modulus():
    _run(acc.check_a4_delta2_limit)


def test_a5_narrow_prefactor_r2_printed_constant():
    # known-defective printed constant; expected red (see module docstring)
    _run(acc.check_a5_narrow_prefactor_r2)


def test_a5_narrow_prefactor_r3():
    _run(acc.check_a5_narrow_prefactor_r3)


def test_a6_melnikov_validity_oracle():
    _run(acc.check_a6_melnikov_validity)


def test_a7_rate_regression_melnikov():
    _run(acc.check_a7_rate_regression)


def test_a7_rate_regression_oracle():
    _run(acc.check_a7_oracle_rate)


def test_a8_nonexponential_printed_constant():
    # known-defective printed constant; expected red (see module docstring)
    _run(acc.check_a8_nonexponential_oracle)


def test_a8_companion_exact_prediction():
    _run(acc.check_a8_nonexponential_exact)


def test_a9_qp_envelope():
    _run(acc.check_a9_qp_envelope)


@heavy
def test_a10_qp_validity_oracle():
    _run(acc.check_a10_qp_validity)


def test_a11_structural_invariants():
    _run(acc.check_a11_structural)
