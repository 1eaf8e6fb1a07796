import mpmath
import pytest


@pytest.fixture(autouse=True)
def high_ambient_precision():
    """Assertions routinely subtract close multiprecision values; run every
    test at a 240-bit ambient precision so bare arithmetic in test bodies
    does not round results back to double."""
    old = mpmath.mp.prec
    mpmath.mp.prec = 240
    yield
    mpmath.mp.prec = old
