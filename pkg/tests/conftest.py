import mpmath
import pytest


@pytest.fixture(autouse=True)
def _reset_mpmath():
    # library code must not depend on (or leak) the global working precision
    mpmath.mp.dps = 15
    yield
    mpmath.mp.dps = 15


def rel_err(a, b):
    with mpmath.workdps(80):
        return abs(mpmath.mpmathify(a) / mpmath.mpmathify(b) - 1)
