from __future__ import annotations

import mpmath as mp
import pytest
from hypothesis import HealthCheck, settings

from pfq import ComplexEP

mp.mp.dps = 50

# compiled kernels make the first example slow; disable per-example deadlines
settings.register_profile(
    "pfq", deadline=None, max_examples=100, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("pfq")


def to_mp(z) -> mp.mpc:
    """Exact conversion of a double-double value to mpmath."""
    z = ComplexEP.coerce(z)
    re = mp.mpf(z.re[0]) + mp.mpf(z.re[1])
    im = mp.mpf(z.im[0]) + mp.mpf(z.im[1])
    return mp.mpc(re, im)


def mp_rel(value, reference) -> float:
    ref = mp.mpc(reference)
    diff = abs(to_mp(value) - ref)
    return float(diff / max(abs(ref), mp.mpf("1e-300")))


@pytest.fixture
def mpctx():
    with mp.workdps(50):
        yield mp
