from fractions import Fraction

import numpy as np
import pytest

from ainf.fpring import PrecisionBudget, RingPresentation
from ainf.witt import WittRing


def line_ring(p=2, n=2, D=Fraction(4), N=2, variables=("x",), **kw):
    return RingPresentation(p, list(variables), budget=PrecisionBudget(n=n, D=D, N=N), **kw)


def witt_ring(p=2, n=2, D=Fraction(4), N=2, mode="uniform", WD=None, **kw):
    return WittRing(line_ring(p, n, D, N, **kw), n, mode, WD)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
