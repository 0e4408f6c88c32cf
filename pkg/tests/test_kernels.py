import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ainf import _gfkernel_py, linalg

try:
    from ainf import _gfkernel
except ImportError:  # pragma: no cover - depends on the build
    _gfkernel = None

needs_ext = pytest.mark.skipif(_gfkernel is None, reason="compiled kernel not built")


def naive_rank(m, p):
    """Independent oracle: Gaussian elimination with Python ints."""
    a = [[int(x) % p for x in row] for row in m]
    rank = 0
    cols = len(a[0]) if a else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(a)) if a[r][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        a[rank] = [x * inv % p for x in a[rank]]
        for r in range(len(a)):
            if r != rank and a[r][c]:
                f = a[r][c]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def naive_log_order(rows, p, n):
    """log_p of the subgroup order, by closing the span under addition."""
    mod = p**n
    span = {tuple([0] * len(rows[0]))}
    for r in rows:
        new = set(span)
        for s in span:
            cur = s
            for _ in range(mod):
                cur = tuple((a + b) % mod for a, b in zip(cur, r))
                new.add(cur)
        span = new
    size, k = len(span), 0
    while size > 1:
        size //= p
        k += 1
    return k


matrices = st.tuples(st.integers(1, 6), st.integers(1, 6), st.sampled_from([2, 3, 5]), st.integers(0, 2**32))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_against_oracle(args):
    r, c, p, seed = args
    m = np.random.default_rng(seed).integers(0, p, size=(r, c))
    assert linalg.rank(m, p) == naive_rank(m.tolist(), p)
    assert linalg.rank(m, p) == len(linalg.rref(m, p, kernel=_gfkernel_py)[1])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**32))
def test_zpn_log_order_against_oracle(r, c, seed):
    p, n = 2, 2
    m = np.random.default_rng(seed).integers(0, p**n, size=(r, c))
    expected = naive_log_order(m.tolist(), p, n)
    assert linalg.zpn_log_order(m, p, n) == expected
    assert linalg.zpn_log_order(m, p, n, kernel=_gfkernel_py) == expected


@needs_ext
@pytest.mark.parametrize("p", [2, 3, 7])
def test_backends_agree(p):
    rng = np.random.default_rng(p)
    for shape in [(5, 9), (40, 30), (64, 64)]:
        m = rng.integers(0, p, size=shape)
        ra, pa = linalg.rref(m, p, kernel=_gfkernel)
        rb, pb = linalg.rref(m, p, kernel=_gfkernel_py)
        assert pa == pb and np.array_equal(ra, rb)
        z = rng.integers(0, p**3, size=shape)
        assert (linalg.zpn_log_order(z, p, 3, kernel=_gfkernel)
                == linalg.zpn_log_order(z, p, 3, kernel=_gfkernel_py))


def test_nullspace_and_solve():
    m = np.array([[1, 1, 0], [0, 1, 1]])
    ns = linalg.nullspace(m, 2)
    assert ns.shape == (1, 3) and not ((m @ ns.T) % 2).any()
    x = linalg.solve(m, [1, 0], 2)
    assert np.array_equal((m @ x) % 2, [1, 0])
    assert linalg.solve(np.array([[0, 0]]), [1], 2) is None


def test_pure_python_switch():
    env = dict(os.environ, AINF_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from ainf import linalg; print(linalg.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
    if _gfkernel is not None:
        assert linalg.BACKEND == "cython"


def test_fallback_backend_runs_a_check():
    env = dict(os.environ, AINF_PURE_PYTHON="1")
    code = ("from ainf.checks import run_check; "
            "print(run_check('frobenius-iso', {'instance': 'laurent'})['status'])")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "pass", out.stderr
