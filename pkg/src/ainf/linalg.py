"""Exact linear algebra over F_p.

The elimination kernel is compiled (Cython) when available and falls back to
a numpy implementation otherwise. ``BACKEND`` names the one in use; set
``AINF_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _gfkernel_py

if os.environ.get("AINF_PURE_PYTHON"):
    _kernel = _gfkernel_py
    BACKEND = "python"
else:
    try:
        from . import _gfkernel as _kernel
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _kernel = _gfkernel_py
        BACKEND = "python"


def rref(m, p, kernel=None):
    """Return ``(R, pivots)`` with ``R`` the reduced row echelon form of ``m`` mod p."""
    k = kernel or _kernel
    a = np.ascontiguousarray(np.asarray(m, dtype=np.int64) % p)
    if a.size == 0:
        return a, []
    piv = k.rref_inplace(a, p)
    return a[: len(piv)], list(piv)


def rank(m, p):
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def nullspace(m, p):
    """Basis (as rows) of ``{v : m @ v = 0}``."""
    m = np.asarray(m, dtype=np.int64)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=np.int64)
    r, piv = rref(m, p)
    free = [c for c in range(cols) if c not in set(piv)]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(piv):
            basis[k, pc] = (-r[i, fc]) % p
    return basis


def solve(a, b, p):
    """One solution ``x`` of ``a @ x = b`` over F_p, or ``None``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    aug = np.hstack([a, b])
    r, piv = rref(aug, p)
    n = a.shape[1]
    if n in piv:
        return None
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = r[i, n]
    return x


class EchelonBasis:
    """Row-reduced basis of a subspace, for repeated reduction of vectors.

    Reduction of ``v`` returns the unique representative of ``v`` modulo the
    span whose pivot coordinates vanish, which serves as a normal form.
    """

    def __init__(self, rows, p, ncols):
        self.p = p
        self.ncols = ncols
        if len(rows):
            self.rows, self.pivots = rref(np.asarray(rows), p)
        else:
            self.rows, self.pivots = np.zeros((0, ncols), dtype=np.int64), []

    @property
    def dim(self):
        return len(self.pivots)

    def reduce(self, v):
        v = np.asarray(v, dtype=np.int64) % self.p
        v = v.copy()
        for row, c in zip(self.rows, self.pivots):
            if v[c]:
                v = (v - v[c] * row) % self.p
        return v

    def contains(self, v):
        return not self.reduce(v).any()


def zpn_log_order(rows, p, n, kernel=None):
    """``log_p`` of the order of the subgroup of ``(Z/p^n)^m`` spanned by ``rows``."""
    k = kernel or _kernel
    a = np.ascontiguousarray(np.asarray(rows, dtype=np.int64) % p**n)
    if a.size == 0:
        return 0
    return sum(n - v for v in k.zpn_pivot_valuations(a, p, n))
