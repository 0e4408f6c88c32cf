"""Pure numpy GF(p) row reduction, used when the compiled kernel is absent."""
import numpy as np


def rref_inplace(m, p):
    """Reduce ``m`` (int64, entries in [0, p)) to RREF in place; return pivots."""
    rows, cols = m.shape
    r = 0
    pivots = []
    for c in range(cols):
        if r >= rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv], c:] = m[[piv, r], c:]
        inv = pow(int(m[r, c]), -1, p)
        if inv != 1:
            m[r, c:] = (m[r, c:] * inv) % p
        col = m[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            m[hit, c:] = (m[hit, c:] - np.outer(col[hit], m[r, c:])) % p
        pivots.append(c)
        r += 1
    return pivots


def zpn_pivot_valuations(m, p, n):
    """Diagonalize ``m`` over Z/p^n in place by full pivoting.

    Returns the p-adic valuations of the pivots; the row span has order
    ``prod p^(n - v)``.
    """
    p, n = int(p), int(n)
    mod = p**n
    table = np.full(mod, n, dtype=np.int64)
    for x in range(1, mod):
        v, y = 0, x
        while y % p == 0:
            y //= p
            v += 1
        table[x] = v
    rows, cols = m.shape
    vals = []
    r = 0
    while r < rows and r < cols:
        sub = table[m[r:, r:]]
        flat = int(np.argmin(sub))
        i, j = divmod(flat, sub.shape[1])
        v = int(sub[i, j])
        if v >= n:
            break
        i += r
        j += r
        if i != r:
            m[[r, i], :] = m[[i, r], :]
        if j != r:
            m[:, [r, j]] = m[:, [j, r]]
        unit = int(m[r, r]) // p**v
        inv = pow(unit, -1, mod)
        m[r, :] = (m[r, :] * inv) % mod
        col = m[:, r] // p**v
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            m[hit, :] = (m[hit, :] - np.outer(col[hit], m[r, :])) % mod
        m[r, r + 1:] = 0
        vals.append(v)
        r += 1
    return vals
