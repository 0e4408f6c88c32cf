# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(p) row reduction. Mirrors ``_gfkernel_py`` exactly."""

cdef long long _inv(long long a, long long p):
    cdef long long t = 0, nt = 1, r = p, nr = a % p, q, tmp
    while nr != 0:
        q = r // nr
        tmp = t - q * nt
        t = nt
        nt = tmp
        tmp = r - q * nr
        r = nr
        nr = tmp
    if t < 0:
        t += p
    return t


def rref_inplace(long long[:, ::1] m, long long p):
    """Reduce ``m`` (entries in [0, p)) to reduced row echelon form in place.

    Returns the list of pivot columns.
    """
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef long long inv, f, tmp
    pivots = []
    for c in range(cols):
        if r >= rows:
            break
        piv = -1
        for i in range(r, rows):
            if m[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, cols):
                tmp = m[r, j]
                m[r, j] = m[piv, j]
                m[piv, j] = tmp
        inv = _inv(m[r, c], p)
        if inv != 1:
            for j in range(c, cols):
                m[r, j] = (m[r, j] * inv) % p
        for i in range(rows):
            if i == r:
                continue
            f = m[i, c]
            if f == 0:
                continue
            f = p - f
            for j in range(c, cols):
                if m[r, j] != 0:
                    m[i, j] = (m[i, j] + f * m[r, j]) % p
        pivots.append(c)
        r += 1
    return pivots


cdef long long _val(long long x, long long p, long long n):
    cdef long long v = 0
    if x == 0:
        return n
    while x % p == 0:
        x //= p
        v += 1
    return v


def zpn_pivot_valuations(long long[:, ::1] m, long long p, long long n):
    """Diagonalize ``m`` over Z/p^n in place by full pivoting; return pivot valuations."""
    cdef Py_ssize_t rows = m.shape[0], cols = m.shape[1]
    cdef Py_ssize_t r = 0, i, j, bi, bj, k
    cdef long long mod = 1, best, v, pv, unit, inv, f, tmp
    for k in range(n):
        mod *= p
    vals = []
    while r < rows and r < cols:
        best = n
        bi = -1
        bj = -1
        for i in range(r, rows):
            for j in range(r, cols):
                if m[i, j] != 0:
                    v = _val(m[i, j], p, n)
                    if v < best:
                        best = v
                        bi = i
                        bj = j
                        if v == 0:
                            break
            if best == 0:
                break
        if bi < 0:
            break
        if bi != r:
            for j in range(cols):
                tmp = m[r, j]
                m[r, j] = m[bi, j]
                m[bi, j] = tmp
        if bj != r:
            for i in range(rows):
                tmp = m[i, r]
                m[i, r] = m[i, bj]
                m[i, bj] = tmp
        pv = 1
        for k in range(best):
            pv *= p
        unit = m[r, r] // pv
        inv = _inv(unit, mod)
        for j in range(cols):
            m[r, j] = (m[r, j] * inv) % mod
        for i in range(rows):
            if i == r or m[i, r] == 0:
                continue
            f = m[i, r] // pv
            for j in range(r, cols):
                if m[r, j] != 0:
                    m[i, j] = ((m[i, j] - f * m[r, j]) % mod + mod) % mod
        for j in range(r + 1, cols):
            m[r, j] = 0
        vals.append(best)
        r += 1
    return vals
