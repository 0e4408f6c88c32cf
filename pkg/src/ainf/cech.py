"""Finite-stage Cech complexes for two-piece coverings.

A truncated Witt ring ``C = W_n(R)`` over a finite relation-free digit ring
is a finite abelian p-group.  It decomposes as a direct sum of cyclic groups
generated by the elements ``V^k[m]`` where ``m`` is a monomial that is not a
p-th power on the exponent grid (or ``k = 0``): multiplying by p moves along
the chain ``V^k[m] -> V^(k+1)[m^p] -> ...`` until the truncation kills it.
Coordinates in this decomposition are additive, so every C-linear map is an
integer matrix and subgroup orders come from elimination over ``Z/p^n``.

All sizes below are ``log_p`` of group orders ("F_p-length").
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import BadWitness, NotAUnit, ResourceBound, UnsupportedCovering
from .fpring import PerfPoly, frac_str, ideal_membership

MAX_DIM = 2000


def teich_int(c, p, n):
    """Integer representative of the Teichmueller lift of ``c in F_p`` modulo ``p^n``."""
    return pow(c, p ** (n - 1), p**n) if c % p else 0


class LinearizedRing:
    """Additive coordinates on a finite truncated Witt ring ``W``."""

    def __init__(self, W, max_dim=None):
        max_dim = MAX_DIM if max_dim is None else max_dim
        ring = W.ring
        if not ring.finite or ring.relations:
            raise ValueError("linearize needs a finite digit ring without relations")
        self.W = W
        self.p, self.n = W.p, W.n
        p = self.p
        self.chains = []
        self.chain_of = {}
        for k in range(W.n):
            cap = W.caps[k]
            if not cap:
                continue
            for m in ring.basis(cap):
                if k > 0 and all(e % p == 0 for e in m):
                    continue
                idx = len(self.chains)
                length = 0
                cur = m
                for j in range(k, W.n):
                    if W.caps[j] and ring.degree_units(cur) < W.caps[j] * ring.q:
                        self.chain_of[(j, cur)] = (idx, j - k)
                        length += 1
                        cur = tuple(e * p for e in cur)
                    else:
                        break
                self.chains.append((k, m, length))
        self.orders = np.array([p**c[2] for c in self.chains], dtype=np.int64)
        self.scale = np.array([p ** (self.n - c[2]) for c in self.chains], dtype=np.int64)
        self.dim = int(sum(c[2] for c in self.chains))
        if self.dim > max_dim:
            raise ResourceBound(f"linearization dimension {self.dim} > {max_dim}")
        self.size = len(self.chains)
        self._gens = None

    def labels(self):
        out = []
        for k, m, length in self.chains:
            mono = PerfPoly(self.W.ring, {m: 1}, None)
            out.append(f"V^{k}[{mono}] (order p^{length})")
        return out

    def generator(self, i):
        k, m, _ = self.chains[i]
        digits = [self.W.ring.zero() for _ in range(self.n)]
        digits[k] = PerfPoly(self.W.ring, {m: 1}, None)
        return self.W.vec(digits)

    @property
    def generators(self):
        if self._gens is None:
            self._gens = [self.generator(i) for i in range(self.size)]
        return self._gens

    def to_coords(self, x):
        p, n = self.p, self.n
        out = np.zeros(self.size, dtype=np.int64)
        r = x
        for k in range(n):
            a = r.digits[k]
            if a.is_zero():
                continue
            s = self.W.zero()
            for m, c in a.terms.items():
                idx, steps = self.chain_of[(k, m)]
                out[idx] += teich_int(c, p, n) * p**steps
                digits = [self.W.ring.zero() for _ in range(n)]
                digits[k] = PerfPoly(self.W.ring, {m: c}, None)
                s = s + self.W.vec(digits)
            r = r - s
        return out % self.orders

    def from_coords(self, v):
        out = self.W.zero()
        for i, c in enumerate(np.asarray(v) % self.orders):
            if c:
                out = out + self.W.scalar(int(c)) * self.generators[i]
        return out

    def mult_matrix(self, c):
        """Matrix (rows = generators) of multiplication by ``c``."""
        return np.array([self.to_coords(c * g) for g in self.generators], dtype=np.int64)

    def embed(self, rows, blocks=1):
        """Scale coordinates into ``(Z/p^n)^m`` so spans can be measured."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.size * blocks)
        return (rows * np.tile(self.scale, blocks)) % self.p**self.n

    def cross_check(self, rng, samples=50, depth=None):
        """Additivity and multiplication matrices against structured arithmetic."""
        bad = 0
        for _ in range(samples):
            a = self.W.random_element(rng, depth=depth)
            b = self.W.random_element(rng, depth=depth)
            ca, cb = self.to_coords(a), self.to_coords(b)
            if not np.array_equal(self.to_coords(a + b), (ca + cb) % self.orders):
                bad += 1
            prod = (cb @ self.mult_matrix(a)) % self.orders
            if not np.array_equal(self.to_coords(a * b), prod):
                bad += 1
            if not (self.from_coords(ca) == a):
                bad += 1
        return bad


def linearize(W, max_dim=None):
    return LinearizedRing(W, max_dim)


def unipotent_inverse(g, max_terms=512):
    """Inverse of ``g = 1 - h`` with ``h`` nilpotent, as ``sum h^k``."""
    h = g.W.one() - g
    s = g.W.one()
    term = g.W.one()
    for _ in range(max_terms):
        term = term * h
        if term.is_zero():
            return s
        s = s + term
    raise NotAUnit("1 - g is not nilpotent at this truncation")


class LocalizationRing:
    """``C[T]/(gT - f)``, ``C[T^-1]/(g - T^-1 f)`` or ``C[T, T^-1]/(gT - f)`` with ``|j| <= DT``.

    Elements are coordinate vectors over the blocks ``C T^j``.  The relation
    subgroup is spanned by ``(gT - f) e T^j`` for every generator ``e`` of
    ``C`` and every shift, with T-powers outside the window dropped.
    """

    def __init__(self, C, f, g, side, DT, relations=True):
        self.C, self.side, self.DT = C, side, DT
        if side == "T":
            self.powers = list(range(0, DT + 1))
            shifts = range(0, DT + 1)
        elif side == "Tinv":
            self.powers = list(range(-DT, 1))
            shifts = range(-DT - 1, 0)
        elif side == "both":
            self.powers = list(range(-DT, DT + 1))
            shifts = range(-DT - 1, DT + 1)
        else:
            raise ValueError(f"unknown side {side!r}")
        self.block = {j: b for b, j in enumerate(self.powers)}
        self.nblocks = len(self.powers)
        m = C.size
        if self.nblocks * C.dim > MAX_DIM:
            raise ResourceBound(f"localization dimension {self.nblocks * C.dim} > {MAX_DIM}")
        G, F = C.mult_matrix(g), C.mult_matrix(f)
        rows = []
        if relations:
            # for side Tinv the relation g - T^-1 f is T^-1 (gT - f)
            for j in shifts:
                for i in range(m):
                    v = np.zeros(self.nblocks * m, dtype=np.int64)
                    if j + 1 in self.block:
                        b = self.block[j + 1]
                        v[b * m:(b + 1) * m] += G[i]
                    if j in self.block:
                        b = self.block[j]
                        v[b * m:(b + 1) * m] -= F[i]
                    if v.any():
                        rows.append(v % np.tile(C.orders, self.nblocks))
        self.relations = np.array(rows, dtype=np.int64).reshape(-1, self.nblocks * m)
        self._rel_embedded = C.embed(self.relations, self.nblocks)
        self.log_relations = linalg.zpn_log_order(self._rel_embedded, C.p, C.n)
        self.log_ambient = self.nblocks * C.dim
        self.log_order = self.log_ambient - self.log_relations

    @property
    def width(self):
        return self.nblocks * self.C.size

    def unit(self, j, coords):
        v = np.zeros(self.width, dtype=np.int64)
        b = self.block[j]
        v[b * self.C.size:(b + 1) * self.C.size] = coords
        return v

    def image_log_order(self, rows):
        """``log_p`` of the order of the image of ``rows`` in the quotient."""
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.width)
        both = np.vstack([self._rel_embedded, self.C.embed(rows, self.nblocks)])
        return linalg.zpn_log_order(both, self.C.p, self.C.n) - self.log_relations

    def contains(self, rows):
        return self.image_log_order(rows) == 0


def localization_ring(C, f, g, side, DT):
    _check_covering(f, g)
    return LocalizationRing(C, f, g, side, DT)


def _check_covering(f, g):
    W = f.W
    if g == W.one():
        return "laurent"
    if g == W.one() - f:
        return "balanced"
    raise UnsupportedCovering("only g = 1 and g = 1 - f are supported")


class _Sum:
    """Direct sum of two localization rings (for the middle term)."""

    def __init__(self, A, B):
        self.A, self.B = A, B
        self.C = A.C
        self.width = A.width + B.width
        self.log_order = A.log_order + B.log_order
        rel = np.zeros((len(A.relations) + len(B.relations), self.width), dtype=np.int64)
        rel[: len(A.relations), : A.width] = A.relations
        rel[len(A.relations):, A.width:] = B.relations
        self.nblocks = A.nblocks + B.nblocks
        self._rel_embedded = self.C.embed(rel, self.nblocks)
        self.log_relations = A.log_relations + B.log_relations
        self.orders = np.tile(self.C.orders, self.nblocks)

    def image_log_order(self, rows):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, self.width)
        both = np.vstack([self._rel_embedded, self.C.embed(rows, self.nblocks)])
        return linalg.zpn_log_order(both, self.C.p, self.C.n) - self.log_relations


class CechComplexDatum:
    """``0 -> C -> A1 (+) A2 -> A12 -> 0`` as explicit integer matrices."""

    def __init__(self, C, f, g, DT, corrupt=None):
        self.C, self.f, self.g, self.DT = C, f, g, DT
        self.kind = _check_covering(f, g)
        self.corrupt = corrupt
        self.A1 = LocalizationRing(C, f, g, "T", DT)
        self.A2 = LocalizationRing(C, f, g, "Tinv", DT)
        if corrupt not in (None, "map1", "map2"):
            raise ValueError(f"unknown corruption {corrupt!r}")
        # the map2 corruption drops the relations of the overlap, so the
        # difference map is no longer well defined on the middle term
        self.A12 = LocalizationRing(C, f, g, "both", DT, relations=corrupt != "map2")
        self.mid = _Sum(self.A1, self.A2)
        m = C.size
        eye = np.eye(m, dtype=np.int64)
        # map1: c -> (c, c)
        self.map1 = np.hstack([
            np.vstack([self.A1.unit(0, eye[i]) for i in range(m)]),
            np.vstack([self.A2.unit(0, eye[i]) for i in range(m)]),
        ])
        # map2: (a, b) -> a - b, with T^-1 in A2 going to T^-1 in A12
        rows = []
        for j in self.A1.powers:
            for i in range(m):
                rows.append(self.A12.unit(j, eye[i]))
        for j in self.A2.powers:
            for i in range(m):
                rows.append(self.A12.unit(j, (-eye[i]) % C.orders))
        self.map2 = np.array(rows, dtype=np.int64)
        if corrupt == "map1":
            self.map1[0] = 0

    def composite(self):
        orders = np.tile(self.C.orders, self.A12.nblocks)
        return (self.map1 @ self.map2) % orders


def cech_complex(C, f, g, DT, corrupt=None):
    return CechComplexDatum(C, f, g, DT, corrupt)


def _node(name, kernel, image, ok):
    return {"node": name, "kernel_dim": None if kernel is None else int(kernel), "image_dim": int(image),
            "verdict": "pass" if ok else "fail"}


def check_exactness(datum):
    """Group orders for ``ker(map1) = 0``, ``ker(map2) = im(map1)``, ``map2`` onto."""
    C = datum.C
    im1 = datum.mid.image_log_order(datum.map1)
    im2 = datum.A12.image_log_order(datum.map2)
    ker2 = datum.mid.log_order - im2
    composite_zero = datum.A12.contains(datum.composite())
    mid_rel = np.zeros((0, datum.A12.width), dtype=np.int64)
    if len(datum.A1.relations) or len(datum.A2.relations):
        rel = np.vstack([
            np.hstack([datum.A1.relations, np.zeros((len(datum.A1.relations), datum.A2.width), dtype=np.int64)]),
            np.hstack([np.zeros((len(datum.A2.relations), datum.A1.width), dtype=np.int64), datum.A2.relations]),
        ])
        mid_rel = rel @ datum.map2
    well_defined = datum.A12.contains(mid_rel) if len(mid_rel) else True
    nodes = [
        _node("C", C.dim - im1, im1, im1 == C.dim),
        _node("middle", ker2 if well_defined else None, im2,
              well_defined and composite_zero and ker2 == im1),
        _node("overlap", datum.A12.log_order - im2, im2, im2 == datum.A12.log_order),
    ]
    h0 = _h0_inverse(datum) if nodes[0]["verdict"] == "pass" and nodes[1]["verdict"] == "pass" else None
    exact = all(n["verdict"] == "pass" for n in nodes)
    return {
        "covering": datum.kind,
        "caps": {"n": C.n, "D": frac_str(C.W.ring.D), "N": C.W.ring.N, "DT": datum.DT},
        "qualifier": "finite-stage",
        "dims": {"C": C.dim, "A1": datum.A1.log_order, "A2": datum.A2.log_order,
                 "A12": datum.A12.log_order},
        "euler": C.dim - datum.mid.log_order + datum.A12.log_order,
        "composite_zero": composite_zero,
        "map2_well_defined": bool(well_defined),
        "nodes": nodes,
        "H0_inverse": h0,
        "verdict": "exact" if exact and h0 and h0["verified"] else "not exact",
    }


def _h0_inverse(datum):
    """``A1 -> C``, ``T -> f / g``; checks it kills relations and inverts ``map1``."""
    C = datum.C
    W = C.W
    ratio = datum.f * unipotent_inverse(datum.g)
    m = C.size
    rows = []
    power = W.one()
    for j in datum.A1.powers:
        M = C.mult_matrix(power)
        for i in range(m):
            rows.append(M[i])
        power = power * ratio
    psi = np.array(rows, dtype=np.int64)
    kills = not ((datum.A1.relations @ psi) % C.orders).any() if len(datum.A1.relations) else True
    back = (datum.map1[:, : datum.A1.width] @ psi) % C.orders
    inverse = np.array_equal(back, np.eye(m, dtype=np.int64) % C.orders)
    return {"kills_relations": bool(kills), "left_inverse": bool(inverse),
            "verified": bool(kills and inverse)}


def dump_triplets(mat, path=None):
    """Sparse ``row col value`` text, one entry per line."""
    mat = np.asarray(mat)
    rows, cols = np.nonzero(mat)
    lines = [f"{mat.shape[0]} {mat.shape[1]}"]
    lines += [f"{r} {c} {int(mat[r, c])}" for r, c in zip(rows, cols)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# strictness of multiplication
# ---------------------------------------------------------------------------

def _monomial_window(ring, cap):
    if ring.finite:
        return ring.basis(cap)
    out = []
    q = ring.q
    top = int(Fraction(cap) * q) if cap is not None else 2 * q
    lo = [ring._floor if inv else 0 for inv in ring.inverted]
    for m in itertools.product(*[range(l, top) for l in lo]):
        if ring.degree_units(m) < top:
            out.append(m)
    return out


def check_strict_multiplication(W, coeffs, DT=2):
    """Largest norm-exponent gain of ``y -> x y`` over basis elements ``y``.

    ``x = sum_j coeffs[j] T^j`` over ``W[T]``.  Basis elements are
    ``V^k[m] T^j``; products whose norm is beyond the known precision are
    skipped and counted.
    """
    ring = W.ring
    ok, _ = ideal_membership(ring.one(), [c.digits[0] for c in coeffs])
    if not ok:
        raise BadWitness("coefficients do not generate the unit ideal")
    degx = len(coeffs) - 1
    drops = []
    skipped = 0
    for k in range(W.n):
        cap = W.caps[k]
        for m in _monomial_window(ring, cap):
            digits = [ring.zero() for _ in range(W.n)]
            digits[k] = PerfPoly(ring, {m: 1}, None)
            y = W.vec(digits)
            ay = y.weighted_gauss_norm().alpha
            if ay is None:
                continue
            for j in range(0, DT - degx + 1):
                best = None
                prec = None
                for c in coeffs:
                    prod = c * y
                    a = prod.weighted_gauss_norm()
                    pc = prod.norm_precision()
                    prec = pc if prec is None else min(prec, pc)
                    if not a.is_inf:
                        best = a.alpha if best is None else min(best, a.alpha)
                if best is None or (prec is not None and best >= prec):
                    skipped += 1
                    continue
                drops.append(best - ay)
    c = max(drops) if drops else None
    return {
        "constant": frac_str(c), "basis_checked": len(drops), "skipped": skipped,
        "bound_holds": c is not None and all(d <= c for d in drops),
        "verdict": "pass" if drops else "uncertified",
    }
