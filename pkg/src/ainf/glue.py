"""Gluing free modules along a two-piece covering.

The covering is modelled by ``A1 = C[T]``, ``A2 = C[T^-1]`` and the overlap
``A12 = C[T, T^-1]`` over a weighted truncated Witt ring ``C``; ``T`` has norm
1, so the norm of a Laurent polynomial is the smallest weighted exponent of
its coefficients.  Because ``C`` is truncated, anything of positive norm
exponent is nilpotent, which is what makes the factorization loop below end
with an exact identity.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from . import linalg
from .cech import linearize
from .errors import ApproximantNotFound, NonConvergent, NotAUnit, RingMismatch
from .fpring import NormExponent, frac_str

MAX_GEOMETRIC_TERMS = 256
MAX_FACTOR_ITERATIONS = 64


# ---------------------------------------------------------------------------
# Laurent polynomials over C
# ---------------------------------------------------------------------------

class LaurentPoly:
    """``sum_j c_j T^j`` with coefficients in a Witt ring; zero coefficients are dropped."""

    __slots__ = ("W", "coeffs")

    def __init__(self, W, coeffs):
        self.W = W
        self.coeffs = {j: c for j, c in coeffs.items() if not c.is_zero()}

    @classmethod
    def constant(cls, c):
        return cls(c.W, {0: c})

    @classmethod
    def monomial(cls, c, j):
        return cls(c.W, {j: c})

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.W != self.W:
                raise RingMismatch("coefficient rings differ")
            return other
        if isinstance(other, int):
            return LaurentPoly(self.W, {0: self.W.scalar(other)})
        return LaurentPoly(self.W, {0: other})

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out[j] + c if j in out else c
        return LaurentPoly(self.W, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.W, {j: -c for j, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for (i, a), (j, b) in itertools.product(self.coeffs.items(), other.coeffs.items()):
            ab = a * b
            out[i + j] = out[i + j] + ab if i + j in out else ab
        return LaurentPoly(self.W, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("LaurentPoly is not hashable")

    def is_zero(self):
        return not self.coeffs

    def shift(self, m):
        return LaurentPoly(self.W, {j + m: c for j, c in self.coeffs.items()})

    def degrees(self):
        if not self.coeffs:
            return None
        return min(self.coeffs), max(self.coeffs)

    def alpha(self):
        vals = [c.weighted_gauss_norm().alpha for c in self.coeffs.values()]
        vals = [v for v in vals if v is not None]
        return NormExponent(min(vals) if vals else None)

    def part(self, lo=None, hi=None):
        """Terms with ``lo <= j <= hi``."""
        return LaurentPoly(self.W, {
            j: c for j, c in self.coeffs.items()
            if (lo is None or j >= lo) and (hi is None or j <= hi)
        })

    def in_piece(self, piece):
        """Piece 1 is ``C[T]``, piece 2 is ``C[T^-1]``; 12 is the overlap."""
        if piece == 1:
            return all(j >= 0 for j in self.coeffs)
        if piece == 2:
            return all(j <= 0 for j in self.coeffs)
        return True

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c!r}*T^{j}" for j, c in sorted(self.coeffs.items()))

    def to_json(self):
        return {str(j): c.to_json() for j, c in sorted(self.coeffs.items())}


def split_overlap(e):
    """``e = e1 + e2`` with ``e1`` on ``T^(>=0)`` and ``e2`` on ``T^(<0)``.

    The split is coefficientwise, so neither part has smaller norm exponent
    than ``e``; constants go to the first piece.
    """
    return e.part(lo=0), e.part(hi=-1)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class MatrixOverRing:
    """Dense matrix of :class:`LaurentPoly` entries over one coefficient ring."""

    def __init__(self, W, rows):
        self.W = W
        self.rows = [[e if isinstance(e, LaurentPoly) else LaurentPoly.constant(e) for e in r]
                     for r in rows]
        self.shape = (len(self.rows), len(self.rows[0]) if self.rows else 0)
        for r in self.rows:
            if len(r) != self.shape[1]:
                raise ValueError("ragged matrix")
            for e in r:
                if e.W != W:
                    raise RingMismatch("matrix entries over different rings")

    @classmethod
    def identity(cls, W, r):
        return cls(W, [[LaurentPoly(W, {0: W.one()} if i == j else {}) for j in range(r)]
                       for i in range(r)])

    @classmethod
    def zeros(cls, W, r, c=None):
        c = r if c is None else c
        return cls(W, [[LaurentPoly(W, {}) for _ in range(c)] for _ in range(r)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __add__(self, other):
        return MatrixOverRing(self.W, [[a + b for a, b in zip(r, s)]
                                       for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return MatrixOverRing(self.W, [[a - b for a, b in zip(r, s)]
                                       for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return MatrixOverRing(self.W, [[-a for a in r] for r in self.rows])

    def __matmul__(self, other):
        if self.shape[1] != other.shape[0]:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.shape[0]):
            row = []
            for j in range(other.shape[1]):
                acc = LaurentPoly(self.W, {})
                for k in range(self.shape[1]):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.coeffs and b.coeffs:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return MatrixOverRing(self.W, out)

    def scale_T(self, m):
        return MatrixOverRing(self.W, [[a.shift(m) for a in r] for r in self.rows])

    def map_entries(self, fn):
        return MatrixOverRing(self.W, [[fn(a) for a in r] for r in self.rows])

    def __eq__(self, other):
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def is_zero(self):
        return all(a.is_zero() for r in self.rows for a in r)

    def is_identity(self):
        return self.shape[0] == self.shape[1] and self == MatrixOverRing.identity(self.W, self.shape[0])

    def norm(self):
        """Smallest entry exponent (the max of the entry norms)."""
        vals = [a.alpha().alpha for r in self.rows for a in r]
        vals = [v for v in vals if v is not None]
        return NormExponent(min(vals) if vals else None)

    def in_piece(self, piece):
        return all(a.in_piece(piece) for r in self.rows for a in r)

    def columns(self, keep):
        return MatrixOverRing(self.W, [[r[j] for j in keep] for r in self.rows])

    def to_json(self):
        """Sparse ``[row, col, T-power, digits]`` entries."""
        out = []
        for i, r in enumerate(self.rows):
            for j, a in enumerate(r):
                for t, c in sorted(a.coeffs.items()):
                    out.append([i, j, t, c.to_json()])
        return {"shape": list(self.shape), "entries": out}

    def __repr__(self):
        return f"MatrixOverRing{self.shape}"


def near_identity_inverse(U, max_terms=MAX_GEOMETRIC_TERMS):
    """``U^-1 = sum (1 - U)^k`` when ``1 - U`` is nilpotent at the truncation."""
    r = U.shape[0]
    one = MatrixOverRing.identity(U.W, r)
    E = one - U
    total = one
    term = one
    for _ in range(max_terms):
        term = term @ E
        if term.is_zero():
            return total
        total = total + term
    raise NotAUnit("geometric series did not terminate at this truncation")


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def factor_near_identity(U, max_iter=MAX_FACTOR_ITERATIONS):
    """Write ``U = U1 U2`` with ``U1`` over ``C[T]`` and ``U2`` over ``C[T^-1]``.

    Needs ``|U - 1| < 1``, i.e. a strictly positive norm exponent: the split
    does not increase norms, so each round squares the residual.  Returns
    ``(U1, U2, report)``; the report lists the residual exponents.
    """
    r = U.shape[0]
    one = MatrixOverRing.identity(U.W, r)
    E = U - one
    a0 = E.norm()
    if not a0.is_inf and a0.alpha <= 0:
        raise NonConvergent(f"|U - 1| has exponent {frac_str(a0.alpha)}, need > 0")
    left, right = [], []
    history = [frac_str(a0.alpha)]
    cur = U
    prev = a0
    for _ in range(max_iter):
        E = cur - one
        if E.is_zero():
            break
        E1 = E.map_entries(lambda e: split_overlap(e)[0])
        E2 = E.map_entries(lambda e: split_overlap(e)[1])
        F1, F2 = one + E1, one + E2
        cur = near_identity_inverse(F1) @ cur @ near_identity_inverse(F2)
        left.append(F1)
        right.append(F2)
        res = (cur - one).norm()
        history.append(frac_str(res.alpha))
        if not res.is_inf and not res.alpha > prev.alpha:
            raise NonConvergent(f"residual exponent stalled at {frac_str(res.alpha)}")
        prev = res
    else:
        raise NonConvergent(f"no exact factorization after {max_iter} rounds")
    U1, U2 = one, one
    for F in left:
        U1 = U1 @ F
    for F in reversed(right):
        U2 = U2 @ F
    report = {
        "iterations": len(left),
        "residual_alphas": history,
        "strictly_increasing": True,
        "product_exact": (U1 @ U2) == U,
        "U1_in_piece1": U1.in_piece(1),
        "U2_in_piece2": U2.in_piece(2),
        "threshold": "alpha(U - 1) > 0",
    }
    return U1, U2, report


# ---------------------------------------------------------------------------
# patching data and glued modules
# ---------------------------------------------------------------------------

class PatchingDatum:
    """Free modules ``A1^r``, ``A2^r`` identified on the overlap by ``V``.

    ``V`` expresses the second basis in the first one over ``A12``;
    ``W`` is its claimed inverse.
    """

    def __init__(self, C, V, W=None):
        self.C = C
        self.V = V
        self.rank = V.shape[0]
        if V.shape[0] != V.shape[1]:
            raise ValueError("transition matrix must be square")
        self.W = W

    def compatible(self):
        if self.W is None:
            return False
        one = MatrixOverRing.identity(self.C, self.rank)
        return (self.V @ self.W) == one and (self.W @ self.V) == one

    def to_json(self):
        return {"rank": self.rank, "V": self.V.to_json(),
                "W": None if self.W is None else self.W.to_json()}


def trivial_datum(C, r):
    one = MatrixOverRing.identity(C, r)
    return PatchingDatum(C, one, one)


class GluedModule:
    """Free module on generators ``x_j = (G1 e_j, G2 e_j)`` inside ``A1^r (+) A2^r``."""

    def __init__(self, datum, G1, G2, m, factor_report, inverses=None):
        self.datum = datum
        self.G1, self.G2 = G1, G2
        self.m = m
        self.factor_report = factor_report
        self.inverses = inverses

    @property
    def ngens(self):
        return self.G1.shape[1]

    def drop_generator(self, j):
        keep = [i for i in range(self.ngens) if i != j]
        return GluedModule(self.datum, self.G1.columns(keep), self.G2.columns(keep),
                           self.m, self.factor_report, None)

    def relations_hold(self):
        """``psi(x_j) = G1 e_j - V G2 e_j`` vanishes for every generator."""
        return (self.G1 - self.datum.V @ self.G2).is_zero()

    def to_json(self):
        return {"generators": self.ngens, "m": self.m,
                "G1": self.G1.to_json(), "G2": self.G2.to_json(),
                "factorization": self.factor_report}


def glue_modules(datum, m_max=3):
    """The kernel of ``A1^r (+) A2^r -> A12^r``, ``(a, b) -> a - V b``, as a free module.

    Tries ``m = 0, 1, ...``: ``W' = T^(<=0)`` part of ``T^m W``, factor
    ``V T^-m W' = X1 U2`` and take ``G1 = T^m X1``, ``G2 = W' U2^-1``; the
    first ``m`` whose ``G1``, ``G2`` are invertible on their pieces wins.
    """
    C, r = datum.C, datum.rank
    Winv = datum.W if datum.W is not None else MatrixOverRing.identity(C, r)
    reasons = []
    if not datum.compatible():
        reasons.append("V W != 1 at truncation")
    for m in range(m_max + 1):
        Wp = Winv.scale_T(m).map_entries(lambda e: e.part(hi=0))
        U = datum.V @ Wp.scale_T(-m)
        try:
            X1, U2, rep = factor_near_identity(U)
            G1 = X1.scale_T(m)
            U2inv = near_identity_inverse(U2)
            G2 = Wp @ U2inv
            G1inv = near_identity_inverse(G1)
            G2inv = U2 @ near_identity_inverse(Wp)
        except (NonConvergent, NotAUnit) as exc:
            reasons.append(f"m={m}: {exc}")
            continue
        one = MatrixOverRing.identity(C, r)
        ok = (G1inv.in_piece(1) and G2inv.in_piece(2) and G1.in_piece(1) and G2.in_piece(2)
              and (G1 @ G1inv) == one and (G2 @ G2inv) == one and G1 == datum.V @ G2)
        if not ok:
            reasons.append(f"m={m}: base change not invertible on the pieces")
            continue
        return GluedModule(datum, G1, G2, m, rep, (G1inv, G2inv))
    raise ApproximantNotFound("; ".join(reasons) or "no approximant up to m_max")


def restrict(M):
    """Patching datum of ``M`` in the basis ``x_j``: the new transition ``G1^-1 V G2``."""
    G1inv, _ = M.inverses
    Vp = G1inv @ M.datum.V @ M.G2
    return PatchingDatum(M.datum.C, Vp, near_identity_inverse(Vp) if Vp.is_identity() else None)


# ---------------------------------------------------------------------------
# verification on linearizations
# ---------------------------------------------------------------------------

class _PieceLinearization:
    """``(C[T] / T^K)^r`` or ``(C[T^-1] / T^-K)^r`` in additive coordinates."""

    def __init__(self, L, piece, K, r):
        self.L, self.piece, self.K, self.r = L, piece, K, r
        self.sign = 1 if piece == 1 else -1
        self.width = r * K * L.size

    def index(self, mod, j):
        return (mod * self.K + self.sign * j) * self.L.size

    def matrix(self, G):
        """Rows: images of the generators ``e_i T^j`` of the source ``(piece)^c``."""
        L = self.L
        rows = []
        cols = G.shape[1]
        for src in range(cols):
            for j in range(self.K):
                for g in L.generators:
                    v = np.zeros(self.width, dtype=np.int64)
                    for dst in range(G.shape[0]):
                        for t, c in G[dst, src].coeffs.items():
                            tt = self.sign * j + t
                            if not 0 <= self.sign * tt < self.K:
                                continue
                            b = self.index(dst, tt)
                            v[b:b + L.size] += L.to_coords(c * g)
                    rows.append(v % np.tile(L.orders, self.r * self.K))
        return np.array(rows, dtype=np.int64).reshape(-1, self.width)

    def log_order_of_image(self, rows):
        emb = self.L.embed(rows, self.r * self.K)
        return linalg.zpn_log_order(emb, self.L.p, self.L.n)

    @property
    def log_order(self):
        return self.r * self.K * self.L.dim


def verify_base_change(M, K=3):
    """Surjectivity and injectivity of ``M (x) A_i -> M_i`` on ``(A_i / T^(+-K))``-stages.

    ``M (x) A_i`` is free on the ``x_j``; the map sends ``e_j`` to column ``j`` of
    ``G_i``.  Both source and target are finite groups at a stage, so the map
    is a bijection exactly when the image has full order and the source has
    the same order.
    """
    datum = M.datum
    L = linearize(datum.C)
    r = datum.rank
    out = {"stage_K": K, "linearized_dim_C": L.dim, "maps": []}
    ok = True
    for piece, G in ((1, M.G1), (2, M.G2)):
        P = _PieceLinearization(L, piece, K, r)
        img = P.log_order_of_image(P.matrix(G))
        source = G.shape[1] * K * L.dim
        surj = img == P.log_order
        inj = img == source
        ok &= surj and inj
        out["maps"].append({
            "piece": piece, "source_dim": source, "target_dim": P.log_order,
            "image_dim": img, "injective": inj, "surjective": surj,
            "verdict": "pass" if surj and inj else "fail",
        })
    out["relations_hold"] = M.relations_hold()
    ok &= out["relations_hold"]
    if M.inverses is not None and M.ngens == r:
        Vp = restrict(M).V
        out["round_trip"] = {
            "restricted_transition_is_identity": Vp.is_identity(),
            "change_of_basis_recovers_V": (M.G1 @ Vp @ M.inverses[1]) == datum.V,
        }
        ok &= all(out["round_trip"].values())
    else:
        out["round_trip"] = None
        ok = False
    out["verdict"] = "pass" if ok else "fail"
    return out


def glue_restrict_identity(C, r):
    """Restrict the free module ``C^r`` and glue it back."""
    M = glue_modules(trivial_datum(C, r))
    one = MatrixOverRing.identity(C, r)
    return {"G1_identity": M.G1 == one, "G2_identity": M.G2 == one, "m": M.m}


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_kernel(datum, DT, cap=1 << 16):
    """All ``(a, b)`` with ``b`` over ``C T^j`` (``-DT <= j <= 0``) and ``a = V b`` on ``T^(>=0)``.

    Only for tiny ``C``; returns the kernel as a set of coordinate tuples
    (on the linearization of ``C``, block ``j`` for ``T^j``), ignoring the
    ``a`` part which ``b`` determines.
    """
    from .lens import enumerate_witt

    C, r = datum.C, datum.rank
    L = linearize(C)
    elems = list(enumerate_witt(C, cap=cap))
    slots = r * (DT + 1)
    if len(elems) ** slots > cap:
        raise ValueError(f"{len(elems)}^{slots} candidates exceed cap {cap}")
    found = set()
    for choice in itertools.product(range(len(elems)), repeat=slots):
        cols = []
        for i in range(r):
            coeffs = {-j: elems[choice[i * (DT + 1) + j]] for j in range(DT + 1)}
            cols.append([LaurentPoly(C, coeffs)])
        b = MatrixOverRing(C, cols)
        a = datum.V @ b
        if a.in_piece(1):
            found.add(_b_key(L, b, DT))
    return found


def _b_key(L, b, DT):
    key = []
    for i in range(b.shape[0]):
        for j in range(DT + 1):
            c = b[i, 0].coeffs.get(-j)
            key.extend(int(x) for x in (L.to_coords(c) if c is not None else np.zeros(L.size, dtype=np.int64)))
    return tuple(key)


def kernel_from_generators(M, DT, cap=1 << 16):
    """``{G2 c : c in C^r}`` in the coordinates of :func:`brute_force_kernel`."""
    from .lens import enumerate_witt

    C = M.datum.C
    L = linearize(C)
    elems = list(enumerate_witt(C, cap=cap))
    found = set()
    for choice in itertools.product(elems, repeat=M.ngens):
        c = MatrixOverRing(C, [[LaurentPoly.constant(x)] for x in choice])
        b = M.G2 @ c
        lo = min((d[0] for d in (e.degrees() for r in b.rows for e in r) if d), default=0)
        if lo < -DT:
            raise ValueError("window too small for the generators")
        found.add(_b_key(L, b, DT))
    return found


def random_near_identity(C, r, rng, alpha=2, spread=1, terms=2):
    """``1 + E`` with every entry of ``E`` of norm exponent ``>= alpha``.

    Entries are sums of ``c * s * T^j`` with ``c`` random in ``C``, ``|j| <= spread``
    and ``s`` one of ``p^a [x^b]``-type scalars with ``a + b >= alpha``.
    """
    ring = C.ring
    alpha = Fraction(alpha)
    scalars = []
    for a in range(0, int(alpha) + 1):
        b = alpha - a
        s = C.p_elt() ** a if a else C.one()
        if b:
            s = s * C.teichmuller(ring.var(ring.variables[0], b))
        scalars.append(s)
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            e = LaurentPoly(C, {0: C.one()} if i == j else {})
            for _ in range(terms):
                t = int(rng.integers(-spread, spread + 1))
                s = scalars[int(rng.integers(0, len(scalars)))]
                e = e + LaurentPoly.monomial(C.random_element(rng) * s, t)
            row.append(e)
        rows.append(row)
    return MatrixOverRing(C, rows)
