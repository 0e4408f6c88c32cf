"""Truncated perfect F_p-algebras.

Elements are finite F_p-combinations of monomials whose exponents lie in
``Z[1/p]`` with denominators dividing ``p**N``.  Exponents are stored as
integers in units of ``1/p**N``.  Every element carries an absolute
precision: monomials of (graded) total degree at or above it are unknown and
are dropped, the same way a p-adic float drops digits.  Polynomial rings
keep every element at the ring cap ``D``; on inverted (Laurent) variables
multiplication can lose precision and the bookkeeping makes that visible.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import linalg
from .errors import (
    NotAUnit,
    PrecisionExhausted,
    RingMismatch,
    TruncationOverflow,
)

INF = None  # precision / norm value meaning "exact" / "+infinity"


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _add_prec(a, b):
    if a is None or b is None:
        return None
    return a + b


def frac_str(x):
    """Serialize a rational as ``"num/den"`` (``"inf"`` for ``None``)."""
    if x is None:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s):
    if s in (None, "inf"):
        return None
    return Fraction(s)


@dataclass(frozen=True)
class PrecisionBudget:
    n: int = 2
    D: Fraction | None = Fraction(4)
    N: int = 2
    DT: int = 2
    L: Fraction = Fraction(0)

    def __post_init__(self):
        if self.n < 1 or self.N < 0 or self.DT < 1:
            raise ValueError(f"invalid precision budget {self}")
        if self.D is not None and self.D <= 0:
            raise ValueError("D must be positive")
        if self.L < 0:
            raise ValueError("L must be nonnegative")
        object.__setattr__(self, "D", None if self.D is None else Fraction(self.D))
        object.__setattr__(self, "L", Fraction(self.L))

    def to_json(self):
        return {"n": self.n, "D": frac_str(self.D), "N": self.N, "DT": self.DT, "L": frac_str(self.L)}

    @classmethod
    def from_json(cls, d):
        return cls(
            n=int(d.get("n", 2)),
            D=parse_frac(str(d["D"])) if "D" in d else Fraction(4),
            N=int(d.get("N", 2)),
            DT=int(d.get("DT", 2)),
            L=Fraction(str(d.get("L", 0))),
        )


class NormExponent:
    """Norm value ``theta**alpha`` stored through its exponent ``alpha``.

    Larger alpha means smaller norm; ``alpha is None`` encodes ``+inf``
    (the zero element).
    """

    __slots__ = ("alpha",)

    def __init__(self, alpha):
        self.alpha = None if alpha is None else Fraction(alpha)

    @property
    def is_inf(self):
        return self.alpha is None

    def __eq__(self, other):
        if not isinstance(other, NormExponent):
            other = NormExponent(other)
        return self.alpha == other.alpha

    def __hash__(self):
        return hash(self.alpha)

    def _key(self):
        return (1, 0) if self.alpha is None else (0, self.alpha)

    def __lt__(self, other):
        return self._key() < NormExponent(other.alpha if isinstance(other, NormExponent) else other)._key()

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        return not self <= other

    def __ge__(self, other):
        return not self < other

    def __add__(self, other):
        o = other.alpha if isinstance(other, NormExponent) else Fraction(other)
        if self.alpha is None or o is None:
            return NormExponent(None)
        return NormExponent(self.alpha + o)

    def __mul__(self, k):
        return NormExponent(None if self.alpha is None else self.alpha * k)

    __rmul__ = __mul__

    def capped(self, cap):
        """``min(alpha, cap)``; compares norms only up to a known precision."""
        if cap is None:
            return self.alpha
        if self.alpha is None:
            return Fraction(cap)
        return min(self.alpha, Fraction(cap))

    def __repr__(self):
        return f"NormExponent({frac_str(self.alpha)})"

    def to_json(self):
        return frac_str(self.alpha)


_TERM = re.compile(
    r"\s*([+-])?\s*(\d+)?\s*\*?\s*((?:[A-Za-z_]\w*(?:\s*\^\s*(?:\(\s*-?\d+(?:/\d+)?\s*\)|-?\d+))?\s*\*?\s*)*)"
)
_FACTOR = re.compile(r"([A-Za-z_]\w*)(?:\s*\^\s*(?:\(\s*(-?\d+(?:/\d+)?)\s*\)|(-?\d+)))?")


class RingPresentation:
    """A truncated perfect F_p-algebra with optional relations.

    ``variables`` are names; ``inverted`` marks Laurent variables (exponent
    floor ``-L``); ``ungraded`` variables do not count towards the truncation
    degree.  ``relations`` are polynomials (strings or ``PerfPoly`` over the
    free ring) generating an ideal that is saturated under Frobenius roots up
    to depth ``N``.

    Normal forms: when every variable is graded, none is inverted and ``D``
    is finite, the quotient is finite dimensional and is reduced by linear
    elimination against the relation subspace.  Otherwise relations are
    applied by division by the depth-``N`` roots of the generators, which is
    a normal form whenever those roots form a Groebner basis (always the
    case for a single generator).
    """

    def __init__(self, p, variables, inverted=(), ungraded=(), relations=(), budget=None, name=None,
                 saturate=True):
        self.p = int(p)
        self.variables = tuple(variables)
        self.budget = budget or PrecisionBudget()
        self.N = self.budget.N
        self.q = self.p ** self.N
        self.D = self.budget.D
        self.inverted = tuple(v in set(inverted) for v in self.variables)
        self.graded = tuple(v not in set(ungraded) for v in self.variables)
        self.name = name or f"F_{p}[{','.join(self.variables)}]"
        self._floor = -int(self.budget.L * self.q)
        self._free = None
        self._nf_cache = {}
        self._has_relations = bool(relations)
        rels = []
        for r in relations:
            if isinstance(r, str):
                r = self.free.parse(r)
            rels.append(r)
        self.relations_source = tuple(rels)
        self.saturate = saturate
        self.relations = tuple(self._finest_root(r) if saturate else PerfPoly(self.free, r.terms, None)
                               for r in rels)
        self.finite = (
            self.D is not None and all(self.graded) and not any(self.inverted)
        )

    # construction helpers -------------------------------------------------
    @property
    def free(self):
        """The same ring without relations (shared variables and budget)."""
        if not self._has_relations:
            return self
        if self._free is None:
            self._free = RingPresentation(
                self.p, self.variables,
                inverted=[v for v, i in zip(self.variables, self.inverted) if i],
                ungraded=[v for v, g in zip(self.variables, self.graded) if not g],
                budget=self.budget, name=self.name + "(free)",
            )
        return self._free

    def with_budget(self, budget):
        return RingPresentation(
            self.p, self.variables,
            inverted=[v for v, i in zip(self.variables, self.inverted) if i],
            ungraded=[v for v, g in zip(self.variables, self.graded) if not g],
            relations=[str(r) for r in self.relations_source],
            budget=budget, name=self.name, saturate=self.saturate,
        )

    def key(self):
        return (
            self.p, self.variables, self.inverted, self.graded, self.budget,
            tuple(sorted(tuple(sorted(r.terms.items())) for r in self.relations)),
        )

    def __eq__(self, other):
        return isinstance(other, RingPresentation) and (self is other or self.key() == other.key())

    def __hash__(self):
        return hash(self.key()[:5])

    def __repr__(self):
        rel = f"/({', '.join(map(str, self.relations_source))})" if self.relations_source else ""
        return f"RingPresentation({self.name}{rel}, p={self.p}, {self.budget})"

    def _finest_root(self, r):
        r = PerfPoly(self.free, r.terms, None)
        k = 0
        while k < self.N:
            try:
                r = r.frobenius_inverse()
            except PrecisionExhausted:
                break
            k += 1
        return r

    # elements -------------------------------------------------------------
    def element(self, terms, prec="default"):
        if prec == "default":
            prec = self.D
        return PerfPoly(self, terms, prec)

    def zero(self, prec="default"):
        return self.element({}, prec)

    def one(self):
        return self.element({self.unit_exp: 1})

    def scalar(self, c):
        return self.element({self.unit_exp: c % self.p})

    @cached_property
    def unit_exp(self):
        return (0,) * len(self.variables)

    def monomial(self, exps=None, coeff=1, **named):
        """Monomial from a dict/kwargs of rational exponents, e.g. ``x=Fraction(1, 2)``."""
        e = [Fraction(0)] * len(self.variables)
        for name, val in dict(exps or {}, **named).items():
            e[self.variables.index(name)] = Fraction(val)
        return self.element({self.to_units(e): coeff % self.p})

    def var(self, name, exp=1):
        return self.monomial({name: exp})

    def to_units(self, exps):
        out = []
        for e in exps:
            u = Fraction(e) * self.q
            if u.denominator != 1:
                raise PrecisionExhausted(f"exponent {e} needs depth beyond N={self.N}")
            out.append(int(u))
        return tuple(out)

    def degree_units(self, m):
        return sum(e for e, g in zip(m, self.graded) if g)

    def degree(self, m):
        return Fraction(self.degree_units(m), self.q)

    def parse(self, s):
        """Parse the polynomial grammar, e.g. ``"x^(3/4)*y + x^-1 + 1"``."""
        s = s.strip()
        if not s:
            raise ValueError("empty polynomial")
        terms = {}
        pos = 0
        first = True
        while pos < len(s):
            m = _TERM.match(s, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse polynomial {s!r} at {pos}")
            sign, coeff, body = m.groups()
            if not first and sign is None:
                raise ValueError(f"missing operator in {s!r} at {pos}")
            first = False
            c = int(coeff) if coeff else 1
            if sign == "-":
                c = -c
            if not coeff and not body.strip():
                raise ValueError(f"empty term in {s!r}")
            e = [Fraction(0)] * len(self.variables)
            for fm in _FACTOR.finditer(body):
                name, ex1, ex2 = fm.groups()
                if name not in self.variables:
                    raise ValueError(f"unknown variable {name!r}")
                ex = Fraction(ex1 or ex2 or 1)
                e[self.variables.index(name)] += ex
            u = self.to_units(e)
            terms[u] = (terms.get(u, 0) + c) % self.p
            pos = m.end()
        return self.element({k: v for k, v in terms.items() if v})

    # finite-dimensional model --------------------------------------------
    def basis(self, prec="default"):
        """Monomials of degree below ``prec`` (finite rings only), degree-descending."""
        if prec == "default":
            prec = self.D
        if prec is None or not all(self.graded) or any(self.inverted):
            raise ValueError("basis() needs a finite truncated ring")
        top = int(Fraction(prec) * self.q)
        if Fraction(prec) * self.q != top:
            top = int(Fraction(prec) * self.q) + 1
        nv = len(self.variables)
        out = []
        for total in range(top):
            for comp in _compositions(total, nv):
                out.append(comp)
        out.sort(key=lambda m: (-sum(m), tuple(-x for x in m)))
        return out

    def relation_basis(self, prec):
        """Echelon basis of the relation subspace truncated at ``prec``."""
        key = prec
        if key not in self._nf_cache:
            cols = self.basis(prec)
            index = {m: i for i, m in enumerate(cols)}
            rows = []
            for r in self.relations:
                for m in cols:
                    v = np.zeros(len(cols), dtype=np.int64)
                    for rm, c in r.terms.items():
                        mm = tuple(a + b for a, b in zip(rm, m))
                        j = index.get(mm)
                        if j is not None:
                            v[j] = (v[j] + c) % self.p
                    if v.any():
                        rows.append(v)
            eb = linalg.EchelonBasis(np.array(rows) if rows else [], self.p, len(cols))
            self._nf_cache[key] = (cols, index, eb)
        return self._nf_cache[key]

    def to_vector(self, a, cols_index):
        v = np.zeros(len(cols_index), dtype=np.int64)
        for m, c in a.terms.items():
            v[cols_index[m]] = c
        return v

    def from_vector(self, v, cols, prec="default"):
        return PerfPoly(self, {cols[i]: int(c) for i, c in enumerate(v) if c}, self.D if prec == "default" else prec, reduced=True)

    # normal form ------------------------------------------------------------
    def normal_form(self, terms, prec):
        """Truncate, check Laurent floors, and reduce modulo relations."""
        out = self._truncate(terms, prec)
        if not self.relations:
            return out
        if self.finite:
            cols, index, eb = self.relation_basis(prec)
            v = np.zeros(len(cols), dtype=np.int64)
            for m, c in out.items():
                v[index[m]] = c
            v = eb.reduce(v)
            return {cols[i]: int(c) for i, c in enumerate(v) if c}
        return self._divide(out, prec)

    def _truncate(self, terms, prec):
        out = {}
        lim = None if prec is None else Fraction(prec) * self.q
        for m, c in terms.items():
            c %= self.p
            if not c:
                continue
            if lim is not None and self.degree_units(m) >= lim:
                continue
            for e, inv in zip(m, self.inverted):
                if e < 0 and (not inv or e < self._floor):
                    raise TruncationOverflow(f"exponent {Fraction(e, self.q)} below floor")
            out[m] = c
        return out

    def _order_key(self, m):
        return (sum(m), m)

    def _divide(self, terms, prec):
        if any(self.inverted):
            raise NotImplementedError("relations on Laurent variables are not supported")
        leads = []
        for r in self.relations:
            lm = max(r.terms, key=self._order_key)
            inv = pow(r.terms[lm], -1, self.p)
            leads.append((lm, inv, r))
        work = dict(terms)
        out = {}
        while work:
            m = max(work, key=self._order_key)
            c = work.pop(m)
            for lm, inv, r in leads:
                if all(a >= b for a, b in zip(m, lm)):
                    shift = tuple(a - b for a, b in zip(m, lm))
                    f = (c * inv) % self.p
                    for rm, rc in r.terms.items():
                        if rm == lm:
                            continue
                        mm = tuple(a + b for a, b in zip(rm, shift))
                        nv = (work.get(mm, 0) - f * rc) % self.p
                        if nv:
                            work[mm] = nv
                        else:
                            work.pop(mm, None)
                    break
            else:
                out[m] = c
        return self._truncate(out, prec)

    # sampling -----------------------------------------------------------------
    def random_element(self, rng, max_terms=4, depth=None, max_degree=None, allow_negative=False):
        """Random element with exponent denominators dividing ``p**depth``."""
        depth = self.N if depth is None else depth
        step = self.p ** (self.N - depth)
        if max_degree is None:
            max_degree = self.D if self.D is not None else Fraction(2)
        top = int(Fraction(max_degree) * self.q) // step
        nv = len(self.variables)
        terms = {}
        for _ in range(rng.integers(0, max_terms + 1)):
            budget = int(rng.integers(0, max(top, 1)))
            e = [0] * nv
            for _ in range(budget):
                e[int(rng.integers(0, nv))] += 1
            if allow_negative:
                for i, inv in enumerate(self.inverted):
                    if inv and rng.random() < 0.3:
                        e[i] = -int(rng.integers(0, max(1, -self._floor // step) + 1))
            m = tuple(x * step for x in e)
            terms[m] = (terms.get(m, 0) + int(rng.integers(1, self.p))) % self.p
        return self.element({m: c for m, c in terms.items() if c})


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class PerfPoly:
    """Immutable element of a :class:`RingPresentation`."""

    __slots__ = ("ring", "terms", "prec", "_hash")

    def __init__(self, ring, terms, prec, reduced=False):
        self.ring = ring
        prec = _min_prec(None if prec is None else Fraction(prec), ring.D)
        self.prec = prec
        self.terms = dict(terms) if reduced else ring.normal_form(terms, self.prec)

    # basic protocol -------------------------------------------------------
    def _check(self, other):
        if isinstance(other, int):
            return self.ring.scalar(other)
        if not isinstance(other, PerfPoly):
            return NotImplemented
        if other.ring is not self.ring and other.ring != self.ring:
            raise RingMismatch(f"{self.ring!r} vs {other.ring!r}")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        p = self.ring.p
        for m, c in other.terms.items():
            v = (terms.get(m, 0) + c) % p
            if v:
                terms[m] = v
            else:
                terms.pop(m, None)
        prec = _min_prec(self.prec, other.prec)
        if prec == self.prec and prec == other.prec and not self.ring.relations:
            return PerfPoly(self.ring, terms, prec, reduced=True)
        return PerfPoly(self.ring, terms, prec)

    __radd__ = __add__

    def __neg__(self):
        p = self.ring.p
        return PerfPoly(self.ring, {m: (-c) % p for m, c in self.terms.items()}, self.prec, reduced=True)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def valuation(self):
        """Minimal graded degree of a stored monomial (the precision if zero)."""
        if not self.terms:
            return self.prec
        q = self.ring.q
        return Fraction(min(self.ring.degree_units(m) for m in self.terms), q)

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.ring.p
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                v = (terms.get(m, 0) + c1 * c2) % p
                if v:
                    terms[m] = v
                else:
                    terms.pop(m, None)
        prec = _min_prec(_add_prec(self.prec, other.valuation()), _add_prec(other.prec, self.valuation()))
        return PerfPoly(self.ring, terms, prec)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.invert() ** (-k)
        result = self.ring.one()
        base = self
        p = self.ring.p
        # base-p digits: Frobenius handles the p-th powers exactly
        while k:
            k, d = divmod(k, p)
            for _ in range(d):
                result = result * base
            if k:
                base = base.frobenius()
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other)
        if not isinstance(other, PerfPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("PerfPoly equality is precision-dependent; not hashable")

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def with_prec(self, prec):
        """Same element known only up to ``prec`` (never raises precision)."""
        return PerfPoly(self.ring, self.terms, _min_prec(self.prec, prec))

    # Frobenius -------------------------------------------------------------
    def frobenius(self):
        p = self.ring.p
        terms = {tuple(e * p for e in m): c for m, c in self.terms.items()}
        prec = None if self.prec is None else self.prec * p
        return PerfPoly(self.ring, terms, prec)

    def frobenius_inverse(self):
        p = self.ring.p
        terms = {}
        for m, c in self.terms.items():
            if any(e % p for e in m):
                raise PrecisionExhausted(f"p-th root of {self} needs depth beyond N={self.ring.N}")
            terms[tuple(e // p for e in m)] = c
        prec = None if self.prec is None else self.prec / p
        return PerfPoly(self.ring, terms, prec)

    def depth(self):
        """Smallest k such that every exponent has denominator dividing p**k."""
        p, N = self.ring.p, self.ring.N
        k = 0
        for m in self.terms:
            for e in m:
                kk = N
                while kk > 0 and e % (p ** (N - kk + 1)) == 0:
                    kk -= 1
                k = max(k, kk)
        return k

    # norms -------------------------------------------------------------------
    def gauss_norm(self):
        if not self.terms:
            return NormExponent(None)
        return NormExponent(self.valuation())

    # units ---------------------------------------------------------------------
    def is_unit(self):
        try:
            self.invert()
        except NotAUnit:
            return False
        return True

    def invert(self):
        ring = self.ring
        if not self.terms:
            raise NotAUnit("zero is not a unit")
        if ring.finite:
            return self._invert_linear()
        if not ring.relations:
            return self._invert_series()
        return self._invert_window()

    def _invert_linear(self):
        ring = self.ring
        prec = self.prec if self.prec is not None else ring.D
        cols, index, eb = ring.relation_basis(prec)
        # columns of the multiplication map, in normal-form coordinates
        mat = np.zeros((len(cols), len(cols)), dtype=np.int64)
        for j, m in enumerate(cols):
            prod = self * PerfPoly(ring, {m: 1}, prec, reduced=True)
            mat[:, j] = ring.to_vector(prod, index)
        target = ring.to_vector(ring.one().with_prec(prec), index)
        x = linalg.solve(mat, target, ring.p)
        if x is None:
            raise NotAUnit(f"{self} is not a unit at precision {frac_str(prec)}")
        y = ring.from_vector(x, cols, prec)
        return y

    def _invert_series(self):
        ring = self.ring
        q = ring.q
        low = min(ring.degree_units(m) for m in self.terms)
        lead = [m for m in self.terms if ring.degree_units(m) == low]
        if len(lead) != 1:
            raise NotAUnit(f"{self}: leading part is not a monomial")
        m0 = lead[0]
        if any(e and not inv for e, inv in zip(m0, ring.inverted)):
            raise NotAUnit(f"{self}: leading monomial not invertible")
        if any(e and not g for e, g in zip(m0, ring.graded)):
            raise NotAUnit(f"{self}: leading monomial involves ungraded variables")
        c0inv = pow(self.terms[m0], -1, ring.p)
        neg = tuple(-e for e in m0)
        lead_inv = PerfPoly(ring, {neg: c0inv}, None)
        h = self * lead_inv - 1  # positive valuation
        if self.prec is None and h:
            raise NotAUnit("exact series inverse does not terminate")
        prec = None if self.prec is None else self.prec - Fraction(low, q) * 2
        prec = _min_prec(prec, ring.D)
        if h and h.valuation() <= 0:
            raise NotAUnit(f"{self}: tail does not have positive valuation")
        s = ring.one().with_prec(prec)
        term = ring.one().with_prec(prec)
        while True:
            term = -(term * h)
            term = term.with_prec(prec)
            if term.is_zero():
                break
            s = s + term
        return (s * lead_inv).with_prec(prec)

    def _invert_window(self):
        ring = self.ring
        bound = max((max(m) for m in self.terms), default=0) + ring.budget.DT * ring.q
        ok, cert = _window_solve(ring, [self], ring.one(), bound)
        if not ok:
            raise NotAUnit(f"{self} is not a unit within the search window")
        return cert[0]

    # display -----------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        ring = self.ring
        parts = []
        for m in sorted(self.terms, key=lambda m: (ring.degree_units(m), m)):
            c = self.terms[m]
            factors = []
            for name, e in zip(ring.variables, m):
                if e == 0:
                    continue
                f = Fraction(e, ring.q)
                if f == 1:
                    factors.append(name)
                elif f.denominator == 1 and f > 0:
                    factors.append(f"{name}^{f.numerator}")
                else:
                    factors.append(f"{name}^({f})")
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"PerfPoly({self}, prec={frac_str(self.prec)})"

    def to_json(self):
        return str(self)


def pp_add(a, b):
    return a + b


def pp_mul(a, b):
    return a * b


def frobenius(a):
    return a.frobenius()


def frobenius_inverse(a):
    return a.frobenius_inverse()


def gauss_norm(a):
    return a.gauss_norm()


def is_unit(a):
    return a.is_unit()


def invert(a):
    return a.invert()


def _window_solve(ring, gens, target, bound, max_cols=6000):
    """Solve ``target = sum c_i gens_i`` with multipliers from a monomial window."""
    prec = target.prec
    for g in gens:
        prec = _min_prec(prec, g.prec)
    nv = len(ring.variables)
    candidates = ring.basis(prec) if ring.finite else None
    # coarsest lattice first keeps the window small; refine if needed
    for depth in range(0, ring.N + 1):
        step = ring.p ** (ring.N - depth)
        if candidates is not None:
            mults = [m for m in candidates if all(e % step == 0 for e in m)]
        else:
            axis = list(range(0, bound + 1, step))
            if len(axis) ** nv > max_cols:
                break
            mults = [m for m in itertools.product(axis, repeat=nv)
                     if prec is None or ring.degree_units(m) < prec * ring.q]
        if len(mults) * len(gens) > max_cols:
            break
        products = []
        labels = []
        for gi, g in enumerate(gens):
            for m in mults:
                prod = g * PerfPoly(ring, {m: 1}, prec, reduced=True)
                products.append(prod.with_prec(prec))
                labels.append((gi, m))
        support = set(target.with_prec(prec).terms)
        for pr in products:
            support.update(pr.terms)
        cols = sorted(support)
        idx = {m: i for i, m in enumerate(cols)}
        a = np.zeros((len(cols), len(products)), dtype=np.int64)
        for j, pr in enumerate(products):
            for m, c in pr.terms.items():
                a[idx[m], j] = c
        b = np.zeros(len(cols), dtype=np.int64)
        for m, c in target.with_prec(prec).terms.items():
            b[idx[m]] = c
        x = linalg.solve(a, b, ring.p) if len(products) else None
        if x is not None:
            cert = [ring.zero(prec) for _ in gens]
            for j, c in enumerate(x):
                if c:
                    gi, m = labels[j]
                    cert[gi] = cert[gi] + PerfPoly(ring, {m: int(c)}, prec, reduced=True)
            return True, cert
    return False, None


def ideal_membership(a, gens):
    """Decide ``a in (gens)`` at the working truncation.

    The generators are replaced by their depth-``N`` Frobenius roots (which
    generate the perfection-saturated ideal).  Returns ``(True, cert)`` with
    ``cert[i]`` multiplying ``gens[i]`` (the original, unsaturated generator
    when no root was taken), or ``(False, None)``.  A negative answer means
    "not certified at this precision".
    """
    ring = a.ring
    roots = []
    for g in gens:
        if g.ring != ring:
            raise RingMismatch("generator ring differs")
        r = g.with_prec(None) if g.prec is None else g
        k = 0
        while k < ring.N:
            try:
                r2 = r.frobenius_inverse()
            except PrecisionExhausted:
                break
            r, k = r2, k + 1
        roots.append((r, k))
    if ring.finite:
        prec = a.prec if a.prec is not None else ring.D
        bound = int(prec * ring.q)
    else:
        bound = max((max(m, default=0) for m in a.terms), default=0) + ring.budget.DT * ring.q
    ok, cert = _window_solve(ring, [r for r, _ in roots], a, bound)
    if not ok:
        return False, None
    return True, {"roots": [str(r) for r, _ in roots], "multipliers": cert,
                  "root_elements": [r for r, _ in roots]}
