"""Truncated Witt vectors over perfect F_p-algebras.

Digits are stored in the classical Witt coordinates ``(a_0, a_1, ...)``,
where the Teichmueller expansion reads ``sum p^k [a_k^(1/p^k)]``.  Ring
operations evaluate integer structure polynomials derived once through ghost
components; the ghost identities are re-checked as exact polynomial
identities before a cache is used.

Two truncations of the digit ring are supported: ``uniform`` keeps every
digit modulo degree ``D`` (the ring ``W_n(R/(deg >= D))``), and ``weighted``
keeps digit ``k`` modulo degree ``p^k (D - k)``, which is the quotient of
``W(R)`` by the ball of weighted-Gauss-norm exponent ``>= D``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import ZZ
from sympy.polys.rings import ring as sympy_ring

from .errors import (
    BadWitness,
    NormTooLarge,
    NotAUnit,
    PrecisionExhausted,
    ResourceBound,
    RingMismatch,
)
from .fpring import NormExponent, PerfPoly, _min_prec, ideal_membership

MAX_STRUCTURE_TERMS = 200_000


# ---------------------------------------------------------------------------
# structure polynomials
# ---------------------------------------------------------------------------

class StructurePolyCache:
    """Integer Witt structure polynomials for one ``(p, n)``.

    ``add[k]``/``mul[k]`` are polynomials in ``X_0..X_{n-1}, Y_0..Y_{n-1}``;
    ``neg[k]`` in ``X_0..X_{n-1}``.  ``carry[k]`` is the Teichmueller digit of
    ``[X] + [Y]`` as a homogeneous degree-one form in fractional powers of
    ``X`` and ``Y``: a dict ``{(a, b): c}`` meaning ``c * X^a * Y^b``.
    """

    def __init__(self, p, n, max_terms=MAX_STRUCTURE_TERMS):
        self.p = p
        self.n = n
        names = [f"X{i}" for i in range(n)] + [f"Y{i}" for i in range(n)]
        self.R2, *gens = sympy_ring(",".join(names), ZZ)
        self.X, self.Y = gens[:n], gens[n:]
        self.R1, *self.Z = sympy_ring(",".join(f"X{i}" for i in range(n)), ZZ)
        self.add = self._derive(lambda k: self.ghost(self.X, k) + self.ghost(self.Y, k), self.R2, max_terms)
        self.mul = self._derive(lambda k: self.ghost(self.X, k) * self.ghost(self.Y, k), self.R2, max_terms)
        self.neg = self._derive(lambda k: -self.ghost(self.Z, k), self.R1, max_terms)
        self.carry = [self._carry(k) for k in range(n)]
        self.certificate = None
        self._modp = {}

    def ghost(self, Z, k):
        p = self.p
        out = Z[0].ring.zero
        for i in range(k + 1):
            out += p**i * Z[i] ** (p ** (k - i))
        return out

    def _derive(self, target, R, max_terms):
        p = self.p
        polys = []
        for k in range(self.n):
            t = target(k)
            for i in range(k):
                t -= p**i * polys[i] ** (p ** (k - i))
            # exquo raises if any coefficient is not divisible: integrality
            t = t.exquo(R(p**k)) if k else t
            if len(t) > max_terms:
                raise ResourceBound(f"structure polynomial has {len(t)} terms > {max_terms}")
            polys.append(t)
        return polys

    def _carry(self, k):
        p, n = self.p, self.n
        out = {}
        for mon, c in self.add[k].terms():
            if any(mon[i] for i in range(n) if i != 0) or any(mon[n + i] for i in range(1, n)):
                continue
            c %= p
            if c:
                out[(Fraction(mon[0], p**k), Fraction(mon[n], p**k))] = c
        return out

    def certify(self):
        """Check every ghost identity exactly over Z; return a certificate dict."""
        rows = []
        ok_all = True
        for k in range(self.n):
            gX, gY, gZ = self.ghost(self.X, k), self.ghost(self.Y, k), self.ghost(self.Z, k)
            checks = {
                "add": _ghost_of(self, self.add, k, self.R2) - (gX + gY),
                "mul": _ghost_of(self, self.mul, k, self.R2) - gX * gY,
                "neg": _ghost_of(self, self.neg, k, self.R1) + gZ,
            }
            for kind, diff in checks.items():
                ok = diff == 0
                ok_all &= ok
                polys = getattr(self, kind)
                rows.append({
                    "kind": kind, "k": k, "ghost_identity": ok,
                    "terms": len(polys[k]),
                    "integral": all(isinstance(int(c), int) for c in polys[k].coeffs()),
                })
        self.certificate = {"p": self.p, "n": self.n, "ok": ok_all, "rows": rows}
        return self.certificate

    def modp(self, kind):
        """``[(coeff mod p, exponent tuple), ...]`` for each k, zero terms dropped."""
        if kind not in self._modp:
            out = []
            for poly in getattr(self, kind):
                terms = []
                for mon, c in poly.terms():
                    c = int(c) % self.p
                    if c:
                        terms.append((c, tuple(mon)))
                out.append(terms)
            self._modp[kind] = out
        return self._modp[kind]


def _ghost_of(cache, polys, k, R):
    p = cache.p
    out = R.zero
    for i in range(k + 1):
        out += p**i * polys[i] ** (p ** (k - i))
    return out


@lru_cache(maxsize=None)
def build_structure_cache(p, n, max_terms=MAX_STRUCTURE_TERMS):
    """Derive and certify the structure polynomials; raise if certification fails."""
    if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
        raise ValueError(f"{p} is not prime")
    if n < 1:
        raise ValueError("length must be >= 1")
    cache = StructurePolyCache(p, n, max_terms)
    cert = cache.certify()
    if not cert["ok"]:  # pragma: no cover - would indicate a derivation bug
        raise AssertionError("ghost identity failed during certification")
    return cache


# ---------------------------------------------------------------------------
# Witt rings and vectors
# ---------------------------------------------------------------------------

class WittRing:
    """``W_n`` of a :class:`RingPresentation` at a chosen truncation."""

    def __init__(self, ring, n=None, mode="uniform", D=None):
        self.ring = ring
        self.p = ring.p
        self.n = n or ring.budget.n
        self.mode = mode
        self.cache = build_structure_cache(self.p, self.n)
        if mode == "uniform":
            self.D = ring.D
            self.caps = tuple(ring.D for _ in range(self.n))
        elif mode == "weighted":
            self.D = Fraction(D if D is not None else ring.D)
            caps = []
            for k in range(self.n):
                c = max(Fraction(0), self.p**k * (self.D - k))
                if ring.D is not None and c > ring.D:
                    raise ValueError(
                        f"weighted digit {k} needs digit-ring cap {c} > D={ring.D}")
                caps.append(c)
            self.caps = tuple(caps)
        else:
            raise ValueError(f"unknown truncation mode {mode!r}")

    def __eq__(self, other):
        return (isinstance(other, WittRing) and self.ring == other.ring and self.n == other.n
                and self.mode == other.mode and self.caps == other.caps)

    def __hash__(self):
        return hash((self.n, self.mode, self.caps))

    def __repr__(self):
        return f"WittRing(W_{self.n}({self.ring.name}), {self.mode}, D={self.D})"

    # constructors -----------------------------------------------------------
    def vec(self, digits, length=None):
        length = len(digits) if length is None else length
        return WittVec(self, tuple(digits[:length]), length)

    def zero(self):
        return self.vec([self.ring.zero() for _ in range(self.n)])

    def one(self):
        return self.teichmuller(self.ring.one())

    def teichmuller(self, a):
        if a.ring != self.ring:
            raise RingMismatch("digit ring differs")
        return self.vec([a] + [self.ring.zero() for _ in range(self.n - 1)])

    def scalar(self, k):
        """The image of the integer ``k``."""
        if k < 0:
            return -self.scalar(-k)
        result = self.zero()
        base = self.one()
        while k:
            if k & 1:
                result = result + base
            base = base + base
            k >>= 1
        return result

    def p_elt(self):
        return self.scalar(self.p)

    def parse(self, digits):
        """Witt vector from a list of digit strings in the polynomial grammar."""
        ds = [self.ring.parse(d) if isinstance(d, str) else d for d in digits]
        ds += [self.ring.zero() for _ in range(self.n - len(ds))]
        return self.vec(ds)

    def random_element(self, rng, depth=None, max_terms=3, allow_negative=False):
        return self.vec([
            self.ring.random_element(rng, max_terms=max_terms, depth=depth,
                                     allow_negative=allow_negative)
            for _ in range(self.n)
        ])


class WittVec:
    """Immutable truncated Witt vector in classical coordinates."""

    __slots__ = ("W", "digits", "length")

    def __init__(self, W, digits, length):
        self.W = W
        self.length = length
        self.digits = tuple(d.with_prec(W.caps[k]) for k, d in enumerate(digits[:length]))

    # helpers -----------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, int):
            return self.W.scalar(other)
        if not isinstance(other, WittVec):
            return NotImplemented
        if other.W is not self.W and other.W != self.W:
            raise RingMismatch(f"{self.W!r} vs {other.W!r}")
        return other

    def _eval(self, kind, other, length):
        polys = self.W.cache.modp(kind)
        cache = {}

        def power(idx, e):
            key = (idx, e)
            if key not in cache:
                src = self.digits if idx < self.W.n else other.digits
                cache[key] = src[idx % self.W.n] ** e
            return cache[key]

        out = []
        zero = self.W.ring.zero()
        for k in range(length):
            acc = zero
            for c, mon in polys[k]:
                t = None
                for idx, e in enumerate(mon):
                    if e:
                        f = power(idx, e)
                        t = f if t is None else t * f
                if t is None:
                    t = self.W.ring.one()
                acc = acc + (t if c == 1 else t * c)
            out.append(acc.with_prec(self.W.caps[k]))
        return WittVec(self.W, out, length)

    # ring operations ------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._eval("add", other, min(self.length, other.length))

    __radd__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._eval("mul", other, min(self.length, other.length))

    __rmul__ = __mul__

    def __neg__(self):
        if self.W.p == 2:
            return self._eval("neg", self, self.length)
        p = self.W.p
        return WittVec(self.W, [d * (p - 1) for d in self.digits], self.length)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers need invert()")
        result = self.W.one().truncate(self.length)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("WittVec equality is precision-dependent; not hashable")

    def is_zero(self):
        return all(d.is_zero() for d in self.digits)

    def truncate(self, length):
        return WittVec(self.W, self.digits, min(length, self.length))

    # Frobenius / Verschiebung / delta --------------------------------------------
    def frobenius(self):
        return WittVec(self.W, [d.frobenius() for d in self.digits], self.length)

    def verschiebung(self):
        ds = [self.W.ring.zero()] + list(self.digits[: self.W.n - 1])
        return WittVec(self.W, ds, min(self.W.n, self.length + 1))

    def divide_by_p(self):
        """Exact division by p: needs digit 0 to vanish; costs one digit and one depth level."""
        if not self.digits[0].is_zero():
            raise ValueError("not divisible by p (digit 0 is nonzero)")
        if self.length < 2:
            raise PrecisionExhausted("no digits left after division by p")
        ds = [d.frobenius_inverse() for d in self.digits[1:]]
        v = object.__new__(WittVec)
        v.W, v.length = self.W, self.length - 1
        v.digits = tuple(ds)
        return v

    def delta(self):
        """The p-derivation ``(phi(x) - x^p) / p`` at length ``n - 1``."""
        if self.length < 2:
            raise PrecisionExhausted("delta needs effective length >= 2")
        return (self.frobenius() - self ** self.W.p).divide_by_p()

    # norms -------------------------------------------------------------------
    def teich_alphas(self):
        """Norm exponents of the Teichmueller digits ``a_k^(1/p^k)``."""
        p = self.W.p
        out = []
        for k, d in enumerate(self.digits):
            a = d.gauss_norm().alpha
            out.append(None if a is None else a / p**k)
        return out

    def digit_precisions(self):
        p = self.W.p
        return [None if d.prec is None else d.prec / p**k for k, d in enumerate(self.digits)]

    def gauss_norm(self):
        vals = [a for a in self.teich_alphas() if a is not None]
        return NormExponent(min(vals) if vals else None)

    def weighted_gauss_norm(self):
        vals = [k + a for k, a in enumerate(self.teich_alphas()) if a is not None]
        return NormExponent(min(vals) if vals else None)

    def norm_precision(self, weighted=True):
        """Exponent up to which the (weighted) norm of this vector is known."""
        cap = Fraction(self.length) if weighted else None
        for k, pr in enumerate(self.digit_precisions()):
            if pr is not None:
                cap = _min_prec(cap, pr + k if weighted else pr)
        return cap

    # display -----------------------------------------------------------------
    def teichmuller_digits(self):
        """Teichmueller digits ``a_k^(1/p^k)``; needs depth k for digit k."""
        out = []
        for k, d in enumerate(self.digits):
            for _ in range(k):
                d = d.frobenius_inverse()
            out.append(d)
        return out

    def __repr__(self):
        return f"WittVec({[str(d) for d in self.digits]})"

    def to_json(self):
        return [str(d) for d in self.digits]


# module-level operation names ---------------------------------------------------

def w_add(x, y):
    return x + y


def w_mul(x, y):
    return x * y


def w_neg(x):
    return -x


def teichmuller(W, a):
    return W.teichmuller(a)


def verschiebung(x):
    return x.verschiebung()


def witt_frobenius(x):
    return x.frobenius()


def delta(x):
    return x.delta()


def gauss_norm_witt(x):
    return x.gauss_norm()


def weighted_gauss_norm(x):
    return x.weighted_gauss_norm()


def spectral_seminorm_estimate(x, k):
    """``weighted_alpha(x^(p^k)) / p^k``, reported with the precision it is known to."""
    p = x.W.p
    y = x ** (p**k)
    a = y.weighted_gauss_norm()
    cap = y.norm_precision()
    alpha = a.capped(cap)
    return NormExponent(None if a.is_inf and cap is None else alpha / p**k), (None if cap is None else cap / p**k)


# predicates ----------------------------------------------------------------------

@dataclass
class Certificate:
    """Outcome of a predicate check.  ``certified`` False means "not certified at
    this precision", never a mathematical negative."""

    certified: bool
    reason: str = ""
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.certified

    def to_json(self):
        return {"certified": self.certified, "reason": self.reason,
                "witness": {k: _jsonable(v) for k, v in self.witness.items()}}


def _jsonable(v):
    if hasattr(v, "to_json"):
        return v.to_json()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def is_distinguished(d):
    if d.length < 2:
        raise PrecisionExhausted("is_distinguished needs effective length >= 2")
    dd = d.delta()
    ok, cert = ideal_membership(d.W.ring.one(), [d.digits[0], dd.digits[0]])
    if not ok:
        return Certificate(False, "1 not found in (d_0, delta(d)_0) at this precision")
    mult = cert["multipliers"]
    roots = cert["root_elements"]
    recheck = (mult[0] * roots[0] + mult[1] * roots[1]) == d.W.ring.one()
    return Certificate(recheck, "unit ideal witness" if recheck else "witness failed to re-verify",
                       {"delta_0": dd.digits[0], "roots": roots, "multipliers": mult})


def is_primitive(z):
    if z.length < 2:
        raise PrecisionExhausted("is_primitive needs effective length >= 2")
    a0 = z.digits[0].gauss_norm()
    if a0.is_inf:
        nil = True
    else:
        nil = a0.alpha > 0
    if not nil:
        return Certificate(False, "digit 0 is not topologically nilpotent")
    try:
        inv = z.digits[1].invert()
    except NotAUnit:
        return Certificate(False, "digit 1 is not certified a unit at this precision")
    ok = (inv * z.digits[1]) == z.W.ring.one()
    return Certificate(ok, "digit 1 inverse re-verified" if ok else "inverse failed",
                       {"z0_alpha": a0.alpha, "z1_inverse": inv})


# constructive algorithms -------------------------------------------------------------

def monomial_expansion(x):
    """Write ``x = sum_k p^k sum_m [c_m * m]`` with Teichmueller lifts of monomials.

    Returns ``[(k, PerfPoly monomial term), ...]``.  Each level strips the
    Teichmueller lifts of digit 0 and divides the remainder by ``p``.
    """
    W = x.W
    out = []
    r = x
    level = 0
    while True:
        d0 = r.digits[0]
        s = W.zero().truncate(r.length)
        for m, c in d0.terms.items():
            mono = PerfPoly(W.ring, {m: c}, None, reduced=True)
            out.append((level, mono))
            s = s + W.teichmuller(mono).truncate(r.length)
        rest = r - s
        if rest.is_zero() or r.length < 2:
            break
        r = rest.divide_by_p()
        level += 1
    return out


def _rational_power(a, t):
    """``a^t`` for a rational ``t >= 0`` with p-power denominator (perfect ring)."""
    p = a.ring.p
    num, den = t.numerator, t.denominator
    out = a ** num
    while den > 1:
        if den % p:
            raise ValueError(f"exponent {t} is not p-adically fractional")
        out = out.frobenius_inverse()
        den //= p
    return out


def unit_witt_combination(abar, xbar, W):
    """Write 1 as ``sum_j c_j [x_0]^j_0 ... [x_m]^j_m`` in ``W`` (a Witt ring).

    The carries of ``sum [z_i]`` are expanded over an auxiliary free ring in
    variables ``z_i`` standing for ``a_i x_i``; every carry monomial is
    ``prod z_i^t_i`` with ``sum t_i = 1``.  Since ``sum a_i x_i = 1`` the
    Teichmueller expansion gives ``1 = (sum [z_i] - carries)^(m+1)``; this is
    multiplied out, and each term ``p^L [C prod z_i^i_i]`` is split as
    ``[C prod a_i^i_i x_i^(i_i - j_i)] * prod [x_i]^j_i`` with ``j_i`` the
    integer part of ``i_i``.  Returns ``(coeffs, report)``; ``coeffs`` maps
    ``j`` to Witt vectors of ``W`` and the identity is re-verified in ``W``.
    """
    from .fpring import PrecisionBudget, RingPresentation

    ring = W.ring
    m1 = len(abar)
    if len(xbar) != m1 or m1 == 0:
        raise ValueError("abar and xbar must have the same positive length")
    total = ring.zero()
    for a, x in zip(abar, xbar):
        total = total + a * x
    if total != ring.one():
        raise BadWitness(f"sum a_i x_i = {total} != 1")
    n, p = W.n, W.p
    zs = [f"z{i}" for i in range(m1)]
    aux = RingPresentation(p, zs, ungraded=zs, budget=PrecisionBudget(n=n, D=None, N=max(1, n)))
    Wa = WittRing(aux, n)
    s = Wa.zero()
    for z in zs:
        s = s + Wa.teichmuller(aux.var(z))
    # level-0 monomials are the z_i themselves (sign +1); deeper levels are carries (sign -1)
    factor = [(lvl, 1 if lvl == 0 else -1, mono) for lvl, mono in monomial_expansion(s)]
    # key: (p-adic level, z exponents in units, F_p coefficient of the Teichmueller lift)
    acc = {(0, aux.unit_exp, 1): 1}
    for _ in range(m1):
        nxt = {}
        for (lvl, mexp, cc), mult in acc.items():
            for flvl, sign, mono in factor:
                L = lvl + flvl
                if L >= n:
                    continue
                (fm, fc), = mono.terms.items()
                key = (L, tuple(u + v for u, v in zip(mexp, fm)), (cc * fc) % p)
                nxt[key] = nxt.get(key, 0) + mult * sign
        acc = {k: v for k, v in nxt.items() if v % (p ** (n - k[0])) != 0}
    coeffs = {}
    for (lvl, me, cc), mult in sorted(acc.items()):
        exps = [Fraction(e, aux.q) for e in me]
        j = tuple(int(e) for e in exps)  # floor: exponents are nonnegative
        mono = ring.scalar(cc)
        for a, x, e, jj in zip(abar, xbar, exps, j):
            mono = mono * _rational_power(a, e) * _rational_power(x, e - jj)
        term = W.scalar(mult * p**lvl) * W.teichmuller(mono)
        coeffs[j] = coeffs[j] + term if j in coeffs else term
    # verification in W (with relations)
    lhs = W.zero()
    for j, c in coeffs.items():
        t = c
        for (x, jj) in zip(xbar, j):
            t = t * (W.teichmuller(x) ** jj)
        lhs = lhs + t
    ok = lhs == W.one()
    if not ok:
        raise AssertionError("unit combination failed to verify")
    report = {
        "terms": len(acc), "groups": [list(j) for j in sorted(coeffs)],
        "min_exponent_sum": min(sum(j) for j in coeffs),
        "verified": ok,
    }
    return coeffs, report


def small_norm_decompose(f, b, xbar):
    """Return ``a_i = f * b_i`` with ``f = sum a_i [x_i]`` and every ``a_i`` integral."""
    W = f.W
    one = W.zero()
    for bi, x in zip(b, xbar):
        one = one + bi * W.teichmuller(x)
    if one != W.one():
        raise BadWitness("sum b_i [x_i] != 1")
    out = []
    for bi in b:
        a = f * bi
        for k, d in enumerate(a.digits):
            for m in d.terms:
                if any(e < 0 for e in m):
                    raise NormTooLarge(f"digit {k} of f*b has negative exponent: {d}")
        out.append(a)
    recon = W.zero()
    for a, x in zip(out, xbar):
        recon = recon + a * W.teichmuller(x)
    if recon != f:
        raise AssertionError("decomposition failed to reconstruct f")
    return out


def small_norm_threshold(b):
    """Gauss-norm exponent above which ``small_norm_decompose`` is guaranteed
    (single-variable rings: integrality is a nonnegative norm exponent)."""
    worst = Fraction(0)
    for bi in b:
        a = bi.gauss_norm().alpha
        if a is not None:
            worst = max(worst, -a)
    return worst


def perturb_parameters(f, g, k, witness, x0):
    """Replace ``(f_1, ..., f_n)`` by ``(f_1 + [x0]^k, f_2, ..., f_n, [x0]^k)``."""
    W = g.W
    xk = W.teichmuller(x0) ** k
    if len(witness) != len(f) + 1:
        raise BadWitness("witness needs one coefficient per f_i plus one for g")
    comb = W.zero()
    for a, fi in zip(witness, list(f) + [g]):
        comb = comb + a * fi
    if comb != xk:
        raise BadWitness("[x0]^k != sum a_i f_i + a g")
    new_f = [f[0] + xk] + list(f[1:]) + [xk]
    report = {
        "witness_identity": True,
        # old generators lie in the new ideal: f_1 = (f_1 + [x0]^k) - [x0]^k
        "f1_recovered": (new_f[0] - new_f[-1]) == f[0],
        "degenerate": xk.is_zero(),
    }
    return new_f, report
