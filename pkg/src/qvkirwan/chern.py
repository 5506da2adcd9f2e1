"""Truncated Chern-class calculus in a free polynomial model.

A class is an integer polynomial in symbols ``c_k(B)``, where ``B`` names a
bundle living on the left or the right factor of a product.  ``c_k`` has
weight ``k`` (cohomological degree ``2k``); everything above weight ``d`` is
dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

LEFT, RIGHT = "left", "right"


class IntegralityError(AssertionError):
    pass


class SymmetricReductionError(AssertionError):
    pass


@dataclass(frozen=True)
class BundleSymbol:
    name: str
    rank: int
    side: str = LEFT
    dual: bool = False
    trivial: bool = False

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be non-negative")
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
        if self.trivial and self.rank != 1:
            raise ValueError("a trivial symbol stands for the trivial line bundle")

    def dualize(self) -> "BundleSymbol":
        return BundleSymbol(self.name, self.rank, self.side, not self.dual, self.trivial)


# A variable is (side, name, k); sides sort left before right.
Var = tuple
Mono = tuple  # sorted tuple of (Var, exponent)


def _weight(m: Mono) -> int:
    return sum(v[2] * e for v, e in m)


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    out = dict(m1)
    for v, e in m2:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


def _check_int(c):
    if type(c) is not int:
        raise IntegralityError(f"non-integer coefficient {c!r}")
    return c


class GradedClass:
    __slots__ = ("d", "terms")

    def __init__(self, d: int, terms=None):
        if d < 0:
            raise ValueError("truncation degree must be non-negative")
        self.d = d
        self.terms = {}
        for m, c in (terms or {}).items():
            _check_int(c)
            if c and _weight(m) <= d:
                self.terms[m] = self.terms.get(m, 0) + c
        self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def one(cls, d: int) -> "GradedClass":
        return cls(d, {(): 1})

    @classmethod
    def chern_symbol(cls, B: BundleSymbol, k: int, d: int) -> "GradedClass":
        """``c_k(B)`` as a class; zero above the rank."""
        if k == 0:
            return cls.one(d)
        if B.trivial or k > B.rank:
            return cls(d)
        sign = -1 if (B.dual and k % 2) else 1
        return cls(d, {(((B.side, B.name, k), 1),): sign})

    def _same(self, other: "GradedClass"):
        if not isinstance(other, GradedClass):
            raise TypeError("expected a GradedClass")
        if other.d != self.d:
            raise ValueError(f"truncation mismatch: {self.d} vs {other.d}")

    def __add__(self, other):
        self._same(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return GradedClass(self.d, t)

    def __neg__(self):
        return GradedClass(self.d, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k: int) -> "GradedClass":
        return GradedClass(self.d, {m: k * c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._same(other)
        t = {}
        for m1, c1 in self.terms.items():
            w1 = _weight(m1)
            for m2, c2 in other.terms.items():
                if w1 + _weight(m2) > self.d:
                    continue
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return GradedClass(self.d, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, GradedClass) and self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    def constant(self) -> int:
        return self.terms.get((), 0)

    def homogeneous(self, w: int) -> "GradedClass":
        return GradedClass(self.d, {m: c for m, c in self.terms.items() if _weight(m) == w})

    def is_integral(self) -> bool:
        return all(type(c) is int for c in self.terms.values())

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: (_weight(mc[0]), mc[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            body = "*".join(f"c{k}({name})" + (f"^{e}" if e > 1 else "") for (_, name, k), e in m)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def total_chern(B: BundleSymbol, d: int) -> GradedClass:
    out = GradedClass.one(d)
    for k in range(1, min(B.rank, d) + 1):
        out = out + GradedClass.chern_symbol(B, k, d)
    return out


def whitney(a: GradedClass, b: GradedClass) -> GradedClass:
    return a * b


def segre_inverse(a: GradedClass) -> GradedClass:
    if a.constant() != 1:
        raise ValueError("constant term must be 1")
    u = GradedClass.one(a.d) - a  # no constant term, so u^(d+1) = 0
    out, power = GradedClass.one(a.d), GradedClass.one(a.d)
    for _ in range(a.d):
        power = power * u
        if not power.terms:
            break
        out = out + power
    return out


# ------------------------------------------------- formal roots

def _poly_mul(p: dict, q: dict, d: int) -> dict:
    out = {}
    for a, c in p.items():
        wa = sum(a)
        for b, e in q.items():
            if wa + sum(b) > d:
                continue
            k = tuple(x + y for x, y in zip(a, b))
            out[k] = out.get(k, 0) + c * e
    return {k: c for k, c in out.items() if c}


def _unit(n: int, i: int) -> tuple:
    return tuple(1 if j == i else 0 for j in range(n))


def _elementary(n: int, offset: int, size: int, k: int) -> dict:
    """e_k of the variables ``offset..offset+size-1`` inside ``n`` variables."""
    out = {}
    for idx in combinations(range(offset, offset + size), k):
        out[tuple(1 if j in idx else 0 for j in range(n))] = 1
    return out


def tensor_root_polynomial(e: int, f: int, d: int) -> dict:
    """``prod_{p,q} (1 + x_p + y_q)`` truncated at weight ``d``, in ``e + f`` variables."""
    n = e + f
    zero = (0,) * n
    poly = {zero: 1}
    for p_, q_ in product(range(e), range(f)):
        poly = _poly_mul(poly, {zero: 1, _unit(n, p_): 1, _unit(n, e + q_): 1}, d)
    return poly


def reduce_bisymmetric(poly: dict, e: int, f: int) -> dict:
    """Write a polynomial symmetric in the first ``e`` and the last ``f`` variables
    as a polynomial in their elementary symmetric functions.

    Returns ``{(ea, fb): coeff}`` where ``ea[k-1]`` is the exponent of ``e_k(x)``.
    """
    n = e + f
    d = max((sum(m) for m in poly), default=0)
    poly = dict(poly)
    out = {}
    cache = {}

    def elem(off, size, k):
        key = (off, size, k)
        if key not in cache:
            cache[key] = _elementary(n, off, size, k)
        return cache[key]

    while poly:
        lead = max(poly)
        c = poly[lead]
        xs, ys = lead[:e], lead[e:]
        if any(xs[i] < xs[i + 1] for i in range(e - 1)) or any(ys[i] < ys[i + 1] for i in range(f - 1)):
            raise SymmetricReductionError(f"leading exponent {lead} is not a partition pair")
        ea = tuple(xs[k] - (xs[k + 1] if k + 1 < e else 0) for k in range(e))
        fb = tuple(ys[k] - (ys[k + 1] if k + 1 < f else 0) for k in range(f))
        term = {(0,) * n: c}
        for k, a in enumerate(ea, start=1):
            for _ in range(a):
                term = _poly_mul(term, elem(0, e, k), d)
        for k, b in enumerate(fb, start=1):
            for _ in range(b):
                term = _poly_mul(term, elem(e, f, k), d)
        for m, v in term.items():
            poly[m] = poly.get(m, 0) - v
            if poly[m] == 0:
                del poly[m]
        if term.get(lead) != c:
            raise SymmetricReductionError("leading term did not cancel")
        out[(ea, fb)] = out.get((ea, fb), 0) + c
    return out


def _substitute(E: BundleSymbol, F: BundleSymbol, reduced: dict, d: int) -> GradedClass:
    out = GradedClass(d)
    for (ea, fb), c in reduced.items():
        term = GradedClass(d, {(): c})
        for k, a in enumerate(ea, start=1):
            for _ in range(a):
                term = term * GradedClass.chern_symbol(E, k, d)
        for k, b in enumerate(fb, start=1):
            for _ in range(b):
                term = term * GradedClass.chern_symbol(F, k, d)
        out = out + term
    return out


def chern_tensor(E: BundleSymbol, F: BundleSymbol, d: int) -> GradedClass:
    """Total Chern class of ``E (x) F`` by the splitting principle."""
    if E.trivial:
        return total_chern(F, d)
    if F.trivial:
        return total_chern(E, d)
    if E.rank == 0 or F.rank == 0:
        return GradedClass.one(d)
    poly = tensor_root_polynomial(E.rank, F.rank, d)
    out = _substitute(E, F, reduce_bisymmetric(poly, E.rank, F.rank), d)
    if not out.is_integral():
        raise IntegralityError("tensor Chern class has a non-integer coefficient")
    return out


def chern_of_complex(terms, d: int) -> GradedClass:
    """``terms`` is a list of ``(left, right, degree)`` with degree in {-1, 0, 1}."""
    out = GradedClass.one(d)
    for left, right, deg in terms:
        if deg not in (-1, 0, 1):
            raise ValueError(f"degree {deg} outside -1..1")
        c = chern_tensor(left, right, d)
        out = out * (c if deg == 0 else segre_inverse(c))
    return out


def top_class(a: GradedClass, d: int) -> GradedClass:
    return a.homogeneous(d)


def split_mono(m: Mono) -> tuple[Mono, Mono]:
    return (tuple(x for x in m if x[0][0] == LEFT), tuple(x for x in m if x[0][0] == RIGHT))


def kunneth_decomposition(a: GradedClass) -> dict:
    """``a = sum_y x_y (x) y`` with ``y`` running over right monomials."""
    out = {}
    for m, c in a.terms.items():
        left, right = split_mono(m)
        out.setdefault(right, {})
        out[right][left] = out[right].get(left, 0) + c
    return {r: GradedClass(a.d, t) for r, t in sorted(out.items()) if any(t.values())}


def kunneth_left_components(a: GradedClass) -> list[GradedClass]:
    seen, out = set(), []
    for x in kunneth_decomposition(a).values():
        if x.terms and x not in seen:
            seen.add(x)
            out.append(x)
    return out


def reassemble(decomp: dict, d: int) -> GradedClass:
    out = GradedClass(d)
    for right, left in decomp.items():
        out = out + left * GradedClass(d, {right: 1})
    return out


# ---------------------------------------------------- the complex R

def complex_terms(D, alpha, infinity: str, left: str = "V", right: str = "V'") -> list:
    """Terms of ``L_I0 -> E -> L_I0`` on a product of two copies of the quotient.

    ``Hom(V_i, W_j)`` is modelled as ``V_i^* (x) W_j``; the framing vertex
    carries the trivial line bundle on both sides.
    """
    def sym(side, name, i):
        if i == infinity:
            return BundleSymbol("O", 1, side, trivial=True)
        return BundleSymbol(f"{name}{i}", alpha[i], side)

    terms = []
    for i in D.vertices:
        if i != infinity:
            terms.append((sym(LEFT, left, i).dualize(), sym(RIGHT, right, i), -1))
    for h in D.arrows:
        terms.append((sym(LEFT, left, D.src[h]).dualize(), sym(RIGHT, right, D.tgt[h]), 0))
    for i in D.vertices:
        if i != infinity:
            terms.append((sym(LEFT, left, i).dualize(), sym(RIGHT, right, i), 1))
    return terms


def evaluate(a: GradedClass, values: dict) -> int:
    """Substitute integers for the variables ``(side, name, k)``."""
    total = 0
    for m, c in a.terms.items():
        v = c
        for var, e in m:
            v *= values.get(var, 0) ** e
        total += v
    return total
