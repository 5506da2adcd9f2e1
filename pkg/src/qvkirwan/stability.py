"""King stability for quiver representations.

Integer characters live in :class:`Theta`.  The graded-tripled character is
a Laurent polynomial in a formal parameter ``T`` that is compared as
``T -> infinity``: the sign of a value is the sign of its highest-exponent
coefficient.  No numeric ``T`` is ever chosen.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .linalg import (BudgetExceeded, DEFAULT_BUDGET, Field, Subspace, all_subspaces,
                     closure_generated_by, image_of, intersect, max_invariant_in, preimage,
                     subspace_sum)
from .quiver import DimensionVector, GtrQuiver, constant_gtr_dimension


class UnsupportedChamber(ValueError):
    pass


class DegenerateStability(ValueError):
    def __init__(self, witness):
        super().__init__(f"stability condition is degenerate; witness {witness!r}")
        self.witness = witness


class TValue:
    """Laurent polynomial in ``T`` with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, Fraction | int] | None = None):
        self.terms = {int(k): Fraction(v) for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def const(cls, c) -> "TValue":
        return cls({0: c})

    @classmethod
    def mono(cls, k: int, c=1) -> "TValue":
        return cls({k: c})

    def _coerce(self, other) -> "TValue":
        return other if isinstance(other, TValue) else TValue.const(other)

    def __add__(self, other) -> "TValue":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return TValue(out)

    __radd__ = __add__

    def __neg__(self) -> "TValue":
        return TValue({k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "TValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TValue":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TValue":
        if isinstance(other, TValue):
            out: dict[int, Fraction] = {}
            for k1, v1 in self.terms.items():
                for k2, v2 in other.terms.items():
                    out[k1 + k2] = out.get(k1 + k2, 0) + v1 * v2
            return TValue(out)
        return TValue({k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TValue):
            if isinstance(other, (int, Fraction)):
                other = TValue.const(other)
            else:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def leading(self) -> tuple[int, Fraction] | None:
        if not self.terms:
            return None
        k = max(self.terms)
        return k, self.terms[k]

    def __repr__(self) -> str:
        return f"TValue({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, reverse=True):
            c = self.terms[k]
            mag = abs(c)
            coef = "" if (mag == 1 and k != 0) else (str(mag.numerator) if mag.denominator == 1 else str(mag))
            mon = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
            sign = "-" if c < 0 else "+"
            parts.append((sign, coef + mon))
        head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        return " ".join([head] + [f"{s} {t}" for s, t in parts[1:]])


def t_sign(x) -> int:
    """Sign as T grows without bound."""
    if isinstance(x, TValue):
        lead = x.leading()
        return 0 if lead is None else (1 if lead[1] > 0 else -1)
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class Theta:
    coeffs: Mapping

    def __call__(self, beta) -> int:
        return self.evaluate(beta)

    def evaluate(self, beta) -> int:
        dims = beta.dims if isinstance(beta, DimensionVector) else beta
        if set(dims) != set(self.coeffs):
            raise ValueError("vertex sets of character and dimension vector differ")
        return sum(self.coeffs[v] * dims[v] for v in self.coeffs)

    def __getitem__(self, v):
        return self.coeffs[v]

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items(), key=str)))


def theta_eval(theta: Theta, beta: DimensionVector) -> int:
    return theta.evaluate(beta)


def cb_theta(theta0: Theta, v: DimensionVector, infinity: str = "inf") -> Theta:
    d = sum(theta0[i] * v[i] for i in theta0.coeffs)
    coeffs = dict(theta0.coeffs)
    coeffs[infinity] = -d
    return Theta(coeffs)


def is_nondegenerate(theta: Theta, alpha: DimensionVector, budget: int = DEFAULT_BUDGET):
    """``(True, None)`` or ``(False, beta)`` with ``0 < beta < alpha`` and ``theta(beta) == 0``."""
    if theta(alpha) != 0:
        warnings.warn(f"theta(alpha) = {theta(alpha)} is nonzero", stacklevel=2)
    size = 1
    for d in alpha.dims.values():
        size *= d + 1
    if size > budget:
        raise BudgetExceeded(f"{size} dimension vectors exceed budget {budget}")
    for beta in alpha.below():
        if beta.is_zero() or beta == alpha:
            continue
        if theta(beta) == 0:
            return False, beta
    return True, None


@dataclass(frozen=True, eq=False)
class GtrTheta:
    coeffs: Mapping[tuple, TValue]
    lg: Mapping[tuple, TValue]
    mid: Mapping[tuple, TValue]
    sm: Mapping[tuple, TValue]
    C: TValue
    infinity: str
    a: int
    b: int
    order: tuple = field(default=())

    def evaluate(self, m) -> TValue:
        return _pair(self.coeffs, m)

    __call__ = evaluate


def _pair(coeffs: Mapping, m) -> TValue:
    dims = m.dims if isinstance(m, DimensionVector) else m
    out = TValue()
    for key, c in coeffs.items():
        k = dims.get(key, 0)
        if k:
            out = out + c * k
    return out


def build_theta_gtr(theta: Theta, alpha: DimensionVector, a: int, b: int, order=None,
                    infinity: str = "inf", check: bool = True) -> GtrTheta:
    """The T-symbolic character on the graded-tripled quiver.

    ``order`` lists the non-framing vertices; vertex ``order[i-1]`` receives
    weights ``T^i`` and ``T^-i``, and the framing vertex gets ``T^(r+1)``.
    """
    if a >= b:
        raise ValueError("need a < b")
    if check:
        ok, witness = is_nondegenerate(theta, alpha)
        if not ok:
            raise DegenerateStability(witness)
    order = tuple(order) if order is not None else tuple(v for v in alpha if v != infinity)
    if set(order) | {infinity} != set(alpha.keys()):
        raise ValueError("ordering must list exactly the non-framing vertices")
    r = len(order)
    verts = list(order) + [infinity]
    keys = [(i, n) for n in range(a, b + 1) for i in verts]
    zero = {k: TValue() for k in keys}

    lg = dict(zero)
    lg[(infinity, b)] = lg[(infinity, b)] + TValue.mono(r + 1)
    lg[(infinity, a)] = lg[(infinity, a)] - TValue.mono(r + 1)
    for idx, i in enumerate(order, start=1):
        lg[(i, b)] = lg[(i, b)] + TValue.mono(idx)
        lg[(i, a)] = lg[(i, a)] - TValue.mono(idx)

    mid = dict(zero)
    for i in verts:
        mid[(i, a)] = mid[(i, a)] + TValue.const(theta[i])

    sm = dict(zero)
    for idx, i in enumerate(order, start=1):
        sm[(i, a)] = sm[(i, a)] - TValue.mono(-idx)
    for n in range(a + 1, b):
        for i in verts:
            sm[(i, n)] = sm[(i, n)] + TValue.mono(-r - 1)

    agtr = constant_gtr_dimension(alpha, a, b)
    if not _pair(lg, agtr).is_zero():
        raise AssertionError("large part does not vanish on the constant dimension vector")
    return assemble_theta_gtr(lg, mid, sm, agtr, infinity, a, b, order)


def assemble_theta_gtr(lg: Mapping, mid: Mapping, sm: Mapping, agtr: DimensionVector,
                       infinity: str, a: int, b: int, order=()) -> GtrTheta:
    """Sum three tiers and shift the framing vertex in the bottom slice so
    that the result vanishes on ``agtr``."""
    keys = list(agtr.dims)
    C = _pair(lg, agtr) + _pair(mid, agtr) + _pair(sm, agtr)
    coeffs = {k: lg.get(k, TValue()) + mid.get(k, TValue()) + sm.get(k, TValue()) for k in keys}
    coeffs[(infinity, a)] = coeffs[(infinity, a)] - C
    out = GtrTheta(coeffs, dict(lg), dict(mid), dict(sm), C, infinity, a, b, tuple(order))
    if not out(agtr).is_zero():
        raise AssertionError("graded character does not vanish on the constant dimension vector")
    return out


@dataclass
class GtrNondegeneracyReport:
    nondegenerate: bool
    checked: int
    case_counts: dict
    witness: dict | None = None
    witness_value: TValue | None = None


def check_gtr_nondegenerate(theta: GtrTheta, agtr: DimensionVector,
                            budget: int = 10**5) -> GtrNondegeneracyReport:
    """Exhaustively checks ``theta(m) != 0`` for every ``0 < m < agtr``.

    Vectors are tallied by the value of ``m`` at the framing vertex in the
    bottom slice (the two cases of the argument).
    """
    keys = list(agtr.dims)
    size = 1
    for k in keys:
        size *= agtr[k] + 1
    if size > budget:
        raise BudgetExceeded(f"{size} sub-dimension vectors exceed budget {budget}")
    exps = sorted({e for c in theta.coeffs.values() for e in c.terms})
    table = [[theta.coeffs.get(k, TValue()).terms.get(e, 0) for e in exps] for k in keys]
    top = tuple(agtr[k] for k in keys)
    ia = keys.index((theta.infinity, theta.a))
    cases = {0: 0, 1: 0}
    checked = 0
    for m in product(*(range(d + 1) for d in top)):
        if not any(m) or m == top:
            continue
        checked += 1
        cases[m[ia]] = cases.get(m[ia], 0) + 1
        vals = [0] * len(exps)
        for mk, row in zip(m, table):
            if mk:
                for j, c in enumerate(row):
                    if c:
                        vals[j] += mk * c
        if not any(vals):
            wit = dict(zip(keys, m))
            return GtrNondegeneracyReport(False, checked, cases, wit, theta(wit))
    return GtrNondegeneracyReport(True, checked, cases)


# ---------------------------------------------------------------- verdicts

STABLE, SEMISTABLE, UNSTABLE = "stable", "strictly-semistable", "unstable"


@dataclass
class Verdict:
    status: str
    witness: dict | None = None
    witness_value: object = None
    nodes: int = 0

    @property
    def stable(self) -> bool:
        return self.status == STABLE

    def witness_dims(self) -> dict | None:
        return None if self.witness is None else {k: U.dim for k, U in self.witness.items()}


def _value(functional, dims: dict):
    return functional.evaluate(dims)


def is_stable_bruteforce(rep, functional, budget: int = DEFAULT_BUDGET) -> Verdict:
    """King's criterion by exhaustive search over graded subspace families.

    Subspaces are chosen vertex by vertex; each choice is confined between
    the images of already-chosen sources and the preimages of already-chosen
    targets, so only subrepresentations are ever completed.  ``budget``
    bounds the number of search nodes.
    """
    fld: Field = rep.field
    if fld.is_rational:
        raise ValueError("brute-force stability needs a finite field")
    dims = rep.dims()
    verts = list(dims)
    total = {k: dims[k] for k in verts}
    if t_sign(_value(functional, total)) != 0:
        raise ValueError("character does not vanish on the representation")
    arrows = rep.arrow_maps()
    pos = {v: i for i, v in enumerate(verts)}
    incoming = {v: [] for v in verts}
    outgoing = {v: [] for v in verts}
    loops = {v: [] for v in verts}
    for s, t, A in arrows:
        if s == t:
            loops[s].append(A)
        elif pos[s] < pos[t]:
            incoming[t].append((s, A))
        else:
            outgoing[s].append((t, A))
    subspaces = {d: all_subspaces(d, fld, budget) for d in set(total.values())}
    cache: dict = {}

    def candidates(v, chosen):
        n = total[v]
        lower = Subspace.zero(fld, n)
        for s, A in incoming[v]:
            lower = subspace_sum(lower, image_of(A, chosen[s]))
        upper = Subspace.full(fld, n)
        for t, A in outgoing[v]:
            upper = intersect(upper, preimage(A, chosen[t]))
        key = (v, lower.basis, upper.basis)
        if key not in cache:
            if not lower <= upper:
                cache[key] = []
            else:
                cache[key] = [S for S in subspaces[n]
                              if lower <= S and S <= upper
                              and all(image_of(L, S) <= S for L in loops[v])]
        return cache[key]

    nodes = 0
    semistable_witness = None
    chosen: dict = {}

    def rec(idx):
        nonlocal nodes, semistable_witness
        if idx == len(verts):
            md = {k: chosen[k].dim for k in verts}
            if all(md[k] == 0 for k in verts) or md == total:
                return None
            val = _value(functional, md)
            sg = t_sign(val)
            if sg < 0:
                return dict(chosen), val
            if sg == 0 and semistable_witness is None:
                semistable_witness = (dict(chosen), val)
            return None
        v = verts[idx]
        for S in candidates(v, chosen):
            nodes += 1
            if nodes > budget:
                raise BudgetExceeded(f"stability search exceeded {budget} nodes")
            chosen[v] = S
            hit = rec(idx + 1)
            if hit is not None:
                return hit
        chosen.pop(v, None)
        return None

    hit = rec(0)
    if hit is not None:
        return Verdict(UNSTABLE, hit[0], hit[1], nodes)
    if semistable_witness is not None:
        return Verdict(SEMISTABLE, semistable_witness[0], semistable_witness[1], nodes)
    return Verdict(STABLE, None, None, nodes)


def _chamber(x, theta: Theta) -> int:
    cb = x.cb
    if cb is None:
        raise UnsupportedChamber("fast path needs a Crawley-Boevey representation")
    signs = {t_sign(theta[i]) for i in cb.base_vertices if x.dim[i] > 0}
    if signs == {1}:
        return 1
    if signs == {-1}:
        return -1
    if not signs:
        return 0
    raise UnsupportedChamber("character has mixed or zero signs on the unframed vertices")


def is_stable_fast(x, theta: Theta) -> Verdict:
    """Stability of a framed point when the character has one strict sign off the framing vertex.

    Positive chamber: a destabilizer must contain the framing line, so the
    point is stable iff the family generated by that line is everything.
    Negative chamber: a destabilizer must avoid the framing line, so the
    point is stable iff the largest invariant family with zero framing
    component is zero.
    """
    if theta(x.dim) != 0:
        raise ValueError("character does not vanish on the representation")
    chamber = _chamber(x, theta)
    fld, inf = x.field, x.cb.infinity
    arrows = x.arrow_maps()
    dims = x.dims()
    if chamber == 0:
        return Verdict(STABLE)
    if chamber == 1:
        seed = {k: Subspace.zero(fld, d) for k, d in dims.items()}
        seed[inf] = Subspace.full(fld, dims[inf])
        M = closure_generated_by(arrows, seed)
        if all(M[k].dim == dims[k] for k in dims):
            return Verdict(STABLE)
    else:
        bound = {k: Subspace.full(fld, d) for k, d in dims.items()}
        bound[inf] = Subspace.zero(fld, dims[inf])
        M = max_invariant_in(arrows, bound)
        if all(M[k].dim == 0 for k in dims):
            return Verdict(STABLE)
    return Verdict(UNSTABLE, M, theta({k: U.dim for k, U in M.items()}))


def generated_in_degree(V, a: int) -> bool:
    """Whether the bottom slice generates the whole graded module."""
    fld = V.field
    seed = {k: (Subspace.full(fld, d) if k[1] == a else Subspace.zero(fld, d))
            for k, d in V.dims().items()}
    M = closure_generated_by(V.arrow_maps(), seed)
    return all(M[k].dim == d for k, d in V.dims().items())


@dataclass
class TransferReport:
    cb_verdict: Verdict
    gtr_verdict: Verdict
    agree: bool
    generated_in_degree_a: bool | None
    witness_is_induced: bool | None


def witness_is_induced(witness: dict, gtr: GtrQuiver) -> bool:
    """A destabilizer of an induced module should itself be constant across slices."""
    D = gtr.base
    return all(witness[(i, n)] == witness[(i, gtr.a)] for i in D.vertices for n in gtr.levels())


def check_ind_stability_transfer(x, theta: Theta, theta_gtr: GtrTheta, gtr: GtrQuiver,
                                 budget: int = DEFAULT_BUDGET) -> TransferReport:
    from .representations import in_zero_fiber, ind0

    if not in_zero_fiber(x):
        raise ValueError("point is not in the zero fiber")
    V = ind0(x, gtr)
    v_cb = is_stable_bruteforce(x, theta, budget)
    v_gtr = is_stable_bruteforce(V, theta_gtr, budget)
    gen = generated_in_degree(V, gtr.a) if v_gtr.stable else None
    induced = witness_is_induced(v_gtr.witness, gtr) if v_gtr.status == UNSTABLE else None
    return TransferReport(v_cb, v_gtr, v_cb.status == v_gtr.status, gen, induced)
