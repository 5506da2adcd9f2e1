"""Matrix realizations: framed (Crawley-Boevey) points, graded-tripled modules.

A :class:`CBRep` assigns a matrix to every arrow of the doubled
Crawley-Boevey quiver; the Nakajima ``[B, i, j]`` description is a derived
view.  A :class:`GtrRep` assigns matrices to the arrows ``(h, n)`` and the
edge arrows ``(i, n)`` of a graded-tripled quiver.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .linalg import (QQ, BlockLayout, Field, LinearMapBuilder, Mat, ShapeError, hstack,
                     kernel, rank, solve, vstack, fmt_scalar)
from .quiver import (CBQuiver, DimensionVector, DoubledQuiver, GtrQuiver, constant_gtr_dimension,
                     double, graded_triple)


class RelationError(ValueError):
    pass


class BoundaryPoint(ValueError):
    """A graded module with a singular edge map; it is not in the image of Ind."""


class FiberSamplingFailed(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CBRep:
    double: DoubledQuiver
    dim: DimensionVector
    mats: Mapping[str, Mat]
    field: Field = QQ
    cb: CBQuiver | None = None

    def __post_init__(self):
        for h in self.double.arrows:
            if h not in self.mats:
                raise ShapeError(f"no matrix for arrow {h!r}")
            want = (self.dim[self.double.tgt[h]], self.dim[self.double.src[h]])
            if self.mats[h].shape != want:
                raise ShapeError(f"arrow {h!r} has shape {self.mats[h].shape}, expected {want}")

    def arrow_maps(self) -> list[tuple[str, str, Mat]]:
        return [(self.double.src[h], self.double.tgt[h], self.mats[h]) for h in self.double.arrows]

    def dims(self) -> dict:
        return dict(self.dim.dims)

    def with_mats(self, mats: Mapping[str, Mat]) -> "CBRep":
        return CBRep(self.double, self.dim, dict(mats), self.field, self.cb)

    def total_dim(self) -> int:
        return self.dim.total()

    def __eq__(self, other) -> bool:
        return (isinstance(other, CBRep) and self.dim == other.dim
                and all(self.mats[h] == other.mats[h] for h in self.double.arrows))

    # Nakajima views, valid when ``cb`` is set.
    def nakajima(self) -> tuple[dict, dict, dict]:
        """``(B, i, j)``: B on arrows of the original double, ``i_k: W_k -> V_k``, ``j_k: V_k -> W_k``."""
        if self.cb is None:
            raise ValueError("not a Crawley-Boevey representation")
        framing = set()
        i, j = {}, {}
        for k in self.cb.base_vertices:
            arrows = self.cb.framing_arrows(k)
            framing.update(arrows)
            framing.update(self.double.bar[a] for a in arrows)
            i[k] = hstack(self.field, self.dim[k], [self.mats[a] for a in arrows])
            j[k] = vstack(self.field, self.dim[k], [self.mats[self.double.bar[a]] for a in arrows])
        B = {h: self.mats[h] for h in self.double.arrows if h not in framing}
        return B, i, j


@dataclass(frozen=True, eq=False)
class GtrRep:
    gtr: GtrQuiver
    dim: DimensionVector
    a_mats: Mapping[tuple[str, int], Mat]
    e_mats: Mapping[tuple[str, int], Mat]
    field: Field = QQ
    cb: CBQuiver | None = None

    def __post_init__(self):
        for arrow in self.gtr.arrows:
            mats = self.e_mats if self.gtr.is_edge_arrow(arrow) else self.a_mats
            if arrow not in mats:
                raise ShapeError(f"no matrix for arrow {arrow!r}")
            want = (self.dim[self.gtr.tgt(arrow)], self.dim[self.gtr.src(arrow)])
            if mats[arrow].shape != want:
                raise ShapeError(f"arrow {arrow!r} has shape {mats[arrow].shape}, expected {want}")

    def mat(self, arrow) -> Mat:
        return self.e_mats[arrow] if self.gtr.is_edge_arrow(arrow) else self.a_mats[arrow]

    def arrow_maps(self) -> list[tuple]:
        return [(self.gtr.src(x), self.gtr.tgt(x), self.mat(x)) for x in self.gtr.arrows]

    def dims(self) -> dict:
        return dict(self.dim.dims)

    def total_dim(self) -> int:
        return self.dim.total()

    def satisfies_dagger(self) -> bool:
        return all(M.rows == M.cols and rank(M) == M.rows for M in self.e_mats.values())

    def __eq__(self, other) -> bool:
        return (isinstance(other, GtrRep) and self.dim == other.dim
                and all(self.mat(x) == other.mat(x) for x in self.gtr.arrows))


def zero_cbrep(D: DoubledQuiver, dim: DimensionVector, field: Field = QQ, cb=None) -> CBRep:
    return CBRep(D, dim, {h: Mat.zeros(field, dim[D.tgt[h]], dim[D.src[h]]) for h in D.arrows}, field, cb)


def random_cbrep(D: DoubledQuiver, dim: DimensionVector, rng, field: Field = QQ, cb=None,
                 zero_prob: float = 0.0) -> CBRep:
    return CBRep(D, dim, {h: Mat.random(field, dim[D.tgt[h]], dim[D.src[h]], rng, zero_prob)
                          for h in D.arrows}, field, cb)


def zero_gtrrep(G: GtrQuiver, dim: DimensionVector, field: Field = QQ, cb=None) -> GtrRep:
    a, e = {}, {}
    for x in G.arrows:
        M = Mat.zeros(field, dim[G.tgt(x)], dim[G.src(x)])
        (e if G.is_edge_arrow(x) else a)[x] = M
    return GtrRep(G, dim, a, e, field, cb)


def random_gtrrep(G: GtrQuiver, dim: DimensionVector, rng, field: Field = QQ, cb=None) -> GtrRep:
    a, e = {}, {}
    for x in G.arrows:
        M = Mat.random(field, dim[G.tgt(x)], dim[G.src(x)], rng)
        (e if G.is_edge_arrow(x) else a)[x] = M
    return GtrRep(G, dim, a, e, field, cb)


def cb_setup(cbq: CBQuiver, v: DimensionVector) -> tuple[DoubledQuiver, DimensionVector]:
    from .quiver import cb_dimension
    return double(cbq.quiver), cb_dimension(v, cbq.infinity)


def moment_map(x: CBRep) -> dict[str, Mat]:
    """Per vertex k, the sum over arrows h into k of eps(h) * x_h @ x_bar(h)."""
    D = x.double
    out = {}
    for k in D.vertices:
        acc = Mat.zeros(x.field, x.dim[k], x.dim[k])
        for h in D.into(k):
            term = x.mats[h] @ x.mats[D.bar[h]]
            acc = acc + term if D.eps[h] == 1 else acc - term
        out[k] = acc
    return out


def in_zero_fiber(x: CBRep) -> bool:
    return all(M.is_zero() for M in moment_map(x).values())


def sample_moment_fiber(D: DoubledQuiver, dim: DimensionVector, seed=None, field: Field = QQ,
                        cb: CBQuiver | None = None, retries: int = 50, zero_prob: float = 0.0,
                        rng: random.Random | None = None) -> CBRep:
    """A point of the zero fiber of the moment map, exact and seed-deterministic.

    For each edge one orientation is drawn at random and the other is kept as
    an unknown; some unknowns are also drawn.  The moment equation is linear
    in the remaining unknowns, and a random point of its solution space is
    returned.
    """
    rng = rng or random.Random(seed)
    shape = {h: (dim[D.tgt[h]], dim[D.src[h]]) for h in D.arrows}
    for _ in range(retries):
        unknown = set()
        for h in D.omega():
            pick = h if rng.random() < 0.5 else D.bar[h]
            if rng.random() < 0.8:
                unknown.add(pick)
        fixed = {h: Mat.random(field, *shape[h], rng, zero_prob) for h in D.arrows if h not in unknown}
        dom = BlockLayout([(h, *shape[h]) for h in D.arrows if h in unknown])
        cod = BlockLayout([(k, dim[k], dim[k]) for k in D.vertices])
        lin = LinearMapBuilder(field, dom, cod)
        const = {k: Mat.zeros(field, dim[k], dim[k]) for k in D.vertices}
        for k in D.vertices:
            for h in D.into(k):
                hb = D.bar[h]
                sign = D.eps[h]
                if h in unknown:
                    lin.add(k, h, Mat.identity(field, dim[k]), fixed[hb], sign)
                elif hb in unknown:
                    lin.add(k, hb, fixed[h], Mat.identity(field, dim[k]), sign)
                else:
                    term = fixed[h] @ fixed[hb]
                    const[k] = const[k] + term * sign
        A = lin.matrix()
        rhs = [field.norm(-c) for c in cod.pack(field, const)]
        sol = solve(A, rhs)
        if sol is None:
            continue
        K = kernel(A)
        vec = list(sol)
        for basis_vec in K.basis:
            c = field.random(rng, zero_prob=zero_prob)
            vec = [field.norm(a + c * b) for a, b in zip(vec, basis_vec)]
        mats = dict(fixed)
        mats.update(dom.unpack(field, vec))
        x = CBRep(D, dim, mats, field, cb)
        if not in_zero_fiber(x):
            raise AssertionError("fiber sampler produced a point off the zero fiber")
        return x
    raise FiberSamplingFailed(f"no consistent fiber sample after {retries} retries")


def act_cb(g: Mapping[str, Mat], x: CBRep) -> CBRep:
    """Base change ``x_h -> g_t x_h g_s^{-1}``; vertices missing from ``g`` use the identity."""
    D = x.double
    inv = {k: M.inverse() for k, M in g.items()}
    mats = {}
    for h in D.arrows:
        M = x.mats[h]
        s, t = D.src[h], D.tgt[h]
        if t in g:
            M = g[t] @ M
        if s in g:
            M = M @ inv[s]
        mats[h] = M
    return x.with_mats(mats)


def act_gtr(g: Mapping, V: GtrRep) -> GtrRep:
    inv = {k: M.inverse() for k, M in g.items()}
    a, e = {}, {}
    G = V.gtr
    for x in G.arrows:
        M = V.mat(x)
        s, t = G.src(x), G.tgt(x)
        if t in g:
            M = g[t] @ M
        if s in g:
            M = M @ inv[s]
        (e if G.is_edge_arrow(x) else a)[x] = M
    return GtrRep(G, V.dim, a, e, V.field, V.cb)


def random_group_element(vertices, dim: DimensionVector, rng, field: Field = QQ) -> dict:
    return {k: Mat.random_invertible(field, dim[k], rng) for k in vertices}


def check_A_relations(V: GtrRep) -> list[tuple[str, object, Mat]]:
    """Violated relation instances as ``(kind, location, offending matrix)``."""
    G, D = V.gtr, V.gtr.base
    out = []
    for n in range(G.a, G.b - 1):
        for k in D.vertices:
            acc = Mat.zeros(V.field, V.dim[(k, n + 2)], V.dim[(k, n)])
            for h in D.arrows:
                if D.src[h] != k:
                    continue
                term = V.a_mats[(D.bar[h], n + 1)] @ V.a_mats[(h, n)]
                acc = acc + term if D.eps[h] == 1 else acc - term
            if not acc.is_zero():
                out.append(("preprojective", (k, n), acc))
        for h in D.arrows:
            s, t = D.src[h], D.tgt[h]
            diff = V.e_mats[(t, n + 1)] @ V.a_mats[(h, n)] - V.a_mats[(h, n + 1)] @ V.e_mats[(s, n)]
            if not diff.is_zero():
                out.append(("commutation", (h, n), diff))
    return out


def ind(g: Mapping, x: CBRep, gtr: GtrQuiver) -> GtrRep:
    """``a_{h,n} = g_{t(h),n+1} a_h g_{s(h),n}^{-1}``, ``e_{i,n} = g_{i,n+1} g_{i,n}^{-1}``."""
    if not in_zero_fiber(x):
        raise RelationError("point is not in the zero fiber of the moment map")
    D = gtr.base
    inv = {}
    for key, M in g.items():
        if M.rows != M.cols or rank(M) != M.rows:
            raise ValueError(f"group element at {key!r} is not invertible")
        inv[key] = M.inverse()
    a, e = {}, {}
    for n in range(gtr.a, gtr.b):
        for h in D.arrows:
            a[(h, n)] = g[(D.tgt[h], n + 1)] @ x.mats[h] @ inv[(D.src[h], n)]
        for i in D.vertices:
            e[(i, n)] = g[(i, n + 1)] @ inv[(i, n)]
    dim = constant_gtr_dimension(x.dim, gtr.a, gtr.b)
    return GtrRep(gtr, dim, a, e, x.field, x.cb)


def identity_section(gtr: GtrQuiver, dim: DimensionVector, field: Field = QQ) -> dict:
    return {(i, n): Mat.identity(field, dim[i]) for i in gtr.base.vertices for n in gtr.levels()}


def ind0(x: CBRep, gtr: GtrQuiver) -> GtrRep:
    return ind(identity_section(gtr, x.dim, x.field), x, gtr)


def ind_inverse(V: GtrRep) -> tuple[dict, CBRep]:
    G, D = V.gtr, V.gtr.base
    if not V.satisfies_dagger():
        raise BoundaryPoint("an edge map is singular; the point lies outside the image of Ind")
    g = {}
    alpha = {}
    for i in D.vertices:
        alpha[i] = V.dim[(i, G.a)]
        g[(i, G.a)] = Mat.identity(V.field, alpha[i])
        for n in range(G.a + 1, G.b + 1):
            g[(i, n)] = V.e_mats[(i, n - 1)] @ g[(i, n - 1)]
    mats = {h: V.e_mats[(D.tgt[h], G.a)].inverse() @ V.a_mats[(h, G.a)] for h in D.arrows}
    return g, CBRep(D, DimensionVector(alpha), mats, V.field, V.cb)


def hom_quiver(arrows_V, arrows_W, dims_V: dict, dims_W: dict, field: Field) -> tuple[int, list[dict]]:
    """Graded intertwiners between two representations of the same quiver."""
    if dims_V.keys() != dims_W.keys() or len(arrows_V) != len(arrows_W):
        raise ShapeError("representations live on different quivers")
    verts = list(dims_V)
    dom = BlockLayout([(k, dims_W[k], dims_V[k]) for k in verts])
    cod = BlockLayout([(idx, dims_W[t], dims_V[s]) for idx, (s, t, _) in enumerate(arrows_V)])
    lin = LinearMapBuilder(field, dom, cod)
    for idx, ((s, t, AV), (s2, t2, AW)) in enumerate(zip(arrows_V, arrows_W)):
        if (s, t) != (s2, t2):
            raise ShapeError("arrow lists are not aligned")
        lin.add(idx, s, AW, Mat.identity(field, dims_V[s]), 1)
        lin.add(idx, t, Mat.identity(field, dims_W[t]), AV, -1)
    K = kernel(lin.matrix())
    return K.dim, [dom.unpack(field, v) for v in K.basis]


def hom_A(V: GtrRep, W: GtrRep) -> tuple[int, list[dict]]:
    for name, R in (("source", V), ("target", W)):
        bad = check_A_relations(R)
        if bad:
            raise RelationError(f"{name} violates {len(bad)} relation(s) of A")
    return hom_quiver(V.arrow_maps(), W.arrow_maps(), V.dims(), W.dims(), V.field)


def gtr_window(x: CBRep, a: int = 0, b: int = 2) -> GtrQuiver:
    return graded_triple(x.double, a, b)


def serialize_cbrep(x: CBRep) -> str:
    lines = [f"field {x.field}", "dims " + " ".join(f"{k}={x.dim[k]}" for k in x.double.vertices)]
    for h in x.double.arrows:
        M = x.mats[h]
        lines.append(f"arrow {h} {M.rows}x{M.cols} " + " ".join(fmt_scalar(c) for c in M.entries()))
    return "\n".join(lines)


def serialize_gtrrep(V: GtrRep) -> str:
    G = V.gtr
    lines = [f"field {V.field}", "dims " + " ".join(f"{G.name(k)}={V.dim[k]}" for k in G.vertices)]
    for x in G.arrows:
        M = V.mat(x)
        lines.append(f"arrow {G.name(x)} {M.rows}x{M.cols} " + " ".join(fmt_scalar(c) for c in M.entries()))
    return "\n".join(lines)
