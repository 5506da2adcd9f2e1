"""Quivers, doubling, Crawley-Boevey framing and graded tripling.

Vertex and arrow ids are strings.  Generated ids follow fixed patterns so
that reports are reproducible:

* ``bar:<id>`` for the reversed copy of an arrow,
* ``cb:<i>:<j>`` for the j-th framing arrow from the new vertex into ``i``,
* ``<id>@<n>`` for the copy of an arrow or vertex in a graded slice.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Mapping

INFTY = "inf"


class QuiverError(ValueError):
    pass


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[str, ...]
    src: Mapping[str, str]
    tgt: Mapping[str, str]

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise QuiverError("duplicate vertex id")
        if len(set(self.arrows)) != len(self.arrows):
            raise QuiverError("duplicate arrow id")
        vs = set(self.vertices)
        for a in self.arrows:
            if a not in self.src or a not in self.tgt:
                raise QuiverError(f"arrow {a!r} has no source or target")
            if self.src[a] not in vs or self.tgt[a] not in vs:
                raise QuiverError(f"arrow {a!r} references an unknown vertex")

    @classmethod
    def build(cls, vertices, arrows) -> "Quiver":
        """``arrows`` is an iterable of ``(id, src, tgt)``."""
        arrows = list(arrows)
        return cls(tuple(vertices), tuple(a for a, _, _ in arrows),
                   {a: s for a, s, _ in arrows}, {a: t for a, _, t in arrows})

    def edges(self) -> list[tuple[str, str, str]]:
        return [(a, self.src[a], self.tgt[a]) for a in self.arrows]

    def __hash__(self):
        return hash((self.vertices, tuple(self.edges())))

    def __eq__(self, other):
        return (isinstance(other, Quiver) and self.vertices == other.vertices
                and self.edges() == other.edges())


@dataclass(frozen=True, eq=False)
class DoubledQuiver:
    base: Quiver
    arrows: tuple[str, ...]
    src: Mapping[str, str]
    tgt: Mapping[str, str]
    bar: Mapping[str, str]
    eps: Mapping[str, int]

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.base.vertices

    def omega(self) -> tuple[str, ...]:
        return self.base.arrows

    def into(self, k: str) -> list[str]:
        return [h for h in self.arrows if self.tgt[h] == k]

    def forget(self) -> Quiver:
        """The original quiver: keep only arrows with eps = +1."""
        return Quiver.build(self.vertices, [(h, self.src[h], self.tgt[h])
                                            for h in self.arrows if self.eps[h] == 1])


def double(Q: Quiver) -> DoubledQuiver:
    arrows, src, tgt, bar, eps = [], {}, {}, {}, {}
    for h in Q.arrows:
        hb = f"bar:{h}"
        arrows += [h, hb]
        src[h], tgt[h] = Q.src[h], Q.tgt[h]
        src[hb], tgt[hb] = Q.tgt[h], Q.src[h]
        bar[h], bar[hb] = hb, h
        eps[h], eps[hb] = 1, -1
    return DoubledQuiver(Q, tuple(arrows), src, tgt, bar, eps)


@dataclass(frozen=True)
class DimensionVector:
    dims: Mapping

    def __getitem__(self, v) -> int:
        return self.dims[v]

    def __iter__(self):
        return iter(self.dims)

    def keys(self):
        return self.dims.keys()

    def items(self):
        return self.dims.items()

    def total(self) -> int:
        return sum(self.dims.values())

    def __le__(self, other: "DimensionVector") -> bool:
        return self.dims.keys() == other.dims.keys() and all(self[v] <= other[v] for v in self.dims)

    def __lt__(self, other: "DimensionVector") -> bool:
        return self <= other and dict(self.dims) != dict(other.dims)

    def __eq__(self, other) -> bool:
        return isinstance(other, DimensionVector) and dict(self.dims) == dict(other.dims)

    def __hash__(self):
        return hash(tuple(sorted(self.dims.items(), key=str)))

    def is_zero(self) -> bool:
        return all(d == 0 for d in self.dims.values())

    def below(self) -> Iterator["DimensionVector"]:
        """All beta with 0 <= beta <= self, in lexicographic order."""
        keys = list(self.dims)
        for combo in product(*(range(self.dims[k] + 1) for k in keys)):
            yield DimensionVector(dict(zip(keys, combo)))

    def __repr__(self) -> str:
        return "(" + ", ".join(f"{k}:{v}" for k, v in self.dims.items()) + ")"


def dimvec(**kw) -> DimensionVector:
    return DimensionVector(dict(kw))


@dataclass(frozen=True)
class CBQuiver:
    """Crawley-Boevey quiver together with the framing data it came from."""

    quiver: Quiver
    infinity: str
    base_vertices: tuple[str, ...]
    framing: Mapping[str, int]

    def framing_arrows(self, i: str) -> list[str]:
        return [f"cb:{i}:{j}" for j in range(1, self.framing[i] + 1)]


def crawley_boevey(Q0: Quiver, w: DimensionVector, infinity: str = INFTY) -> tuple[Quiver, str]:
    if set(w.keys()) != set(Q0.vertices):
        raise QuiverError("framing vector is not defined on the vertex set")
    if w.is_zero():
        raise QuiverError("framing vector must be nonzero")
    if infinity in Q0.vertices:
        raise QuiverError(f"vertex id {infinity!r} is reserved")
    arrows = Q0.edges()
    for i in Q0.vertices:
        for j in range(1, w[i] + 1):
            arrows.append((f"cb:{i}:{j}", infinity, i))
    return Quiver.build(Q0.vertices + (infinity,), arrows), infinity


def cb_quiver(Q0: Quiver, w: DimensionVector) -> CBQuiver:
    Q, inf = crawley_boevey(Q0, w)
    return CBQuiver(Q, inf, Q0.vertices, dict(w.dims))


def cb_dimension(v: DimensionVector, infinity: str = INFTY) -> DimensionVector:
    d = dict(v.dims)
    d[infinity] = 1
    return DimensionVector(d)


@dataclass(frozen=True, eq=False)
class GtrQuiver:
    base: DoubledQuiver
    a: int
    b: int
    vertices: tuple[tuple[str, int], ...] = field(init=False)
    arrows: tuple[tuple[str, int], ...] = field(init=False)

    def __post_init__(self):
        if self.a >= self.b:
            raise QuiverError(f"window [{self.a},{self.b}] needs a < b")
        object.__setattr__(self, "vertices", tuple(
            (i, n) for n in self.levels() for i in self.base.vertices))
        steps = range(self.a, self.b)
        object.__setattr__(self, "arrows", tuple(
            [(h, n) for n in steps for h in self.base.arrows]
            + [(i, n) for n in steps for i in self.base.vertices]))

    def levels(self) -> range:
        return range(self.a, self.b + 1)

    def is_edge_arrow(self, arrow: tuple[str, int]) -> bool:
        return arrow[0] in self.base.vertices and arrow[0] not in self.base.src

    def src(self, arrow):
        x, n = arrow
        if x in self.base.src:
            return (self.base.src[x], n)
        return (x, n)

    def tgt(self, arrow):
        x, n = arrow
        if x in self.base.tgt:
            return (self.base.tgt[x], n + 1)
        return (x, n + 1)

    def name(self, item: tuple[str, int]) -> str:
        return f"{item[0]}@{item[1]}"


def graded_triple(D: DoubledQuiver, a: int, b: int) -> GtrQuiver:
    overlap = set(D.vertices) & set(D.arrows)
    if overlap:
        raise QuiverError(f"vertex and arrow ids collide: {sorted(overlap)}")
    return GtrQuiver(D, a, b)


def constant_gtr_dimension(alpha: DimensionVector, a: int, b: int) -> DimensionVector:
    return DimensionVector({(i, n): alpha[i] for n in range(a, b + 1) for i in alpha})
