"""The two-step complex on pairs of graded modules, evaluated at points.

For graded modules ``V`` and ``W`` on the window ``[0, 2]`` the complex is

    L(V0, W0) --d0--> E(V0, W1) --d1--> L(V0, W2)

with ``L`` summing over vertices and ``E`` over arrows of the doubled
quiver.  Edge maps ``e_n`` go from slice ``n`` to slice ``n+1``; the inverse
appearing in both differentials is that of ``e^V_0``.  Dropping the framing
vertex from the outer terms gives the truncated maps ``delta0``, ``delta1``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import comb

from .linalg import BlockLayout, Field, LinearMapBuilder, Mat, kernel, rank, solve, vstack
from .quiver import CBQuiver, DimensionVector, DoubledQuiver
from .representations import (BoundaryPoint, CBRep, GtrRep, check_A_relations, hom_A, hom_quiver,
                              ind0, gtr_window)

WINDOW = (0, 2)


def _sub_columns(M: Mat, cols: list[int]) -> Mat:
    return Mat._raw(M.field, M.rows, len(cols), tuple(tuple(r[c] for c in cols) for r in M.data))


def _sub_rows(M: Mat, rows: list[int]) -> Mat:
    return Mat._raw(M.field, len(rows), M.cols, tuple(M.data[r] for r in rows))


def _block_indices(layout: BlockLayout, keys) -> list[int]:
    out = []
    for k in keys:
        r, c = layout.shapes[k]
        out.extend(range(layout.offsets[k], layout.offsets[k] + r * c))
    return out


@dataclass
class TautComplexFiber:
    V: GtrRep
    W: GtrRep
    infinity: str
    L0: BlockLayout
    E: BlockLayout
    L2: BlockLayout
    D0: Mat
    D1: Mat
    d0: Mat = field(init=False)
    d1: Mat = field(init=False)

    def __post_init__(self):
        keep0 = [k for k in self.L0.keys if k != self.infinity]
        keep2 = [k for k in self.L2.keys if k != self.infinity]
        self.d0 = _sub_columns(self.D0, _block_indices(self.L0, keep0))
        self.d1 = _sub_rows(self.D1, _block_indices(self.L2, keep2))

    @property
    def field(self) -> Field:
        return self.V.field


def build_fiber(V: GtrRep, W: GtrRep, infinity: str | None = None) -> TautComplexFiber:
    G = V.gtr
    if (G.a, G.b) != WINDOW or (W.gtr.a, W.gtr.b) != WINDOW:
        raise ValueError("the complex is only defined on the window [0, 2]")
    if W.gtr.base is not G.base and W.gtr.base.arrows != G.base.arrows:
        raise ValueError("modules live on different quivers")
    if not V.satisfies_dagger():
        raise BoundaryPoint("source module has a singular edge map")
    if infinity is None:
        if V.cb is None:
            raise ValueError("framing vertex unknown; pass infinity=")
        infinity = V.cb.infinity
    D, fld = G.base, V.field
    dv = lambda i, n: V.dim[(i, n)]  # noqa: E731
    dw = lambda i, n: W.dim[(i, n)]  # noqa: E731
    L0 = BlockLayout([(i, dw(i, 0), dv(i, 0)) for i in D.vertices])
    E = BlockLayout([(h, dw(D.tgt[h], 1), dv(D.src[h], 0)) for h in D.arrows])
    L2 = BlockLayout([(i, dw(i, 2), dv(i, 0)) for i in D.vertices])
    eV0_inv = {i: V.e_mats[(i, 0)].inverse() for i in D.vertices}

    b0 = LinearMapBuilder(fld, L0, E)
    for h in D.arrows:
        s, t = D.src[h], D.tgt[h]
        b0.add(h, s, W.a_mats[(h, 0)], Mat.identity(fld, dv(s, 0)), 1)
        b0.add(h, t, W.e_mats[(t, 0)], eV0_inv[t] @ V.a_mats[(h, 0)], -1)

    b1 = LinearMapBuilder(fld, E, L2)
    for k in D.vertices:
        for h in D.into(k):
            hb, sign = D.bar[h], D.eps[h]
            b1.add(k, hb, W.a_mats[(h, 1)], Mat.identity(fld, dv(k, 0)), sign)
            b1.add(k, h, W.e_mats[(k, 1)], eV0_inv[D.src[h]] @ V.a_mats[(hb, 0)], sign)
    return TautComplexFiber(V, W, infinity, L0, E, L2, b0.matrix(), b1.matrix())


def section_s(F: TautComplexFiber) -> tuple:
    """Image under ``d0`` of minus the generator of Hom(V_inf0, W_inf0)."""
    fld = F.field
    gen = F.L0.pack(fld, {F.infinity: -Mat.identity(fld, F.L0.shapes[F.infinity][0])})
    return F.D0.apply(gen)


def in_image_of_delta0(F: TautComplexFiber, vec) -> bool:
    return solve(F.d0, list(vec)) is not None


@dataclass
class FiberReport:
    composite_zero: bool
    truncated_composite_zero: bool
    rank_d0: int
    rank_d1: int
    dim_ker_d0: int
    dim_coker_d1: int
    dim_ker_D0: int
    dim_coker_D1: int
    rank_H0: int
    hom_VW: int | None
    hom_WV: int | None
    tau_s_zero: bool
    s_in_image: bool

    @property
    def hom_cross_check(self) -> bool | None:
        if self.hom_VW is None:
            return None
        return self.hom_VW == self.dim_ker_D0 and self.hom_WV == self.dim_coker_D1

    @property
    def exact(self) -> bool:
        return self.dim_ker_d0 == 0 and self.dim_coker_d1 == 0


def verify_fiber(F: TautComplexFiber, with_hom: bool = True) -> FiberReport:
    r0, r1 = rank(F.d0), rank(F.d1)
    R0, R1 = rank(F.D0), rank(F.D1)
    s = section_s(F)
    hom_vw = hom_wv = None
    if with_hom and not check_A_relations(F.V) and not check_A_relations(F.W):
        hom_vw = hom_A(F.V, F.W)[0]
        hom_wv = hom_A(F.W, F.V)[0]
    return FiberReport(
        composite_zero=(F.D1 @ F.D0).is_zero(),
        truncated_composite_zero=(F.d1 @ F.d0).is_zero(),
        rank_d0=r0, rank_d1=r1,
        dim_ker_d0=F.d0.cols - r0, dim_coker_d1=F.d1.rows - r1,
        dim_ker_D0=F.D0.cols - R0, dim_coker_D1=F.D1.rows - R1,
        rank_H0=F.E.dim - r0 - r1,
        hom_VW=hom_vw, hom_WV=hom_wv,
        tau_s_zero=all(c == 0 for c in F.d1.apply(s)),
        s_in_image=in_image_of_delta0(F, s),
    )


def expected_rank(D: DoubledQuiver, alpha: DimensionVector, infinity: str) -> int:
    """``rk E - 2 rk L`` over the unframed vertices."""
    e = sum(alpha[D.src[h]] * alpha[D.tgt[h]] for h in D.arrows)
    return e - 2 * sum(alpha[i] ** 2 for i in D.vertices if i != infinity)


# ---------------------------------------------------------- Nakajima form

def nakajima_layouts(cb: CBQuiver, v: DimensionVector, D: DoubledQuiver):
    framing = {a for k in cb.base_vertices for a in cb.framing_arrows(k)}
    framing |= {D.bar[a] for a in framing}
    H0 = [h for h in D.arrows if h not in framing]
    L = BlockLayout([(k, v[k], v[k]) for k in cb.base_vertices])
    E = BlockLayout([(h, v[D.tgt[h]], v[D.src[h]]) for h in H0]
                    + [(("i", k), v[k], cb.framing[k]) for k in cb.base_vertices]
                    + [(("j", k), cb.framing[k], v[k]) for k in cb.base_vertices])
    return H0, L, E


def sigma_tau(x: CBRep, y: CBRep) -> tuple[Mat, Mat]:
    """Matrices of ``sigma(xi) = (B'xi - xi B, -xi i, j' xi)`` and
    ``tau(C, a, b) = eps B'C + eps CB + i'b + aj`` at the pair ``(x, y)``."""
    if x.dim != y.dim:
        raise ValueError("points have different dimension vectors")
    cb, D, fld = x.cb, x.double, x.field
    v = DimensionVector({k: x.dim[k] for k in cb.base_vertices})
    H0, L, E = nakajima_layouts(cb, v, D)
    B, i, j = x.nakajima()
    Bp, ip, jp = y.nakajima()
    Id = lambda k: Mat.identity(fld, v[k])  # noqa: E731

    sig = LinearMapBuilder(fld, L, E)
    for h in H0:
        s, t = D.src[h], D.tgt[h]
        sig.add(h, s, Bp[h], Id(s), 1)
        sig.add(h, t, Id(t), B[h], -1)
    for k in cb.base_vertices:
        sig.add(("i", k), k, Id(k), i[k], -1)
        sig.add(("j", k), k, jp[k], Id(k), 1)

    tau = LinearMapBuilder(fld, E, L)
    for k in cb.base_vertices:
        for h in H0:
            if D.tgt[h] != k:
                continue
            hb, sign = D.bar[h], D.eps[h]
            tau.add(k, hb, Bp[h], Id(k), sign)
            tau.add(k, h, Id(k), B[hb], sign)
        tau.add(k, ("j", k), ip[k], Id(k), 1)
        tau.add(k, ("i", k), Id(k), j[k], 1)
    return sig.matrix(), tau.matrix()


def nakajima_section(x: CBRep, y: CBRep) -> tuple:
    """``s = (0, -i', j)`` in Nakajima coordinates."""
    cb, fld = x.cb, x.field
    v = DimensionVector({k: x.dim[k] for k in cb.base_vertices})
    _, _, E = nakajima_layouts(cb, v, x.double)
    _, i, j = x.nakajima()
    _, ip, _ = y.nakajima()
    blocks = {}
    for k in cb.base_vertices:
        blocks[("i", k)] = -ip[k]
        blocks[("j", k)] = j[k]
    return E.pack(fld, blocks)


def cb_to_nakajima(F: TautComplexFiber, cb: CBQuiver) -> Mat:
    """Permutation matrix taking fiber E-coordinates to Nakajima coordinates."""
    D, fld = F.V.gtr.base, F.field
    v = DimensionVector({k: F.V.dim[(k, 0)] for k in cb.base_vertices})
    _, L, EN = nakajima_layouts(cb, v, D)
    P = [[fld.zero] * F.E.dim for _ in range(EN.dim)]
    for h in F.E.keys:
        r, c = F.E.shapes[h]
        for a in range(r):
            for b in range(c):
                src = F.E.index(h, a, b)
                if h in EN:
                    dst = EN.index(h, a, b)
                elif h.startswith("cb:"):
                    k, m = h[3:].rsplit(":", 1)
                    dst = EN.index(("i", k), a, int(m) - 1)  # column m of i_k
                else:
                    k, m = h[7:].rsplit(":", 1)
                    dst = EN.index(("j", k), int(m) - 1, b)  # row m of j_k
                P[dst][src] = fld.one
    return Mat._raw(fld, EN.dim, F.E.dim, tuple(tuple(r) for r in P))


# ------------------------------------------------------- transversality

def tangent_space(x: CBRep):
    """Kernel of the differential of the moment map at ``x``, as a layout and basis."""
    D, fld = x.double, x.field
    dom = BlockLayout([(h, x.dim[D.tgt[h]], x.dim[D.src[h]]) for h in D.arrows])
    cod = BlockLayout([(k, x.dim[k], x.dim[k]) for k in D.vertices])
    lin = LinearMapBuilder(fld, dom, cod)
    for k in D.vertices:
        for h in D.into(k):
            hb, sign = D.bar[h], D.eps[h]
            lin.add(k, h, Mat.identity(fld, x.dim[k]), x.mats[hb], sign)
            lin.add(k, hb, x.mats[h], Mat.identity(fld, x.dim[k]), sign)
    return dom, kernel(lin.matrix())


def random_tangent(x: CBRep, rng) -> dict:
    dom, K = tangent_space(x)
    fld = x.field
    vec = [fld.zero] * dom.dim
    for basis_vec in K.basis:
        c = fld.random(rng)
        vec = [fld.norm(a + c * b) for a, b in zip(vec, basis_vec)]
    return dom.unpack(fld, vec)


@dataclass
class ProbeResult:
    full_rank: bool
    kernel_dim: int
    base_kernel_dim: int
    witness: dict | None
    witness_intertwines: bool | None
    oracle_intertwined: bool


def _dual_number_rep(x: CBRep, b: dict):
    """The C[h]/(h^2) deformation ``x + h b`` as a representation of twice the dimension."""
    D, fld = x.double, x.field
    arrows = []
    for h in D.arrows:
        A, Bm = x.mats[h], b[h]
        z = Mat.zeros(fld, A.rows, A.cols)
        top = [list(ra) + list(rz) for ra, rz in zip(A.data, z.data)]
        bot = [list(rb) + list(ra) for rb, ra in zip(Bm.data, A.data)]
        arrows.append((D.src[h], D.tgt[h], Mat(fld, 2 * A.rows, 2 * A.cols, top + bot)))
    # h itself acts as a nilpotent loop, so homs are module maps over the dual numbers
    for k in D.vertices:
        n = x.dim[k]
        N = [[fld.one if (r == c + n) else fld.zero for c in range(2 * n)] for r in range(2 * n)]
        arrows.append((k, k, Mat(fld, 2 * n, 2 * n, N)))
    return arrows, {k: 2 * d for k, d in x.dim.items()}


def probe_pair(x: CBRep, bV: dict, bW: dict) -> ProbeResult:
    """First-order behaviour of d0 along the deformation ``(x + h bV, x + h bW)``."""
    D, fld = x.double, x.field
    G = gtr_window(x, *WINDOW)
    V = ind0(x, G)
    F = build_fiber(V, V)
    L, E = F.L0, F.E
    deform = LinearMapBuilder(fld, L, E)
    for h in D.arrows:
        s, t = D.src[h], D.tgt[h]
        deform.add(h, s, bW[h], Mat.identity(fld, x.dim[s]), 1)
        deform.add(h, t, Mat.identity(fld, x.dim[t]), bV[h], -1)
    Dm = deform.matrix()
    Z = Mat.zeros(fld, E.dim, L.dim)
    top = [list(a) + list(z) for a, z in zip(F.D0.data, Z.data)]
    bot = [list(a) + list(b) for a, b in zip(Dm.data, F.D0.data)]
    M = Mat(fld, 2 * E.dim, 2 * L.dim, top + bot)
    K = kernel(M)
    base = L.dim - rank(F.D0)
    witness = None
    ok = None
    if K.dim > base:
        # a kernel vector with nonzero leading part; that part is a multiple of Id
        vec = next(vk for vk in K.basis if any(vk[:L.dim]))
        lead = L.unpack(fld, vec[:L.dim])
        scale = next(c for blk in lead.values() for c in blk.entries() if c != 0)
        inv = fld.inv(scale)
        phi0 = {k: Mk * inv for k, Mk in lead.items()}
        phi1 = {k: Mk * inv for k, Mk in L.unpack(fld, vec[L.dim:]).items()}
        witness = phi1
        ok = all(phi0[k] == Mat.identity(fld, x.dim[k]) for k in D.vertices) and all(
            (x.mats[h] @ phi1[D.src[h]] + bW[h]) == (phi1[D.tgt[h]] @ x.mats[h] + bV[h])
            for h in D.arrows)
    arrV, dims2 = _dual_number_rep(x, bV)
    arrW, _ = _dual_number_rep(x, bW)
    hom_dim, _ = hom_quiver(arrV, arrW, dims2, dims2, fld)
    base_hom, _ = hom_quiver(x.arrow_maps(), x.arrow_maps(), x.dims(), x.dims(), fld)
    return ProbeResult(K.dim == base, K.dim, base, witness, ok, hom_dim > base_hom)


def transversality_probe(x: CBRep, seed=None, trials: int = 5, rng=None) -> list[ProbeResult]:
    """Independent random tangent pairs, plus the equal pair as a control."""
    rng = rng or random.Random(seed)
    out = []
    bV = random_tangent(x, rng)
    out.append(probe_pair(x, bV, bV))
    for _ in range(trials):
        out.append(probe_pair(x, random_tangent(x, rng), random_tangent(x, rng)))
    return out


def koszul_rank_table(d: int) -> dict:
    if d < 0:
        raise ValueError("rank must be non-negative")
    ranks = [comb(d, k) for k in range(d + 1)]
    alt = sum((-1) ** k * r for k, r in enumerate(ranks))
    return {"ranks": ranks, "alternating_sum": alt}
