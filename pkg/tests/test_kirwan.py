import random

import pytest
from hypothesis import given, strategies as st

from qvkirwan.kirwan import (build_fiber, cb_to_nakajima, expected_rank, koszul_rank_table,
                             nakajima_layouts, nakajima_section, probe_pair, random_tangent, section_s,
                             sigma_tau, transversality_probe, verify_fiber)
from qvkirwan.linalg import Mat, QQ, kernel, rank
from qvkirwan.quiver import DimensionVector, constant_gtr_dimension, graded_triple
from qvkirwan.representations import (BoundaryPoint, GtrRep, act_cb, act_gtr, ind, ind0, random_group_element,
                                      sample_moment_fiber, gtr_window)
from qvkirwan.stability import Theta, cb_theta, is_stable_fast

from conftest import CASES, F101, a1, a2, jordan, setup

cases = st.sampled_from(CASES)


def sample_ctx(case, seed):
    _, Q0, v, w = case
    cbq, D, alpha = setup(Q0(), v, w)
    theta = cb_theta(Theta({k: 1 for k in v}), DimensionVector(v))
    return cbq, D, alpha, theta, random.Random(seed)


def stable_point(D, alpha, cbq, theta, rng, fld=F101):
    while True:
        x = sample_moment_fiber(D, alpha, rng=rng, field=fld, cb=cbq)
        if is_stable_fast(x, theta).stable:
            return x


def lift(x, rng):
    G = gtr_window(x)
    return ind(random_group_element(G.vertices, constant_gtr_dimension(x.dim, 0, 2), rng, x.field), x, G)


def boundary_lift(y, rng):
    """Ind of ``y`` with the top slice collapsed: a_{.,1} = 0 and e_{.,1} = 0."""
    W = lift(y, rng)
    a = {k: (Mat.zeros(y.field, *M.shape) if k[1] == 1 else M) for k, M in W.a_mats.items()}
    e = {k: (Mat.zeros(y.field, *M.shape) if k[1] == 1 else M) for k, M in W.e_mats.items()}
    return GtrRep(W.gtr, W.dim, a, e, W.field, W.cb)


def test_expected_rank_examples():
    cbq, D, alpha = setup(jordan(), {"1": 1}, {"1": 1})
    assert expected_rank(D, alpha, "inf") == 2
    cbq, D, alpha = setup(jordan(), {"1": 0}, {"1": 1})
    assert expected_rank(D, alpha, "inf") == 0
    cbq, D, alpha = setup(a1(), {"1": 1}, {"1": 2})
    assert expected_rank(D, alpha, "inf") == 2


def test_koszul_table():
    assert koszul_rank_table(2) == {"ranks": [1, 2, 1], "alternating_sum": 0}
    assert koszul_rank_table(0)["ranks"] == [1]
    assert koszul_rank_table(5)["ranks"] == [1, 5, 10, 10, 5, 1]
    assert all(koszul_rank_table(d)["alternating_sum"] == 0 for d in range(1, 9))
    with pytest.raises(ValueError):
        koszul_rank_table(-1)


def test_identity_is_in_kernel_of_d0():
    cbq, D, alpha, theta, rng = sample_ctx(CASES[1], 0)
    x = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq)
    F = build_fiber(ind0(x, gtr_window(x)), ind0(x, gtr_window(x)))
    ident = F.L0.pack(F101, {k: Mat.identity(F101, F.L0.shapes[k][0]) for k in F.L0.keys})
    assert all(c == 0 for c in F.D0.apply(ident))


def test_window_and_dagger_preconditions():
    cbq, D, alpha, theta, rng = sample_ctx(CASES[0], 0)
    x = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq)
    V1 = ind0(x, graded_triple(D, 0, 1))
    with pytest.raises(ValueError):
        build_fiber(V1, V1)
    W = boundary_lift(x, rng)
    with pytest.raises(BoundaryPoint):
        build_fiber(W, W)


@given(cases, st.integers(0, 2**32), st.booleans())
def test_composite_is_zero_on_relation_pairs(case, seed, boundary):
    # not only stable points: any pair from the relation locus, including a singular target
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq, zero_prob=0.3)
    y = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq, zero_prob=0.3)
    W = boundary_lift(y, rng) if boundary else lift(y, rng)
    F = build_fiber(lift(x, rng), W)
    r = verify_fiber(F)
    assert r.composite_zero and r.truncated_composite_zero
    assert r.hom_cross_check
    assert r.tau_s_zero


@given(cases, st.integers(0, 2**32))
def test_stable_pairs(case, seed):
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = stable_point(D, alpha, cbq, theta, rng)
    y = stable_point(D, alpha, cbq, theta, rng)
    er = expected_rank(D, alpha, "inf")
    g = random_group_element(cbq.base_vertices, alpha, rng, F101)
    for other, iso in ((x, True), (act_cb(g, x), True), (y, None)):
        r = verify_fiber(build_fiber(lift(x, rng), lift(other, rng)))
        iso = r.hom_VW > 0 if iso is None else iso
        assert r.exact
        assert r.rank_H0 == er
        assert r.dim_ker_D0 == r.dim_coker_D1 == int(iso) == r.hom_VW == r.hom_WV
        assert r.s_in_image == iso


def test_section_is_delta0_of_identity_at_diagonal(rng):
    cbq, D, alpha, theta, _ = sample_ctx(CASES[1], 3)
    x = stable_point(D, alpha, cbq, theta, rng)
    F = build_fiber(ind0(x, gtr_window(x)), ind0(x, gtr_window(x)))
    ident = F.L0.pack(F101, {k: Mat.identity(F101, x.dim[k]) for k in cbq.base_vertices})
    ident_I0 = [c for k in F.L0.keys if k != "inf"
                for c in Mat.identity(F101, x.dim[k]).entries()]
    assert F.d0.apply(ident_I0) == section_s(F)
    assert len(ident) == F.D0.cols


@given(cases, st.integers(0, 2**32))
def test_identity_e_reduces_to_nakajima_maps(case, seed):
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq)
    y = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq)
    F = build_fiber(ind0(x, gtr_window(x)), ind0(y, gtr_window(y)))
    P = cb_to_nakajima(F, cbq)
    sig, tau = sigma_tau(x, y)
    assert P @ F.d0 == sig
    assert tau @ P == F.d1
    assert P.apply(section_s(F)) == nakajima_section(x, y)
    assert (tau @ sig).is_zero()


def test_sigma_of_identity(rng):
    cbq, D, alpha, theta, _ = sample_ctx(CASES[3], 1)
    x = sample_moment_fiber(D, alpha, rng=rng, field=F101, cb=cbq)
    sig, _ = sigma_tau(x, x)
    v = DimensionVector({k: x.dim[k] for k in cbq.base_vertices})
    H0, L, E = nakajima_layouts(cbq, v, D)
    out = E.unpack(F101, sig.apply(L.pack(F101, {k: Mat.identity(F101, v[k]) for k in L.keys})))
    _, i, j = x.nakajima()
    assert all(out[h].is_zero() for h in H0)
    assert all(out[("i", k)] == -i[k] and out[("j", k)] == j[k] for k in cbq.base_vertices)


@given(cases, st.integers(0, 2**32))
def test_sigma_injective_and_tau_surjective_on_stable_points(case, seed):
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = stable_point(D, alpha, cbq, theta, rng)
    y = stable_point(D, alpha, cbq, theta, rng)
    sig, tau = sigma_tau(x, y)
    assert rank(sig) == sig.cols
    assert rank(tau) == tau.rows


@given(cases, st.integers(0, 2**32))
def test_verdicts_invariant_under_group_action(case, seed):
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = stable_point(D, alpha, cbq, theta, rng)
    y = stable_point(D, alpha, cbq, theta, rng)
    V, W = lift(x, rng), lift(y, rng)
    G = V.gtr
    agtr = constant_gtr_dimension(alpha, 0, 2)
    g = random_group_element(G.vertices, agtr, rng, F101)
    h = random_group_element(G.vertices, agtr, rng, F101)
    r1 = verify_fiber(build_fiber(V, W))
    r2 = verify_fiber(build_fiber(act_gtr(g, V), act_gtr(h, W)))
    assert (r1.rank_d0, r1.rank_d1, r1.s_in_image, r1.dim_ker_D0) == \
        (r2.rank_d0, r2.rank_d1, r2.s_in_image, r2.dim_ker_D0)


@pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
def test_transversality_probe(case):
    cbq, D, alpha, theta, rng = sample_ctx(case, 11)
    x = stable_point(D, alpha, cbq, theta, rng)
    probes = transversality_probe(x, rng=rng, trials=3)
    control = probes[0]
    assert not control.full_rank and control.witness_intertwines
    # the identity lies in the base kernel; equal deformations need no correction
    assert all(M.is_zero() for M in control.witness.values())
    for p in probes:
        assert p.full_rank != p.oracle_intertwined
        if not p.full_rank:
            assert p.witness_intertwines
    if expected_rank(D, alpha, "inf") > 0:
        assert any(p.full_rank for p in probes[1:])


def test_probe_on_orbit_direction(rng):
    # b^W - b^V tangent to the orbit is intertwined: a nonzero witness appears
    cbq, D, alpha, theta, _ = sample_ctx(CASES[1], 5)
    x = stable_point(D, alpha, cbq, theta, rng)
    bV = random_tangent(x, rng)
    xi = {k: Mat.random(F101, x.dim[k], x.dim[k], rng) for k in D.vertices}
    bW = {h: bV[h] + xi[D.tgt[h]] @ x.mats[h] - x.mats[h] @ xi[D.src[h]] for h in D.arrows}
    p = probe_pair(x, bV, bW)
    assert not p.full_rank and p.oracle_intertwined and p.witness_intertwines


def test_probe_oracle_uses_module_maps():
    # a point where plain linear maps between the deformed modules over-count
    from qvkirwan.representations import CBRep
    cbq, D, alpha = setup(jordan(), {"1": 1}, {"1": 1})
    s = lambda c: Mat.scalar(F101, 1, c)  # noqa: E731
    x = CBRep(D, alpha, {"loop": s(31), "bar:loop": s(41), "cb:1:1": s(33), "bar:cb:1:1": s(0)}, F101, cbq)
    rng = random.Random(0)
    for _ in range(5):
        p = probe_pair(x, random_tangent(x, rng), random_tangent(x, rng))
        assert p.full_rank != p.oracle_intertwined


@given(cases, st.integers(0, 2**32))
def test_probe_agrees_with_module_hom_oracle(case, seed):
    cbq, D, alpha, theta, rng = sample_ctx(case, seed)
    x = stable_point(D, alpha, cbq, theta, rng)
    p = probe_pair(x, random_tangent(x, rng), random_tangent(x, rng))
    assert p.full_rank != p.oracle_intertwined
    assert p.full_rank or p.witness_intertwines
