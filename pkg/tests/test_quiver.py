import pytest
from hypothesis import given, strategies as st

from qvkirwan.quiver import (DimensionVector, Quiver, QuiverError, cb_dimension, cb_quiver,
                             constant_gtr_dimension, crawley_boevey, double, graded_triple)

from conftest import a1, jordan


def two_vertex():
    return Quiver.build(["1", "2"], [("h", "1", "2"), ("k", "2", "2")])


@st.composite
def quivers(draw):
    n = draw(st.integers(1, 4))
    verts = [f"v{i}" for i in range(n)]
    m = draw(st.integers(0, 5))
    arrows = [(f"a{j}", draw(st.sampled_from(verts)), draw(st.sampled_from(verts))) for j in range(m)]
    return Quiver.build(verts, arrows)


def test_double_two_vertex_example():
    D = double(two_vertex())
    assert len(D.arrows) == 4
    assert D.eps["h"] == D.eps["k"] == 1
    assert D.eps["bar:h"] == D.eps["bar:k"] == -1


def test_double_edge_cases():
    assert double(Quiver.build(["1", "2", "3"], [])).arrows == ()
    D = double(jordan())
    assert set(D.arrows) == {"loop", "bar:loop"}
    assert D.bar["loop"] == "bar:loop" and D.bar["bar:loop"] == "loop"


@given(quivers())
def test_bar_is_a_fixed_point_free_involution(Q):
    D = double(Q)
    for h in D.arrows:
        hb = D.bar[h]
        assert hb != h and D.bar[hb] == h
        assert D.src[hb] == D.tgt[h] and D.tgt[hb] == D.src[h]
        assert D.eps[hb] == -D.eps[h]
        assert (D.eps[h] == 1) == (h in Q.arrows)
    assert D.forget() == Q


@given(quivers(), st.integers(0, 2), st.integers(1, 3))
def test_gtr_arrow_count(Q, a, width):
    D = double(Q)
    G = graded_triple(D, a, a + width)
    assert len(G.arrows) == len(D.arrows) * width + len(D.vertices) * width
    assert len(G.vertices) == len(D.vertices) * (width + 1)
    for x in G.arrows:
        (s, n), (t, m) = G.src(x), G.tgt(x)
        assert m == n + 1


def test_crawley_boevey_examples():
    Q, inf = crawley_boevey(jordan(), DimensionVector({"1": 1}))
    assert set(Q.vertices) == {"1", inf}
    assert set(Q.arrows) == {"loop", "cb:1:1"}
    assert Q.src["cb:1:1"] == inf and Q.tgt["cb:1:1"] == "1"
    Q2, _ = crawley_boevey(jordan(), DimensionVector({"1": 2}))
    assert set(Q2.arrows) == {"loop", "cb:1:1", "cb:1:2"}
    Q3, inf = crawley_boevey(a1(), DimensionVector({"1": 1}))
    assert Q3.edges() == [("cb:1:1", inf, "1")]


def test_crawley_boevey_rejects_bad_framing():
    with pytest.raises(QuiverError):
        crawley_boevey(jordan(), DimensionVector({"1": 0}))
    with pytest.raises(QuiverError):
        crawley_boevey(jordan(), DimensionVector({"2": 1}))
    with pytest.raises(QuiverError):
        crawley_boevey(Quiver.build(["inf"], []), DimensionVector({"inf": 1}))


def test_cb_dimension_examples():
    assert cb_dimension(DimensionVector({"1": 2})) == DimensionVector({"1": 2, "inf": 1})
    assert cb_dimension(DimensionVector({"1": 0, "2": 0}))["inf"] == 1
    assert cb_dimension(DimensionVector({"1": 1, "2": 3, "3": 2})).total() == 7


def test_graded_triple_examples():
    G = graded_triple(double(two_vertex()), 0, 1)
    assert len(G.vertices) == 4
    assert set(G.arrows) == {("h", 0), ("bar:h", 0), ("k", 0), ("bar:k", 0), ("1", 0), ("2", 0)}
    G1 = graded_triple(double(a1()), 0, 2)
    assert len(G1.vertices) == 3 and len(G1.arrows) == 2
    cbq = cb_quiver(jordan(), DimensionVector({"1": 1}))
    assert len(graded_triple(double(cbq.quiver), 0, 2).arrows) == 12


def test_graded_triple_rejects_bad_window_and_collisions():
    with pytest.raises(QuiverError):
        graded_triple(double(jordan()), 2, 2)
    with pytest.raises(QuiverError):
        graded_triple(double(Quiver.build(["x", "y"], [("x", "y", "y")])), 0, 1)


def test_constant_gtr_dimension_examples():
    agtr = constant_gtr_dimension(DimensionVector({"1": 1, "inf": 1}), 0, 2)
    assert len(agtr.dims) == 6 and set(agtr.dims.values()) == {1}
    assert constant_gtr_dimension(DimensionVector({"1": 0}), 0, 2).is_zero()
    agtr = constant_gtr_dimension(DimensionVector({"1": 2, "2": 3}), 0, 1)
    assert [agtr[(i, n)] for n in (0, 1) for i in ("1", "2")] == [2, 3, 2, 3]


def test_quiver_validation():
    with pytest.raises(QuiverError):
        Quiver.build(["1", "1"], [])
    with pytest.raises(QuiverError):
        Quiver.build(["1"], [("a", "1", "2")])
    with pytest.raises(QuiverError):
        Quiver.build(["1"], [("a", "1", "1"), ("a", "1", "1")])


def test_dimension_vector_order():
    small, big = DimensionVector({"1": 1, "2": 0}), DimensionVector({"1": 1, "2": 2})
    assert small < big and not big <= small
    assert len(list(big.below())) == 2 * 3
