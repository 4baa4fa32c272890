import random

import numpy as np
import pytest

from textmag import (
    Alphabet,
    WeightedDigraph,
    build_category,
    det_via_linear_subdigraphs,
    digraph_of_matrix,
    enumerate_connections,
    enumerate_linear_subdigraphs,
    inverse_entry_via_connections,
    mobius_closed_form,
    uniform_model,
    zeta_matrix,
)
from textmag.digraph import format_digraph_text, parse_digraph_text
from textmag.errors import ParseError, SingularMatrix, TooManyVertices


def rooted_tree_edges():
    # two-level binary fan-out: 1 -> {2,3}, 2 -> {4,5}, 3 -> {6,7}
    return {(1, 2): 1.0, (1, 3): 1.0, (2, 4): 1.0, (2, 5): 1.0,
            (3, 6): 1.0, (3, 7): 1.0}


def with_loops(weights, vertices):
    out = dict(weights)
    for v in vertices:
        out[(v, v)] = 1.0
    return out


def random_digraph(rng: random.Random, n: int, density: float = 0.5):
    weights = {}
    for i in range(n):
        for j in range(n):
            if rng.random() < density:
                w = rng.uniform(-2.0, 2.0)
                if w != 0.0:
                    weights[(i, j)] = w
    return WeightedDigraph(vertices=tuple(range(n)), weights=weights)


def as_matrix(digraph: WeightedDigraph) -> np.ndarray:
    n = len(digraph)
    mat = np.zeros((n, n))
    pos = {v: i for i, v in enumerate(digraph.vertices)}
    for (src, dst), w in digraph.weights.items():
        mat[pos[src], pos[dst]] = w
    return mat


def test_tree_without_loops_has_no_linear_subdigraph():
    digraph = WeightedDigraph(vertices=tuple(range(1, 8)),
                              weights=rooted_tree_edges())
    assert list(enumerate_linear_subdigraphs(digraph)) == []


def test_all_loops_tree_has_exactly_one_with_positive_signature():
    vertices = tuple(range(1, 8))
    digraph = WeightedDigraph(vertices=vertices,
                              weights=with_loops(rooted_tree_edges(), vertices))
    subdigraphs = list(enumerate_linear_subdigraphs(digraph))
    assert len(subdigraphs) == 1
    only = subdigraphs[0]
    assert only.num_cycles == 7
    assert only.signature == 1  # (-1) ** (7 + 7)
    assert only.weight == 1.0
    assert only.edges == frozenset((v, v) for v in vertices)


def test_two_cycle_with_loops_has_two_linear_subdigraphs():
    digraph = WeightedDigraph(
        vertices=(0, 1),
        weights={(0, 0): 1.0, (1, 1): 1.0, (0, 1): 2.0, (1, 0): 3.0},
    )
    subdigraphs = list(enumerate_linear_subdigraphs(digraph))
    assert len(subdigraphs) == 2
    by_cycles = {s.num_cycles: s for s in subdigraphs}
    assert by_cycles[2].signature == 1 and by_cycles[2].weight == 1.0
    assert by_cycles[1].signature == -1 and by_cycles[1].weight == 6.0
    assert det_via_linear_subdigraphs(digraph) == pytest.approx(1.0 - 6.0)


def test_det_identity():
    digraph = digraph_of_matrix(np.eye(6))
    assert det_via_linear_subdigraphs(digraph) == 1.0
    loops = list(enumerate_linear_subdigraphs(digraph))
    assert len(loops) == 1 and loops[0].signature == 1


def test_det_unitriangular():
    q = 0.37
    digraph = digraph_of_matrix(np.array([[1.0, q], [0.0, 1.0]]))
    assert det_via_linear_subdigraphs(digraph) == 1.0


def test_det_matches_elimination_on_random_digraphs():
    rng = random.Random(17)
    for _ in range(25):
        n = rng.randint(2, 6)
        digraph = random_digraph(rng, n)
        det = det_via_linear_subdigraphs(digraph)
        assert det == pytest.approx(float(np.linalg.det(as_matrix(digraph))),
                                    abs=1e-9)


def test_zero_matrix_has_no_edges():
    digraph = digraph_of_matrix(np.zeros((3, 3)))
    assert digraph.weights == {}
    assert list(enumerate_linear_subdigraphs(digraph)) == []
    assert det_via_linear_subdigraphs(digraph) == 0.0


def test_digraph_of_zeta_uniform_a2():
    cat = build_category(uniform_model(Alphabet(["a"]), 2))
    digraph = digraph_of_matrix(zeta_matrix(cat, 1.0))
    loops = [e for e in digraph.weights if e[0] == e[1]]
    assert len(loops) == 3
    off = {e: w for e, w in digraph.weights.items() if e[0] != e[1]}
    assert set(off.values()) == {0.5}
    assert len(off) == 2


def test_connection_figure_shape_signature():
    vertices = tuple(range(1, 8))
    digraph = WeightedDigraph(vertices=vertices,
                              weights=with_loops(rooted_tree_edges(), vertices))
    conns = list(enumerate_connections(digraph, 1, 5))
    assert len(conns) == 1
    conn = conns[0]
    assert conn.path == (1, 2, 5)
    assert conn.num_cycles == 4
    assert conn.signature == 1  # (-1) ** (7 + 4 + 1)


def test_connection_from_vertex_to_itself_all_loops():
    digraph = digraph_of_matrix(np.eye(4))
    conns = list(enumerate_connections(digraph, 2, 2))
    assert len(conns) == 1
    assert conns[0].path == (2,)
    assert conns[0].num_cycles == 3
    assert conns[0].weight == 1.0
    assert conns[0].signature == 1  # (-1) ** (4 + 3 + 1)


def test_connection_disconnected_vertices():
    digraph = digraph_of_matrix(np.eye(3))
    assert list(enumerate_connections(digraph, 0, 2)) == []


def test_inverse_entry_unitriangular():
    q = 1.75
    digraph = digraph_of_matrix(np.array([[1.0, q], [0.0, 1.0]]))
    assert inverse_entry_via_connections(digraph, 0, 1) == pytest.approx(-q)
    assert inverse_entry_via_connections(digraph, 0, 0) == 1.0
    assert inverse_entry_via_connections(digraph, 1, 1) == 1.0


def test_inverse_entry_identity_diagonal():
    digraph = digraph_of_matrix(np.eye(5))
    assert inverse_entry_via_connections(digraph, 3, 3) == 1.0


def test_inverse_entry_zeta_one_step():
    cat = build_category(uniform_model(Alphabet(["a"]), 2))
    digraph = digraph_of_matrix(zeta_matrix(cat, 1.0))
    root = cat.objects[0]
    child = cat.objects[1]
    assert inverse_entry_via_connections(digraph, root, child) == \
        pytest.approx(-0.5, abs=1e-12)


def test_inverse_entries_match_elimination_on_random_digraphs():
    rng = random.Random(41)
    checked = 0
    for _ in range(25):
        n = rng.randint(2, 6)
        digraph = random_digraph(rng, n)
        mat = as_matrix(digraph)
        det = float(np.linalg.det(mat))
        if abs(det) <= 1e-6:
            continue
        inv = np.linalg.inv(mat)
        for i in range(n):
            for j in range(n):
                entry = inverse_entry_via_connections(digraph, i, j)
                assert entry == pytest.approx(inv[i, j], abs=1e-8)
                checked += 1
    assert checked > 0


def test_grouped_inverse_equals_plain_connection_sum():
    rng = random.Random(8)
    for _ in range(10):
        digraph = random_digraph(rng, 4, density=0.7)
        det = det_via_linear_subdigraphs(digraph)
        if abs(det) < 1e-6:
            continue
        for i in range(4):
            for j in range(4):
                plain = sum(c.signature * c.weight
                            for c in enumerate_connections(digraph, i, j)) / det
                grouped = inverse_entry_via_connections(digraph, i, j, _det=det)
                assert grouped == pytest.approx(plain, abs=1e-10)


def test_zeta_digraph_det_one_and_inverse_matches_closed_form():
    for alphabet, cutoff in [(Alphabet(["a"]), 2), (Alphabet(["a"]), 3),
                             (Alphabet(["a", "b"]), 2)]:
        cat = build_category(uniform_model(alphabet, cutoff))
        assert len(cat) <= 10
        for t in (1.0, 2.0):
            digraph = digraph_of_matrix(zeta_matrix(cat, t))
            det = det_via_linear_subdigraphs(digraph)
            assert det == pytest.approx(1.0, abs=1e-12)
            closed = mobius_closed_form(cat, t)
            for x in cat.objects:
                for y in cat.objects:
                    entry = inverse_entry_via_connections(digraph, x, y,
                                                          _det=det)
                    assert entry == pytest.approx(closed.entry(x, y), abs=1e-9)


def in_out_degrees(edges):
    outs = {}
    ins = {}
    for src, dst in edges:
        outs[src] = outs.get(src, 0) + 1
        ins[dst] = ins.get(dst, 0) + 1
    return ins, outs


def test_linear_subdigraphs_have_unit_degrees_everywhere():
    rng = random.Random(64)
    for _ in range(8):
        digraph = random_digraph(rng, 5, density=0.6)
        for sub in enumerate_linear_subdigraphs(digraph):
            ins, outs = in_out_degrees(sub.edges)
            for v in digraph.vertices:
                assert ins.get(v, 0) == 1 and outs.get(v, 0) == 1


def test_connections_satisfy_degree_conditions():
    rng = random.Random(65)
    for _ in range(8):
        digraph = random_digraph(rng, 5, density=0.6)
        for v in digraph.vertices:
            for w in digraph.vertices:
                for conn in enumerate_connections(digraph, v, w):
                    ins, outs = in_out_degrees(conn.edges)
                    assert ins.get(v, 0) == 0
                    assert outs.get(w, 0) == 0
                    if v != w:
                        assert outs.get(v, 0) == 1
                        assert ins.get(w, 0) == 1
                    for k in digraph.vertices:
                        if k not in (v, w):
                            assert ins.get(k, 0) == 1
                            assert outs.get(k, 0) == 1


def test_vertex_cap():
    digraph = digraph_of_matrix(np.eye(13))
    with pytest.raises(TooManyVertices):
        list(enumerate_linear_subdigraphs(digraph))
    with pytest.raises(TooManyVertices):
        det_via_linear_subdigraphs(digraph)
    with pytest.raises(TooManyVertices):
        inverse_entry_via_connections(digraph, 0, 0)


def test_singular_matrix_rejected():
    digraph = digraph_of_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(SingularMatrix):
        inverse_entry_via_connections(digraph, 0, 1)


def test_text_format_round_trip():
    text = "u v 0.5\nv w -1.25\nu u 1\n"
    digraph = parse_digraph_text(text)
    assert digraph.vertices == ("u", "v", "w")
    assert digraph.edge_weight("v", "w") == -1.25
    again = parse_digraph_text(format_digraph_text(digraph))
    assert again == digraph


@pytest.mark.parametrize("bad", ["a b", "a b x", "a b 0.0", "a b 1\na b 2"])
def test_text_format_errors(bad):
    with pytest.raises(ParseError):
        parse_digraph_text(bad)
