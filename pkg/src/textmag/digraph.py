"""Determinants and inverse entries of matrices by digraph enumeration.

A square matrix is read as a weighted digraph (one edge per nonzero entry).
Its determinant is the signed weight sum over linear subdigraphs (spanning
vertex-disjoint cycle collections), and each inverse entry is the signed
weight sum over connections (a simple path between the two vertices plus a
cycle collection covering everything else) divided by the determinant.

The module is deliberately self-contained: it accepts any matrix or edge
list and never looks at text categories, so it can cross-check them.
Everything here is exponential-time enumeration guarded by a vertex cap;
it exists as an oracle, not as a production inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import DEFAULT_VERTEX_CAP
from .errors import ParseError, SingularMatrix, TooManyVertices

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class WeightedDigraph:
    """Finite digraph with nonzero real edge weights; loops allowed."""

    vertices: tuple
    weights: dict

    def __post_init__(self):
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("duplicate vertices")
        out_adj = [[] for _ in self.vertices]
        for (src, dst), w in self.weights.items():
            if w == 0.0:
                raise ValueError(f"zero-weight edge {src}->{dst}; omit it instead")
            if src not in index or dst not in index:
                raise ValueError(f"edge {src}->{dst} uses an unknown vertex")
            out_adj[index[src]].append((index[dst], float(w)))
        for lst in out_adj:
            lst.sort()
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_out", tuple(tuple(lst) for lst in out_adj))

    def __len__(self):
        return len(self.vertices)

    def edge_weight(self, src, dst) -> float:
        return self.weights.get((src, dst), 0.0)


def digraph_of_matrix(matrix, labels=None) -> WeightedDigraph:
    """Digraph of a square matrix: one weighted edge per nonzero entry.

    ``matrix`` may be anything with an ``index``/``values`` pair (a labeled
    matrix) or a plain square array; ``labels`` overrides the vertex names.
    """
    values = getattr(matrix, "values", matrix)
    if labels is None:
        labels = getattr(matrix, "index", None)
    n = len(values)
    if labels is None:
        labels = tuple(range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise ValueError("label count does not match matrix size")
    weights = {}
    for i, src in enumerate(labels):
        row = values[i]
        if len(row) != n:
            raise ValueError("matrix is not square")
        for j, dst in enumerate(labels):
            w = float(row[j])
            if w != 0.0:
                weights[(src, dst)] = w
    return WeightedDigraph(vertices=labels, weights=weights)


@dataclass(frozen=True)
class LinearSubdigraph:
    """A spanning set of vertex-disjoint cycles (in/out degree 1 everywhere)."""

    edges: frozenset
    num_cycles: int
    signature: int
    weight: float


@dataclass(frozen=True)
class Connection:
    """A simple path between two vertices plus cycles covering the rest."""

    source: object
    target: object
    path: tuple
    edges: frozenset
    num_cycles: int
    signature: int
    weight: float


def _check_size(digraph: WeightedDigraph, vertex_cap: int) -> None:
    if len(digraph) > vertex_cap:
        raise TooManyVertices(
            f"{len(digraph)} vertices exceed the enumeration cap {vertex_cap}"
        )


def _assignments(out_adj, members, taken, pos, current):
    """Backtrack over in/out-degree-1 edge sets on ``members`` (sorted ints).

    Yields {vertex: (target, weight)} maps; ``taken`` tracks used targets.
    """
    if pos == len(members):
        yield dict(current)
        return
    v = members[pos]
    for dst, w in out_adj[v]:
        if dst in taken or dst not in members:
            continue
        taken.add(dst)
        current[v] = (dst, w)
        yield from _assignments(out_adj, members, taken, pos + 1, current)
        del current[v]
        taken.remove(dst)


def _cycle_count(assignment) -> int:
    seen = set()
    cycles = 0
    for start in assignment:
        if start in seen:
            continue
        cycles += 1
        node = start
        while node not in seen:
            seen.add(node)
            node = assignment[node][0]
    return cycles


def _cycle_cover_terms(digraph: WeightedDigraph, members):
    """Yield (assignment, cycles, weight) over cycle covers of ``members``."""
    members = frozenset(members)
    for assignment in _assignments(digraph._out, sorted(members), set(), 0, {}):
        weight = 1.0
        for dst, w in assignment.values():
            weight *= w
        yield assignment, _cycle_count(assignment), weight


def enumerate_linear_subdigraphs(
    digraph: WeightedDigraph,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
):
    """All linear subdigraphs, with their signature and weight.

    Deterministic order: backtracking follows sorted adjacency.
    """
    _check_size(digraph, vertex_cap)
    n = len(digraph)
    labels = digraph.vertices
    for assignment, cycles, weight in _cycle_cover_terms(digraph, range(n)):
        edges = frozenset((labels[v], labels[dst])
                          for v, (dst, _) in assignment.items())
        yield LinearSubdigraph(
            edges=edges,
            num_cycles=cycles,
            signature=(-1) ** (n + cycles),
            weight=weight,
        )


def det_via_linear_subdigraphs(
    digraph: WeightedDigraph,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> float:
    """Determinant of the associated matrix as a signed weight sum."""
    _check_size(digraph, vertex_cap)
    n = len(digraph)
    total = 0.0
    for _, cycles, weight in _cycle_cover_terms(digraph, range(n)):
        total += (-1) ** (n + cycles) * weight
    return total


def _simple_paths(digraph: WeightedDigraph, src: int, dst: int):
    """Yield (vertex tuple, weight) over simple paths src -> dst (ints).

    For ``src == dst`` the single empty path (just the vertex) is yielded.
    """
    if src == dst:
        yield (src,), 1.0
        return
    out = digraph._out
    path = [src]
    on_path = {src}

    def walk(node, weight):
        for nxt, w in out[node]:
            if nxt == dst:
                yield tuple(path) + (dst,), weight * w
            elif nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                yield from walk(nxt, weight * w)
                on_path.remove(nxt)
                path.pop()

    yield from walk(src, 1.0)


def enumerate_connections(
    digraph: WeightedDigraph,
    source,
    target,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
):
    """All connections from ``source`` to ``target``.

    Each one is a simple path between the endpoints together with a cycle
    cover of the complementary vertices; the endpoints themselves get no
    incoming (resp. outgoing) edges.
    """
    _check_size(digraph, vertex_cap)
    n = len(digraph)
    labels = digraph.vertices
    index = digraph._index
    try:
        src, dst = index[source], index[target]
    except KeyError as exc:
        raise ValueError(f"unknown vertex {exc}") from None
    everyone = frozenset(range(n))
    for path, path_weight in _simple_paths(digraph, src, dst):
        rest = everyone - set(path)
        path_edges = tuple((labels[a], labels[b]) for a, b in zip(path, path[1:]))
        for assignment, cycles, cover_weight in _cycle_cover_terms(digraph, rest):
            edges = frozenset(path_edges).union(
                (labels[v], labels[d]) for v, (d, _) in assignment.items()
            )
            yield Connection(
                source=source,
                target=target,
                path=tuple(labels[v] for v in path),
                edges=edges,
                num_cycles=cycles,
                signature=(-1) ** (n + cycles + 1),
                weight=path_weight * cover_weight,
            )


def inverse_entry_via_connections(
    digraph: WeightedDigraph,
    source,
    target,
    *,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    _det: float | None = None,
) -> float:
    """One entry of the matrix inverse as a connection sum over the determinant.

    Connections sharing a path differ only in their cycle cover, so the sum
    is grouped by path and the cover sums are memoized per leftover vertex
    set; the terms are exactly those of ``enumerate_connections``.
    """
    _check_size(digraph, vertex_cap)
    det = det_via_linear_subdigraphs(digraph) if _det is None else _det
    if abs(det) < SINGULAR_TOL:
        raise SingularMatrix(f"determinant {det} too close to zero")
    n = len(digraph)
    index = digraph._index
    try:
        src, dst = index[source], index[target]
    except KeyError as exc:
        raise ValueError(f"unknown vertex {exc}") from None

    cover_sums: dict = {}

    def cover_sum(rest: frozenset) -> float:
        hit = cover_sums.get(rest)
        if hit is None:
            hit = 0.0
            for _, cycles, weight in _cycle_cover_terms(digraph, rest):
                hit += (-1) ** cycles * weight
            cover_sums[rest] = hit
        return hit

    everyone = frozenset(range(n))
    total = 0.0
    for path, path_weight in _simple_paths(digraph, src, dst):
        rest = everyone - set(path)
        total += path_weight * cover_sum(rest)
    return (-1) ** (n + 1) * total / det


def parse_digraph_text(text: str) -> WeightedDigraph:
    """Parse the diagnostic edge-list format: one ``src dst weight`` per line.

    Blank lines and ``#`` comments are skipped; the vertex set is the sorted
    set of labels that appear.
    """
    weights = {}
    labels = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'src dst weight'")
        src, dst, w = parts
        try:
            weight = float(w)
        except ValueError:
            raise ParseError(f"line {lineno}: bad weight {w!r}") from None
        if weight == 0.0:
            raise ParseError(f"line {lineno}: zero weight means no edge")
        if (src, dst) in weights:
            raise ParseError(f"line {lineno}: duplicate edge {src}->{dst}")
        weights[(src, dst)] = weight
        labels.update((src, dst))
    return WeightedDigraph(vertices=tuple(sorted(labels)), weights=weights)


def format_digraph_text(digraph: WeightedDigraph) -> str:
    lines = [f"{src} {dst} {w!r}" for (src, dst), w in
             sorted(digraph.weights.items(), key=lambda kv: kv[0])]
    return "\n".join(lines) + ("\n" if lines else "")
