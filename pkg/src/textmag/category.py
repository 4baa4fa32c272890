"""Materialize the finite tree of texts reachable from a root prompt.

The category holds every extension of the root allowed by the cutoff,
whether or not the model gives it positive probability: a zero-probability
token still contributes an object, just one at infinite distance.  All
structure (per-edge probabilities, chain products, terminating states) is
derived from the model once at build time; query methods are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_OBJECT_CAP, DEFAULT_TOLERANCES, Tolerances
from .errors import NotInCategory, TooLarge
from .models import ModelSpec, NextTokenDistribution
from .texts import (
    BOS,
    Alphabet,
    Text,
    is_prefix,
    make_text,
    one_token_extensions,
)


def extension_object_count(alphabet_size: int, depth: int) -> int:
    """Number of objects in the tree under a root with ``depth`` spare levels.

    ``depth`` is the cutoff minus the root length.  Counts the root itself,
    every unfinished extension, and every finished extension that fits.
    """
    if depth <= 0:
        return 1
    total = 1  # the root
    for j in range(1, depth + 1):
        total += alphabet_size ** j + alphabet_size ** (j - 1)
    return total


@dataclass
class TextCategory:
    """The tree of all texts extending ``root`` within the cutoff.

    Treat instances as immutable after construction; every query is pure
    and safe for concurrent reads.
    """

    alphabet: Alphabet
    cutoff: int
    root: Text
    objects: tuple
    _index: dict = field(repr=False)
    _parent: dict = field(repr=False)
    _children: dict = field(repr=False)
    _edge_prob: dict = field(repr=False)
    _dist: dict = field(repr=False)
    _pi_from_root: dict = field(repr=False)

    def __len__(self):
        return len(self.objects)

    def __contains__(self, x: Text):
        return x in self._index

    def index_of(self, x: Text) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise NotInCategory(f"{x} is not an object here") from None

    def _require(self, x: Text) -> Text:
        if x not in self._index:
            raise NotInCategory(f"{x} is not an object here")
        return x

    def children(self, x: Text) -> tuple:
        return self._children.get(self._require(x), ())

    def parent(self, x: Text):
        self._require(x)
        return self._parent.get(x)

    def distribution(self, x: Text) -> NextTokenDistribution:
        """The model pmf attached to an unfinished node below the cutoff."""
        self._require(x)
        try:
            return self._dist[x]
        except KeyError:
            raise NotInCategory(f"{x} carries no next-token distribution") from None

    def has_distribution(self, x: Text) -> bool:
        return x in self._dist

    # -- the enrichment ------------------------------------------------------

    def pi(self, x: Text, y: Text) -> float:
        """Probability that generation from ``x`` passes through ``y``.

        1 on the diagonal, 0 off the prefix order, otherwise the product of
        per-step probabilities along the unique chain from ``x`` to ``y``.
        The product is taken leftmost step first; it is deliberately not
        computed as a ratio of root products, which would divide by tiny
        numbers.
        """
        self._require(x)
        self._require(y)
        if x == y:
            return 1.0
        if not is_prefix(x, y):
            return 0.0
        steps = []
        node = y
        while node != x:
            steps.append(self._edge_prob[node])
            node = self._parent[node]
        prod = 1.0
        for p in reversed(steps):
            prod *= p
        return prod

    def pi_from_root(self, y: Text) -> float:
        return self._pi_from_root[self._require(y)]

    def distance(self, x: Text, y: Text) -> float:
        """Negative log of ``pi``; zero probability maps to ``inf``."""
        p = self.pi(x, y)
        return math.inf if p == 0.0 else -math.log(p)

    # -- terminating states --------------------------------------------------

    def is_terminating(self, x: Text) -> bool:
        self._require(x)
        return x.finished or len(x) == self.cutoff

    def terminating_states(self, x: Text | None = None) -> tuple:
        """Extensions of ``x`` where generation stops, in canonical order.

        Such states are finished texts or unfinished texts at the cutoff;
        they form an antichain in bijection with the model's possible
        outputs for the prompt ``x``.  A terminating ``x`` is its own single
        state.
        """
        x = self.root if x is None else self._require(x)
        if self.is_terminating(x):
            return (x,)
        return tuple(y for y in self.objects
                     if self.is_terminating(y) and is_prefix(x, y))

    def interior_nodes(self) -> tuple:
        """Objects that still generate: unfinished texts below the cutoff."""
        return tuple(y for y in self.objects if not self.is_terminating(y))

    def edges(self) -> tuple:
        """Parent-child pairs with their one-step probability."""
        return tuple((self._parent[y], y, self._edge_prob[y])
                     for y in self.objects if y != self.root)

    def ancestors(self, y: Text) -> tuple:
        """Proper prefixes of ``y`` inside the category, nearest first."""
        self._require(y)
        out = []
        node = y
        while node != self.root:
            node = self._parent[node]
            out.append(node)
        return tuple(out)


def pi_matrix(cat: TextCategory) -> np.ndarray:
    """Dense matrix of chain products in canonical object order.

    Only comparable pairs are nonzero, so the matrix has one entry per
    (ancestor, descendant) pair plus the unit diagonal.
    """
    n = len(cat)
    mat = np.eye(n)
    for y in cat.objects:
        j = cat.index_of(y)
        for x in cat.ancestors(y):
            mat[cat.index_of(x), j] = cat.pi(x, y)
    return mat


def build_category(
    model: ModelSpec,
    root: Text | None = None,
    *,
    object_cap: int = DEFAULT_OBJECT_CAP,
) -> TextCategory:
    """Enumerate the tree under ``root`` (default: the bare BOS text).

    Raises TooLarge before allocating anything if the closed-form object
    count exceeds ``object_cap``; truncating instead would silently change
    every quantity computed downstream.
    """
    if root is None:
        root = make_text([BOS])
    alphabet, cutoff = model.alphabet, model.cutoff
    if len(root) > cutoff:
        raise ValueError(f"root {root} is longer than the cutoff {cutoff}")

    depth = 0 if root.finished else cutoff - len(root)
    expected = extension_object_count(len(alphabet), depth)
    if expected > object_cap:
        raise TooLarge(f"category would have {expected} objects "
                       f"(cap {object_cap})")

    index: dict = {}
    parent: dict = {}
    children: dict = {}
    edge_prob: dict = {}
    dist: dict = {}
    pi_root: dict = {root: 1.0}

    objects = [root]
    frontier = [root]
    while frontier:
        next_frontier = []
        for node in frontier:
            kids = one_token_extensions(node, alphabet, cutoff)
            if not kids:
                continue
            d = model.next_token_distribution(node)
            dist[node] = d
            children[node] = kids
            for kid in kids:
                parent[kid] = node
                p = d.prob(kid.last)
                edge_prob[kid] = p
                pi_root[kid] = pi_root[node] * p
                objects.append(kid)
                next_frontier.append(kid)
        frontier = next_frontier

    objects.sort(key=alphabet.sort_key)
    index = {obj: i for i, obj in enumerate(objects)}
    assert len(objects) == expected

    return TextCategory(
        alphabet=alphabet,
        cutoff=cutoff,
        root=root,
        objects=tuple(objects),
        _index=index,
        _parent=parent,
        _children=children,
        _edge_prob=edge_prob,
        _dist=dist,
        _pi_from_root=pi_root,
    )


@dataclass
class EnrichmentReport:
    """Outcome of the enrichment axioms on a built category.

    Violations are reported, never raised: the point of the check is to
    describe how a broken model breaks, not to stop on the first issue.
    """

    n_objects: int
    pmf_ok: bool
    pmf_max_error: float
    composition_ok: bool
    composition_max_violation: float
    chain_equality_ok: bool
    chain_equality_max_error: float
    triangle_ok: bool

    @property
    def ok(self) -> bool:
        return (self.pmf_ok and self.composition_ok
                and self.chain_equality_ok and self.triangle_ok)


def check_enrichment(
    cat: TextCategory,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EnrichmentReport:
    """Verify the probability and metric axioms on every object triple.

    Checks, with infinity-aware arithmetic throughout:

    * the chain products over each prompt's terminating states sum to 1;
    * ``pi(y|x) * pi(z|y) <= pi(z|x)`` for all triples, with equality on
      chains ``x <= y <= z``;
    * the triangle inequality for ``distance``.

    Step probabilities small enough that a chain product underflows to
    exact zero (below about 1e-154 over two steps) are reported as
    triangle violations: the distances really do leave double precision
    there, and that is worth hearing about.
    """
    objs = cat.objects
    n = len(objs)

    pmf_max = 0.0
    for x in objs:
        if cat.is_terminating(x):
            continue
        total = math.fsum(cat.pi(x, y) for y in cat.terminating_states(x))
        pmf_max = max(pmf_max, abs(total - 1.0))
    pmf_ok = pmf_max <= tolerances.pmf

    pi_mat = pi_matrix(cat)
    with np.errstate(divide="ignore"):
        dist_mat = np.where(pi_mat > 0.0, -np.log(np.where(pi_mat > 0.0, pi_mat, 1.0)),
                            np.inf)

    # pi(y|x) pi(z|y) <= pi(z|x): compare the max-product relaxation row by
    # row, and the triangle inequality as its log-space mirror.
    comp_max = 0.0
    triangle_ok = True
    for i in range(n):
        best = np.max(pi_mat[i][:, None] * pi_mat, axis=0)
        comp_max = max(comp_max, float(np.max(best - pi_mat[i])))
        path = np.min(dist_mat[i][:, None] + dist_mat, axis=0)
        direct = dist_mat[i]
        # a finite detour below an infinite (or longer) direct distance
        # breaks the triangle inequality; inf - tol stays inf
        if np.any(path < direct - tolerances.pmf):
            triangle_ok = False

    # Equality on genuine chains x <= y <= z, enumerated along tree paths.
    chain_max = 0.0
    for z in objs:
        line = (z,) + cat.ancestors(z)
        for yi, y in enumerate(line):
            for x in line[yi:]:
                lhs = cat.pi(x, y) * cat.pi(y, z)
                rhs = cat.pi(x, z)
                chain_max = max(chain_max, abs(lhs - rhs))

    return EnrichmentReport(
        n_objects=n,
        pmf_ok=pmf_ok,
        pmf_max_error=pmf_max,
        composition_ok=comp_max <= tolerances.algebra,
        composition_max_violation=comp_max,
        chain_equality_ok=chain_max <= tolerances.algebra,
        chain_equality_max_error=chain_max,
        triangle_ok=triangle_ok,
    )


def category_dump_rows(cat: TextCategory):
    """Diagnostic per-object rows: text, length, finished, chain product."""
    for obj in cat.objects:
        yield str(obj), len(obj), obj.finished, cat.pi_from_root(obj)
