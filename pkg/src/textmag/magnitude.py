"""Zeta matrices, Mobius coefficients, magnitude, and entropies.

Three independent routes to the Mobius coefficients of a text category are
implemented and cross-checked:

* the sparse closed form (unit diagonal, minus the one-step probability
  power on single-token extensions, zero elsewhere);
* numeric inversion of the zeta matrix;
* alternating sums over nondegenerate chains.

The magnitude function itself additionally admits an entropy expression
(scaled Tsallis entropies of the per-node distributions plus the number of
terminating states) and an Euler-characteristic expression through
magnitude homology; all must agree within matrix tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .category import TextCategory, extension_object_count, pi_matrix
from .config import DEFAULT_DENSE_CAP
from .errors import (
    EmptySystem,
    FinishedText,
    NotInCategory,
    OverCutoff,
    TooLargeForDense,
)
from .models import NextTokenDistribution
from .texts import Text, is_prefix, validate_cutoff

MAGNITUDE_METHODS = ("entropy", "mobius", "dense", "euler")

# |t - 1| at or below this uses the exact limit branch of the magnitude
# formula instead of dividing by t - 1.
T_ONE_WINDOW = 1e-9


@dataclass
class SquareIndexedMatrix:
    """Dense real matrix whose rows/columns are labeled by category objects."""

    index: tuple
    values: np.ndarray

    def __post_init__(self):
        n = len(self.index)
        assert self.values.shape == (n, n)
        self._pos = {obj: i for i, obj in enumerate(self.index)}

    def entry(self, x: Text, y: Text) -> float:
        try:
            return float(self.values[self._pos[x], self._pos[y]])
        except KeyError:
            raise NotInCategory(f"{x} or {y} not in the matrix index") from None

    def total(self) -> float:
        return float(self.values.sum())


# -- zeta and Mobius ---------------------------------------------------------

def zeta_matrix(cat: TextCategory, t: float) -> SquareIndexedMatrix:
    """Similarity matrix with entries ``pi(y|x) ** t``.

    Upper triangular with unit diagonal in the canonical object order, since
    that order extends the prefix order.
    """
    _require_positive_t(t)
    values = np.power(pi_matrix(cat), t)
    return SquareIndexedMatrix(index=cat.objects, values=values)


def mobius_closed_form(cat: TextCategory, t: float) -> SquareIndexedMatrix:
    """Inverse of the zeta matrix, written down directly.

    Unit diagonal; ``-pi(y|x) ** t`` when ``y`` extends ``x`` by one token;
    zero everywhere else.
    """
    _require_positive_t(t)
    n = len(cat)
    values = np.eye(n)
    for x in cat.interior_nodes():
        i = cat.index_of(x)
        for child in cat.children(x):
            values[i, cat.index_of(child)] = -cat.pi(x, child) ** t
    return SquareIndexedMatrix(index=cat.objects, values=values)


def mobius_dense_inverse(
    cat: TextCategory,
    t: float,
    *,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> SquareIndexedMatrix:
    """Numeric inverse of the zeta matrix (LU with partial pivoting).

    Serves as the independent oracle for the closed form; capped because a
    dense inverse of a huge category is pointless when the closed form is
    available.
    """
    _require_positive_t(t)
    n = len(cat)
    if n > dense_cap:
        raise TooLargeForDense(f"{n} objects > dense cap {dense_cap}")
    zeta = zeta_matrix(cat, t)
    inv = np.linalg.inv(zeta.values)
    return SquareIndexedMatrix(index=cat.objects, values=inv)


def saturated_chain(cat: TextCategory, x: Text, y: Text) -> tuple:
    """All objects between ``x`` and ``y`` inclusive, in order."""
    if not is_prefix(x, y):
        raise NotInCategory(f"{x} is not a prefix of {y}")
    line = [y]
    node = y
    while node != x:
        node = cat.parent(node)
        if node is None:
            raise NotInCategory(f"{x} is not an ancestor of {y} here")
        line.append(node)
    return tuple(reversed(line))


def mobius_path_sum(
    cat: TextCategory,
    t: float,
    x: Text,
    y: Text,
    *,
    method: str = "enumerate",
) -> float:
    """Alternating sum over nondegenerate chains from ``x`` to ``y``.

    Every chain lives inside the unique saturated chain between the two
    texts, so ``method="enumerate"`` walks its subsets while
    ``method="binomial"`` counts chains of each length with a binomial
    coefficient and weights them all by the same end-to-end power.
    """
    _require_positive_t(t)
    cat.index_of(x), cat.index_of(y)
    if x == y:
        return 1.0
    if not is_prefix(x, y):
        return 0.0
    line = saturated_chain(cat, x, y)
    n = len(line) - 1
    if method == "binomial":
        alternating = sum((-1) ** k * math.comb(n - 1, k - 1)
                          for k in range(1, n + 1))
        return cat.pi(x, y) ** t * alternating
    if method != "enumerate":
        raise ValueError(f"unknown path-sum method {method!r}")
    interior = line[1:-1]
    total = 0.0
    for size in range(len(interior) + 1):
        k = size + 1
        sign = (-1) ** k
        for picked in combinations(interior, size):
            chain = (x,) + picked + (y,)
            weight = 1.0
            for a, b in zip(chain, chain[1:]):
                weight *= cat.pi(a, b) ** t
            total += sign * weight
    return total


# -- entropies ----------------------------------------------------------------

def _masses(p) -> tuple:
    if isinstance(p, NextTokenDistribution):
        return tuple(p.values)
    return tuple(float(v) for v in p)


def tsallis_entropy(p, t: float) -> float:
    """Order-``t`` entropy ``(1 - sum p_i**t) / (t - 1)``; requires t != 1."""
    if t == 1:
        raise ValueError("order-1 limit is the Shannon entropy; call that instead")
    masses = _masses(p)
    return (1.0 - math.fsum(v ** t for v in masses)) / (t - 1.0)


def shannon_entropy(p) -> float:
    """Entropy in nats, with the 0 * log 0 = 0 convention."""
    masses = _masses(p)
    return -math.fsum(v * math.log(v) for v in masses if v > 0.0)


# -- magnitude ----------------------------------------------------------------

def magnitude(cat: TextCategory, t: float, method: str = "entropy") -> float:
    """The magnitude function of the category at scale ``t``.

    ``entropy`` evaluates the closed formula (scaled Tsallis entropies of
    the interior distributions plus the terminating-state count, with the
    exact limit branch at t = 1).  ``mobius`` sums the closed-form inverse
    entries, ``dense`` sums the numeric inverse, and ``euler`` evaluates the
    homology-weighted alternating sum.  All agree within matrix tolerance.
    """
    _require_positive_t(t)
    if method == "entropy":
        n_term = len(cat.terminating_states(cat.root))
        if abs(t - 1.0) <= T_ONE_WINDOW:
            return float(n_term)
        acc = math.fsum(tsallis_entropy(cat.distribution(x), t)
                        for x in cat.interior_nodes())
        return (t - 1.0) * acc + n_term
    if method == "mobius":
        # Sum of the closed-form entries without materializing the matrix:
        # the unit diagonal plus one negative entry per extension edge.
        total = float(len(cat))
        for x in cat.interior_nodes():
            for child in cat.children(x):
                total -= cat.pi(x, child) ** t
        return total
    if method == "dense":
        return mobius_dense_inverse(cat, t).total()
    if method == "euler":
        from .homology import euler_magnitude, homology_ranks
        k_cap = max(cat.cutoff - len(cat.root), 1)
        table = homology_ranks(cat, k_max=k_cap)
        return euler_magnitude(cat, t, table)
    raise ValueError(f"unknown magnitude method {method!r}")


@dataclass(frozen=True)
class CurvePoint:
    t: float
    value: float
    method: str


@dataclass(frozen=True)
class MagnitudeCurve:
    points: tuple

    def values(self) -> tuple:
        return tuple(p.value for p in self.points)


def magnitude_curve(cat: TextCategory, t_grid, method: str = "entropy") -> MagnitudeCurve:
    """Evaluate the magnitude function pointwise on an increasing grid."""
    grid = [float(t) for t in t_grid]
    if not grid:
        raise ValueError("empty t grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t grid must be strictly increasing")
    points = []
    for t in grid:
        value = magnitude(cat, t, method)
        if not math.isfinite(value):
            raise ValueError(f"magnitude is not finite at t={t!r}")
        points.append(CurvePoint(t=t, value=value, method=method))
    return MagnitudeCurve(points=tuple(points))


def magnitude_derivative_at_1(cat: TextCategory) -> float:
    """Slope of the magnitude function at t = 1: summed Shannon entropies."""
    return math.fsum(shannon_entropy(cat.distribution(x))
                     for x in cat.interior_nodes())


def subspace_magnitude(cat: TextCategory, t: float) -> float:
    """Magnitude of a category rooted at an arbitrary prompt.

    Same shape as the full formula, with terminating states and interior
    nodes taken relative to the category's own root; equals the sum of the
    full inverse matrix restricted to the extensions of that root.
    """
    return magnitude(cat, t, method="entropy")


# -- thermodynamic views -------------------------------------------------------

def partition_function(cat: TextCategory, x: Text, t: float) -> float:
    """Sum of ``p**t`` over one node's emission masses (zeros contribute 0)."""
    _require_positive_t(t)
    cat.index_of(x)
    if x.finished:
        raise FinishedText(f"{x} emits no tokens")
    if not cat.has_distribution(x):
        raise OverCutoff(f"{x} is at the cutoff and emits no tokens")
    return math.fsum(v ** t for v in cat.distribution(x).values)


def gibbs_expected_energy(cat: TextCategory, t: float) -> float:
    """Mean step energy under the Gibbs state over all (node, token) pairs.

    Microstates are pairs of an interior node and an emitted token with
    positive mass; the energy of a pair is the negative log of its mass.
    Equals the slope of the magnitude function divided by the partition
    function over those pairs.
    """
    _require_positive_t(t)
    interior = cat.interior_nodes()
    if not interior:
        raise EmptySystem("no interior nodes: nothing is emitted")
    z = 0.0
    num = 0.0
    for x in interior:
        for _, p in cat.distribution(x).items():
            if p <= 0.0:
                continue
            energy = -math.log(p)
            boltz = p ** t
            z += boltz
            num += energy * boltz
    return num / z


def total_partition_function(cat: TextCategory, t: float) -> float:
    """Partition function over all (interior node, emitted token) pairs."""
    _require_positive_t(t)
    return math.fsum(partition_function(cat, x, t)
                     for x in cat.interior_nodes())


# -- the underlying poset ------------------------------------------------------

def poset_mobius(cat: TextCategory, x: Text, y: Text) -> int:
    """Mobius function of the prefix poset, by the standard recursion.

    Exact integer arithmetic; the interval between two comparable texts is
    the saturated chain, so the recursion runs along it.
    """
    cat.index_of(x), cat.index_of(y)
    if x == y:
        return 1
    if not is_prefix(x, y):
        return 0
    line = saturated_chain(cat, x, y)
    values = [1]  # mu(x, x)
    for j in range(1, len(line)):
        values.append(-sum(values))
    return values[-1]


def poset_magnitude(cat: TextCategory) -> int:
    """Sum of all poset Mobius values, in exact integers.

    A rooted tree of texts has an initial object, so this is 1 for every
    alphabet and cutoff.
    """
    total = 0
    for y in cat.objects:
        total += poset_mobius(cat, y, y)
        for x in cat.ancestors(y):
            total += poset_mobius(cat, x, y)
    return total


def count_objects(alphabet_size: int, cutoff: int) -> int:
    """Closed-form object count of the full category at a given cutoff."""
    if alphabet_size < 1:
        raise ValueError("alphabet size must be positive")
    validate_cutoff(cutoff)
    return extension_object_count(alphabet_size, cutoff - 1)


def _require_positive_t(t: float) -> None:
    if not t > 0:
        raise ValueError(f"scale t must be positive, got {t!r}")
