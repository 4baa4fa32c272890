"""The magnitude complex of a text category and its homology ranks.

Degree-``k`` generators are ``(k+1)``-tuples of texts in which every
consecutive pair is distinct and at finite distance; their grade is the
total length of the walk.  Because finite distance means "proper extension
with positive probability", every generator is a strictly increasing chain
inside the saturated chain between its endpoints, so enumeration picks
subsets of that chain instead of scanning tuples.

Ranks are computed over the rationals by fraction-free (Bareiss) integer
elimination - the groups in low degree are free abelian on explicit
generators and rank data is all the Euler-characteristic identity needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .category import TextCategory
from .config import DEFAULT_GENERATOR_CAP, DEFAULT_K_MAX, GRADE_MERGE_TOL
from .errors import IncompleteTable, TooManyGenerators
from .magnitude import saturated_chain


def bareiss_rank(rows) -> int:
    """Rank of an integer matrix by fraction-free elimination (exact)."""
    mat = [list(map(int, row)) for row in rows]
    if not mat or not mat[0]:
        return 0
    n_rows, n_cols = len(mat), len(mat[0])
    rank = 0
    prev = 1
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if mat[i][c] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        for i in range(r + 1, n_rows):
            head = mat[i][c]
            for j in range(c + 1, n_cols):
                mat[i][j] = (mat[i][j] * mat[r][c] - head * mat[r][j]) // prev
            mat[i][c] = 0
        prev = mat[r][c]
        rank += 1
        r += 1
        if r == n_rows:
            break
    return rank


def integer_matmul(a, b):
    """Exact product of two list-of-list integer matrices."""
    if not a or not b:
        return []
    assert len(a[0]) == len(b)
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


@dataclass(frozen=True)
class GradeClass:
    """A merged grade value: representative, spread, and member count."""

    value: float
    width: float
    count: int


class GeneratorGrading:
    """Materialized generators up to a degree, grouped by grade class."""

    def __init__(self, classes, by_degree, counts_by_degree):
        self.classes = tuple(classes)
        self.by_degree = by_degree          # degree -> class idx -> tuple of point-tuples
        self.counts_by_degree = counts_by_degree  # degree -> class idx -> int

    def generators(self, k: int, class_idx: int) -> tuple:
        return self.by_degree.get(k, {}).get(class_idx, ())

    def count(self, k: int, class_idx: int) -> int:
        return self.counts_by_degree.get(k, {}).get(class_idx, 0)

    def class_of(self, ell: float) -> int:
        for idx, cls in enumerate(self.classes):
            if abs(cls.value - ell) <= max(cls.width, GRADE_MERGE_TOL):
                return idx
        raise KeyError(f"no grade class near {ell!r}")


def _merge_grades(values) -> list:
    """Cluster sorted grades, merging neighbors closer than the tolerance."""
    classes = []
    current = []
    for v in sorted(values):
        if current and v - current[-1] > GRADE_MERGE_TOL:
            classes.append(current)
            current = []
        current.append(v)
    if current:
        classes.append(current)
    return classes


def _finite_pairs(cat: TextCategory):
    """Ordered pairs (x, y), x < y, at finite distance, with their grade."""
    for y in cat.objects:
        for x in cat.ancestors(y):
            p = cat.pi(x, y)
            if p > 0.0:
                yield x, y, -math.log(p)


def generators(
    cat: TextCategory,
    k_max: int = DEFAULT_K_MAX,
    *,
    generator_cap: int = DEFAULT_GENERATOR_CAP,
) -> GeneratorGrading:
    """Enumerate generators of degree <= k_max, grouped into grade classes.

    Degrees above ``k_max`` are counted (exactly, via binomial coefficients)
    but not materialized, so completeness of the complex can be checked
    without paying for it.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    pairs = list(_finite_pairs(cat))

    grades = [0.0] + [g for _, _, g in pairs]
    clusters = _merge_grades(grades)
    classes = [GradeClass(value=c[0], width=c[-1] - c[0], count=len(c))
               for c in clusters]

    def class_idx_of(value: float) -> int:
        for idx, cls in enumerate(classes):
            if cls.value - GRADE_MERGE_TOL <= value <= cls.value + cls.width + GRADE_MERGE_TOL:
                return idx
        raise AssertionError("grade escaped its own cluster")

    total = len(cat.objects)
    for x, y, _ in pairs:
        n = len(y) - len(x)
        total += sum(math.comb(n - 1, k - 1) for k in range(1, min(n, k_max) + 1))
    if total > generator_cap:
        raise TooManyGenerators(f"{total} generators exceed cap {generator_cap}")

    by_degree: dict = {0: {}}
    counts: dict = {0: {}}
    zero_idx = class_idx_of(0.0)
    key = cat.alphabet.sort_key
    by_degree[0][zero_idx] = tuple((obj,) for obj in cat.objects)
    counts[0][zero_idx] = len(cat.objects)

    for x, y, grade in pairs:
        idx = class_idx_of(grade)
        line = saturated_chain(cat, x, y)
        interior = line[1:-1]
        n = len(line) - 1
        for k in range(1, n + 1):
            counts.setdefault(k, {})
            counts[k][idx] = counts[k].get(idx, 0) + math.comb(n - 1, k - 1)
            if k > k_max:
                continue
            bucket = by_degree.setdefault(k, {}).setdefault(idx, [])
            for picked in combinations(interior, k - 1):
                bucket.append((x,) + picked + (y,))

    for k, per_class in by_degree.items():
        for idx, gens in per_class.items():
            if isinstance(gens, list):
                gens.sort(key=lambda tup: tuple(key(p) for p in tup))
                per_class[idx] = tuple(gens)

    return GeneratorGrading(classes=classes, by_degree=by_degree,
                            counts_by_degree=counts)


def boundary_matrix(
    cat: TextCategory,
    k: int,
    ell: float,
    *,
    grading: GeneratorGrading | None = None,
) -> list:
    """Matrix of the degree-``k`` boundary on the given grade class.

    Rows index degree ``k - 1`` generators, columns degree ``k``; the first
    and last face maps vanish, and each interior removal keeps the grade
    because distances add exactly along chains (re-checked numerically).
    """
    if k < 1:
        raise ValueError("boundaries start at degree 1")
    if grading is None:
        grading = generators(cat, k_max=k)
    idx = grading.class_of(ell)
    domain = grading.generators(k, idx)
    codomain = grading.generators(k - 1, idx)
    row_of = {points: i for i, points in enumerate(codomain)}
    matrix = [[0] * len(domain) for _ in codomain]
    for col, points in enumerate(domain):
        for i in range(1, k):
            a, b, c = points[i - 1], points[i], points[i + 1]
            gap = (cat.distance(a, b) + cat.distance(b, c)
                   - cat.distance(a, c))
            assert abs(gap) <= 1e-9, f"distances failed to add along {points}"
            face = points[:i] + points[i + 1:]
            matrix[row_of[face]][col] += (-1) ** i
    return matrix


@dataclass(frozen=True)
class HomologyRow:
    k: int
    ell: float
    class_width: float
    rank_chains: int
    rank_homology: int
    truncation_suspect: bool


@dataclass(frozen=True)
class HomologyTable:
    k_max: int
    rows: tuple
    classes: tuple
    chains_above_k_max: int

    @property
    def complete(self) -> bool:
        return self.chains_above_k_max == 0

    def rank(self, k: int, ell: float) -> int:
        for row in self.rows:
            if row.k == k and abs(row.ell - ell) <= max(row.class_width,
                                                        GRADE_MERGE_TOL):
                return row.rank_homology
        return 0


def homology_ranks(
    cat: TextCategory,
    k_max: int = DEFAULT_K_MAX,
    *,
    generator_cap: int = DEFAULT_GENERATOR_CAP,
) -> HomologyTable:
    """Chain and homology ranks for every degree <= k_max and grade class.

    The boundary one degree above ``k_max`` is built too, so the top row is
    exact whenever its generators fit under the cap; otherwise the top row
    is flagged truncation-suspect.
    """
    try:
        grading = generators(cat, k_max=k_max + 1, generator_cap=generator_cap)
        top_built = True
    except TooManyGenerators:
        grading = generators(cat, k_max=k_max, generator_cap=generator_cap)
        top_built = False

    n_classes = len(grading.classes)
    boundary_rank: dict = {}
    top_degree = k_max + 1 if top_built else k_max
    for k in range(1, top_degree + 1):
        for idx in range(n_classes):
            if grading.count(k, idx) == 0:
                continue
            mat = boundary_matrix(cat, k, grading.classes[idx].value,
                                  grading=grading)
            boundary_rank[(k, idx)] = bareiss_rank(mat)

    rows = []
    for k in range(0, k_max + 1):
        for idx, cls in enumerate(grading.classes):
            n_gens = grading.count(k, idx)
            if n_gens == 0:
                continue
            rank_in = boundary_rank.get((k, idx), 0)
            rank_out = boundary_rank.get((k + 1, idx), 0)
            suspect = (k == k_max and not top_built
                       and grading.count(k + 1, idx) > 0)
            rows.append(HomologyRow(
                k=k,
                ell=cls.value,
                class_width=cls.width,
                rank_chains=n_gens,
                rank_homology=n_gens - rank_in - rank_out,
                truncation_suspect=suspect,
            ))

    above = sum(grading.count(k, idx)
                for k in grading.counts_by_degree
                for idx in grading.counts_by_degree[k]
                if k > k_max)
    return HomologyTable(
        k_max=k_max,
        rows=tuple(rows),
        classes=grading.classes,
        chains_above_k_max=above,
    )


def euler_magnitude(cat: TextCategory, t: float, table: HomologyTable) -> float:
    """Magnitude as the grade-weighted alternating sum of homology ranks.

    Requires a complete table: nothing may be hiding above ``k_max``, and
    higher vanishing is never assumed.
    """
    if not t > 0:
        raise ValueError(f"scale t must be positive, got {t!r}")
    if not table.complete:
        raise IncompleteTable(
            f"{table.chains_above_k_max} chain generators above degree "
            f"{table.k_max}; raise k_max"
        )
    total = 0.0
    for row in table.rows:
        total += math.exp(-t * row.ell) * (-1) ** row.k * row.rank_homology
    return total
