"""Central numerical tolerances.

All comparison thresholds used by the package live in one record so tests
and the CLI agree on what "equal" means at each level of the stack:

* ``pmf``     -- probability mass functions summing to one,
* ``algebra`` -- exact algebraic identities up to float rounding,
* ``matrix``  -- agreement between independent matrix computations.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    pmf: float = 1e-9
    algebra: float = 1e-12
    matrix: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()

# Guard rails for enumerative code paths.
DEFAULT_OBJECT_CAP = 2_000_000
DEFAULT_DENSE_CAP = 2_000
DEFAULT_VERTEX_CAP = 12
DEFAULT_GENERATOR_CAP = 200_000
DEFAULT_K_MAX = 4

# Width used when merging real-valued length grades into classes.
GRADE_MERGE_TOL = 1e-9
