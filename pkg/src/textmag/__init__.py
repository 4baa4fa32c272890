"""Finite text categories from next-token models: magnitude and friends.

Build the tree of texts a probabilistic next-token model can produce under
a length cutoff, then compute its chain probabilities and distances, zeta
matrices and Mobius coefficients, magnitude function and entropies,
magnitude homology, perplexity, and diversity - each quantity with at
least one independent cross-check.
"""

__version__ = "0.1.0"

from .category import (
    EnrichmentReport,
    TextCategory,
    build_category,
    check_enrichment,
    pi_matrix,
)
from .digraph import (
    Connection,
    LinearSubdigraph,
    WeightedDigraph,
    det_via_linear_subdigraphs,
    digraph_of_matrix,
    enumerate_connections,
    enumerate_linear_subdigraphs,
    inverse_entry_via_connections,
)
from .errors import TextmagError
from .homology import (
    HomologyRow,
    HomologyTable,
    bareiss_rank,
    boundary_matrix,
    euler_magnitude,
    generators,
    homology_ranks,
)
from .magnitude import (
    MagnitudeCurve,
    SquareIndexedMatrix,
    count_objects,
    gibbs_expected_energy,
    magnitude,
    magnitude_curve,
    magnitude_derivative_at_1,
    mobius_closed_form,
    mobius_dense_inverse,
    mobius_path_sum,
    partition_function,
    poset_magnitude,
    poset_mobius,
    shannon_entropy,
    subspace_magnitude,
    total_partition_function,
    tsallis_entropy,
    zeta_matrix,
)
from .metrics import diversity, perplexity, terminating_pmf
from .models import (
    ModelSpec,
    NextTokenDistribution,
    dump_model_spec,
    dumps_model_spec,
    load_model_spec,
    loads_model_spec,
    make_distribution,
    ngram_model,
    table_model,
    uniform_model,
)
from .texts import (
    BOS,
    EOS,
    Alphabet,
    Text,
    is_prefix,
    make_text,
    one_token_extensions,
    parse_text_key,
)

__all__ = [name for name in dir() if not name.startswith("_")]
