"""Command-line driver.

Subcommands build categories from interchange model files, print CSV tables
(magnitude curves, homology ranks, per-node entropies), compute scalar
metrics, run the digraph oracles, and run the full verification battery.
Output is deterministic: fixed object ordering, 12-significant-digit float
formatting, and a fixed default seed for any sampled check.
"""

from __future__ import annotations

import argparse
import math
import random
import sys

import numpy as np

from . import __version__
from .category import (
    TextCategory,
    build_category,
    category_dump_rows,
    check_enrichment,
)
from .config import DEFAULT_K_MAX
from .digraph import (
    det_via_linear_subdigraphs,
    digraph_of_matrix,
    inverse_entry_via_connections,
    parse_digraph_text,
)
from .errors import TextmagError, TooLargeForDense, TooManyGenerators
from .homology import (
    boundary_matrix,
    euler_magnitude,
    generators,
    homology_ranks,
    integer_matmul,
)
from .magnitude import (
    count_objects,
    magnitude,
    magnitude_curve,
    magnitude_derivative_at_1,
    mobius_closed_form,
    mobius_dense_inverse,
    mobius_path_sum,
    poset_magnitude,
    shannon_entropy,
    total_partition_function,
    tsallis_entropy,
    gibbs_expected_energy,
    zeta_matrix,
)
from .metrics import diversity, perplexity, terminating_pmf
from .models import load_model_spec
from .texts import Text, parse_text_key

VERIFY_T_GRID = (0.3, 0.7, 1.0, 1.5, 2.0, 5.0)


def fmt(value: float) -> str:
    """12-significant-digit, locale-independent float formatting."""
    if value != value:
        return "nan"
    if value == math.inf:
        return "inf"
    if value == -math.inf:
        return "-inf"
    return f"{value:.12g}"


def _parse_prompt(raw: str | None) -> Text | None:
    return None if raw is None else parse_text_key(raw)


# -- subcommands ---------------------------------------------------------------


def cmd_build(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model, _parse_prompt(args.prompt))
    if args.dump:
        print("text,length,finished,pi_from_root")
        for text, length, finished, p in category_dump_rows(cat):
            print(f"{text},{length},{str(finished).lower()},{fmt(p)}")
        return 0
    terminating = cat.terminating_states(cat.root)
    expected = count_objects(len(model.alphabet), model.cutoff) \
        if len(cat.root) == 1 else len(cat)
    print(f"objects,{len(cat)}")
    print(f"edges,{len(cat.edges())}")
    print(f"terminating,{len(terminating)}")
    print(f"interior,{len(cat.interior_nodes())}")
    print(f"expected_objects,{expected}")
    return 0


def cmd_magnitude(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model, _parse_prompt(args.prompt))
    if args.steps < 1:
        print("error: --steps must be >= 1", file=sys.stderr)
        return 2
    if args.steps == 1:
        if args.t_min != args.t_max:
            print("error: --steps 1 needs --t-min == --t-max", file=sys.stderr)
            return 2
        grid = [args.t_min]
    else:
        grid = list(np.linspace(args.t_min, args.t_max, args.steps))
    methods = ("entropy", "mobius", "dense", "euler") if args.method == "all" \
        else (args.method,)

    columns = {}
    for method in methods:
        try:
            columns[method] = magnitude_curve(cat, grid, method).values()
        except (TooLargeForDense, TooManyGenerators) as exc:
            if args.method != "all":
                print(f"error: {exc}", file=sys.stderr)
                return 2
            columns[method] = None

    lines = ["t,f_entropy,f_mobius,f_dense,f_euler"]
    for i, t in enumerate(grid):
        cells = [fmt(t)]
        for method in ("entropy", "mobius", "dense", "euler"):
            col = columns.get(method)
            cells.append(fmt(col[i]) if col is not None else "")
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_homology(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model, _parse_prompt(args.prompt))
    table = homology_ranks(cat, k_max=args.k_max)
    print("k,ell,rank_MC,rank_H")
    for row in sorted(table.rows, key=lambda r: (r.k, r.ell)):
        print(f"{row.k},{fmt(row.ell)},{row.rank_chains},{row.rank_homology}")
    return 0


def cmd_entropy(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model, _parse_prompt(args.prompt))
    print("text,shannon,tsallis")
    for node in cat.interior_nodes():
        dist = cat.distribution(node)
        ts = tsallis_entropy(dist, args.t) if args.t != 1 \
            else shannon_entropy(dist)
        print(f"{node},{fmt(shannon_entropy(dist))},{fmt(ts)}")
    print(f"f_prime_1,{fmt(magnitude_derivative_at_1(cat))}")
    return 0


def cmd_perplexity(args) -> int:
    model = load_model_spec(args.model)
    text = parse_text_key(args.text)
    print(fmt(perplexity(model, text)))
    return 0


def cmd_diversity(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model, _parse_prompt(args.prompt))
    pmf = terminating_pmf(cat)
    print(fmt(diversity(cat, pmf, args.t)))
    return 0


def cmd_digraph(args) -> int:
    with open(args.edges, "r", encoding="utf-8") as fh:
        digraph = parse_digraph_text(fh.read())
    det = det_via_linear_subdigraphs(digraph)
    print(f"det,{fmt(det)}")
    if args.invert:
        v, w = args.invert
        entry = inverse_entry_via_connections(digraph, v, w, _det=det)
        print(f"inverse,{fmt(entry)}")
    return 0


# -- verify ---------------------------------------------------------------------


class Verifier:
    def __init__(self):
        self.failures = 0

    def check(self, name: str, ok: bool, detail: str = ""):
        status = "PASS" if ok else "FAIL"
        if not ok:
            self.failures += 1
        suffix = f" {detail}" if detail else ""
        print(f"{status} {name}{suffix}")


def _verify_category(v: Verifier, cat: TextCategory, deep: bool,
                     rng: random.Random) -> None:
    n = len(cat)
    full_root = len(cat.root) == 1
    pair_cap = 20000 if deep else 4000
    digraph_cap = 12 if deep else 10

    if full_root:
        expected = count_objects(len(cat.alphabet), cat.cutoff)
        v.check("object_count", n == expected, f"objects={n} expected={expected}")

    report = check_enrichment(cat)
    v.check("pmf_on_terminating_states", report.pmf_ok,
            f"max|sum-1|={report.pmf_max_error:.3e}")
    v.check("composition_inequality", report.composition_ok,
            f"max_violation={report.composition_max_violation:.3e}")
    v.check("chain_equality", report.chain_equality_ok,
            f"max_err={report.chain_equality_max_error:.3e}")
    v.check("triangle_inequality", report.triangle_ok)

    v.check("poset_magnitude", poset_magnitude(cat) == 1)

    # Mobius routes against each other.
    max_dev = 0.0
    for t in VERIFY_T_GRID:
        closed = mobius_closed_form(cat, t)
        dense = mobius_dense_inverse(cat, t)
        max_dev = max(max_dev, float(np.max(np.abs(closed.values - dense.values))))
    v.check("mobius_closed_vs_dense", max_dev < 1e-8, f"max_abs_dev={max_dev:.3e}")

    pairs = [(x, y) for y in cat.objects for x in cat.objects]
    if len(pairs) > pair_cap:
        pairs = rng.sample(pairs, pair_cap)
    path_dev = 0.0
    for t in (0.7, 1.0, 2.0):
        closed = mobius_closed_form(cat, t)
        for x, y in pairs:
            path_dev = max(path_dev, abs(
                mobius_path_sum(cat, t, x, y) - closed.entry(x, y)))
    v.check("mobius_path_sum", path_dev < 1e-8, f"max_abs_dev={path_dev:.3e}")

    # Magnitude methods.
    mag_dev = 0.0
    for t in VERIFY_T_GRID:
        values = [magnitude(cat, t, m) for m in ("entropy", "mobius", "dense",
                                                 "euler")]
        mag_dev = max(mag_dev, max(values) - min(values))
    v.check("magnitude_methods", mag_dev < 1e-8, f"max_spread={mag_dev:.3e}")

    f1 = magnitude(cat, 1.0, "entropy")
    n_term = len(cat.terminating_states(cat.root))
    v.check("magnitude_at_1", f1 == float(n_term), f"f(1)={fmt(f1)} #T={n_term}")

    h = 1e-4
    fd = (magnitude(cat, 1 + h, "entropy") - magnitude(cat, 1 - h, "entropy")) / (2 * h)
    slope = magnitude_derivative_at_1(cat)
    v.check("derivative_at_1", abs(fd - slope) < 1e-5,
            f"fd={fmt(fd)} entropy_sum={fmt(slope)}")

    if cat.interior_nodes():
        t0 = 1.3
        z = total_partition_function(cat, t0)
        zfd = -(total_partition_function(cat, t0 + h)
                - total_partition_function(cat, t0 - h)) / (2 * h)
        gibbs = gibbs_expected_energy(cat, t0)
        v.check("gibbs_identity", abs(gibbs * z - zfd) < 1e-4,
                f"E*Z={fmt(gibbs * z)} -dZ/dt={fmt(zfd)}")

    # Homology.
    k_cap = max(cat.cutoff - len(cat.root), 1)
    table = homology_ranks(cat, k_max=k_cap)
    h00 = table.rank(0, 0.0)
    v.check("homology_h0", h00 == n and all(
        row.rank_homology == 0 for row in table.rows
        if row.k == 0 and row.ell > 1e-9), f"rank_H00={h00}")

    ext_by_class: dict = {}
    for x in cat.interior_nodes():
        for child in cat.children(x):
            p = cat.pi(x, child)
            if p > 0.0:
                ell = -math.log(p)
                for cls_idx, cls in enumerate(table.classes):
                    if cls.value - 1e-9 <= ell <= cls.value + cls.width + 1e-9:
                        ext_by_class[cls_idx] = ext_by_class.get(cls_idx, 0) + 1
                        break
    h1_ok = True
    for idx, cls in enumerate(table.classes):
        expected = ext_by_class.get(idx, 0)
        got = table.rank(1, cls.value)
        if got != expected:
            h1_ok = False
    v.check("homology_h1_extension_counts", h1_ok)

    higher = [row for row in table.rows if row.k >= 2]
    v.check("homology_higher_vanishing",
            all(row.rank_homology == 0 for row in higher),
            f"rows_k_ge_2={len(higher)}")

    grading = generators(cat, k_max=k_cap + 1)
    dd_ok = True
    for k in range(2, k_cap + 2):
        for idx, cls in enumerate(grading.classes):
            if grading.count(k, idx) == 0:
                continue
            outer = boundary_matrix(cat, k - 1, cls.value, grading=grading) \
                if grading.count(k - 1, idx) else []
            inner = boundary_matrix(cat, k, cls.value, grading=grading)
            if outer and inner:
                prod = integer_matmul(outer, inner)
                if any(any(entry != 0 for entry in row) for row in prod):
                    dd_ok = False
    v.check("boundary_squares_to_zero", dd_ok)

    euler_dev = 0.0
    for t in (0.5, 1.0, 2.0):
        euler_dev = max(euler_dev, abs(
            euler_magnitude(cat, t, table) - magnitude(cat, t, "entropy")))
    v.check("euler_identity", euler_dev < 1e-8, f"max_abs_dev={euler_dev:.3e}")

    # Digraph oracle on small categories.
    if n <= digraph_cap:
        digraph_dev = 0.0
        det_ok = True
        for t in (1.0, 2.0):
            dg = digraph_of_matrix(zeta_matrix(cat, t))
            det = det_via_linear_subdigraphs(dg)
            if abs(det - 1.0) > 1e-9:
                det_ok = False
            closed = mobius_closed_form(cat, t)
            for x in cat.objects:
                for y in cat.objects:
                    entry = inverse_entry_via_connections(dg, x, y, _det=det)
                    digraph_dev = max(digraph_dev,
                                      abs(entry - closed.entry(x, y)))
        v.check("digraph_det_is_one", det_ok)
        v.check("digraph_inverse_entries", digraph_dev < 1e-9,
                f"max_abs_dev={digraph_dev:.3e}")

    # Subspace restriction.
    sub_dev = 0.0
    for t in (0.7, 1.3):
        dense = mobius_dense_inverse(cat, t)
        for length in range(1, cat.cutoff + 1):
            prompt = next((o for o in cat.objects if len(o) == length), None)
            if prompt is None:
                continue
            block = [cat.index_of(o) for o in cat.objects
                     if o.tokens[:len(prompt)] == prompt.tokens]
            restricted = float(dense.values[np.ix_(block, block)].sum())
            sub = _rebuild_subcategory_magnitude(cat, prompt, t)
            sub_dev = max(sub_dev, abs(restricted - sub))
    v.check("subspace_restriction", sub_dev < 1e-8, f"max_abs_dev={sub_dev:.3e}")

    # Diversity collapse on the terminating pmf.
    pmf = terminating_pmf(cat)
    div_dev = abs(diversity(cat, pmf, 1.0) - shannon_entropy(pmf.values()))
    v.check("diversity_entropy_collapse", div_dev < 1e-9,
            f"abs_dev={div_dev:.3e}")


def _rebuild_subcategory_magnitude(cat: TextCategory, prompt: Text,
                                   t: float) -> float:
    sub_objects = [o for o in cat.objects
                   if o.tokens[:len(prompt)] == prompt.tokens]
    n_term = sum(1 for o in sub_objects if cat.is_terminating(o))
    if abs(t - 1.0) <= 1e-9:
        return float(n_term)
    acc = math.fsum(tsallis_entropy(cat.distribution(o), t)
                    for o in sub_objects if not cat.is_terminating(o))
    return (t - 1.0) * acc + n_term


def cmd_verify(args) -> int:
    model = load_model_spec(args.model)
    cat = build_category(model)
    v = Verifier()
    rng = random.Random(args.seed)
    _verify_category(v, cat, args.deep, rng)

    # Perplexity identity along positive-probability terminating states
    # that involve at least one generated token.
    dev = 0.0
    states = [y for y in cat.terminating_states(cat.root)
              if len(y) > 1 and cat.pi(cat.root, y) > 0.0]
    for y in states[:50]:
        n_steps = len(y) - 1
        ppl = perplexity(model, y)
        zeta = zeta_matrix(cat, 1.0 / n_steps)
        dev = max(dev, abs(ppl * zeta.entry(cat.root, y) - 1.0))
    v.check("perplexity_zeta_identity", dev < 1e-10,
            f"states={len(states[:50])} max_abs_dev={dev:.3e}")

    print(f"checks_failed,{v.failures}")
    return 1 if v.failures else 0


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textmag",
        description="Magnitude, Mobius coefficients, entropies, homology, "
                    "perplexity, and diversity of finite text categories.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="category statistics or per-object dump")
    p.add_argument("--model", required=True)
    p.add_argument("--prompt")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run the full invariant battery")
    p.add_argument("--model", required=True)
    p.add_argument("--deep", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("magnitude", help="magnitude curve CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--t-min", type=float, required=True, dest="t_min")
    p.add_argument("--t-max", type=float, required=True, dest="t_max")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--method", default="all",
                   choices=("all", "entropy", "mobius", "dense", "euler"))
    p.add_argument("--prompt")
    p.add_argument("--out")
    p.set_defaults(func=cmd_magnitude)

    p = sub.add_parser("homology", help="homology rank CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX, dest="k_max")
    p.add_argument("--prompt")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("entropy", help="per-node entropy table and f'(1)")
    p.add_argument("--model", required=True)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--prompt")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("perplexity", help="perplexity of a text under the model")
    p.add_argument("--model", required=True)
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("diversity", help="diversity of the terminating pmf")
    p.add_argument("--model", required=True)
    p.add_argument("--prompt")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("digraph", help="determinant / inverse entry by enumeration")
    p.add_argument("--edges", required=True)
    p.add_argument("--invert", nargs=2, metavar=("V", "W"))
    p.set_defaults(func=cmd_digraph)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TextmagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
