"""Command-line entry point for the extractor."""

from __future__ import annotations

import argparse
import sys

from .extract import (
    DEFAULT_CALL_BUDGET,
    BudgetExceeded,
    UnknownToken,
    extract_from_pretrained,
    prompt_count,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lmextract",
        description="Dump restricted next-token distributions from a causal "
                    "LM into the textmag model interchange format.",
    )
    parser.add_argument("--model-id", required=True,
                        help="Hugging Face model id or local checkpoint path")
    parser.add_argument("--alphabet", nargs="+", required=True,
                        help="vocabulary token strings to keep")
    parser.add_argument("--cutoff", type=int, required=True,
                        help="maximum text length (includes the BOS marker)")
    parser.add_argument("--out", required=True)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--budget", type=int, default=DEFAULT_CALL_BUDGET)
    args = parser.parse_args(argv)

    try:
        doc = extract_from_pretrained(
            args.model_id, args.alphabet, args.cutoff, args.out,
            budget=args.budget, device=args.device,
        )
    except (UnknownToken, BudgetExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    nodes = len(doc["model"]["nodes"])
    calls = prompt_count(len(args.alphabet), args.cutoff)
    print(f"wrote {args.out}: {nodes} nodes, {calls} forward passes")
    return 0


if __name__ == "__main__":
    sys.exit(main())
