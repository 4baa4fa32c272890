"""Next-token distribution extraction from causal LMs."""

__version__ = "0.1.0"

from .extract import (
    BudgetExceeded,
    UnknownToken,
    extract,
    extract_from_pretrained,
    prompt_count,
)

__all__ = [
    "BudgetExceeded",
    "UnknownToken",
    "extract",
    "extract_from_pretrained",
    "prompt_count",
]
