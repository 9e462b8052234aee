"""Categorical token features, each embedded through its own small table."""

import numpy as np

from ..segment import CHEM_TOKEN, TOKEN_KINDS

# (name, number of values)
FEATURES = (
    ("is_chem", 2),
    ("has_digit", 2),
    ("has_unit", 2),
    ("is_punct", 2),
    ("casing", 4),
    ("kind", len(TOKEN_KINDS)),
)
_KIND_INDEX = {k: i for i, k in enumerate(TOKEN_KINDS)}


def casing_class(s: str) -> int:
    letters = [c for c in s if c.isalpha()]
    if not letters or all(c.islower() for c in letters):
        return 0
    if all(c.isupper() for c in letters):
        return 1
    if letters[0].isupper() and all(c.islower() for c in letters[1:]):
        return 2
    return 3


def feature_ids(tokens, chem_flags=None) -> np.ndarray:
    """``(T, len(FEATURES))`` integer matrix of feature values."""
    out = np.zeros((len(tokens), len(FEATURES)), dtype=np.int64)
    for i, tok in enumerate(tokens):
        s = tok.surface
        is_chem = s == CHEM_TOKEN or (chem_flags is not None and chem_flags[i])
        out[i] = (
            int(is_chem),
            int(any(c.isdigit() for c in s)),
            int(tok.kind == "unit"),
            int(tok.kind == "punctuation"),
            casing_class(s),
            _KIND_INDEX[tok.kind],
        )
    return out
