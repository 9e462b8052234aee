"""Reaction-span extraction from chemical patents.

Paragraph-level IOB2 tagging over BRAT-annotated patent text, with window
and linear-chain CRF taggers and strict/fuzzy span scoring.
"""

__version__ = "0.1.0"

LABELS = ("B", "I", "O")
