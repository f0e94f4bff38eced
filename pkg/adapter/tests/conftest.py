"""Shared paths for the adapter tests.

The round-trip tests read the checker's hand-annotated fixtures, so they
locate the sibling checkout those fixtures live in.
"""

from pathlib import Path

ADAPTER_ROOT = Path(__file__).resolve().parents[1]
SAMPLES = ADAPTER_ROOT / "samples"
PRIMARY_FIXTURES = ADAPTER_ROOT.parent / "tests" / "fixtures"
REVIEW_FILE = Path(__file__).resolve().parent / "fixtures" / "golden_diff.txt"
