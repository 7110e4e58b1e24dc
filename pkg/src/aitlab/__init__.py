"""Resource-bounded algorithmic information theory laboratory.

Exact, budgeted surrogates for prefix complexity, the universal semi-measure,
the halting probability and randomness deficiency, computed against a small
prefix-free reference machine, plus finite-depth checks of randomness
conservation over limit-computable and monotone transformations.
"""

from aitlab.bits import (
    numeric_less,
    pair_encode,
    parse_pair,
    parse_self_delimited,
    self_delimit,
)
from aitlab.enumeration import Budget, EnumerationTable, enumerate_programs
from aitlab.machine import VERSION_ID, Outcome, run, run_monotone

__all__ = [
    "Budget",
    "EnumerationTable",
    "Outcome",
    "VERSION_ID",
    "enumerate_programs",
    "numeric_less",
    "pair_encode",
    "parse_pair",
    "parse_self_delimited",
    "run",
    "run_monotone",
    "self_delimit",
]
