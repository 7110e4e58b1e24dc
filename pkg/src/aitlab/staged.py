"""Limit-computable functions as stage-indexed evaluators.

A :class:`StagedFunction` is evaluated at a finite stage; its limit value is
only witnessed empirically, by checking that the value stopped changing over
a window of recent stages.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import NamedTuple

from aitlab.bits import numeric_less
from aitlab.enumeration import INFINITE, EnumerationTable, K_approx, omega_prefix, restrict
from aitlab.errors import BadLength
from aitlab.machine import run
from aitlab.measures import ceil_neg_log2, deficiency, image_measure, uniform_n


@dataclass(frozen=True)
class StagedFunction:
    evaluator: Callable[[str, int], str]
    label: str
    description_cost: int = 0

    def __call__(self, x: str, stage: int) -> str:
        return self.evaluator(x, stage)

    def at(self, stage: int) -> Callable[[str], str]:
        """Freeze the stage, giving a plain string function."""
        return lambda x: self.evaluator(x, stage)


@dataclass(frozen=True)
class TotalFunction:
    """A partial recursive function; the empty string stands for undefined."""

    evaluator: Callable[[str], str]
    label: str
    description_cost: int = 0

    def __call__(self, x: str) -> str:
        return self.evaluator(x)

    def at(self, stage: int) -> Callable[[str], str]:
        return self.evaluator


class StagedValue(NamedTuple):
    value: str
    stable: bool


def eval_staged(B: StagedFunction, x: str, max_stage: int, window: int) -> StagedValue:
    """Value at ``max_stage``; stable iff it was constant over the last ``window`` stages."""
    if not max_stage >= window >= 1:
        raise ValueError("need max_stage >= window >= 1")
    value = B(x, max_stage)
    stable = all(B(x, s) == value for s in range(max_stage - window + 1, max_stage))
    return StagedValue(value, stable)


def thm2_B(b: int, c: int, omega_bits_by_stage: Callable[[int], str]) -> StagedFunction:
    """The counterexample map built from a stagewise approximation of Ω's first c bits.

    On strings of length b+c: keep x when its tail is numerically below Ω_c,
    cut it to its first b bits when the tail equals Ω_c, undefined otherwise.
    Undefined on every other length.
    """
    if b < 1 or c < 1:
        raise ValueError("b and c must be at least 1")
    n = b + c

    def evaluate(x: str, stage: int) -> str:
        omega = omega_bits_by_stage(stage)
        if len(omega) != c:
            raise BadLength(f"stage {stage} supplied {len(omega)} omega bits, expected {c}")
        if len(x) != n:
            return ""
        tail = x[b:]
        if tail == omega:
            return x[:b]
        return x if numeric_less(tail, omega) else ""

    cost = 2 * (math.ceil(math.log2(b + 1)) + math.ceil(math.log2(c + 1))) + 2
    return StagedFunction(evaluate, f"thm2[b={b},c={c}]", description_cost=cost)


def omega_stages(table: EnumerationTable, c: int, stages: int) -> Callable[[int], str]:
    """Stage s uses the table restricted to max_steps / 2^(stages - s); the last stage is the table itself."""
    cache: dict[int, str] = {}

    def bits(stage: int) -> str:
        stage = max(0, min(stage, stages))
        if stage not in cache:
            steps = table.budget.max_steps >> (stages - stage)
            cache[stage] = omega_prefix(c, restrict(table, steps)).bits
        return cache[stage]

    return bits


# ---- catalog --------------------------------------------------------------


def _drop_last(x: str) -> str:
    return x[:-1]


def _first_half(x: str) -> str:
    return x[: len(x) // 2]


def _complement(x: str) -> str:
    return x.translate(str.maketrans("01", "10"))


def _machine_output(x: str, stage: int) -> str:
    # output of the reference machine on program x, if it halts within 2^stage steps
    result = run(x, "", 1 << min(stage, 24))
    return result.output if result.halted else ""


TOTAL_FUNCTIONS = {
    f.label: f
    for f in (
        TotalFunction(lambda x: x, "identity", 1),
        TotalFunction(_drop_last, "drop-last-bit", 3),
        TotalFunction(lambda x: "", "constant-bottom", 2),
        TotalFunction(_complement, "complement", 4),
        TotalFunction(lambda x: x[::-1], "reverse", 4),
        TotalFunction(_first_half, "first-half", 5),
    )
}

STAGED_FUNCTIONS = {
    f.label: f
    for f in (
        StagedFunction(_machine_output, "machine-output", 6),
        StagedFunction(lambda x, s: x[: min(len(x), s)], "growing-prefix", 4),
    )
}


def lookup(label: str) -> StagedFunction | TotalFunction:
    if label in TOTAL_FUNCTIONS:
        return TOTAL_FUNCTIONS[label]
    if label in STAGED_FUNCTIONS:
        return STAGED_FUNCTIONS[label]
    raise KeyError(f"unknown function {label!r}; known: {sorted(TOTAL_FUNCTIONS) + sorted(STAGED_FUNCTIONS)}")


# ---- the counterexample end to end ---------------------------------------


def default_slack(b: int, c: int) -> int:
    """2⌈log2(bc)⌉ + 8: the tolerance used for the logarithmic error terms."""
    return 2 * math.ceil(math.log2(b * c)) + 8 if b * c > 1 else 8


@dataclass(frozen=True)
class Thm2Result:
    b: int
    c: int
    omega_bits: str
    converged: bool
    x: str
    bx: str
    bx_stable: bool
    k_x: int
    k_bx: int
    k_x_given_h: int | float
    ceil_neg_log_bp: int
    d_p: int
    d_bp: int
    info_h: int | None
    lost_mass: object
    expected_lost_mass: object
    mass_conserved: bool
    identity_holds: bool
    slack: int
    stage_values: tuple[str, ...]

    @property
    def difference(self) -> int:
        return self.d_bp - self.d_p

    def within(self, measured: int | None, predicted: int) -> bool:
        return measured is not None and abs(measured - predicted) <= self.slack


def thm2_pipeline(
    b: int,
    c: int,
    table: EnumerationTable,
    table_with_h: EnumerationTable | None = None,
    stages: int = 4,
    window: int = 2,
    slack: int | None = None,
) -> Thm2Result:
    """x = 0^b Ω_c under the uniform measure on b+c bits, pushed through thm2_B."""
    if b + c > 20:
        raise ValueError("b + c must be at most 20")
    omega_fn = omega_stages(table, c, stages)
    omega = omega_fn(stages)
    converged = omega_prefix(c, table).converged
    n = b + c
    x = "0" * b + omega
    p = uniform_n(n)
    B = thm2_B(b, c, omega_fn)
    bx, stable = eval_staged(B, x, stages, window)
    image = image_measure(B.at(stages), p)
    above = sum(1 for i in range(1 << c) if numeric_less(omega, format(i, f"0{c}b")))
    expected_lost = p.values[x] * above * (1 << b)
    d_p = deficiency(p, x, table)
    d_bp = deficiency(image, bx, table)
    k_x, k_bx = int(K_approx(x, table)), int(K_approx(bx, table))
    ceil_bp = ceil_neg_log2(image(bx))
    identity = (d_bp - d_p) == (k_x - k_bx) + (ceil_bp - n)
    k_h: int | float = INFINITE
    info = None
    if table_with_h is not None:
        k_h = K_approx(x, table_with_h)
        if k_h != INFINITE:
            info = k_x - int(k_h)
    return Thm2Result(
        b=b,
        c=c,
        omega_bits=omega,
        converged=converged,
        x=x,
        bx=bx,
        bx_stable=stable,
        k_x=k_x,
        k_bx=k_bx,
        k_x_given_h=k_h,
        ceil_neg_log_bp=ceil_bp,
        d_p=d_p,
        d_bp=d_bp,
        info_h=info,
        lost_mass=image.lost_mass,
        expected_lost_mass=expected_lost,
        mass_conserved=image.mass + image.lost_mass == p.mass,
        identity_holds=identity,
        slack=default_slack(b, c) if slack is None else slack,
        stage_values=tuple(omega_fn(s) for s in range(stages + 1)),
    )
