"""Exhaustive enumeration of the reference machine's halting domain.

Every quantity here is exact for a given :class:`Budget`: the table holds all
programs of length at most ``max_len`` that halt within ``max_steps`` steps on
the given aux tape, and the complexity, semi-measure, halting-probability and
halting-sequence surrogates are read off it.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

from aitlab import machine
from aitlab.bits import canonical_key, from_text, pair_encode, string_at, to_text
from aitlab.errors import CacheError, ResourceLimit, Undefined
from aitlab.machine import MachineState, advance

INFINITE = math.inf
DEFAULT_RECORD_CAP = 1 << 24
CACHE_MAGIC = "# aitlab-enumeration"


@dataclass(frozen=True)
class Budget:
    max_len: int
    max_steps: int
    aux: str = ""

    def __post_init__(self) -> None:
        if self.max_len < 0 or self.max_steps < 0:
            raise ValueError("budget fields must be nonnegative")

    def describe(self) -> str:
        return f"max_len={self.max_len} max_steps={self.max_steps} aux={to_text(self.aux)}"


@dataclass(frozen=True)
class Record:
    program: str
    output: str
    steps: int


@dataclass(frozen=True)
class EnumerationTable:
    version_id: str
    budget: Budget
    records: tuple[Record, ...] = field(repr=False)

    @cached_property
    def _index(self) -> dict[str, list[int]]:
        """output -> [shortest program length, Σ 2^(max_len - |p|)]"""
        top = self.budget.max_len
        index: dict[str, list[int]] = {}
        for rec in self.records:
            n = len(rec.program)
            entry = index.get(rec.output)
            if entry is None:
                index[rec.output] = [n, 1 << (top - n)]
            else:
                entry[0] = min(entry[0], n)
                entry[1] += 1 << (top - n)
        return index

    @cached_property
    def programs(self) -> frozenset[str]:
        return frozenset(rec.program for rec in self.records)

    @property
    def outputs(self) -> list[str]:
        return sorted(self._index, key=canonical_key)

    def __len__(self) -> int:
        return len(self.records)

    def weight(self, x: str) -> Fraction:
        entry = self._index.get(x)
        return Fraction(entry[1], 1 << self.budget.max_len) if entry else Fraction(0)

    def shortest(self, x: str) -> int | float:
        entry = self._index.get(x)
        return entry[0] if entry else INFINITE


def _explore(state: MachineState, prefix: str, budget: Budget, split_at: int | None = None):
    """Depth-first search over on-demand program reads.

    Returns halting records and, if ``split_at`` is given, the prefixes of
    length ``split_at`` whose subtrees were left unexplored.
    """
    top, limit, aux = budget.max_len, budget.max_steps, budget.aux
    found: list[tuple[str, str, int]] = []
    frontier: list[str] = []
    stack = [(state, prefix)]
    while stack:
        st, p = stack.pop()
        status = advance(st, p, aux, limit)
        if status == machine._HALTED:
            assert st.pos == len(p)
            found.append((p, st.output, st.steps))
        elif status == machine._NEED and len(p) < top:
            if split_at is not None and len(p) == split_at:
                frontier.append(p)
                continue
            stack.append((st.clone(), p + "1"))
            stack.append((st, p + "0"))
    return found, frontier


def _explore_subtree(args: tuple[str, Budget]) -> list[tuple[str, str, int]]:
    prefix, budget = args
    st = MachineState()
    # replaying the prefix reproduces the parked state exactly
    status = advance(st, prefix, budget.aux, budget.max_steps)
    if status != machine._NEED:
        raise RuntimeError(f"frontier prefix {prefix} did not park on a read")
    found, _ = _explore(st, prefix, budget)
    return found


def enumerate_programs(
    budget: Budget, workers: int = 1, record_cap: int = DEFAULT_RECORD_CAP, split_depth: int = 8
) -> EnumerationTable:
    """All programs of length <= max_len halting within max_steps, canonically ordered."""
    if (1 << budget.max_len) > record_cap:
        raise ResourceLimit(
            f"max_len={budget.max_len} admits up to 2^{budget.max_len} records, cap is {record_cap}"
        )
    if workers > 1 and budget.max_len > split_depth:
        found, frontier = _explore(MachineState(), "", budget, split_at=split_depth)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_explore_subtree, [(p, budget) for p in frontier], chunksize=4):
                found.extend(part)
    else:
        found, _ = _explore(MachineState(), "", budget)
    if len(found) > record_cap:
        raise ResourceLimit(f"{len(found)} records exceed cap {record_cap}")
    found.sort(key=lambda r: canonical_key(r[0]))
    return EnumerationTable(machine.VERSION_ID, budget, tuple(Record(*r) for r in found))


def restrict(table: EnumerationTable, max_steps: int) -> EnumerationTable:
    """The table the same enumeration would give with a smaller step budget."""
    if max_steps > table.budget.max_steps:
        raise ValueError("can only restrict to a smaller step budget")
    budget = Budget(table.budget.max_len, max_steps, table.budget.aux)
    return EnumerationTable(table.version_id, budget, tuple(r for r in table.records if r.steps <= max_steps))


def kraft_sum(table: EnumerationTable) -> Fraction:
    top = table.budget.max_len
    return Fraction(sum(1 << (top - len(r.program)) for r in table.records), 1 << top)


def K_approx(x: str, table: EnumerationTable) -> int | float:
    """Length of the shortest program in the table printing ``x``; ``inf`` if none."""
    return table.shortest(x)


def m_approx(x: str, table: EnumerationTable) -> Fraction:
    """Σ 2^-|p| over the table's programs printing ``x``."""
    return table.weight(x)


def omega_approx(table: EnumerationTable) -> Fraction:
    """Lower approximation of the halting probability, excluding empty outputs."""
    return kraft_sum(table) - table.weight("")


class OmegaPrefix(NamedTuple):
    bits: str
    converged: bool


def _leading_bits(q: Fraction, c: int) -> str:
    return format(math.floor(q * (1 << c)), f"0{c}b")


def omega_prefix(c: int, table: EnumerationTable) -> OmegaPrefix:
    """First ``c`` bits of omega_approx, flagged converged when half the step budget agrees."""
    if c < 1:
        raise ValueError("c must be at least 1")
    bits = _leading_bits(omega_approx(table), c)
    half = restrict(table, table.budget.max_steps // 2)
    return OmegaPrefix(bits, _leading_bits(omega_approx(half), c) == bits)


def halting_oracle(table: EnumerationTable, prefix_len: int) -> str:
    """Characteristic bits of the table's domain over all strings in length-lex order."""
    if prefix_len < 0:
        raise ValueError("prefix_len must be nonnegative")
    progs = table.programs
    return "".join("1" if string_at(i) in progs else "0" for i in range(prefix_len))


def enumerate_with_oracle(plain: EnumerationTable, prefix_len: int, workers: int = 1) -> EnumerationTable:
    """Same budget as ``plain``, with its halting-sequence prefix on the aux tape."""
    aux = halting_oracle(plain, prefix_len)
    budget = Budget(plain.budget.max_len, plain.budget.max_steps, aux)
    return enumerate_programs(budget, workers=workers)


def joint_K(x: str, y: str, table: EnumerationTable) -> int | float:
    return K_approx(pair_encode(x, y), table)


def _finite(*values: int | float) -> None:
    if any(v == INFINITE for v in values):
        raise Undefined("a component complexity is infinite at this budget")


def mutual_info(x: str, y: str, table: EnumerationTable) -> int:
    """K(x) + K(y) - K(x, y)."""
    kx, ky, kxy = K_approx(x, table), K_approx(y, table), joint_K(x, y, table)
    _finite(kx, ky, kxy)
    return int(kx + ky - kxy)


def info_with_oracle(x: str, table_plain: EnumerationTable, table_with_h: EnumerationTable) -> int:
    """K(x) - K(x | H_t); may be negative at finite budgets, reported raw."""
    k, kh = K_approx(x, table_plain), K_approx(x, table_with_h)
    _finite(k, kh)
    return int(k - kh)


# ---- cache files ----------------------------------------------------------


def dumps(table: EnumerationTable) -> str:
    b = table.budget
    lines = [
        f"{CACHE_MAGIC} version={table.version_id} max_len={b.max_len} "
        f"max_steps={b.max_steps} aux={to_text(b.aux)} records={len(table.records)}"
    ]
    lines.extend(f"{r.program} {to_text(r.output)} {r.steps}" for r in table.records)
    return "\n".join(lines) + "\n"


def loads(text: str, expect_version: str | None = machine.VERSION_ID) -> EnumerationTable:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CACHE_MAGIC):
        raise CacheError("missing cache header")
    fields = dict(tok.split("=", 1) for tok in lines[0][len(CACHE_MAGIC) :].split())
    try:
        version = fields["version"]
        budget = Budget(int(fields["max_len"]), int(fields["max_steps"]), from_text(fields["aux"]))
        count = int(fields["records"])
    except (KeyError, ValueError) as exc:
        raise CacheError(f"bad cache header: {exc}") from exc
    if expect_version is not None and version != expect_version:
        raise CacheError(f"cache built by machine {version}, current machine is {expect_version}")
    records = []
    for line in lines[1:]:
        prog, out, steps = line.split()
        records.append(Record(prog, from_text(out), int(steps)))
    if len(records) != count:
        raise CacheError(f"header announces {count} records, found {len(records)}")
    return EnumerationTable(version, budget, tuple(records))


def save(table: EnumerationTable, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(table), encoding="ascii")
    return path


def load(path: str | Path) -> EnumerationTable:
    path = Path(path)
    if not path.exists():
        raise CacheError(f"no cache at {path}")
    return loads(path.read_text(encoding="ascii"))


def replay_records(lines: Iterable[str]) -> dict[str, int]:
    """Shortest program length per output, straight from cache record lines."""
    best: dict[str, int] = {}
    for line in lines:
        if line.startswith("#"):
            continue
        prog, out, _ = line.split()
        out = from_text(out)
        best[out] = min(best.get(out, len(prog)), len(prog))
    return best
