"""The reference prefix-free machine and its monotone execution mode.

Opcode semantics are documented in ``data/machine_v1.txt``; the version id is
a hash of that file so caches built by different revisions never mix.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from importlib import resources

HALT, OUT0, OUT1, READ, AUX, SKIP, LOOP, NOP = range(8)
OPCODE_NAMES = (
    "halt",
    "output-0",
    "output-1",
    "read-program-bit",
    "read-aux-bit",
    "conditional-skip",
    "loop-back",
    "no-op",
)
_HAS_FIELD = (False, False, False, True, True, False, True, False)
OPCODE_BITS = 3
FIELD_BITS = 3

SPEC_TEXT = resources.files("aitlab").joinpath("data/machine_v1.txt").read_text(encoding="utf-8")
VERSION_ID = hashlib.sha256(SPEC_TEXT.encode("utf-8")).hexdigest()[:8]

# status codes of the inner loop
_HALTED, _EXHAUSTED, _NEED, _LOOPING, _SUSPENDED = range(5)


class Outcome(enum.Enum):
    HALTED = "Halted"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    RAN_OFF_PROGRAM = "RanOffProgram"


@dataclass(frozen=True)
class RunResult:
    outcome: Outcome
    output: str
    bits_consumed: int
    steps: int

    @property
    def halted(self) -> bool:
        return self.outcome is Outcome.HALTED


@dataclass(frozen=True)
class MonotoneRun:
    input_prefix: str
    output_prefix: str
    steps: int


class MachineState:
    """Resumable interpreter state.

    A run that stops for lack of program bits leaves the state exactly as it
    was before the failing read, so it can be cloned and resumed with longer
    programs. Enumeration relies on this to share work between siblings.
    """

    __slots__ = (
        "ops", "args", "targets", "last_nop", "pc", "pos", "r", "oob",
        "head", "out", "counters", "steps", "seen",
    )

    def __init__(self) -> None:
        self.ops: list[int] = []
        self.args: list[int] = []
        self.targets: list[int] = []
        self.last_nop = -1
        self.pc = 0
        self.pos = 0
        self.r = 0
        self.oob = 0
        self.head = 0
        self.out: list[str] = []
        self.counters: dict[int, int] = {}
        self.steps = 0
        self.seen: set | None = None

    def clone(self) -> MachineState:
        c = MachineState.__new__(MachineState)
        c.ops = self.ops[:]
        c.args = self.args[:]
        c.targets = self.targets[:]
        c.last_nop = self.last_nop
        c.pc = self.pc
        c.pos = self.pos
        c.r = self.r
        c.oob = self.oob
        c.head = self.head
        c.out = self.out[:]
        c.counters = dict(self.counters)
        c.steps = self.steps
        # later cycle keys carry a larger program position, old keys never match
        c.seen = None
        return c

    @property
    def output(self) -> str:
        return "".join(self.out)


def _decode_next(st: MachineState, program: str) -> bool:
    """Decode one instruction word at the program head. False if bits are missing."""
    pos = st.pos
    if pos + OPCODE_BITS > len(program):
        return False
    op = int(program[pos : pos + OPCODE_BITS], 2)
    if _HAS_FIELD[op]:
        end = pos + OPCODE_BITS + FIELD_BITS
        if end > len(program):
            return False
        arg = int(program[pos + OPCODE_BITS : end], 2)
    else:
        end = pos + OPCODE_BITS
        arg = 0
    st.ops.append(op)
    st.args.append(arg)
    st.targets.append(st.last_nop + 1)
    if op == NOP:
        st.last_nop = len(st.ops) - 1
    st.pos = end
    return True


def advance(st: MachineState, program: str, aux: str, budget: int, monotone: bool = False) -> int:
    """Run until halt, budget exhaustion, a provable cycle, or a missing program bit."""
    ops, args, targets, out = st.ops, st.args, st.targets, st.out
    counters = st.counters
    n_aux = len(aux)
    while True:
        pc = st.pc
        if pc == len(ops):
            if not _decode_next(st, program):
                return _NEED
        op = ops[pc]
        if op == HALT:
            return _HALTED
        if st.steps >= budget:
            return _EXHAUSTED
        if op == OUT0:
            out.append("1" if st.r else "0")
            st.pc = pc + 1
        elif op == OUT1:
            st.r ^= 1
            out.append("1" if st.r else "0")
            st.pc = pc + 1
        elif op == READ:
            n = args[pc] + 1
            pos = st.pos
            if pos + n > len(program):
                return _NEED
            chunk = program[pos : pos + n]
            out.extend(chunk)
            st.r = 1 if chunk[-1] == "1" else 0
            st.pos = pos + n
            st.pc = pc + 1
        elif op == AUX:
            n = args[pc] + 1
            head = st.head
            if monotone:
                if head + n > n_aux:
                    out.extend(aux[head:])
                    st.head = n_aux
                    st.steps += 1
                    return _SUSPENDED
                chunk = aux[head : head + n]
            elif head + n > n_aux:
                chunk = aux[head:] + "0" * (head + n - max(head, n_aux))
                st.oob = 1
            else:
                chunk = aux[head : head + n]
            out.extend(chunk)
            st.head = head + n
            st.r = 1 if chunk[-1] == "1" else 0
            st.pc = pc + 1
        elif op == SKIP:
            if st.r == 0:
                if pc + 1 == len(ops) and not _decode_next(st, program):
                    return _NEED
                st.pc = pc + 2
            else:
                st.pc = pc + 1
        elif op == LOOP:
            k = args[pc]
            if k == 0:
                if st.oob:
                    st.pc = pc + 1
                else:
                    target = targets[pc]
                    if not monotone:
                        key = (
                            target, st.r, st.pos, min(st.head, n_aux + 1),
                            tuple(sorted(counters.items())),
                        )
                        if st.seen is None:
                            st.seen = set()
                        if key in st.seen:
                            st.steps += 1
                            return _LOOPING
                        st.seen.add(key)
                    st.pc = target
            else:
                left = counters.get(pc)
                if left is None:
                    left = (1 << k) - 1
                if left > 0:
                    counters[pc] = left - 1
                    st.pc = targets[pc]
                else:
                    counters.pop(pc, None)
                    st.pc = pc + 1
        else:  # NOP
            st.pc = pc + 1
        st.steps += 1


def run(program: str, aux: str = "", budget: int = 10_000) -> RunResult:
    """Execute ``program`` with auxiliary tape ``aux`` for at most ``budget`` steps."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    st = MachineState()
    status = advance(st, program, aux, budget)
    if status == _HALTED:
        return RunResult(Outcome.HALTED, st.output, st.pos, st.steps)
    if status == _NEED:
        return RunResult(Outcome.RAN_OFF_PROGRAM, st.output, st.pos, st.steps)
    # a detected cycle would burn the whole budget
    return RunResult(Outcome.BUDGET_EXHAUSTED, st.output, st.pos, budget if status == _LOOPING else st.steps)


def run_monotone(program: str, input_bits: str, budget: int) -> MonotoneRun:
    """Run ``program`` in monotone mode, reading ``input_bits`` in place of aux."""
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    st = MachineState()
    advance(st, program, input_bits, budget, monotone=True)
    return MonotoneRun(input_bits, st.output, st.steps)


def assemble(*words: tuple[str, int] | str) -> str:
    """Build program bits from opcode names, e.g. ``assemble(("loop-back", 3), "halt")``."""
    bits = []
    for word in words:
        name, arg = (word, 0) if isinstance(word, str) else word
        op = OPCODE_NAMES.index(name)
        bits.append(format(op, f"0{OPCODE_BITS}b"))
        if _HAS_FIELD[op]:
            bits.append(format(arg, f"0{FIELD_BITS}b"))
        elif arg:
            raise ValueError(f"{name} takes no field")
    return "".join(bits)


def disassemble(program: str) -> list[tuple[str, int]]:
    """Static decode of a straight-line word sequence (ignores inline data)."""
    words = []
    pos = 0
    while pos + OPCODE_BITS <= len(program):
        op = int(program[pos : pos + OPCODE_BITS], 2)
        pos += OPCODE_BITS
        arg = 0
        if _HAS_FIELD[op]:
            arg = int(program[pos : pos + FIELD_BITS] or "0", 2)
            pos += FIELD_BITS
            if op == READ:
                pos += arg + 1
        words.append((OPCODE_NAMES[op], arg))
    return words


MONOTONE_PROGRAMS = {
    "identity": assemble(("read-aux-bit", 0), ("loop-back", 0)),
    "bit-doubling": assemble(("read-aux-bit", 0), "output-0", ("loop-back", 0)),
    "interleave": assemble(("read-aux-bit", 0), "output-1", ("loop-back", 0)),
}
