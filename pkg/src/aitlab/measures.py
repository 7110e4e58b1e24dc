"""Discrete semi-measures, image measures, deficiencies and p-tests.

All values are :class:`fractions.Fraction`; logarithms are taken exactly by
comparing against powers of two.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from aitlab.bits import canonical_key, from_text, pair_encode, strings_of_length, to_text
from aitlab.enumeration import INFINITE, EnumerationTable, K_approx, m_approx
from aitlab.errors import NoProgram, ResourceLimit, ZeroDenominator, ZeroMass

ZERO = Fraction(0)
ONE = Fraction(1)
MAX_UNIFORM_LENGTH = 24

StringFunction = Callable[[str], str]


def floor_log2(q: Fraction | int) -> int:
    """Largest k with 2^k <= q, exactly."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of a nonpositive number")
    num, den = q.numerator, q.denominator
    k = num.bit_length() - den.bit_length()
    # now 2^(k-1) < q < 2^(k+1)
    if k >= 0:
        if num < den << k:
            k -= 1
    elif num << -k < den:
        k -= 1
    return k


def ceil_log2(q: Fraction | int) -> int:
    q = Fraction(q)
    k = floor_log2(q)
    return k if Fraction(2) ** k == q else k + 1


def ceil_neg_log2(q: Fraction | int) -> int:
    """⌈-log2 q⌉ for q > 0."""
    return -floor_log2(q)


class UniformSupport(Mapping):
    """Lazy map from every n-bit string to 2^-n."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.value = Fraction(1, 1 << n)

    def __getitem__(self, x: str) -> Fraction:
        if len(x) != self.n or x.strip("01"):
            raise KeyError(x)
        return self.value

    def __iter__(self) -> Iterator[str]:
        return strings_of_length(self.n)

    def __len__(self) -> int:
        return 1 << self.n

    def __contains__(self, x: object) -> bool:
        return isinstance(x, str) and len(x) == self.n and not x.strip("01")


@dataclass(frozen=True)
class DiscreteSemiMeasure:
    """Finite-support semi-measure; mass on the empty string is kept apart."""

    values: Mapping[str, Fraction]
    label: str
    description_cost: int = 0
    lost_mass: Fraction = ZERO
    bottom_mass: Fraction = ZERO

    def __post_init__(self) -> None:
        if "" in self.values:
            raise ValueError("mass on the empty string goes in bottom_mass")

    def __call__(self, x: str) -> Fraction:
        if not x:
            return self.bottom_mass
        return self.values.get(x, ZERO)

    @property
    def support(self) -> Iterable[str]:
        return self.values.keys()

    @property
    def mass(self) -> Fraction:
        if isinstance(self.values, UniformSupport):
            return self.values.value * len(self.values)
        return sum(self.values.values(), ZERO)

    def is_semimeasure(self) -> bool:
        return all(v >= 0 for v in self.values.values()) and self.mass <= 1


def uniform_n(n: int) -> DiscreteSemiMeasure:
    """Uniform measure on strings of length n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > MAX_UNIFORM_LENGTH:
        raise ResourceLimit(f"uniform_n supports n <= {MAX_UNIFORM_LENGTH}")
    return DiscreteSemiMeasure(UniformSupport(n), f"uniform:{n}", description_cost=n.bit_length())


def image_measure(f: StringFunction, p: DiscreteSemiMeasure, label: str | None = None) -> DiscreteSemiMeasure:
    """Push ``p`` forward along ``f``; mass sent to the empty string is recorded as lost."""
    image: dict[str, Fraction] = {}
    lost = ZERO
    for x in p.support:
        y = f(x)
        if y:
            image[y] = image.get(y, ZERO) + p(x)
        else:
            lost += p(x)
    return DiscreteSemiMeasure(image, label or f"image({p.label})", p.description_cost, lost_mass=lost)


def deficiency(p: DiscreteSemiMeasure, x: str, table: EnumerationTable) -> int:
    """⌈-log2 p(x)⌉ - K(x); the empty string has deficiency 0 by convention."""
    if not x:
        return 0
    px = p(x)
    if px == 0:
        raise ZeroMass(f"{p.label} gives {x} no mass")
    k = K_approx(x, table)
    if k == INFINITE:
        raise NoProgram(f"no program for {x} at {table.budget.describe()}")
    return ceil_neg_log2(px) - int(k)


@dataclass(frozen=True)
class DiscreteTest:
    values: Mapping
    label: str
    # entries whose formula had a zero denominator, with the reason
    errors: Mapping = field(default_factory=dict)

    def __call__(self, x) -> Fraction:
        return self.values.get(x, ZERO)


class Verdict(NamedTuple):
    passed: bool
    total: Fraction


def verify_test(p: DiscreteSemiMeasure, t: DiscreteTest, domain: Iterable[str] | None = None) -> Verdict:
    """Σ_{x≠ε} p(x) t(x) over the domain; a test iff the sum is at most 1."""
    total = sum((p(x) * t(x) for x in (p.support if domain is None else domain) if x), ZERO)
    return Verdict(total <= 1, total)


def thm1_test(p: DiscreteSemiMeasure, B: StringFunction, table: EnumerationTable) -> DiscreteTest:
    """t(x) = m(B(x)) p(x) / (m(x) Bp(B(x))), zero where B is undefined."""
    image = image_measure(B, p)
    values: dict[str, Fraction] = {}
    errors: dict[str, str] = {}
    for x in p.support:
        y = B(x)
        if not y:
            values[x] = ZERO
            continue
        mx, bpy = m_approx(x, table), image(y)
        if mx == 0 or bpy == 0:
            errors[x] = "m(x)=0" if mx == 0 else "Bp(B(x))=0"
            continue
        values[x] = m_approx(y, table) * p(x) / (mx * bpy)
    return DiscreteTest(values, f"thm1[{p.label}]", errors)


def thm1_validity_sum(t: DiscreteTest, table: EnumerationTable) -> Fraction:
    """Σ_x m(x) t(x): the stage-level telescoping sum, never above Σ_y m(y)."""
    return sum((m_approx(x, table) * v for x, v in t.values.items()), ZERO)


@dataclass(frozen=True)
class Calibrated:
    """A table scaled by ``constant`` so its weighted sum over the domain is 1."""

    values: Mapping
    uncalibrated: Mapping
    constant: Fraction
    weighted_sum: Fraction
    excluded: Mapping  # domain entries dropped for a zero denominator


def thm3_test(
    B: StringFunction, pairs: Iterable[tuple[str, str]], table: EnumerationTable
) -> Calibrated:
    """Pair test c·m(B(x),y) m(x) / (m(x,y) m(B(x))) calibrated against m(x,y).

    An image equal to the empty string is evaluated through m of the empty
    string like any other output.
    """
    raw: dict[tuple[str, str], Fraction] = {}
    weights: dict[tuple[str, str], Fraction] = {}
    excluded: dict[tuple[str, str], str] = {}
    for x, y in pairs:
        bx = B(x)
        mxy = m_approx(pair_encode(x, y), table)
        if mxy == 0:
            excluded[(x, y)] = "m(x,y)=0"
            continue
        mbx = m_approx(bx, table)
        if mbx == 0:
            excluded[(x, y)] = "m(B(x))=0"
            continue
        raw[(x, y)] = m_approx(pair_encode(bx, y), table) * m_approx(x, table) / (mxy * mbx)
        weights[(x, y)] = mxy
    total = sum((weights[k] * v for k, v in raw.items()), ZERO)
    if total == 0:
        raise ZeroDenominator("uncalibrated pair test vanishes on the whole domain")
    c = 1 / total
    values = {k: c * v for k, v in raw.items()}
    weighted = sum((weights[k] * v for k, v in values.items()), ZERO)
    return Calibrated(values, raw, c, weighted, excluded)


def thm4_semimeasure(
    f: StringFunction, domain: Iterable[str], table_plain: EnumerationTable, table_with_h: EnumerationTable
) -> Calibrated:
    """s(x) = c·m(f(x)|H) m(x) / m(f(x)), calibrated to total 1 over the domain."""
    raw: dict[str, Fraction] = {}
    excluded: dict[str, str] = {}
    for x in domain:
        fx = f(x)
        mfx = m_approx(fx, table_plain)
        if mfx == 0:
            excluded[x] = "m(f(x))=0"
            continue
        raw[x] = m_approx(fx, table_with_h) * m_approx(x, table_plain) / mfx
    total = sum(raw.values(), ZERO)
    if total == 0:
        raise ZeroDenominator("uncalibrated semi-measure vanishes on the whole domain")
    c = 1 / total
    values = {k: c * v for k, v in raw.items()}
    return Calibrated(values, raw, c, sum(values.values(), ZERO), excluded)


# ---- text serialization ---------------------------------------------------


def dumps_values(values: Mapping[str, Fraction]) -> str:
    """One ``string numerator denominator`` line per entry, canonical order."""
    keys = sorted(values, key=canonical_key)
    return "".join(f"{to_text(k)} {values[k].numerator} {values[k].denominator}\n" for k in keys)


def loads_values(text: str) -> dict[str, Fraction]:
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, num, den = line.split()
        out[from_text(key)] = Fraction(int(num), int(den))
    return out
