"""Finite-depth Cantor space: tree semi-measures, monotone maps and M-tests.

Every node of a depth-D tree is a bit string of length at most D. Values are
exact rationals; logarithms are reported as integer floors next to the exact
ratio they come from.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from aitlab.bits import canonical_key, from_text, is_prefix, strings_of_length, strings_up_to, to_text
from aitlab.errors import DepthMismatch, HardAssertFailure, ZeroMass
from aitlab.machine import MONOTONE_PROGRAMS, run_monotone
from aitlab.measures import floor_log2
from aitlab.report import ConservationReport

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_DEPTH = 12
MAX_DEPTH = 16
MONOTONE_BUDGET = 1 << 16


def _check_depth(depth: int) -> None:
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must lie in 0..{MAX_DEPTH}")


def nodes(depth: int) -> Iterator[str]:
    """All nodes of the depth-bounded tree, breadth first."""
    return strings_up_to(depth)


@dataclass(frozen=True)
class TreeSemiMeasure:
    depth: int
    values: Mapping[str, Fraction] = field(repr=False)
    label: str = ""
    index: int = 0

    def __call__(self, x: str) -> Fraction:
        return self.values[x]

    def violations(self) -> list[str]:
        """Nodes breaking nonnegativity, P(⊥) ≤ 1 or superadditivity."""
        bad = [x for x in nodes(self.depth) if self.values[x] < 0]
        if self.values[""] > 1:
            bad.append("")
        for x in strings_up_to(self.depth - 1):
            if self.values[x] < self.values[x + "0"] + self.values[x + "1"]:
                bad.append(x)
        return bad

    def is_measure(self) -> bool:
        """Superadditivity holds with equality everywhere and P(⊥) = 1."""
        return self.values[""] == 1 and all(
            self.values[x] == self.values[x + "0"] + self.values[x + "1"] for x in strings_up_to(self.depth - 1)
        )


def tree_from(fn: Callable[[str], Fraction], depth: int, label: str, index: int = 0) -> TreeSemiMeasure:
    _check_depth(depth)
    return TreeSemiMeasure(depth, {x: Fraction(fn(x)) for x in nodes(depth)}, label, index)


def dumps_tree(P: TreeSemiMeasure) -> str:
    lines = [f"# tree depth={P.depth} label={P.label} index={P.index}"]
    lines += [f"{to_text(x)} {P.values[x].numerator} {P.values[x].denominator}" for x in nodes(P.depth)]
    return "\n".join(lines) + "\n"


def loads_tree(text: str) -> TreeSemiMeasure:
    lines = text.splitlines()
    header = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split()[1:])
    values = {}
    for line in lines[1:]:
        node, num, den = line.split()
        values[from_text(node)] = Fraction(int(num), int(den))
    return TreeSemiMeasure(int(header["depth"]), values, header["label"], int(header["index"]))


# ---- measure catalog ------------------------------------------------------


def uniform(depth: int = DEFAULT_DEPTH) -> TreeSemiMeasure:
    return tree_from(lambda x: Fraction(1, 1 << len(x)), depth, "uniform")


def bernoulli(depth: int = DEFAULT_DEPTH, p_one: Fraction = Fraction(1, 4)) -> TreeSemiMeasure:
    def value(x: str) -> Fraction:
        ones = x.count("1")
        return p_one**ones * (1 - p_one) ** (len(x) - ones)

    return tree_from(value, depth, f"bernoulli:{p_one}")


def leaky(depth: int = DEFAULT_DEPTH) -> TreeSemiMeasure:
    """Each child keeps 3/8 of its parent, so a quarter of the mass leaks per level."""
    return tree_from(lambda x: Fraction(3, 8) ** len(x), depth, "leaky")


def concentrated(depth: int = DEFAULT_DEPTH) -> TreeSemiMeasure:
    """Half the mass on the all-zero sequence, half spread uniformly."""

    def value(x: str) -> Fraction:
        atom = Fraction(1, 2) if "1" not in x else ZERO
        return atom + Fraction(1, 2 << len(x))

    return tree_from(value, depth, "concentrated")


MEASURES: dict[str, Callable[[int], TreeSemiMeasure]] = {
    "uniform": uniform,
    "bernoulli": bernoulli,
    "leaky": leaky,
    "concentrated": concentrated,
}


def default_catalog(depth: int = DEFAULT_DEPTH) -> list[TreeSemiMeasure]:
    return [
        TreeSemiMeasure(P.depth, P.values, P.label, i)
        for i, P in enumerate((build(depth) for build in MEASURES.values()), start=1)
    ]


def mixture_M(catalog: list[TreeSemiMeasure]) -> TreeSemiMeasure:
    """M(x) = Σ_i 2^-i P_i(x), with i the 1-based catalog position."""
    if not catalog:
        raise ValueError("empty catalog")
    depth = catalog[0].depth
    if any(P.depth != depth for P in catalog):
        raise DepthMismatch("catalog members disagree on depth")
    weights = [Fraction(1, 1 << i) for i in range(1, len(catalog) + 1)]
    values = {x: sum((w * P.values[x] for w, P in zip(weights, catalog)), ZERO) for x in nodes(depth)}
    return TreeSemiMeasure(depth, values, "mixture[" + ",".join(P.label for P in catalog) + "]")


def dominates(M: TreeSemiMeasure, catalog: list[TreeSemiMeasure]) -> bool:
    """M(x) ≥ 2^-i P_i(x) at every node for every member."""
    return all(
        M.values[x] * (1 << i) >= P.values[x] for i, P in enumerate(catalog, start=1) for x in nodes(M.depth)
    )


# ---- the deficiency D_P as a ratio test -----------------------------------


def deficiency_D(P: TreeSemiMeasure, M: TreeSemiMeasure, x: str) -> tuple[Fraction, int]:
    """max over prefixes y of x of M(y)/P(y), and the floor of its log2."""
    best = None
    for k in range(len(x) + 1):
        y = x[:k]
        if P.values[y] == 0:
            raise ZeroMass(f"{P.label} vanishes at {to_text(y)}")
        r = M.values[y] / P.values[y]
        if best is None or r > best:
            best = r
    return best, floor_log2(best) if best > 0 else None


def exceed_antichain(values: Callable[[str], Fraction], depth: int, threshold: Fraction) -> list[str]:
    """Minimal nodes whose value exceeds ``threshold``; subtrees below a hit are skipped."""
    hits = []
    stack = [""]
    while stack:
        x = stack.pop()
        if values(x) > threshold:
            hits.append(x)
        elif len(x) < depth:
            stack += [x + "1", x + "0"]
    return sorted(hits, key=canonical_key)


@dataclass(frozen=True)
class RatioCheck:
    m: int
    nodes: tuple[str, ...]
    mass: Fraction

    @property
    def passed(self) -> bool:
        return self.mass < Fraction(1, 1 << self.m)


def ratio_test_check(P: TreeSemiMeasure, M: TreeSemiMeasure, depth: int, m: int) -> RatioCheck:
    """P-mass of the region where M/P first exceeds 2^m; a pass needs it below 2^-m.

    The bound is guaranteed when P is a measure; for a semi-measure P the
    check still runs and reports what it finds.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    depth = min(depth, P.depth, M.depth)
    threshold = Fraction(1 << m)

    def ratio(x: str) -> Fraction:
        if P.values[x] == 0:
            raise ZeroMass(f"{P.label} vanishes at {to_text(x)}")
        return M.values[x] / P.values[x]

    hits = exceed_antichain(ratio, depth, threshold)
    return RatioCheck(m, tuple(hits), sum((P.values[x] for x in hits), ZERO))


# ---- elementary tests -----------------------------------------------------


@dataclass(frozen=True)
class ElementaryTest:
    depth: int
    values: Mapping[str, Fraction] = field(repr=False)
    label: str = ""

    def __call__(self, x: str) -> Fraction:
        # deepest stored prefix
        return self.values[x[: self.depth]]

    def is_monotone(self) -> bool:
        return all(
            self.values[x] <= self.values[x + b] for x in strings_up_to(self.depth - 1) for b in "01"
        )

    def scaled(self, c: Fraction, label: str | None = None) -> ElementaryTest:
        return ElementaryTest(self.depth, {x: v / c for x, v in self.values.items()}, label or f"{self.label}/{c}")


@dataclass(frozen=True)
class TestValidation:
    """Per-level masses M({t > 2^m}) with the antichains that carry them."""

    label: str
    levels: tuple[RatioCheck, ...]

    @property
    def passed(self) -> bool:
        return all(level.passed for level in self.levels)


def validate_m_test(t: ElementaryTest, M: TreeSemiMeasure) -> TestValidation:
    """M-mass of {t > 2^m} must stay below 2^-m; checked for every level t can reach."""
    depth = min(t.depth, M.depth)
    top = max(t.values[x] for x in nodes(depth))
    last = floor_log2(top) + 1 if top > 0 else 0
    levels = []
    for m in range(0, max(last, 0) + 1):
        hits = exceed_antichain(t.values.__getitem__, depth, Fraction(1 << m))
        levels.append(RatioCheck(m, tuple(hits), sum((M.values[x] for x in hits), ZERO)))
    return TestValidation(t.label, tuple(levels))


def constant_test(depth: int = DEFAULT_DEPTH, value: Fraction = ONE) -> ElementaryTest:
    return ElementaryTest(depth, {x: Fraction(value) for x in nodes(depth)}, f"constant:{value}")


def ratio_test(Q: TreeSemiMeasure, M: TreeSemiMeasure) -> ElementaryTest:
    """t(x) = max over prefixes of Q/M; an M-test whenever Q(⊥) ≤ 1."""
    values: dict[str, Fraction] = {}
    for x in nodes(Q.depth):
        r = Q.values[x] / M.values[x]
        values[x] = max(r, values[x[:-1]]) if x else r
    return ElementaryTest(Q.depth, values, f"ratio[{Q.label}]")


def zero_prefix_test(M: TreeSemiMeasure, k: int = 4) -> ElementaryTest:
    """Indicator of the cylinder 0^k, scaled to 2^⌊-log2 M(0^k)⌋."""
    height = Fraction(2) ** -floor_log2(M.values["0" * k])
    values = {x: height if len(x) >= k and "1" not in x[:k] else ZERO for x in nodes(M.depth)}
    return ElementaryTest(M.depth, values, f"zero-prefix:{k}")


def default_tests(M: TreeSemiMeasure) -> list[ElementaryTest]:
    return [constant_test(M.depth), ratio_test(concentrated(M.depth), M), zero_prefix_test(M)]


# ---- monotone maps --------------------------------------------------------


class MonotoneMap:
    """A string map with ν(p) ⊑ ν(pq), memoized."""

    def __init__(self, evaluator: Callable[[str], str], label: str, description_cost: int = 0) -> None:
        self.evaluator = evaluator
        self.label = label
        self.description_cost = description_cost
        self._memo: dict[str, str] = {}

    def __call__(self, x: str) -> str:
        y = self._memo.get(x)
        if y is None:
            y = self._memo[x] = self.evaluator(x)
        return y

    def violations(self, depth: int) -> list[str]:
        """Nodes x where ν(x) is not a prefix of ν(x0) or ν(x1)."""
        return [
            x
            for x in strings_up_to(depth - 1)
            if not (is_prefix(self(x), self(x + "0")) and is_prefix(self(x), self(x + "1")))
        ]


def machine_map(name: str) -> MonotoneMap:
    program = MONOTONE_PROGRAMS[name]
    return MonotoneMap(
        lambda x: run_monotone(program, x, MONOTONE_BUDGET).output_prefix, f"machine:{name}", len(program)
    )


def even_bits() -> MonotoneMap:
    return MonotoneMap(lambda x: x[::2], "even-bits", 6)


MAPS: dict[str, Callable[[], MonotoneMap]] = {
    "identity": lambda: machine_map("identity"),
    "bit-doubling": lambda: machine_map("bit-doubling"),
    "interleave": lambda: machine_map("interleave"),
    "even-bits": even_bits,
}


def lookup_map(label: str) -> MonotoneMap:
    if label not in MAPS:
        raise KeyError(f"unknown monotone map {label!r}; known: {sorted(MAPS)}")
    return MAPS[label]()


def inverse_set(nu: MonotoneMap, x: str, depth: int) -> list[str]:
    """{y : |y| ≤ depth, ν(y⁻) ⊏ x ⊑ ν(y)} by depth-first search, pruning incompatible branches."""
    if not x:
        raise ValueError("inverse sets are taken of nonempty strings")
    found = []
    stack = [""]
    while stack:
        y = stack.pop()
        out = nu(y)
        if is_prefix(x, out):
            found.append(y)
        elif is_prefix(out, x) and len(y) < depth:
            stack += [y + "1", y + "0"]
    found.sort(key=canonical_key)
    if any(is_prefix(a, b) and a != b for a in found for b in found):
        raise HardAssertFailure(f"inverse set of {x} under {nu.label} is not prefix-free")
    return found


def image_tree_measure(nu: MonotoneMap, P: TreeSemiMeasure, depth: int | None = None) -> TreeSemiMeasure:
    """μ(x) = Σ_{y ∈ ν⁻¹(x)} P(y), with μ(⊥) = P(⊥).

    One pass over the input tree: y lies in the inverse set of exactly the
    prefixes x of ν(y) that are strictly longer than ν(y⁻).
    """
    depth = P.depth if depth is None else depth
    if depth > P.depth:
        raise DepthMismatch("image depth exceeds the measure's depth")
    mu = {x: ZERO for x in nodes(depth)}
    for y in nodes(depth):
        out = nu(y)
        start = len(nu(y[:-1])) + 1 if y else 1
        for k in range(start, min(len(out), depth) + 1):
            mu[out[:k]] += P.values[y]
    mu[""] = P.values[""]
    return TreeSemiMeasure(depth, mu, f"image[{nu.label}]({P.label})")


def pullback_test(nu: MonotoneMap, t: ElementaryTest, depth: int | None = None) -> ElementaryTest:
    """(Bt)(y) = t at the deepest stored prefix of ν(y)."""
    depth = t.depth if depth is None else depth
    return ElementaryTest(depth, {y: t(nu(y)) for y in nodes(depth)}, f"pullback[{nu.label}]({t.label})")


def catalog_weight(tests: list[ElementaryTest], x: str, offset: int = 0) -> Fraction:
    """Σ 2^-(offset+i) t_i(x) with i the 1-based position."""
    return sum((Fraction(1, 1 << (offset + i)) * t(x) for i, t in enumerate(tests, start=1)), ZERO)


def _log_or_none(q: Fraction) -> int | None:
    return floor_log2(q) if q > 0 else None


def _power_of_two_ceiling(q: Fraction) -> Fraction:
    """Smallest 2^j (j ≥ 0) with 2^j ≥ q."""
    if q <= 1:
        return ONE
    k = floor_log2(q)
    return Fraction(1 << k) if Fraction(1 << k) == q else Fraction(1 << (k + 1))


def _config(depth: int, nu: MonotoneMap, **extra) -> dict[str, object]:
    cfg: dict[str, object] = {"depth": depth, "map": nu.label}
    cfg.update(extra)
    return cfg


def check_ratio(P: TreeSemiMeasure, M: TreeSemiMeasure, depth: int, ms: Iterable[int]) -> ConservationReport:
    report = ConservationReport(
        "continuous-ratio",
        "tree",
        {"depth": depth, "measure": P.label, "mixture": M.label},
        ["m", "bound", "mass", "nodes", "passed"],
    )
    report.summary["measure_is_full"] = P.is_measure()
    for m in ms:
        check = ratio_test_check(P, M, depth, m)
        report.require(f"ratio-test-m={m}", check.passed, check.mass)
        report.rows.append(
            dict(m=m, bound=Fraction(1, 1 << m), mass=check.mass, nodes=tuple(check.nodes), passed=check.passed)
        )
    return report


def check_thm5(
    nu: MonotoneMap,
    tests: list[ElementaryTest],
    M: TreeSemiMeasure,
    depth: int | None = None,
) -> ConservationReport:
    """Pull-back of validated M-tests, calibration by μ ≤ cM, and the re-indexed catalog bound."""
    depth = M.depth if depth is None else depth
    report = ConservationReport(
        "thm5",
        "tree",
        _config(depth, nu, mixture=M.label, tests=tuple(t.label for t in tests)),
        ["x", "nu_x", "W_x", "W_nu_x", "log_W_x", "log_W_nu_x", "difference"],
    )
    bad_map = nu.violations(depth)
    report.require("map-monotone", not bad_map, len(bad_map))
    for t in tests:
        report.require(f"catalog-test-valid[{t.label}]", validate_m_test(t, M).passed)
    mu = image_tree_measure(nu, M, depth)
    bad = mu.violations()
    report.require("image-superadditive", not bad, len(bad))
    ratio = max((mu.values[x] / M.values[x] for x in nodes(depth)), default=ONE)
    c = _power_of_two_ceiling(ratio)
    report.summary.update(max_image_ratio=ratio, calibration_constant=c)
    pulled = [pullback_test(nu, t, depth).scaled(c) for t in tests]
    for bt in pulled:
        report.require(f"pullback-valid[{bt.label}]", bt.is_monotone() and validate_m_test(bt, M).passed)
    # the pulled-back tests sit after the n originals in the extended catalog
    n = len(tests)
    extended = tests + pulled
    reindex_ok = True
    worst = None
    for x in strings_of_length(depth):
        y = nu(x)
        w_x, w_nx = catalog_weight(tests, x), catalog_weight(tests, y)
        reindex_ok &= w_nx <= c * (1 << n) * catalog_weight(extended, x)
        lx, lnx = _log_or_none(w_x), _log_or_none(w_nx)
        diff = None if lx is None or lnx is None else lnx - lx
        if diff is not None and (worst is None or diff > worst):
            worst = diff
        report.rows.append(dict(x=x, nu_x=y, W_x=w_x, W_nu_x=w_nx, log_W_x=lx, log_W_nu_x=lnx, difference=diff))
    report.require("reindexed-catalog-bound", reindex_ok)
    report.summary["max_difference"] = worst
    return report


def thm6_test(nu: MonotoneMap, P: TreeSemiMeasure, M: TreeSemiMeasure, BP: TreeSemiMeasure) -> ElementaryTest:
    """t(x) = max over prefixes z of P(z) M(w) / (M(z) BP(w)), w = ν(z) cut to the tree."""
    depth = P.depth
    values: dict[str, Fraction] = {}
    for z in nodes(depth):
        w = nu(z)[:depth]
        if M.values[z] == 0 or BP.values[w] == 0:
            raise ZeroMass(f"zero denominator at {to_text(z)}")
        r = P.values[z] * M.values[w] / (M.values[z] * BP.values[w])
        values[z] = max(r, values[z[:-1]]) if z else r
    return ElementaryTest(depth, values, f"thm6[{nu.label}]({P.label})")


def check_thm6(
    nu: MonotoneMap,
    P: TreeSemiMeasure,
    M: TreeSemiMeasure,
    tests: list[ElementaryTest] | None = None,
) -> ConservationReport:
    depth = P.depth
    if M.depth != depth:
        raise DepthMismatch("P and M disagree on depth")
    tests = default_tests(M) if tests is None else tests
    report = ConservationReport(
        "thm6",
        "tree",
        _config(depth, nu, measure=P.label, mixture=M.label, tests=tuple(t.label for t in tests)),
        ["x", "nu_x", "D_P", "D_BP", "gap", "I_inf", "excess"],
    )
    BP = image_tree_measure(nu, P, depth)
    report.require("image-superadditive", not BP.violations())
    t = thm6_test(nu, P, M, BP)
    validation = validate_m_test(t, M)
    report.require("thm6-test-valid", validation.passed, max(level.mass for level in validation.levels))
    report.summary["test_max"] = max(t.values.values())
    report.summary["test_identically_one"] = all(v == 1 for v in t.values.values())
    worst = None
    for x in strings_of_length(depth):
        w = nu(x)[:depth]
        _, d_p = deficiency_D(P, M, x)
        _, d_bp = deficiency_D(BP, M, w)
        gap = d_bp - d_p
        i_inf = _log_or_none(catalog_weight(tests, x))
        excess = None if i_inf is None else gap - i_inf
        if excess is not None and (worst is None or excess > worst):
            worst = excess
        report.rows.append(dict(x=x, nu_x=w, D_P=d_p, D_BP=d_bp, gap=gap, I_inf=i_inf, excess=excess))
    report.summary["max_excess"] = worst
    return report
