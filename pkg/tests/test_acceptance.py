"""Acceptance criteria 1-11, one test each.

Every test records a single PASS/FAIL line; the lines are printed in the
terminal summary (see conftest.py) and when this file is run as a script.
"""

from __future__ import annotations

import time
from fractions import Fraction

import pytest

from aitlab import continuous as C
from aitlab.bits import is_proper_prefix, strings_up_to
from aitlab.enumeration import (
    Budget,
    K_approx,
    dumps,
    enumerate_programs,
    enumerate_with_oracle,
    kraft_sum,
    m_approx,
    omega_approx,
    omega_prefix,
    replay_records,
)
from aitlab.harness import check_prop1, check_thm1, check_thm2, check_thm3, check_thm4, default_pairs
from aitlab.machine import run
from aitlab.measures import thm1_test, thm1_validity_sum, uniform_n
from aitlab.staged import STAGED_FUNCTIONS, TOTAL_FUNCTIONS, default_slack, omega_stages, thm2_B

RESULTS: list[str] = []
FULL = Budget(18, 100_000)
LADDER = [Budget(12, 1_000), Budget(14, 10_000), Budget(16, 100_000)]
ORACLE_PREFIX = 64


def record(n: int, passed: bool, detail: str) -> None:
    line = f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)


@pytest.fixture(scope="module")
def full():
    start = time.perf_counter()
    table = enumerate_programs(FULL)
    return table, time.perf_counter() - start


@pytest.fixture(scope="module")
def full_h(full):
    return enumerate_with_oracle(full[0], ORACLE_PREFIX)


@pytest.fixture(scope="module")
def ladder():
    return [enumerate_programs(b) for b in LADDER]


@pytest.fixture(scope="module")
def tree():
    catalog = C.default_catalog(C.DEFAULT_DEPTH)
    return catalog, C.mixture_M(catalog)


def test_criterion_01_prefix_free_domain(full):
    table, seconds = full
    programs = sorted(table.programs)
    prefix_free = not any(is_proper_prefix(a, b) for a, b in zip(programs, programs[1:]))
    kraft = kraft_sum(table)
    passed = prefix_free and kraft <= 1 and seconds < 120
    record(1, passed, f"records={len(table)} kraft={kraft} ({float(kraft):.4f}) prefix_free={prefix_free} time={seconds:.1f}s")
    assert passed


def test_criterion_02_monotone_convergence(ladder):
    ok = True
    omegas = [omega_approx(t) for t in ladder]
    for small, big in zip(ladder, ladder[1:]):
        ok &= all(m_approx(x, small) <= m_approx(x, big) for x in small.outputs)
    ok &= all(a <= b for a, b in zip(omegas, omegas[1:]))
    record(2, ok, "omega ladder " + " <= ".join(f"{float(o):.5f}" for o in omegas))
    assert ok


def test_criterion_03_coding_lemma(full, ladder):
    tables = [*ladder, full[0]]
    checked = 0
    ok = True
    for table in tables:
        for x in table.outputs:
            ok &= m_approx(x, table) >= Fraction(1, 2 ** K_approx(x, table))
            checked += 1
    record(3, ok, f"m >= 2^-K on {checked} (table, output) pairs")
    assert ok


def test_criterion_04_thm1_validity(full):
    table = full[0]
    functions = {**TOTAL_FUNCTIONS, **{k: f.at(16) for k, f in STAGED_FUNCTIONS.items()}}
    worst = Fraction(0)
    ok = True
    pairs = 0
    for n in range(1, 9):
        p = uniform_n(n)
        maps = dict(functions)
        if n >= 2:
            b = n // 2
            maps["thm2"] = thm2_B(b, n - b, omega_stages(table, n - b, 4)).at(4)
        for f in maps.values():
            total = thm1_validity_sum(thm1_test(p, f, table), table)
            ok &= total <= 1
            worst = max(worst, total)
            pairs += 1
    record(4, ok, f"{pairs} (p, B) pairs, max sum m(x)t(x) = {float(worst):.6f}")
    assert ok


def test_criterion_05_calibrated_objects(full, full_h):
    table, with_h = full[0], full_h
    ok = True
    for f in TOTAL_FUNCTIONS.values():
        r3 = check_thm3(f, default_pairs(4), table, with_h)
        r4 = check_thm4(f, strings_up_to(6), table, with_h)
        ok &= r3.ok and r4.ok
        ok &= r3.hard_asserts[0].value == 1 and r4.hard_asserts[0].value == 1
    same3 = check_thm3(TOTAL_FUNCTIONS["identity"], default_pairs(4), table, with_h)
    same4 = check_thm4(TOTAL_FUNCTIONS["identity"], strings_up_to(6), table, with_h)
    zero = all(r["gap"] == 0 for r in same3.rows) and all(r["gap"] == 0 for r in same4.rows)
    ok &= zero and bool(same3.rows) and bool(same4.rows)
    record(
        5,
        ok,
        f"calibrated sums exactly 1 for {len(TOTAL_FUNCTIONS)} functions; identity zero gaps "
        f"({len(same3.rows)} pair rows, {len(same4.rows)} string rows)",
    )
    assert ok


def test_criterion_06_prop1_identity(full, full_h):
    report = check_prop1(strings_up_to(6), full[0], full_h)
    record(6, report.ok, f"{len(report.rows)} strings, gap histogram {report.summary['gap_histogram']}")
    assert report.ok


def test_criterion_07_thm2_consistency(full, full_h):
    table = full[0]
    b, c = 4, 3
    report = check_thm2(b, c, table, full_h)
    converged = omega_prefix(c, table).converged
    diff = next(r["measured"] for r in report.rows if r["quantity"] == "d_Bp(B(x))-d_p(x)")
    slack = default_slack(b, c)
    soft = abs(diff - c) <= slack
    status = "within" if soft else "FLAGGED outside"
    record(
        7,
        report.ok,
        f"mass conserved={report.ok} omega_3={report.summary['omega_bits']} converged={converged} "
        f"difference={diff} {status} {c}+-{slack}",
    )
    assert report.ok


def test_criterion_08_continuous_ratio(tree):
    start = time.perf_counter()
    catalog = C.default_catalog(12)
    M = C.mixture_M(catalog)
    checks = [C.ratio_test_check(catalog[0], M, 12, m) for m in range(1, 7)]
    seconds = time.perf_counter() - start
    ok = all(ch.passed for ch in checks) and seconds < 10
    masses = " ".join(f"m={ch.m}:{ch.mass}" for ch in checks)
    record(8, ok, f"{masses} time={seconds:.2f}s")
    assert ok


def test_criterion_09_thm5_structure(tree):
    catalog, M = tree
    tests = C.default_tests(M)
    ok = True
    for name in C.MAPS:
        nu = C.lookup_map(name)
        for P in [*catalog, M]:
            ok &= not C.image_tree_measure(nu, P).violations()
        report = C.check_thm5(nu, tests, M)
        ok &= report.ok
        if name == "identity":
            ok &= all(r["difference"] == 0 for r in report.rows)
    record(9, ok, f"{len(C.MAPS)} maps x {len(catalog) + 1} measures superadditive; pull-backs revalidate")
    assert ok


def test_criterion_10_thm6_structure(tree):
    catalog, M = tree
    ok = True
    count = 0
    for name in C.MAPS:
        nu = C.lookup_map(name)
        for P in catalog:
            report = C.check_thm6(nu, P, M)
            ok &= report.ok
            if name == "identity":
                ok &= report.summary["test_identically_one"]
            count += 1
    record(10, ok, f"{count} (map, measure) pairs validate; identity gives t = 1")
    assert ok


def _live_K(max_len: int, max_steps: int) -> dict[str, int]:
    best: dict[str, int] = {}
    for n in range(max_len + 1):
        for i in range(1 << n):
            p = format(i, f"0{n}b") if n else ""
            result = run(p, "", max_steps)
            if result.halted and result.bits_consumed == n:
                best.setdefault(result.output, n)
    return best


def test_criterion_11_determinism(tmp_path):
    budget = Budget(16, 10_000)
    serial = dumps(enumerate_programs(budget))
    parallel = dumps(enumerate_programs(budget, workers=4, split_depth=6))
    again = dumps(enumerate_programs(budget, workers=2, split_depth=9))
    caches_equal = serial == parallel == again
    small = enumerate_programs(Budget(14, 1_000))
    h = enumerate_with_oracle(small, ORACLE_PREFIX)
    reports_equal = check_thm2(4, 3, small, h).to_text() == check_thm2(4, 3, small, h).to_text()
    reports_equal &= check_thm1(TOTAL_FUNCTIONS["drop-last-bit"], uniform_n(5), None, small, h).to_tsv() == (
        check_thm1(TOTAL_FUNCTIONS["drop-last-bit"], uniform_n(5), None, small, h).to_tsv()
    )
    live = _live_K(14, 1_000)
    replay = replay_records(dumps(small).splitlines())
    oracle_equal = live == replay
    ok = caches_equal and reports_equal and oracle_equal
    record(11, ok, f"caches identical={caches_equal} reports identical={reports_equal} live K == replay K={oracle_equal} ({len(live)} outputs)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
