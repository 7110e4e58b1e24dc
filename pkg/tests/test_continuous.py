from fractions import Fraction
from itertools import product

import oracle
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aitlab import continuous as C
from aitlab.bits import is_prefix, strings_of_length, strings_up_to
from aitlab.errors import DepthMismatch, ZeroMass

CAT12 = C.default_catalog(12)
MIX12 = C.mixture_M(CAT12)


@pytest.fixture(scope="module")
def cat12():
    return CAT12


@pytest.fixture(scope="module")
def M12():
    return MIX12


def _direct_M(x):
    u = Fraction(1, 2 ** len(x))
    ones = x.count("1")
    bern = Fraction(1, 4) ** ones * Fraction(3, 4) ** (len(x) - ones)
    leak = Fraction(3, 8) ** len(x)
    conc = (Fraction(1, 2) if "1" not in x else 0) + u / 2
    return u / 2 + bern / 4 + leak / 8 + conc / 16


def test_catalog_invariants(cat12):
    for P in cat12:
        assert not P.violations(), P.label
    assert [P.index for P in cat12] == [1, 2, 3, 4]
    assert cat12[0].is_measure() and not cat12[2].is_measure()


def test_mixture_node_values(M12):
    assert M12("") == Fraction(15, 16)
    assert M12("0") == Fraction(17, 32)
    assert M12("00000000") == Fraction(7838625, 134217728)
    assert M12("01010101") == Fraction(326561, 134217728)
    for x in strings_up_to(8):
        assert M12(x) == _direct_M(x)
    assert not M12.violations()


def test_mixture_singleton_and_depth_mismatch():
    P = C.uniform(4)
    assert C.mixture_M([P]).values == {x: v / 2 for x, v in P.values.items()}
    with pytest.raises(DepthMismatch):
        C.mixture_M([C.uniform(3), C.uniform(4)])


def test_domination(cat12, M12):
    assert C.dominates(M12, cat12)


def test_deficiency_D(cat12, M12):
    U = cat12[0]
    assert C.deficiency_D(M12, M12, "0101") == (1, 0)
    assert C.deficiency_D(U, M12, "00000000")[0] == Fraction(7838625, 524288)
    assert C.deficiency_D(U, M12, "01010101")[0] == Fraction(17, 16)
    assert C.deficiency_D(U, M12, "11111111") == (Fraction(15, 16), -1)
    with pytest.raises(ZeroMass):
        C.deficiency_D(C.tree_from(lambda x: Fraction(0), 3, "zero"), M12, "0")


@settings(max_examples=100, deadline=None)
@given(st.text("01", max_size=11))
def test_deficiency_D_monotone(x):
    M = MIX12
    for P in CAT12:
        assert C.deficiency_D(P, M, x)[0] <= C.deficiency_D(P, M, x + "0")[0]


def test_ratio_masses_against_leaf_count(cat12, M12):
    U = cat12[0]
    expected = [Fraction(51, 512), Fraction(127, 4096), Fraction(39, 4096), Fraction(1, 512), Fraction(1, 1024), Fraction(1, 2048)]
    best = {a: C.deficiency_D(U, M12, a)[0] for a in strings_of_length(12)}
    for m, mass in enumerate(expected, start=1):
        check = C.ratio_test_check(U, M12, 12, m)
        assert check.mass == mass == Fraction(sum(1 for r in best.values() if r > 2**m), 4096)
        assert check.passed
        nodes = check.nodes
        assert not any(is_prefix(a, b) and a != b for a in nodes for b in nodes)


def test_ratio_with_P_equal_M(M12):
    for m in range(1, 7):
        check = C.ratio_test_check(M12, M12, 12, m)
        assert check.nodes == () and check.mass == 0 and check.passed


def test_inverse_sets():
    ident, double = C.lookup_map("identity"), C.lookup_map("bit-doubling")
    for x in ("0", "0110", "111"):
        assert C.inverse_set(ident, x, 8) == [x]
    assert C.inverse_set(double, "11", 8) == ["1"]
    assert C.inverse_set(double, "110", 8) == ["10"]
    assert C.inverse_set(double, "1", 8) == ["1"]
    inter = C.lookup_map("interleave")
    assert C.inverse_set(inter, "0110", 10) == ["01"]
    assert C.inverse_set(inter, "01101", 10) == ["011"]
    assert C.inverse_set(inter, "00", 10) == []
    assert C.inverse_set(C.lookup_map("even-bits"), "01", 4) == ["001", "011"]


@pytest.mark.parametrize("name", sorted(C.MAPS))
def test_inverse_sets_match_literal_definition(name):
    nu = C.lookup_map(name)
    inputs = list(strings_up_to(8))
    for x in strings_up_to(5):
        if not x:
            continue
        literal = [
            y for y in inputs if is_prefix(x, nu(y)) and (not y or (is_prefix(nu(y[:-1]), x) and nu(y[:-1]) != x))
        ]
        assert C.inverse_set(nu, x, 8) == literal


@pytest.mark.parametrize("name", sorted(C.MAPS))
def test_image_measure_matches_oracle_and_is_superadditive(name, M12):
    nu = C.lookup_map(name)
    M6 = C.mixture_M(C.default_catalog(6))
    assert C.image_tree_measure(nu, M6).values == oracle.oracle_tree_image(nu, M6.values, 6)
    assert not C.image_tree_measure(nu, M12).violations()
    assert not nu.violations(12)


def test_image_measure_examples(cat12, M12):
    U = cat12[0]
    assert C.image_tree_measure(C.lookup_map("identity"), U).values == U.values
    assert C.image_tree_measure(C.lookup_map("bit-doubling"), U)("11") == Fraction(1, 2)
    M10 = C.mixture_M(C.default_catalog(10))
    mu = C.image_tree_measure(C.lookup_map("interleave"), M10)
    assert (mu("01"), mu("0110"), mu("00")) == (Fraction(17, 32), Fraction(101, 512), 0)


def test_pullbacks(M12):
    t = C.zero_prefix_test(M12, 4)
    assert t("0000") == 8 and t("000") == 0 and t("00001111") == 8
    ident = C.lookup_map("identity")
    assert C.pullback_test(ident, t).values == t.values
    const = C.constant_test(12, Fraction(3))
    assert set(C.pullback_test(C.lookup_map("bit-doubling"), const).values.values()) == {3}
    shifted = C.pullback_test(C.lookup_map("bit-doubling"), C.zero_prefix_test(C.mixture_M(C.default_catalog(10)), 4), 10)
    assert [y for y in strings_up_to(4) if shifted(y) > 0] == ["00", "000", "001", "0000", "0001", "0010", "0011"]


def test_default_tests_are_m_tests(M12):
    for t in C.default_tests(M12):
        assert t.is_monotone() and C.validate_m_test(t, M12).passed


def test_validate_rejects_oversized_test(M12):
    assert not C.validate_m_test(C.constant_test(12, Fraction(4)), M12).passed


@pytest.mark.parametrize("name", sorted(C.MAPS))
def test_thm5(name):
    M10 = C.mixture_M(C.default_catalog(10))
    report = C.check_thm5(C.lookup_map(name), C.default_tests(M10), M10, 10)
    assert report.ok
    if name == "identity":
        assert report.summary["calibration_constant"] == 1
        assert all(row["difference"] == 0 for row in report.rows)


def test_thm5_constant_catalog():
    M8 = C.mixture_M(C.default_catalog(8))
    report = C.check_thm5(C.lookup_map("interleave"), [C.constant_test(8)], M8, 8)
    assert report.ok
    assert all(row["log_W_x"] == -1 and row["difference"] == 0 for row in report.rows)


def test_thm5_interleave_gap_table():
    M10 = C.mixture_M(C.default_catalog(10))
    report = C.check_thm5(C.lookup_map("interleave"), C.default_tests(M10), M10, 10)
    assert report.summary["calibration_constant"] == 256
    assert sorted({row["difference"] for row in report.rows}) == [-3, -2, -1, 0]


def test_thm6_identity_and_doubling(cat12, M12):
    for P in cat12:
        report = C.check_thm6(C.lookup_map("identity"), P, M12)
        assert report.ok and report.summary["test_identically_one"]
        assert all(row["gap"] == 0 for row in report.rows)
    report = C.check_thm6(C.lookup_map("bit-doubling"), cat12[0], M12)
    assert report.ok
    assert report.summary["test_max"] == Fraction(21605268465, 4979620928)
    assert sorted({row["gap"] for row in report.rows}) == [-6, -5, -4, -3, -2, -1, 0]


def test_thm6_with_P_equal_M(M12):
    report = C.check_thm6(C.lookup_map("bit-doubling"), M12, M12)
    assert report.ok
    assert all(row["D_P"] == 0 for row in report.rows)


def test_tree_serialization_round_trip():
    P = C.default_catalog(4)[1]
    text = C.dumps_tree(P)
    assert text.splitlines()[0] == "# tree depth=4 label=bernoulli:1/4 index=2"
    assert text.splitlines()[1] == "eps 1 1"
    assert C.loads_tree(text) == P


def test_monotone_map_violation_detected():
    bad = C.MonotoneMap(lambda x: x[::-1], "reverse")
    assert bad.violations(3)


def test_brute_force_even_bits_matches_slicing():
    nu = C.even_bits()
    for bits in product("01", repeat=6):
        x = "".join(bits)
        assert nu(x) == x[::2]
