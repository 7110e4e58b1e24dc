"""Discrete conservation experiments.

Each ``check_*`` returns a :class:`ConservationReport`. Stage-exact identities
(test sums, mass conservation, algebraic identities) become hard asserts;
the asymptotic inequalities are only compared against a slack and flagged.
"""

from __future__ import annotations

from collections.abc import Iterable

from aitlab.bits import pair_encode, strings_up_to
from aitlab.enumeration import INFINITE, EnumerationTable, K_approx, joint_K, m_approx
from aitlab.errors import AitlabError
from aitlab.measures import (
    DiscreteSemiMeasure,
    ceil_neg_log2,
    deficiency,
    image_measure,
    thm1_test,
    thm1_validity_sum,
    thm3_test,
    thm4_semimeasure,
)
from aitlab.report import ConservationReport
from aitlab.staged import StagedFunction, TotalFunction, default_slack, thm2_pipeline

MACHINE_SLACK = 8


def _config(plain: EnumerationTable, with_h: EnumerationTable | None, **extra) -> dict[str, object]:
    cfg: dict[str, object] = {
        "max_len": plain.budget.max_len,
        "max_steps": plain.budget.max_steps,
        "aux_plain": plain.budget.aux,
    }
    if with_h is not None:
        cfg["oracle_max_len"] = with_h.budget.max_len
        cfg["oracle_max_steps"] = with_h.budget.max_steps
        cfg["oracle_aux"] = with_h.budget.aux
    cfg.update(extra)
    return cfg


def _k(x: str, table: EnumerationTable) -> int | None:
    k = K_approx(x, table)
    return None if k == INFINITE else int(k)


def _info_h(x: str, plain: EnumerationTable, with_h: EnumerationTable) -> int | None:
    k, kh = _k(x, plain), _k(x, with_h)
    return None if k is None or kh is None else k - kh


def _mutual(x: str, y: str, table: EnumerationTable) -> int | None:
    kx, ky = _k(x, table), _k(y, table)
    kxy = joint_K(x, y, table)
    if kx is None or ky is None or kxy == INFINITE:
        return None
    return kx + ky - int(kxy)


def check_prop1(X: Iterable[str], plain: EnumerationTable, with_h: EnumerationTable) -> ConservationReport:
    """I(x;H) against d_m(x|H); the gap d_m - I is ⌈-log m(x)⌉ - K(x), never positive."""
    report = ConservationReport(
        "prop1",
        plain.version_id,
        _config(plain, with_h),
        ["x", "K", "K_given_H", "m", "ceil_neg_log_m", "info_H", "d_m_given_H", "gap"],
    )
    identity_ok = sign_ok = True
    histogram: dict[int, int] = {}
    for x in X:
        k, kh = _k(x, plain), _k(x, with_h)
        if k is None or kh is None:
            report.flag(f"undefined x={x or 'eps'}: complexity infinite at this budget")
            continue
        m = m_approx(x, plain)
        clm = ceil_neg_log2(m)
        info = k - kh
        d_m = clm - kh
        gap = d_m - info
        identity_ok &= gap == clm - k
        sign_ok &= gap <= 0
        histogram[gap] = histogram.get(gap, 0) + 1
        report.rows.append(
            dict(x=x, K=k, K_given_H=kh, m=m, ceil_neg_log_m=clm, info_H=info, d_m_given_H=d_m, gap=gap)
        )
    report.require("prop1-gap-identity", identity_ok, len(report.rows))
    report.require("coding-lemma-gap-nonpositive", sign_ok, len(report.rows))
    report.summary["gap_histogram"] = " ".join(f"{g}:{histogram[g]}" for g in sorted(histogram))
    return report


def check_thm1(
    B: StagedFunction | TotalFunction,
    p: DiscreteSemiMeasure,
    X: Iterable[str] | None,
    plain: EnumerationTable,
    with_h: EnumerationTable,
    stage: int = 0,
    slack: int | None = None,
) -> ConservationReport:
    """d_Bp(B(x)) - d_p(x) against I(x;H), plus the test-validity and mass hard asserts."""
    f = B.at(stage)
    slack = MACHINE_SLACK + B.description_cost + p.description_cost if slack is None else slack
    image = image_measure(f, p)
    report = ConservationReport(
        "thm1",
        plain.version_id,
        _config(plain, with_h, function=B.label, measure=p.label, stage=stage, slack=slack),
        ["x", "Bx", "d_p", "d_Bp", "info_H", "gap", "excess"],
    )
    t = thm1_test(p, f, plain)
    total = thm1_validity_sum(t, plain)
    report.require("thm1-test-sum<=1", total <= 1, total)
    report.require("image-mass-conservation", image.mass + image.lost_mass == p.mass, image.lost_mass)
    report.summary["thm1_test_zero_denominators"] = len(t.errors)
    for x in p.support if X is None else X:
        bx = f(x)
        try:
            d_p = deficiency(p, x, plain)
            d_bp = deficiency(image, bx, plain)
        except (AitlabError, ArithmeticError) as exc:
            report.flag(f"undefined x={x}: {exc}")
            continue
        info = _info_h(x, plain, with_h)
        gap = d_bp - d_p
        excess = None if info is None else gap - info
        if excess is not None and excess > slack:
            report.flag(f"x={x} excess {excess} exceeds slack {slack}")
        report.rows.append(dict(x=x, Bx=bx, d_p=d_p, d_Bp=d_bp, info_H=info, gap=gap, excess=excess))
    excesses = [r["excess"] for r in report.rows if r["excess"] is not None]
    report.summary["max_excess"] = max(excesses) if excesses else None
    return report


def check_thm2(
    b: int,
    c: int,
    plain: EnumerationTable,
    with_h: EnumerationTable | None = None,
    stages: int = 4,
    window: int = 2,
    slack: int | None = None,
) -> ConservationReport:
    res = thm2_pipeline(b, c, plain, with_h, stages=stages, window=window, slack=slack)
    report = ConservationReport(
        "thm2",
        plain.version_id,
        _config(plain, with_h, b=b, c=c, stages=stages, window=window, slack=res.slack),
        ["quantity", "measured", "predicted", "within_slack"],
    )
    report.require("image-mass-conservation", res.mass_conserved, res.lost_mass)
    report.require("lost-mass-count", res.lost_mass == res.expected_lost_mass, res.expected_lost_mass)
    report.require("deficiency-difference-identity", res.identity_holds, res.difference)
    report.summary.update(
        omega_bits=res.omega_bits,
        omega_converged=res.converged,
        omega_by_stage=res.stage_values,
        x=res.x,
        Bx=res.bx,
        Bx_stable=res.bx_stable,
        K_x=res.k_x,
        K_Bx=res.k_bx,
        K_x_given_H=res.k_x_given_h,
        ceil_neg_log_Bp_Bx=res.ceil_neg_log_bp,
    )
    for name, measured, predicted in (
        ("d_p(x)", res.d_p, b),
        ("d_Bp(B(x))", res.d_bp, b + c),
        ("d_Bp(B(x))-d_p(x)", res.difference, c),
        ("I(x;H)", res.info_h, c),
    ):
        ok = res.within(measured, predicted)
        report.rows.append(dict(quantity=name, measured=measured, predicted=predicted, within_slack=ok))
        if not ok:
            report.flag(f"{name}={measured} outside {predicted}±{res.slack}")
    if not res.converged:
        report.flag("omega prefix not converged at half the step budget")
    return report


def check_thm3(
    B: StagedFunction | TotalFunction,
    pairs: Iterable[tuple[str, str]],
    plain: EnumerationTable,
    with_h: EnumerationTable,
    stage: int = 0,
    slack: int | None = None,
) -> ConservationReport:
    """I(B(x):y) - I(x:y) against I(<x,y>;H), plus the calibrated pair-test hard assert."""
    f = B.at(stage)
    pairs = list(pairs)
    slack = MACHINE_SLACK + B.description_cost if slack is None else slack
    report = ConservationReport(
        "thm3",
        plain.version_id,
        _config(plain, with_h, function=B.label, stage=stage, slack=slack),
        ["x", "y", "Bx", "I_Bx_y", "I_x_y", "info_pair_H", "gap", "excess"],
    )
    test = thm3_test(f, pairs, plain)
    report.require("thm3-calibrated-sum==1", test.weighted_sum == 1, test.weighted_sum)
    report.summary.update(
        calibration_constant=test.constant, domain_size=len(test.values), excluded=len(test.excluded)
    )
    undefined = 0
    for x, y in pairs:
        bx = f(x)
        i_b = _mutual(bx, y, plain)
        i_x = _mutual(x, y, plain)
        i_h = _info_h(pair_encode(x, y), plain, with_h)
        if i_b is None or i_x is None:
            undefined += 1
            continue
        gap = i_b - i_x
        excess = None if i_h is None else gap - i_h
        if excess is not None and excess > slack:
            report.flag(f"pair=({x or 'eps'},{y or 'eps'}) excess {excess} exceeds slack {slack}")
        report.rows.append(dict(x=x, y=y, Bx=bx, I_Bx_y=i_b, I_x_y=i_x, info_pair_H=i_h, gap=gap, excess=excess))
    report.summary["undefined_rows"] = undefined
    return report


def check_thm4(
    f: TotalFunction,
    X: Iterable[str],
    plain: EnumerationTable,
    with_h: EnumerationTable,
    slack: int | None = None,
) -> ConservationReport:
    """I(f(x);H) against I(x;H), plus the calibrated semi-measure hard assert."""
    X = list(X)
    slack = MACHINE_SLACK + f.description_cost if slack is None else slack
    report = ConservationReport(
        "thm4",
        plain.version_id,
        _config(plain, with_h, function=f.label, slack=slack),
        ["x", "fx", "info_fx_H", "info_x_H", "gap"],
    )
    s = thm4_semimeasure(f, X, plain, with_h)
    report.require("thm4-calibrated-sum==1", s.weighted_sum == 1, s.weighted_sum)
    report.summary.update(calibration_constant=s.constant, excluded=len(s.excluded))
    undefined = 0
    for x in X:
        fx = f(x)
        i_f = _info_h(fx, plain, with_h)
        i_x = _info_h(x, plain, with_h)
        if i_f is None or i_x is None:
            undefined += 1
            continue
        gap = i_f - i_x
        if gap > slack:
            report.flag(f"x={x or 'eps'} gap {gap} exceeds slack {slack}")
        report.rows.append(dict(x=x, fx=fx, info_fx_H=i_f, info_x_H=i_x, gap=gap))
    report.summary["undefined_rows"] = undefined
    return report


def default_pairs(n: int = 4) -> list[tuple[str, str]]:
    xs = list(strings_up_to(n))
    return [(x, y) for x in xs for y in xs]


__all__ = [
    "check_prop1",
    "check_thm1",
    "check_thm2",
    "check_thm3",
    "check_thm4",
    "default_pairs",
    "default_slack",
]
