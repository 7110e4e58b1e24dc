"""Command-line entry point: ``aitlab <command> ...``.

Harness commands never enumerate on their own. They load caches written by
``aitlab enumerate`` and name the exact command to run when one is missing.

Exit status: 0 success, 1 hard-assert failure, 2 malformed input,
3 cache or IO error, 4 no program for the requested string.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from aitlab import continuous, enumeration, harness, staged
from aitlab.bits import check_bits, from_text, strings_up_to, to_text
from aitlab.enumeration import Budget, EnumerationTable, K_approx, m_approx
from aitlab.errors import AitlabError, CacheError, MalformedCode, NoProgram, ResourceLimit
from aitlab.machine import VERSION_ID
from aitlab.measures import deficiency, uniform_n
from aitlab.report import ConservationReport, fmt

EXIT_OK, EXIT_HARD, EXIT_INPUT, EXIT_IO, EXIT_NOPROGRAM = 0, 1, 2, 3, 4
CACHE_ENV = "AITLAB_CACHE_DIR"
DEFAULT_CACHE_DIR = "aitlab-cache"
DEFAULT_ORACLE = "halting:64"


class InputError(AitlabError, ValueError):
    pass


# ---- aux sources and cache naming -----------------------------------------


def parse_aux(spec: str) -> tuple[str, int]:
    """'eps' | 'omega:<c>' | 'halting:<n>' -> (kind, parameter)."""
    if spec == "eps":
        return "eps", 0
    kind, _, arg = spec.partition(":")
    if kind not in ("omega", "halting") or not arg.isdigit():
        raise InputError(f"bad aux source {spec!r}; use eps, omega:<c> or halting:<n>")
    n = int(arg)
    if kind == "omega" and n < 1:
        raise InputError("omega:<c> needs c >= 1")
    return kind, n


def aux_tag(spec: str) -> str:
    kind, n = parse_aux(spec)
    return "eps" if kind == "eps" else f"{kind}{n}"


def cache_dir(args: argparse.Namespace) -> Path:
    return Path(args.cache or os.environ.get(CACHE_ENV) or DEFAULT_CACHE_DIR)


def cache_name(max_len: int, max_steps: int, aux: str) -> str:
    return f"enum-{VERSION_ID}-L{max_len}-T{max_steps}-{aux_tag(aux)}.txt"


def enumerate_command(max_len: int, max_steps: int, aux: str, directory: Path) -> str:
    return f"aitlab enumerate --max-len {max_len} --max-steps {max_steps} --aux {aux} --cache {directory}"


def load_table(directory: Path, max_len: int, max_steps: int, aux: str = "eps") -> EnumerationTable:
    path = directory / cache_name(max_len, max_steps, aux)
    if not path.exists():
        raise CacheError(
            f"missing cache for max_len={max_len} max_steps={max_steps} aux={aux} at {path}; "
            f"create it with: {enumerate_command(max_len, max_steps, aux, directory)}"
        )
    table = enumeration.load(path)
    if table.budget.max_len != max_len or table.budget.max_steps != max_steps:
        raise CacheError(f"{path} holds budget {table.budget.describe()}, not the one its name claims")
    if aux != "eps":
        expected = resolve_aux(aux, load_table(directory, max_len, max_steps))
        if table.budget.aux != expected:
            raise CacheError(f"{path} was built with a different aux tape than {aux} derives")
    return table


def resolve_aux(spec: str, plain: EnumerationTable | None) -> str:
    kind, n = parse_aux(spec)
    if kind == "eps":
        return ""
    if plain is None:
        raise CacheError(f"aux {spec} is derived from the plain cache, which is missing")
    if kind == "omega":
        return enumeration.omega_prefix(n, plain).bits
    return enumeration.halting_oracle(plain, n)


# ---- labels -----------------------------------------------------------------


def parse_measure(label: str):
    kind, _, arg = label.partition(":")
    if kind != "uniform" or not arg.isdigit():
        raise InputError(f"unknown measure {label!r}; discrete measures are uniform:<n>")
    return uniform_n(int(arg))


def parse_string(text: str) -> str:
    x = from_text(text)
    try:
        check_bits(x)
    except MalformedCode as exc:
        raise InputError(str(exc)) from exc
    return x


def parse_function(label: str):
    try:
        return staged.lookup(label)
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc


# ---- commands ---------------------------------------------------------------


def cmd_enumerate(args: argparse.Namespace) -> int:
    directory = cache_dir(args)
    plain = None
    if args.aux != "eps":
        plain = load_table(directory, args.max_len, args.max_steps)
    budget = Budget(args.max_len, args.max_steps, resolve_aux(args.aux, plain))
    table = enumeration.enumerate_programs(budget, workers=args.workers)
    path = Path(args.out) if args.out else directory / cache_name(args.max_len, args.max_steps, args.aux)
    enumeration.save(table, path)
    print(f"wrote {path} records={len(table)} kraft={fmt(enumeration.kraft_sum(table))}")
    return EXIT_OK


def cmd_complexity(args: argparse.Namespace) -> int:
    table = load_table(cache_dir(args), args.max_len, args.max_steps, args.aux)
    x = parse_string(args.x)
    k = K_approx(x, table)
    if k == enumeration.INFINITE:
        raise NoProgram(f"no program prints {to_text(x)} at {table.budget.describe()}")
    line = f"x={to_text(x)} K={k} m={fmt(m_approx(x, table))}"
    if args.measure:
        p = parse_measure(args.measure)
        line += f" measure={p.label} deficiency={deficiency(p, x, table)}"
    print(line)
    return EXIT_OK


def _emit(report: ConservationReport, args: argparse.Namespace, stem: str) -> int:
    report.config["command"] = " ".join([args.command, args.which])
    text_path, tsv_path = report.write(args.out or "reports", stem)
    failed = [h.name for h in report.hard_asserts if not h.passed]
    print(f"wrote {text_path} {tsv_path}")
    print(f"hard asserts: {len(report.hard_asserts) - len(failed)} passed, {len(failed)} failed")
    for name in failed:
        print(f"FAIL {name}")
    if report.consistency:
        print(f"consistency flags: {len(report.consistency)} (see report)")
    return EXIT_HARD if failed else EXIT_OK


def cmd_conserve(args: argparse.Namespace) -> int:
    directory = cache_dir(args)
    plain = load_table(directory, args.max_len, args.max_steps)
    oracle = args.aux if args.aux != "eps" else DEFAULT_ORACLE
    with_h = load_table(directory, args.max_len, args.max_steps, oracle)
    which = args.which
    if which == "prop1":
        report = harness.check_prop1(strings_up_to(args.n), plain, with_h)
        stem = f"prop1-n{args.n}"
    elif which == "thm1":
        B, p = parse_function(args.function), parse_measure(args.measure)
        report = harness.check_thm1(B, p, None, plain, with_h, stage=args.stage, slack=args.slack)
        stem = f"thm1-{B.label}-{p.label.replace(':', '')}"
    elif which == "thm2":
        report = harness.check_thm2(args.b, args.c, plain, with_h, slack=args.slack)
        stem = f"thm2-b{args.b}-c{args.c}"
    elif which == "thm3":
        B = parse_function(args.function)
        report = harness.check_thm3(B, harness.default_pairs(args.n), plain, with_h, args.stage, args.slack)
        stem = f"thm3-{B.label}-n{args.n}"
    else:
        f = parse_function(args.function)
        if not isinstance(f, staged.TotalFunction):
            raise InputError("thm4 needs a total function")
        report = harness.check_thm4(f, strings_up_to(args.n), plain, with_h, args.slack)
        stem = f"thm4-{f.label}-n{args.n}"
    report.config.update(cache_plain=plain_name(args), cache_oracle=cache_name(args.max_len, args.max_steps, oracle))
    return _emit(report, args, stem)


def plain_name(args: argparse.Namespace) -> str:
    return cache_name(args.max_len, args.max_steps, "eps")


def cmd_continuous(args: argparse.Namespace) -> int:
    depth = args.depth
    if not 1 <= depth <= continuous.MAX_DEPTH:
        raise InputError(f"--depth must lie in 1..{continuous.MAX_DEPTH}")
    catalog = continuous.default_catalog(depth)
    M = continuous.mixture_M(catalog)
    measure = args.measure or "uniform"
    if measure == "M":
        P = M
    elif measure in continuous.MEASURES:
        P = next(Q for Q in catalog if Q.label.split(":")[0] == measure)
    else:
        raise InputError(f"unknown tree measure {measure!r}; known: M, {', '.join(continuous.MEASURES)}")
    nu_label = args.function or "identity"
    try:
        nu = continuous.lookup_map(nu_label)
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc
    if args.which == "ratio":
        report = continuous.check_ratio(P, M, depth, range(args.m_min, args.m_max + 1))
        stem = f"ratio-{measure}-d{depth}"
    elif args.which == "thm5":
        report = continuous.check_thm5(nu, continuous.default_tests(M), M, depth)
        stem = f"thm5-{nu_label}-d{depth}"
    else:
        report = continuous.check_thm6(nu, P, M)
        stem = f"thm6-{nu_label}-{measure}-d{depth}"
    report.config["version"] = VERSION_ID
    return _emit(report, args, stem)


def cmd_catalog(args: argparse.Namespace) -> int:
    print("[discrete measures]")
    print("uniform:<n>  uniform on strings of length n (1..24)")
    print("[functions]")
    for label, f in staged.TOTAL_FUNCTIONS.items():
        print(f"{label}  total  cost={f.description_cost}")
    for label, f in staged.STAGED_FUNCTIONS.items():
        print(f"{label}  staged  cost={f.description_cost}")
    print("[tree measures]")
    for P in continuous.default_catalog(1):
        print(f"{P.label}  index={P.index}")
    print("M  mixture of the tree measures above")
    print("[monotone maps]")
    for label in continuous.MAPS:
        print(label)
    print("[elementary tests]")
    for t in continuous.default_tests(continuous.mixture_M(continuous.default_catalog(4))):
        print(t.label)
    return EXIT_OK


# ---- parser -----------------------------------------------------------------


def _budget_flags(p: argparse.ArgumentParser, aux_default: str = "eps") -> None:
    p.add_argument("--max-len", type=int, default=16)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--aux", default=aux_default, help="eps | omega:<c> | halting:<n>")
    p.add_argument("--cache", help=f"cache directory (default ${CACHE_ENV} or ./{DEFAULT_CACHE_DIR})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aitlab", description="Resource-bounded algorithmic information experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="enumerate halting programs and write a cache")
    _budget_flags(p)
    p.add_argument("--out", help="explicit cache file path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("complexity", help="K, m and deficiency of one string")
    p.add_argument("x", help="bit string, or eps for the empty string")
    _budget_flags(p)
    p.add_argument("--measure", help="uniform:<n>; adds the deficiency")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("conserve", help="discrete conservation experiments")
    p.add_argument("which", choices=["prop1", "thm1", "thm2", "thm3", "thm4"])
    _budget_flags(p, aux_default=DEFAULT_ORACLE)
    p.add_argument("--out", help="report directory (default ./reports)")
    p.add_argument("--slack", type=int)
    p.add_argument("--measure", default="uniform:8")
    p.add_argument("--function", default="identity")
    p.add_argument("--stage", type=int, default=16, help="stage for staged functions")
    p.add_argument("--n", type=int, default=6, help="domain is all strings up to this length")
    p.add_argument("--b", type=int, default=4)
    p.add_argument("--c", type=int, default=3)
    p.set_defaults(func=cmd_conserve)

    p = sub.add_parser("continuous", help="finite-depth continuous experiments")
    p.add_argument("which", choices=["ratio", "thm5", "thm6"])
    p.add_argument("--depth", type=int, default=continuous.DEFAULT_DEPTH)
    p.add_argument("--measure", help="tree measure label or M (default uniform)")
    p.add_argument("--function", help="monotone map label (default identity)")
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--out", help="report directory (default ./reports)")
    p.set_defaults(func=cmd_continuous)

    p = sub.add_parser("catalog", help="list registered measures, functions, maps and tests")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoProgram as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOPROGRAM
    except (CacheError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InputError, ResourceLimit, AitlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
