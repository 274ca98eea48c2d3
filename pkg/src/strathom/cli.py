"""Command-line entry point: ``strathom <command> ...``.

Exit codes: 0 success, 1 validation failure, 2 input error, 3 search bound exceeded.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import os
import sys
from typing import Optional, Sequence

from .centerfun import FUSION_LIBRARY, CenterError, center_over_E, get_fusion, is_nondegenerate_over_E
from .metricgrp import (
    LIBRARY,
    MetricGroup,
    MetricGroupError,
    format_embedding,
    format_metric_group,
    metric_embeddings,
    parse_metric_group,
    radical,
)
from .mext import MextError, SearchBoundExceeded, enumerate_mext, format_classification
from .moddata import (
    ModularDataError,
    format_modular_data,
    from_metric_group,
    modular_library,
    parse_modular_data,
    verify_modular_axioms,
)
from .stratsurf import (
    EvaluationError,
    ReductionError,
    SurfaceError,
    Trace,
    check_anomaly_free,
    evaluate,
    format_surface,
    load_surface,
    reduce_fully,
    require_valid,
    validate_surface,
)

OK, FAILED, INPUT_ERROR, BOUND_EXCEEDED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _metric(source: str) -> MetricGroup:
    """A library name or a file holding a metric group."""
    if source in LIBRARY:
        return LIBRARY[source]
    if os.path.exists(source):
        return parse_metric_group(_read(source), os.path.basename(source))
    raise InputError(f"unknown metric group {source!r}")


def _load(path: str):
    _read(path)
    return load_surface(path)


# ---- commands


def cmd_library(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name in sorted(LIBRARY):
            print(f"metric {name}")
        for name in sorted(modular_library()):
            print(f"modular {name}")
        for base in sorted(FUSION_LIBRARY):
            for name in sorted(FUSION_LIBRARY[base]):
                print(f"fusion {name} over {base}")
        return OK
    if args.name is None:
        raise InputError("library show needs a NAME")
    if args.name in LIBRARY and not args.modular:
        print(format_metric_group(LIBRARY[args.name]), end="")
    elif args.name in modular_library():
        print(format_modular_data(modular_library()[args.name]), end="")
    else:
        raise InputError(f"unknown library entry {args.name!r}")
    return OK


def cmd_verify_md(args: argparse.Namespace) -> int:
    text = _read(args.file)
    if text.lstrip().startswith("("):
        md = from_metric_group(parse_metric_group(text, os.path.basename(args.file)))
    else:
        md = parse_modular_data(text, os.path.basename(args.file))
    rows = verify_modular_axioms(md)
    for name, ok, detail in rows:
        print(f"{name}: {'ok' if ok else 'FAIL'}{' ' + detail if detail else ''}")
    return OK if all(ok for _, ok, _ in rows) else FAILED


def cmd_mext(args: argparse.Namespace) -> int:
    base = _metric(args.base)
    inner, iota = None, None
    if args.inner is not None:
        inner = _metric(args.inner)
        rad = set(radical(inner))
        iota = next((e for e in metric_embeddings(base, inner) if set(e.image()) == rad), None)
        if iota is None:
            print(f"{args.inner} has no embedding of {args.base} onto its Mueger center")
            return FAILED
    result = enumerate_mext(base, inner, iota, jobs=args.jobs)
    print(format_classification(result), end="")
    return OK


def cmd_center(args: argparse.Namespace) -> int:
    z = center_over_E(get_fusion(args.cat, args.base))
    print(format_metric_group(z.metric), end="")
    print(format_embedding(z.embed))
    print(f"nondegenerate over E: {'yes' if is_nondegenerate_over_E(z) else 'no'}")
    return OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = validate_surface(_load(args.file))
    print(report.format())
    return OK if report.ok else FAILED


def cmd_anomaly_check(args: argparse.Namespace) -> int:
    s = _load(args.file)
    require_valid(s)
    report = check_anomaly_free(s)
    print(report.format())
    return OK if report.passed else FAILED


def cmd_reduce(args: argparse.Namespace) -> int:
    s = _load(args.file)
    require_valid(s)
    trace = Trace()
    out = reduce_fully(s, trace)
    if args.trace:
        for line in trace.lines:
            print(line)
    print(format_surface(out), end="")
    return OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    s = _load(args.file)
    require_valid(s)
    print(evaluate(s).format())
    return OK


def run_captured(argv: Sequence[str]) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_all

    results = run_all(run_captured, jobs=args.jobs)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return OK if passed == len(results) else FAILED


# ---- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="strathom", description="Pointed braided categories and stratified surfaces.")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for searches (output does not depend on it)")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    q = sub.add_parser("library", help="list or show built-in categories")
    q.add_argument("action", choices=["list", "show"])
    q.add_argument("name", nargs="?")
    q.add_argument("--modular", action="store_true", help="show the modular data of a metric group entry")
    q.set_defaults(func=cmd_library)

    q = sub.add_parser("verify-md", help="check modular data axioms")
    q.add_argument("file")
    q.set_defaults(func=cmd_verify_md)

    q = sub.add_parser("mext", help="enumerate modular extensions")
    q.add_argument("--base", required=True)
    q.add_argument("--inner")
    q.set_defaults(func=cmd_mext)

    q = sub.add_parser("center", help="center of a fusion category over E")
    q.add_argument("--cat", required=True)
    q.add_argument("--base", default="trivial")
    q.set_defaults(func=cmd_center)

    for name, func, helptext in (
        ("validate", cmd_validate, "check a surface file is well formed"),
        ("anomaly-check", cmd_anomaly_check, "check a surface is anomaly-free"),
        ("evaluate", cmd_evaluate, "evaluate a surface to an object of E"),
    ):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("file")
        q.set_defaults(func=func)

    q = sub.add_parser("reduce", help="reduce a surface to a point on a sphere")
    q.add_argument("file")
    q.add_argument("--trace", action="store_true")
    q.set_defaults(func=cmd_reduce)

    q = sub.add_parser("selftest", help="run the acceptance checks")
    q.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return INPUT_ERROR
    try:
        return args.func(args)
    except SearchBoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BOUND_EXCEEDED
    except (EvaluationError, ReductionError) as exc:
        print(f"error: {exc}")
        return FAILED
    except (InputError, SurfaceError, MetricGroupError, ModularDataError, MextError, CenterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
