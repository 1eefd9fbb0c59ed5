"""Command-line front end: ``cubicpref <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 refused (needs ``--deep``),
3 nothing found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import _backend, construct, grayenum, hyperoct, prefcore
from .prefcore import Character, MatrixFormatError, PreferenceMatrix, QuestionSet

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_NOT_FOUND = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID, output: str = ""):
        super().__init__(message)
        self.code = code
        self.output = output  # still written to stdout, e.g. a failure trace


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_matrix(path: str) -> PreferenceMatrix:
    try:
        return prefcore.parse_matrix(_read_text(path))
    except MatrixFormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _load_character(path: str) -> Character:
    try:
        return Character.from_json(_read_text(path))
    except (ValueError, TypeError) as exc:
        raise CliError(f"{path}: invalid character JSON: {exc}") from exc


def _require_cubic(p: PreferenceMatrix, path: str) -> None:
    if not prefcore.is_cubic(p):
        raise CliError(f"{path}: matrix is not cubic (consecutive rows must differ in one bit)")


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _parse_fix(text: str, n: int) -> tuple[QuestionSet, int]:
    """``"1,3=10"``: fix question 1 to 1 and question 3 to 0."""
    qs_text, sep, value = text.partition("=")
    if not sep:
        raise CliError(f"--fix expects S=x such as 1,3=10, got {text!r}")
    try:
        qs = [int(q) for q in qs_text.split(",") if q.strip()]
        fixed = QuestionSet.of(n, qs)
    except ValueError as exc:
        raise CliError(f"--fix: {exc}") from exc
    if len(set(qs)) != len(qs) or list(qs) != sorted(qs):
        raise CliError("--fix questions must be distinct and ascending")
    if len(value) != len(qs) or set(value) - {"0", "1"}:
        raise CliError(f"--fix outcome {value!r} must be {len(qs)} binary digits")
    return fixed, prefcore.Outcome(len(qs), int(value, 2)) if qs else 0


def _table_text(table: grayenum.ClassificationTable) -> str:
    rows = table.sorted_rows()
    header = ("Character Class", "Total Matrices", "Path Classes")
    body = [(k, str(m), str(pc)) for k, m, pc in rows]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(3)]
    lines = [f"n={table.n}  |H_{table.n}|={grayenum.group_order(table.n)}"]
    fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
    lines.append(fmt(header))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend(fmt(r) for r in body)
    return "\n".join(lines) + "\n"


def _table_tsv(table: grayenum.ClassificationTable) -> str:
    lines = ["class\tmatrices\tpath_classes"]
    lines += [f"{k}\t{m}\t{pc}" for k, m, pc in table.sorted_rows()]
    return "\n".join(lines) + "\n"


def _render_table(table, fmt: str, extra: dict | None = None) -> str:
    if fmt == "json":
        obj = table.to_json()
        obj.update(extra or {})
        return _dump(obj) + "\n"
    if fmt == "tsv":
        return _table_tsv(table)
    text = _table_text(table)
    if extra:
        text += "".join(f"{k}: {v}\n" for k, v in extra.items())
    return text


def _progress_printer(enabled: bool, stream):
    if not enabled:
        return None

    def report(done, total, leaves, elapsed):
        rate = leaves / elapsed if elapsed > 0 else 0.0
        print(
            f"[{done}/{total} units] {leaves:,} path classes, {rate:,.0f}/s, {elapsed:.1f}s",
            file=stream,
            flush=True,
        )

    return report


# ---------------------------------------------------------------- handlers

def cmd_character(args) -> str:
    return _dump(prefcore.character(_load_matrix(args.matrix)).to_json()) + "\n"


def cmd_is_cubic(args) -> str:
    return ("true" if prefcore.is_cubic(_load_matrix(args.matrix)) else "false") + "\n"


def cmd_restrict(args) -> str:
    p = _load_matrix(args.matrix)
    fixed, x = _parse_fix(args.fix, p.n)
    try:
        return prefcore.restrict(p, fixed, x).to_text()
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_act(args) -> str:
    p = _load_matrix(args.matrix)
    try:
        g = hyperoct.SignedPermutation.parse(f"perm={args.perm} flips={args.flips}")
        return hyperoct.act(p, g).to_text()
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_canonical(args) -> str:
    p = _load_matrix(args.matrix)
    _require_cubic(p, args.matrix)
    rep, g = hyperoct.canonicalize(p)
    if args.format == "json":
        return _dump({"matrix": rep.row_strings(), "element": str(g)}) + "\n"
    return rep.to_text()


def _classify(args, n: int) -> grayenum.ClassificationTable:
    try:
        return grayenum.classify(
            n, deep=args.deep, workers=args.threads, progress=_progress_printer(args.progress, args.stderr)
        )
    except grayenum.ResourceRefused as exc:
        raise CliError(str(exc), EXIT_REFUSED) from exc


def cmd_classify(args) -> str:
    _check_n_arg(args.n, 1, 5)
    return _render_table(_classify(args, args.n), args.format)


def cmd_enumerate(args) -> str:
    _check_n_arg(args.n, 1, 5)
    table = _classify(args, args.n)
    extra = {
        "path_classes": table.total_path_classes,
        "matrices": table.total_matrices,
    }
    if args.all:
        if args.n > grayenum.ALL_PATHS_MAX_N:
            raise CliError(f"--all supports n <= {grayenum.ALL_PATHS_MAX_N}", EXIT_REFUSED)
        brute = grayenum.enumerate_all_paths(args.n)
        extra["matrices_brute_force"] = brute
        extra["consistent"] = brute == table.total_matrices
    return _render_table(table, args.format, extra)


def cmd_find(args) -> str:
    _check_n_arg(args.n, 1, 5)
    try:
        rep = grayenum.find_representative(args.n, args.class_key)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if rep is None:
        raise CliError(f"no cubic matrix on {args.n} questions found in class {args.class_key}", EXIT_NOT_FOUND)
    return rep.to_text()


def _construct_call(fn, *a):
    try:
        return fn(*a)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def cmd_stack(args) -> str:
    a, b = _load_matrix(args.upper), _load_matrix(args.lower)
    _require_cubic(a, args.upper)
    _require_cubic(b, args.lower)
    if a.n != b.n:
        raise CliError(f"matrices on {a.n} and {b.n} questions")
    return _construct_call(construct.stack, a, b, construct.StackSpec(args.k, args.sign)).to_text()


def cmd_weave(args) -> str:
    a = _load_matrix(args.matrix)
    _require_cubic(a, args.matrix)
    return _construct_call(construct.weave, a, construct.WeaveSpec(args.k, args.sign)).to_text()


def cmd_unstack(args) -> str:
    p = _load_matrix(args.matrix)
    _require_cubic(p, args.matrix)
    found = construct.detect_stack_column(p)
    if found is None:
        raise CliError(f"{args.matrix}: no stack column (no separable single question)")
    upper, lower = _construct_call(construct.unstack, p, *found)
    return upper.to_text() + "\n" + lower.to_text()


def cmd_unweave(args) -> str:
    p = _load_matrix(args.matrix)
    _require_cubic(p, args.matrix)
    found = construct.detect_weave_column(p)
    if found is None:
        raise CliError(f"{args.matrix}: no weave column")
    return _construct_call(construct.unweave, p, *found).to_text()


def cmd_synthesize(args) -> str:
    c = _load_character(args.character)
    try:
        result = construct.synthesize_trace(c, args.base_n)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    trace = result.to_json()
    if result.ok:
        trace["matrix"] = result.matrix.row_strings()
    if args.trace:
        Path(args.trace).write_text(_dump(trace) + "\n", encoding="utf-8")
    if not result.ok:
        if result.proved_inadmissible:
            verdict = "proved inadmissible for cubic preferences"
        else:
            verdict = "not found by this procedure (not a proof of inadmissibility)"
        out = _dump(trace) + "\n" if args.format == "json" else ""
        raise CliError(f"{verdict}: {result.reason}", EXIT_NOT_FOUND, out)
    note = "proved admissible (matrix attached)"
    if args.format == "json":
        return _dump(trace) + "\n", note
    return result.matrix.to_text(), note


def cmd_random(args) -> str:
    _check_n_arg(args.n, 1, 7)
    return grayenum.random_cubic(args.n, args.seed).to_text()


def cmd_nested_check(args) -> str:
    c = _load_character(args.character)
    return _dump(
        {
            "nested": prefcore.is_nested(c),
            "intersection_closed": prefcore.is_intersection_closed(c),
            "class": prefcore.character_class_key(c),
        }
    ) + "\n"


def _check_n_arg(n: int, lo: int, hi: int) -> None:
    if not lo <= n <= hi:
        raise CliError(f"--n must be in {lo}..{hi}, got {n}")


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cubicpref",
        description="Separability characters of cubic (Gray-path) preference matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({_backend.BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def matrix_cmd(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("matrix", help="matrix text file ('-' for stdin)")
        p.set_defaults(func=fn)
        return p

    matrix_cmd("character", cmd_character, "print the character as JSON")
    matrix_cmd("is-cubic", cmd_is_cubic, "check consecutive rows differ in one bit")
    p = matrix_cmd("restrict", cmd_restrict, "fix questions and print the submatrix")
    p.add_argument("--fix", required=True, metavar="S=x", help="e.g. 3=1 or 1,3=10")
    p = matrix_cmd("act", cmd_act, "apply a signed permutation to the columns")
    p.add_argument("--perm", required=True, help="new column j takes old column perm[j], e.g. 2,3,1")
    p.add_argument("--flips", default="", help="new columns to complement afterwards, e.g. 3")
    p = matrix_cmd("canonical", cmd_canonical, "canonical path-class representative")
    p.add_argument("--format", choices=("text", "json"), default="text")

    def table_cmd(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--deep", action="store_true", help="allow the n=5 run")
        p.add_argument("--format", choices=("table", "json", "tsv"), default="table")
        p.add_argument("--threads", type=int, default=None, help=f"worker processes (default ${grayenum.THREADS_ENV} or 1)")
        p.add_argument("--progress", action="store_true", help="report progress on stderr")
        p.set_defaults(func=fn)
        return p

    p = table_cmd("enumerate", cmd_enumerate, "count path classes and matrices")
    p.add_argument("--all", action="store_true", help="cross-check with a full unreduced enumeration (n <= 4)")
    table_cmd("classify", cmd_classify, "path classes and matrices per character class")

    p = sub.add_parser("find", help="a cubic matrix in a given character class")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--class", dest="class_key", required=True, metavar="KEY", help="e.g. '{a}{a,b}'")
    p.set_defaults(func=cmd_find)

    p = sub.add_parser("stack", help="stack two matrices with an inserted column")
    p.add_argument("upper")
    p.add_argument("lower")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sign", type=int, choices=(0, 1), default=1)
    p.set_defaults(func=cmd_stack)
    p = matrix_cmd("weave", cmd_weave, "weave a matrix with an inserted column")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sign", type=int, choices=(0, 1), default=1)
    matrix_cmd("unstack", cmd_unstack, "split a stacked matrix (upper, blank line, lower)")
    matrix_cmd("unweave", cmd_unweave, "undo a weave")

    p = sub.add_parser("synthesize", help="build a cubic matrix with a given character")
    p.add_argument("--character", required=True, help="character JSON file")
    p.add_argument("--base-n", type=int, default=4)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--trace", help="also write the JSON construction trace here")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("random", help="a seeded random cubic matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("nested-check", help="nestedness of a character JSON")
    p.add_argument("--character", required=True)
    p.set_defaults(func=cmd_nested_check)
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    args.stderr = stderr
    try:
        out = args.func(args)
    except CliError as exc:
        stdout.write(exc.output)
        print(f"error: {exc}", file=stderr)
        return exc.code
    if isinstance(out, tuple):
        out, note = out
        print(note, file=stderr)
    stdout.write(out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
