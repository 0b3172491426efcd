"""Command-line front end: ``scalarbp {gen-code,decode,simulate,bench-checknode}``.

Every subcommand accepts ``--config FILE``, a flat ``key = value`` file whose
keys are the long option names (``max-iter`` or ``max_iter``).  Flags given on
the command line override the file.  Exit codes: 0 success, 1 configuration
error, 2 decoder failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import os
import sys
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .bp4_reference import decode_bp4_vector, horizontal_vector
from .bp4_scalar import DecoderConfig, ScalarBp4Decoder, depolarizing_priors, horizontal_check_counted
from .code_factory import BUILTIN_CODES, DELETIONS, BicycleParams, build_bicycle, builtin_code, write_bicycle
from .pauli_core import CheckMatrix, CodeFormatError, PauliString, format_code, parse_code, syndrome
from .sim_harness import CSV_FIELDS, DECODERS, ChannelParams, StopRule, classify, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAIL = 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for decode failures here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------

def _list_of(conv, name):
    def parse(text):
        items = [t.strip() for t in str(text).split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError(f"empty {name} list")
        try:
            return [conv(t) for t in items]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {name} list {text!r}") from None
    parse.__name__ = f"{name}_list"
    return parse


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


float_list = _list_of(float, "float")
schedule_list = _list_of(str, "schedule")


# ---------------------------------------------------------------------------
# config file
# ---------------------------------------------------------------------------

def read_config(path: str) -> list[tuple[int, str, str]]:
    """Parse a flat ``key = value`` file into (line, key, value) triples."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}: line {lineno}: empty key")
        entries.append((lineno, key.replace("-", "_"), value))
    return entries


def _apply_config(parser: argparse.ArgumentParser, path: str) -> None:
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for lineno, key, value in read_config(path):
        action = actions.get(key)
        if action is None:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        if action.nargs == 0:
            conv = _bool
        else:
            conv = action.type or str
        try:
            val = conv(value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"{path}: line {lineno}: bad value for {key!r}: {exc}") from None
        if action.choices is not None and val not in action.choices:
            raise ConfigError(f"{path}: line {lineno}: {key!r} must be one of {sorted(action.choices)}")
        defaults[key] = val
    parser.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def resolve_code(name: str) -> tuple[CheckMatrix, str]:
    """A builtin name or a code file path; returns the code and its text."""
    if name in BUILTIN_CODES:
        S = builtin_code(name)
        return S, format_code(S)
    try:
        with open(name) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read code {name}: {exc.strerror}") from None
    try:
        return parse_code(text), text
    except CodeFormatError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _require(args, *names) -> None:
    # checked after the config file is merged, so either source may supply them
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"missing required setting(s): {', '.join(missing)}")


def _decoder_config(args, schedule=None, alpha_v=None, trace=False) -> DecoderConfig:
    try:
        return DecoderConfig(schedule=schedule or args.schedule, alpha_v=alpha_v or args.alpha_v,
                             max_iter=args.max_iter, clamp_eps=args.clamp_eps, trace=trace)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _add_decoder_flags(p, multi: bool):
    if multi:
        p.add_argument("--schedule", type=schedule_list, default=["parallel"],
                       help="comma-separated schedules (parallel, serial)")
        p.add_argument("--alpha-v", type=float_list, default=[1.0], help="comma-separated alpha_v values")
    else:
        p.add_argument("--schedule", choices=("parallel", "serial"), default="parallel")
        p.add_argument("--alpha-v", type=float, default=1.0)
    p.add_argument("--decoder", choices=DECODERS, default="bp4")
    p.add_argument("--max-iter", type=_positive_int, default=100)
    p.add_argument("--clamp-eps", type=float, default=1e-12)


# ---------------------------------------------------------------------------
# gen-code
# ---------------------------------------------------------------------------

def cmd_gen_code(args, out) -> int:
    try:
        params = BicycleParams(n=args.n, row_weight=args.row_weight, target_checks=args.checks,
                               deletion=args.deletion, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    code = build_bicycle(params)
    meta_path = write_bicycle(code, args.out)
    meta = code.metadata()
    print(f"wrote {args.out} and {meta_path}", file=out)
    print(f"[[{code.S.num_qubits},{meta['k']}]] rank {meta['rank']}, {code.S.num_checks} checks, "
          f"rows commute", file=out)
    print(f"column weights (variance {meta['column_weight_variance']:.4f}):", file=out)
    for w, c in meta["column_weight_histogram"].items():
        print(f"  {w:>3}: {c}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------

def _read_pauli_file(path: str) -> str:
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if len(lines) != 1:
        raise ConfigError(f"{path}: expected exactly one non-comment line")
    return lines[0]


def _parse_syndrome(text: str, m: int) -> np.ndarray:
    text = text.strip()
    if len(text) != m or set(text) - {"0", "1"}:
        raise ConfigError(f"syndrome must be {m} characters over {{0,1}}, got {text!r}")
    return np.array([int(c) for c in text], dtype=np.uint8)


def cmd_decode(args, out) -> int:
    _require(args, "code")
    S, _ = resolve_code(args.code)
    sources = [args.syndrome, args.syndrome_file, args.error, args.error_file]
    if sum(s is not None for s in sources) != 1:
        raise ConfigError("give exactly one of --syndrome, --syndrome-file, --error, --error-file")
    E = None
    if args.error is not None or args.error_file is not None:
        text = args.error if args.error is not None else _read_pauli_file(args.error_file)
        try:
            E = PauliString(text.strip())
        except ValueError as exc:
            raise ConfigError(f"bad error string: {exc}") from None
        if len(E) != S.num_qubits:
            raise ConfigError(f"error has length {len(E)}, code has {S.num_qubits} qubits")
        z = syndrome(S, E)
    else:
        text = args.syndrome if args.syndrome is not None else _read_pauli_file(args.syndrome_file)
        z = _parse_syndrome(text, S.num_checks)
    if not 0 <= args.epsilon < 1:
        raise ConfigError("epsilon must be in [0, 1)")
    priors = depolarizing_priors(S.num_qubits, args.epsilon)
    config = _decoder_config(args, trace=args.trace)
    if args.decoder == "bp4":
        outcome = ScalarBp4Decoder(S, config).decode(z, priors)
    else:
        outcome = decode_bp4_vector(S, z, priors, config.max_iter, trace=args.trace, schedule=config.schedule)
    if args.trace:
        print(outcome.format_trace(), file=out)
    print(f"syndrome    {''.join(map(str, z))}", file=out)
    print(f"estimate    {outcome.estimate}", file=out)
    print(f"converged   {'yes' if outcome.converged else 'no'}", file=out)
    print(f"iterations  {outcome.iterations}", file=out)
    if E is not None:
        print(f"outcome     {classify(S, E, outcome)}", file=out)
    print("SUCCESS" if outcome.converged else "FAIL", file=out)
    return EXIT_OK if outcome.converged else EXIT_FAIL


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _row_key(row: dict) -> tuple:
    return (float(row["epsilon"]), row["decoder"], row["schedule"], float(row["alpha_v"]))


def read_csv_rows(path: str) -> tuple[list[str], list[dict]]:
    """Return (comment lines, data rows) of a simulate CSV."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        return header, []
    reader = csv.DictReader(io.StringIO("\n".join(body) + "\n"))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ConfigError(f"{path}: unexpected CSV columns {reader.fieldnames}")
    return header, list(reader)


def best_alpha(rows: Sequence[dict]) -> list[dict]:
    """Per (epsilon, decoder, schedule), the row with the lowest logical error rate.

    Ties go to the smaller alpha_v.
    """
    best: dict[tuple, dict] = {}
    for row in rows:
        key = (float(row["epsilon"]), row["decoder"], row["schedule"])
        rank = (float(row["logical_error_rate"]), float(row["alpha_v"]))
        cur = best.get(key)
        if cur is None or rank < (float(cur["logical_error_rate"]), float(cur["alpha_v"])):
            best[key] = row
    return [best[k] for k in sorted(best)]


def _format_csv(header: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _provenance(args, code_text: str) -> list[str]:
    digest = hashlib.sha256(code_text.encode()).hexdigest()
    fixed = [
        ("code", args.code),
        ("code_sha256", digest),
        ("decoder", args.decoder),
        ("max_iter", args.max_iter),
        ("clamp_eps", repr(args.clamp_eps)),
        ("seed", args.seed),
        ("min_errors", args.min_errors),
        ("max_trials", args.max_trials),
    ]
    return [f"# scalarbp {__version__} simulate"] + [f"# {k} = {v}" for k, v in fixed]


def cmd_simulate(args, out) -> int:
    _require(args, "code", "epsilon")
    S, code_text = resolve_code(args.code)
    for s in args.schedule:
        if s not in ("parallel", "serial"):
            raise ConfigError(f"unknown schedule {s!r}")
    for e in args.epsilon:
        if not 0 <= e < 1:
            raise ConfigError(f"epsilon must be in [0, 1), got {e}")
    if args.threads < 1:
        raise ConfigError("threads must be >= 1")
    try:
        stop = StopRule(args.min_errors, args.max_trials)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    header = _provenance(args, code_text)
    rows: list[dict] = []
    if args.out and os.path.exists(args.out):
        old_header, rows = read_csv_rows(args.out)
        if old_header and old_header != header:
            raise ConfigError(f"{args.out} was produced with a different configuration; "
                              f"refusing to resume (remove it or change --out)")
    done = {_row_key(r) for r in rows}
    points = [(eps, sched, alpha) for eps in args.epsilon for sched in args.schedule for alpha in args.alpha_v]
    for eps, sched, alpha in points:
        key = (float(eps), args.decoder, sched, float(alpha))
        if key in done:
            print(f"skip  eps={eps} {sched} alpha_v={alpha} (already present)", file=sys.stderr)
            continue
        config = _decoder_config(args, schedule=sched, alpha_v=alpha)
        t0 = time.perf_counter()
        result = run_experiment(S, ChannelParams(eps, args.seed), config, stop, decoder=args.decoder,
                                threads=args.threads)
        row = result.csv_row()
        rows.append(row)
        done.add(key)
        flag = " (max trials reached)" if result.hit_max_trials else ""
        print(f"done  eps={eps} {sched} alpha_v={alpha}: {row['logical_errors']}/{row['trials']} "
              f"rate {row['logical_error_rate']} [{row['ci_low']}, {row['ci_high']}]{flag} "
              f"{time.perf_counter() - t0:.1f}s", file=sys.stderr)
        if args.out:
            _write_atomic(args.out, _format_csv(header, _ordered(rows)))
    rows = _ordered(rows)
    if not args.out:
        out.write(_format_csv(header, rows))
    if args.best_alpha:
        print("# best alpha_v per epsilon", file=out)
        out.write(_format_csv([], best_alpha(rows)))
    return EXIT_OK


def _ordered(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=_row_key)


# ---------------------------------------------------------------------------
# bench-checknode
# ---------------------------------------------------------------------------

@dataclass
class BenchRow:
    degree: int
    checks: int
    scalar_mults: int
    mult_bound: int
    scalar_seconds: float
    oracle_seconds: float
    max_abs_diff: float

    @property
    def speedup(self) -> float:
        return self.oracle_seconds / self.scalar_seconds if self.scalar_seconds > 0 else float("inf")


def bench_checknode(degree: int = 8, checks: int = 200, seed: int = 0) -> BenchRow:
    """Time one horizontal step per check: scalar prefix/suffix vs 4^k enumeration.

    Both sides are given the same random incoming beliefs; the scalar result
    is checked against the collapsed oracle output.
    """
    rng = np.random.default_rng(seed)
    q = rng.dirichlet(np.ones(4), size=(checks, degree))
    paulis = rng.integers(1, 4, size=(checks, degree))
    zs = rng.integers(0, 2, size=checks)
    # the scalar side consumes the collapsed differences only
    anti = np.array([[0, 0, 0, 0], [0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]], dtype=bool)
    d_in = np.empty((checks, degree))
    for c in range(checks):
        for i in range(degree):
            a = anti[paulis[c, i]]
            d_in[c, i] = q[c, i, ~a].sum() - q[c, i, a].sum()
    d_rows = [list(r) for r in d_in]

    t0 = time.perf_counter()
    scalar_out = []
    mults = 0
    for c in range(checks):
        deltas, k = horizontal_check_counted(d_rows[c], int(zs[c]))
        scalar_out.append(deltas)
        mults = max(mults, k)
    t_scalar = time.perf_counter() - t0

    t0 = time.perf_counter()
    oracle_out = [horizontal_vector(q[c], paulis[c], int(zs[c])) for c in range(checks)]
    t_oracle = time.perf_counter() - t0

    diff = 0.0
    for c in range(checks):
        r = oracle_out[c]
        for i in range(degree):
            a = anti[paulis[c, i]]
            r0, r1 = r[i, ~a][0], r[i, a][0]
            diff = max(diff, abs((r0 - r1) / (r0 + r1) - scalar_out[c][i]))
    return BenchRow(degree, checks, mults, 3 * degree, t_scalar, t_oracle, diff)


def cmd_bench_checknode(args, out) -> int:
    print(f"{'degree':>6} {'checks':>6} {'mults':>5} {'3k':>4} {'scalar s/check':>15} "
          f"{'oracle s/check':>15} {'speedup':>9} {'max |diff|':>11}", file=out)
    for k in args.degree:
        if k < 1 or k > 10:
            raise ConfigError(f"degree must be in [1, 10], got {k}")
        row = bench_checknode(k, args.checks, args.seed)
        print(f"{row.degree:>6} {row.checks:>6} {row.scalar_mults:>5} {row.mult_bound:>4} "
              f"{row.scalar_seconds / row.checks:>15.3e} {row.oracle_seconds / row.checks:>15.3e} "
              f"{row.speedup:>8.1f}x {row.max_abs_diff:>11.2e}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scalarbp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-code", help="construct a bicycle code")
    p.add_argument("--config")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--row-weight", type=int, default=16)
    p.add_argument("--checks", type=int, default=224)
    p.add_argument("--deletion", choices=DELETIONS, default="min_var")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="bicycle.code")
    p.set_defaults(func=cmd_gen_code)

    p = sub.add_parser("decode", help="decode one syndrome")
    p.add_argument("--config")
    p.add_argument("--code", help="code file or builtin name " + "/".join(sorted(BUILTIN_CODES)))
    p.add_argument("--syndrome")
    p.add_argument("--syndrome-file")
    p.add_argument("--error", help="Pauli string; its syndrome is decoded")
    p.add_argument("--error-file")
    p.add_argument("--epsilon", type=float, default=0.1, help="depolarizing prior")
    p.add_argument("--trace", action="store_true")
    _add_decoder_flags(p, multi=False)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte-Carlo sweep over epsilon x schedule x alpha_v")
    p.add_argument("--config")
    p.add_argument("--code", help="code file or builtin name")
    p.add_argument("--epsilon", type=float_list, help="comma-separated error rates")
    _add_decoder_flags(p, multi=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-trials", type=int, default=100_000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="CSV path; existing rows are kept and skipped")
    p.add_argument("--best-alpha", action="store_true", help="also print the best alpha_v row per epsilon")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench-checknode", help="scalar vs enumeration check-node timing")
    p.add_argument("--config")
    p.add_argument("--degree", type=_list_of(int, "degree"), default=[4, 6, 8])
    p.add_argument("--checks", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench_checknode)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = parser.parse_args(argv)
        if getattr(pre, "config", None):
            _apply_config(_subparser(parser, pre.command), pre.config)
            args = parser.parse_args(argv)
        else:
            args = pre
        return args.func(args, out)
    except ConfigError as exc:
        print(f"scalarbp: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
