"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 audit failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import ExitStack
from pathlib import Path

from .audit import audit_run
from .config import RunConfig, default_config, load_config
from .errors import AuditInputError, BistreamError
from .experiments import gen_matrix, run_table1, table1_csv, table1_means
from .matrix import format_dense_text
from .rng import Rng, entropy_seed
from .runner import run_stream
from .stream import SETTINGS
from .wire import read_events

log = logging.getLogger("bistream")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_AUDIT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bistream", description="Zero-delay bistochastic anonymization of data streams.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser(
        "run",
        help="protect a JSON-lines record stream",
        epilog="Each attribute is randomized by its own matrix and the reported beta pools their "
        "entropies. This injects more noise than one matrix over the joint category space would.",
    )
    _run_args(run)
    run.add_argument("--stats", help="also write the stats summary (JSON) to this file")

    gen = sub.add_parser("gen-matrix", help="generate a bistochastic matrix reaching a target beta")
    gen.add_argument("--size", type=int, required=True)
    gen.add_argument("--target-beta", type=float, required=True)
    gen.add_argument("--seed", type=lambda s: int(s, 0))
    gen.add_argument("--allow-zero", action="store_true", help="accept target 0 (returns the identity)")
    gen.add_argument("--output", help="matrix file (default stdout)")

    aud = sub.add_parser("audit", help="replay a run and verify its event log")
    _run_args(aud)
    aud.add_argument("--log", help="event log to verify (default: --output / config output)")

    t1 = sub.add_parser("table1", help="three-setting stream experiment, beta at r = 20..100")
    t1.add_argument("--setting", choices=[*SETTINGS, "all"], default="all")
    t1.add_argument("--seeds", type=int, default=50)
    t1.add_argument("--output", help="CSV file (default stdout)")

    st = sub.add_parser("stats", help="summarize an event log")
    st.add_argument("--input", required=True, help="event log ('-' for stdin)")
    return p


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--input", help="input records ('-' for stdin)")
    p.add_argument("--output", help="event log ('-' for stdout)")
    p.add_argument("--seed", type=lambda s: int(s, 0))
    p.add_argument("--setting", choices=list(SETTINGS), help="policy preset when no --config is given")
    p.add_argument("--attr", default="value", help="attribute name when no --config is given")


def _load(args) -> RunConfig:
    if args.config:
        path = Path(args.config)
        cfg = load_config(path.read_text(), base_dir=path.parent)
    else:
        cfg = default_config(args.attr, args.setting)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.input:
        cfg.input = args.input
    if getattr(args, "output", None):
        cfg.output = args.output
    return cfg


def _open_in(stack: ExitStack, path: str | None):
    if path in (None, "-"):
        return sys.stdin
    return stack.enter_context(open(path, encoding="utf-8"))


def _open_out(stack: ExitStack, path: str | None):
    if path in (None, "-"):
        return sys.stdout
    return stack.enter_context(open(path, "w", encoding="utf-8"))


def cmd_run(args) -> int:
    cfg = _load(args)
    if cfg.seed is None:
        cfg.seed = entropy_seed()
        log.warning("no --seed given; drew seed=%d from system entropy", cfg.seed)
    specs = cfg.specs(cfg.seed)
    with ExitStack() as stack:
        src = _open_in(stack, cfg.input)
        out = _open_out(stack, cfg.output)
        stats, _ = run_stream(specs, cfg.seed, src, out.write, out.flush)
    summary = json.dumps(stats.as_dict())
    print(summary, file=sys.stderr)
    if args.stats:
        Path(args.stats).write_text(summary + "\n")
    return EXIT_OK


def cmd_gen_matrix(args) -> int:
    seed = args.seed if args.seed is not None else entropy_seed()
    if args.seed is None:
        log.warning("no --seed given; drew seed=%d from system entropy", seed)
    m, beta = gen_matrix(args.size, args.target_beta, Rng(seed), allow_zero=args.allow_zero)
    text = f"# r={m.r} target_beta={args.target_beta} achieved_beta={beta:.6f} seed={seed}\n"
    text += format_dense_text(m.to_dense())
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"achieved beta {beta:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _load(args)
    log_path = args.log or cfg.output
    if cfg.seed is None:
        raise AuditInputError("audit needs the run's seed (--seed or [run] seed)")
    if cfg.input in (None, "-") or log_path in (None, "-"):
        raise AuditInputError("audit needs both the input records and the event log as files")
    try:
        input_lines = Path(cfg.input).read_text(encoding="utf-8").splitlines(keepends=True)
        log_lines = Path(log_path).read_bytes().splitlines(keepends=True)
    except OSError as exc:
        raise AuditInputError(str(exc)) from None
    result = audit_run(cfg.specs(cfg.seed), cfg.seed, input_lines, log_lines)
    print(result.verdict)
    for msg in result.failures:
        print(f"  {msg}")
    if not result.dense_checked:
        print("  (dense re-derivation skipped: run too large)")
    return EXIT_OK if result.passed else EXIT_AUDIT


def cmd_table1(args) -> int:
    settings = list(SETTINGS) if args.setting == "all" else [args.setting]
    rows = []
    for s in settings:
        rows.extend(run_table1(s, args.seeds))
        means = table1_means(rows[-(args.seeds + 1) * 5:])
        print(f"setting {s}: " + "  ".join(f"r={cp} {b:.3f}" for cp, b in means.items()), file=sys.stderr)
    text = table1_csv(rows)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args) -> int:
    with ExitStack() as stack:
        events = read_events(_open_in(stack, args.input))
    last: dict[str, float] = {}
    for e in events:
        last[e.attr] = e.beta
    summary = {
        "events": len(events),
        "releases": sum(e.kind == "release" for e in events),
        "updates": sum(e.kind == "update" for e in events),
        "last_t": max((e.t for e in events), default=0),
        "final_beta": last,
    }
    print(json.dumps(summary))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "gen-matrix": cmd_gen_matrix,
    "audit": cmd_audit,
    "table1": cmd_table1,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except BistreamError as exc:
        print(f"bistream: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"bistream: io-error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
