"""Replay a finished run and check its event log.

Two independent checks:

1. the run is repeated from its inputs and seed, and the regenerated log must
   match the submitted one byte for byte;
2. for runs small enough to densify (every numeric matrix at most
   ``DENSE_LIMIT`` individuals), the matrix trail is folded with the dense
   oracle, every logged beta is re-derived from scratch, and the final
   protected values are reconstructed from the raw inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import oracle
from .errors import BistreamError, MalformedLog, ParseError
from .multi import AttributeSpec, MultiStream
from .runner import run_stream
from .wire import parse_event, parse_record

DENSE_LIMIT = 200
BETA_TOL = 1e-9
# logged betas carry 6 decimals
BETA_ROUNDING = 0.5e-6


@dataclass
class AuditResult:
    passed: bool = True
    failures: list[str] = field(default_factory=list)
    dense_checked: bool = False

    def fail(self, message: str) -> None:
        self.passed = False
        self.failures.append(message)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def first_divergence(self) -> str | None:
        return self.failures[0] if self.failures else None


def compare_logs(expected: Sequence[bytes], got: Sequence[bytes], result: AuditResult) -> None:
    for n, (a, b) in enumerate(zip(expected, got), 1):
        if a != b:
            result.fail(f"log line {n} differs: expected {a.decode(errors='replace').rstrip()} "
                        f"got {b.decode(errors='replace').rstrip()}")
            return
    if len(expected) != len(got):
        result.fail(f"log has {len(got)} lines, replay produced {len(expected)}")


def audit_run(
    specs: Sequence[AttributeSpec],
    seed: int,
    input_lines: Sequence[str],
    log_lines: Sequence[bytes],
) -> AuditResult:
    result = AuditResult()
    replay: list[bytes] = []
    _, stream = run_stream(specs, seed, input_lines, lambda s: replay.append(s.encode()), record=True)
    compare_logs(replay, list(log_lines), result)

    try:
        events = [parse_event(line.decode(), n) for n, line in enumerate(log_lines, 1) if line.strip()]
    except (ParseError, UnicodeDecodeError) as exc:
        result.fail(f"event log unreadable: {exc}")
        return result
    numeric_sizes = [eng.matrix.r for s, eng in _engines(stream) if s.kind == "numeric"]
    if stream.started and all(r <= DENSE_LIMIT for r in numeric_sizes):
        result.dense_checked = True
        try:
            _dense_checks(specs, stream, input_lines, events, result)
        except BistreamError as exc:
            result.fail(f"dense check aborted: {exc}")
    return result


def _engines(stream: MultiStream):
    return [(s, stream.engines[s.name]) for s in stream.specs if s.name in stream.engines]


def _dense_checks(specs, stream: MultiStream, input_lines, events, result: AuditResult) -> None:
    dense = {s.name: s.seed_matrix.to_dense() for s in specs}
    hist = {s.name: stream.engines[s.name].history for s in specs}
    seed_n = max(stream.seed_size, 1)

    def brute_beta() -> float:
        h = h_max = 0.0
        for a in dense.values():
            h += oracle.brute_entropy_rate(a)
            h_max += math.log(a.shape[0], 2) if a.shape[0] > 1 else 0.0
        return h / h_max if h_max > 0 else 0.0

    def step(name: str, ops) -> None:
        dense[name] = oracle.fold(dense[name], ops)

    for s in specs:
        if s.kind == "categorical":
            for ops in hist[s.name][:seed_n]:
                step(s.name, ops)
    expected = {t: brute_beta() for t in range(1, seed_n + 1)}
    for t in range(seed_n + 1, stream.t + 1):
        for s in specs:
            h = hist[s.name]
            step(s.name, h[t - seed_n - 1] if s.kind == "numeric" else h[t - 1])
        expected[t] = brute_beta()

    for n, e in enumerate(events, 1):
        want = expected.get(e.t)
        if want is None:
            result.fail(f"event {n} ({e.kind} {e.id}) has t = {e.t} outside the run")
            return
        if abs(e.beta - want) > BETA_ROUNDING + BETA_TOL:
            result.fail(f"event {n} ({e.kind} {e.id}, t = {e.t}) reports beta {e.beta}, re-derived {want:.9f}")
            return

    raw: dict[str, list[float]] = {s.name: [] for s in specs if s.kind == "numeric"}
    for lineno, line in enumerate(input_lines, 1):
        if line.strip():
            _, values = parse_record(line, specs, lineno)
            for name in raw:
                raw[name].append(values[name])
    for name, xs in raw.items():
        mine = [e for e in events if e.attr == name]
        try:
            ok = oracle.reconstruct_check(xs, mine, dense[name])
        except MalformedLog as exc:
            result.fail(f"attribute {name!r}: {exc}")
            continue
        if not ok:
            result.fail(f"attribute {name!r}: published values do not match P' x of the raw inputs")
