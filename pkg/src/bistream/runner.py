"""Record-by-record driver used by ``bistream run`` and the audit."""
from __future__ import annotations

import resource
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import BistreamError
from .multi import AttributeSpec, MultiStream
from .wire import parse_record, serialize_event


@dataclass
class RunStats:
    seed: int
    arrivals: int = 0
    events: int = 0
    unpublished: int = 0
    final_beta: dict[str, float] = field(default_factory=dict)
    aggregate_beta: float = 0.0
    wall_time_s: float = 0.0
    matrix_nnz: int = 0
    matrix_bytes: int = 0
    peak_rss_kb: int = 0

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "arrivals": self.arrivals,
            "events": self.events,
            "unpublished_seed_records": self.unpublished,
            "final_beta": {k: round(v, 6) for k, v in self.final_beta.items()},
            "aggregate_beta": round(self.aggregate_beta, 6),
            "wall_time_s": round(self.wall_time_s, 3),
            "matrix_nnz": self.matrix_nnz,
            "matrix_bytes": self.matrix_bytes,
            "peak_rss_kb": self.peak_rss_kb,
        }


def _with_line(exc: BistreamError, lineno: int) -> BistreamError:
    if not str(exc).startswith("line "):
        exc.args = (f"line {lineno}: {exc}",)
    exc.lineno = lineno
    return exc


def run_stream(
    specs: Sequence[AttributeSpec],
    seed: int,
    lines: Iterable[str],
    write: Callable[[str], object],
    flush: Callable[[], object] | None = None,
    record: bool = False,
) -> tuple[RunStats, MultiStream]:
    """Protect ``lines`` one at a time, writing each arrival's events before reading on.

    Errors are re-raised with the offending input line number.
    """
    start = time.perf_counter()
    stream = MultiStream(specs, seed, record=record)
    stats = RunStats(seed=seed)
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            id, values = parse_record(line, specs, lineno)
            events = stream.ingest_multi(id, values)
        except BistreamError as exc:
            raise _with_line(exc, lineno)
        stats.arrivals += 1
        for e in events:
            write(serialize_event(e) + "\n")
        stats.events += len(events)
        if flush is not None:
            flush()
    stats.unpublished = len(stream.pending)
    if stream.started:
        stats.final_beta = stream.per_attribute_beta()
        stats.aggregate_beta = stream.current_beta()
        mats = [eng.matrix for eng in stream.engines.values()]
        stats.matrix_nnz = sum(m.nnz for m in mats)
        stats.matrix_bytes = sum(m.memory_bytes() for m in mats)
    stats.wall_time_s = time.perf_counter() - start
    stats.peak_rss_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return stats, stream
