"""Benchmark harness: warmup + measurement iterations per (scenario, strategy).

A scenario is a query file whose ``model:`` entry is either a path (relative
to the query file) or a generator reference ``gen:binary-tree:<h>`` /
``gen:abt:<h>``.  Each check runs under its own deadline; a check that
misses it yields a row with ``timeout=true`` and ``N/A`` timings.
"""

from __future__ import annotations

import csv
import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .checker import CausalQuery, Strategy, check_cause
from .dsl import parse_model, parse_query_document, resolve_query
from .errors import CheckTimeout, HpCauseError
from .generators import generate_abt, generate_binary_tree

log = logging.getLogger(__name__)

DEFAULT_WARMUP = 100
DEFAULT_MEASURE = 100
DEFAULT_TIMEOUT = 300.0
TIMEOUT_ENV = "HPCAUSE_TIMEOUT_SECS"

CSV_COLUMNS = ("scenario", "strategy", "ac1", "ac2", "ac3", "w_size", "mean_ns", "stddev_ns", "iters", "timeout")


def default_timeout() -> float:
    env = os.environ.get(TIMEOUT_ENV)
    if env:
        try:
            value = float(env)
        except ValueError:
            raise HpCauseError(f"{TIMEOUT_ENV} must be a number, got {env!r}") from None
        if value <= 0:
            raise HpCauseError(f"{TIMEOUT_ENV} must be positive")
        return value
    return DEFAULT_TIMEOUT


@dataclass(frozen=True)
class Scenario:
    id: str
    query: CausalQuery


@dataclass(frozen=True)
class BenchRecord:
    scenario: str
    strategy: str
    ac1: Optional[bool]
    ac2: Optional[bool]
    ac3: Optional[bool]
    w_size: Optional[int]
    mean_ns: Optional[float]
    stddev_ns: Optional[float]
    iters: int
    timeout: bool
    error: Optional[str] = None

    def row(self) -> list:
        def verdict(v):
            if v is None:
                return "error" if self.error else "N/A"
            return "true" if v else "false"

        def num(x, fmt):
            return "N/A" if x is None else fmt.format(x)

        return [
            self.scenario,
            self.strategy,
            verdict(self.ac1),
            verdict(self.ac2),
            verdict(self.ac3),
            "N/A" if self.w_size is None else str(self.w_size),
            num(self.mean_ns, "{:.0f}"),
            num(self.stddev_ns, "{:.0f}"),
            str(self.iters),
            "true" if self.timeout else "false",
        ]


def load_model_ref(ref: str, base: Path):
    if ref.startswith("gen:"):
        parts = ref.split(":")
        if len(parts) != 3 or parts[1] not in ("binary-tree", "abt"):
            raise HpCauseError(f"bad generator reference {ref!r}")
        try:
            height = int(parts[2])
        except ValueError:
            raise HpCauseError(f"bad generator height in {ref!r}") from None
        gen = generate_binary_tree if parts[1] == "binary-tree" else generate_abt
        try:
            return gen(height)
        except ValueError as e:
            raise HpCauseError(str(e)) from None
    path = Path(ref)
    if not path.is_absolute():
        path = base / path
    return parse_model(path.read_text(encoding="utf-8"))


def load_scenario(path) -> Scenario:
    path = Path(path)
    doc = parse_query_document(path.read_text(encoding="utf-8"))
    if not doc.model_ref:
        raise HpCauseError(f"{path}: scenario has no 'model' entry")
    model = load_model_ref(doc.model_ref, path.parent)
    return Scenario(doc.id or path.stem, resolve_query(doc, model))


def run_scenario(
    scenario: Scenario,
    strategy: Strategy,
    warmup: int = DEFAULT_WARMUP,
    measure: int = DEFAULT_MEASURE,
    timeout: Optional[float] = None,
) -> BenchRecord:
    """Run ``warmup`` unrecorded and ``measure`` recorded checks."""
    if measure < 1:
        raise ValueError("measurement iterations must be positive")
    if warmup < 0:
        raise ValueError("warmup iterations must be non-negative")
    timeout = default_timeout() if timeout is None else timeout
    q = scenario.query.with_strategy(strategy)
    samples = []
    result = None

    def record(**kw):
        return BenchRecord(scenario.id, strategy.value, iters=measure, **kw)

    try:
        for i in range(warmup + measure):
            start = time.perf_counter_ns()
            # brute force runs without a subset budget here; the deadline bounds it
            result = check_cause(q, budget=None, deadline=time.monotonic() + timeout)
            elapsed = time.perf_counter_ns() - start
            if i >= warmup:
                samples.append(elapsed)
    except CheckTimeout:
        return record(ac1=None, ac2=None, ac3=None, w_size=None, mean_ns=None, stddev_ns=None, timeout=True)
    except HpCauseError as e:
        log.error("scenario %s, strategy %s: %s", scenario.id, strategy.value, e)
        return record(ac1=None, ac2=None, ac3=None, w_size=None, mean_ns=None, stddev_ns=None,
                      timeout=False, error=str(e))
    return record(
        ac1=result.ac1,
        ac2=result.ac2,
        ac3=result.ac3,
        w_size=None if result.w is None else len(result.w),
        mean_ns=statistics.fmean(samples),
        stddev_ns=statistics.stdev(samples) if len(samples) > 1 else 0.0,
        timeout=False,
    )


def _run_file(args) -> list:
    path, strategies, warmup, measure, timeout = args
    try:
        scenario = load_scenario(path)
    except (HpCauseError, OSError) as e:
        log.error("%s: %s", path, e)
        sid = Path(path).stem
        return [BenchRecord(sid, s.value, None, None, None, None, None, None, measure, False, str(e))
                for s in strategies]
    return [run_scenario(scenario, s, warmup, measure, timeout) for s in strategies]


def run_bench(
    paths: Sequence,
    strategies: Sequence[Strategy],
    warmup: int = DEFAULT_WARMUP,
    measure: int = DEFAULT_MEASURE,
    timeout: Optional[float] = None,
    jobs: int = 1,
) -> list:
    """One record per (scenario, strategy), in input order."""
    timeout = default_timeout() if timeout is None else timeout
    tasks = [(str(p), tuple(strategies), warmup, measure, timeout) for p in paths]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_file, tasks))
    else:
        chunks = [_run_file(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def write_csv(records: Iterable[BenchRecord], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
