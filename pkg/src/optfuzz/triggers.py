"""Trigger log parsing and campaign trigger statistics."""

from __future__ import annotations

import json
import logging
import threading
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

from .sut.base import TRIGGER_PREFIX

log = logging.getLogger(__name__)


def parse_trigger_log(lines: Iterable[str]) -> set[str]:
    """Names from ``WFOPT <name>`` lines; everything else is ignored."""
    names = set()
    for line in lines:
        if isinstance(line, bytes):
            line = line.decode("utf-8", "replace")
        line = line.rstrip("\r\n")
        if line.startswith(TRIGGER_PREFIX):
            name = line[len(TRIGGER_PREFIX):].strip()
            if name:
                names.add(name)
    return names


@dataclass(frozen=True)
class TriggerRecord:
    test_id: str
    triggered: frozenset[str]
    iteration: int
    target: str = ""
    unknown: frozenset[str] = frozenset()

    @property
    def hit(self) -> bool:
        """Whether the test triggered the optimization it was generated for."""
        return self.target in self.triggered

    def to_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "iteration": self.iteration,
            "target": self.target,
            "triggered": sorted(self.triggered),
            "unknown": sorted(self.unknown),
        }


def make_record(test_id: str, lines, iteration: int, target: str = "", catalog: set[str] | None = None) -> TriggerRecord:
    names = parse_trigger_log(lines)
    unknown = frozenset(names - catalog) if catalog is not None else frozenset()
    if unknown:
        log.warning("test %s reported unknown optimizations %s", test_id, sorted(unknown))
    return TriggerRecord(test_id, frozenset(names), iteration, target, unknown)


def campaign_metrics(records: Iterable[TriggerRecord], target: str) -> tuple[int, int]:
    """``(triggered_opt_count, triggering_tests)`` for ``target``."""
    distinct = set()
    hits = 0
    for r in records:
        distinct |= r.triggered
        if target in r.triggered:
            hits += 1
    return len(distinct), hits


@dataclass
class TriggerStats:
    """Campaign-wide aggregator; safe for concurrent ``submit`` calls.

    ``triggering`` counts tests that hit the optimization they were generated
    for (the bandit's notion of success); ``incidental`` counts hits on any
    other optimization.
    """

    catalog: list[str]
    triggering: Counter = field(default_factory=Counter)
    incidental: Counter = field(default_factory=Counter)
    tests: Counter = field(default_factory=Counter)
    distinct: set = field(default_factory=set)
    series: list = field(default_factory=list)

    def __post_init__(self):
        self._lock = threading.Lock()

    def submit(self, record: TriggerRecord) -> None:
        with self._lock:
            self.tests[record.target] += 1
            self.distinct |= record.triggered
            for name in record.triggered:
                if name == record.target:
                    self.triggering[name] += 1
                else:
                    self.incidental[name] += 1

    def close_iteration(self, iteration: int) -> dict:
        with self._lock:
            row = {
                "iteration": iteration,
                "triggered_opt_count": len(self.distinct),
                "triggered": sorted(self.distinct),
                "triggering_tests": {n: self.triggering[n] for n in self.catalog},
                "incidental": {n: self.incidental[n] for n in sorted(self.incidental)},
                "tests": {n: self.tests[n] for n in self.catalog},
            }
            self.series.append(row)
            return row

    @property
    def triggered_opt_count(self) -> int:
        return len(self.distinct)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for row in self.series:
                f.write(json.dumps(row, sort_keys=True) + "\n")

    def state(self) -> dict:
        return {
            "triggering": dict(self.triggering),
            "incidental": dict(self.incidental),
            "tests": dict(self.tests),
            "distinct": sorted(self.distinct),
            "series": self.series,
        }

    @classmethod
    def from_state(cls, catalog: list[str], state: dict) -> "TriggerStats":
        return cls(
            catalog,
            Counter(state["triggering"]),
            Counter(state["incidental"]),
            Counter(state["tests"]),
            set(state["distinct"]),
            list(state["series"]),
        )
