"""Persistent store of tuning results with tiered recommendation.

One store is a single append-only file of newline-delimited JSON records
plus an in-memory index rebuilt when the store is opened. Each record is
written as one line ending in a newline and fsynced, so after a crash or
truncation the file is always a clean prefix: a trailing line without its
newline (or unparsable tail) is ignored on load, never surfaced as a
partial record. Writers serialize through an advisory flock; the design is
single-writer, multi-reader per file.

Recommendation walks three tiers of exact-field matches: (dataset, model),
then same dataset with any model, then same task on any dataset. Within a
tier records are ordered like the grid ranking (top1 desc, best_iter asc,
LD asc, canonical policy JSON).
"""

from __future__ import annotations

import fcntl
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

from .metrics import MetricReport
from .schedules import LRPolicy

TOOLKIT_VERSION = "0.1.0"


class StoreCorrupt(ValueError):
    """A non-final record in the store file failed to parse."""


@dataclass(frozen=True)
class TrialRecord:
    dataset_id: str
    model_id: str
    task: str
    policy: LRPolicy
    report: MetricReport
    seed: int
    timestamp: float | None = None
    toolkit_version: str = TOOLKIT_VERSION
    record_id: int | None = None  # assigned by the store

    def __post_init__(self) -> None:
        for name in ("dataset_id", "model_id", "task"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValueError(f"{name} must be a non-empty string")
        if not self.toolkit_version:
            raise ValueError("toolkit_version is mandatory")

    def to_dict(self) -> dict:
        return {
            "id": self.record_id,
            "dataset_id": self.dataset_id,
            "model_id": self.model_id,
            "task": self.task,
            "policy": self.policy.to_dict(),
            "report": self.report.to_dict(),
            "seed": self.seed,
            "timestamp": self.timestamp,
            "toolkit_version": self.toolkit_version,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TrialRecord":
        return cls(
            dataset_id=record["dataset_id"],
            model_id=record["model_id"],
            task=record["task"],
            policy=LRPolicy.from_dict(record["policy"]),
            report=MetricReport.from_dict(record["report"]),
            seed=record["seed"],
            timestamp=record.get("timestamp"),
            toolkit_version=record["toolkit_version"],
            record_id=record.get("id"),
        )


def _rank_key(record: TrialRecord) -> tuple:
    top1 = record.report.top1
    ld = record.report.ld
    return (
        -(top1 if math.isfinite(top1) else -math.inf),
        record.report.best_iter,
        ld if math.isfinite(ld) else math.inf,
        record.policy.to_json(),
    )


def parse_store_bytes(data: bytes) -> list[dict]:
    """Decode a store file image into complete records.

    Only full lines count; a torn final line (no newline, or junk after the
    last newline) is dropped. Parse failure anywhere before the final line
    means real corruption and raises.
    """
    lines = data.split(b"\n")
    # A well-formed file ends with a newline, so the last split element is
    # empty; anything else is a torn trailing write and is dropped. Lines
    # before the last newline were written whole, so a parse failure there
    # is genuine corruption.
    complete = lines[:-1]
    records: list[dict] = []
    for i, line in enumerate(complete):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise StoreCorrupt(f"record {i} is not valid JSON") from exc
    return records


class PolicyStore:
    def __init__(self, path):
        self.path = Path(path)
        self._records: list[TrialRecord] = []
        self._next_id = 1
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        raw = parse_store_bytes(self.path.read_bytes())
        self._records = [TrialRecord.from_dict(r) for r in raw]
        if self._records:
            self._next_id = max(r.record_id or 0 for r in self._records) + 1

    def __len__(self) -> int:
        return len(self._records)

    def put_result(self, record: TrialRecord) -> int:
        """Durably append one record; returns its monotonically increasing id."""
        record_id = self._next_id
        stamped = TrialRecord(
            dataset_id=record.dataset_id,
            model_id=record.model_id,
            task=record.task,
            policy=record.policy,
            report=record.report,
            seed=record.seed,
            timestamp=record.timestamp if record.timestamp is not None else time.time(),
            toolkit_version=record.toolkit_version,
            record_id=record_id,
        )
        line = (json.dumps(stamped.to_dict(), sort_keys=True) + "\n").encode("utf-8")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "ab") as fh:
            fcntl.flock(fh.fileno(), fcntl.LOCK_EX)
            try:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            finally:
                fcntl.flock(fh.fileno(), fcntl.LOCK_UN)
        self._records.append(stamped)
        self._next_id = record_id + 1
        return record_id

    def query(self, dataset_id: str | None = None, model_id: str | None = None,
              task: str | None = None) -> list[TrialRecord]:
        """Records matching every provided field exactly, best accuracy first."""
        hits = [
            r for r in self._records
            if (dataset_id is None or r.dataset_id == dataset_id)
            and (model_id is None or r.model_id == model_id)
            and (task is None or r.task == task)
        ]
        return sorted(hits, key=_rank_key)

    def recommend_detailed(self, dataset_id: str, model_id: str, task: str,
                           n: int) -> tuple[int | None, list[TrialRecord]]:
        """(matched tier, top-n records); tier None means nothing matched and
        the caller should fall back to a fresh range test."""
        if n < 1:
            raise ValueError("n must be >= 1")
        tiers = (
            (1, lambda r: r.dataset_id == dataset_id and r.model_id == model_id),
            (2, lambda r: r.dataset_id == dataset_id),
            (3, lambda r: r.task == task),
        )
        for tier, match in tiers:
            hits = sorted((r for r in self._records if match(r)), key=_rank_key)
            if hits:
                seen: set[str] = set()
                unique: list[TrialRecord] = []
                for r in hits:
                    key = r.policy.to_json()
                    if key not in seen:
                        seen.add(key)
                        unique.append(r)
                return tier, unique[:n]
        return None, []

    def recommend(self, dataset_id: str, model_id: str, task: str,
                  n: int) -> list[LRPolicy]:
        """Starting policies for a new job; empty means run a range test."""
        _, records = self.recommend_detailed(dataset_id, model_id, task, n)
        return [r.policy for r in records]
