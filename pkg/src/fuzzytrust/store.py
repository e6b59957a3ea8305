"""Append-only trust record store.

One JSON record per line with an explicit version field; the latest
record per subject wins.  A single writer appends under a lock while
readers see a consistent in-memory index.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import NotFoundError, StoreCorruptError

RECORD_VERSION = 1

SUBJECT_KINDS = ("user", "provider")
CLASSIFICATIONS = ("trusted", "untrusted", "banned")
MODELS = ("baseline", "fis")


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class TrustRecord:
    subject_id: str
    subject_kind: str
    trust: float
    classification: str
    model: str
    evaluated_at: str  # ISO-8601

    def __post_init__(self):
        if not self.subject_id:
            raise ValueError("subject_id must be non-empty")
        if self.subject_kind not in SUBJECT_KINDS:
            raise ValueError(f"subject_kind must be one of {SUBJECT_KINDS}, got {self.subject_kind!r}")
        if self.classification not in CLASSIFICATIONS:
            raise ValueError(f"classification must be one of {CLASSIFICATIONS}, got {self.classification!r}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if not (0.0 <= self.trust <= 1.0):
            raise ValueError(f"trust must lie in [0, 1], got {self.trust}")

    def to_dict(self) -> dict:
        return {
            "v": RECORD_VERSION,
            "subject_id": self.subject_id,
            "subject_kind": self.subject_kind,
            "trust": self.trust,
            "classification": self.classification,
            "model": self.model,
            "evaluated_at": self.evaluated_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrustRecord":
        return cls(
            subject_id=data["subject_id"],
            subject_kind=data["subject_kind"],
            trust=float(data["trust"]),
            classification=data["classification"],
            model=data["model"],
            evaluated_at=data["evaluated_at"],
        )


class TrustStore:
    """Line-delimited record log backed by an in-memory latest-per-subject
    index.  Opening scans the whole file and reports the first corrupt
    line, if any."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._latest: dict[str, TrustRecord] = {}
        self._count = 0
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                    if data.get("v") != RECORD_VERSION:
                        raise ValueError(f"unsupported record version {data.get('v')!r}")
                    record = TrustRecord.from_dict(data)
                except (ValueError, KeyError, TypeError) as exc:
                    raise StoreCorruptError(str(exc), lineno) from exc
                self._index(record)
                self._count += 1

    def _index(self, record: TrustRecord) -> None:
        current = self._latest.get(record.subject_id)
        if current is None or record.evaluated_at >= current.evaluated_at:
            self._latest[record.subject_id] = record

    def put(self, record: TrustRecord) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_dict()) + "\n")
            self._index(record)
            self._count += 1

    def get(self, subject_id: str) -> TrustRecord:
        with self._lock:
            record = self._latest.get(subject_id)
        if record is None:
            raise NotFoundError(f"no trust record for subject {subject_id!r}")
        return record

    def scan(self, kind: str) -> list[TrustRecord]:
        """Latest record per subject of the given kind, ordered by subject id."""
        if kind not in SUBJECT_KINDS:
            raise ValueError(f"kind must be one of {SUBJECT_KINDS}, got {kind!r}")
        with self._lock:
            records = [r for r in self._latest.values() if r.subject_kind == kind]
        return sorted(records, key=lambda r: r.subject_id)

    def __len__(self) -> int:
        """Total records appended (not unique subjects)."""
        return self._count
