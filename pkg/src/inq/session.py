"""Confidential interaction logging and instructor rollups.

Events append to a local NDJSON log, one record per line, fsync'd
before the call returns. The learner identifier never reaches the log
in clear text: records carry a salted 16-hex-digit hash, and the
writer refuses any record whose serialized form contains the
configured identifier. Aggregation is read-only and tolerates a
trailing partial line (a crashed writer loses at most one record).
"""
from __future__ import annotations

import csv
import errno
import hashlib
import io
import json
import os
import re
import secrets
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

EVENT_KINDS = (
    "analyze", "question-shown", "question-answered", "explanation-shown",
    "experiment-run", "remedy-applied", "remedy-toggled", "program-run",
    "edit",
)

_SESSION_ID = re.compile(r"[0-9a-f]{32}")
_LEARNER_HASH = re.compile(r"[0-9a-f]{16}")

_RECORD_FIELDS = ("session_id", "learner_hash", "ts", "kind", "payload")


class PrivacyViolation(ValueError):
    """The record would put a learner identifier into the log in clear."""


class IoFailure(OSError):
    """The append did not complete; the caller should buffer and retry."""


class StorageFull(IoFailure):
    pass


@dataclass(frozen=True)
class EventRecord:
    session_id: str
    learner_hash: str
    ts: int  # ms since epoch
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True,
                          separators=(",", ":"))


def new_session_id() -> str:
    return secrets.token_hex(16)


def hash_learner(learner_id: str, salt: str) -> str:
    digest = hashlib.sha256(f"{salt}|{learner_id}".encode("utf-8"))
    return digest.hexdigest()[:16]


def make_event(session_id: str, learner_hash: str, kind: str,
               payload: dict | None = None, ts: int | None = None
               ) -> EventRecord:
    if ts is None:
        ts = time.time_ns() // 1_000_000
    return EventRecord(session_id=session_id, learner_hash=learner_hash,
                       ts=ts, kind=kind, payload=dict(payload or {}))


class EventLog:
    """Single-writer append-only NDJSON log.

    learner_id, when known, arms the clear-text guard. log_source
    mirrors the session opt-in flag; while it is off, `source` payload
    fields are dropped before the record is serialized.
    """

    def __init__(self, path: str | Path, *, learner_id: str | None = None,
                 log_source: bool = False) -> None:
        self.path = Path(path)
        self.learner_id = learner_id
        self.log_source = log_source

    def log_event(self, event: EventRecord) -> None:
        line = self._validated_line(event)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            if exc.errno == errno.ENOSPC:
                raise StorageFull(str(exc)) from exc
            raise IoFailure(str(exc)) from exc

    def _validated_line(self, event: EventRecord) -> str:
        if not _SESSION_ID.fullmatch(event.session_id):
            raise ValueError("session_id must be 32 lowercase hex digits")
        if not _LEARNER_HASH.fullmatch(event.learner_hash):
            raise PrivacyViolation(
                "learner_hash must be a 16-hex-digit salted hash")
        if not isinstance(event.ts, int) or event.ts < 0:
            raise ValueError("ts must be a non-negative ms timestamp")
        if event.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {event.kind!r}")
        payload = dict(event.payload)
        if not self.log_source:
            payload.pop("source", None)
        record = EventRecord(session_id=event.session_id,
                             learner_hash=event.learner_hash,
                             ts=event.ts, kind=event.kind, payload=payload)
        try:
            line = record.to_line()
        except (TypeError, ValueError) as exc:
            raise ValueError(f"payload is not JSON-serializable: {exc}")
        if self.learner_id and self.learner_id in line:
            raise PrivacyViolation(
                "record contains the learner identifier in clear text")
        return line


def log_event(event: EventRecord, path: str | Path, *,
              learner_id: str | None = None,
              log_source: bool = False) -> None:
    EventLog(path, learner_id=learner_id, log_source=log_source) \
        .log_event(event)


# -- aggregation -------------------------------------------------------------


@dataclass(frozen=True)
class MalformedLine:
    source: str
    line: int  # 1-based within its file
    reason: str


@dataclass
class AggregateReport:
    window: tuple[int, int]          # (from ts, to ts); (0, 0) when empty
    per_category: dict[str, int]     # misconception counts
    per_rule: dict[str, int]
    correctness_rate: dict[str, float]  # question kind -> correct share
    sessions: int
    events: int = 0
    unknown_kinds: int = 0
    malformed: list[MalformedLine] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "window": {"from": self.window[0], "to": self.window[1]},
            "per_category": dict(self.per_category),
            "per_rule": dict(self.per_rule),
            "correctness_rate": dict(self.correctness_rate),
            "sessions": self.sessions,
            "events": self.events,
            "unknown_kinds": self.unknown_kinds,
            "malformed": len(self.malformed),
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["category", "count"])
        for category in sorted(self.per_category):
            writer.writerow([category, self.per_category[category]])
        return out.getvalue()


def aggregate(path: str | Path) -> AggregateReport:
    root = Path(path)
    if root.is_dir():
        files = sorted(p for p in root.iterdir() if p.is_file())
    else:
        files = [root]
    per_category: dict[str, int] = {}
    per_rule: dict[str, int] = {}
    answered: dict[str, list[int]] = {}  # kind -> [correct, total]
    sessions: set[str] = set()
    ts_lo: int | None = None
    ts_hi: int | None = None
    events = 0
    unknown = 0
    malformed: list[MalformedLine] = []
    for file in files:
        try:
            text = file.read_text(encoding="utf-8")
        except OSError as exc:
            malformed.append(MalformedLine(file.name, 0, str(exc)))
            continue
        for line_no, line in enumerate(text.split("\n"), start=1):
            if not line.strip():
                continue
            problem, ts = _fold_line(line, per_category, per_rule, answered,
                                     sessions)
            if problem is None:
                events += 1
                ts_lo = ts if ts_lo is None else min(ts_lo, ts)
                ts_hi = ts if ts_hi is None else max(ts_hi, ts)
            elif problem == "unknown-kind":
                unknown += 1
            else:
                malformed.append(MalformedLine(file.name, line_no, problem))
    rates = {kind: correct / total
             for kind, (correct, total) in sorted(answered.items()) if total}
    window = (ts_lo, ts_hi) if ts_lo is not None else (0, 0)
    return AggregateReport(
        window=window,
        per_category=dict(sorted(per_category.items())),
        per_rule=dict(sorted(per_rule.items())),
        correctness_rate=rates,
        sessions=len(sessions),
        events=events,
        unknown_kinds=unknown,
        malformed=malformed,
    )


def _fold_line(line: str, per_category: dict, per_rule: dict,
               answered: dict, sessions: set) -> tuple[str | None, int]:
    """Fold one NDJSON line into the accumulators. Returns (problem, ts):
    problem is None on success, "unknown-kind" for a skippable record,
    or a reason text for a malformed one."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        return f"invalid JSON: {exc.msg}", 0
    if not isinstance(record, dict):
        return "record is not an object", 0
    missing = [f for f in _RECORD_FIELDS if f not in record]
    if missing:
        return f"missing fields: {', '.join(missing)}", 0
    if not isinstance(record["session_id"], str) or \
            not _SESSION_ID.fullmatch(record["session_id"]):
        return "bad session_id", 0
    if not isinstance(record["ts"], int):
        return "bad ts", 0
    if not isinstance(record["payload"], dict):
        return "bad payload", 0
    kind = record["kind"]
    if kind not in EVENT_KINDS:
        return "unknown-kind", 0
    sessions.add(record["session_id"])
    if kind == "question-answered":
        payload = record["payload"]
        verdict = payload.get("verdict")
        question_kind = payload.get("question_kind", "unknown")
        correct, total = answered.get(question_kind, (0, 0))
        answered[question_kind] = [correct + (verdict == "Correct"),
                                   total + 1]
        if verdict != "Correct":
            category = payload.get("category", "unknown")
            rule = payload.get("rule_id", "unknown")
            per_category[category] = per_category.get(category, 0) + 1
            per_rule[rule] = per_rule.get(rule, 0) + 1
    return None, record["ts"]
