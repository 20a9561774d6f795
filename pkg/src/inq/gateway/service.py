"""The stateful coordinator: one service instance is one editing
session. Every RPC method funnels through handle(), which serializes
requests (strict arrival order) and answers with an envelope carrying
exactly one of result/error.

Error codes: 601 method not found, 404 unknown question, 422 source
does not parse, 400 bad params, 403 privacy violation, 410 stale
anchor, 503 log write failure, 500 internal.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .. import __version__
from ..analysis import ProgramAnalyses, analyze_program
from ..explain import Explanation, explain, help_text, HELP_TOPICS
from ..inquiry import Question, SchemaMismatch, check_answer, \
    generate_questions
from ..interp import ExecConfig, ExecResult, run
from ..lang.ast import Program, SourceSpan
from ..lang.parser import parse
from ..remedy import StaleAnchor, apply, strip_markers, synthesize
from ..session import (
    EventLog, IoFailure, PrivacyViolation, aggregate, make_event,
    new_session_id,
)
from ..smells import Diagnostic, detect

IDLE_EXPIRY_MS = 8 * 3600 * 1000  # fresh session after 8 idle hours
MAX_RUN_BUDGET = 5_000_000

ANON_LEARNER = "0" * 16


class RpcError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.message = message


def encode(payload: object) -> str:
    """The one wire serializer; stdio and http share it byte for byte."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass
class SessionState:
    session_id: str
    document: str = ""
    program: Program | None = None
    analyses: ProgramAnalyses | None = None
    # question_id -> (question, diagnostic that raised it)
    questions: dict[str, tuple[Question, Diagnostic]] = \
        field(default_factory=dict)
    cooldown: set[str] = field(default_factory=set)
    show_remedies: bool = True


class InquiryService:
    def __init__(self, *, salt: str = "inq", log_dir: str | Path | None = None,
                 log_source: bool = False, learner_hash: str = ANON_LEARNER,
                 clock=None, idle_expiry_ms: int = IDLE_EXPIRY_MS) -> None:
        self.salt = salt
        self.log_dir = Path(log_dir) if log_dir else None
        self.log_source = log_source
        self.learner_hash = learner_hash
        self.clock = clock or (lambda: time.time_ns() // 1_000_000)
        self.idle_expiry_ms = idle_expiry_ms
        self.state = SessionState(session_id=new_session_id())
        self.dropped_events = 0
        self._last_ms: int | None = None
        self._lock = threading.Lock()
        self._methods = {
            "analyze": self._analyze,
            "question.get": self._question_get,
            "question.answer": self._question_answer,
            "run": self._run,
            "remedy.apply": self._remedy_apply,
            "remedy.toggle": self._remedy_toggle,
            "event.log": self._event_log,
            "report.aggregate": self._report_aggregate,
            "help.get": self._help_get,
            "version": self._version,
        }

    @classmethod
    def from_env(cls, environ=None) -> "InquiryService":
        import os
        env = environ if environ is not None else os.environ
        return cls(
            salt=env.get("INQ_SALT", "inq"),
            log_dir=env.get("INQ_LOG_DIR") or None,
            log_source=env.get("INQ_LOG_SOURCE", "").lower()
            in ("1", "true", "yes", "on"),
        )

    # -- envelope layer ------------------------------------------------------

    def handle(self, envelope: object) -> dict:
        with self._lock:
            if not isinstance(envelope, dict):
                return _error(None, 400, "envelope must be a JSON object")
            rid = envelope.get("id")
            method = envelope.get("method")
            if not isinstance(method, str):
                return _error(rid, 400, "envelope is missing a method")
            handler = self._methods.get(method)
            if handler is None:
                return _error(rid, 601, f"method not found: {method}")
            params = envelope.get("params", {})
            if not isinstance(params, dict):
                return _error(rid, 400, "params must be a JSON object")
            self._tick()
            try:
                return {"id": rid, "result": handler(params)}
            except RpcError as exc:
                return _error(rid, exc.code, exc.message)
            except Exception as exc:  # noqa: BLE001 - envelope boundary
                return _error(rid, 500, f"internal error: {exc}")

    def call(self, method: str, params: dict | None = None) -> dict:
        """Convenience for in-process callers (the CLI); raises RpcError."""
        response = self.handle({"id": 0, "method": method,
                                "params": params or {}})
        if "error" in response:
            err = response["error"]
            raise RpcError(err["code"], err["message"])
        return response["result"]

    def _tick(self) -> None:
        now = self.clock()
        if self._last_ms is not None and \
                now - self._last_ms > self.idle_expiry_ms:
            self.state = SessionState(session_id=new_session_id())
        self._last_ms = now

    # -- methods ---------------------------------------------------------

    def _analyze(self, params: dict) -> dict:
        source = _str_param(params, "source")
        result = parse(source)
        if result.errors:
            raise RpcError(422, "; ".join(str(e) for e in result.errors))
        program = result.program
        analyses = analyze_program(program)
        diagnostics = detect(program, analyses)
        questions = generate_questions(
            diagnostics, analyses, cooldown=frozenset(self.state.cooldown))
        by_key = {(q.node, q.rule_id): q for q in questions}
        state = self.state
        state.document = source
        state.program = program
        state.analyses = analyses
        state.questions = {
            q.question_id:
                (q, next(d for d in diagnostics
                         if (d.node, d.rule_id) == (q.node, q.rule_id)))
            for q in questions}
        annotations = []
        for d in diagnostics:
            entry = {"span": _wire_span(d.span)}
            question = by_key.get((d.node, d.rule_id))
            if question is not None:
                entry["question_id"] = question.question_id
            annotations.append(entry)
        self._log("analyze", {"diagnostics": len(diagnostics),
                              "questions": len(questions),
                              "source": source})
        return {"diagnostics": [_wire_diag(d) for d in diagnostics],
                "annotations": annotations}

    def _question_get(self, params: dict) -> dict:
        question, _ = self._lookup_question(params)
        return _wire_question(question)

    def _question_answer(self, params: dict) -> dict:
        question, diagnostic = self._lookup_question(params)
        if "answer" not in params:
            raise RpcError(400, "missing param: answer")
        try:
            judgment = check_answer(question, params["answer"],
                                    now_ms=self.clock())
        except SchemaMismatch as exc:
            raise RpcError(400, f"answer does not fit the schema: {exc}")
        explanation = explain(question, judgment, self.state.program,
                              self.state.analyses)
        self.state.cooldown.add(question.cooldown_key)
        self._log("question-answered", {
            "rule_id": question.rule_id,
            "category": diagnostic.category,
            "question_kind": question.kind,
            "verdict": judgment.verdict,
        })
        return {"verdict": judgment.verdict,
                "explanation": _wire_explanation(explanation)}

    def _run(self, params: dict) -> dict:
        source = _str_param(params, "source")
        inputs = params.get("inputs", [])
        if not isinstance(inputs, list) or \
                any(not isinstance(x, str) for x in inputs):
            raise RpcError(400, "inputs must be a list of strings")
        budget = params.get("budget", ExecConfig.step_budget)
        if not isinstance(budget, int) or isinstance(budget, bool) or \
                not 1 <= budget <= MAX_RUN_BUDGET:
            raise RpcError(
                400, f"budget must be an int in 1..{MAX_RUN_BUDGET}")
        result = parse(source)
        if result.errors:
            raise RpcError(422, "; ".join(str(e) for e in result.errors))
        outcome = run(result.program,
                      ExecConfig(step_budget=budget,
                                 input_queue=tuple(inputs)))
        self._log("program-run", {"status": outcome.status.code,
                                  "steps": outcome.steps_used,
                                  "source": source})
        return _wire_exec(outcome)

    def _remedy_apply(self, params: dict) -> dict:
        question, diagnostic = self._lookup_question(params)
        remedies = synthesize(diagnostic, self.state.analyses)
        try:
            new_source = apply(self.state.document, remedies)
        except StaleAnchor as exc:
            raise RpcError(410, str(exc))
        self.state.document = new_source
        self.state.cooldown.add(question.cooldown_key)
        self._log("remedy-applied", {
            "rule_id": diagnostic.rule_id,
            "category": diagnostic.category,
            "markers": [r.marker_id for r in remedies],
        })
        return {"new_source":
                strip_markers(new_source, self.state.show_remedies)}

    def _remedy_toggle(self, params: dict) -> dict:
        show = params.get("show")
        if not isinstance(show, bool):
            raise RpcError(400, "show must be true or false")
        self.state.show_remedies = show
        self._log("remedy-toggled", {"show": show})
        return {"new_source": strip_markers(self.state.document, show)}

    def _event_log(self, params: dict) -> dict:
        kind = _str_param(params, "kind")
        payload = params.get("payload", {})
        if not isinstance(payload, dict):
            raise RpcError(400, "payload must be a JSON object")
        ts = params.get("ts", self.clock())
        learner = params.get("learner_hash", self.learner_hash)
        if self.log_dir is None:
            return {"logged": False, "reason": "no log directory configured"}
        event = make_event(self.state.session_id, learner, kind, payload,
                           ts=ts)
        try:
            self._writer().log_event(event)
        except PrivacyViolation as exc:
            raise RpcError(403, str(exc))
        except ValueError as exc:
            raise RpcError(400, str(exc))
        except IoFailure as exc:
            raise RpcError(503, f"log write failed, retry later: {exc}")
        return {"logged": True}

    def _report_aggregate(self, params: dict) -> dict:
        if self.log_dir is None:
            raise RpcError(400, "no log directory configured")
        return aggregate(self.log_dir).as_dict()

    def _help_get(self, params: dict) -> dict:
        topic = _str_param(params, "topic")
        if topic not in HELP_TOPICS:
            raise RpcError(404, f"unknown help topic: {topic}")
        return {"topic": topic, "text": help_text(topic)}

    def _version(self, params: dict) -> dict:
        return {"name": "inq", "version": __version__}

    # -- internals ---------------------------------------------------------

    def _lookup_question(self, params: dict) -> tuple[Question, Diagnostic]:
        question_id = _str_param(params, "question_id")
        entry = self.state.questions.get(question_id)
        if entry is None:
            raise RpcError(404, f"unknown question: {question_id}")
        return entry

    def _writer(self) -> EventLog:
        return EventLog(self.log_dir / "events.ndjson",
                        log_source=self.log_source)

    def _log(self, kind: str, payload: dict) -> None:
        """Best-effort auto event; a broken disk must not fail the RPC."""
        if self.log_dir is None:
            return
        event = make_event(self.state.session_id, self.learner_hash, kind,
                           payload, ts=self.clock())
        try:
            self._writer().log_event(event)
        except (IoFailure, ValueError):
            self.dropped_events += 1


def _error(rid: object, code: int, message: str) -> dict:
    return {"id": rid, "error": {"code": code, "message": message}}


def _str_param(params: dict, key: str) -> str:
    value = params.get(key)
    if not isinstance(value, str):
        raise RpcError(400, f"missing param: {key}")
    return value


# -- wire shapes -------------------------------------------------------------

def _wire_span(span: SourceSpan) -> dict:
    return {"start_line": span.start_line, "start_col": span.start_col,
            "end_line": span.end_line, "end_col": span.end_col,
            "start_offset": span.start_offset, "end_offset": span.end_offset}


def _wire_diag(d: Diagnostic) -> dict:
    return {"rule_id": d.rule_id, "category": d.category,
            "severity": d.severity, "message": d.message,
            "span": _wire_span(d.span)}


def _wire_question(q: Question) -> dict:
    # Client-safe: the ground truth stays on the server.
    return {"question_id": q.question_id, "rule_id": q.rule_id,
            "kind": q.kind, "prompt": q.prompt,
            "answer_schema": q.answer_schema, "topic": q.topic,
            "span": _wire_span(q.span)}


def _wire_explanation(e: Explanation) -> dict:
    experiment = None
    if e.experiment is not None:
        observation = {"kind": e.experiment.observation.kind}
        if e.experiment.observation.budget is not None:
            observation["budget"] = e.experiment.observation.budget
        if e.experiment.observation.text is not None:
            observation["text"] = e.experiment.observation.text
        if e.experiment.observation.error_kind is not None:
            observation["error_kind"] = e.experiment.observation.error_kind
        experiment = {"input_queue": list(e.experiment.input_queue),
                      "observation": observation,
                      "described": e.experiment.observation.describe()}
    return {"summary": e.summary, "cause": e.cause,
            "experiment": experiment, "reference": e.reference}


def _wire_exec(result: ExecResult) -> dict:
    status: dict = {"code": result.status.code}
    if result.status.kind is not None:
        status["kind"] = result.status.kind
    if result.status.message is not None:
        status["message"] = result.status.message
    if result.status.span is not None:
        status["span"] = _wire_span(result.status.span)
    return {"status": status, "stdout": result.stdout,
            "steps_used": result.steps_used,
            "inputs_consumed": result.inputs_consumed}
