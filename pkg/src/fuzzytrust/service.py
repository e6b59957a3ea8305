"""Trust management service: trust queries, access decisions and
provider feedback over a small JSON-on-HTTP protocol.

Endpoints:
    GET  /healthz
    GET  /trust/user/{id}
    GET  /trust/provider/{id}
    POST /decide                     {"user_id": ..., "counters": {...}?}
    POST /feedback/provider/{id}     {"feedback": "positive" | "negative"}

Every body carries ``"schema": "tmm/1"``.  Decisions come from the
fitted fuzzy model when one is configured, else from the baseline
formula; with no fresh counters the latest stored record is served.
Providers whose negative-feedback share exceeds 40% report trust 0
while their stored values stay intact.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .errors import (
    BindFailureError,
    FuzzyTrustError,
    ModelLoadFailureError,
    NoTrustAvailableError,
    NotFoundError,
    ZeroTotalRequestsError,
)
from .provider import feedback_ban
from .store import TrustRecord, TrustStore, utc_now_iso
from .user import (
    DEFAULT_THRESHOLD,
    DEFAULT_WEIGHTS,
    TrustWeights,
    UserBehaviorCounters,
    UserTrustModel,
    baseline_trust,
    classify,
    load_user_model,
    request_rates,
)

SCHEMA = "tmm/1"

ENV_STORE = "FUZZYTRUST_STORE"
ENV_FEEDBACK = "FUZZYTRUST_FEEDBACK"
ENV_USER_MODEL = "FUZZYTRUST_USER_MODEL"
ENV_THRESHOLD = "FUZZYTRUST_THRESHOLD"
ENV_BIND = "FUZZYTRUST_BIND"


@dataclass(frozen=True)
class ServiceConfig:
    store_path: str
    feedback_path: str | None = None  # defaults to <store>.feedback
    user_model_path: str | None = None
    threshold: float = DEFAULT_THRESHOLD
    weights: TrustWeights = DEFAULT_WEIGHTS
    host: str = "127.0.0.1"
    port: int = 8321

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        store = overrides.pop("store_path", None) or os.environ.get(ENV_STORE)
        if not store:
            raise ModelLoadFailureError(f"no store path given (flag or {ENV_STORE})")
        values = {
            "store_path": store,
            "feedback_path": os.environ.get(ENV_FEEDBACK),
            "user_model_path": os.environ.get(ENV_USER_MODEL),
        }
        if os.environ.get(ENV_THRESHOLD):
            values["threshold"] = float(os.environ[ENV_THRESHOLD])
        if os.environ.get(ENV_BIND):
            host, _, port = os.environ[ENV_BIND].rpartition(":")
            values["host"] = host or "127.0.0.1"
            values["port"] = int(port)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class DecisionResponse:
    decision: str  # "grant" | "deny"
    trust: float
    model: str  # "baseline" | "fis"
    evaluated_at: str

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "decision": self.decision,
            "trust": self.trust,
            "model": self.model,
            "evaluated_at": self.evaluated_at,
        }


class FeedbackLedger:
    """Append-only provider feedback log with in-memory tallies.

    The ratio is a pure function of the feedback multiset, so replaying
    the log in any order gives the same tallies.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._tallies: dict[str, list[int]] = {}  # provider -> [positive, negative]
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    data = json.loads(line)
                    self._apply(data["provider_id"], data["feedback"])

    def _apply(self, provider_id: str, feedback: str) -> None:
        tally = self._tallies.setdefault(provider_id, [0, 0])
        tally[0 if feedback == "positive" else 1] += 1

    def record(self, provider_id: str, feedback: str) -> float:
        if feedback not in ("positive", "negative"):
            raise ValueError(f"feedback must be positive or negative, got {feedback!r}")
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {"v": 1, "provider_id": provider_id, "feedback": feedback, "at": utc_now_iso()}
                    )
                    + "\n"
                )
            self._apply(provider_id, feedback)
        return self.negative_ratio(provider_id)

    def negative_ratio(self, provider_id: str) -> float:
        tally = self._tallies.get(provider_id)
        if not tally or sum(tally) == 0:
            return 0.0
        return tally[1] / (tally[0] + tally[1])


class TrustService:
    """Protocol-independent core shared by the HTTP layer and the CLI."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = TrustStore(config.store_path)
        feedback_path = config.feedback_path or str(config.store_path) + ".feedback"
        self.feedback = FeedbackLedger(feedback_path)
        self.user_model: UserTrustModel | None = None
        if config.user_model_path:
            try:
                self.user_model = load_user_model(config.user_model_path)
            except (OSError, ValueError, KeyError, FuzzyTrustError) as exc:
                raise ModelLoadFailureError(
                    f"cannot load user model {config.user_model_path!r}: {exc}"
                ) from exc

    def evaluate_counters(self, counters: UserBehaviorCounters) -> tuple[float, str]:
        """(trust, model provenance) for fresh behavior counters."""
        if self.user_model is not None:
            return self.user_model.evaluate(counters), "fis"
        return baseline_trust(request_rates(counters), self.config.weights), "baseline"

    def decide(
        self,
        user_id: str,
        counters: UserBehaviorCounters | None = None,
        threshold: float | None = None,
    ) -> DecisionResponse:
        """Grant iff trust strictly exceeds the threshold and the subject
        is not banned; every decision appends one audit record."""
        if not user_id:
            raise ValueError("user_id must be non-empty")
        threshold = self.config.threshold if threshold is None else threshold
        banned = False
        if counters is not None:
            trust, model = self.evaluate_counters(counters)
            evaluated_at = utc_now_iso()
        else:
            try:
                record = self.store.get(user_id)
            except NotFoundError:
                raise NoTrustAvailableError(
                    f"no stored trust for {user_id!r} and no fresh counters"
                ) from None
            trust, model, evaluated_at = record.trust, record.model, record.evaluated_at
            banned = record.classification == "banned"

        decision = "grant" if (trust > threshold and not banned) else "deny"
        self.store.put(
            TrustRecord(
                subject_id=user_id,
                subject_kind="user",
                trust=trust,
                classification="banned" if banned else classify(trust, threshold),
                model=model,
                evaluated_at=utc_now_iso(),
            )
        )
        return DecisionResponse(decision=decision, trust=trust, model=model, evaluated_at=evaluated_at)

    def user_trust(self, user_id: str) -> dict:
        record = self.store.get(user_id)  # NotFoundError propagates
        if record.subject_kind != "user":
            raise NotFoundError(f"no trust record for user {user_id!r}")
        data = record.to_dict()
        data["schema"] = SCHEMA
        return data

    def provider_trust(self, provider_id: str) -> dict:
        record = self.store.get(provider_id)
        if record.subject_kind != "provider":
            raise NotFoundError(f"no trust record for provider {provider_id!r}")
        ratio = self.feedback.negative_ratio(provider_id)
        data = record.to_dict()
        data["schema"] = SCHEMA
        data["negative_feedback_ratio"] = ratio
        if feedback_ban(ratio):
            # the ban overrides the reported value but not the stored one
            data["trust"] = 0.0
            data["classification"] = "banned"
            data["banned"] = True
        else:
            data["banned"] = False
        return data

    def provider_feedback(self, provider_id: str, feedback: str) -> dict:
        ratio = self.feedback.record(provider_id, feedback)
        return {
            "schema": SCHEMA,
            "provider_id": provider_id,
            "negative_feedback_ratio": ratio,
            "banned": feedback_ban(ratio),
        }


def _counters_from_payload(user_id: str, payload: dict) -> UserBehaviorCounters:
    return UserBehaviorCounters(
        user_id=user_id,
        uar=int(payload["unauthorized"]),
        bor=int(payload["bogus"]),
        bar=int(payload["bad"]),
        tr=int(payload["total"]),
    )


class _Handler(BaseHTTPRequestHandler):
    service: TrustService  # set on the subclass by create_http_server

    def log_message(self, *args):  # quiet by default
        pass

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _error(self, status: int, message: str) -> None:
        self._send(status, {"schema": SCHEMA, "error": message})

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        return json.loads(raw)

    def do_GET(self):
        path = self.path.rstrip("/") or "/"
        try:
            if path == "/healthz":
                self._send(200, {"schema": SCHEMA, "status": "ok"})
            elif path.startswith("/trust/user/"):
                self._send(200, self.service.user_trust(path.removeprefix("/trust/user/")))
            elif path.startswith("/trust/provider/"):
                self._send(200, self.service.provider_trust(path.removeprefix("/trust/provider/")))
            else:
                self._error(404, f"unknown path {path}")
        except NotFoundError as exc:
            self._error(404, str(exc))
        except FuzzyTrustError as exc:
            self._error(400, str(exc))

    def do_POST(self):
        path = self.path.rstrip("/")
        try:
            payload = self._read_json()
        except (ValueError, json.JSONDecodeError) as exc:
            self._error(400, f"malformed JSON body: {exc}")
            return
        try:
            if path == "/decide":
                user_id = payload.get("user_id", "")
                counters = None
                if payload.get("counters") is not None:
                    counters = _counters_from_payload(user_id, payload["counters"])
                response = self.service.decide(
                    user_id, counters=counters, threshold=payload.get("threshold")
                )
                self._send(200, response.to_dict())
            elif path.startswith("/feedback/provider/"):
                provider_id = path.removeprefix("/feedback/provider/")
                self._send(200, self.service.provider_feedback(provider_id, payload.get("feedback", "")))
            else:
                self._error(404, f"unknown path {path}")
        except NoTrustAvailableError as exc:
            self._error(404, str(exc))
        except (ZeroTotalRequestsError, ValueError, KeyError, TypeError) as exc:
            self._error(400, f"bad request: {exc}")
        except FuzzyTrustError as exc:
            self._error(400, str(exc))


def create_http_server(service: TrustService) -> ThreadingHTTPServer:
    """Bound but not yet serving; call ``serve_forever`` (or wrap in a
    thread for tests).  Port 0 picks a free port."""
    handler = type("BoundHandler", (_Handler,), {"service": service})
    try:
        return ThreadingHTTPServer((service.config.host, service.config.port), handler)
    except OSError as exc:
        raise BindFailureError(
            f"cannot bind {service.config.host}:{service.config.port}: {exc}"
        ) from exc


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    service = TrustService(config)
    server = create_http_server(service)
    host, port = server.server_address[:2]
    print(f"fuzzytrust service listening on http://{host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
