"""HTTP/JSON API around a single immutable model.

Endpoints:

* ``POST /v1/classify``  {"text": ...} -> status, class, confidence,
  candidates, unknown_count, query_id
* ``POST /v1/feedback``  {"query_id", "chosen_class"} -> 204; appends a
  JSON Lines record for every resolved disambiguation
* ``GET  /v1/model``     constants of the loaded model
* ``GET  /healthz``      liveness probe

Classification is stateless: the same text always maps to the same
status, class and confidence (only the query id differs).  Offered
candidates are cached in memory (bounded FIFO) so feedback can be
validated; a feedback request for an evicted id is a 404, one naming a
class that was not offered is a 422.  Malformed request bodies are 400.
The feedback log has a single-writer lock so concurrent requests never
interleave bytes within a line.  There is no authentication: the
service is a kiosk backend for a trusted network.
"""

from __future__ import annotations

import json
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from .inference import Ambiguous, Answered, Rejected, classify
from .model import MODEL_FORMAT, InaModel

__all__ = ["create_app", "CandidateCache", "FeedbackLog"]


@dataclass
class _Offer:
    query: str
    candidates: list[dict]


class CandidateCache:
    """query_id -> offered candidates, bounded with FIFO eviction."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._entries: OrderedDict[str, _Offer] = OrderedDict()
        self._lock = threading.Lock()

    def put(self, query_id: str, offer: _Offer) -> None:
        with self._lock:
            self._entries[query_id] = offer
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def get(self, query_id: str) -> _Offer | None:
        with self._lock:
            return self._entries.get(query_id)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class FeedbackLog:
    """Append-only JSON Lines sink with serialized writes."""

    def __init__(self, path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(line)


class ClassifyRequest(BaseModel):
    text: str


class FeedbackRequest(BaseModel):
    query_id: str
    chosen_class: str


def create_app(
    model: InaModel | None = None,
    feedback_log=None,
    cache_capacity: int = 10_000,
) -> FastAPI:
    """Build the API around one loaded model.

    ``model`` may be None to exercise the not-loaded behaviour (503 on
    every model-dependent endpoint).  ``feedback_log`` is a path; when
    omitted, feedback requests validate but persist nothing.
    """
    app = FastAPI(title="ina", version="1")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.model = model
    app.state.cache = CandidateCache(cache_capacity)
    app.state.log = FeedbackLog(feedback_log) if feedback_log else None

    @app.exception_handler(RequestValidationError)
    async def _malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    def require_model() -> InaModel:
        loaded = app.state.model
        if loaded is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return loaded

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz() -> str:
        return "ok"

    @app.get("/v1/model")
    async def model_info() -> dict:
        loaded = require_model()
        return {
            "classes": len(loaded.class_list),
            "vocabulary": len(loaded.vocabulary),
            "alpha": loaded.config.alpha_f,
            "threshold": loaded.config.threshold,
            "window": loaded.config.window,
            "format": MODEL_FORMAT,
        }

    @app.post("/v1/classify")
    async def classify_endpoint(body: ClassifyRequest) -> dict:
        loaded = require_model()
        analysis, _, decision = classify(body.text, loaded)
        query_id = uuid.uuid4().hex
        if isinstance(decision, Answered):
            status, label, conf = "answered", decision.label, decision.confidence
            candidates: list[dict] = []
        elif isinstance(decision, Ambiguous):
            status, label = "ambiguous", None
            conf = decision.candidates[0].confidence
            candidates = [
                {
                    "class": cand.label,
                    "confidence": cand.confidence,
                    "example_query": cand.representative,
                }
                for cand in decision.candidates
            ]
        else:
            assert isinstance(decision, Rejected)
            status, label, conf = "rejected", None, decision.best_confidence
            candidates = []
        app.state.cache.put(query_id, _Offer(query=body.text, candidates=candidates))
        return {
            "status": status,
            "class": label,
            "confidence": conf,
            "candidates": candidates,
            "unknown_count": analysis.unknown_count,
            "query_id": query_id,
        }

    @app.post("/v1/feedback", status_code=204, response_class=Response)
    async def feedback_endpoint(body: FeedbackRequest) -> Response:
        require_model()
        offer = app.state.cache.get(body.query_id)
        if offer is None:
            raise HTTPException(status_code=404, detail="unknown or evicted query_id")
        if body.chosen_class not in {c["class"] for c in offer.candidates}:
            raise HTTPException(
                status_code=422, detail="chosen_class was not among the offered candidates"
            )
        if app.state.log is not None:
            app.state.log.append(
                {
                    "ts": datetime.now(timezone.utc).isoformat(),
                    "query_id": body.query_id,
                    "query": offer.query,
                    "candidates": offer.candidates,
                    "chosen_class": body.chosen_class,
                }
            )
        return Response(status_code=204)

    return app
