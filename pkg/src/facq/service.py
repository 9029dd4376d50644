"""HTTP session API over a loaded model bundle.

Sessions live in memory; every mutation within a session is serialized by a
per-session lock while independent sessions run fully in parallel over the
immutable bundle.  Raw feature values are normalized server-side and clamp
with a warning when they fall outside the training range.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import acquire
from .acquire import AcquisitionSession, acquisition_units
from .model import ModelBundle

SCHEMA_VERSION = 1
DEFAULT_IDLE_TIMEOUT = 3600.0
TOP_CANDIDATES = 10


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status, self.code, self.message = status, code, message


@dataclass
class SessionRecord:
    sid: str
    session: AcquisitionSession
    created: float
    updated: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, idle_timeout: float = DEFAULT_IDLE_TIMEOUT):
        self._sessions: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()
        self.idle_timeout = idle_timeout

    def create(self, session: AcquisitionSession) -> SessionRecord:
        now = time.time()
        rec = SessionRecord(uuid.uuid4().hex, session, now, now)
        with self._lock:
            self._evict(now)
            self._sessions[rec.sid] = rec
        return rec

    def get(self, sid: str) -> SessionRecord:
        with self._lock:
            self._evict(time.time())
            rec = self._sessions.get(sid)
        if rec is None:
            raise ApiError(404, "session_not_found", f"no session {sid!r}")
        return rec

    def delete(self, sid: str) -> None:
        with self._lock:
            self._sessions.pop(sid, None)     # idempotent

    def count(self) -> int:
        with self._lock:
            return len(self._sessions)

    def _evict(self, now: float) -> None:
        stale = [sid for sid, rec in self._sessions.items()
                 if now - rec.updated > self.idle_timeout]
        for sid in stale:
            del self._sessions[sid]


def _normalize_value(bundle: ModelBundle, idx: int, raw: float):
    """Raw units -> normalized; returns (value, clamped?)."""
    norm = bundle.normalization.apply_one(idx, float(raw))
    lo, hi = bundle.normalization.minimum[idx], bundle.normalization.maximum[idx]
    clamped = bool(raw < lo or raw > hi)
    return norm, clamped


def _feature_index(bundle: ModelBundle, name: str) -> int:
    try:
        return bundle.feature_names.index(name)
    except ValueError:
        raise ApiError(400, "unknown_feature", f"no feature named {name!r}")


def _prediction_payload(session: AcquisitionSession) -> dict:
    probs = session.prediction
    return {
        "class_probabilities": [float(p) for p in probs],
        "predicted_class": int(np.argmax(probs)),
        "top_probability": float(np.max(probs)),
    }


def _suggestions(bundle: ModelBundle, session: AcquisitionSession,
                 limit: int | None = TOP_CANDIDATES) -> dict:
    if not session.unknown_units():
        return {"candidates": [], "none_remaining": True}
    scores = acquire.score_features(bundle, session)
    scores.sort(key=lambda s: -s.score)
    if limit:
        scores = scores[:limit]
    return {
        "candidates": [{"id": s.uid, "score": s.score,
                        "numerator": s.numerator, "cost": s.cost}
                       for s in scores],
        "none_remaining": False,
    }


def _state_payload(bundle: ModelBundle, rec: SessionRecord) -> dict:
    s = rec.session
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": rec.sid,
        "created": rec.created,
        "updated": rec.updated,
        "total_cost": s.total_cost,
        "known": {bundle.feature_names[i]: float(s.x[i])
                  for i in range(len(s.known)) if s.known[i]},
        "history": [{"t": h.t, "id": h.uid,
                     "score": None if h.score != h.score else h.score,
                     "values": {bundle.feature_names[i]: v
                                for i, v in h.values.items()}}
                    for h in s.history],
        "prediction": _prediction_payload(s),
    }


def create_app(bundle: ModelBundle, static_dir: str | None = None,
               event_log: str | Path | None = None,
               idle_timeout: float = DEFAULT_IDLE_TIMEOUT) -> FastAPI:
    app = FastAPI(title="feature acquisition service")
    store = SessionStore(idle_timeout)
    app.state.store = store
    units = acquisition_units(bundle.costs, bundle.feature_names)
    unit_by_id = {u.uid: u for u in units}
    log_lock = threading.Lock()

    def log_event(event: dict) -> None:
        if event_log is None:
            return
        with log_lock, open(event_log, "a") as fh:
            fh.write(json.dumps(event) + "\n")

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={
            "schema_version": SCHEMA_VERSION,
            "error": {"code": exc.code, "message": exc.message}})

    @app.get("/v1/health")
    def health():
        return {"schema_version": SCHEMA_VERSION, "status": "ok",
                "sessions": store.count()}

    @app.get("/v1/model")
    def model_meta():
        return {
            "schema_version": SCHEMA_VERSION,
            "feature_names": bundle.feature_names,
            "n_classes": bundle.architecture.n_classes,
            "bits": bundle.architecture.bits,
            "dataset_fingerprint": bundle.dataset_fingerprint,
            "units": [{"id": u.uid, "cost": u.cost,
                       "members": [bundle.feature_names[m] for m in u.members]}
                      for u in units],
        }

    @app.post("/v1/sessions", status_code=201)
    async def create_session(request: Request):
        body = await _json_body(request)
        initial = body.get("initial", {})
        if not isinstance(initial, dict):
            raise ApiError(400, "invalid_initial", "initial must be a mapping")
        values, warnings = {}, []
        for name, raw in initial.items():
            idx = _feature_index(bundle, name)
            try:
                val, clamped = _normalize_value(bundle, idx, raw)
            except (TypeError, ValueError):
                raise ApiError(400, "invalid_value",
                               f"non-numeric value for {name!r}")
            values[idx] = val
            if clamped:
                warnings.append(f"value for {name!r} clamped to training range")
        session = acquire.new_session(bundle, values)
        rec = store.create(session)
        log_event({"event": "create", "session": rec.sid, "initial": initial})
        payload = _state_payload(bundle, rec)
        payload["suggestion"] = _suggestions(bundle, session)
        payload["warnings"] = warnings
        return payload

    @app.get("/v1/sessions")
    def list_sessions():
        with store._lock:
            sids = list(store._sessions)
        return {"schema_version": SCHEMA_VERSION, "sessions": sids}

    @app.get("/v1/sessions/{sid}")
    def get_state(sid: str):
        rec = store.get(sid)
        with rec.lock:
            return _state_payload(bundle, rec)

    @app.get("/v1/sessions/{sid}/suggestion")
    def get_suggestion(sid: str):
        rec = store.get(sid)
        with rec.lock:
            payload = {"schema_version": SCHEMA_VERSION,
                       "session_id": rec.sid,
                       "total_cost": rec.session.total_cost,
                       "prediction": _prediction_payload(rec.session)}
            payload.update(_suggestions(bundle, rec.session))
            return payload

    @app.post("/v1/sessions/{sid}/features")
    async def post_feature(sid: str, request: Request):
        body = await _json_body(request)
        rec = store.get(sid)
        uid = body.get("group") or body.get("id")
        if not uid:
            raise ApiError(400, "missing_id", "body needs 'id' or 'group'")
        unit = unit_by_id.get(uid)
        if unit is None:
            # a lone feature name that is a member of a group
            idx = _feature_index(bundle, uid)
            unit = next((u for u in units if idx in u.members), None)
            if unit is None or len(unit.members) > 1:
                raise ApiError(400, "grouped_feature",
                               f"{uid!r} must be acquired via its group")
        if "values" in body:
            raw_values = body["values"]
            if not isinstance(raw_values, dict):
                raise ApiError(400, "invalid_values", "'values' must be a map")
        elif "value" in body:
            if len(unit.members) != 1:
                raise ApiError(400, "invalid_values",
                               f"group {unit.uid!r} needs 'values' for all members")
            raw_values = {bundle.feature_names[unit.members[0]]: body["value"]}
        else:
            raise ApiError(400, "missing_value", "body needs 'value' or 'values'")

        norm_values, warnings = {}, []
        for name, raw in raw_values.items():
            idx = _feature_index(bundle, name)
            if idx not in unit.members:
                raise ApiError(400, "wrong_member",
                               f"{name!r} is not a member of {unit.uid!r}")
            try:
                val, clamped = _normalize_value(bundle, idx, raw)
            except (TypeError, ValueError):
                raise ApiError(400, "invalid_value",
                               f"non-numeric value for {name!r}")
            norm_values[idx] = val
            if clamped:
                warnings.append(f"value for {name!r} clamped to training range")
        if set(norm_values) != set(unit.members):
            raise ApiError(400, "incomplete_group",
                           f"group {unit.uid!r} needs values for all members")

        with rec.lock:
            if all(rec.session.known[m] for m in unit.members):
                raise ApiError(409, "already_acquired",
                               f"{unit.uid!r} was already acquired")
            try:
                acquire.acquire(rec.session, unit.uid, norm_values)
            except acquire.AcquisitionError as e:
                raise ApiError(409, "conflict", str(e))
            rec.updated = time.time()
            log_event({"event": "acquire", "session": rec.sid,
                       "id": unit.uid, "values": raw_values})
            payload = _state_payload(bundle, rec)
            payload["suggestion"] = _suggestions(bundle, rec.session)
            payload["warnings"] = warnings
            return payload

    @app.delete("/v1/sessions/{sid}")
    def delete_session(sid: str):
        store.delete(sid)
        log_event({"event": "delete", "session": sid})
        return {"schema_version": SCHEMA_VERSION, "deleted": sid}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="console")

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError(400, "invalid_json", "request body must be JSON")
    if body is None:
        return {}
    if not isinstance(body, dict):
        raise ApiError(400, "invalid_json", "request body must be an object")
    return body
