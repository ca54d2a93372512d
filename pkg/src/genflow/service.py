"""HTTP service: campaign submission, status, live event streaming, results.

Each campaign runs on its own executor thread through the full pipeline
(extract, normalize, script, generate). All cross-request reads go through
the telemetry log or the persisted transcript; request handlers never touch
pipeline state directly.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from time import sleep
from typing import Any, Iterator

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field, ValidationError

from .assets import AssetDescriptor, descriptor_from_dict, normalize_asset
from .backends.cost import CostMeter
from .branddna import FetchPolicy, build_brand_dna, fetch_site
from .canon import canonical_dumps, content_digest
from .chain import RunTranscript, run_chain
from .config import AppConfig, BackendProfile
from .director import author_script
from .errors import AbortedRun, ConfigError, GenflowError, ParseExhausted
from .telemetry import RunLog, TelemetryHub

ACTIVE_STATES = ("pending", "extracting", "normalizing", "scripting", "generating")
TERMINAL_STATES = ("completed", "failed")


class PolicyModel(BaseModel):
    retry_budget: int = Field(default=3, ge=0)
    consensus: str = "strict_and"


class CampaignRequest(BaseModel):
    url: str = Field(min_length=1)
    objective: str = Field(min_length=1)
    n_scenes: int = Field(default=4, ge=1)
    policy: PolicyModel = Field(default_factory=PolicyModel)
    backend_profile: str | None = None
    asset: dict[str, Any] | None = None
    seed: int | None = None


@dataclass
class CampaignRecord:
    campaign_id: str
    request: CampaignRequest
    profile: BackendProfile
    seed: int
    state: str = "pending"
    log: RunLog | None = None
    meter: CostMeter | None = None
    cancel: threading.Event = field(default_factory=threading.Event)
    dna_doc: dict[str, Any] | None = None
    error: str | None = None
    thread: threading.Thread | None = None

    def snapshot(self, progress: dict[str, Any] | None) -> dict[str, Any]:
        return {
            "campaign_id": self.campaign_id,
            "state": self.state,
            "url": self.request.url,
            "objective": self.request.objective,
            "n_scenes": self.request.n_scenes,
            "backend_profile": self.profile.name,
            "seed": self.seed,
            "progress": progress,
            "dna": self.dna_doc,
            "error": self.error,
        }


class ServiceState:
    def __init__(self, config: AppConfig) -> None:
        self.config = config
        self.hub = TelemetryHub()
        self.records: dict[str, CampaignRecord] = {}
        self.lock = threading.Lock()
        self.data_dir = Path(config.data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "uploads").mkdir(exist_ok=True)
        self._index_path = self.data_dir / "index.json"
        self._counter = 0
        self._recover_index()

    # -- persistence ---------------------------------------------------------

    def _read_index(self) -> dict[str, Any]:
        if self._index_path.is_file():
            return json.loads(self._index_path.read_text(encoding="utf-8"))
        return {}

    def _write_index_entry(self, campaign_id: str, entry: dict[str, Any]) -> None:
        with self.lock:
            index = self._read_index()
            index[campaign_id] = entry
            self._index_path.write_text(canonical_dumps(index), encoding="utf-8")

    def transcript_path(self, campaign_id: str) -> Path:
        return self.data_dir / f"{campaign_id}.transcript.json"

    def _recover_index(self) -> None:
        """Completed campaigns stay retrievable; in-flight ones fail with a restart marker."""
        index = self._read_index()
        changed = False
        for campaign_id, entry in index.items():
            state = entry.get("state", "failed")
            if state in ACTIVE_STATES:
                entry["state"] = "failed"
                entry["error"] = "service-restart"
                changed = True
                path = self.transcript_path(campaign_id)
                if not path.is_file():
                    marker = {
                        "run_id": campaign_id,
                        "seed": entry.get("seed", 0),
                        "policy": None,
                        "matrix": None,
                        "dna": None,
                        "scenes": [],
                        "events": [
                            {
                                "seq": 0,
                                "ts": 0.0,
                                "run_id": campaign_id,
                                "scene_index": None,
                                "attempt": None,
                                "agent_role": "system",
                                "kind": "fault",
                                "payload": {"reason": "service-restart"},
                            }
                        ],
                        "totals": {"tokens_in": 0, "tokens_out": 0, "latency_s": 0.0, "usd": 0.0, "calls": {}},
                    }
                    path.write_text(canonical_dumps(marker), encoding="utf-8")
            record = CampaignRecord(
                campaign_id=campaign_id,
                request=CampaignRequest(
                    url=entry.get("url", "unknown"),
                    objective=entry.get("objective", "unknown"),
                    n_scenes=entry.get("n_scenes", 1),
                ),
                profile=self.config.profiles[self.config.default_profile],
                seed=entry.get("seed", 0),
                state=entry["state"],
                error=entry.get("error"),
            )
            self.records[campaign_id] = record
        if changed:
            self._index_path.write_text(canonical_dumps(index), encoding="utf-8")

    # -- campaign lifecycle ----------------------------------------------------

    def active_count(self) -> int:
        with self.lock:
            return sum(
                1
                for r in self.records.values()
                if r.state in ACTIVE_STATES and r.thread is not None and r.thread.is_alive()
            )

    def new_campaign_id(self, request: CampaignRequest, seed: int) -> str:
        with self.lock:
            self._counter += 1
            ordinal = self._counter
        material = f"{ordinal}/{seed}/{request.url}/{request.objective}"
        return "cmp-" + hashlib.sha256(material.encode("utf-8")).hexdigest()[:12]

    def submit(self, request: CampaignRequest) -> CampaignRecord:
        profile = self.config.profile(request.backend_profile)
        seed = request.seed if request.seed is not None else self.config.master_seed
        campaign_id = self.new_campaign_id(request, seed)
        meter = CostMeter(profile.sim.cost_model)
        log = self.hub.create_run(campaign_id, clock=lambda: meter.now)
        record = CampaignRecord(
            campaign_id=campaign_id, request=request, profile=profile, seed=seed, log=log, meter=meter
        )
        with self.lock:
            self.records[campaign_id] = record
        self._write_index_entry(campaign_id, self._index_entry(record))
        thread = threading.Thread(target=self._execute, args=(record,), daemon=True)
        record.thread = thread
        thread.start()
        return record

    def _index_entry(self, record: CampaignRecord) -> dict[str, Any]:
        return {
            "state": record.state,
            "url": record.request.url,
            "objective": record.request.objective,
            "n_scenes": record.request.n_scenes,
            "seed": record.seed,
            "error": record.error,
            "file": self.transcript_path(record.campaign_id).name,
        }

    def _set_state(self, record: CampaignRecord, state: str) -> None:
        record.state = state
        assert record.log is not None
        if state in ACTIVE_STATES and state != "pending":
            record.log.emit(kind="phase_start", agent_role="system", payload={"phase": state})
        if record.profile.pacing_s:
            sleep(record.profile.pacing_s)

    def _finish(self, record: CampaignRecord, transcript: dict[str, Any], state: str) -> None:
        self.transcript_path(record.campaign_id).write_text(
            canonical_dumps(transcript), encoding="utf-8"
        )
        record.state = state
        self._write_index_entry(record.campaign_id, self._index_entry(record))
        assert record.log is not None
        record.log.close()

    def _execute(self, record: CampaignRecord) -> None:
        log = record.log
        meter = record.meter
        assert log is not None and meter is not None
        request = record.request
        profile = record.profile
        should_abort = record.cancel.is_set
        matrix = None
        dna = None
        try:
            backends = profile.build_backends(record.seed, fixture_root=self.config.fixture_root)

            self._set_state(record, "extracting")
            if should_abort():
                raise AbortedRun("aborted before extraction")
            site = fetch_site(request.url, FetchPolicy(fixture_root=self.config.fixture_root))
            dna = build_brand_dna(
                site,
                backends.extractor,
                repair_budget=profile.parse_repair_budget,
                on_event=log.emit,
                charge=meter.charge,
            )
            record.dna_doc = dna.to_dict()
            log.emit(
                kind="phase_end",
                agent_role="system",
                payload={"phase": "extracting", "dna": dna.to_dict()},
            )

            self._set_state(record, "normalizing")
            if should_abort():
                raise AbortedRun("aborted before normalization")
            asset = self._resolve_asset(record)
            asset = normalize_asset(asset, dna, backends.enhancer, on_event=log.emit, charge=meter.charge)
            log.emit(kind="phase_end", agent_role="system", payload={"phase": "normalizing"})

            self._set_state(record, "scripting")
            if should_abort():
                raise AbortedRun("aborted before scripting")
            matrix = author_script(
                dna,
                request.objective,
                request.n_scenes,
                backends.director,
                repair_budget=profile.parse_repair_budget,
                on_event=log.emit,
                charge=meter.charge,
            )
            log.emit(
                kind="phase_end",
                agent_role="system",
                payload={"phase": "scripting", "scenes": len(matrix.scenes)},
            )

            self._set_state(record, "generating")
            policy = record.request.policy
            from .qc import QcPolicy

            pace = (lambda: sleep(profile.pacing_s)) if profile.pacing_s else None
            transcript = run_chain(
                matrix,
                asset,
                dna,
                QcPolicy(retry_budget=policy.retry_budget, consensus=policy.consensus),
                backends,
                record.seed,
                run_id=record.campaign_id,
                log=log,
                meter=meter,
                should_abort=should_abort,
                pace=pace,
            )
            log.emit(kind="phase_end", agent_role="system", payload={"phase": "generating"})
            transcript.events = log.events()  # include every post-chain event
            self._finish(record, transcript.to_dict(), "completed")
        except AbortedRun:
            record.error = "aborted"
            log.emit(kind="fault", agent_role="system", payload={"reason": "aborted"})
            self._finish(record, self._partial_transcript(record, matrix, dna), "failed")
        except ParseExhausted as exc:
            record.error = f"parse-exhausted: {exc}"
            log.emit(
                kind="fault",
                agent_role="system",
                payload={
                    "reason": "parse-exhausted",
                    "attempts": exc.attempts,
                    "violations": [v.to_dict() for v in exc.violations],
                },
            )
            self._finish(record, self._partial_transcript(record, matrix, dna), "failed")
        except Exception as exc:  # any backend/pipeline fault ends the campaign, never the service
            record.error = str(exc)
            log.emit(kind="fault", agent_role="system", payload={"reason": "error", "detail": str(exc)})
            self._finish(record, self._partial_transcript(record, matrix, dna), "failed")

    def _partial_transcript(self, record: CampaignRecord, matrix: Any, dna: Any) -> dict[str, Any]:
        assert record.log is not None and record.meter is not None
        from .qc import QcPolicy

        policy = QcPolicy(retry_budget=record.request.policy.retry_budget)
        transcript = RunTranscript(
            run_id=record.campaign_id,
            matrix=matrix,
            dna=dna,
            scenes=[],
            events=record.log.events(),
            totals=record.meter.totals,
            seed=record.seed,
            policy=policy,
        )
        return transcript.to_dict()

    def _resolve_asset(self, record: CampaignRecord) -> AssetDescriptor:
        doc = record.request.asset
        if doc is None:
            # sim-mode default: a plausibly noisy source asset tied to the campaign
            return AssetDescriptor(
                asset_id=f"{record.campaign_id}-asset",
                illumination=0.35,
                resolution=0.55,
                background_isolation=0.4,
                content_digest=content_digest({"campaign": record.campaign_id, "seed": record.seed}),
            )
        return descriptor_from_dict(doc)


def _validation_response(exc: ValidationError) -> JSONResponse:
    detail = [
        {"loc": list(err["loc"]), "msg": err["msg"], "type": err["type"]} for err in exc.errors()
    ]
    return JSONResponse(status_code=422, content={"detail": detail})


def create_app(config: AppConfig | None = None) -> FastAPI:
    config = config or AppConfig(profiles={})
    if not config.profiles:
        raise ConfigError("service requires at least one backend profile")
    state = ServiceState(config)
    app = FastAPI(title="genflow", version="0.1.0")
    app.state.service = state

    @app.get("/v1/healthz")
    def healthz() -> dict[str, str]:
        return {"status": "ok"}

    @app.post("/v1/campaigns", status_code=202)
    async def submit_campaign(request: Request) -> Any:
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/"):
            body, upload_error = await _parse_multipart(request, state)
            if upload_error is not None:
                return upload_error
        else:
            try:
                body = await request.json()
            except Exception:
                return JSONResponse(status_code=422, content={"detail": [{"loc": ["body"], "msg": "invalid JSON body", "type": "json_invalid"}]})
        try:
            campaign = CampaignRequest.model_validate(body)
        except ValidationError as exc:
            return _validation_response(exc)
        try:
            state.config.profile(campaign.backend_profile)
        except ConfigError as exc:
            return JSONResponse(
                status_code=422,
                content={"detail": [{"loc": ["backend_profile"], "msg": str(exc), "type": "value_error"}]},
            )
        if state.active_count() >= state.config.max_concurrent:
            return JSONResponse(status_code=503, content={"detail": "at capacity; retry later"})
        record = state.submit(campaign)
        # the launch is non-blocking: report the submission-time state, not
        # whatever phase the executor thread has already reached
        return {"campaign_id": record.campaign_id, "state": "pending"}

    async def _parse_multipart(
        request: Request, state: ServiceState
    ) -> tuple[dict[str, Any], JSONResponse | None]:
        form = await request.form()
        raw = form.get("campaign")
        try:
            body = json.loads(raw) if isinstance(raw, str) else {}
        except ValueError:
            return {}, JSONResponse(
                status_code=422,
                content={"detail": [{"loc": ["campaign"], "msg": "campaign field must be JSON", "type": "json_invalid"}]},
            )
        upload = form.get("asset_file")
        if upload is not None and not isinstance(upload, str):
            payload = await upload.read()
            digest = hashlib.sha256(payload).hexdigest()
            stored = state.data_dir / "uploads" / f"{digest[:16]}_{upload.filename}"
            stored.write_bytes(payload)
            profile_name = body.get("backend_profile") or state.config.default_profile
            try:
                profile = state.config.profile(profile_name)
            except ConfigError:
                profile = None
            if profile is not None and profile.provider == "sim":
                return {}, JSONResponse(
                    status_code=422,
                    content={
                        "detail": [
                            {
                                "loc": ["asset_file"],
                                "msg": "sim profiles take a descriptor JSON asset; binary uploads go to remote profiles",
                                "type": "value_error",
                            }
                        ]
                    },
                )
            body["asset"] = {
                "asset_id": upload.filename or digest[:16],
                "upload_path": str(stored),
                "illumination": 0.5,
                "resolution": 0.5,
                "background_isolation": 0.5,
                "content_digest": digest,
            }
        return body, None

    def _record_or_404(campaign_id: str) -> CampaignRecord:
        with state.lock:
            record = state.records.get(campaign_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown campaign {campaign_id}")
        return record

    @app.get("/v1/campaigns/{campaign_id}")
    def get_status(campaign_id: str) -> dict[str, Any]:
        record = _record_or_404(campaign_id)
        progress = None
        if record.log is not None:
            events = record.log.events()
            scene = None
            attempt = None
            for event in reversed(events):
                if attempt is None and event.kind == "generation" and event.agent_role == "generator":
                    attempt = event.attempt
                if event.kind == "phase_start" and event.payload.get("phase") == "scene":
                    scene = event.scene_index
                    break
            progress = {"scene": scene, "of": record.request.n_scenes, "attempt": attempt}
        return record.snapshot(progress)

    @app.get("/v1/campaigns/{campaign_id}/events")
    def stream_events(campaign_id: str, request: Request, from_seq: int = 0) -> StreamingResponse:
        record = _record_or_404(campaign_id)
        last_id = request.headers.get("last-event-id")
        if last_id is not None:
            try:
                from_seq = int(last_id) + 1
            except ValueError:
                raise HTTPException(status_code=400, detail="Last-Event-ID must be an integer")

        def generate() -> Iterator[str]:
            if record.log is not None:
                subscription = record.log.subscribe(from_seq)
                for event in subscription:
                    yield f"id: {event.seq}\ndata: {event.dumps()}\n\n"
                if subscription.dropped:
                    yield 'event: dropped\ndata: {"reason":"subscriber-overflow"}\n\n'
                return
            path = state.transcript_path(campaign_id)
            if path.is_file():
                doc = json.loads(path.read_text(encoding="utf-8"))
                for event_doc in doc.get("events", []):
                    if event_doc["seq"] >= from_seq:
                        yield f"id: {event_doc['seq']}\ndata: {json.dumps(event_doc, separators=(',', ':'), ensure_ascii=False)}\n\n"

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/v1/campaigns/{campaign_id}/result")
    def get_result(campaign_id: str) -> Any:
        record = _record_or_404(campaign_id)
        if record.state not in TERMINAL_STATES:
            raise HTTPException(status_code=409, detail=f"campaign is {record.state}; result not ready")
        path = state.transcript_path(campaign_id)
        if not path.is_file():
            raise HTTPException(status_code=404, detail="transcript missing")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.post("/v1/campaigns/{campaign_id}/abort")
    def abort_campaign(campaign_id: str) -> dict[str, str]:
        record = _record_or_404(campaign_id)
        if record.state in TERMINAL_STATES:
            raise HTTPException(status_code=409, detail=f"campaign already {record.state}")
        record.cancel.set()
        return {"campaign_id": campaign_id, "state": record.state, "aborting": "true"}

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
