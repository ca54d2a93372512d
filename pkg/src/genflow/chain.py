"""Sequential scene execution with step-by-step state passing.

The final frame of scene N seeds scene N+1 — committed or not: when a scene
exhausts its retry budget the chain continues from that scene's last
attempt, so per-scene statistics stay independent and whole-run accounting
survives local failures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .artifacts import FrameRef, extract_final_frame
from .assets import AssetDescriptor
from .backends.base import BackendSet
from .backends.cost import CostMeter, CostTotals
from .branddna import BrandDNA
from .canon import canonical_dumps, content_digest
from .director import ScriptMatrix
from .qc import QcPolicy, SceneOutcome, qc_generate_scene
from .rng import Substream
from .telemetry import Event, RunLog


@dataclass
class RunTranscript:
    """Complete per-run record: plan, constraints, outcomes, events, totals."""

    run_id: str
    matrix: ScriptMatrix | None
    dna: BrandDNA | None
    scenes: list[SceneOutcome]
    events: list[Event]
    totals: CostTotals
    seed: int = 0
    policy: QcPolicy | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "policy": self.policy.to_dict() if self.policy else None,
            "matrix": self.matrix.to_dict() if self.matrix else None,
            "dna": self.dna.to_dict() if self.dna else None,
            "scenes": [_outcome_dict(o) for o in self.scenes],
            "events": [e.to_dict() for e in self.events],
            "totals": self.totals.to_dict(),
        }

    def dumps(self) -> str:
        return canonical_dumps(self.to_dict())


def _outcome_dict(outcome: SceneOutcome) -> dict[str, Any]:
    return {
        "scene_index": outcome.artifact.scene_index,
        "committed": outcome.committed,
        "retries": outcome.retries,
        "artifact": outcome.artifact.to_dict(),
        "violation_history": [[v.to_dict() for v in attempt] for attempt in outcome.violation_history],
    }


def asset_init_frame(asset: AssetDescriptor) -> FrameRef:
    """Pseudo-frame carrying the reference asset's content digest into scene 0."""
    return FrameRef(digest=asset.content_digest, scene_index=-1, frame_index=0)


def derive_run_id(matrix: ScriptMatrix, asset: AssetDescriptor, dna: BrandDNA, seed: int) -> str:
    material = {
        "matrix": content_digest(matrix.to_dict()),
        "asset": asset.content_digest,
        "dna": dna.digest(),
        "seed": seed,
    }
    return "run-" + content_digest(material)[:12]


def run_chain(
    matrix: ScriptMatrix,
    init_asset: AssetDescriptor,
    dna: BrandDNA,
    policy: QcPolicy,
    backends: BackendSet,
    seed: int,
    *,
    run_id: str | None = None,
    log: RunLog | None = None,
    meter: CostMeter | None = None,
    should_abort: Callable[[], bool] | None = None,
    pace: Callable[[], None] | None = None,
) -> RunTranscript:
    """Execute every scene through QC, passing each final frame forward."""
    run_id = run_id or derive_run_id(matrix, init_asset, dna, seed)
    meter = meter or CostMeter()
    log = log or RunLog(run_id, clock=lambda: meter.now)
    stream = Substream(seed).derive("chain")

    outcomes: list[SceneOutcome] = []
    init = asset_init_frame(init_asset)
    for spec in matrix.scenes:
        log.emit(
            kind="phase_start",
            agent_role="system",
            scene_index=spec.index,
            payload={"phase": "scene", "scene_index": spec.index, "of": len(matrix.scenes)},
        )
        if pace is not None:
            pace()
        outcome = qc_generate_scene(
            spec,
            init,
            dna,
            policy,
            backends,
            stream.derive("scene", spec.index),
            on_event=log.emit,
            charge=meter.charge,
            should_abort=should_abort,
        )
        outcomes.append(outcome)
        log.emit(
            kind="phase_end",
            agent_role="system",
            scene_index=spec.index,
            payload={
                "phase": "scene",
                "scene_index": spec.index,
                "committed": outcome.committed,
                "retries": outcome.retries,
            },
        )
        # committed or not, the next scene starts from this scene's last frame
        init = extract_final_frame(outcome.artifact)

    return RunTranscript(
        run_id=run_id,
        matrix=matrix,
        dna=dna,
        scenes=outcomes,
        events=log.events(),
        totals=meter.totals,
        seed=seed,
        policy=policy,
    )
