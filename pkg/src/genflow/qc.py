"""The adversarial quality-control cycle.

Each generated scene is inspected concurrently by two role-specialized
evaluators; a strict-AND consensus either commits the scene or has the
orchestrator synthesize a corrective, negative-weighted prompt and
regenerate from the same init frame, within a bounded retry budget.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .artifacts import FAILURE_MODES, FrameRef, VideoArtifact, mode_sort_key
from .backends.base import BackendSet, EvaluatorBackend
from .branddna import BrandDNA
from .director import SceneSpec
from .errors import AbortedRun
from .rng import Substream

# Which evaluator answers for which failure modes.
AGENT_RESPONSIBILITY: dict[str, tuple[str, ...]] = {
    "director_agent": ("temporal_morphing", "composition_error"),
    "brand_safety_agent": ("typographic_hallucination", "brand_color_violation"),
}

# Fixed negative-prompt template per failure mode.
NEGATIVE_TERMS: dict[str, str] = {
    "temporal_morphing": "no geometry drift or warping of the subject between frames",
    "typographic_hallucination": "no garbled, invented, or distorted text anywhere in frame",
    "brand_color_violation": "no colors outside the approved brand palette",
    "composition_error": "no deviation from the specified camera framing and motion",
}

# Evaluator pool is created lazily per process: a pool inherited across
# fork() carries dead worker threads and deadlocks the child.
_pool_lock = threading.Lock()
_pool: ThreadPoolExecutor | None = None
_pool_pid: int | None = None


def _evaluator_pool() -> ThreadPoolExecutor:
    global _pool, _pool_pid
    with _pool_lock:
        if _pool is None or _pool_pid != os.getpid():
            _pool = ThreadPoolExecutor(max_workers=8, thread_name_prefix="qc-eval")
            _pool_pid = os.getpid()
        return _pool


@dataclass(frozen=True)
class Verdict:
    agent: str
    passed: bool
    violations: tuple[Any, ...]
    critique: str

    def __post_init__(self) -> None:
        if self.passed != (len(self.violations) == 0):
            raise ValueError("verdict passes iff it carries no violations")

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent,
            "pass": self.passed,
            "violations": [v.to_dict() for v in self.violations],
            "critique": self.critique,
        }


@dataclass(frozen=True)
class CorrectivePrompt:
    base_prompt: str
    negative_terms: tuple[str, ...]
    targeted_modes: frozenset[str]
    iteration: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_prompt": self.base_prompt,
            "negative_terms": list(self.negative_terms),
            "targeted_modes": sorted(self.targeted_modes, key=FAILURE_MODES.index),
            "iteration": self.iteration,
        }


@dataclass(frozen=True)
class QcPolicy:
    retry_budget: int = 3
    consensus: str = "strict_and"

    def __post_init__(self) -> None:
        if self.retry_budget < 0:
            raise ValueError("retry_budget must be >= 0")
        if self.consensus != "strict_and":
            raise ValueError(f"unknown consensus rule {self.consensus!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"retry_budget": self.retry_budget, "consensus": self.consensus}


@dataclass(frozen=True)
class Commit:
    pass


@dataclass(frozen=True)
class Refine:
    violations: tuple[Any, ...]


@dataclass
class CommittedScene:
    artifact: VideoArtifact
    retries: int
    violation_history: list[list[Any]] = field(default_factory=list)

    committed = True


@dataclass
class FailedScene:
    artifact: VideoArtifact
    retries: int
    violation_history: list[list[Any]]

    committed = False


SceneOutcome = CommittedScene | FailedScene


def _fault_verdict(agent: str, exc: Exception) -> Verdict:
    from .artifacts import ViolationReport

    # a faulted evaluator cannot clear the artifact; pin the synthetic
    # violation to the agent's first responsibility so merges stay typed
    mode = AGENT_RESPONSIBILITY[agent][0]
    violation = ViolationReport(mode=mode, frame_index=0, detail=f"evaluator fault: {exc}")
    return Verdict(agent=agent, passed=False, violations=(violation,), critique=f"evaluator fault: {exc}")


def evaluate(
    video: VideoArtifact,
    spec: SceneSpec,
    dna: BrandDNA,
    evaluators: Sequence[EvaluatorBackend],
) -> tuple[Verdict, Verdict]:
    """Run both evaluators concurrently; join in fixed (director, safety) order."""
    director_backend, safety_backend = evaluators

    def call(backend: EvaluatorBackend) -> Verdict:
        return backend.evaluate(video, spec, dna)

    pool = _evaluator_pool()
    director_future = pool.submit(call, director_backend)
    safety_future = pool.submit(call, safety_backend)
    try:
        director_verdict = director_future.result()
    except Exception as exc:
        director_verdict = _fault_verdict("director_agent", exc)
    try:
        safety_verdict = safety_future.result()
    except Exception as exc:
        safety_verdict = _fault_verdict("brand_safety_agent", exc)
    return (director_verdict, safety_verdict)


def consensus(verdicts: tuple[Verdict, Verdict], policy: QcPolicy) -> Commit | Refine:
    """strict_and: commit iff both pass, else refine with the deduplicated union."""
    if all(v.passed for v in verdicts):
        return Commit()
    merged: dict[tuple[str, int], Any] = {}
    for verdict in verdicts:
        for violation in verdict.violations:
            merged.setdefault(violation.key(), violation)
    ordered = sorted(merged.values(), key=lambda v: mode_sort_key(v.mode, v.frame_index))
    return Refine(violations=tuple(ordered))


def synthesize_corrective(
    violations: Sequence[Any],
    spec: SceneSpec,
    history: Sequence[CorrectivePrompt],
) -> CorrectivePrompt:
    """Accumulate negative terms targeting every mode seen, one template per mode."""
    if not violations:
        raise ValueError("cannot synthesize a corrective from zero violations")
    terms: list[str] = []
    for prior in history:
        for term in prior.negative_terms:
            if term not in terms:
                terms.append(term)
    modes = sorted({v.mode for v in violations}, key=FAILURE_MODES.index)
    for mode in modes:
        term = NEGATIVE_TERMS[mode]
        if term not in terms:
            terms.append(term)
    return CorrectivePrompt(
        base_prompt=spec.prompt,
        negative_terms=tuple(terms),
        targeted_modes=frozenset(modes),
        iteration=len(history) + 1,
    )


def qc_generate_scene(
    spec: SceneSpec,
    init: FrameRef,
    dna: BrandDNA,
    policy: QcPolicy,
    backends: BackendSet,
    rng_stream: Substream,
    *,
    on_event: Callable[..., None] | None = None,
    charge: Callable[[str], None] | None = None,
    should_abort: Callable[[], bool] | None = None,
) -> SceneOutcome:
    """Generate one scene through the full evaluate/correct/regenerate cycle."""

    def emit(**fields: Any) -> None:
        if on_event is not None:
            on_event(scene_index=spec.index, **fields)

    def pay(kind: str) -> None:
        if charge is not None:
            charge(kind)

    corrective: CorrectivePrompt | None = None
    corrective_history: list[CorrectivePrompt] = []
    violation_history: list[list[Any]] = []
    artifact: VideoArtifact | None = None

    for attempt in range(policy.retry_budget + 1):
        if should_abort is not None and should_abort():
            raise AbortedRun(f"scene {spec.index} aborted before attempt {attempt}")

        attempt_stream = rng_stream.derive("attempt", attempt)
        pay("generator")
        try:
            artifact = backends.generator.generate(spec, init, corrective, attempt_stream.derive("generate"))
        except Exception as exc:
            emit(kind="fault", agent_role="generator", attempt=attempt, payload={"error": str(exc)})
            from .artifacts import ViolationReport

            synthetic = ViolationReport(
                mode="composition_error", frame_index=0, detail=f"generator fault: {exc}"
            )
            violation_history.append([synthetic])
            last = artifact if artifact is not None else _placeholder_artifact(spec, init, attempt)
            return FailedScene(artifact=last, retries=attempt, violation_history=violation_history)

        emit(
            kind="generation",
            agent_role="generator",
            attempt=attempt,
            payload={
                "frames": len(artifact.frames),
                "final_digest": artifact.frames[-1].digest,
                "corrective_iteration": corrective.iteration if corrective else 0,
            },
        )

        pay("evaluator")
        pay("evaluator")
        verdicts = evaluate(artifact, spec, dna, backends.evaluators)
        for verdict in verdicts:
            emit(kind="verdict", agent_role=verdict.agent, attempt=attempt, payload=verdict.to_dict())

        decision = consensus(verdicts, policy)
        if isinstance(decision, Commit):
            emit(
                kind="consensus",
                agent_role="orchestrator",
                attempt=attempt,
                payload={"decision": "commit", "violations": []},
            )
            return CommittedScene(artifact=artifact, retries=attempt, violation_history=violation_history)

        violations = list(decision.violations)
        violation_history.append(violations)
        emit(
            kind="consensus",
            agent_role="orchestrator",
            attempt=attempt,
            payload={"decision": "refine", "violations": [v.to_dict() for v in violations]},
        )
        emit(
            kind="violation_state",
            agent_role="system",
            attempt=attempt,
            payload={"active": True, "violations": [v.to_dict() for v in violations]},
        )

        if attempt == policy.retry_budget:
            break

        pay("orchestrator")
        corrective = synthesize_corrective(violations, spec, corrective_history)
        corrective_history.append(corrective)
        emit(kind="corrective", agent_role="orchestrator", attempt=attempt, payload=corrective.to_dict())

    assert artifact is not None
    return FailedScene(artifact=artifact, retries=policy.retry_budget, violation_history=violation_history)


def _placeholder_artifact(spec: SceneSpec, init: FrameRef, attempt: int) -> VideoArtifact:
    first = FrameRef(digest=init.digest, scene_index=spec.index, frame_index=0)
    return VideoArtifact(
        scene_index=spec.index,
        attempt=attempt,
        frames=(first,),
        injected_violations=(),
        init_frame=init,
    )
