from __future__ import annotations

import itertools
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genflow.artifacts import FAILURE_MODES, FrameRef, ViolationReport
from genflow.backends.base import BackendSet
from genflow.backends.sim import SimEvaluator, SimParams, build_sim_backends
from genflow.branddna import BrandDNA
from genflow.director import SceneSpec
from genflow.qc import (
    AGENT_RESPONSIBILITY,
    Commit,
    CommittedScene,
    CorrectivePrompt,
    FailedScene,
    NEGATIVE_TERMS,
    QcPolicy,
    Refine,
    Verdict,
    consensus,
    evaluate,
    qc_generate_scene,
    synthesize_corrective,
)
from genflow.rng import Substream

from conftest import make_artifact


def violation(mode: str, frame: int = 5) -> ViolationReport:
    return ViolationReport(mode=mode, frame_index=frame, detail=f"{mode} in frame {frame}")


def verdict(agent: str, violations: tuple = ()) -> Verdict:
    return Verdict(agent=agent, passed=not violations, violations=violations, critique="c")


def backends_with(mode_probs: dict, recovery: dict, seed: int = 1) -> BackendSet:
    params = SimParams(mode_probs=mode_probs, recovery_probs=recovery)
    return build_sim_backends(params, seed)


def run_scene(
    spec: SceneSpec,
    dna: BrandDNA,
    backends: BackendSet,
    budget: int = 3,
    seed: int = 1,
    events: list | None = None,
):
    sink = (lambda **f: events.append(f)) if events is not None else None
    return qc_generate_scene(
        spec,
        FrameRef(digest="c" * 64, scene_index=-1, frame_index=0),
        dna,
        QcPolicy(retry_budget=budget),
        backends,
        Substream(seed).derive("scene", 0),
        on_event=sink,
    )


# ---------------------------------------------------------------------------
# consensus
# ---------------------------------------------------------------------------


def test_consensus_exhaustive_four_cases() -> None:
    policy = QcPolicy()
    morphing = violation("temporal_morphing")
    typo = violation("typographic_hallucination")
    for director_pass, safety_pass in itertools.product((True, False), repeat=2):
        verdicts = (
            verdict("director_agent", () if director_pass else (morphing,)),
            verdict("brand_safety_agent", () if safety_pass else (typo,)),
        )
        decision = consensus(verdicts, policy)
        if director_pass and safety_pass:
            assert isinstance(decision, Commit)
        else:
            assert isinstance(decision, Refine)
            expected = ([morphing] if not director_pass else []) + ([typo] if not safety_pass else [])
            assert list(decision.violations) == expected


def test_consensus_merge_is_mode_order_deduplicated() -> None:
    a = violation("typographic_hallucination", 9)
    b = violation("temporal_morphing", 3)
    duplicate = violation("typographic_hallucination", 9)
    decision = consensus(
        (verdict("director_agent", (b,)), verdict("brand_safety_agent", (a, duplicate))),
        QcPolicy(),
    )
    assert isinstance(decision, Refine)
    assert [v.mode for v in decision.violations] == ["temporal_morphing", "typographic_hallucination"]
    assert len(decision.violations) == 2


def test_verdict_invariant_enforced() -> None:
    with pytest.raises(ValueError):
        Verdict(agent="director_agent", passed=True, violations=(violation("temporal_morphing"),), critique="")


# ---------------------------------------------------------------------------
# synthesize_corrective
# ---------------------------------------------------------------------------


def test_corrective_template_lookup(scene_spec: SceneSpec) -> None:
    corrective = synthesize_corrective([violation("typographic_hallucination", 24)], scene_spec, [])
    assert corrective.iteration == 1
    assert corrective.base_prompt == scene_spec.prompt
    assert NEGATIVE_TERMS["typographic_hallucination"] in corrective.negative_terms
    assert corrective.targeted_modes == {"typographic_hallucination"}


def test_corrective_accumulates_and_dedupes(scene_spec: SceneSpec) -> None:
    first = synthesize_corrective([violation("typographic_hallucination")], scene_spec, [])
    second = synthesize_corrective([violation("typographic_hallucination")], scene_spec, [first])
    assert second.iteration == 2
    assert list(second.negative_terms).count(NEGATIVE_TERMS["typographic_hallucination"]) == 1


def test_corrective_targets_all_present_modes(scene_spec: SceneSpec) -> None:
    corrective = synthesize_corrective(
        [violation("temporal_morphing"), violation("brand_color_violation")], scene_spec, []
    )
    assert corrective.targeted_modes == {"temporal_morphing", "brand_color_violation"}


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_clean_artifact_passes_both(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    verdicts = evaluate(
        make_artifact(), scene_spec, sample_dna, (SimEvaluator("director_agent"), SimEvaluator("brand_safety_agent"))
    )
    assert [v.agent for v in verdicts] == ["director_agent", "brand_safety_agent"]
    assert all(v.passed for v in verdicts)


def test_typographic_violation_fails_safety_with_frame_reference(
    scene_spec: SceneSpec, sample_dna: BrandDNA
) -> None:
    artifact = make_artifact(violations=(violation("typographic_hallucination", 24),))
    director_verdict, safety_verdict = evaluate(
        artifact, scene_spec, sample_dna, (SimEvaluator("director_agent"), SimEvaluator("brand_safety_agent"))
    )
    assert director_verdict.passed
    assert not safety_verdict.passed
    assert "frame 24" in safety_verdict.violations[0].detail


def test_two_mode_artifact_fails_both(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    artifact = make_artifact(
        violations=(violation("temporal_morphing", 3), violation("brand_color_violation", 7))
    )
    director_verdict, safety_verdict = evaluate(
        artifact, scene_spec, sample_dna, (SimEvaluator("director_agent"), SimEvaluator("brand_safety_agent"))
    )
    assert not director_verdict.passed and not safety_verdict.passed


class FaultyEvaluator:
    role = "brand_safety_agent"

    def evaluate(self, video, spec, dna):
        raise RuntimeError("judge offline")


def test_evaluator_fault_becomes_synthetic_violation(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    verdicts = evaluate(make_artifact(), scene_spec, sample_dna, (SimEvaluator("director_agent"), FaultyEvaluator()))
    assert verdicts[0].passed
    assert not verdicts[1].passed
    assert "evaluator fault" in verdicts[1].violations[0].detail


@settings(max_examples=80)
@given(
    modes=st.lists(st.sampled_from(FAILURE_MODES), min_size=0, max_size=4, unique=True),
    frame=st.integers(min_value=1, max_value=24),
)
def test_detection_partition_is_exact(modes: list[str], frame: int) -> None:
    dna = BrandDNA(("#000000",), ("X",), (), (), "fixture:u")
    spec = SceneSpec(0, "p", "front", 35.0, "studio", (0.0, 0.0), 1.0)
    injected = tuple(violation(m, frame) for m in modes)
    artifact = make_artifact(violations=injected)
    director_verdict, safety_verdict = evaluate(
        artifact, spec, dna, (SimEvaluator("director_agent"), SimEvaluator("brand_safety_agent"))
    )
    assert set(director_verdict.violations) == {
        v for v in injected if v.mode in AGENT_RESPONSIBILITY["director_agent"]
    }
    assert set(safety_verdict.violations) == {
        v for v in injected if v.mode in AGENT_RESPONSIBILITY["brand_safety_agent"]
    }


# ---------------------------------------------------------------------------
# qc_generate_scene
# ---------------------------------------------------------------------------


def test_clean_sim_commits_without_retry(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    events: list = []
    outcome = run_scene(scene_spec, sample_dna, backends_with({}, {}), events=events)
    assert isinstance(outcome, CommittedScene)
    assert outcome.retries == 0
    assert outcome.violation_history == []
    kinds = [e["kind"] for e in events]
    assert kinds == ["generation", "verdict", "verdict", "consensus"]


def test_certain_recovery_commits_with_exactly_one_retry(
    scene_spec: SceneSpec, sample_dna: BrandDNA
) -> None:
    for seed in range(30):
        backends = backends_with(
            {"temporal_morphing": 1.0}, {m: 1.0 for m in FAILURE_MODES}, seed=seed
        )
        outcome = run_scene(scene_spec, sample_dna, backends, seed=seed)
        assert isinstance(outcome, CommittedScene)
        assert outcome.retries == 1
        assert len(outcome.violation_history) == 1


def test_no_recovery_fails_after_budget(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    events: list = []
    backends = backends_with({"brand_color_violation": 1.0}, {m: 0.0 for m in FAILURE_MODES})
    outcome = run_scene(scene_spec, sample_dna, backends, budget=3, events=events)
    assert isinstance(outcome, FailedScene)
    assert outcome.retries == 3
    assert len(outcome.violation_history) == 4  # 1 initial + 3 corrective attempts
    correctives = [e for e in events if e["kind"] == "corrective"]
    assert [e["payload"]["iteration"] for e in correctives] == [1, 2, 3]


def test_budget_zero_single_attempt(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    backends = backends_with({"temporal_morphing": 1.0}, {m: 1.0 for m in FAILURE_MODES})
    outcome = run_scene(scene_spec, sample_dna, backends, budget=0)
    assert isinstance(outcome, FailedScene)
    assert outcome.retries == 0


def test_violation_state_follows_every_refine(scene_spec: SceneSpec, sample_dna: BrandDNA) -> None:
    events: list = []
    backends = backends_with({"typographic_hallucination": 1.0}, {m: 0.0 for m in FAILURE_MODES})
    run_scene(scene_spec, sample_dna, backends, budget=2, events=events)
    refines = [e for e in events if e["kind"] == "consensus" and e["payload"]["decision"] == "refine"]
    states = [e for e in events if e["kind"] == "violation_state"]
    assert len(refines) == len(states) == 3


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31), budget=st.integers(min_value=0, max_value=5))
def test_retry_count_never_exceeds_budget(seed: int, budget: int) -> None:
    dna = BrandDNA(("#000000",), ("X",), (), (), "fixture:u")
    spec = SceneSpec(0, "p", "front", 35.0, "studio", (0.0, 0.0), 0.5)
    params = SimParams(
        mode_probs={"temporal_morphing": 0.4, "brand_color_violation": 0.3},
        recovery_probs={m: 0.4 for m in FAILURE_MODES},
    )
    outcome = qc_generate_scene(
        spec,
        FrameRef(digest="c" * 64, scene_index=-1, frame_index=0),
        dna,
        QcPolicy(retry_budget=budget),
        build_sim_backends(params, seed),
        Substream(seed).derive("scene", 0),
    )
    assert outcome.retries <= budget
    iterations = list(range(1, len(outcome.violation_history)))
    assert iterations == sorted(iterations)  # corrective iterations gapless by construction


class SlowEvaluator:
    """Latency-injecting wrapper used to randomize completion order."""

    def __init__(self, inner: SimEvaluator, delay_s: float) -> None:
        self.inner = inner
        self.role = inner.role
        self.delay_s = delay_s

    def evaluate(self, video, spec, dna):
        time.sleep(self.delay_s)
        return self.inner.evaluate(video, spec, dna)


def test_join_order_is_fixed_regardless_of_completion_order(
    scene_spec: SceneSpec, sample_dna: BrandDNA
) -> None:
    artifact = make_artifact(violations=(violation("temporal_morphing", 2),))
    fast_director = (SlowEvaluator(SimEvaluator("director_agent"), 0.0), SlowEvaluator(SimEvaluator("brand_safety_agent"), 0.05))
    slow_director = (SlowEvaluator(SimEvaluator("director_agent"), 0.05), SlowEvaluator(SimEvaluator("brand_safety_agent"), 0.0))
    first = evaluate(artifact, scene_spec, sample_dna, fast_director)
    second = evaluate(artifact, scene_spec, sample_dna, slow_director)
    assert first == second
    assert [v.agent for v in first] == ["director_agent", "brand_safety_agent"]
