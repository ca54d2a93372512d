"""Seeded failure-injecting simulation backends.

The generator draws at most one violation mode per attempt: initial
attempts fail with the configured per-mode probabilities; a regeneration
carrying a corrective recovers its targeted mode with the calibrated
per-attempt probability and never introduces any other mode. Calibration
maps a cumulative recovery yield at a given retry budget onto that
per-attempt probability (geometric model, mode-constant).

Frame digests are a pure function of (run seed, scene index, attempt,
frame index), which makes cross-scene state continuity exactly assertable
without pixels.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..artifacts import FAILURE_MODES, FrameRef, VideoArtifact, ViolationReport
from ..assets import DEFAULT_QUALITY_FLOOR, SimEnhancer
from ..branddna import BrandDNA, RawSite, SchemaViolation
from ..director import CAMERA_ANGLES, LIGHTING_MODES, SceneSpec
from ..errors import InvalidTarget
from ..qc import AGENT_RESPONSIBILITY, CorrectivePrompt, Verdict
from ..rng import Substream
from .base import BackendSet
from .cost import CostModel, default_cost_model

FRAMES_PER_SECOND = 24
DEFAULT_RETRY_BUDGET = 3
DEFAULT_MALFORMED_RATE = 0.084

# Table-calibrated aggregate defaults: per-mode initial failure probabilities
# and the cumulative recovery yields they converge to at the default budget.
AGGREGATE_MODE_PROBS = {
    "temporal_morphing": 0.26,
    "typographic_hallucination": 0.18,
    "brand_color_violation": 0.12,
    "composition_error": 0.02,
}
AGGREGATE_RECOVERY_TARGETS = {
    "temporal_morphing": 0.731,
    "typographic_hallucination": 0.833,
    "brand_color_violation": 0.917,
    "composition_error": 1.0,
}

# Tier presets: total failure mass from the tier pass rates, split across
# modes proportionally to the aggregate shares; recovery target per tier is
# uniform across modes, backed out of the tier yield identity
# pipeline = zero_shot + mass * target.
TIER_FAILURE_MASS = {"simple": 0.28, "complex": 0.88}
TIER_RECOVERY_TARGET = {"simple": 0.264 / 0.28, "complex": 0.68 / 0.88}

_DETAIL_TEMPLATES = {
    "temporal_morphing": "subject geometry drifts and warps near frame {frame}",
    "typographic_hallucination": "rendered typography is garbled in frame {frame}",
    "brand_color_violation": "off-palette color appears in frame {frame}",
    "composition_error": "camera framing deviates from the scene spec in frame {frame}",
}

_FALLBACK_VOICE = ("confident", "clean", "modern")
_FALLBACK_TROPES = ("generic stock footage", "distorted logos")


def calibrate_recovery(target_cumulative_yield: float, retry_budget: int) -> float:
    """Per-attempt recovery probability whose cumulative yield at the budget hits the target."""
    if not 0.0 <= target_cumulative_yield <= 1.0:
        raise InvalidTarget(f"target must be within [0, 1], got {target_cumulative_yield}")
    if retry_budget < 1:
        raise InvalidTarget(f"retry_budget must be >= 1, got {retry_budget}")
    if target_cumulative_yield == 1.0:
        return 1.0
    return 1.0 - (1.0 - target_cumulative_yield) ** (1.0 / retry_budget)


@dataclass(frozen=True)
class SimParams:
    mode_probs: Mapping[str, float]
    recovery_probs: Mapping[str, float]
    malformed_rate: float = DEFAULT_MALFORMED_RATE
    cost_model: CostModel = field(default_factory=default_cost_model)
    master_seed: int = 42
    tier: str | None = None

    def __post_init__(self) -> None:
        for table in (self.mode_probs, self.recovery_probs):
            for mode, prob in table.items():
                if mode not in FAILURE_MODES:
                    raise ValueError(f"unknown failure mode {mode!r}")
                if not 0.0 <= prob <= 1.0:
                    raise ValueError(f"probability out of range for {mode}: {prob}")
        if sum(self.mode_probs.values()) > 1.0 + 1e-9:
            raise ValueError("mode probabilities must sum to at most 1")
        if not 0.0 <= self.malformed_rate <= 1.0:
            raise ValueError(f"malformed_rate out of range: {self.malformed_rate}")

    def total_failure_mass(self) -> float:
        return sum(self.mode_probs.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "tier": self.tier,
            "mode_probs": {m: self.mode_probs[m] for m in FAILURE_MODES if m in self.mode_probs},
            "recovery_probs": {m: self.recovery_probs[m] for m in FAILURE_MODES if m in self.recovery_probs},
            "malformed_rate": self.malformed_rate,
            "master_seed": self.master_seed,
            "cost_model": self.cost_model.to_dict(),
        }


def default_sim_params(
    tier: str | None = None,
    *,
    master_seed: int = 42,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
) -> SimParams:
    """Aggregate or tier-preset parameters calibrated to the reference yields."""
    if tier is None:
        mode_probs = dict(AGGREGATE_MODE_PROBS)
        recovery = {
            mode: calibrate_recovery(target, retry_budget)
            for mode, target in AGGREGATE_RECOVERY_TARGETS.items()
        }
    elif tier in TIER_FAILURE_MASS:
        mass = TIER_FAILURE_MASS[tier]
        aggregate_mass = sum(AGGREGATE_MODE_PROBS.values())
        mode_probs = {m: p * mass / aggregate_mass for m, p in AGGREGATE_MODE_PROBS.items()}
        q = calibrate_recovery(TIER_RECOVERY_TARGET[tier], retry_budget)
        recovery = {mode: q for mode in AGGREGATE_MODE_PROBS}
    else:
        raise ValueError(f"unknown tier {tier!r}")
    return SimParams(mode_probs=mode_probs, recovery_probs=recovery, master_seed=master_seed, tier=tier)


def sim_params_from_dict(doc: Mapping[str, Any] | None, *, master_seed: int | None = None) -> SimParams:
    doc = doc or {}
    base = default_sim_params(doc.get("tier"))
    from .cost import cost_model_from_dict

    return SimParams(
        mode_probs={**base.mode_probs, **doc.get("mode_probs", {})},
        recovery_probs={**base.recovery_probs, **doc.get("recovery_probs", {})},
        malformed_rate=float(doc.get("malformed_rate", base.malformed_rate)),
        cost_model=cost_model_from_dict(doc.get("cost_model")),
        master_seed=int(master_seed if master_seed is not None else doc.get("master_seed", 42)),
        tier=doc.get("tier"),
    )


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------


def frame_digest(run_seed: int, scene_index: int, attempt: int, frame_index: int) -> str:
    material = f"genflow.frame/{run_seed}/{scene_index}/{attempt}/{frame_index}"
    return hashlib.sha256(material.encode("ascii")).hexdigest()


def sim_generate(
    spec: SceneSpec,
    init: FrameRef,
    corrective: CorrectivePrompt | None,
    params: SimParams,
    rng_stream: Substream,
    run_seed: int,
) -> VideoArtifact:
    """One generation attempt with at most one injected violation mode."""
    attempt = corrective.iteration if corrective is not None else 0
    n_frames = max(1, round(spec.duration_s * FRAMES_PER_SECOND))

    frames = [FrameRef(digest=init.digest, scene_index=spec.index, frame_index=0)]
    frames.extend(
        FrameRef(
            digest=frame_digest(run_seed, spec.index, attempt, k),
            scene_index=spec.index,
            frame_index=k,
        )
        for k in range(1, n_frames)
    )

    injected: tuple[ViolationReport, ...] = ()
    mode = _draw_mode(params, corrective, rng_stream)
    if mode is not None:
        frame_index = rng_stream.randint(1, n_frames - 1) if n_frames > 1 else 0
        detail = _DETAIL_TEMPLATES[mode].format(frame=frame_index)
        injected = (ViolationReport(mode=mode, frame_index=frame_index, detail=detail),)

    return VideoArtifact(
        scene_index=spec.index,
        attempt=attempt,
        frames=tuple(frames),
        injected_violations=injected,
        init_frame=init,
    )


def _draw_mode(
    params: SimParams, corrective: CorrectivePrompt | None, stream: Substream
) -> str | None:
    if corrective is None:
        u = stream.random()
        cumulative = 0.0
        for mode in FAILURE_MODES:
            cumulative += params.mode_probs.get(mode, 0.0)
            if u < cumulative:
                return mode
        return None
    # regeneration: recover the targeted mode or re-inject it, never a new one
    targeted = min(corrective.targeted_modes, key=FAILURE_MODES.index)
    if stream.random() < params.recovery_probs.get(targeted, 0.0):
        return None
    return targeted


class SimGenerator:
    def __init__(self, params: SimParams, run_seed: int) -> None:
        self.params = params
        self.run_seed = run_seed

    def generate(
        self,
        spec: SceneSpec,
        init: FrameRef,
        corrective: CorrectivePrompt | None,
        rng_stream: Substream,
    ) -> VideoArtifact:
        return sim_generate(spec, init, corrective, self.params, rng_stream, self.run_seed)


# ---------------------------------------------------------------------------
# Evaluators
# ---------------------------------------------------------------------------


class SimEvaluator:
    """Perfect detector: reports exactly the injected violations it is responsible for."""

    def __init__(self, role: str) -> None:
        if role not in AGENT_RESPONSIBILITY:
            raise ValueError(f"unknown evaluator role {role!r}")
        self.role = role

    def evaluate(self, video: VideoArtifact, spec: SceneSpec, dna: BrandDNA) -> Verdict:
        owned = [v for v in video.injected_violations if v.mode in AGENT_RESPONSIBILITY[self.role]]
        owned.sort(key=lambda v: (FAILURE_MODES.index(v.mode), v.frame_index))
        if owned:
            critique = "; ".join(v.detail for v in owned)
        else:
            critique = "scene complies with the inspected constraints"
        return Verdict(agent=self.role, passed=not owned, violations=tuple(owned), critique=critique)


# ---------------------------------------------------------------------------
# Structured-output agents (extractor + director)
# ---------------------------------------------------------------------------


class _MalformedDraw:
    """Shared per-call malformed-output draw, independent across calls."""

    def __init__(self, params: SimParams, stream: Substream) -> None:
        self.params = params
        self._stream = stream
        self._calls = 0

    def next_call(self) -> tuple[Substream, bool]:
        call_stream = self._stream.derive("call", self._calls)
        self._calls += 1
        malformed = call_stream.random() < self.params.malformed_rate
        return call_stream, malformed


class SimExtractor:
    """Identity fields from the fixture manifest when available, else fixed placeholders."""

    def __init__(self, params: SimParams, stream: Substream, fixture_root: str = "fixtures") -> None:
        self._draw = _MalformedDraw(params, stream)
        self.fixture_root = fixture_root

    def extract_identity(
        self, site: RawSite, feedback: list[SchemaViolation] | None
    ) -> Mapping[str, Any]:
        _, malformed = self._draw.next_call()
        if malformed:
            return {"tonal_voice": None, "forbidden_tropes": "corrupted"}
        voice, tropes = self._identity_for(site)
        return {"tonal_voice": list(voice), "forbidden_tropes": list(tropes)}

    def _identity_for(self, site: RawSite) -> tuple[tuple[str, ...], tuple[str, ...]]:
        if site.url.startswith("fixture:"):
            import json
            from pathlib import Path

            rel = site.url[len("fixture:") :].lstrip("/")
            manifest_path = Path(self.fixture_root) / Path(rel).parent / "manifest.json"
            if manifest_path.is_file():
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
                return (
                    tuple(manifest.get("tonal_voice", _FALLBACK_VOICE)),
                    tuple(manifest.get("forbidden_tropes", _FALLBACK_TROPES)),
                )
        return _FALLBACK_VOICE, _FALLBACK_TROPES


class SimDirector:
    """Templated scene plans; malformed draws corrupt the candidate structurally."""

    _FOCALS = (24.0, 35.0, 50.0, 85.0)
    _DURATIONS = (2.0, 2.5, 3.0, 1.5)

    def __init__(self, params: SimParams, stream: Substream) -> None:
        self._draw = _MalformedDraw(params, stream)

    def author(
        self,
        dna: BrandDNA,
        objective: str,
        n_scenes: int,
        feedback: list[SchemaViolation] | None,
    ) -> Mapping[str, Any]:
        call_stream, malformed = self._draw.next_call()
        scenes = [self._scene(i, n_scenes, dna, objective, call_stream) for i in range(n_scenes)]
        candidate: dict[str, Any] = {
            "scenes": scenes,
            "objective": objective,
            "dna_ref": dna.digest(),
        }
        if malformed:
            self._corrupt(candidate, call_stream)
        return candidate

    def _scene(
        self, i: int, n: int, dna: BrandDNA, objective: str, stream: Substream
    ) -> dict[str, Any]:
        camera = CAMERA_ANGLES[i % len(CAMERA_ANGLES)]
        lighting = LIGHTING_MODES[i % len(LIGHTING_MODES)]
        focal = self._FOCALS[i % len(self._FOCALS)]
        anchors = ", ".join(dna.palette[:3])
        return {
            "index": i,
            "prompt": (
                f"Scene {i + 1}/{n}: {objective}. Palette anchors {anchors}; "
                f"{lighting} lighting, {camera} camera at {focal:.0f}mm; "
                f"typography {dna.typography[0]}."
            ),
            "camera_angle": camera,
            "focal_length_mm": focal,
            "lighting": lighting,
            "motion_vector": [
                round(stream.uniform(-1.0, 1.0), 3),
                round(stream.uniform(-1.0, 1.0), 3),
            ],
            "duration_s": self._DURATIONS[i % len(self._DURATIONS)],
        }

    def _corrupt(self, candidate: dict[str, Any], stream: Substream) -> None:
        variant = stream.randint(0, 2)
        if variant == 0:
            del candidate["scenes"]
        elif variant == 1:
            candidate["scenes"][0]["focal_length_mm"] = 500.0
        else:
            for scene in candidate["scenes"]:
                scene["index"] = 0
            if len(candidate["scenes"]) == 1:
                candidate["scenes"][0]["prompt"] = ""


# ---------------------------------------------------------------------------
# BackendSet builder
# ---------------------------------------------------------------------------


def build_sim_backends(
    params: SimParams,
    run_seed: int,
    *,
    fixture_root: str = "fixtures",
    quality_floor: float = DEFAULT_QUALITY_FLOOR,
) -> BackendSet:
    root = Substream(run_seed)
    return BackendSet(
        extractor=SimExtractor(params, root.derive("backend", "extractor"), fixture_root=fixture_root),
        enhancer=SimEnhancer(quality_floor),
        director=SimDirector(params, root.derive("backend", "director")),
        generator=SimGenerator(params, run_seed),
        director_agent=SimEvaluator("director_agent"),
        brand_safety_agent=SimEvaluator("brand_safety_agent"),
    )
