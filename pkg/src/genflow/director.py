"""Scene planning: the script matrix schema, its validator, and the authoring loop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Protocol, Sequence

from .branddna import BrandDNA, SchemaViolation
from .canon import canonical_dumps
from .errors import InvalidRequest
from .repair import repair_loop

CAMERA_ANGLES = ("front", "three_quarter", "top_down", "low", "tracking")
LIGHTING_MODES = ("studio", "golden_hour", "high_key", "low_key", "dynamic")

FOCAL_RANGE_MM = (14.0, 200.0)
MAX_DURATION_S = 10.0


@dataclass(frozen=True)
class SceneSpec:
    index: int
    prompt: str
    camera_angle: str
    focal_length_mm: float
    lighting: str
    motion_vector: tuple[float, float]
    duration_s: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "prompt": self.prompt,
            "camera_angle": self.camera_angle,
            "focal_length_mm": self.focal_length_mm,
            "lighting": self.lighting,
            "motion_vector": list(self.motion_vector),
            "duration_s": self.duration_s,
        }


@dataclass(frozen=True)
class ScriptMatrix:
    scenes: tuple[SceneSpec, ...]
    objective: str
    dna_ref: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenes": [s.to_dict() for s in self.scenes],
            "objective": self.objective,
            "dna_ref": self.dna_ref,
        }

    def dumps(self) -> str:
        return canonical_dumps(self.to_dict())


class DirectorBackend(Protocol):
    def author(
        self,
        dna: BrandDNA,
        objective: str,
        n_scenes: int,
        feedback: list[SchemaViolation] | None,
    ) -> Mapping[str, Any]: ...


def _validate_scene(doc: Any, path: str, violations: list[SchemaViolation]) -> SceneSpec | None:
    if not isinstance(doc, Mapping):
        violations.append(SchemaViolation(path, "type", found=type(doc).__name__))
        return None
    ok = True

    def fail(field: str, rule: str, found: Any = "") -> None:
        nonlocal ok
        ok = False
        violations.append(SchemaViolation(f"{path}.{field}", rule, found=str(found)))

    for name in ("index", "prompt", "camera_angle", "focal_length_mm", "lighting", "motion_vector", "duration_s"):
        if name not in doc:
            fail(name, "required")
    if not ok:
        return None

    if not isinstance(doc["index"], int) or isinstance(doc["index"], bool) or doc["index"] < 0:
        fail("index", "type", doc["index"])
    if not isinstance(doc["prompt"], str):
        fail("prompt", "type", type(doc["prompt"]).__name__)
    elif not doc["prompt"]:
        fail("prompt", "non-empty")
    if doc["camera_angle"] not in CAMERA_ANGLES:
        fail("camera_angle", "enum", doc["camera_angle"])
    if doc["lighting"] not in LIGHTING_MODES:
        fail("lighting", "enum", doc["lighting"])

    focal = doc["focal_length_mm"]
    if not isinstance(focal, (int, float)) or isinstance(focal, bool):
        fail("focal_length_mm", "type", focal)
    elif not FOCAL_RANGE_MM[0] <= float(focal) <= FOCAL_RANGE_MM[1]:
        fail("focal_length_mm", "range", focal)

    motion = doc["motion_vector"]
    if (
        not isinstance(motion, Sequence)
        or isinstance(motion, (str, bytes))
        or len(motion) != 2
        or any(not isinstance(c, (int, float)) or isinstance(c, bool) for c in motion)
    ):
        fail("motion_vector", "type", motion)
    elif any(not -1.0 <= float(c) <= 1.0 for c in motion):
        fail("motion_vector", "range", motion)

    duration = doc["duration_s"]
    if not isinstance(duration, (int, float)) or isinstance(duration, bool):
        fail("duration_s", "type", duration)
    elif not 0.0 < float(duration) <= MAX_DURATION_S:
        fail("duration_s", "range", duration)

    if not ok:
        return None
    return SceneSpec(
        index=doc["index"],
        prompt=doc["prompt"],
        camera_angle=doc["camera_angle"],
        focal_length_mm=float(focal),
        lighting=doc["lighting"],
        motion_vector=(float(motion[0]), float(motion[1])),
        duration_s=float(duration),
    )


def validate_matrix(candidate: Any) -> ScriptMatrix | list[SchemaViolation]:
    """ScriptMatrix if every invariant holds, else each violated rule exactly once."""
    if not isinstance(candidate, Mapping):
        return [SchemaViolation("$", "type", found=type(candidate).__name__)]

    violations: list[SchemaViolation] = []
    for name in ("scenes", "objective", "dna_ref"):
        if name not in candidate:
            violations.append(SchemaViolation(name, "required"))

    scenes_doc = candidate.get("scenes")
    scenes: list[SceneSpec] = []
    if "scenes" in candidate:
        if not isinstance(scenes_doc, Sequence) or isinstance(scenes_doc, (str, bytes)):
            violations.append(SchemaViolation("scenes", "type", found=type(scenes_doc).__name__))
        elif not scenes_doc:
            violations.append(SchemaViolation("scenes", "non-empty"))
        else:
            for i, scene_doc in enumerate(scenes_doc):
                scene = _validate_scene(scene_doc, f"scenes[{i}]", violations)
                if scene is not None:
                    scenes.append(scene)
            if len(scenes) == len(scenes_doc) and [s.index for s in scenes] != list(range(len(scenes))):
                violations.append(
                    SchemaViolation("scenes", "contiguous-indices", found=str([s.index for s in scenes]))
                )

    for name in ("objective", "dna_ref"):
        if name in candidate and not isinstance(candidate[name], str):
            violations.append(SchemaViolation(name, "type", found=type(candidate[name]).__name__))

    seen: set[tuple[str, str]] = set()
    unique = [v for v in violations if (key := (v.field_path, v.rule)) not in seen and not seen.add(key)]
    if unique:
        return unique
    return ScriptMatrix(scenes=tuple(scenes), objective=candidate["objective"], dna_ref=candidate["dna_ref"])


def author_script(
    dna: BrandDNA,
    objective: str,
    n_scenes: int,
    backend: DirectorBackend,
    repair_budget: int = 1,
    *,
    on_event: Callable[..., None] | None = None,
    charge: Callable[[str], None] | None = None,
) -> ScriptMatrix:
    """Author a validated scene-by-scene plan, repairing structural failures within budget."""
    if n_scenes < 1:
        raise InvalidRequest(f"n_scenes must be >= 1, got {n_scenes}")
    if not objective:
        raise InvalidRequest("objective must be non-empty")

    def produce(attempt: int, feedback: list[SchemaViolation] | None) -> Mapping[str, Any]:
        if charge is not None:
            charge("director")
        return backend.author(dna, objective, n_scenes, feedback)

    def validate(candidate: Any) -> ScriptMatrix | list[SchemaViolation]:
        result = validate_matrix(candidate)
        if isinstance(result, list):
            return result
        if len(result.scenes) != n_scenes:
            return [SchemaViolation("scenes", "scene-count", found=str(len(result.scenes)))]
        if result.dna_ref != dna.digest():
            return [SchemaViolation("dna_ref", "anchor", found=result.dna_ref)]
        return result

    result = repair_loop(produce, validate, repair_budget, on_event=on_event, role="director_llm")
    assert isinstance(result, ScriptMatrix)
    return result
