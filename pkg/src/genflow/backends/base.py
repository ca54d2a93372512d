"""The pluggable model-backend boundary: one protocol per role."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Protocol

from ..artifacts import FrameRef, VideoArtifact
from ..branddna import BrandDNA, RawSite, SchemaViolation
from ..director import SceneSpec
from ..rng import Substream


class ExtractorBackend(Protocol):
    def extract_identity(
        self, site: RawSite, feedback: list[SchemaViolation] | None
    ) -> Mapping[str, Any]: ...


class EnhancerBackend(Protocol):
    def enhance(self, asset: Any, dna: BrandDNA) -> Any: ...


class DirectorBackend(Protocol):
    def author(
        self,
        dna: BrandDNA,
        objective: str,
        n_scenes: int,
        feedback: list[SchemaViolation] | None,
    ) -> Mapping[str, Any]: ...


class GeneratorBackend(Protocol):
    def generate(
        self,
        spec: SceneSpec,
        init: FrameRef,
        corrective: Any | None,
        rng_stream: Substream,
    ) -> VideoArtifact: ...


class EvaluatorBackend(Protocol):
    role: str

    def evaluate(self, video: VideoArtifact, spec: SceneSpec, dna: BrandDNA) -> Any: ...


@dataclass
class BackendSet:
    """One provider per role; built per run so sim streams stay run-scoped."""

    extractor: ExtractorBackend
    enhancer: EnhancerBackend
    director: DirectorBackend
    generator: GeneratorBackend
    director_agent: EvaluatorBackend
    brand_safety_agent: EvaluatorBackend

    @property
    def evaluators(self) -> tuple[EvaluatorBackend, EvaluatorBackend]:
        return (self.director_agent, self.brand_safety_agent)
