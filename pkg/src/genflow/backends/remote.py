"""HTTP adapter for real model services.

One POST per call with a deadline; transport failures retry a bounded
number of times, model-content problems never do — re-prompting on content
grounds belongs to the QC and repair loops, not the transport.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import httpx

from ..artifacts import FrameRef, VideoArtifact, ViolationReport
from ..branddna import BrandDNA, RawSite, SchemaViolation
from ..director import SceneSpec
from ..errors import RemoteRejected, RemoteTimeout, TransportError
from ..qc import CorrectivePrompt, Verdict
from ..rng import Substream


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    timeout_s: float = 10.0
    transport_retries: int = 2
    headers: Mapping[str, str] = field(default_factory=dict)


def remote_call(kind: str, request: Mapping[str, Any], endpoint: EndpointConfig) -> Any:
    """Single round-trip POST of {kind, request}; returns the decoded JSON body."""
    payload = {"kind": kind, "request": dict(request)}
    last_exc: Exception | None = None
    for _ in range(endpoint.transport_retries + 1):
        try:
            response = httpx.post(
                endpoint.url,
                json=payload,
                timeout=endpoint.timeout_s,
                headers=dict(endpoint.headers),
            )
        except httpx.TimeoutException as exc:
            raise RemoteTimeout(f"{kind} call to {endpoint.url} timed out") from exc
        except httpx.HTTPError as exc:
            last_exc = exc
            continue
        if response.status_code >= 300:
            raise RemoteRejected(response.status_code, response.text[:500])
        try:
            return response.json()
        except ValueError as exc:
            raise RemoteRejected(response.status_code, "non-JSON response body") from exc
    raise TransportError(f"{kind} call to {endpoint.url} failed: {last_exc}") from last_exc


class RemoteExtractor:
    def __init__(self, endpoint: EndpointConfig) -> None:
        self.endpoint = endpoint

    def extract_identity(
        self, site: RawSite, feedback: list[SchemaViolation] | None
    ) -> Mapping[str, Any]:
        body = remote_call(
            "extractor",
            {
                "url": site.url,
                "html": site.html,
                "stylesheets": list(site.stylesheets),
                "violations": [v.to_dict() for v in feedback] if feedback else [],
            },
            self.endpoint,
        )
        return body if isinstance(body, Mapping) else {"_raw": body}


class RemoteDirector:
    def __init__(self, endpoint: EndpointConfig) -> None:
        self.endpoint = endpoint

    def author(
        self,
        dna: BrandDNA,
        objective: str,
        n_scenes: int,
        feedback: list[SchemaViolation] | None,
    ) -> Mapping[str, Any]:
        body = remote_call(
            "director",
            {
                "dna": dna.to_dict(),
                "objective": objective,
                "n_scenes": n_scenes,
                "violations": [v.to_dict() for v in feedback] if feedback else [],
            },
            self.endpoint,
        )
        return body if isinstance(body, Mapping) else {"_raw": body}


class RemoteGenerator:
    """Expects {frames: [digest, ...], violations: [...]} back; frame 0 is the init state."""

    def __init__(self, endpoint: EndpointConfig) -> None:
        self.endpoint = endpoint

    def generate(
        self,
        spec: SceneSpec,
        init: FrameRef,
        corrective: CorrectivePrompt | None,
        rng_stream: Substream,
    ) -> VideoArtifact:
        body = remote_call(
            "generator",
            {
                "scene": spec.to_dict(),
                "init_digest": init.digest,
                "corrective": corrective.to_dict() if corrective else None,
            },
            self.endpoint,
        )
        digests = list(body.get("frames") or [init.digest])
        if digests[0] != init.digest:
            digests.insert(0, init.digest)
        frames = tuple(
            FrameRef(digest=d, scene_index=spec.index, frame_index=k) for k, d in enumerate(digests)
        )
        violations = tuple(
            ViolationReport(mode=v["mode"], frame_index=int(v.get("frame_index", 0)), detail=v.get("detail", ""))
            for v in body.get("violations", [])
        )
        attempt = corrective.iteration if corrective else 0
        return VideoArtifact(
            scene_index=spec.index,
            attempt=attempt,
            frames=frames,
            injected_violations=violations,
            init_frame=init,
        )


class RemoteEvaluator:
    def __init__(self, role: str, endpoint: EndpointConfig) -> None:
        self.role = role
        self.endpoint = endpoint

    def evaluate(self, video: VideoArtifact, spec: SceneSpec, dna: BrandDNA) -> Verdict:
        body = remote_call(
            "evaluator",
            {
                "role": self.role,
                "artifact": video.to_dict(),
                "scene": spec.to_dict(),
                "dna": dna.to_dict(),
            },
            self.endpoint,
        )
        violations = tuple(
            ViolationReport(mode=v["mode"], frame_index=int(v.get("frame_index", 0)), detail=v.get("detail", ""))
            for v in body.get("violations", [])
        )
        return Verdict(
            agent=self.role,
            passed=not violations,
            violations=violations,
            critique=str(body.get("critique", "")),
        )


class RemoteEnhancer:
    def __init__(self, endpoint: EndpointConfig) -> None:
        self.endpoint = endpoint

    def enhance(self, asset: Any, dna: BrandDNA) -> Any:
        from ..assets import descriptor_from_dict

        body = remote_call(
            "enhancer",
            {"asset": asset.to_dict(), "dna": dna.to_dict()},
            self.endpoint,
        )
        return descriptor_from_dict(body if isinstance(body, Mapping) else asset.to_dict())
