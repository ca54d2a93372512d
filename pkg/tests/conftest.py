from __future__ import annotations

from pathlib import Path

import pytest

from genflow.artifacts import FrameRef, VideoArtifact, ViolationReport
from genflow.branddna import BrandDNA, FetchPolicy, fetch_site
from genflow.director import SceneSpec

FIXTURE_ROOT = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixture_root() -> str:
    return str(FIXTURE_ROOT)


@pytest.fixture
def fetch_policy(fixture_root: str) -> FetchPolicy:
    return FetchPolicy(fixture_root=fixture_root)


@pytest.fixture
def acme_site(fetch_policy: FetchPolicy):
    return fetch_site("fixture:acme/index.html", fetch_policy)


@pytest.fixture
def sample_dna() -> BrandDNA:
    return BrandDNA(
        palette=("#FF3D00", "#F5F5F5", "#0A0A0A"),
        typography=("Inter", "Space Grotesk"),
        tonal_voice=("direct", "confident"),
        forbidden_tropes=("cartoon mascots",),
        source_url="fixture:acme/index.html",
    )


@pytest.fixture
def scene_spec() -> SceneSpec:
    return SceneSpec(
        index=0,
        prompt="Product hero shot sweeping across the workbench.",
        camera_angle="front",
        focal_length_mm=35.0,
        lighting="studio",
        motion_vector=(0.2, -0.1),
        duration_s=1.0,
    )


def make_artifact(
    scene_index: int = 0,
    attempt: int = 0,
    n_frames: int = 25,
    violations: tuple[ViolationReport, ...] = (),
    init_digest: str = "a" * 64,
) -> VideoArtifact:
    init = FrameRef(digest=init_digest, scene_index=scene_index - 1, frame_index=0)
    frames = [FrameRef(digest=init_digest, scene_index=scene_index, frame_index=0)]
    frames.extend(
        FrameRef(digest=f"{scene_index:02d}{attempt:02d}{k:04d}".ljust(64, "e"), scene_index=scene_index, frame_index=k)
        for k in range(1, n_frames)
    )
    return VideoArtifact(
        scene_index=scene_index,
        attempt=attempt,
        frames=tuple(frames),
        injected_violations=violations,
        init_frame=init,
    )
