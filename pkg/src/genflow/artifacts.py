"""Generated-media value types: frames, scene artifacts, violation reports."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

FAILURE_MODES = (
    "temporal_morphing",
    "typographic_hallucination",
    "brand_color_violation",
    "composition_error",
)

_MODE_ORDER = {mode: i for i, mode in enumerate(FAILURE_MODES)}


def mode_sort_key(mode: str, frame_index: int) -> tuple[int, int]:
    """Deterministic merge order: mode-enumeration order, then frame index."""
    return (_MODE_ORDER[mode], frame_index)


@dataclass(frozen=True)
class ViolationReport:
    mode: str
    frame_index: int
    detail: str

    def __post_init__(self) -> None:
        if self.mode not in FAILURE_MODES:
            raise ValueError(f"unknown failure mode {self.mode!r}")

    def key(self) -> tuple[str, int]:
        return (self.mode, self.frame_index)

    def to_dict(self) -> dict[str, Any]:
        return {"mode": self.mode, "frame_index": self.frame_index, "detail": self.detail}


@dataclass(frozen=True)
class FrameRef:
    """Content-addressed frame; digests render as lowercase hex."""

    digest: str
    scene_index: int
    frame_index: int

    def __post_init__(self) -> None:
        if not self.digest:
            raise ValueError("frame digest must be non-null")

    def to_dict(self) -> dict[str, Any]:
        return {"digest": self.digest, "scene_index": self.scene_index, "frame_index": self.frame_index}


@dataclass(frozen=True)
class VideoArtifact:
    """One generated scene attempt. frames[0] always carries the injected init state."""

    scene_index: int
    attempt: int
    frames: tuple[FrameRef, ...]
    injected_violations: tuple[ViolationReport, ...]
    init_frame: FrameRef

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValueError("artifact must have at least one frame")
        if self.frames[0].digest != self.init_frame.digest:
            raise ValueError("frames[0] must carry the init frame digest")
        if [f.frame_index for f in self.frames] != list(range(len(self.frames))):
            raise ValueError("frame_index values must be contiguous from 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_index": self.scene_index,
            "attempt": self.attempt,
            "frames": [f.to_dict() for f in self.frames],
            "injected_violations": [v.to_dict() for v in self.injected_violations],
            "init_frame": self.init_frame.to_dict(),
        }


def extract_final_frame(video: VideoArtifact) -> FrameRef:
    """The last frame of an artifact — the init state for the next scene."""
    return video.frames[-1]
