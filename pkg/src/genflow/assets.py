"""Reference-asset normalization over abstract quality scores."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Protocol

from .branddna import BrandDNA
from .canon import content_digest
from .errors import EnhancementFailed, InvalidAsset

DEFAULT_QUALITY_FLOOR = 0.8

_SCORE_FIELDS = ("illumination", "resolution", "background_isolation")


@dataclass(frozen=True)
class AssetDescriptor:
    """Abstract view of a source asset: three quality scores plus a content hash."""

    asset_id: str
    illumination: float
    resolution: float
    background_isolation: float
    content_digest: str

    def validate(self) -> "AssetDescriptor":
        if not self.asset_id:
            raise InvalidAsset("asset_id must be non-empty")
        for name in _SCORE_FIELDS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
                raise InvalidAsset(f"{name} must be within [0, 1], got {value!r}")
        return self

    def scores(self) -> tuple[float, float, float]:
        return (self.illumination, self.resolution, self.background_isolation)

    def to_dict(self) -> dict[str, Any]:
        return {
            "asset_id": self.asset_id,
            "illumination": self.illumination,
            "resolution": self.resolution,
            "background_isolation": self.background_isolation,
            "content_digest": self.content_digest,
        }


def descriptor_from_dict(doc: dict[str, Any]) -> AssetDescriptor:
    digest = doc.get("content_digest") or content_digest(
        {k: doc.get(k) for k in ("asset_id", *_SCORE_FIELDS)}
    )
    return AssetDescriptor(
        asset_id=str(doc.get("asset_id", "")),
        illumination=float(doc.get("illumination", 0.0)),
        resolution=float(doc.get("resolution", 0.0)),
        background_isolation=float(doc.get("background_isolation", 0.0)),
        content_digest=digest,
    ).validate()


def load_descriptor(path: str | Path) -> AssetDescriptor:
    return descriptor_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class EnhancerBackend(Protocol):
    def enhance(self, asset: AssetDescriptor, dna: BrandDNA) -> AssetDescriptor: ...


class SimEnhancer:
    """Lifts every score to the quality floor; a no-op on already-clean assets."""

    def __init__(self, quality_floor: float = DEFAULT_QUALITY_FLOOR) -> None:
        self.quality_floor = quality_floor

    def enhance(self, asset: AssetDescriptor, dna: BrandDNA) -> AssetDescriptor:
        lifted = {name: max(getattr(asset, name), self.quality_floor) for name in _SCORE_FIELDS}
        if all(lifted[name] == getattr(asset, name) for name in _SCORE_FIELDS):
            return asset
        digest = content_digest(
            {"asset_id": asset.asset_id, "scores": [lifted[n] for n in _SCORE_FIELDS], "dna": dna.digest()}
        )
        return replace(asset, content_digest=digest, **lifted)


def normalize_asset(
    asset: AssetDescriptor,
    dna: BrandDNA,
    enhancer: EnhancerBackend,
    *,
    on_event: Callable[..., None] | None = None,
    charge: Callable[[str], None] | None = None,
) -> AssetDescriptor:
    """Run the enhancement pass; output scores never drop below the input's."""
    asset.validate()
    if charge is not None:
        charge("enhancer")
    try:
        enhanced = enhancer.enhance(asset, dna)
    except Exception as exc:
        raise EnhancementFailed(f"enhancer backend failed for {asset.asset_id}: {exc}") from exc
    enhanced.validate()
    for name in _SCORE_FIELDS:
        if getattr(enhanced, name) < getattr(asset, name):
            raise EnhancementFailed(f"enhancer lowered {name} for {asset.asset_id}")
    if on_event is not None:
        on_event(
            kind="generation",
            agent_role="enhancer",
            payload={"asset_id": asset.asset_id, "scores": list(enhanced.scores())},
        )
    return enhanced
