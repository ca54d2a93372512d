"""Aggregated Monte Carlo statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class YieldReport:
    n_runs: int
    seed: int
    tier: str | None
    arms: tuple[str, ...]
    zero_shot_yield: float | None
    pipeline_yield: float | None
    per_mode: dict[str, dict[str, Any]]
    per_tier: dict[str, dict[str, float]] | None
    parsing_success: float
    cost_summary: dict[str, dict[str, float]]
    params_digest: str

    def __post_init__(self) -> None:
        for mode, stats in self.per_mode.items():
            if stats["recovered"] > stats["initial_failures"]:
                raise ValueError(f"recovered > initial failures for {mode}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_runs": self.n_runs,
            "seed": self.seed,
            "tier": self.tier,
            "arms": list(self.arms),
            "zero_shot_yield": self.zero_shot_yield,
            "pipeline_yield": self.pipeline_yield,
            "per_mode": self.per_mode,
            "per_tier": self.per_tier,
            "parsing_success": self.parsing_success,
            "cost_summary": self.cost_summary,
            "params_digest": self.params_digest,
        }


def report_from_dict(doc: dict[str, Any]) -> YieldReport:
    return YieldReport(
        n_runs=doc["n_runs"],
        seed=doc["seed"],
        tier=doc.get("tier"),
        arms=tuple(doc.get("arms", ())),
        zero_shot_yield=doc.get("zero_shot_yield"),
        pipeline_yield=doc.get("pipeline_yield"),
        per_mode=doc.get("per_mode", {}),
        per_tier=doc.get("per_tier"),
        parsing_success=doc.get("parsing_success", 0.0),
        cost_summary=doc.get("cost_summary", {}),
        params_digest=doc.get("params_digest", ""),
    )
