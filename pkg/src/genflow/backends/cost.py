"""Per-call cost accounting and the simulated run clock.

Totals are plain sums over recorded calls. The meter's clock advances by the
model's per-call latency and stamps telemetry events, which is what keeps
transcripts byte-identical under a fixed seed: no wall time anywhere.

Absolute values here are free parameters shipped in config; the engine makes
no claims about real-API latency or dollar cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

CALL_KINDS = ("extractor", "enhancer", "director", "generator", "evaluator", "orchestrator")

_DEFAULT_TOKENS_IN = {
    "extractor": 900,
    "enhancer": 400,
    "director": 1200,
    "generator": 1100,
    "evaluator": 700,
    "orchestrator": 350,
}
_DEFAULT_TOKENS_OUT = {
    "extractor": 300,
    "enhancer": 150,
    "director": 500,
    "generator": 400,
    "evaluator": 250,
    "orchestrator": 180,
}
_DEFAULT_LATENCY_S = {
    "extractor": 1.2,
    "enhancer": 2.0,
    "director": 1.5,
    "generator": 8.0,
    "evaluator": 1.8,
    "orchestrator": 0.8,
}


@dataclass(frozen=True)
class CostModel:
    tokens_in: Mapping[str, int]
    tokens_out: Mapping[str, int]
    latency_s: Mapping[str, float]
    usd_per_1k_tokens: float = 0.002

    def __post_init__(self) -> None:
        for table in (self.tokens_in, self.tokens_out, self.latency_s):
            if any(v < 0 for v in table.values()):
                raise ValueError("cost model values must be non-negative")
        if self.usd_per_1k_tokens < 0:
            raise ValueError("usd_per_1k_tokens must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "tokens_in": dict(self.tokens_in),
            "tokens_out": dict(self.tokens_out),
            "latency_s": dict(self.latency_s),
            "usd_per_1k_tokens": self.usd_per_1k_tokens,
        }


def default_cost_model() -> CostModel:
    return CostModel(
        tokens_in=dict(_DEFAULT_TOKENS_IN),
        tokens_out=dict(_DEFAULT_TOKENS_OUT),
        latency_s=dict(_DEFAULT_LATENCY_S),
    )


def cost_model_from_dict(doc: Mapping[str, Any] | None) -> CostModel:
    if not doc:
        return default_cost_model()
    base = default_cost_model()
    return CostModel(
        tokens_in={**base.tokens_in, **doc.get("tokens_in", {})},
        tokens_out={**base.tokens_out, **doc.get("tokens_out", {})},
        latency_s={**base.latency_s, **doc.get("latency_s", {})},
        usd_per_1k_tokens=float(doc.get("usd_per_1k_tokens", base.usd_per_1k_tokens)),
    )


@dataclass
class CostTotals:
    tokens_in: int = 0
    tokens_out: int = 0
    latency_s: float = 0.0
    usd: float = 0.0
    calls: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tokens_in": self.tokens_in,
            "tokens_out": self.tokens_out,
            "latency_s": round(self.latency_s, 6),
            "usd": round(self.usd, 6),
            "calls": {k: self.calls[k] for k in sorted(self.calls)},
        }


class CostMeter:
    """Accumulates CostTotals and carries the simulated clock."""

    def __init__(self, model: CostModel | None = None) -> None:
        self.model = model or default_cost_model()
        self.totals = CostTotals()
        self.now = 0.0

    def charge(self, kind: str) -> None:
        tin = self.model.tokens_in.get(kind, 0)
        tout = self.model.tokens_out.get(kind, 0)
        self.totals.tokens_in += tin
        self.totals.tokens_out += tout
        self.totals.usd += (tin + tout) / 1000.0 * self.model.usd_per_1k_tokens
        latency = self.model.latency_s.get(kind, 0.0)
        self.totals.latency_s += latency
        self.now += latency
        self.totals.calls[kind] = self.totals.calls.get(kind, 0) + 1
