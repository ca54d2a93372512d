"""Monte Carlo experiment runner over the simulation backend.

Every run pairs the two arms on a shared substream: the zero-shot outcome
is the cleanliness of the very first generation draw, and the full QC loop
continues from that same draw. A run also exercises the structured-output
repair loop once (1-scene plan, budget 1) to measure parsing adherence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Any

from .artifacts import FAILURE_MODES, FrameRef
from .branddna import BrandDNA
from .canon import canonical_dumps, content_digest
from .director import SceneSpec, author_script
from .errors import ParseExhausted
from .harness_types import YieldReport
from .qc import QcPolicy, qc_generate_scene
from .rng import Substream
from .backends.cost import CostMeter
from .backends.sim import SimDirector, SimParams, build_sim_backends

_CALIBRATION_DNA = BrandDNA(
    palette=("#0A84FF", "#FFFFFF", "#111111"),
    typography=("Inter",),
    tonal_voice=("calibrated",),
    forbidden_tropes=("placeholder imagery",),
    source_url="fixture:calibration",
)

_CALIBRATION_SPEC = SceneSpec(
    index=0,
    prompt="Calibration scene: product hero shot against the brand backdrop.",
    camera_angle="front",
    focal_length_mm=35.0,
    lighting="studio",
    motion_vector=(0.2, 0.0),
    duration_s=1.0,
)

_PARSE_REPAIR_BUDGET = 1


@dataclass
class _Tally:
    n: int = 0
    zero_pass: int = 0
    pipeline_pass: int = 0
    parse_ok: int = 0
    mode_failures: dict[str, int] = field(default_factory=dict)
    mode_recovered: dict[str, int] = field(default_factory=dict)
    genflow_cost: dict[str, int] = field(default_factory=dict)
    zero_cost: dict[str, int] = field(default_factory=dict)

    def merge(self, other: "_Tally") -> None:
        self.n += other.n
        self.zero_pass += other.zero_pass
        self.pipeline_pass += other.pipeline_pass
        self.parse_ok += other.parse_ok
        for mode, count in other.mode_failures.items():
            self.mode_failures[mode] = self.mode_failures.get(mode, 0) + count
        for mode, count in other.mode_recovered.items():
            self.mode_recovered[mode] = self.mode_recovered.get(mode, 0) + count
        for table, src in (("genflow_cost", other.genflow_cost), ("zero_cost", other.zero_cost)):
            dst = getattr(self, table)
            for key, value in src.items():
                dst[key] = dst.get(key, 0) + value


def _add_cost(acc: dict[str, int], meter: CostMeter) -> None:
    # integer nano-units keep worker merges associative (identical report
    # regardless of worker count)
    totals = meter.totals
    acc["tokens_in"] = acc.get("tokens_in", 0) + totals.tokens_in
    acc["tokens_out"] = acc.get("tokens_out", 0) + totals.tokens_out
    acc["latency_ns"] = acc.get("latency_ns", 0) + round(totals.latency_s * 1e9)
    acc["usd_nano"] = acc.get("usd_nano", 0) + round(totals.usd * 1e9)


def _mean_cost(acc: dict[str, int], n: int) -> dict[str, float]:
    return {
        "tokens_in": acc.get("tokens_in", 0) / n,
        "tokens_out": acc.get("tokens_out", 0) / n,
        "latency_s": acc.get("latency_ns", 0) / 1e9 / n,
        "usd": acc.get("usd_nano", 0) / 1e9 / n,
    }


def _tally_range(
    params: SimParams, seed: int, start: int, stop: int, retry_budget: int
) -> _Tally:
    """Simulate runs [start, stop); deterministic given (params, seed, index)."""
    tally = _Tally()
    root = Substream(seed)
    policy = QcPolicy(retry_budget=retry_budget)
    for i in range(start, stop):
        run_stream = root.derive("experiment", i)
        run_seed = run_stream.derive("run-seed").seed64()

        # parsing adherence: real repair loop against the sim director
        try:
            author_script(
                _CALIBRATION_DNA,
                "calibration objective",
                1,
                SimDirector(params, run_stream.derive("parse")),
                repair_budget=_PARSE_REPAIR_BUDGET,
            )
            tally.parse_ok += 1
        except ParseExhausted:
            pass

        # paired generation arms
        backends = build_sim_backends(params, run_seed)
        meter = CostMeter(params.cost_model)
        init = FrameRef(digest=f"{run_seed:064x}", scene_index=-1, frame_index=0)
        outcome = qc_generate_scene(
            _CALIBRATION_SPEC,
            init,
            _CALIBRATION_DNA,
            policy,
            backends,
            run_stream.derive("generate"),
            charge=meter.charge,
        )

        zero_clean = not outcome.violation_history
        if zero_clean:
            tally.zero_pass += 1
        else:
            mode = outcome.violation_history[0][0].mode
            tally.mode_failures[mode] = tally.mode_failures.get(mode, 0) + 1
            if outcome.committed:
                tally.mode_recovered[mode] = tally.mode_recovered.get(mode, 0) + 1
        if outcome.committed:
            tally.pipeline_pass += 1

        _add_cost(tally.genflow_cost, meter)
        zero_meter = CostMeter(params.cost_model)
        zero_meter.charge("generator")
        _add_cost(tally.zero_cost, zero_meter)
        tally.n += 1
    return tally


def run_experiment(
    params: SimParams,
    n_runs: int,
    seed: int,
    arms: tuple[str, ...] = ("zero_shot", "genflow"),
    *,
    retry_budget: int = 3,
    workers: int = 1,
) -> YieldReport:
    """Paired-arm Monte Carlo over n_runs; deterministic under (params, seed)."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    unknown = set(arms) - {"zero_shot", "genflow"}
    if unknown:
        raise ValueError(f"unknown arms: {sorted(unknown)}")

    if workers > 1 and n_runs > workers:
        bounds = [(n_runs * w // workers, n_runs * (w + 1) // workers) for w in range(workers)]
        with Pool(processes=workers) as pool:
            parts = pool.starmap(
                _tally_range, [(params, seed, a, b, retry_budget) for a, b in bounds]
            )
        tally = _Tally()
        for part in parts:
            tally.merge(part)
    else:
        tally = _tally_range(params, seed, 0, n_runs, retry_budget)

    per_mode = {}
    for mode in FAILURE_MODES:
        failures = tally.mode_failures.get(mode, 0)
        recovered = tally.mode_recovered.get(mode, 0)
        per_mode[mode] = {
            "initial_failures": failures,
            "recovered": recovered,
            "recovery_yield": (recovered / failures) if failures else None,
        }

    zero_yield = tally.zero_pass / n_runs
    pipeline_yield = tally.pipeline_pass / n_runs
    per_tier = None
    if params.tier:
        per_tier = {params.tier: {"zero_shot": zero_yield, "pipeline": pipeline_yield}}

    cost_summary = {
        arm: _mean_cost(table, n_runs)
        for arm, table in (("zero_shot", tally.zero_cost), ("genflow", tally.genflow_cost))
        if arm in arms
    }

    return YieldReport(
        n_runs=n_runs,
        seed=seed,
        tier=params.tier,
        arms=tuple(arms),
        zero_shot_yield=zero_yield if "zero_shot" in arms else None,
        pipeline_yield=pipeline_yield if "genflow" in arms else None,
        per_mode=per_mode,
        per_tier=per_tier,
        parsing_success=tally.parse_ok / n_runs,
        cost_summary=cost_summary,
        params_digest=content_digest(params.to_dict()),
    )


def non_convergence_rate(report: YieldReport) -> float:
    """Fraction of runs the QC loop could not bring to a compliant commit."""
    if report.pipeline_yield is None:
        raise ValueError("report has no genflow arm")
    return 1.0 - report.pipeline_yield


def failure_mode_table(report: YieldReport) -> str:
    """Fixed-order human table: failures, recovered, recovery yield per mode."""
    header = f"{'failure mode':<28}{'failures':>14}{'recovered':>14}{'recovery yield':>16}"
    lines = [header, "-" * len(header)]
    for mode in FAILURE_MODES:
        stats = report.per_mode.get(mode, {"initial_failures": 0, "recovered": 0, "recovery_yield": None})
        failures = stats["initial_failures"]
        recovered = stats["recovered"]
        yield_text = f"{stats['recovery_yield'] * 100:.1f}%" if stats["recovery_yield"] is not None else "n/a"
        lines.append(
            f"{mode:<28}{f'{failures}/{report.n_runs}':>14}{f'{recovered}/{failures}':>14}{yield_text:>16}"
        )
    return "\n".join(lines)


def render_report_text(report: YieldReport) -> str:
    lines = [
        "Monte Carlo yield report",
        "========================",
        f"runs per arm:     {report.n_runs}",
        f"seed:             {report.seed}",
        f"tier:             {report.tier or 'aggregate'}",
    ]
    if report.zero_shot_yield is not None:
        lines.append(f"zero-shot yield:  {report.zero_shot_yield:.4f}")
    if report.pipeline_yield is not None:
        lines.append(f"pipeline yield:   {report.pipeline_yield:.4f}")
        lines.append(f"non-convergence:  {non_convergence_rate(report):.4f}")
    lines.append(f"parsing success:  {report.parsing_success:.4f}")
    lines.append("")
    lines.append(failure_mode_table(report))
    lines.append("")
    for arm, costs in report.cost_summary.items():
        rendered = ", ".join(f"{k}={costs[k]:.3f}" for k in ("tokens_in", "tokens_out", "latency_s", "usd"))
        lines.append(f"mean cost per run ({arm}): {rendered}")
    return "\n".join(lines) + "\n"


def write_report(report: YieldReport, json_path: str | Path, text_path: str | Path | None = None) -> None:
    Path(json_path).write_text(canonical_dumps(report.to_dict()), encoding="utf-8")
    if text_path is not None:
        Path(text_path).write_text(render_report_text(report), encoding="utf-8")
