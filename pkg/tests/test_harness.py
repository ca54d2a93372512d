from __future__ import annotations

import pytest

from genflow.artifacts import FAILURE_MODES, FrameRef
from genflow.backends.sim import SimParams, build_sim_backends, default_sim_params
from genflow.branddna import BrandDNA
from genflow.director import SceneSpec
from genflow.harness import failure_mode_table, non_convergence_rate, run_experiment
from genflow.harness_types import YieldReport, report_from_dict
from genflow.qc import QcPolicy, qc_generate_scene
from genflow.rng import Substream


def closed_form_pipeline_yield(params: SimParams, budget: int = 3) -> float:
    """Independent oracle: clean mass plus per-mode recovered mass."""
    clean = 1.0 - sum(params.mode_probs.values())
    recovered = sum(
        p * (1.0 - (1.0 - params.recovery_probs.get(mode, 0.0)) ** budget)
        for mode, p in params.mode_probs.items()
    )
    return clean + recovered


def test_paired_dominance_pointwise() -> None:
    # genflow never turns a clean zero-shot draw into a failure, run by run
    params = default_sim_params()
    dna = BrandDNA(("#000000",), ("X",), (), (), "fixture:u")
    spec = SceneSpec(0, "p", "front", 35.0, "studio", (0.0, 0.0), 0.5)
    root = Substream(77)
    for i in range(500):
        run_stream = root.derive("experiment", i)
        run_seed = run_stream.derive("run-seed").seed64()
        outcome = qc_generate_scene(
            spec,
            FrameRef(digest=f"{run_seed:064x}", scene_index=-1, frame_index=0),
            dna,
            QcPolicy(retry_budget=3),
            build_sim_backends(params, run_seed),
            run_stream.derive("generate"),
        )
        zero_clean = not outcome.violation_history
        if zero_clean:
            assert outcome.committed


def test_report_reproducible_and_consistent() -> None:
    params = default_sim_params()
    a = run_experiment(params, 400, seed=5)
    b = run_experiment(params, 400, seed=5)
    assert a.to_dict() == b.to_dict()
    assert a.pipeline_yield >= a.zero_shot_yield
    for stats in a.per_mode.values():
        assert stats["recovered"] <= stats["initial_failures"]
    total_failures = sum(s["initial_failures"] for s in a.per_mode.values())
    assert total_failures == round((1 - a.zero_shot_yield) * a.n_runs)


def test_workers_do_not_change_results() -> None:
    params = default_sim_params()
    serial = run_experiment(params, 300, seed=9, workers=1)
    parallel = run_experiment(params, 300, seed=9, workers=3)
    assert serial.to_dict() == parallel.to_dict()


def test_analytic_agreement_small_n() -> None:
    params = default_sim_params()
    n = 2000
    report = run_experiment(params, n, seed=31)
    expected = closed_form_pipeline_yield(params)
    sigma = (expected * (1 - expected) / n) ** 0.5
    assert abs(report.pipeline_yield - expected) < 3 * sigma


def test_non_convergence_rate() -> None:
    report = run_experiment(default_sim_params(), 500, seed=3)
    assert non_convergence_rate(report) == pytest.approx(1.0 - report.pipeline_yield)
    clean = SimParams(mode_probs={}, recovery_probs={})
    perfect = run_experiment(clean, 100, seed=3)
    assert perfect.pipeline_yield == 1.0
    assert non_convergence_rate(perfect) == 0.0


def test_tier_report_carries_per_tier_block() -> None:
    report = run_experiment(default_sim_params("simple"), 200, seed=2)
    assert report.per_tier == {
        "simple": {"zero_shot": report.zero_shot_yield, "pipeline": report.pipeline_yield}
    }


def test_failure_mode_table_order_and_rendering() -> None:
    per_mode = {
        "temporal_morphing": {"initial_failures": 26, "recovered": 19, "recovery_yield": 19 / 26},
        "typographic_hallucination": {"initial_failures": 18, "recovered": 15, "recovery_yield": 15 / 18},
        "brand_color_violation": {"initial_failures": 12, "recovered": 11, "recovery_yield": 11 / 12},
        "composition_error": {"initial_failures": 2, "recovered": 2, "recovery_yield": 1.0},
    }
    report = YieldReport(
        n_runs=100,
        seed=0,
        tier=None,
        arms=("zero_shot", "genflow"),
        zero_shot_yield=0.42,
        pipeline_yield=0.89,
        per_mode=per_mode,
        per_tier=None,
        parsing_success=0.99,
        cost_summary={},
        params_digest="",
    )
    table = failure_mode_table(report)
    lines = [line for line in table.splitlines() if line and not line.startswith(("failure", "-"))]
    assert [line.split()[0] for line in lines] == list(FAILURE_MODES)
    assert "73.1%" in lines[0]
    assert "83.3%" in lines[1]
    assert "91.7%" in lines[2]
    assert "100.0%" in lines[3]


def test_failure_mode_table_renders_na_for_zero_failures() -> None:
    report = run_experiment(SimParams(mode_probs={}, recovery_probs={}), 50, seed=1)
    table = failure_mode_table(report)
    assert table.count("n/a") == 4


def test_report_round_trips_through_dict() -> None:
    report = run_experiment(default_sim_params(), 100, seed=8)
    assert report_from_dict(report.to_dict()).to_dict() == report.to_dict()


def test_parsing_success_tracks_malformed_rate() -> None:
    # malformed_rate 0 -> every plan parses; 1.0 -> none do
    zero = run_experiment(SimParams(mode_probs={}, recovery_probs={}, malformed_rate=0.0), 100, seed=4)
    assert zero.parsing_success == 1.0
    always = run_experiment(SimParams(mode_probs={}, recovery_probs={}, malformed_rate=1.0), 100, seed=4)
    assert always.parsing_success == 0.0


def test_cost_summary_genflow_geq_zero_shot() -> None:
    report = run_experiment(default_sim_params(), 300, seed=6)
    assert report.cost_summary["genflow"]["usd"] > report.cost_summary["zero_shot"]["usd"]
    assert report.cost_summary["zero_shot"]["tokens_in"] == pytest.approx(1100.0)
