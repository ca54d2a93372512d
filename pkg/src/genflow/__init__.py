"""Genflow: brand-constrained, self-correcting video pipeline engine."""

__version__ = "0.1.0"

from .artifacts import FAILURE_MODES, FrameRef, VideoArtifact, ViolationReport, extract_final_frame
from .assets import AssetDescriptor, SimEnhancer, normalize_asset
from .branddna import (
    BrandDNA,
    FetchPolicy,
    RawSite,
    SchemaViolation,
    build_brand_dna,
    extract_palette,
    extract_typography,
    fetch_site,
    validate_schema,
)
from .chain import RunTranscript, asset_init_frame, derive_run_id, run_chain
from .director import SceneSpec, ScriptMatrix, author_script, validate_matrix
from .harness import failure_mode_table, non_convergence_rate, run_experiment
from .harness_types import YieldReport
from .qc import (
    Commit,
    CommittedScene,
    CorrectivePrompt,
    FailedScene,
    QcPolicy,
    Refine,
    Verdict,
    consensus,
    evaluate,
    qc_generate_scene,
    synthesize_corrective,
)
from .rng import Substream
from .telemetry import Event, RunLog, TelemetryHub

__all__ = [
    "FAILURE_MODES",
    "FrameRef",
    "VideoArtifact",
    "ViolationReport",
    "extract_final_frame",
    "AssetDescriptor",
    "SimEnhancer",
    "normalize_asset",
    "BrandDNA",
    "FetchPolicy",
    "RawSite",
    "SchemaViolation",
    "build_brand_dna",
    "extract_palette",
    "extract_typography",
    "fetch_site",
    "validate_schema",
    "RunTranscript",
    "asset_init_frame",
    "derive_run_id",
    "run_chain",
    "SceneSpec",
    "ScriptMatrix",
    "author_script",
    "validate_matrix",
    "failure_mode_table",
    "non_convergence_rate",
    "run_experiment",
    "YieldReport",
    "Commit",
    "CommittedScene",
    "CorrectivePrompt",
    "FailedScene",
    "QcPolicy",
    "Refine",
    "Verdict",
    "consensus",
    "evaluate",
    "qc_generate_scene",
    "synthesize_corrective",
    "Substream",
    "Event",
    "RunLog",
    "TelemetryHub",
]
