"""Command-line front door: extract, run, simulate, serve.

Exit codes (stable):
  0   success
  2   structured-output repair exhausted / extraction produced no constraints
  3   network-level fetch failures (unreachable, not HTML, oversized)
  4   cannot write an output file (message names the path)
  64  usage errors (bad flag combinations, invalid counts)
  65  unreadable/invalid input data files (dna, asset descriptors)
  78  bad config file
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from .assets import load_descriptor, normalize_asset
from .backends.sim import default_sim_params, sim_params_from_dict
from .branddna import BrandDNA, FetchPolicy, build_brand_dna, fetch_site, validate_schema
from .canon import canonical_dumps
from .chain import run_chain
from .config import load_config
from .director import author_script
from .errors import (
    ConfigError,
    EmptyPalette,
    GenflowError,
    InvalidAsset,
    NetworkError,
    NotHtml,
    ParseExhausted,
    SizeExceeded,
)
from .harness import render_report_text, run_experiment, write_report
from .qc import QcPolicy

click.UsageError.exit_code = 64

_EX_DATAERR = 65
_EX_CONFIG = 78


def _env_seed(cli_seed: int | None) -> int:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get("GENFLOW_SEED")
    return int(env) if env else 42


def _write_file(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        click.echo(f"error: cannot write output file {path}: {exc.strerror or exc}", err=True)
        sys.exit(4)


@click.group()
@click.version_option(package_name="genflow", prog_name="genflow")
def main() -> None:
    """Brand-constrained, self-correcting video pipeline engine."""


@main.command("extract")
@click.option("--url", default=None, help="Absolute http(s) URL to ingest.")
@click.option("--fixture", default=None, help="Fixture site name (resolves fixture:<name>/index.html).")
@click.option("--fixture-root", default="fixtures", show_default=True)
@click.option("--out", "out_path", default=None, help="Output path [default: <site>.branddna.json].")
@click.option("--seed", type=int, default=None, help="Sim extractor seed [env: GENFLOW_SEED].")
@click.option("--repair-budget", type=int, default=1, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the document to stdout as JSON.")
def cmd_extract(
    url: str | None,
    fixture: str | None,
    fixture_root: str,
    out_path: str | None,
    seed: int | None,
    repair_budget: int,
    as_json: bool,
) -> None:
    """Ingest a site and write its constraint document (.branddna.json)."""
    if (url is None) == (fixture is None):
        raise click.UsageError("exactly one of --url / --fixture is required")
    if fixture is not None:
        target = f"fixture:{fixture}" if "/" in fixture else f"fixture:{fixture}/index.html"
        default_name = fixture.split("/")[0]
    else:
        target = url
        default_name = "site"

    from .backends.sim import SimExtractor
    from .rng import Substream

    run_seed = _env_seed(seed)
    params = default_sim_params(master_seed=run_seed)
    extractor = SimExtractor(params, Substream(run_seed).derive("backend", "extractor"), fixture_root=fixture_root)
    try:
        site = fetch_site(target, FetchPolicy(fixture_root=fixture_root))
        dna = build_brand_dna(site, extractor, repair_budget=repair_budget)
    except ParseExhausted as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except EmptyPalette as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (NetworkError, NotHtml, SizeExceeded) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)

    if as_json:
        click.echo(json.dumps(dna.to_dict(), indent=2, ensure_ascii=False))
    destination = Path(out_path or f"{default_name}.branddna.json")
    _write_file(destination, dna.dumps())
    if not as_json:
        click.echo(f"wrote {destination} ({len(dna.palette)} colors, {len(dna.typography)} families)")


@main.command("run")
@click.option("--dna", "dna_path", required=True, type=click.Path(), help="Path to a .branddna.json file.")
@click.option("--asset", "asset_path", required=True, type=click.Path(), help="Path to an asset descriptor JSON.")
@click.option("--objective", required=True)
@click.option("--scenes", type=int, default=4, show_default=True)
@click.option("--backend", type=click.Choice(["sim", "remote"]), default="sim", show_default=True)
@click.option("--config", "config_path", default=None, help="Config file (required for --backend remote).")
@click.option("--profile", default=None, help="Backend profile name from the config file.")
@click.option("--seed", type=int, default=None, help="Run seed [env: GENFLOW_SEED].")
@click.option("--retry-budget", type=int, default=3, show_default=True)
@click.option("--repair-budget", type=int, default=1, show_default=True)
@click.option("--out", "out_path", default=None, help="Transcript path [default: <run_id>.transcript.json].")
@click.option("--json", "as_json", is_flag=True, help="Print the transcript to stdout as JSON.")
def cmd_run(
    dna_path: str,
    asset_path: str,
    objective: str,
    scenes: int,
    backend: str,
    config_path: str | None,
    profile: str | None,
    seed: int | None,
    retry_budget: int,
    repair_budget: int,
    out_path: str | None,
    as_json: bool,
) -> None:
    """Author a script from a constraint document and run the full QC chain."""
    if scenes < 1:
        raise click.UsageError("--scenes must be >= 1")
    if not objective.strip():
        raise click.UsageError("--objective must be non-empty")

    try:
        dna_doc = json.loads(Path(dna_path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        click.echo(f"error: cannot read dna file {dna_path}: {exc}", err=True)
        sys.exit(_EX_DATAERR)
    dna = validate_schema(dna_doc)
    if not isinstance(dna, BrandDNA):
        problems = ", ".join(f"{v.field_path}:{v.rule}" for v in dna)
        click.echo(f"error: dna file invalid: {problems}", err=True)
        sys.exit(_EX_DATAERR)
    try:
        asset = load_descriptor(asset_path)
    except (OSError, ValueError, InvalidAsset) as exc:
        click.echo(f"error: cannot read asset descriptor {asset_path}: {exc}", err=True)
        sys.exit(_EX_DATAERR)

    run_seed = _env_seed(seed)
    if backend == "remote":
        if config_path is None:
            raise click.UsageError("--backend remote requires --config")
        try:
            config = load_config(config_path)
            backend_profile = config.profile(profile)
        except ConfigError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_EX_CONFIG)
        backends = backend_profile.build_backends(run_seed)
    else:
        from .backends.sim import build_sim_backends

        backends = build_sim_backends(default_sim_params(master_seed=run_seed), run_seed)

    try:
        normalized = normalize_asset(asset, dna, backends.enhancer)
        matrix = author_script(dna, objective, scenes, backends.director, repair_budget=repair_budget)
        transcript = run_chain(
            matrix, normalized, dna, QcPolicy(retry_budget=retry_budget), backends, run_seed
        )
    except ParseExhausted as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except GenflowError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    if as_json:
        click.echo(json.dumps(transcript.to_dict(), indent=2, ensure_ascii=False))
    destination = Path(out_path or f"{transcript.run_id}.transcript.json")
    _write_file(destination, transcript.dumps())
    if not as_json:
        committed = sum(1 for s in transcript.scenes if s.committed)
        click.echo(
            f"wrote {destination} (run {transcript.run_id}: "
            f"{committed}/{len(transcript.scenes)} scenes committed)"
        )


@main.command("simulate")
@click.option("--runs", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=None, help="Experiment seed [env: GENFLOW_SEED].")
@click.option("--tier", type=click.Choice(["simple", "complex"]), default=None)
@click.option("--retry-budget", type=int, default=3, show_default=True)
@click.option("--malformed-rate", type=float, default=None, help="Override the structured-output failure rate.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--report", "report_path", default="report.json", show_default=True)
@click.option("--report-txt", "report_txt_path", default="report.txt", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the report JSON to stdout.")
def cmd_simulate(
    runs: int,
    seed: int | None,
    tier: str | None,
    retry_budget: int,
    malformed_rate: float | None,
    workers: int,
    report_path: str,
    report_txt_path: str,
    as_json: bool,
) -> None:
    """Monte Carlo arms over the sim backend; writes report.json / report.txt."""
    if runs < 1:
        raise click.UsageError("--runs must be >= 1")
    if workers < 1:
        raise click.UsageError("--workers must be >= 1")
    experiment_seed = _env_seed(seed)
    overrides: dict = {"tier": tier} if tier else {}
    if malformed_rate is not None:
        overrides["malformed_rate"] = malformed_rate
    params = sim_params_from_dict(overrides, master_seed=experiment_seed)
    report = run_experiment(
        params, runs, experiment_seed, retry_budget=retry_budget, workers=workers
    )
    write_report(report, report_path, report_txt_path)
    if as_json:
        click.echo(json.dumps(report.to_dict(), indent=2, ensure_ascii=False))
    else:
        click.echo(render_report_text(report), nl=False)
        click.echo(f"wrote {report_path} and {report_txt_path}")


@main.command("serve")
@click.option("--config", "config_path", default=None, help="Config file path.")
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", type=int, default=None, help="Override the configured listen port.")
def cmd_serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the campaign service until a signal arrives."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(_EX_CONFIG)

    import signal

    import uvicorn

    from .service import create_app

    app = create_app(config)
    server = uvicorn.Server(
        uvicorn.Config(app, host=host or config.host, port=port or config.port, log_level="warning")
    )
    # uvicorn drains gracefully on SIGTERM but then re-raises the signal;
    # absorbing the re-raise keeps the documented exit code 0
    signal.signal(signal.SIGTERM, lambda signum, frame: None)
    server.run()


if __name__ == "__main__":
    main()
