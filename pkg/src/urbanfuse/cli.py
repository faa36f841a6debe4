"""Command-line entry points; thin layer over the pipeline and the service."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import pipeline as pl
from .session import IncompleteSessionError, report as build_report


def _load_config(config_path, seed) -> pl.ExperimentConfig:
    cfg = (
        pl.ExperimentConfig.from_file(config_path)
        if config_path
        else pl.ExperimentConfig()
    )
    if seed is not None:
        cfg.seed = seed
    return cfg


def _fail(stage: str, exc: BaseException) -> None:
    click.echo(f"error [{stage}] {exc}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Train, evaluate and explore street-graph fusion embeddings."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Session parent directory")
@click.option("--force", is_flag=True, help="Overwrite an existing session")
def generate(config_path, seed, out_dir, force):
    """Generate the synthetic dataset into a new session directory."""
    cfg = _load_config(config_path, seed).resolved()
    try:
        root, _ = pl._session_dir(cfg, out_dir, force)
        pl.stage_generate(cfg, root)
    except pl.StageError as exc:
        _fail(exc.stage, exc.cause)
    except Exception as exc:
        _fail("generate", exc)
    click.echo(f"session {root}")


def _session_cmd(stage_name):
    def deco(fn):
        fn = click.option("--session", "session_dir", type=click.Path(exists=True), required=True)(fn)
        fn = click.option("--config", "config_path", type=click.Path(exists=True), default=None)(fn)
        return fn

    return deco


def _session_config(session_dir, config_path) -> pl.ExperimentConfig:
    if config_path:
        return pl.ExperimentConfig.from_file(config_path).resolved()
    snapshot = json.loads((Path(session_dir) / "config.json").read_text(encoding="utf-8"))
    snapshot.pop("config_hash", None)
    return pl.ExperimentConfig.from_dict(snapshot).resolved()


@main.command()
@_session_cmd("train")
def train(session_dir, config_path):
    """Train the five fusion models on a session's dataset."""
    cfg = _session_config(session_dir, config_path)
    try:
        pl.stage_train(cfg, Path(session_dir))
    except pl.StageError as exc:
        _fail(exc.stage, exc.cause)
    click.echo("trained 5 models")


@main.command()
@_session_cmd("evaluate")
def evaluate(session_dir, config_path):
    """Evaluate embeddings with dual silhouette scores."""
    cfg = _session_config(session_dir, config_path)
    try:
        summaries = pl.stage_evaluate(cfg, Path(session_dir))
    except pl.StageError as exc:
        _fail(exc.stage, exc.cause)
    for key, quad in summaries.items():
        click.echo(f"{key}: TR fraction {quad['fractions']['TR']:.3f}")


@main.command()
@_session_cmd("project")
def project(session_dir, config_path):
    """Project each embedding to 2-D."""
    cfg = _session_config(session_dir, config_path)
    try:
        pl.stage_project(cfg, Path(session_dir))
    except pl.StageError as exc:
        _fail(exc.stage, exc.cause)
    click.echo("projected 5 embeddings")


@main.command("run-all")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--force", is_flag=True)
@click.option("--dataset-dir", type=click.Path(exists=True), default=None,
              help="Run on real CSVs instead of generating synthetic data")
def run_all(config_path, seed, out_dir, force, dataset_dir):
    """Full pipeline: generate, train, evaluate, project."""
    cfg = _load_config(config_path, seed)
    try:
        if dataset_dir:
            session = pl.run_real_experiment(dataset_dir, cfg, out_dir, force=force)
        else:
            session = pl.run_synthetic_experiment(cfg, out_dir, force=force)
    except pl.StageError as exc:
        _fail(exc.stage, exc.cause)
    except Exception as exc:
        _fail("run-all", exc)
    click.echo(f"session {session.root}")
    rep = build_report(session.root)
    click.echo(rep.to_text())


@main.command("report")
@click.option("--session", "session_dir", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable index")
def report_cmd(session_dir, as_json):
    """Summarize a completed session from its on-disk artifacts."""
    try:
        rep = build_report(session_dir)
    except IncompleteSessionError as exc:
        _fail("report", exc)
    click.echo(json.dumps(rep.to_dict(), indent=2, sort_keys=True) if as_json else rep.to_text())


@main.command()
@click.option("--session", "session_dir", type=click.Path(exists=True), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(session_dir, host, port):
    """Serve the explorer API over a completed session."""
    import uvicorn

    from .service.app import create_app

    try:
        app = create_app(session_dir)
    except IncompleteSessionError as exc:
        _fail("serve", exc)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
