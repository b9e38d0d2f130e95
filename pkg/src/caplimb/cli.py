"""Command-line entry points: collect, train, run, serve."""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import click
import numpy as np

from . import datagen, scenarios
from .mlp import TrainConfig, train, validation_rmse
from .model_store import load_model, save_model
from .sensor import mode_by_name


@click.group()
def main():
    """Simulated capacitive limb tracking pipeline."""


@main.command()
@click.option("--limb", type=click.Choice(["arm", "leg", "both"]), default="both")
@click.option("--mode", "mode_name",
              type=click.Choice(["air_gown", "wet_cloth"]), default="air_gown")
@click.option("--iters", type=int, default=100,
              help="Sweep iterations per limb site (100 keeps collection "
                   "under two minutes; larger values improve accuracy).")
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--csv-out", type=click.Path(), default=None,
              help="Optional flat CSV export alongside the binary dataset.")
def collect(limb, mode_name, iters, seed, out_path, csv_out):
    """Collect (capacitance window, relative pose) training pairs."""
    mode = mode_by_name(mode_name)
    kinds = ["arm", "leg"] if limb == "both" else [limb]
    parts = []
    for j, kind in enumerate(kinds):
        click.echo(f"collecting {kind} ({iters} iterations/site)...")
        parts.append(datagen.collect_limb(kind, iters, mode, seed + 1000 * j))
    ds = datagen.merge_datasets(parts) if len(parts) > 1 else parts[0]
    datagen.save_dataset(ds, out_path)
    click.echo(f"wrote {len(ds)} records to {out_path}")
    if csv_out:
        datagen.export_csv(ds, csv_out)
        click.echo(f"wrote CSV export to {csv_out}")


@main.command("train")
@click.option("--data", "data_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--epochs", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--history-out", type=click.Path(), default=None,
              help="Per-epoch train/val loss CSV.")
def train_cmd(data_path, out_path, epochs, seed, history_out):
    """Train the window-to-pose regressor on a collected dataset."""
    ds = datagen.load_dataset(data_path)
    cfg = TrainConfig(epochs=epochs, seed=seed)

    def progress(epoch, tr, va):
        click.echo(f"epoch {epoch + 1}/{epochs}  train {tr:.6f}  val {va:.6f}")

    params, history = train(ds.windows, ds.y, cfg, groups=ds.split_groups(),
                            progress=progress)
    rmse = validation_rmse(params, ds.windows, ds.y)
    click.echo("full-set RMSE: "
               f"p_y {rmse[0]:.4f} m, p_z {rmse[1]:.4f} m, "
               f"theta_y {rmse[2]:.4f} rad, theta_z {rmse[3]:.4f} rad")
    save_model(params, out_path, mode=ds.mode,
               extra={"epochs": epochs, "seed": seed})
    click.echo(f"wrote model to {out_path}")
    if history_out:
        with open(history_out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["epoch", "train_loss", "val_loss"])
            w.writerows(history)


@main.command("run")
@click.option("--scenario", "scenario_ref", required=True,
              help="Builtin scenario name or path to a scenario YAML file.")
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--trials", type=int, default=None,
              help="Override the scenario's trial count.")
@click.option("--seed", type=int, default=None)
def run_cmd(scenario_ref, model_path, out_dir, trials, seed):
    """Run an evaluation scenario and emit its report."""
    s = _resolve_scenario(scenario_ref)
    if seed is not None:
        s = scenarios.Scenario(**{**s.__dict__, "seed": seed})
    params, meta = load_model(model_path)
    logs, summary = scenarios.run_scenario(s, params, meta.get("mode"),
                                           trials=trials)
    scenarios.emit_report(logs, out_dir, summary)
    click.echo(f"{summary['successes']}/{summary['trials']} trials succeeded; "
               f"mean axis distance {summary['mean_axis_dist']:.3f} m; "
               f"report in {out_dir}")


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--scenario", "scenario_ref", default="vertical_dressing")
@click.option("--model", "model_path", type=click.Path(exists=True),
              required=True)
@click.option("--seed", type=int, default=0)
@click.option("--ui-dir", type=click.Path(exists=True), default=None,
              help="Serve a static frontend bundle at /.")
def serve(port, host, scenario_ref, model_path, seed, ui_dir):
    """Run the live steering service."""
    import uvicorn
    from .service import create_app

    s = _resolve_scenario(scenario_ref)
    if s.motion != "live":
        s = scenarios.Scenario(**{**s.__dict__, "motion": "live"})
    params, meta = load_model(model_path)
    if meta.get("mode") not in (None, s.mode):
        raise click.ClickException(
            f"model mode {meta.get('mode')!r} does not match scenario mode {s.mode!r}")
    app = create_app(s, params, seed=seed)
    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)


def _resolve_scenario(ref: str) -> scenarios.Scenario:
    if ref in scenarios.BUILTIN_SCENARIOS:
        return scenarios.BUILTIN_SCENARIOS[ref]()
    path = Path(ref)
    if path.exists():
        return scenarios.Scenario.from_file(path)
    raise click.ClickException(
        f"unknown scenario {ref!r}; builtins: {sorted(scenarios.BUILTIN_SCENARIOS)}")


if __name__ == "__main__":
    main()
