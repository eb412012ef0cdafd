"""Command-line frontend: one subcommand per figure plus generic fit/CV.

Each subcommand writes one CSV per panel and a line-delimited JSON manifest
(`manifest.jsonl`) describing the run, the artifacts with their SHA-256
hashes, and the panel layout consumed by the figure renderer. Identical
command + seed produces byte-identical CSVs, independent of --threads.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from .data import RffConfig
from .errors import RidgeLabError
from .experiments import (
    RiskCurve,
    augmentation_sweep,
    dimensionality_sweep,
    find_lambda_opt,
    heatmap_lambda_opt,
    kfold_cv,
    lambda_sweep,
    rff_mnist_experiment,
)
from .derivative import derivative_at_zero
from .linalg import fit_with_intercept
from .rng import derive_seed, rng_for
from .spiked import SpikedSpec, benchmark_spec, sample_training

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    f = float(v)
    if np.isnan(f):
        return "nan"
    return repr(f)


class Run:
    """Collects artifacts and panel entries, then writes the manifest."""

    def __init__(self, command: str, params: dict, seed: int, out_dir: Path):
        self.command = command
        self.params = params
        self.seed = seed
        self.out_dir = out_dir
        self.artifacts: list[dict] = []
        self.panels: list[dict] = []
        self.t0 = time.time()
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_csv(self, name: str, header: list[str], rows, schema: str) -> str:
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.artifacts.append({"type": "artifact", "path": name, "sha256": digest, "schema": schema})
        return name

    def write_curve(self, name: str, curve: RiskCurve) -> str:
        rows = zip(curve.lambdas, curve.mean_nmse, curve.std_err,
                   [curve.n_rep] * curve.lambdas.size, curve.excluded)
        return self.write_csv(
            name, ["lambda", "mean_nmse", "std_err", "n_rep", "excluded"], rows, "curve"
        )

    def panel(self, panel_id: str, kind: str, csv: str, title: str = "") -> None:
        self.panels.append(
            {"type": "panel", "id": panel_id, "kind": kind, "csv": csv, "title": title}
        )

    def finish(self) -> None:
        manifest = self.out_dir / "manifest.jsonl"
        lines = [
            {
                "type": "run",
                "command": self.command,
                "params": self.params,
                "master_seed": self.seed,
                "tool_version": __version__,
                "outputs": [a["path"] for a in self.artifacts],
                "wall_time": round(time.time() - self.t0, 3),
            }
        ]
        lines += self.artifacts + self.panels
        with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(json.dumps(line, sort_keys=True) + "\n")
        click.echo(f"wrote {len(self.artifacts)} artifact(s) + manifest to {self.out_dir}")


def _seed_default() -> int:
    return int(os.environ.get("RIDGELESS_SEED", "0"))


def common_options(fn):
    fn = click.option("--seed", type=int, default=None, help="Master seed (falls back to $RIDGELESS_SEED, then 0).")(fn)
    fn = click.option("--out-dir", type=click.Path(path_type=Path), default=Path("out"), show_default=True)(fn)
    fn = click.option("--n-rep", type=int, default=100, show_default=True)(fn)
    fn = click.option("--n", type=int, default=64, show_default=True)(fn)
    fn = click.option("--rho", type=float, default=0.1, show_default=True)(fn)
    fn = click.option("--alpha", type=float, default=10.0, show_default=True)(fn)
    fn = click.option("--sigma2", type=float, default=1.0, show_default=True)(fn)
    fn = click.option("--threads", type=int, default=os.cpu_count() or 1, help="Worker threads; results are thread-count independent.")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Numerical lab for high-dimensional ridge and minimum-norm regression."""


def _resolve_seed(seed):
    return _seed_default() if seed is None else seed


def _pos_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.geomspace(lo, hi, steps)


@main.command()
@common_options
@click.option("--p", "ps", type=int, multiple=True, default=(50, 75, 150, 1000), show_default=True, help="Dimensionalities for the curve panels.")
@click.option("--lambda-min", type=float, default=1e-2, show_default=True)
@click.option("--lambda-max", type=float, default=1e5, show_default=True)
@click.option("--lambda-steps", type=int, default=50, show_default=True)
@click.option("--neg-lambda", type=float, default=-400.0, show_default=True, help="Left edge of the negative-penalty grid for the last panel.")
@click.option("--dim-steps", type=int, default=24, show_default=True, help="Size of the dimensionality grid for panels e/f.")
def fig2(ps, lambda_min, lambda_max, lambda_steps, neg_lambda, dim_steps, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """Risk curves across penalties and the double-descent sweep."""
    seed = _resolve_seed(seed)
    run = Run("fig2", _params(locals()), seed, out_dir)
    spec0 = SpikedSpec(p=ps[0], rho=rho, alpha=alpha, sigma2=sigma2)
    grid = _pos_grid(lambda_min, lambda_max, lambda_steps)
    panel_ids = "abcd"
    for i, p in enumerate(ps):
        curve = lambda_sweep(replace(spec0, p=p), n, grid, n_rep, derive_seed(seed, 0, i), threads)
        name = run.write_curve(f"fig2_p{p}.csv", curve)
        pid = panel_ids[i] if i < 4 else f"curve{i}"
        run.panel(pid, "curve", name, f"p={p}")

    p_hi = max(ps)
    lo = int(dim_steps)
    p_grid = sorted(set(
        [10, 20, 30, 40, 50, 55, 60, 64, 68, 75, 90, 110, 150, 200, 300, 450, 600, 800, p_hi][:max(lo, 6)]
    ))
    dim_rows = dimensionality_sweep(p_grid, n, n_rep, derive_seed(seed, 1), template=spec0, threads=threads)
    name = run.write_csv(
        "fig2_dimsweep.csv",
        ["p", "risk_minnorm", "risk_opt", "lambda_opt"],
        dim_rows,
        "dimsweep",
    )
    run.panel("e", "dimsweep-risk", name, "risk vs p")
    run.panel("f", "dimsweep-lambda", name, "lambda_opt vs p")

    neg_grid = np.unique(np.concatenate([
        np.linspace(neg_lambda, 0.0, 41),
        _pos_grid(lambda_min, 1e4, 30),
    ]))
    curve = lambda_sweep(replace(spec0, p=p_hi), n, neg_grid, n_rep, derive_seed(seed, 0, len(ps) - 1), threads)
    name = run.write_curve(f"fig2_p{p_hi}_negative.csv", curve)
    run.panel("g", "curve", name, f"p={p_hi}, negative penalties")
    run.finish()


@main.command()
@common_options
@click.option("--n-grid", type=str, default="10,25,40,55,70,85,100", show_default=True)
@click.option("--p-grid", type=str, default="20,50,100,200,300,500,700,1000", show_default=True)
def fig3(n_grid, p_grid, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """Optimal-penalty heatmaps over (n, p), spherical and spiked."""
    seed = _resolve_seed(seed)
    run = Run("fig3", _params(locals()), seed, out_dir)
    ns = [int(v) for v in n_grid.split(",")]
    ps = [int(v) for v in p_grid.split(",")]
    for pid, (label, r) in zip("ab", [("rho0", 0.0), ("rho", rho)]):
        template = SpikedSpec(p=ps[0], rho=r, alpha=alpha, sigma2=sigma2)
        rows = heatmap_lambda_opt(ns, ps, template, n_rep, derive_seed(seed, 0 if r == 0 else 1), threads)
        name = run.write_csv(
            f"fig3_{label}.csv", ["n", "p", "lambda_opt", "boundary_hit"], rows, "heatmap"
        )
        run.panel(pid, "heatmap", name, f"rho={r}")
    run.finish()


@main.command()
@common_options
@click.option("--p", type=int, default=50, show_default=True)
@click.option("--q-max", type=int, default=400, show_default=True)
@click.option("--q-step", type=int, default=25, show_default=True)
@click.option("--total-lambda", type=float, default=None, help="Adaptive-mode total penalty; default: the fitted lambda_opt.")
@click.option("--variance-mode", type=click.Choice(["adaptive", "fixed", "both"]), default="both", show_default=True)
@click.option("--fixed-var", type=float, default=1.0, show_default=True)
def fig4(p, q_max, q_step, total_lambda, variance_mode, fixed_var, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """Random-predictor augmentation sweeps."""
    seed = _resolve_seed(seed)
    run = Run("fig4", _params(locals()), seed, out_dir)
    spec = SpikedSpec(p=p, rho=rho, alpha=alpha, sigma2=sigma2)
    grid = _pos_grid(1e-2, 1e5, 50)
    curve = lambda_sweep(spec, n, grid, n_rep, derive_seed(seed, 0), threads)
    name = run.write_curve("fig4_curve.csv", curve)
    run.panel("a", "curve", name, f"p={p}")
    if total_lambda is None:
        total_lambda = find_lambda_opt(spec, n, n_rep, derive_seed(seed, 0), threads=threads).lambda_opt
    qs = list(range(0, q_max + 1, q_step))
    header = ["q", "risk_trunc", "risk_full", "lambda_opt", "excluded"]
    if variance_mode in ("adaptive", "both"):
        rows = augmentation_sweep(spec, n, qs, "adaptive", n_rep, derive_seed(seed, 1), total_lambda=total_lambda)
        name = run.write_csv("fig4_adaptive.csv", header, rows, "sweep")
        run.panel("b", "sweep", name, f"variance {total_lambda:.3g}/q")
        run.panel("d", "sweep-lambda", name, "lambda_opt vs q (adaptive)")
    if variance_mode in ("fixed", "both"):
        rows = augmentation_sweep(spec, n, qs, "fixed", n_rep, derive_seed(seed, 2), var=fixed_var)
        name = run.write_csv("fig4_fixed.csv", header, rows, "sweep")
        run.panel("c", "sweep", name, f"variance {fixed_var}")
        run.panel("e", "sweep-lambda", name, "lambda_opt vs q (fixed)")
    run.finish()


@main.command()
@common_options
@click.option("--p-min", type=int, default=100, show_default=True)
@click.option("--p-max", type=int, default=1000, show_default=True)
@click.option("--p-step", type=int, default=100, show_default=True)
def fig5(p_min, p_max, p_step, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """Monte-Carlo risk derivative at zero penalty across dimensionality."""
    seed = _resolve_seed(seed)
    run = Run("fig5", _params(locals()), seed, out_dir)
    rows = []
    for i, p in enumerate(range(p_min, p_max + 1, p_step)):
        spec = SpikedSpec(p=p, rho=rho, alpha=alpha, sigma2=sigma2)
        est = derivative_at_zero(spec, n, n_rep, derive_seed(seed, i))
        rows.append((p, est.value, est.std_err))
    name = run.write_csv("fig5_derivative.csv", ["p", "derivative", "std_err"], rows, "derivative")
    run.panel("a", "derivative", name, "risk derivative at 0+")
    run.panel("b", "derivative", name, "zoom")
    run.finish()


@main.command()
@common_options
@click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="Directory holding the four IDX files.")
@click.option("--mnist-images", type=click.Path(path_type=Path), default=None, help="Training images IDX file.")
@click.option("--mnist-labels", type=click.Path(path_type=Path), default=None, help="Training labels IDX file.")
@click.option("--mnist-test-images", type=click.Path(path_type=Path), default=None)
@click.option("--mnist-test-labels", type=click.Path(path_type=Path), default=None)
@click.option("--rff-features", type=int, default=1000, show_default=True, help="Complex frequencies; feature count is twice this.")
@click.option("--kernel-sigma", type=float, default=0.1, show_default=True)
@click.option("--train-n", type=int, default=64, show_default=True)
@click.option("--neg-lambda", type=float, default=-150.0, show_default=True)
@click.option("--smin-threshold", type=float, default=100.0, show_default=True)
def fig6(mnist_dir, mnist_images, mnist_labels, mnist_test_images, mnist_test_labels,
         rff_features, kernel_sigma, train_n, neg_lambda, smin_threshold,
         seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """MNIST random-Fourier-feature risk curves with negative penalties."""
    seed = _resolve_seed(seed)
    paths = {}
    if mnist_dir is not None:
        for key, fname in MNIST_FILES.items():
            paths[key] = Path(mnist_dir) / fname
    overrides = {
        "train_images": mnist_images,
        "train_labels": mnist_labels,
        "test_images": mnist_test_images,
        "test_labels": mnist_test_labels,
    }
    for key, value in overrides.items():
        if value is not None:
            paths[key] = value
    missing = [k for k in MNIST_FILES if k not in paths or not Path(paths[k]).exists()]
    if missing:
        expected = ", ".join(MNIST_FILES[k] for k in missing)
        raise click.ClickException(
            f"missing MNIST IDX file(s): {expected} "
            "(supply --mnist-dir or the explicit --mnist-* flags)"
        )
    run = Run("fig6", _params(locals(), skip={"paths", "overrides", "missing"}), seed, out_dir)
    grid = np.unique(np.concatenate([
        np.linspace(neg_lambda, 0.0, 61),
        np.geomspace(1e-2, 1e4, 40),
    ]))
    cfg = RffConfig(input_dim=784, n_features=rff_features, kernel_sigma=kernel_sigma, seed=derive_seed(seed, 99))
    result = rff_mnist_experiment(
        paths["train_images"], paths["train_labels"],
        paths["test_images"], paths["test_labels"],
        grid, rff=cfg, train_n=train_n, n_rep=n_rep,
        smin_sq_threshold=smin_threshold, seed=seed, threads=threads,
    )
    pos = result.curve_all.lambdas >= 0
    pos_curve = RiskCurve(
        lambdas=result.curve_all.lambdas[pos],
        mean_nmse=result.curve_all.mean_nmse[pos],
        std_err=result.curve_all.std_err[pos],
        n_rep=result.curve_all.n_rep,
        excluded=result.curve_all.excluded[pos],
    )
    name = run.write_curve("fig6_positive.csv", pos_curve)
    run.panel("a", "curve", name, "non-negative penalties")
    name = run.write_curve("fig6_above.csv", result.curve_above)
    run.panel("b", "curve", name, f"smin^2 > {smin_threshold}")
    run.write_curve("fig6_below.csv", result.curve_below)
    run.write_curve("fig6_all.csv", result.curve_all)
    run.write_csv(
        "fig6_smin.csv", ["replicate", "smin_sq"],
        list(enumerate(result.smin_sq)), "smin",
    )
    run.finish()


@main.command()
@common_options
@click.option("--data", type=click.Path(path_type=Path), default=None, help="CSV dataset; synthetic spiked data when omitted.")
@click.option("--response", type=str, default="y", show_default=True)
@click.option("--p", type=int, default=3116, show_default=True, help="Synthetic predictor count.")
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--lambda-min", type=float, default=1e-2, show_default=True)
@click.option("--lambda-max", type=float, default=1e5, show_default=True)
@click.option("--lambda-steps", type=int, default=40, show_default=True)
def cv(data, response, p, k, lambda_min, lambda_max, lambda_steps, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """k-fold cross-validation curve for ridge with intercept."""
    seed = _resolve_seed(seed)
    run = Run("cv", _params(locals()), seed, out_dir)
    if data is not None:
        from .data import load_csv, standardize
        dataset = standardize(load_csv(data, response))
    else:
        dataset = sample_training(SpikedSpec(p=p, rho=rho, alpha=alpha, sigma2=sigma2), n, rng_for(seed, 0))
    grid = _pos_grid(lambda_min, lambda_max, lambda_steps)
    curve = kfold_cv(dataset, grid, k, derive_seed(seed, 1))
    name = run.write_curve("cv_curve.csv", curve)
    run.panel("a", "curve", name, f"{k}-fold CV")
    run.finish()


@main.command()
@common_options
@click.option("--data", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--response", type=str, required=True)
@click.option("--lam", type=float, default=0.0, show_default=True)
def fit(data, response, lam, seed, out_dir, n_rep, n, rho, alpha, sigma2, threads):
    """Single ridge fit with unpenalized intercept on a CSV dataset."""
    seed = _resolve_seed(seed)
    run = Run("fit", _params(locals()), seed, out_dir)
    from .data import load_csv
    dataset = load_csv(data, response)
    fitted = fit_with_intercept(dataset, lam)
    rows = [("intercept", fitted.intercept)] + [
        (f"x{i}", c) for i, c in enumerate(fitted.coefficients)
    ]
    run.write_csv("fit_coefficients.csv", ["term", "coefficient"], rows, "coefficients")
    click.echo(f"smin_sq={fitted.smin_sq:.6g} lambda={lam}")
    run.finish()


@main.command()
@click.argument("manifest", type=click.Path(path_type=Path, exists=True))
def check(manifest):
    """Verify that every artifact in a manifest exists with matching hash."""
    base = manifest.parent
    bad = []
    with open(manifest, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("type") != "artifact":
                continue
            path = base / rec["path"]
            if not path.exists():
                bad.append(f"{rec['path']}: missing")
                continue
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            if digest != rec["sha256"]:
                bad.append(f"{rec['path']}: hash mismatch")
    if bad:
        raise click.ClickException("; ".join(bad))
    click.echo("manifest OK")


def _params(values: dict, skip: set | None = None) -> dict:
    """Serializable copy of a command's local arguments."""
    drop = {"seed", "out_dir", "run", "threads"} | (skip or set())
    out = {}
    for key, value in values.items():
        if key in drop or key.startswith("_"):
            continue
        if isinstance(value, Path):
            value = str(value)
        if isinstance(value, (str, int, float, bool, tuple, list)) or value is None:
            out[key] = list(value) if isinstance(value, tuple) else value
    return out


def entry() -> None:
    try:
        main(standalone_mode=True)
    except RidgeLabError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
