import csv
import hashlib
import json

import numpy as np
import pytest
from click.testing import CliRunner

from ridgelab.cli import main
from ridgelab.data import write_idx


def run_ok(args):
    result = CliRunner().invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def read_manifest(out_dir):
    lines = (out_dir / "manifest.jsonl").read_text(encoding="utf-8").splitlines()
    return [json.loads(line) for line in lines]


def hash_dir(out_dir):
    digests = {}
    for path in sorted(out_dir.glob("*.csv")):
        digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


FAST_FIG2 = [
    "fig2", "--p", "40", "--p", "120", "--n-rep", "5",
    "--lambda-steps", "8", "--dim-steps", "6", "--seed", "1",
]


class TestFig2:
    def test_outputs_and_schema(self, tmp_path):
        out = tmp_path / "o"
        run_ok(FAST_FIG2 + ["--out-dir", str(out)])
        records = read_manifest(out)
        run_rec = records[0]
        assert run_rec["type"] == "run"
        assert run_rec["command"] == "fig2"
        assert run_rec["master_seed"] == 1
        arts = [r for r in records if r["type"] == "artifact"]
        assert set(run_rec["outputs"]) == {a["path"] for a in arts}
        for art in arts:
            path = out / art["path"]
            assert path.exists()
            assert hashlib.sha256(path.read_bytes()).hexdigest() == art["sha256"]
        # curve CSVs carry the fixed column contract
        with open(out / "fig2_p40.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["lambda", "mean_nmse", "std_err", "n_rep", "excluded"]
        with open(out / "fig2_dimsweep.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["p", "risk_minnorm", "risk_opt", "lambda_opt"]
        panels = [r for r in records if r["type"] == "panel"]
        assert [p["id"] for p in panels] == ["a", "b", "e", "f", "g"]

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_ok(FAST_FIG2 + ["--out-dir", str(a)])
        run_ok(FAST_FIG2 + ["--out-dir", str(b)])
        assert hash_dir(a) == hash_dir(b)

    def test_threads_do_not_change_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_ok(FAST_FIG2 + ["--out-dir", str(a), "--threads", "1"])
        run_ok(FAST_FIG2 + ["--out-dir", str(b), "--threads", "4"])
        assert hash_dir(a) == hash_dir(b)

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_ok(FAST_FIG2 + ["--out-dir", str(a)])
        run_ok(FAST_FIG2[:-1] + ["2", "--out-dir", str(b)])
        assert hash_dir(a) != hash_dir(b)

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("RIDGELESS_SEED", "1")
        run_ok(FAST_FIG2[:-2] + ["--out-dir", str(a)])
        run_ok(FAST_FIG2 + ["--out-dir", str(b)])
        assert hash_dir(a) == hash_dir(b)


class TestFig3:
    def test_heatmap_schema(self, tmp_path):
        out = tmp_path / "o"
        run_ok([
            "fig3", "--n-grid", "20,64", "--p-grid", "10,100",
            "--n-rep", "5", "--seed", "0", "--out-dir", str(out),
        ])
        for name in ("fig3_rho0.csv", "fig3_rho.csv"):
            with open(out / name, newline="") as fh:
                rows = list(csv.reader(fh))
            assert rows[0] == ["n", "p", "lambda_opt", "boundary_hit"]
            assert len(rows) == 5
            assert {r[3] for r in rows[1:]} <= {"0", "1"}


class TestFig4:
    def test_sweep_schema(self, tmp_path):
        out = tmp_path / "o"
        run_ok([
            "fig4", "--p", "40", "--q-max", "20", "--q-step", "10",
            "--n-rep", "4", "--seed", "0", "--out-dir", str(out),
        ])
        arts = {r["path"] for r in read_manifest(out) if r["type"] == "artifact"}
        sweep = next(a for a in arts if "adaptive" in a)
        with open(out / sweep, newline="") as fh:
            header = next(csv.reader(fh))
        assert header[:4] == ["q", "risk_trunc", "risk_full", "lambda_opt"]


class TestFig5:
    def test_derivative_schema(self, tmp_path):
        out = tmp_path / "o"
        run_ok([
            "fig5", "--p-min", "100", "--p-max", "300", "--p-step", "200",
            "--n-rep", "5", "--seed", "0", "--out-dir", str(out),
        ])
        art = next(
            r["path"] for r in read_manifest(out) if r["type"] == "artifact"
        )
        with open(out / art, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:3] == ["p", "derivative", "std_err"]
        assert [r[0] for r in rows[1:]] == ["100", "300"]


@pytest.fixture()
def mnist_dir(tmp_path):
    rng = np.random.default_rng(0)
    d = tmp_path / "mnist"
    d.mkdir()
    for stem, count in (("train", 150), ("t10k", 60)):
        pixels = rng.integers(0, 256, size=(count, 784)).astype(np.uint8)
        labels = rng.integers(0, 10, size=count).astype(np.uint8)
        write_idx(
            d / f"{stem}-images-idx3-ubyte", d / f"{stem}-labels-idx1-ubyte",
            pixels, labels,
        )
    return d


class TestFig6:
    def test_missing_files_error_names_them(self, tmp_path):
        result = CliRunner().invoke(main, ["fig6", "--out-dir", str(tmp_path / "o")])
        assert result.exit_code != 0
        assert "train-images-idx3-ubyte" in result.output
        assert "t10k-labels-idx1-ubyte" in result.output

    def test_runs_on_idx_fixture(self, tmp_path, mnist_dir):
        out = tmp_path / "o"
        run_ok([
            "fig6", "--mnist-dir", str(mnist_dir), "--rff-features", "100",
            "--train-n", "24", "--n-rep", "3", "--neg-lambda", "-1.0",
            "--seed", "0", "--out-dir", str(out),
        ])
        arts = {r["path"] for r in read_manifest(out) if r["type"] == "artifact"}
        assert any("smin" in a for a in arts)
        curve = next(a for a in arts if "all" in a)
        with open(out / curve, newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["lambda", "mean_nmse", "std_err", "n_rep", "excluded"]


class TestCvAndFit:
    def test_cv_synthetic(self, tmp_path):
        out = tmp_path / "o"
        run_ok([
            "cv", "--p", "50", "--n", "40", "--k", "5",
            "--lambda-steps", "6", "--seed", "0", "--out-dir", str(out),
        ])
        with open(out / "cv_curve.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["lambda", "mean_nmse", "std_err", "n_rep", "excluded"]
        assert len(rows) == 7

    def test_fit_csv(self, tmp_path):
        data = tmp_path / "d.csv"
        data.write_text("a,b,y\n1,0,2\n0,1,3\n1,1,5\n2,1,7\n", encoding="utf-8")
        out = tmp_path / "o"
        run_ok([
            "fit", "--data", str(data), "--response", "y", "--lam", "0.1",
            "--out-dir", str(out),
        ])
        with open(out / "fit_coefficients.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["term", "coefficient"]
        assert rows[1][0] == "intercept"
        assert len(rows) == 4


class TestCheck:
    def test_check_ok_then_detects_tamper(self, tmp_path):
        out = tmp_path / "o"
        run_ok(FAST_FIG2 + ["--out-dir", str(out)])
        result = run_ok(["check", str(out / "manifest.jsonl")])
        assert "manifest OK" in result.output
        target = out / "fig2_p40.csv"
        target.write_text(target.read_text() + "tampered\n")
        bad = CliRunner().invoke(main, ["check", str(out / "manifest.jsonl")])
        assert bad.exit_code != 0
        assert "hash mismatch" in bad.output
