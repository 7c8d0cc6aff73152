import json
import logging

import pandas as pd
import pytest
from click.testing import CliRunner

from kld.main import cli
from kld.utils.report_writer import PLOT_COLUMNS


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def stream(runner, tmp_path):
    out = tmp_path / "gen"
    result = runner.invoke(cli, [
        "generate", "--chunks", "30", "--chunk-size", "50", "--drifts", "1",
        "--features", "2", "--seed", "3", "--out-dir", str(out),
    ])
    assert result.exit_code == 0, result.output
    return out / "stream.csv"


@pytest.fixture
def report(runner, stream, tmp_path):
    out = tmp_path / "detect"
    result = runner.invoke(cli, ["detect", "-i", str(stream), "--out-dir", str(out)])
    assert result.exit_code == 0, result.output
    return out / "report.json"


def test_help(runner):
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("generate", "detect", "evaluate", "sweep"):
        assert command in result.output


def test_module_entry_point():
    import kld.__main__ as entry
    from kld.main import main

    assert entry.main is main


class TestGenerate:
    def test_header_and_manifest(self, stream):
        assert stream.read_text().splitlines()[0] == "# p=2 L=2 K=50 drifts=15 n=30 rng=PCG64"
        assert len(stream.read_text().splitlines()) == 1 + 30 * 50

        manifest = json.loads((stream.parent / "manifest.json").read_text())
        assert manifest["command"] == "generate"
        assert manifest["seeds"] == [3]
        assert "stream.csv" in manifest["outputs"]

    def test_same_seed_same_bytes(self, runner, stream, tmp_path):
        result = runner.invoke(cli, [
            "generate", "--chunks", "30", "--chunk-size", "50", "--drifts", "1",
            "--features", "2", "--seed", "3", "--out-dir", str(tmp_path / "again"),
        ])
        assert result.exit_code == 0
        assert (tmp_path / "again" / "stream.csv").read_bytes() == stream.read_bytes()

    def test_invalid_parameter(self, runner, tmp_path):
        result = runner.invoke(cli, ["generate", "--flip", "1.5", "--out-dir", str(tmp_path)])
        assert result.exit_code == 1


class TestDetect:
    def test_outputs(self, report):
        out = report.parent
        for name in ("report.json", "series.csv", "distances.csv", "manifest.json"):
            assert (out / name).is_file()
        data = json.loads(report.read_text())
        assert data["mode"] == "online"
        assert len(data["series"]) == 29

    def test_plot_data(self, runner, stream, tmp_path):
        out = tmp_path / "plot"
        result = runner.invoke(cli, ["detect", "-i", str(stream), "--emit-plot-data", "--out-dir", str(out)])
        assert result.exit_code == 0
        assert list(pd.read_csv(out / "plot_data.csv").columns) == PLOT_COLUMNS

    def test_lowess_needs_batch_mode(self, runner, stream, tmp_path):
        args = ["detect", "-i", str(stream), "--smoother", "lowess:0.2:1", "--out-dir", str(tmp_path)]
        assert runner.invoke(cli, args).exit_code == 1
        assert runner.invoke(cli, args + ["--mode", "batch"]).exit_code == 0

    def test_malformed_stream(self, runner, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# p=2 L=2 K=2 drifts=\n0.1,0.2,0\n0.1,oops,1\n")
        result = runner.invoke(cli, ["detect", "-i", str(path), "--out-dir", str(tmp_path)])
        assert result.exit_code == 2
        assert "record 2" in result.output

    def test_missing_stream(self, runner, tmp_path):
        result = runner.invoke(cli, ["detect", "-i", str(tmp_path / "absent.csv"), "--out-dir", str(tmp_path)])
        assert result.exit_code == 2

    def test_rerun_from_manifest(self, runner, report, tmp_path):
        out = tmp_path / "rerun"
        result = runner.invoke(cli, [
            "detect", "--from-manifest", str(report.parent / "manifest.json"), "--out-dir", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert (out / "report.json").read_bytes() == report.read_bytes()

    def test_unknown_config_key(self, runner, stream, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"detect": {"beta": 1.0}}))
        result = runner.invoke(cli, ["detect", "-i", str(stream), "--config", str(config)])
        assert result.exit_code == 1
        assert "beta" in result.output

    def test_config_file_sets_alpha(self, runner, stream, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"detect": {"alpha": 2.5, "warmup": 5}}))
        out = tmp_path / "configured"
        result = runner.invoke(cli, ["detect", "-i", str(stream), "--config", str(config), "--out-dir", str(out)])
        assert result.exit_code == 0
        data = json.loads((out / "report.json").read_text())
        assert (data["config"]["alpha"], data["config"]["warmup"]) == (2.5, 5)


class TestEvaluate:
    def test_needs_ground_truth(self, runner, report, tmp_path):
        result = runner.invoke(cli, ["evaluate", "--report", str(report), "--out-dir", str(tmp_path)])
        assert result.exit_code == 1
        assert "--truth" in result.output

    def test_metrics_with_baseline(self, runner, report, stream, tmp_path):
        out = tmp_path / "eval"
        result = runner.invoke(cli, [
            "evaluate", "--report", str(report), "--stream", str(stream),
            "--baseline", "cusum:0.1,2.0", "--baseline-warmup", "5", "--out-dir", str(out),
        ])
        assert result.exit_code == 0, result.output

        metrics = pd.read_csv(out / "metrics.csv")
        assert metrics["detector"].tolist() == ["kld", "cusum:0.1,2.0"]
        assert (metrics["tp"] + metrics["fn"]).tolist() == [1, 1]

        data = json.loads((out / "metrics.json").read_text())
        assert data["truth"] == [15]
        assert data["tolerance"] == 30

    def test_explicit_truth(self, runner, report, tmp_path):
        result = runner.invoke(cli, [
            "evaluate", "--report", str(report), "--truth", "10,20", "--tolerance", "0", "--out-dir", str(tmp_path),
        ])
        assert result.exit_code == 0
        assert json.loads((tmp_path / "metrics.json").read_text())["truth"] == [10, 20]


class TestSweep:
    def test_alpha_grid(self, runner, stream, tmp_path):
        out = tmp_path / "sweep"
        result = runner.invoke(cli, ["sweep", "-i", str(stream), "--alphas", "1.0:3.0:0.25", "--out-dir", str(out)])
        assert result.exit_code == 0, result.output

        table = pd.read_csv(out / "sweep.csv")
        assert len(table) == 9
        assert table["alpha"].tolist()[-1] == 3.0
        data = json.loads((out / "sweep.json").read_text())
        assert data["truth"] == [15]
        assert "alpha" not in data["config"]

    def test_bad_alpha_list(self, runner, stream, tmp_path):
        result = runner.invoke(cli, ["sweep", "-i", str(stream), "--alphas", "1.0:x:0.5", "--out-dir", str(tmp_path)])
        assert result.exit_code == 1
