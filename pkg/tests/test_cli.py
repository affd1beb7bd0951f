import json

import numpy as np
import pytest
from click.testing import CliRunner

from dcclab import DccParams, DgpSpec, GarchParams, dcc_loglik, load_return_csv
from dcclab.cli import main
from dcclab.panels import panel_to_csv
from dcclab.simulate import spec_to_dict

from conftest import make_qbar


@pytest.fixture(scope="module")
def panel_csv(tmp_path_factory, small_panel):
    path = tmp_path_factory.mktemp("cli") / "panel.csv"
    path.write_text(
        panel_to_csv(small_panel.dates, small_panel.assets, small_panel.returns),
        encoding="utf-8",
    )
    return str(path)


@pytest.fixture()
def runner():
    return CliRunner()


def read(path):
    with open(path, encoding="utf-8") as handle:
        return handle.read()


class TestDescribe:
    def test_table_layout(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "stats.csv")
        result = runner.invoke(main, ["describe", "--input", panel_csv, "--output", out])
        assert result.exit_code == 0, result.output
        lines = read(out).strip().splitlines()
        assert lines[0] == ",asset_1,asset_2,asset_3,asset_4"
        labels = [line.split(",")[0] for line in lines[1:]]
        assert labels == ["Observations", "Mean", "Median", "Std. Dev.", "Min", "Max",
                          "Skewness", "Kurtosis", "Jarque Bera", "Probability"]
        assert lines[1].split(",")[1] == "600"

    def test_tsv_delimiter(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "stats.tsv")
        result = runner.invoke(
            main, ["describe", "--input", panel_csv, "--output", out, "--delimiter", "tsv"]
        )
        assert result.exit_code == 0
        assert "\t" in read(out).splitlines()[0]

    def test_manifest_written(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "stats.csv")
        result = runner.invoke(main, ["describe", "--input", panel_csv, "--output", out])
        assert result.exit_code == 0
        manifest = json.loads(read(out + ".manifest.json"))
        assert manifest["command"] == "describe"
        assert panel_csv in manifest["inputs"]
        assert "sha256" in manifest["inputs"][panel_csv]
        assert out in manifest["outputs"]

    def test_from_prices(self, runner, tmp_path):
        prices = tmp_path / "prices.csv"
        prices.write_text(
            "date,X\n2018-01-01,100\n2018-01-02,200\n2018-01-03,100\n"
            "2018-01-04,200\n2018-01-05,100\n2018-01-06,200\n",
            encoding="utf-8",
        )
        out = str(tmp_path / "stats.csv")
        result = runner.invoke(
            main, ["describe", "--input", str(prices), "--from-prices", "--output", out]
        )
        assert result.exit_code == 0
        rows = {line.split(",")[0]: line.split(",")[1] for line in read(out).splitlines()[1:]}
        assert rows["Max"] == f"{100 * np.log(2):.4f}"


class TestNonConvergence:
    def test_exhausted_optimizer_exits_3(self, runner, panel_csv, tmp_path):
        result = runner.invoke(main, [
            "fit-dcc", "--input", panel_csv, "--max-iter", "3",
            "--output", str(tmp_path / "dcc.json"),
        ])
        assert result.exit_code == 3
        assert "FitError" in result.stderr

    def test_boundary_optimum_writes_outputs_and_exits_3(self, runner, panel_csv, tmp_path, monkeypatch):
        # force the correlation stage to report a near-boundary optimum: the
        # document must still be written, flagged converged=false, exit 3
        import math

        from dcclab.optimize import OptimResult

        logit = lambda p: math.log(p / (1.0 - p))
        point = np.array([logit(0.95)] + [logit(0.9995)] * 4)

        def fake_nelder_mead(objective, start, **kwargs):
            return OptimResult(point=point, value=float(objective(point)),
                               iterations=1, converged=True, termination="tolerance")

        monkeypatch.setattr("dcclab.dcc.nelder_mead", fake_nelder_mead)
        out = str(tmp_path / "dcc.json")
        result = runner.invoke(main, ["fit-dcc", "--input", panel_csv, "--output", out])
        assert result.exit_code == 3
        doc = json.loads(read(out))
        assert doc["converged"] is False


class TestErrors:
    def test_missing_file_exits_2(self, runner, tmp_path):
        result = runner.invoke(
            main, ["describe", "--input", str(tmp_path / "nope.csv"), "--output", "o.csv"]
        )
        assert result.exit_code == 2
        assert "error kind=" in result.stderr

    def test_bad_header_exits_1(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("day,X\n2018-01-01,1\n", encoding="utf-8")
        result = runner.invoke(
            main, ["describe", "--input", str(bad), "--output", str(tmp_path / "o.csv")]
        )
        assert result.exit_code == 1
        assert "FormatError" in result.stderr

    def test_bad_pair_exits_1(self, runner, panel_csv, tmp_path):
        result = runner.invoke(main, [
            "correlations", "--input", panel_csv, "--pairs", "asset_1:nope",
            "--output", str(tmp_path / "c.csv"),
        ])
        assert result.exit_code == 1


class TestFitGarch:
    def test_json_per_asset(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "garch.json")
        var_out = str(tmp_path / "variance.csv")
        result = runner.invoke(main, [
            "fit-garch", "--input", panel_csv, "--output", out,
            "--variance-output", var_out,
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(read(out))
        assert set(doc) == {"asset_1", "asset_2", "asset_3", "asset_4"}
        for entry in doc.values():
            assert set(entry) == {"omega", "a", "b", "loglik", "converged", "iterations"}
            assert entry["converged"] is True
        variances = load_return_csv(var_out)
        assert variances.shape == (600, 4)
        assert np.all(variances.returns > 0.0)


class TestFitDcc:
    def test_generalized_fit_document(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "dcc.json")
        result = runner.invoke(main, [
            "fit-dcc", "--input", panel_csv, "--mode", "generalized", "--output", out,
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(read(out))
        assert doc["mode"] == "generalized"
        assert len(doc["alphas"]) == 4
        assert isinstance(doc["beta"], float)
        assert doc["converged"] is True
        assert len(doc["implied_news"]) == 4
        assert doc["intercept_min_eigenvalue"] >= -1e-10
        news = np.asarray(doc["implied_news"])
        alphas = np.asarray(doc["alphas"])
        np.testing.assert_allclose(news, np.outer(alphas, alphas), atol=1e-4)

    def test_scalar_mode_consistent_with_generalized_loglik(self, runner, panel_csv, tmp_path, small_panel):
        out = str(tmp_path / "scalar.json")
        result = runner.invoke(main, [
            "fit-dcc", "--input", panel_csv, "--mode", "scalar",
            "--output", out, "--precision", "full",
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(read(out))
        alphas = doc["alphas"]
        assert len(set(alphas)) == 1  # tied loadings
        # the reported loglik must equal the generalized-mode likelihood
        # evaluated at the tied parameter vector
        from dcclab import GarchStandardizer, correlation_targeting

        eps = GarchStandardizer().fit_transform(small_panel.returns)
        params = DccParams(
            alphas=np.asarray(alphas), beta=doc["beta"], q_bar=correlation_targeting(eps)
        )
        assert dcc_loglik(eps, params) == pytest.approx(doc["loglik"], abs=1e-8)


class TestCorrelations:
    def test_all_pairs_long_format(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "corr.csv")
        result = runner.invoke(main, [
            "correlations", "--input", panel_csv, "--pairs", "all", "--output", out,
        ])
        assert result.exit_code == 0, result.output
        lines = read(out).strip().splitlines()
        assert lines[0] == "date,asset_i,asset_j,rho"
        assert len(lines) == 1 + 6 * 600  # N=4 -> 6 pair groups
        pairs = {tuple(line.split(",")[1:3]) for line in lines[1:]}
        assert len(pairs) == 6
        rhos = np.array([float(line.split(",")[3]) for line in lines[1:]])
        assert np.all(np.abs(rhos) <= 1.0)

    def test_selected_pairs(self, runner, panel_csv, tmp_path):
        out = str(tmp_path / "corr.csv")
        result = runner.invoke(main, [
            "correlations", "--input", panel_csv,
            "--pairs", "asset_1:asset_2,asset_3:asset_4", "--output", out,
        ])
        assert result.exit_code == 0
        pairs = {tuple(line.split(",")[1:3]) for line in read(out).strip().splitlines()[1:]}
        assert pairs == {("asset_1", "asset_2"), ("asset_3", "asset_4")}


class TestSimulate:
    def make_spec_file(self, tmp_path, seed=11, n_obs=150):
        spec = DgpSpec(
            garch_params=[GarchParams(omega=0.1, a=0.1, b=0.8)] * 2,
            dcc_params=DccParams(alphas=[0.2, 0.3], beta=0.7, q_bar=make_qbar(2, 0.4)),
            n_obs=n_obs,
            seed=seed,
        )
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec_to_dict(spec)), encoding="utf-8")
        return str(path)

    def test_simulate_writes_panel_and_metadata(self, runner, tmp_path):
        spec_path = self.make_spec_file(tmp_path)
        out = str(tmp_path / "sim.csv")
        result = runner.invoke(main, ["simulate", "--spec", spec_path, "--output", out])
        assert result.exit_code == 0, result.output
        panel = load_return_csv(out)
        assert panel.shape == (150, 2)
        metadata = json.loads(read(out + ".metadata.json"))
        assert metadata["seed"] == 11
        assert metadata["generator"] == "numpy.random.Generator(PCG64)"
        assert metadata["burn_in"] == 500

    def test_burn_in_override(self, runner, tmp_path):
        spec_path = self.make_spec_file(tmp_path)
        out = str(tmp_path / "sim.csv")
        result = runner.invoke(main, [
            "simulate", "--spec", spec_path, "--output", out, "--burn-in", "0",
        ])
        assert result.exit_code == 0
        assert json.loads(read(out + ".metadata.json"))["burn_in"] == 0


class TestDeterminism:
    def test_repeat_runs_are_byte_identical(self, runner, panel_csv, tmp_path):
        texts = []
        for k in (1, 2):
            out = str(tmp_path / f"stats{k}.csv")
            assert runner.invoke(
                main, ["describe", "--input", panel_csv, "--output", out]
            ).exit_code == 0
            texts.append(read(out))
        assert texts[0] == texts[1]

    def test_simulate_determinism(self, runner, tmp_path):
        spec_path = TestSimulate().make_spec_file(tmp_path, seed=21)
        texts = []
        for k in (1, 2):
            out = str(tmp_path / f"sim{k}.csv")
            assert runner.invoke(
                main, ["simulate", "--spec", spec_path, "--output", out]
            ).exit_code == 0
            texts.append(read(out))
        assert texts[0] == texts[1]


class TestAlignTo:
    def test_align_flag_reduces_calendar(self, runner, tmp_path, small_panel):
        left = tmp_path / "daily.csv"
        left.write_text(
            panel_to_csv(small_panel.dates, ["c1", "c2", "c3", "c4"], small_panel.returns),
            encoding="utf-8",
        )
        weekdays = [d for d in small_panel.dates if d.weekday() < 5]
        rng = np.random.default_rng(5)
        right = tmp_path / "weekday.csv"
        right.write_text(
            panel_to_csv(weekdays, ["T"], rng.normal(0, 1, (len(weekdays), 1))),
            encoding="utf-8",
        )
        out = str(tmp_path / "stats.csv")
        result = runner.invoke(main, [
            "describe", "--input", str(left), "--align-to", str(right), "--output", out,
        ])
        assert result.exit_code == 0, result.output
        lines = read(out).splitlines()
        assert lines[0] == ",c1,c2,c3,c4,T"
        assert lines[1].split(",")[1] == str(len(weekdays))
