"""Registry, experiment configs, reports and CSV artifacts."""

import json
import math

import pandas as pd
import pytest
import yaml

from jsrlab.errors import ConfigError, DomainError, NumericError
from jsrlab.schemas import ExperimentConfig, MatrixSet, MethodType
from jsrlab.tools import harness
from jsrlab.tools.registry import get_entry, reference_constants, resolve_benchmark
from jsrlab.tools.report_templates import ReportTemplateManager


def _write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestRegistry:
    def test_named_benchmarks(self):
        assert resolve_benchmark("sigma2").n == 2
        assert resolve_benchmark("sigma8").M == 8
        family = resolve_benchmark("family:4")
        assert (family.n, family.M) == (4, 4)

    def test_family_eight_is_sigma8(self):
        assert resolve_benchmark("family:8") == resolve_benchmark("sigma8")
        assert reference_constants("family:8") == reference_constants("sigma8")

    def test_inline_set_passes_through(self):
        inline = MatrixSet(n=1, matrices=[[[0.5]], [[2.0]]])
        assert resolve_benchmark(inline) is inline
        assert reference_constants(inline) is None

    @pytest.mark.parametrize("name", ["sigma3", "family:x", "family:1", ""])
    def test_unknown_names(self, name):
        with pytest.raises(ConfigError) as excinfo:
            resolve_benchmark(name)
        if name in ("sigma3", ""):
            assert "sigma2" in str(excinfo.value)

    def test_reference_values(self):
        sigma2 = reference_constants("sigma2")
        assert (sigma2.jsr, sigma2.rho_Q, sigma2.rho_SOS4) == (8.6881, 9.5868, 8.7203)
        sigma8 = reference_constants("sigma8")
        assert (sigma8.jsr, sigma8.rho_Q, sigma8.rho_SOS4) == (1.0, 2.4286, 1.0006)
        assert reference_constants("family:3") is None

    @pytest.mark.parametrize("name", ["sigma2", "sigma8"])
    def test_descriptions_match_dimensions(self, name):
        n = resolve_benchmark(name).n
        assert f"{n}x{n}" in get_entry(name).description

    def test_published_table_rows(self):
        rows = {(row.k, row.m): row for row in get_entry("sigma2").table1}
        assert len(rows) == 6
        assert (rows[(1, 10)].best, rows[(1, 10)].mean, rows[(1, 10)].std) == (8.6910, 8.6969, 0.0056)
        assert rows[(3, 5)].best == 8.6967


class TestConfigLoading:
    def test_json(self, tmp_path):
        path = _write_json(tmp_path / "exp.json", {"benchmark": "sigma2", "method": "ellipsoid"})
        config = harness.load_experiment_config(path)
        assert config.method == MethodType.ELLIPSOID

    def test_yaml(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text(yaml.safe_dump({"benchmark": "sigma8", "method": "lower", "params": {"max_len": 2}}))
        assert harness.load_experiment_config(path).params == {"max_len": 2}

    def test_inline_benchmark(self, tmp_path):
        data = {"benchmark": {"n": 1, "matrices": [[[0.5]]]}, "method": "lower", "params": {"max_len": 2}}
        config = harness.load_experiment_config(_write_json(tmp_path / "exp.json", data))
        assert isinstance(config.benchmark, MatrixSet)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            harness.load_experiment_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            harness.load_experiment_config(tmp_path / "absent.json")

    def test_unknown_method_lists_options(self, tmp_path):
        path = _write_json(tmp_path / "exp.json", {"benchmark": "sigma2", "method": "sdp"})
        with pytest.raises(ConfigError) as excinfo:
            harness.load_experiment_config(path)
        assert "ellipsoid" in str(excinfo.value)

    def test_unknown_benchmark(self, tmp_path):
        path = _write_json(tmp_path / "exp.json", {"benchmark": "sigma5", "method": "lower"})
        with pytest.raises(ConfigError):
            harness.load_experiment_config(path)

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError) as excinfo:
            harness.parse_experiment_config({"benchmark": "sigma2", "method": "lower", "params": {"depth": 3}})
        assert "max_len" in str(excinfo.value)

    def test_train_config_incremental_flag(self):
        config = harness.build_train_config({"n_samples": 100, "epochs": 50, "incremental": True})
        assert config.initial_samples == 20
        assert len(config.incremental) == 4


class TestRunExperiment:
    def test_lower_bound_report(self, tmp_path):
        config = ExperimentConfig(benchmark="sigma8", method="lower", params={"max_len": 2})
        path = harness.run_experiment(config, tmp_path / "lower.json")
        report = json.loads(path.read_text())
        assert report["computed"][0]["kind"] == "lower"
        assert report["computed"][0]["value"] <= 1.0 + 1e-9
        assert report["reference"]["source"] == "reference"
        assert report["reference"]["jsr"] == 1.0
        summary = path.with_suffix(".md").read_text()
        assert "Reference (external, not computed)" in summary
        assert "sigma8" in summary

    def test_ellipsoid_side_by_side(self, tmp_path):
        config = ExperimentConfig(
            benchmark="sigma2", method="ellipsoid", params={"restarts": 2, "iters": 300}
        )
        report = json.loads(harness.run_experiment(config, tmp_path / "ell.json").read_text())
        computed = report["computed"][0]
        assert computed["kind"] == "certified-upper"
        assert computed["value"] >= 8.6881
        assert report["reference"]["rho_Q"] == 9.5868
        assert len(report["extras"]["ellipsoidal_norm"]) == 2

    def test_reference_values_stay_out_of_computed(self, tmp_path):
        config = ExperimentConfig(benchmark="sigma2", method="lower", params={"max_len": 4})
        report = json.loads(harness.run_experiment(config, tmp_path / "r.json").read_text())
        references = {8.6881, 9.5868, 8.7203}
        assert all(bound["value"] not in references for bound in report["computed"])

    def test_default_output_path(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        config = ExperimentConfig(benchmark="family:3", method="lower", params={"max_len": 2})
        path = harness.run_experiment(config)
        assert path == tmp_path.joinpath("results", "family-3_lower.json").relative_to(tmp_path)
        assert json.loads(path.read_text())["reference"] is None

    def test_neural_report_is_deterministic(self, tmp_path):
        params = {"width": 3, "n_samples": 15, "n_seeds": 2, "epochs": 10}
        config = ExperimentConfig(benchmark="sigma2", method="neural", params=params, seed_base=5)
        first = json.loads(harness.run_experiment(config, tmp_path / "a.json").read_text())
        second = json.loads(harness.run_experiment(config, tmp_path / "b.json").read_text())
        assert first["computed"][0]["kind"] == "empirical"
        assert first["computed"][0]["value"] == second["computed"][0]["value"]
        assert [seed["seed"] for seed in first["extras"]["seeds"]] == [5, 6]

    def test_neural_report_layout(self, tmp_path):
        params = {"width": 3, "n_samples": 15, "n_seeds": 3, "epochs": 10}
        config = ExperimentConfig(benchmark="sigma2", method="neural", params=params)
        report = json.loads(harness.run_experiment(config, tmp_path / "n.json").read_text())
        seeds = report["extras"]["seeds"]
        for record in seeds:
            assert {"seed", "best_loss", "trace"} <= set(record)
            assert record["trace"] and all(len(pair) == 2 for pair in record["trace"])
            assert min(loss for _, loss in record["trace"]) == record["best_loss"]
        aggregate = report["extras"]["aggregate"]
        assert aggregate["best"] == report["computed"][0]["value"]
        assert aggregate["best"] == min(record["best_loss"] for record in seeds)
        assert aggregate["mean"] == pytest.approx(sum(record["best_loss"] for record in seeds) / 3)
        assert aggregate["std"] >= 0

    def test_certify_given_network(self, tmp_path, l1_network):
        from jsrlab.tools.neural import sample_sphere

        network = tmp_path / "net.json"
        network.write_text(l1_network.model_dump_json())
        samples = tmp_path / "samples.json"
        samples.write_text(sample_sphere(2, 20, seed=0).model_dump_json())
        config = ExperimentConfig(
            benchmark="sigma2",
            method="certify",
            params={"network": str(network), "samples": str(samples)},
        )
        report = json.loads(harness.run_experiment(config, tmp_path / "cert.json").read_text())
        kinds = [bound["kind"] for bound in report["computed"]]
        assert kinds == ["empirical", "certified-upper"]
        assert report["computed"][1]["value"] >= 8.6881
        assert report["extras"]["polytope"]["vertex_count"] == 40

    def test_theory_report(self, tmp_path):
        config = ExperimentConfig(
            benchmark="sigma2", method="theory", params={"d": 2, "upper": {"quad": 9.5868}}
        )
        report = json.loads(harness.run_experiment(config, tmp_path / "theory.json").read_text())
        theory = report["extras"]["theory"]
        assert theory["tau_quad"] == pytest.approx(math.sqrt(2))
        assert theory["tau_sos"] == 3
        assert theory["structure"]["depth"] == 3
        low, high = theory["guarantees"]["ellipsoid"]
        assert (low, high) == (pytest.approx(9.5868 / math.sqrt(2)), 9.5868)
        assert report["computed"] == []
        assert "sos_degree_4" in report["reference"]["guarantees"]


class TestTable1:
    def test_requires_two_seeds(self):
        with pytest.raises(DomainError):
            harness.table1_repro(1, 10)

    def test_layout(self, tmp_path):
        out = tmp_path / "table1.csv"
        frame = harness.table1_repro(2, 10, out, epochs=5)
        assert list(frame.columns) == harness.TABLE1_COLUMNS
        assert list(zip(frame["k"], frame["m"])) == harness.TABLE1_ARCHITECTURES
        assert (frame["std"] >= 0).all()
        assert (frame["best"] <= frame["mean"]).all()
        assert (frame["status"] == "ok").all()
        row = frame[(frame["k"] == 1) & (frame["m"] == 10)].iloc[0]
        assert (row["ref_best"], row["ref_mean"], row["ref_std"]) == (8.6910, 8.6969, 0.0056)
        assert list(pd.read_csv(out).columns) == harness.TABLE1_COLUMNS

    def test_failed_seeds_are_marked(self, monkeypatch):
        original = harness._train_job

        def flaky(matrix_set, config, seed):
            if seed == 1:
                raise NumericError("diverged")
            return original(matrix_set, config, seed)

        monkeypatch.setattr(harness, "_train_job", flaky)
        frame = harness.table1_repro(2, 10, epochs=3)
        assert (frame["status"] == "partial (1/2 failed)").all()
        assert frame["std"].isna().all()
        assert frame["best"].notna().all()


class TestConvergenceTrace:
    def test_empty_seed_list_writes_headers(self, tmp_path, sigma2):
        out = tmp_path / "trace.csv"
        traces, bands = harness.convergence_trace(sigma2, harness.build_train_config({}), [], out)
        assert traces.empty and bands.empty
        assert out.read_text().strip() == ",".join(harness.TRACE_COLUMNS)
        assert harness.bands_path(out).read_text().strip() == ",".join(harness.BAND_COLUMNS)

    def test_running_minimum_and_bands(self, tmp_path, sigma2):
        config = harness.build_train_config({"width": 3, "n_samples": 15, "epochs": 30})
        traces, bands = harness.convergence_trace(sigma2, config, [0, 1], tmp_path / "t.csv", buckets=10)
        for _, group in traces.groupby("seed"):
            best = group["best_so_far"].to_numpy()
            assert (best[1:] <= best[:-1]).all()
        assert set(traces["seed"]) == {0, 1}
        assert (bands["min"] <= bands["mean"] + 1e-12).all()
        assert (bands["mean"] <= bands["max"] + 1e-12).all()
        assert (tmp_path / "t_bands.csv").exists()

    def test_running_best_restarts_when_samples_grow(self, sigma2):
        from jsrlab.tools.neural import train

        config = harness.build_train_config({"width": 3, "n_samples": 50, "epochs": 30, "incremental": True})
        traces, _ = harness.convergence_trace(sigma2, config, [0])
        assert traces["sample_count"].nunique() == 5
        assert traces["best_so_far"].iloc[-1] == train(config, sigma2, 0).best_loss
        for _, segment in traces.groupby("sample_count"):
            best = segment["best_so_far"].to_numpy()
            assert (best[1:] <= best[:-1]).all()
        enlarged = traces[traces["event"] != ""]
        assert len(enlarged) == 4
        assert (enlarged["best_so_far"] == enlarged["loss"]).all()


class TestCsvOutput:
    def test_full_precision(self, tmp_path):
        path = harness.write_csv(pd.DataFrame({"value": [1.0 / 3.0]}), tmp_path / "x.csv")
        assert "0.33333333333333331" in path.read_text()

    def test_fig1_table(self, tmp_path):
        out = tmp_path / "fig1.csv"
        frame = harness.fig1_table(3, 10, out)
        assert list(frame.columns) == harness.FIG1_COLUMNS
        assert out.read_text().startswith("#")
        reread = pd.read_csv(out, comment="#")
        assert list(reread["n"]) == list(range(2, 11))


class TestReportTemplates:
    def test_packaged_template(self):
        manager = ReportTemplateManager()
        assert "report.summary.v1" in manager.list_templates()
        metadata = manager.load_template("report.summary.v1").metadata
        assert metadata.version == "1.0.0"

    def test_environment_override(self, tmp_path, monkeypatch):
        (tmp_path / "report").mkdir()
        (tmp_path / "report" / "summary.yaml").write_text(
            yaml.safe_dump(
                {
                    "metadata": {"template_id": "report.summary.v1", "version": "9.0.0"},
                    "template": "custom {{ benchmark.name }}",
                }
            )
        )
        monkeypatch.setenv("JSRLAB_TEMPLATES_DIR", str(tmp_path))
        manager = ReportTemplateManager()
        assert manager.render("report.summary.v1", {"benchmark": {"name": "sigma2"}}) == "custom sigma2\n"

    def test_id_mismatch(self, tmp_path):
        (tmp_path / "report").mkdir()
        (tmp_path / "report" / "summary.yaml").write_text(
            yaml.safe_dump({"metadata": {"template_id": "report.other.v1", "version": "1"}, "template": "x"})
        )
        with pytest.raises(ConfigError):
            ReportTemplateManager(tmp_path).load_template("report.summary.v1")

    def test_invalid_id(self):
        with pytest.raises(ConfigError):
            ReportTemplateManager().load_template("summary")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            ReportTemplateManager(tmp_path / "absent")
