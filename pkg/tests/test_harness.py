import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from sphereflow.errors import InfeasibleConfigError
from sphereflow.harness import ExperimentConfig, eigen_gap_check, fit_rate, kernel_by_name, run_experiment
from sphereflow.kernels import taylor_profile
from sphereflow import svg

SMOKE = ExperimentConfig(
    gamma=1.5,
    n_grid=(40, 80),
    kernel="ntk2",
    trials=3,
    test_size=200,
    master_seed=7,
)


@pytest.fixture(scope="module")
def smoke_table():
    return run_experiment(SMOKE)


class TestFitRate:
    def test_exact_power_law(self):
        ns = [10, 50, 250, 1000]
        r, b = fit_rate([(n, 7.0 * n ** (-2 / 3)) for n in ns])
        assert r == pytest.approx(-2 / 3, abs=1e-12)
        assert b == pytest.approx(math.log(7.0), abs=1e-12)

    def test_two_points_interpolating_line(self):
        r, b = fit_rate([(10, 1.0), (100, 0.1)])
        assert r == pytest.approx(-1.0, abs=1e-12)

    def test_rejects_short_input(self):
        with pytest.raises(ValueError):
            fit_rate([(10, 1.0)])

    def test_rejects_nonpositive_risk(self):
        with pytest.raises(ValueError):
            fit_rate([(10, 1.0), (100, 0.0)])


class TestExperimentConfig:
    def test_round_trips_through_json(self):
        cfg = ExperimentConfig(gamma=1.5, n_grid=(100, 200), master_seed=3, trials=2)
        again = ExperimentConfig.from_json(cfg.to_json())
        assert again == cfg

    def test_validates_grid_order(self):
        with pytest.raises(ValueError):
            ExperimentConfig(gamma=1.5, n_grid=(200, 100))

    def test_validates_d_rule(self):
        with pytest.raises(ValueError):
            ExperimentConfig(gamma=1.5, n_grid=(100,), d_rule="floor")

    def test_d_rules(self):
        cfg = ExperimentConfig(gamma=1.5, n_grid=(400, 800), d_rule="ceil")
        assert cfg.d_for(400) == math.ceil(400 ** (2 / 3))
        cfg = ExperimentConfig(gamma=0.5, n_grid=(50, 100))
        assert cfg.d_for(50) == 2500

    def test_kernel_lookup(self):
        assert kernel_by_name("ntk2").kind == "NTK2"
        assert kernel_by_name("rbf").kind == "RBF_SPHERE"
        assert kernel_by_name("taylor", [1.0, 2.0]).taylor_coeffs == (1.0, 2.0)
        with pytest.raises(ValueError):
            kernel_by_name("taylor")
        with pytest.raises(ValueError):
            kernel_by_name("poly")


class TestRunExperiment:
    def test_row_grid_complete(self, smoke_table):
        keys = {(r.n, r.trial, r.C) for r in smoke_table.rows}
        expect = {
            (n, t, c)
            for n in SMOKE.n_grid
            for t in range(SMOKE.trials)
            for c in SMOKE.c_grid
        }
        assert keys == expect
        assert len(smoke_table.rows) == len(expect)

    def test_deterministic_csv(self):
        a = run_experiment(SMOKE).to_csv()
        b = run_experiment(SMOKE).to_csv()
        assert a == b

    def test_interpolation_risk_constant_across_c(self, smoke_table):
        # data is shared across the C sweep, so the t = inf risk is one number
        for n in SMOKE.n_grid:
            for t in range(SMOKE.trials):
                vals = {r.risk_interpolation for r in smoke_table.rows if r.n == n and r.trial == t}
                assert len(vals) == 1

    def test_fixed_exponent_stopping_time(self, smoke_table):
        for r in smoke_table.rows:
            assert r.t_used == pytest.approx(r.C * math.sqrt(r.n), rel=1e-12)

    def test_fit_reproducible_from_rows(self, smoke_table):
        for c in SMOKE.c_grid:
            pts = []
            for n in SMOKE.n_grid:
                risks = [r.risk_regression for r in smoke_table.rows if r.n == n and r.C == c]
                pts.append((n, float(np.mean(risks))))
            assert fit_rate(pts) == pytest.approx(smoke_table.fitted_regression[c], rel=1e-12)

    def test_summary_schema(self, smoke_table):
        s = smoke_table.summary()
        for key in ("gamma", "best_C", "r_regression", "r_interpolation", "theoretical_exponent"):
            assert key in s
        assert s["theoretical_exponent"] == 2 / 3

    def test_best_c_stability_under_more_trials(self):
        # frozen smoke reference: doubling trials keeps the same best C
        base = run_experiment(SMOKE)
        import dataclasses

        doubled = run_experiment(dataclasses.replace(SMOKE, trials=6))
        assert doubled.best_c_regression == base.best_c_regression

    def test_theory_stopping_mode(self):
        import dataclasses

        cfg = dataclasses.replace(SMOKE, stopping_mode="theory", n_grid=(40, 60), trials=2)
        table = run_experiment(cfg)
        # stopping time is C * empirical Mendelson T, so it varies by trial
        for c in cfg.c_grid:
            ts = {r.t_used for r in table.rows if r.C == c}
            assert len(ts) == cfg.trials


class TestEigenGapCheck:
    def test_taylor_all_ones_block_structure(self):
        prof = taylor_profile([1.0] * 9)
        res = eigen_gap_check(prof, 1.5, 40, 0, seeds=range(20))
        assert res.analytic_gap_ok
        assert res.pass_fraction >= 0.9
        assert res.n == round(40**1.5)
        assert res.cutoff_index == 1

    def test_deterministic_per_seed(self):
        prof = taylor_profile([1.0] * 9)
        a = eigen_gap_check(prof, 1.5, 40, 0, seeds=[3, 4])
        b = eigen_gap_check(prof, 1.5, 40, 0, seeds=[3, 4])
        assert a.per_seed == b.per_seed

    def test_infeasible_scale_rejected(self):
        prof = taylor_profile([1.0] * 9)
        with pytest.raises(InfeasibleConfigError):
            eigen_gap_check(prof, 3.0, 40, 0, seeds=[0])

    def test_block_bigger_than_n_rejected(self):
        prof = taylor_profile([1.0] * 9)
        with pytest.raises(InfeasibleConfigError):
            eigen_gap_check(prof, 1.2, 8, 3, seeds=[0])


class TestSvg:
    def test_well_formed_with_one_polyline_per_series(self):
        chart = svg.line_chart(
            {"a": ([1, 2, 3], [1.0, 0.5, 0.25]), "b": ([1, 2, 3], [2.0, 1.0, 0.5])},
            x_label="n",
            y_label="risk",
            log_x=True,
            log_y=True,
            reference=("theory", [1, 3], [1.0, 0.3]),
        )
        root = ET.fromstring(chart)
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 3
        dashed = [el for el in polylines if el.get("stroke-dasharray")]
        assert len(dashed) == 1

    def test_axis_labels_present(self):
        chart = svg.line_chart({"s": ([0, 1], [0.0, 1.0])}, x_label="gamma", y_label="exponent")
        assert "gamma" in chart and "exponent" in chart


class TestEmit:
    def test_csv_round_trip(self, smoke_table, tmp_path):
        from sphereflow.harness import emit

        path = tmp_path / "table.csv"
        emit(smoke_table, "csv", path)
        text = path.read_text()
        assert text == smoke_table.to_csv()
        rows = text.strip().splitlines()[1:]
        assert len(rows) == len(smoke_table.rows)
        # numeric cells round-trip exactly through repr
        for row, line in zip(smoke_table.rows, rows):
            assert float(line.split(",")[5]) == row.risk_regression

    def test_svg_structure(self, smoke_table, tmp_path):
        import xml.etree.ElementTree as ET

        from sphereflow.harness import emit

        path = tmp_path / "table.svg"
        emit(smoke_table, "svg", path)
        root = ET.fromstring(path.read_text())
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 3  # regression, interpolation, dashed theory line

    def test_json_summary_keys(self, smoke_table, tmp_path):
        from sphereflow.harness import emit

        path = tmp_path / "table.json"
        emit(smoke_table, "json", path)
        payload = json.loads(path.read_text())
        for key in ("gamma", "best_C", "r_regression", "r_interpolation", "theoretical_exponent"):
            assert key in payload

    def test_rate_points(self, tmp_path):
        from sphereflow.entropy_rates import rate_table
        from sphereflow.harness import emit

        pts = rate_table([0.5, 1.5, 2.5], ["inner"])
        path = tmp_path / "rates.csv"
        emit(pts, "csv", path)
        assert path.read_text().startswith("gamma,family,p,")

    def test_unknown_format(self, smoke_table, tmp_path):
        from sphereflow.harness import emit

        with pytest.raises(ValueError):
            emit(smoke_table, "yaml", tmp_path / "x")
