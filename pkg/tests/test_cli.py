import json
import math

import pytest

from mimo_gt import analysis
from mimo_gt.cli import main


@pytest.fixture()
def light_config(tmp_path):
    path = tmp_path / "light.cfg"
    path.write_text(
        "n_users=4\nmsgs_per_user=2\nk_active=1\npower=1.0\nnoise=0.1\nseed=11\n"
    )
    return str(path)


def read_csv(path):
    meta, header, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[2:].partition("=")
                meta[key] = value
            elif header is None:
                header = line.split(",")
            else:
                rows.append(dict(zip(header, line.split(","))))
    return meta, header, rows


class TestAnalyze:
    def test_prints_crossover_rows(self, capsys):
        assert main(["analyze"]) == 0
        out = capsys.readouterr().out
        assert "q01" in out and "beta_star" in out

    def test_json_output(self, capsys):
        assert main(["analyze", "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["operating_point"]["q01"] == pytest.approx(math.exp(-1.0))

    def test_csv_output(self, tmp_path, capsys):
        out = tmp_path / "a.csv"
        assert main(["analyze", "--output", str(out)]) == 0
        meta, header, rows = read_csv(out)
        assert meta["command"] == "analyze"
        assert meta["seed"] == "0"
        assert header == ["quantity", "value"]
        values = {r["quantity"]: r["value"] for r in rows}
        q01 = values["operating_point.q01"]
        assert q01 == f"{float(q01):.12g}"

    def test_snr_db_sets_rho(self, tmp_path):
        out = tmp_path / "a.csv"
        assert main(["analyze", "--snr-db", "10", "--output", str(out)]) == 0
        meta, _, _ = read_csv(out)
        assert float(meta["rho"]) == pytest.approx(10.0, rel=1e-12)

    def test_missing_config_is_usage_error(self, capsys):
        assert main(["analyze", "--config", "/nonexistent/path.cfg"]) == 2
        assert "error" in capsys.readouterr().err


class TestOptimize:
    def test_single_user_unit_snr(self, capsys):
        assert main(["optimize", "--snr-db", "0"]) == 0
        out = capsys.readouterr().out
        row = next(line for line in out.splitlines() if "gamma_star" in line)
        # K defaults to 2; override via config for the K=1 closed form
        assert "gamma_star" in row

    def test_json_closed_form(self, tmp_path, capsys):
        cfg = tmp_path / "k1.cfg"
        cfg.write_text("k_active=1\npower=1.0\nnoise=1.0\n")
        assert main(["optimize", "--config", str(cfg), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["gamma_star"] == pytest.approx(2.0 * math.log(2.0), abs=1e-8)
        assert payload["m_r_required"] >= 1
        assert abs(payload["residual_fprime"]) <= 1e-12

    def test_reports_theorem_antenna_count(self, capsys, desk_optimum):
        assert main(["optimize", "--snr-db", "10"]) == 0
        out = capsys.readouterr().out
        assert str(analysis.required_antennas(16, 2, 2, 0.5, desk_optimum.beta_star)) in out


class TestSimulate:
    def test_pass_verdict_and_csv(self, light_config, tmp_path, capsys):
        out = tmp_path / "sim.csv"
        code = main(["simulate", "--config", light_config, "--trials", "150",
                     "--output", str(out)])
        assert code == 0
        assert "PASS" in capsys.readouterr().out
        meta, header, rows = read_csv(out)
        assert rows[0]["verdict"] == "PASS"
        assert float(rows[0]["target_error"]) == pytest.approx(8 ** -0.5)

    def test_zero_trials_is_usage_error(self, light_config, capsys):
        assert main(["simulate", "--config", light_config, "--trials", "0"]) == 2

    def test_dump_written(self, light_config, tmp_path):
        dump = tmp_path / "rounds.txt"
        main(["simulate", "--config", light_config, "--trials", "20",
              "--dump", str(dump)])
        assert len(dump.read_text().strip().splitlines()) == 20

    def test_json(self, light_config, capsys):
        main(["simulate", "--config", light_config, "--trials", "50", "--json"])
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) >= {"m_r", "pmd", "pfa", "verdict", "target_error"}


class TestSweep:
    def test_rho_sweep_beta_trend(self, tmp_path):
        out = tmp_path / "rho.csv"
        assert main(["sweep", "--axis", "rho", "--grid", "0.01,0.1,1,10,100,1000",
                     "--output", str(out)]) == 0
        _, _, rows = read_csv(out)
        beta = [float(r["beta_star"]) for r in rows]
        assert all(b < a for a, b in zip(beta, beta[1:]))
        assert beta[-1] / beta[0] < 0.01
        assert abs(beta[-1] - beta[-2]) / beta[-2] < 0.25  # flattening toward the plateau

    def test_population_sweep_round_robin_ratio(self, tmp_path):
        out = tmp_path / "n.csv"
        assert main(["sweep", "--axis", "n", "--grid", "8,32,128,512",
                     "--output", str(out)]) == 0
        _, _, rows = read_csv(out)
        ratio = [float(r["ratio_round_robin"]) for r in rows]
        assert all(b < a for a, b in zip(ratio, ratio[1:]))

    def test_coupled_k_sweep_meets_error_target(self, tmp_path):
        out = tmp_path / "k.csv"
        assert main(["sweep", "--axis", "k", "--grid", "2,3,4,5",
                     "--epsilon", "0.5", "--output", str(out)]) == 0
        _, _, rows = read_csv(out)
        for row in rows:
            assert int(round(float(row["value"]))) ** 2 <= int(float(row["m_r_required"])) ** 2
            assert float(row["max_bound_opt"]) <= float(row["target_error"]) + 1e-12

    def test_series_files(self, tmp_path):
        series = tmp_path / "series"
        assert main(["sweep", "--axis", "rho", "--grid", "1,10",
                     "--output", str(tmp_path / "s.csv"),
                     "--series-dir", str(series)]) == 0
        two_col = series / "rho_vs_beta_star.csv"
        _, header, rows = read_csv(two_col)
        assert header == ["rho", "beta_star"]
        assert len(rows) == 2
        assert float(rows[0]["beta_star"]) > float(rows[1]["beta_star"])

    def test_rejects_non_increasing_grid(self, capsys):
        assert main(["sweep", "--axis", "rho", "--grid", "1,1,2"]) == 2

    def test_rejects_unknown_axis(self):
        with pytest.raises(SystemExit) as err:
            main(["sweep", "--axis", "bogus", "--grid", "1,2"])
        assert err.value.code == 2


class TestVerify:
    def test_single_check(self, capsys):
        assert main(["verify", "--only", "equalizer"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("PASS equalizer")

    def test_unknown_check_is_usage_error(self, capsys):
        assert main(["verify", "--only", "bogus"]) == 2


class TestConsoleScript:
    def test_entry_point_runs(self):
        import shutil
        import subprocess

        exe = shutil.which("mimo-gt")
        if exe is None:
            pytest.skip("console script not on PATH")
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "analyze" in proc.stdout and "verify" in proc.stdout


class TestReproducibility:
    def test_simulate_csv_bytes_identical_across_workers(self, light_config, tmp_path):
        outputs = []
        for workers in (1, 4, 8):
            out = tmp_path / f"w{workers}.csv"
            code = main(["simulate", "--config", light_config, "--trials", "120",
                         "--workers", str(workers), "--output", str(out)])
            assert code in (0, 1)
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_analyze_csv_stable_across_runs(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["analyze", "--seed", "5", "--output", str(a)])
        main(["analyze", "--seed", "5", "--output", str(b)])
        assert a.read_bytes() == b.read_bytes()
