import json
import re
import subprocess
import sys

import numpy as np
import pytest

from isingmarket.cli.configfile import SCHEMAS, documented_keys, parse_config
from isingmarket.cli.main import build_parser, execute
from isingmarket.errors import ConfigError
from isingmarket.market import MarketConfig

SIMULATE = """\
# minimal market
n_agents = 50
horizon = 200
seed = 3
coupling.constant = 1.5
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


class TestConfigFile:
    def test_minimal_simulate_fills_defaults(self, tmp_path):
        cfg = parse_config(write(tmp_path, "sim.conf", SIMULATE), "simulate")
        assert isinstance(cfg, MarketConfig)
        assert (cfg.n_agents, cfg.horizon, cfg.seed) == (50, 200, 3)
        assert cfg.coupling.kind == "constant" and cfg.coupling.value == 1.5
        default = MarketConfig()
        assert (cfg.impact, cfg.noise, cfg.topology) == (default.impact, default.noise, default.topology)
        assert cfg.update_scheme == "synchronous" and cfg.price_mode == "log"

    def test_sections_and_dotted_keys_agree(self, tmp_path):
        a = parse_config(write(tmp_path, "a.conf", SIMULATE), "simulate")
        b = parse_config(write(tmp_path, "b.conf", "[market]\nn_agents = 50\nhorizon = 200\nseed = 3\n"
                                                    "[coupling]\nconstant = 1.5  # inline comment\n"), "simulate")
        assert a == b

    def test_json_config(self, tmp_path):
        doc = {"market": {"n_agents": 50, "horizon": 200, "seed": 3}, "coupling": {"constant": 1.5}}
        a = parse_config(write(tmp_path, "a.json", json.dumps(doc)), "simulate")
        assert a == parse_config(write(tmp_path, "b.conf", SIMULATE), "simulate")

    def test_n_agents_one(self, tmp_path):
        with pytest.raises(ConfigError, match="n_agents ≥ 2") as exc:
            parse_config(write(tmp_path, "c.conf", "n_agents = 1\n"), "simulate")
        assert exc.value.line == 1

    def test_misspelled_key_line_number(self, tmp_path):
        text = "n_agents = 10\n\n[coupling]\nlamda = 2.0\n"
        with pytest.raises(ConfigError, match=r"unknown key coupling\.lamda") as exc:
            parse_config(write(tmp_path, "c.conf", text), "simulate")
        assert exc.value.line == 4
        assert str(exc.value).startswith(f"{tmp_path / 'c.conf'}:4:")

    def test_duplicate_key(self, tmp_path):
        with pytest.raises(ConfigError, match="duplicate") as exc:
            parse_config(write(tmp_path, "c.conf", "seed = 1\nseed = 2\n"), "simulate")
        assert exc.value.line == 2

    def test_bad_value(self, tmp_path):
        with pytest.raises(ConfigError) as exc:
            parse_config(write(tmp_path, "c.conf", "horizon = many\n"), "simulate")
        assert exc.value.line == 1

    def test_missing_required(self, tmp_path):
        with pytest.raises(ConfigError, match="lambda_grid"):
            parse_config(write(tmp_path, "c.conf", "n_agents = 10\n"), "sweep")

    def test_seed_override(self, tmp_path):
        cfg = parse_config(write(tmp_path, "s.conf", SIMULATE), "simulate", seed_override=77)
        assert cfg.seed == 77

    @pytest.mark.parametrize("sub", list(SCHEMAS))
    def test_help_lists_exactly_documented_keys(self, sub, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args([sub, "--help"])
        listed = set(re.findall(r"^\s+([a-z_]+\.[a-z_]+):", capsys.readouterr().out, flags=re.M))
        assert listed == documented_keys(sub)


@pytest.fixture
def configs(tmp_path):
    prices = 100 * np.exp(np.cumsum(0.01 * np.random.default_rng(0).standard_normal(800)))
    (tmp_path / "prices.csv").write_text("price\n" + "\n".join(format(p, ".17g") for p in prices) + "\n")
    return {
        "simulate": write(tmp_path, "simulate.conf", SIMULATE),
        "sweep": write(tmp_path, "sweep.conf", "n_agents = 40\nhorizon = 120\nseed = 2\n"
                                                "[sweep]\nlambda_grid = 0.5, 1.5, 2.5\nburn_in = 20\n"),
        "nivol": write(tmp_path, "nivol.conf", "n_agents = 40\nhorizon = 100\ncoupling.constant = 2\n"
                                                "[nivol]\nfield_amplitude = 0.5\nn_seeds = 3\n"),
        "stylized": write(tmp_path, "stylized.conf", "input = prices.csv\nmax_lag = 20\n"),
        "choice": write(tmp_path, "choice.conf", "utilities = 1, 0, -1\nn_samples = 20000\nseed = 4\n"),
        "qdt": write(tmp_path, "qdt.json", json.dumps({"labels": ["A", "B"], "utilities": [0.4, 0.6],
                                                       "ranking": ["A", "B"], "counts": [60, 40]})),
    }


EXPECTED_FILES = {"simulate": "trajectory.csv", "sweep": "sweep.csv", "nivol": "result.json",
                  "stylized": "report.json", "choice": "result.json", "qdt": "result.json"}


class TestExecute:
    @pytest.mark.parametrize("sub", list(SCHEMAS))
    def test_every_subcommand_deterministic(self, sub, configs, tmp_path, capsys):
        digests = []
        for rep in ("1", "2"):
            out = tmp_path / f"{sub}-{rep}"
            assert execute([sub, "--config", str(configs[sub]), "--out", str(out)]) == 0
            assert sorted(p.name for p in out.iterdir()) == sorted(["manifest.json", EXPECTED_FILES[sub]])
            digests.append(manifest(out)["files"])
        assert digests[0] == digests[1]
        assert f"{sub}:" in capsys.readouterr().out

    def test_unsorted_grid_exit_1(self, tmp_path, capsys):
        cfg = write(tmp_path, "s.conf", "n_agents = 10\nhorizon = 50\nsweep.lambda_grid = 2, 1\n")
        assert execute(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
        assert "sorted" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_unknown_key_exit_1(self, tmp_path, capsys):
        cfg = write(tmp_path, "s.conf", "n_agents = 10\ncoupling.lamda = 2\n")
        assert execute(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
        assert ":2:" in capsys.readouterr().err

    def test_qdt_violation_exit_2(self, tmp_path, capsys):
        cfg = write(tmp_path, "q.json", json.dumps({"labels": ["A", "B"], "utilities": [0.9, 0.1],
                                                    "q": [0.25, -0.25]}))
        assert execute(["qdt", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "violates 0 <= p <= 1" in capsys.readouterr().err

    def test_raw_mode_failure_exit_2(self, tmp_path):
        cfg = write(tmp_path, "r.conf", "n_agents = 10\nhorizon = 50\nprice_mode = raw\nnoise.price_sigma = 2\n")
        assert execute(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_seed_override_recorded(self, configs, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        execute(["simulate", "--config", str(configs["simulate"]), "--out", str(out_a)])
        execute(["simulate", "--config", str(configs["simulate"]), "--out", str(out_b), "--seed", "9"])
        ma, mb = manifest(out_a), manifest(out_b)
        assert ma["seed"] == 3 and mb["seed"] == 9
        assert mb["extra"]["seed_override"] is True and ma["extra"]["seed_override"] is False
        assert ma["files"] != mb["files"]

    def test_output_root_env(self, configs, tmp_path, monkeypatch):
        monkeypatch.setenv("ISINGMARKET_OUTPUT_ROOT", str(tmp_path / "root"))
        assert execute(["simulate", "--config", str(configs["simulate"])]) == 0
        m = manifest(tmp_path / "root" / "simulate")
        assert m["extra"]["output_root"] == str(tmp_path / "root")

    def test_no_output_location(self, configs, monkeypatch):
        monkeypatch.delenv("ISINGMARKET_OUTPUT_ROOT", raising=False)
        assert execute(["simulate", "--config", str(configs["simulate"])]) == 1

    def test_jobs_do_not_change_results(self, configs, tmp_path):
        for j in ("1", "2"):
            execute(["sweep", "--config", str(configs["sweep"]), "--out", str(tmp_path / j), "--jobs", j])
        assert manifest(tmp_path / "1")["files"] == manifest(tmp_path / "2")["files"]

    def test_json_format(self, configs, tmp_path):
        execute(["simulate", "--config", str(configs["simulate"]), "--out", str(tmp_path / "j"), "--format", "json"])
        assert (tmp_path / "j" / "trajectory.json").exists()

    def test_qdt_result_keys(self, configs, tmp_path):
        execute(["qdt", "--config", str(configs["qdt"]), "--out", str(tmp_path / "q")])
        res = json.loads((tmp_path / "q" / "result.json").read_text())
        assert res["p"] == [0.65, 0.35] and res["preferred"] == 0 and res["q_source"] == "DEFAULT"
        assert res["frequency"]["dof"] == 1

    def test_console_script_module(self, configs, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "isingmarket", "choice", "--config", str(configs["choice"]),
                               "--out", str(tmp_path / "c")], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "total variation" in proc.stdout
