"""Command-line workflows: run, sweep, solve-matrix, plot, config schema."""

import json
import os
import xml.etree.ElementTree as ET

import pytest

from gamepop.cli import main, run_from_config, solve_matrix, sweep
from gamepop.config import (ConfigError, config_to_dict, load_config,
                            parse_config)
from gamepop.svgplot import PlotError, render_svg

RPS_ROWS = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]


def minimal_config(output_dir, **overrides):
    data = {
        "game": {"name": "matrix_game", "params": {"rows": RPS_ROWS}},
        "oracle": {"kind": "exact"},
        "mss": {"kind": "nash"},
        "init": {"method": "inherit_latest"},
        "iterations": 4,
        "seeds": [0],
        "output_dir": str(output_dir),
    }
    data.update(overrides)
    return data


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestRunCommand:
    def test_minimal_rps_run(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, minimal_config(out))
        assert run_from_config(path) == 0
        lines = (out / "seed_0" / "results.csv").read_text().strip().splitlines()
        assert len(lines) == 2 + 4
        final = lines[-1].split(",")
        assert float(final[1]) <= 1e-9
        echoed = json.loads((out / "config.json").read_text())
        assert echoed["iterations"] == 4

    def test_three_seeds_three_result_files(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, minimal_config(out, seeds=[1, 2, 3]))
        run_from_config(path)
        for seed in (1, 2, 3):
            assert (out / f"seed_{seed}" / "results.csv").exists()

    def test_runs_deterministic_per_seed(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        config = minimal_config(out_a, seeds=[7])
        run_from_config(write_config(tmp_path, config, "a.json"))
        config["output_dir"] = str(out_b)
        run_from_config(write_config(tmp_path, config, "b.json"))
        assert (out_a / "seed_7" / "results.csv").read_bytes() == \
            (out_b / "seed_7" / "results.csv").read_bytes()

    def test_cli_entry_point(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, minimal_config(out))
        assert main(["run", "--config", path]) == 0

    def test_missing_output_dir_is_an_error(self, tmp_path):
        config = minimal_config("ignored")
        del config["output_dir"]
        path = write_config(tmp_path, config)
        assert main(["run", "--config", path]) == 2


class TestConfigSchema:
    def test_negative_iterations_names_field(self, tmp_path):
        config = minimal_config(tmp_path, iterations=-1)
        with pytest.raises(ConfigError, match="iterations"):
            parse_config(config)

    def test_unknown_top_level_field(self, tmp_path):
        config = minimal_config(tmp_path)
        config["iteration"] = 4
        with pytest.raises(ConfigError, match="iteration"):
            parse_config(config)

    def test_unknown_nested_field(self, tmp_path):
        config = minimal_config(tmp_path)
        config["oracle"] = {"kind": "exact", "episodes": 3}
        with pytest.raises(ConfigError, match="episodes"):
            parse_config(config)

    def test_bad_seed_list(self, tmp_path):
        with pytest.raises(ConfigError, match="seeds"):
            parse_config(minimal_config(tmp_path, seeds=[]))
        with pytest.raises(ConfigError, match="seeds"):
            parse_config(minimal_config(tmp_path, seeds=[0.5]))

    def test_bad_mss_kind(self, tmp_path):
        with pytest.raises(ConfigError, match="mss.kind"):
            parse_config(minimal_config(tmp_path, mss={"kind": "alpharank"}))

    def test_per_player_init(self, tmp_path):
        config = minimal_config(tmp_path)
        config["init"] = {"p0": {"method": "scratch", "kind": "normal"},
                          "p1": {"method": "inherit_latest"}}
        parsed = parse_config(config)
        assert type(parsed.init[0]).__name__ == "Scratch"
        assert type(parsed.init[1]).__name__ == "InheritLatest"

    def test_round_trip_identity(self, tmp_path):
        config = minimal_config(
            tmp_path,
            oracle={"kind": "dqn", "hidden_layers": [16, 16], "episodes": 50,
                    "batch_size": 16, "replay_capacity": 100},
            init={"method": "nash_fusion", "c": 2, "top_k": "all",
                  "weights": "nash"},
            psd={"enabled": True, "lambda": 0.5, "hull_samples": 3},
            eval={"exact_exploitability_every": 2,
                  "approx_exploitability": {"kind": "q_learning"},
                  "approx_every": 0},
            payoff={"mode": "monte_carlo", "episodes": 200},
            diagnostics={"kl_compare": True, "kl_states": 17})
        parsed = parse_config(config)
        echoed = config_to_dict(parsed)
        assert parse_config(echoed) == parsed

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestSweep:
    def test_mss_sweep_summary_shape(self, tmp_path):
        out = tmp_path / "sweep"
        config = minimal_config(out, iterations=3, seeds=[0, 1])
        path = write_config(tmp_path, config)
        assert sweep(path, "mss", ["nash", "uniform"]) == 0
        lines = (out / "sweep_summary.csv").read_text().strip().splitlines()
        assert lines[0] == ("param,value,exploitability_mean,"
                            "exploitability_min,exploitability_max")
        assert len(lines) == 3
        assert lines[1].startswith("mss,nash,")

    def test_fusion_c_sweep(self, tmp_path):
        out = tmp_path / "sweep"
        config = minimal_config(out, iterations=2)
        config["init"] = {"method": "nash_fusion", "c": 2}
        path = write_config(tmp_path, config)
        sweep(path, "fusion_start_c", ["0", "2"])
        lines = (out / "sweep_summary.csv").read_text().strip().splitlines()
        assert len(lines) == 3

    def test_top_k_sweep_requires_fusion(self, tmp_path):
        path = write_config(tmp_path, minimal_config(tmp_path / "x"))
        with pytest.raises(ConfigError, match="nash_fusion"):
            sweep(path, "top_k", ["1"])

    def test_unknown_param(self, tmp_path):
        path = write_config(tmp_path, minimal_config(tmp_path / "x"))
        with pytest.raises(ConfigError, match="param"):
            sweep(path, "learning_rate", ["1"])


class TestSolveMatrix:
    def test_json_matrix(self, tmp_path, capsys):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(RPS_ROWS))
        assert solve_matrix(str(path), "nash") == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0].startswith("sigma_row")
        assert abs(float(lines[2].split()[1])) < 1e-8

    def test_text_matrix_and_all_solvers(self, tmp_path, capsys):
        path = tmp_path / "m.txt"
        path.write_text("0 -1 1\n1 0 -1\n-1 1 0\n")
        for mss in ("nash", "uniform", "prd", "fp"):
            if mss == "prd":
                continue  # default 1e5 steps; covered by unit tests
            assert solve_matrix(str(path), mss) == 0


def _write_results(path, rows):
    with open(path, "w") as fh:
        fh.write("# gamepop-results-v1\n")
        fh.write("iteration,exploitability,approx_exploitability,"
                 "pop_size_p1,pop_size_p2\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


class TestPlots:
    def test_empty_results_axes_only(self, tmp_path):
        src = tmp_path / "results.csv"
        _write_results(src, [])
        out = tmp_path / "plot.svg"
        render_svg("exploitability", [str(src)], str(out))
        root = ET.fromstring(out.read_text())
        tags = {child.tag.split("}")[-1] for child in root}
        assert "line" in tags
        assert "polyline" not in tags

    def test_single_seed_band_collapses_to_line(self, tmp_path):
        src = tmp_path / "results.csv"
        _write_results(src, [(1, 0.5, "", 2, 2), (2, 0.25, "", 3, 3),
                             (3, 0.125, "", 4, 4)])
        out = tmp_path / "plot.svg"
        render_svg("exploitability", [str(src)], str(out))
        root = ET.fromstring(out.read_text())
        ns = "{http://www.w3.org/2000/svg}"
        polygon = root.find(f"{ns}polygon").get("points").split()
        line = root.find(f"{ns}polyline").get("points").split()
        assert polygon[:len(line)] == line  # upper band edge equals the mean

    def test_byte_deterministic(self, tmp_path):
        src = tmp_path / "results.csv"
        _write_results(src, [(1, 0.5, "", 2, 2), (2, 0.25, "", 3, 3)])
        a = tmp_path / "a.svg"
        b = tmp_path / "b.svg"
        render_svg("exploitability", [str(src)], str(a))
        render_svg("exploitability", [str(src)], str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_version_check(self, tmp_path):
        src = tmp_path / "results.csv"
        src.write_text("# gamepop-results-v999\niteration,exploitability,"
                       "approx_exploitability,pop_size_p1,pop_size_p2\n")
        with pytest.raises(PlotError, match="version"):
            render_svg("exploitability", [str(src)], str(tmp_path / "x.svg"))

    def test_malformed_cell_names_row_and_column(self, tmp_path):
        src = tmp_path / "results.csv"
        _write_results(src, [(1, "oops", "", 2, 2)])
        with pytest.raises(PlotError, match="row 0.*exploitability"):
            render_svg("exploitability", [str(src)], str(tmp_path / "x.svg"))

    def test_trajectory_geometry(self, tmp_path):
        from gamepop.games.ntmg import NtmgConfig
        cfg = NtmgConfig()
        center = cfg.centers()[2]
        src = tmp_path / "trajectories.csv"
        with open(src, "w") as fh:
            fh.write("iteration,player,step,x,y\n")
            for step, frac in enumerate((0.0, 0.5, 0.95, 1.0)):
                x = float((1 - frac) * 4.0 + frac * center[0])
                y = float((1 - frac) * -4.0 + frac * center[1])
                fh.write(f"1,0,{step},{x!r},{y!r}\n")
        out = tmp_path / "traj.svg"
        render_svg("trajectories", [str(src)], str(out), ntmg=cfg)
        root = ET.fromstring(out.read_text())
        ns = "{http://www.w3.org/2000/svg}"
        circles = [(float(c.get("cx")), float(c.get("cy")), float(c.get("r")))
                   for c in root.iter(f"{ns}circle")]
        assert len(circles) == 7
        polyline = root.find(f"{ns}polyline")
        last_x, last_y = map(float, polyline.get("points").split()[-1].split(","))
        inside = any((last_x - cx) ** 2 + (last_y - cy) ** 2 <= r ** 2
                     for cx, cy, r in circles)
        assert inside  # the endpoint lands inside its hump circle

    def test_reward_curves_and_kl_tiles(self, tmp_path):
        curve = tmp_path / "curve.csv"
        curve.write_text("episode,mean_reward_window\n1,0.1\n2,0.5\n3,0.9\n")
        render_svg("reward_curves", [str(curve)], str(tmp_path / "r.svg"))
        kl = tmp_path / "kl.csv"
        kl.write_text("iteration,player,kl_fusion,kl_inherit,kl_scratch\n"
                      "1,0,0.001,0.05,0.1\n1,1,0.002,0.04,0.09\n"
                      "2,0,0.001,0.03,0.12\n")
        render_svg("kl_tiles", [str(kl)], str(tmp_path / "k.svg"))
        root = ET.fromstring((tmp_path / "k.svg").read_text())
        ns = "{http://www.w3.org/2000/svg}"
        assert len(list(root.iter(f"{ns}rect"))) == 1 + 6  # bg + 2 iters x 3

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(PlotError, match="kind"):
            render_svg("pie", [], str(tmp_path / "x.svg"))

    def test_plot_cli(self, tmp_path):
        src = tmp_path / "results.csv"
        _write_results(src, [(1, 0.5, "", 2, 2)])
        out = tmp_path / "cli.svg"
        assert main(["plot", "--kind", "exploitability", "--in", str(src),
                     "--out", str(out)]) == 0
        assert out.exists()


def test_shipped_configs_parse():
    import glob
    paths = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "..",
                                          "configs", "*.json")))
    assert len(paths) >= 8
    for path in paths:
        config = load_config(path)
        assert config.iterations >= 1


def test_eval_command_recomputes_exploitability(tmp_path, capsys):
    out = tmp_path / "out"
    path = write_config(tmp_path, minimal_config(out))
    run_from_config(path)
    assert main(["eval", "--run-dir", str(out / "seed_0")]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "iterations 4"
    assert lines[1] == "population 5 5"
    assert abs(float(lines[2].split()[1])) <= 1e-9
