import json

import numpy as np
import pytest

from presstopo.cli import RunConfig, run, run_cli
from presstopo.driver import optimize
from presstopo.output import (
    HISTORY_HEADER,
    density_to_gray,
    read_history_csv,
    read_pgm,
    write_density_image,
    write_history_csv,
)
from presstopo.problems import make_arch, make_piston, spec_to_config


class TestImages:
    def test_gray_mapping(self):
        assert np.all(density_to_gray(np.zeros((3, 4))) == 255)
        assert np.all(density_to_gray(np.ones((3, 4))) == 0)
        assert density_to_gray(np.array([[0.5]]))[0, 0] == 128

    @pytest.mark.parametrize("fmt", ["pgm", "pgm-ascii"])
    def test_round_trip(self, tmp_path, rng, fmt):
        rho = rng.uniform(size=(7, 11))
        path = tmp_path / "d.pgm"
        write_density_image(rho, path, fmt)
        img = read_pgm(path)
        assert img.shape == (7, 11)
        np.testing.assert_array_equal(img, density_to_gray(rho))
        assert path.read_bytes()[:2] == (b"P5" if fmt == "pgm" else b"P2")

    def test_binary_header(self, tmp_path):
        path = tmp_path / "d.pgm"
        write_density_image(np.ones((2, 3)), path)
        assert path.read_bytes() == b"P5\n3 2\n255\n" + bytes(6)

    def test_rejects_bad_input(self, tmp_path):
        with pytest.raises(ValueError):
            write_density_image(np.ones(5), tmp_path / "x.pgm")
        with pytest.raises(ValueError):
            write_density_image(np.ones((2, 2)), tmp_path / "x.pgm", "png")


class TestHistory:
    def test_header_only_for_zero_iterations(self, tmp_path):
        res = optimize(make_arch(nelx=12, nely=6, maxit=0))
        path = tmp_path / "h.csv"
        write_history_csv(res, path)
        assert path.read_text().splitlines() == [",".join(HISTORY_HEADER)]
        assert read_history_csv(path) == []

    def test_rows_parse_back_exactly(self, tmp_path):
        res = optimize(make_arch(nelx=12, nely=6, maxit=3))
        path = tmp_path / "h.csv"
        write_history_csv(res, path)
        rows = read_history_csv(path)
        assert len(rows) == 3
        assert rows == [tuple(r) for r in res.history]


class TestCli:
    def test_unknown_problem(self, tmp_path, capsys):
        assert run_cli(["run", "nosuch", "--out", str(tmp_path)]) != 0
        err = capsys.readouterr().err
        assert "arch" in err and "piston" in err and "chamber" in err

    def test_invalid_override(self, tmp_path, capsys):
        assert run_cli(["run", "arch", "--lst", "2", "--out", str(tmp_path)]) == 2
        assert run_cli(["run", "arch", "--nelx", "abc", "--out", str(tmp_path)]) == 2
        assert run_cli(["run", "arch", "--snapshot-every", "-1", "--out", str(tmp_path)]) == 2

    def test_invalid_problem_values(self, tmp_path):
        assert run_cli(["run", "arch", "--nelx", "12", "--nely", "6", "--volfrac", "1.5",
                        "--out", str(tmp_path), "--quiet"]) == 1

    def test_piston_one_iteration(self, tmp_path, capsys):
        code = run_cli(["run", "piston", "--nelx", "30", "--nely", "10", "--maxit", "1",
                        "--out", str(tmp_path)])
        assert code == 0
        assert "It.:    1" in capsys.readouterr().out
        assert len(read_history_csv(tmp_path / "history.csv")) == 1
        assert read_pgm(tmp_path / "density_final.pgm").shape == (10, 30)

    def test_snapshots(self, tmp_path):
        code = run_cli(["run", "arch", "--nelx", "12", "--nely", "6", "--maxit", "4", "--snapshot-every", "2",
                        "--format", "pgm-ascii", "--out", str(tmp_path), "--quiet"])
        assert code == 0
        names = sorted(p.name for p in tmp_path.glob("density_*.pgm"))
        assert names == ["density_0002.pgm", "density_0004.pgm", "density_final.pgm"]
        assert (tmp_path / "density_final.pgm").read_bytes()[:2] == b"P2"

    def test_custom_problem(self, tmp_path):
        spec_file = tmp_path / "p.json"
        spec_file.write_text(json.dumps(spec_to_config(make_piston(nelx=20, nely=8))))
        out = tmp_path / "out"
        assert run_cli(["run", "custom", "--spec", str(spec_file), "--maxit", "2", "--out", str(out), "--quiet"]) == 0
        assert len(read_history_csv(out / "history.csv")) == 2
        assert json.loads((out / "problem.json").read_text())["maxit"] == 2

    def test_custom_needs_spec(self, tmp_path):
        assert run_cli(["run", "custom", "--out", str(tmp_path)]) == 2

    def test_bad_spec_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run_cli(["run", "custom", "--spec", str(bad), "--out", str(tmp_path), "--quiet"]) == 1

    def test_cli_matches_api(self, tmp_path):
        assert run_cli(["run", "arch", "--nelx", "16", "--nely", "8", "--maxit", "3",
                        "--out", str(tmp_path), "--quiet"]) == 0
        res = optimize(make_arch(nelx=16, nely=8, maxit=3))
        assert read_history_csv(tmp_path / "history.csv") == [tuple(r) for r in res.history]
        np.testing.assert_array_equal(read_pgm(tmp_path / "density_final.pgm"), density_to_gray(res.rho_filt))

    def test_run_config_api(self, tmp_path):
        res = run(RunConfig("arch", out=tmp_path, overrides={"nelx": 10, "nely": 5, "maxit": 1}))
        assert res.iterations == 1 and (tmp_path / "history.csv").exists()
        with pytest.raises(ValueError):
            RunConfig("arch", overrides={"nelx": 1.5})
