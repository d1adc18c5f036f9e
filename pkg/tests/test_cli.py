import json

import numpy as np
import pytest

from osproj import cli
from osproj.linalg import format_complex, read_matrix_text
from osproj.superop import conjugation, identity, transpose_map, write_superop_text


def mat(m):
    return [[format_complex(z) for z in row] for row in np.asarray(m, dtype=complex)]


def z2_config(**overrides):
    cfg = {
        "scenario": "project",
        "semigroup": {"kind": "cyclic", "order": 2},
        "action": {
            "type": "conjugation",
            "rep": [mat(np.eye(2)), mat(np.diag([1.0, -1.0]))],
        },
        "mean": {"kind": "uniform"},
        "verification": {"seed": 11, "trials": 8},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


class TestRun:
    def test_trivial_group_passes(self, tmp_path, capsys):
        cfg = z2_config()
        cfg["semigroup"] = {"kind": "cyclic", "order": 1}
        cfg["action"]["rep"] = [mat(np.eye(2))]
        path = write_config(tmp_path, "trivial.json", cfg)
        code = cli.main(["run", str(path), "--output", str(tmp_path / "r.json")])
        assert code == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["passed"]
        assert report["defects"]["idempotency"] == 0.0

    def test_z2_pinching(self, tmp_path):
        path = write_config(tmp_path, "z2.json", z2_config())
        out = tmp_path / "z2.report.json"
        code = cli.main(["run", str(path), "--output", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["spaces"]["range_dim"] == 2
        assert report["defects"]["idempotency"] <= 1e-12
        for row in report["invariants"]:
            assert {"name", "measured", "tolerance", "pass"} <= set(row)

    def test_insufficient_quadrature_exit_2(self, tmp_path, capsys):
        cfg = {
            "scenario": "project",
            "semigroup": {"kind": "circle"},
            "action": {"type": "circle", "weights": [0, 1]},
            "mean": {"kind": "circle", "nodes": 2},
            "verification": {"seed": 0},
        }
        path = write_config(tmp_path, "bad_nodes.json", cfg)
        code = cli.main(["run", str(path)])
        assert code == 2
        assert "insufficient quadrature" in capsys.readouterr().err

    def test_unknown_key_exit_2(self, tmp_path, capsys):
        path = write_config(tmp_path, "bad.json", z2_config(bogus=1))
        assert cli.main(["run", str(path)]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_seed_exit_2(self, tmp_path):
        cfg = z2_config()
        del cfg["verification"]["seed"]
        path = write_config(tmp_path, "noseed.json", cfg)
        assert cli.main(["run", str(path)]) == 2

    def test_malformed_json_exit_2(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.main(["run", str(path)]) == 2

    def test_failed_invariant_exit_3(self, tmp_path):
        cfg = z2_config()
        cfg["verification"]["tolerances"] = {"cb_slack": -10.0}
        path = write_config(tmp_path, "fail.json", cfg)
        out = tmp_path / "fail.report.json"
        code = cli.main(["run", str(path), "--output", str(out)])
        assert code == 3
        report = json.loads(out.read_text())
        assert not report["passed"]

    def test_timing_key_optional(self, tmp_path):
        path = write_config(tmp_path, "z2.json", z2_config())
        out = tmp_path / "a.json"
        cli.main(["run", str(path), "--output", str(out)])
        assert "timing" in json.loads(out.read_text())
        cli.main(["run", str(path), "--output", str(out), "--no-timing"])
        assert "timing" not in json.loads(out.read_text())


class TestCbnormCommand:
    def test_identity(self, tmp_path, capsys):
        path = tmp_path / "id.superop"
        path.write_text(write_superop_text(identity(2)))
        code = cli.main(["cbnorm", str(path), "--seed", "1"])
        assert code == 0
        result = json.loads(capsys.readouterr().out)
        assert result["lower"] == pytest.approx(1.0, abs=1e-6)
        assert result["upper"] == pytest.approx(1.0, abs=1e-6)
        witness = read_matrix_text((tmp_path / result["witness_file"]).read_text())
        assert witness.shape == (4, 4)

    def test_transpose(self, tmp_path, capsys):
        path = tmp_path / "t.superop"
        path.write_text(write_superop_text(transpose_map(2)))
        assert cli.main(["cbnorm", str(path), "--seed", "1"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["lower"] >= 2 - 1e-4
        assert result["upper"] <= 2 + 1e-4

    def test_cp_map(self, tmp_path, capsys):
        path = tmp_path / "cp.superop"
        path.write_text(write_superop_text(conjugation(np.diag([1.0, 2.0])), "kraus"))
        assert cli.main(["cbnorm", str(path)]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["upper"] == pytest.approx(4.0, abs=1e-4)

    def test_bad_file_exit_2(self, tmp_path):
        path = tmp_path / "junk.superop"
        path.write_text("garbage\n")
        assert cli.main(["cbnorm", str(path)]) == 2


class TestSuite:
    def test_empty_directory(self, tmp_path, capsys):
        empty = tmp_path / "configs"
        empty.mkdir()
        code = cli.main(
            ["suite", str(empty), "--output-dir", str(tmp_path / "out")]
        )
        assert code == 0
        agg = json.loads(capsys.readouterr().out)
        assert agg["runs"] == [] and agg["worst_exit"] == 0

    def test_malformed_child_propagates(self, tmp_path, capsys):
        cfgdir = tmp_path / "configs"
        cfgdir.mkdir()
        write_config(cfgdir, "ok.json", z2_config())
        (cfgdir / "bad.json").write_text("{]")
        code = cli.main(["suite", str(cfgdir), "--output-dir", str(tmp_path / "out")])
        assert code == 2
        agg = json.loads(capsys.readouterr().out)
        by_name = {r["config"]: r for r in agg["runs"]}
        assert by_name["ok.json"]["exit_code"] == 0
        assert by_name["bad.json"]["exit_code"] == 2

    def test_ordering_is_stable(self, tmp_path, capsys):
        cfgdir = tmp_path / "configs"
        cfgdir.mkdir()
        for name in ("b.json", "a.json", "c.json"):
            write_config(cfgdir, name, z2_config())
        cli.main(["suite", str(cfgdir), "--output-dir", str(tmp_path / "out")])
        agg = json.loads(capsys.readouterr().out)
        assert [r["config"] for r in agg["runs"]] == ["a.json", "b.json", "c.json"]

    def test_deterministic_reports(self, tmp_path):
        cfgdir = tmp_path / "configs"
        cfgdir.mkdir()
        write_config(cfgdir, "z2.json", z2_config())
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        cli.main(["suite", str(cfgdir), "--output-dir", str(out1)])
        cli.main(["suite", str(cfgdir), "--output-dir", str(out2)])
        for f1 in sorted(out1.iterdir()):
            f2 = out2 / f1.name
            assert f1.read_bytes() == f2.read_bytes()


class TestBundled:
    def test_bundled_configs_present(self):
        configs = sorted(cli.bundled_config_dir().glob("*.json"))
        assert len(configs) >= 12
