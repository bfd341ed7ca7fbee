"""
End-to-end tests for the polysdf command-line tool.

Commands run through main(), which returns the process exit status.
"""

import numpy as np
import pytest

from polynomial_sdf.commands import runner
from polynomial_sdf.main import main
from polynomial_sdf.models.enums import Command
from polynomial_sdf.models.field_model import FieldModel
from polynomial_sdf.models.mesh import TriangleMesh
from polynomial_sdf.schemas.basis import BasisConfig
from polynomial_sdf.schemas.run_config import RunConfig
from polynomial_sdf.services.recon_service import load_grid, mesh_text
from polynomial_sdf.services.snapshot_service import load_snapshot, save_snapshot
from tests.builders import SPHERE_CENTER, SPHERE_RADIUS, sphere_samples, write_xyz

SMALL = ["--segments", "2"]


@pytest.fixture
def cloud(tmp_path):
    path = tmp_path / "cloud.xyz"
    write_xyz(path, sphere_samples(150))
    return path


@pytest.fixture
def fitted(tmp_path, cloud):
    path = tmp_path / "model.psdf"
    assert main(["fit", "--in", str(cloud), "--out", str(path), *SMALL]) == 0
    return path


def parse_rows(text: str) -> np.ndarray:
    return np.array([[float(v) for v in line.split()] for line in text.splitlines()])


class TestFit:

    def test_writes_snapshot(self, fitted):
        model = load_snapshot(fitted)
        assert model.config.dim == 3
        assert model.config.segments == 2
        assert model.transform is not None

    def test_deterministic(self, tmp_path, cloud):
        for name in ("a.psdf", "b.psdf"):
            assert main(["fit", "--in", str(cloud), "--out", str(tmp_path / name), *SMALL]) == 0
        assert (tmp_path / "a.psdf").read_bytes() == (tmp_path / "b.psdf").read_bytes()

    def test_config_file_and_flags(self, tmp_path, cloud):
        conf = tmp_path / "run.conf"
        conf.write_text("segments=2\ndegree=4\n")
        out = tmp_path / "model.psdf"
        args = ["fit", "--config", str(conf), "--degree", "3",
                "--in", str(cloud), "--out", str(out)]
        assert main(args) == 0
        config = load_snapshot(out).config
        assert (config.degree, config.segments) == (3, 2)

    def test_two_dimensional_cloud(self, tmp_path):
        path = tmp_path / "circle.xyz"
        write_xyz(path, sphere_samples(60, center=(0.5, 0.5)))
        out = tmp_path / "circle.psdf"
        assert main(["fit", "--in", str(path), "--out", str(out), *SMALL]) == 0
        assert load_snapshot(out).config.dim == 2


class TestUpdate:

    def test_empty_input_leaves_model_unchanged(self, tmp_path, fitted):
        empty = tmp_path / "empty.xyz"
        empty.write_text("")
        out = tmp_path / "updated.psdf"
        args = ["update", "--model", str(fitted), "--in", str(empty), "--out", str(out)]
        assert main(args) == 0
        before, after = load_snapshot(fitted), load_snapshot(out)
        np.testing.assert_array_equal(after.w, before.w)
        np.testing.assert_array_equal(after.P, before.P)

    def test_fit_then_update_matches_single_fit(self, tmp_path):
        samples = sphere_samples(80, seed=4)
        write_xyz(tmp_path / "first.xyz", samples[:40])
        write_xyz(tmp_path / "second.xyz", samples[40:])
        write_xyz(tmp_path / "all.xyz", samples)
        common = ["--no-normalize", "--stream", *SMALL]

        assert main(["fit", "--in", str(tmp_path / "first.xyz"),
                     "--out", str(tmp_path / "partial.psdf"), *common]) == 0
        assert main(["update", "--model", str(tmp_path / "partial.psdf"),
                     "--in", str(tmp_path / "second.xyz"),
                     "--out", str(tmp_path / "resumed.psdf")]) == 0
        assert main(["fit", "--in", str(tmp_path / "all.xyz"),
                     "--out", str(tmp_path / "direct.psdf"), *common]) == 0

        resumed = load_snapshot(tmp_path / "resumed.psdf")
        direct = load_snapshot(tmp_path / "direct.psdf")
        assert np.linalg.norm(resumed.w - direct.w) <= 1e-6 * np.linalg.norm(direct.w)

    def test_update_beyond_fit_bounds_with_domain(self, tmp_path):
        samples = sorted(sphere_samples(60, seed=5), key=lambda s: s.position[0])
        write_xyz(tmp_path / "first.xyz", samples[:8])
        write_xyz(tmp_path / "second.xyz", samples[8:])
        write_xyz(tmp_path / "all.xyz", samples)
        common = ["--domain", "0,0,0,1,1,1", "--stream", *SMALL]

        assert main(["fit", "--in", str(tmp_path / "first.xyz"),
                     "--out", str(tmp_path / "partial.psdf"), *common]) == 0
        assert main(["update", "--model", str(tmp_path / "partial.psdf"),
                     "--in", str(tmp_path / "second.xyz"),
                     "--out", str(tmp_path / "resumed.psdf")]) == 0
        assert main(["fit", "--in", str(tmp_path / "all.xyz"),
                     "--out", str(tmp_path / "direct.psdf"), *common]) == 0

        resumed = load_snapshot(tmp_path / "resumed.psdf")
        direct = load_snapshot(tmp_path / "direct.psdf")
        assert resumed.transform == direct.transform
        assert np.linalg.norm(resumed.w - direct.w) <= 1e-6 * np.linalg.norm(direct.w)

    def test_update_beyond_fit_bounds_without_domain(self, tmp_path, capsys):
        samples = sorted(sphere_samples(60, seed=5), key=lambda s: s.position[0])
        write_xyz(tmp_path / "first.xyz", samples[:8])
        write_xyz(tmp_path / "second.xyz", samples[-8:])
        assert main(["fit", "--in", str(tmp_path / "first.xyz"),
                     "--out", str(tmp_path / "partial.psdf"), *SMALL]) == 0
        capsys.readouterr()

        args = ["update", "--model", str(tmp_path / "partial.psdf"),
                "--in", str(tmp_path / "second.xyz"), "--out", str(tmp_path / "resumed.psdf")]
        assert main(args) == 1
        err = capsys.readouterr().err
        assert "outside the model domain" in err
        assert "--domain" in err
        assert not (tmp_path / "resumed.psdf").exists()

    def test_domain_axes_must_match_samples(self, tmp_path, cloud, capsys):
        args = ["fit", "--in", str(cloud), "--out", str(tmp_path / "m.psdf"),
                "--domain", "0,0,1,1", *SMALL]
        assert main(args) == 1
        assert "--domain has 2 axes" in capsys.readouterr().err

    def test_overwrites_model_in_place(self, tmp_path, fitted, cloud):
        before = fitted.read_bytes()
        assert main(["update", "--model", str(fitted), "--in", str(cloud)]) == 0
        assert fitted.read_bytes() != before


class TestQuery:

    def test_constant_model(self, tmp_path, capsys):
        model_path = tmp_path / "constant.psdf"
        save_snapshot(FieldModel.constant(BasisConfig.unit(dim=3), 0.7), model_path)
        points = tmp_path / "points.txt"
        points.write_text("0.5 0.5 0.5\n0.1 0.2 0.3\n")

        assert main(["query", "--model", str(model_path), "--points", str(points)]) == 0
        rows = parse_rows(capsys.readouterr().out)
        assert rows.shape == (2, 7)
        np.testing.assert_array_equal(rows[:, :3], [[0.5, 0.5, 0.5], [0.1, 0.2, 0.3]])
        np.testing.assert_allclose(rows[:, 3], 0.7, atol=1e-12)
        np.testing.assert_allclose(rows[:, 4:], 0.0, atol=1e-9)

    def test_fitted_sphere_in_input_units(self, tmp_path, fitted, capsys):
        points = tmp_path / "points.txt"
        points.write_text(f"{SPHERE_CENTER[0] + SPHERE_RADIUS} 0.5 0.5\n")
        out = tmp_path / "answers.txt"
        args = ["query", "--model", str(fitted), "--points", str(points), "--out", str(out)]
        assert main(args) == 0
        assert capsys.readouterr().out == ""
        row = parse_rows(out.read_text())[0]
        assert abs(row[3]) < 0.05
        assert row[4] > 0


class TestReconstruct:

    def test_raw_grid_and_level_set(self, tmp_path, fitted):
        out = tmp_path / "grid.raw"
        args = ["reconstruct", "--model", str(fitted), "--out", str(out), "--grid-res", "16"]
        assert main(args) == 0
        assert out.stat().st_size == 4 * 16 ** 3
        grid = load_grid(out)
        assert grid.resolution == (16, 16, 16)
        level_set = (tmp_path / "grid_levelset.obj").read_text()
        assert "\nf " in level_set

    def test_vtk_grid(self, tmp_path, fitted):
        out = tmp_path / "grid.vtk"
        args = ["reconstruct", "--model", str(fitted), "--out", str(out),
                "--grid-res", "8", "--format", "vtk"]
        assert main(args) == 0
        assert load_grid(out, "vtk").resolution == (8, 8, 8)

    def test_unknown_format_is_usage_error(self, tmp_path, fitted):
        out = tmp_path / "grid.png"
        args = ["reconstruct", "--model", str(fitted), "--out", str(out), "--format", "png"]
        assert main(args) == 1
        assert not out.exists()


class TestEval:

    def test_report_against_sphere_mesh(self, tmp_path, fitted, capsys):
        mesh_path = tmp_path / "truth.obj"
        mesh_path.write_text(mesh_text(TriangleMesh.icosphere(2, SPHERE_CENTER, SPHERE_RADIUS)))
        out = tmp_path / "report.txt"
        args = ["eval", "--model", str(fitted), "--mesh", str(mesh_path), "--out", str(out),
                "--eval-points", "200", "--shell-points", "200"]
        assert main(args) == 0
        printed = capsys.readouterr().out
        assert printed.startswith("count ")
        assert "gcd_near_mean " in printed
        assert out.read_text() == printed
        assert (tmp_path / "report.txt.json").exists()


class TestSimulate:

    def test_short_episode(self, tmp_path, capsys):
        out = tmp_path / "trajectory.txt"
        args = ["simulate", "--out", str(out), "--steps", "10", "--snapshot-interval", "5"]
        assert main(args) == 0
        assert len(out.read_text().splitlines()) == 11
        assert load_snapshot(tmp_path / "trajectory.psdf").config.dim == 2
        snapshots = sorted(p.name for p in (tmp_path / "trajectory_snapshots").iterdir())
        assert snapshots == ["step_00005.psdf", "step_00010.psdf"]
        assert "steps 10\n" in capsys.readouterr().out


class TestExitCodes:

    def test_version(self):
        assert main(["--version"]) == 0

    def test_unknown_flag(self):
        assert main(["fit", "--lamda-d", "1"]) == 1

    def test_unknown_config_key(self, tmp_path, cloud, capsys):
        conf = tmp_path / "run.conf"
        conf.write_text("lamda_d=1\n")
        args = ["fit", "--config", str(conf), "--in", str(cloud), "--out", str(tmp_path / "m")]
        assert main(args) == 1
        assert "unknown configuration key 'lamda_d'" in capsys.readouterr().err

    def test_missing_required_option(self, cloud, capsys):
        assert main(["fit", "--in", str(cloud)]) == 1
        assert "--out" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        args = ["fit", "--in", str(tmp_path / "absent.xyz"), "--out", str(tmp_path / "m.psdf")]
        assert main(args) == 2

    def test_malformed_input(self, tmp_path, capsys):
        bad = tmp_path / "bad.xyz"
        bad.write_text("0 0 0 1 0 0\n0 0 zero 1 0 0\n")
        args = ["fit", "--in", str(bad), "--out", str(tmp_path / "m.psdf")]
        assert main(args) == 2
        assert f"{bad}:2:" in capsys.readouterr().err

    def test_malformed_ply_header(self, tmp_path, capsys):
        bad = tmp_path / "bad.ply"
        bad.write_text("ply\nformat ascii 1.0\nelement vertex 1\nproperty\nend_header\n0 0 0\n")
        args = ["fit", "--in", str(bad), "--out", str(tmp_path / "m.psdf")]
        assert main(args) == 2
        err = capsys.readouterr().err
        assert f"{bad}:4:" in err
        assert "Traceback" not in err

    def test_unexpected_error_is_reported(self, monkeypatch, capsys):
        def broken(config, outputs):
            raise RuntimeError("boom")

        monkeypatch.setitem(runner.HANDLERS, Command.QUERY, broken)
        assert runner.run(Command.QUERY, RunConfig()) == runner.EXIT_INTERNAL
        assert "internal error: RuntimeError: boom" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["fit", "--config", str(tmp_path / "absent.conf")]) == 2

    def test_numerical_failure(self, tmp_path, cloud):
        config = BasisConfig.unit(segments=2, dim=3)
        broken = FieldModel(config=config, w=np.zeros(config.n_weights),
                            P=-np.eye(config.n_weights))
        save_snapshot(broken, tmp_path / "broken.psdf")
        args = ["update", "--model", str(tmp_path / "broken.psdf"), "--in", str(cloud),
                "--out", str(tmp_path / "out.psdf")]
        assert main(args) == 3
        assert not (tmp_path / "out.psdf").exists()

    def test_failure_leaves_no_partial_outputs(self, tmp_path):
        bad = tmp_path / "bad.xyz"
        bad.write_text("not a number\n")
        out = tmp_path / "model.psdf"
        out.write_text("previous")
        assert main(["fit", "--in", str(bad), "--out", str(out)]) == 2
        assert out.read_text() == "previous"
        assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.xyz", "model.psdf"]

    def test_eval_of_two_dimensional_model(self, tmp_path):
        model_path = tmp_path / "flat.psdf"
        save_snapshot(FieldModel.constant(BasisConfig.unit(dim=2), 0.0), model_path)
        mesh_path = tmp_path / "box.obj"
        mesh_path.write_text(mesh_text(TriangleMesh.box((0.5, 0.5, 0.5), 0.5)))
        assert main(["eval", "--model", str(model_path), "--mesh", str(mesh_path)]) == 1

