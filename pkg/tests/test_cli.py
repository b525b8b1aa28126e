import json

import numpy as np

from spectral_lab.cli import main
from spectral_lab.plots import emit_plots
from spectral_lab.serialization import complex_matrix_to_json


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def diag_config(out_dir, lambdas=(5.0,), **overrides):
    doc = {
        "schema": "spectral-lab/experiment/v1",
        "model": {"schema": "spectral-lab/model/v1", "kind": "finite_matrix",
                  "h0": complex_matrix_to_json(np.diag([1.0, 2.0])),
                  "f": complex_matrix_to_json(np.eye(2))},
        "lambda_grid": list(lambdas),
        "path": {"y0": 0.1, "ratio": 0.5, "count": 30},
        "s_grid": [-1.0, -0.5, 0.5, 1.0],
        "witnesses": {"random_count": 1},
        "seed": 3,
        "output_dir": str(out_dir),
    }
    doc.update(overrides)
    return doc


class TestValidate:
    def test_valid_config(self, tmp_path, capsys):
        path = write_config(tmp_path, diag_config(tmp_path / "out"))
        assert main(["validate", str(path)]) == 0
        assert "ok:" in capsys.readouterr().out

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", str(path)]) == 1
        assert "line" in capsys.readouterr().err

    def test_schema_violation(self, tmp_path, capsys):
        doc = diag_config(tmp_path / "out")
        doc["lambda_grid"] = "everywhere"
        path = write_config(tmp_path, doc)
        assert main(["validate", str(path)]) == 1
        assert "lambda_grid" in capsys.readouterr().err

    def test_model_by_file_reference(self, tmp_path):
        doc = diag_config(tmp_path / "out")
        (tmp_path / "model.json").write_text(json.dumps(doc["model"]))
        doc["model"] = "model.json"
        path = write_config(tmp_path, doc)
        assert main(["validate", str(path)]) == 0


class TestRun:
    def test_regular_grid_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = write_config(tmp_path, diag_config(out))
        assert main(["run", str(path)]) == 0
        stdout = capsys.readouterr().out
        assert "regular" in stdout
        assert (out / "verdicts.json").exists()
        assert (out / "config.resolved.json").exists()

    def test_out_flag_overrides_config(self, tmp_path):
        path = write_config(tmp_path, diag_config(tmp_path / "ignored"))
        target = tmp_path / "elsewhere"
        assert main(["run", str(path), "--out", str(target)]) == 0
        assert (target / "verdicts.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_inconclusive_grid_exits_two(self, tmp_path):
        doc = diag_config(tmp_path / "out")
        doc["model"] = {"schema": "spectral-lab/model/v1",
                       "kind": "free_jacobi", "sites": [0], "weights": [1.0]}
        doc["lambda_grid"] = [2.0]
        doc["n_max"] = 2
        doc["witnesses"] = {"random_count": 0}
        path = write_config(tmp_path, doc)
        assert main(["run", str(path)]) == 2

    def test_config_error_exits_one(self, tmp_path, capsys):
        doc = diag_config(tmp_path / "out")
        del doc["model"]
        path = write_config(tmp_path, doc)
        assert main(["run", str(path)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_jobs_flag(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, diag_config(out, lambdas=(5.0, 6.0)))
        assert main(["run", str(path), "--jobs", "2"]) == 0
        assert len(json.loads((out / "verdicts.json").read_text())) == 2


class TestPlot:
    def test_plots_rendered(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, diag_config(out))
        assert main(["run", str(path)]) == 0
        written = emit_plots(out)
        assert len(written) == 1
        svg = written[0].read_text()
        assert svg.lstrip().startswith("<?xml")
        assert (out / "plots" / "point_000.svg").exists()

    def test_plot_subcommand(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = write_config(tmp_path, diag_config(out))
        main(["run", str(path)])
        assert main(["plot", str(out)]) == 0
        assert "point_000.svg" in capsys.readouterr().out

    def test_missing_report_dir(self, tmp_path, capsys):
        assert main(["plot", str(tmp_path / "nowhere")]) == 1
        assert "plot error" in capsys.readouterr().err
