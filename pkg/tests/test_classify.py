import json
import math

import numpy as np
import pytest

from spectral_lab import (
    BoundaryPath,
    ConfigParseError,
    STATUS_INCONCLUSIVE,
    STATUS_REGULAR,
    STATUS_SEMI_REGULAR,
    STATUS_SINGULAR_EVIDENCE,
    classify_point,
    parse_config,
    probe_limit,
    random_witnesses,
    run_experiment,
)
from spectral_lab.serialization import complex_matrix_to_json


def finite_model_doc(h0, f):
    return {"schema": "spectral-lab/model/v1", "kind": "finite_matrix",
            "h0": complex_matrix_to_json(h0), "f": complex_matrix_to_json(f)}


def experiment_doc(model_doc, lambdas, **overrides):
    doc = {
        "schema": "spectral-lab/experiment/v1",
        "model": model_doc,
        "lambda_grid": list(lambdas),
        "path": {"y0": 0.1, "ratio": 0.5, "count": 30},
        "r_grid": [0.25, 1.0, 4.0, 16.0],
        "s_grid": [round(-2.0 + 0.5 * k, 10) for k in range(9)],
        "witnesses": {"random_count": 2},
        "seed": 7,
    }
    doc.update(overrides)
    return doc


DIAG_DOC = finite_model_doc(np.diag([1.0, 2.0]), np.eye(2))
SCALAR_DOC = {"schema": "spectral-lab/model/v1", "kind": "scalar_compact",
              "lambda0": 0.0, "weights": [1.0 / k for k in range(1, 51)]}
LATTICE_DOC = {"schema": "spectral-lab/model/v1", "kind": "free_jacobi",
               "sites": [0], "weights": [1.0]}


class TestParseConfig:
    def test_minimal_document(self):
        config = parse_config(experiment_doc(DIAG_DOC, [5.0]))
        assert config.lambda_grid == [5.0]
        assert config.path.count == 30
        assert len(config.witnesses) == 2

    def test_schema_required(self):
        doc = experiment_doc(DIAG_DOC, [5.0])
        doc["schema"] = "something/else"
        with pytest.raises(ConfigParseError, match="schema"):
            parse_config(doc)

    def test_bad_tolerance_rejected(self):
        doc = experiment_doc(DIAG_DOC, [5.0],
                             tolerances={"probe": -1.0})
        with pytest.raises(ConfigParseError, match="probe"):
            parse_config(doc)

    def test_grid_object_form(self):
        doc = experiment_doc(DIAG_DOC, [5.0],
                             s_grid={"start": -1.0, "stop": 1.0, "count": 5})
        config = parse_config(doc)
        assert config.s_grid == [-1.0, -0.5, 0.0, 0.5, 1.0]

    def test_witness_shape_checked(self):
        doc = experiment_doc(DIAG_DOC, [5.0],
                             witnesses={"explicit": [[[[1, 0]]]]})
        with pytest.raises(ConfigParseError, match="explicit"):
            parse_config(doc)

    def test_random_witnesses_are_unit_norm_hermitian(self):
        for _, j in random_witnesses(4, 3, seed=11):
            assert np.abs(j - j.conj().T).max() < 1e-14
            assert abs(np.linalg.norm(j, 2) - 1.0) < 1e-12


class TestClassifyPoint:
    def test_resolvent_set_point_regular(self):
        config = parse_config(experiment_doc(DIAG_DOC, [5.0]))
        verdict = classify_point(config.model, 5.0, config)
        assert verdict.status == STATUS_REGULAR
        assert verdict.witness is None
        ev = verdict.evidence
        assert ev.l_hat == 0.0 and ev.n_hat == 0.0
        assert ev.vanishing_resonance_count == 0
        assert ev.upsilon_dim == 0
        assert ev.f_intersection_dim == 0
        assert ev.eigen_multiplicity_at_lambda == 0
        assert ev.oscillation_max < 1e-6
        assert verdict.errors == []

    def test_scalar_compact_singularity_evidence(self):
        config = parse_config(experiment_doc(SCALAR_DOC, [0.0], n_max=10))
        verdict = classify_point(config.model, 0.0, config)
        assert verdict.status == STATUS_SINGULAR_EVIDENCE
        assert math.isinf(verdict.evidence.l_hat)
        assert math.isinf(verdict.evidence.n_hat)
        assert verdict.evidence.eigen_multiplicity_at_lambda == 50

    def test_simple_eigenvalue_semi_regular_via_shift(self):
        doc = finite_model_doc(np.diag([0.0, 7.0]), np.eye(2))
        config = parse_config(experiment_doc(doc, [0.0]))
        verdict = classify_point(config.model, 0.0, config)
        assert verdict.status == STATUS_SEMI_REGULAR
        assert verdict.witness.startswith("s=")
        assert verdict.evidence.upsilon_dim == 1
        assert verdict.evidence.vanishing_resonance_count == 1
        assert verdict.evidence.eigen_multiplicity_at_lambda == 1

    def test_band_edge_inconclusive_when_counts_capped(self):
        config = parse_config(experiment_doc(LATTICE_DOC, [2.0], n_max=2))
        verdict = classify_point(config.model, 2.0, config)
        assert verdict.status == STATUS_INCONCLUSIVE
        assert verdict.evidence.l_hat == 0.0

    def test_band_edge_singular_evidence_with_unit_count(self):
        config = parse_config(experiment_doc(LATTICE_DOC, [2.0], n_max=1))
        verdict = classify_point(config.model, 2.0, config)
        assert verdict.status == STATUS_SINGULAR_EVIDENCE

    def test_adding_witnesses_never_downgrades(self):
        doc = finite_model_doc(np.diag([0.0, 7.0]), np.eye(2))
        bare = parse_config(experiment_doc(doc, [0.0],
                                           witnesses={"random_count": 0}))
        extra = parse_config(experiment_doc(doc, [0.0],
                                            witnesses={"random_count": 4}))
        v_bare = classify_point(bare.model, 0.0, bare)
        v_extra = classify_point(extra.model, 0.0, extra)
        assert v_bare.status == STATUS_SEMI_REGULAR
        assert v_extra.status == STATUS_SEMI_REGULAR

    def test_regular_point_norm_trace_flat(self):
        config = parse_config(experiment_doc(DIAG_DOC, [5.0]))
        verdict = probe_limit(config.model, None, config.path_at(5.0))
        tail = verdict.norm_trace[-5:]
        assert max(tail) - min(tail) < 1e-7

    def test_scalar_norm_trace_slope_minus_one(self):
        config = parse_config(experiment_doc(SCALAR_DOC, [0.0]))
        verdict = probe_limit(config.model, None, config.path_at(0.0))
        slope = np.polyfit(np.log(verdict.offsets),
                           np.log(verdict.norm_trace), 1)[0]
        assert abs(slope + 1.0) < 1e-6


class TestRunExperiment:
    def test_minimal_run_writes_one_verdict(self, tmp_path):
        doc = experiment_doc(DIAG_DOC, [5.0])
        bundle = run_experiment(doc, out_dir=tmp_path / "out")
        assert len(bundle.verdicts) == 1
        data = json.loads(bundle.verdict_path.read_text())
        assert len(data) == 1
        assert data[0]["status"] == "regular"
        assert data[0]["schema"] == "spectral-lab/verdict/v1"
        assert (tmp_path / "out" / "traces").exists()
        assert bundle.exit_code == 0

    def test_trace_files_have_expected_columns(self, tmp_path):
        doc = experiment_doc(DIAG_DOC, [5.0])
        bundle = run_experiment(doc, out_dir=tmp_path / "out")
        probe = bundle.out_dir / "traces" / "point_000_probe.csv"
        header = probe.read_text().splitlines()[0].split(",")
        assert header[:3] == ["y", "norm", "cauchy_residual"]
        assert any(h.startswith("eig_count_R") for h in header)
        assert any(h.startswith("s_count_R") for h in header)
        reso = bundle.out_dir / "traces" / "point_000_resonances.csv"
        assert reso.read_text().splitlines()[0].split(",") == \
            ["y", "j", "re_r", "im_r", "at_infinity", "matching_cost"]

    def test_lattice_grid_classifies_band_and_exterior(self, tmp_path):
        doc = experiment_doc(LATTICE_DOC,
                             [float(x) for x in np.linspace(-3.0, 3.0, 21)],
                             witnesses={"random_count": 0})
        bundle = run_experiment(doc, out_dir=tmp_path / "out")
        assert len(bundle.verdicts) == 21
        for verdict in bundle.verdicts:
            assert verdict.status == STATUS_REGULAR, verdict.lam

    def test_malformed_config_rejected_without_outputs(self, tmp_path):
        doc = experiment_doc(DIAG_DOC, [5.0])
        del doc["model"]
        out = tmp_path / "out"
        with pytest.raises(ConfigParseError):
            run_experiment(doc, out_dir=out)
        assert not out.exists() or not any(out.iterdir())

    def test_thread_pool_matches_serial(self, tmp_path):
        doc = experiment_doc(DIAG_DOC, [5.0, 6.0, 7.0])
        serial = run_experiment(doc, out_dir=tmp_path / "serial")
        threaded = run_experiment(doc, out_dir=tmp_path / "threaded", jobs=3)
        assert serial.verdict_path.read_text() == \
            threaded.verdict_path.read_text()

    def test_conjecture_traces_written(self, tmp_path):
        doc = experiment_doc(DIAG_DOC, [5.0],
                             conjecture_psi=[[[1.0, 0.0], [0.0, 0.0]]])
        bundle = run_experiment(doc, out_dir=tmp_path / "out")
        body = json.loads((bundle.out_dir / "conjectures.json").read_text())
        assert body["label"] == "conjecture experiments"
        entry = body["entries"][0]
        assert entry["lambda"] == 5.0
        # <e1, T e1> = 1/(1 - z); check the first trace row
        y0, re, im = entry["trace"][0]
        want = 1.0 / (1.0 - complex(5.0, y0))
        assert abs(complex(re, im) - want) < 1e-12

    def test_infinite_evidence_serialized_as_string(self, tmp_path):
        doc = experiment_doc(SCALAR_DOC, [0.0], n_max=10,
                             s_grid=[-1.0, 1.0],
                             witnesses={"random_count": 1})
        bundle = run_experiment(doc, out_dir=tmp_path / "out")
        data = json.loads(bundle.verdict_path.read_text())
        assert data[0]["evidence"]["l_hat"] == "inf"
        assert data[0]["status"] == "essentially_singular_evidence"
