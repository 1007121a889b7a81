import contextlib
import io
import json

import numpy as np

from matstrata.cli import run


def invoke(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = run(list(argv))
    return code, out.getvalue()


def write_matrix(path, A):
    A = np.asarray(A, dtype=complex)
    doc = {
        "n": A.shape[0],
        "rows": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }
    path.write_text(json.dumps(doc))
    return str(path)


class TestWeyrCommand:
    def test_zero_matrix(self, tmp_path):
        path = write_matrix(tmp_path / "zero4.json", np.zeros((4, 4)))
        code, out = invoke("weyr", "--matrix", path, "--lambda", "0")
        assert code == 0
        assert json.loads(out)["weyr"] == [4]

    def test_complex_lambda(self, tmp_path):
        path = write_matrix(tmp_path / "m.json", np.diag([1j, 1j]))
        code, out = invoke("weyr", "--matrix", path, "--lambda", "1j")
        assert code == 0 and json.loads(out)["weyr"] == [2]

    def test_ambiguity_exit_code(self, tmp_path):
        path = write_matrix(tmp_path / "m.json", np.diag([1.0, 1e-8]))
        code, _ = invoke("weyr", "--matrix", path, "--lambda", "0")
        assert code == 2


class TestCodimCommand:
    def test_congruence_identity(self, tmp_path):
        path = write_matrix(tmp_path / "id2.json", np.eye(2))
        code, out = invoke("codim", "--action", "congr", "--matrix", path)
        assert code == 0 and json.loads(out)["codim"] == 1

    def test_env_tolerance_override(self, tmp_path, monkeypatch):
        # eigenvalue pair split by 1e-6: visible at the default tolerance,
        # folded together at the loose one
        path = write_matrix(tmp_path / "m.json", np.diag([1.0, 2.0, 2.0 + 1e-6]))
        code, out = invoke("codim", "--action", "sim", "--matrix", path)
        assert code == 0 and json.loads(out)["codim"] == 3
        monkeypatch.setenv("STRATA_TOL", "1e-3")
        code, out = invoke("codim", "--action", "sim", "--matrix", path)
        assert code == 0 and json.loads(out)["codim"] == 5


class TestGraphCommand:
    def test_nilpotent_chain(self):
        code, out = invoke("graph", "sim", "--n", "4", "--nilpotent")
        doc = json.loads(out)
        assert code == 0
        assert [v["notation"] for v in doc["vertices"]] == [
            "0000", "0²00", "0²0²", "0³0", "0⁴",
        ]

    def test_dot_output(self):
        code, out = invoke("graph", "bundle", "--n", "2", "--format", "dot")
        assert code == 0 and out.startswith("digraph")

    def test_congruence_parametric(self):
        code, out = invoke("graph", "congr", "--n", "2", "--kind", "bundles")
        doc = json.loads(out)
        assert code == 0 and len(doc["families"]) == 6 and len(doc["arrows"]) == 7

    def test_star_graph_size_guard(self):
        code, _ = invoke("graph", "star", "--n", "3")
        assert code == 1

    def test_out_of_range(self):
        code, _ = invoke("graph", "sim", "--n", "12")
        assert code == 1

    def test_byte_stable(self):
        a = invoke("graph", "bundle", "--n", "4")
        b = invoke("graph", "bundle", "--n", "4")
        assert a == b


class TestTemplateCommand:
    def test_sim_ascii(self):
        code, out = invoke(
            "template", "sim", "--jordan", "(0)^3 (0)^2", "--format", "ascii"
        )
        assert code == 0
        assert out.splitlines()[2].split() == ["*"] * 5

    def test_congr_form_file(self, tmp_path):
        doc = {"star": False, "blocks": [{"kind": "N", "size": 1}, {"kind": "N", "size": 1}]}
        path = tmp_path / "form.json"
        path.write_text(json.dumps(doc))
        code, out = invoke("template", "congr", "--form", str(path))
        assert code == 0
        assert sum(1 for e in json.loads(out)["entries"] if e["kind"] == "star") == 4

    def test_star_form_file(self, tmp_path):
        doc = {"star": True, "blocks": [{"kind": "U", "size": 2, "param": [0, 1]}]}
        path = tmp_path / "form.json"
        path.write_text(json.dumps(doc))
        code, out = invoke("template", "star", "--form", str(path))
        assert code == 0
        kinds = {e["kind"] for e in json.loads(out)["entries"]}
        assert "star" in kinds

    def test_missing_argument(self):
        assert invoke("template", "sim")[0] == 1


class TestReduceCommand:
    def test_round_trip(self, tmp_path, rng):
        E = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        E *= 1e-4 / np.linalg.norm(E)
        path = write_matrix(tmp_path / "e.json", E)
        code, out = invoke("reduce", "--jordan", "(0)^3 (0)^2", "--pert", path)
        doc = json.loads(out)
        assert code == 0 and doc["pattern_ok"] and doc["residual"] <= 1e-8
        S = np.array([[complex(a, b) for a, b in row] for row in doc["S"]["rows"]])
        assert np.linalg.norm(S - np.eye(5)) < 1e-2

    def test_symbolic_labels_rejected(self, tmp_path):
        path = write_matrix(tmp_path / "e.json", np.zeros((2, 2)))
        assert invoke("reduce", "--jordan", "a^2", "--pert", path)[0] == 1


class TestClassifyCommand:
    def test_display(self, tmp_path):
        path = write_matrix(tmp_path / "m.json", np.array([[0, 2], [1, 0]]))
        code, out = invoke("classify", "--matrix", path)
        doc = json.loads(out)
        assert code == 0 and doc["display"] == "H1(2)"

    def test_size_guard(self, tmp_path):
        path = write_matrix(tmp_path / "m.json", np.zeros((4, 4)))
        assert invoke("classify", "--matrix", path)[0] == 1


class TestSurveyAndWitness:
    def test_survey_smoke(self):
        code, out = invoke(
            "survey", "--jordan", "(0)^2", "--eps", "1e-3",
            "--trials", "25", "--seed", "5",
        )
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and sum(doc["observed_counts"].values()) == 25

    def test_survey_full_listing(self):
        code, out = invoke(
            "survey", "--jordan", "(0)^2", "--eps", "1e-3",
            "--trials", "4", "--seed", "5", "--full",
        )
        assert code == 0 and len(json.loads(out)["observed"]) == 4

    def test_witness(self):
        code, out = invoke("witness", "--from", "(0)^2 (0)^2", "--to", "(0)^4")
        doc = json.loads(out)
        assert code == 0 and doc["found"] and len(doc["positions"]) == 1

    def test_witness_precondition(self):
        assert invoke("witness", "--from", "(0)^4", "--to", "(0)^2 (0)^2")[0] == 1


class TestInputValidation:
    def test_missing_file(self):
        assert invoke("weyr", "--matrix", "/does/not/exist.json", "--lambda", "0")[0] == 1

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert invoke("weyr", "--matrix", str(path), "--lambda", "0")[0] == 1

    def test_non_square(self, tmp_path):
        path = tmp_path / "rect.json"
        path.write_text(json.dumps({"n": 2, "rows": [[[0, 0], [0, 0]]]}))
        assert invoke("weyr", "--matrix", str(path), "--lambda", "0")[0] == 1

    def test_non_finite(self, tmp_path):
        path = tmp_path / "inf.json"
        path.write_text(json.dumps({"n": 1, "rows": [[[1e999, 0]]]}))
        assert invoke("weyr", "--matrix", str(path), "--lambda", "0")[0] == 1

    def test_unknown_subcommand(self):
        assert invoke("frobnicate")[0] == 1

    def test_bad_compact_notation(self):
        assert invoke("survey", "--jordan", "a^", "--eps", "1e-3",
                      "--trials", "1", "--seed", "0")[0] == 1
