import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from sca_kit import ResponseMatrix, load_connectivity, save_matrix
from sca_kit.cli import cli, parse_angle

GIBBS = ["--n-sweeps", "40", "--burn-in", "20"]


def invoke(*args):
    return CliRunner().invoke(cli, [str(a) for a in args])


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rng = np.random.default_rng(0)
    X = np.abs(rng.standard_normal((30, 8)))
    save_matrix(ResponseMatrix.from_array(X), tmp_path / "x.csv")
    save_matrix(ResponseMatrix.from_array(X), tmp_path / "x.bin")
    return tmp_path


def tree(root):
    root = Path(root)
    out = {}
    for p in sorted(root.rglob("*")):
        if p.is_file():
            data = p.read_bytes()
            if p.name == "manifest.json":
                meta = json.loads(data)
                meta.pop("wall_time_s")
                data = json.dumps(meta, sort_keys=True).encode()
            out[str(p.relative_to(root))] = data
    return out


def test_decompose_writes_factorization(workdir):
    res = invoke("decompose", "--method", "bnmf", "--components", 3, "--runs", 1, "--seed", 7, *GIBBS, "x.csv", "out")
    assert res.exit_code == 0, res.output
    names = {p.name for p in Path("out").iterdir()}
    assert {"responses.bin", "weights.bin", "meta.json", "manifest.json"} <= names
    meta = json.loads(Path("out/meta.json").read_text())
    assert meta["method"] == "bnmf" and meta["seed"] == 7 and meta["c"] == 3


def test_missing_input_exit_1_names_path(workdir):
    res = invoke("decompose", "nope.csv", "out")
    assert res.exit_code == 1
    err = json.loads(res.stderr.strip().splitlines()[-1])
    assert "nope.csv" in err["message"]


def test_components_zero_is_usage_error(workdir):
    assert invoke("decompose", "--components", 0, "x.csv", "out").exit_code == 2


def test_unknown_method_is_usage_error(workdir):
    assert invoke("decompose", "--method", "ica", "x.csv", "out").exit_code == 2


def test_bad_data_exit_1(workdir):
    Path("bad.csv").write_text("stimulus,a,b\ns1,1,2\ns2,x,3\n")
    res = invoke("decompose", "bad.csv", "out")
    assert res.exit_code == 1
    assert json.loads(res.stderr.strip())["error"] == "ParseError"


def test_nmf_on_negative_data_exit_1(workdir):
    save_matrix(ResponseMatrix.from_array(-np.ones((4, 3)) + np.eye(4, 3)), Path("neg.csv"))
    res = invoke("decompose", "--method", "nmf", "-c", 2, "neg.csv", "out")
    assert res.exit_code == 1
    assert json.loads(res.stderr.strip())["error"] == "NegativeInputError"


def test_multiple_runs_get_subdirectories(workdir):
    res = invoke("decompose", "--method", "nmf", "-c", 2, "--runs", 3, "--n-iter", 20, "x.bin", "out")
    assert res.exit_code == 0, res.output
    for i in range(3):
        assert (Path("out") / f"run_{i:03d}" / "weights.bin").exists()
        assert (Path("out") / f"run_{i:03d}" / "manifest.json").exists()


def test_manifest_contents(workdir):
    invoke("decompose", "--method", "pca", "-c", 2, "x.csv", "out")
    manifest = json.loads(Path("out/manifest.json").read_text())
    assert manifest["command"] == "decompose"
    assert manifest["params"]["components"] == 2
    import hashlib

    assert manifest["inputs"]["x.csv"] == hashlib.sha256(Path("x.csv").read_bytes()).hexdigest()
    assert "responses.bin" in manifest["outputs"]
    assert manifest["wall_time_s"] >= 0


def test_align_sca_identical_files(workdir):
    assert invoke("icm", "-c", 2, "--runs", 3, *GIBBS, "x.bin", "icm").exit_code == 0
    shutil.copy("icm/icm.bin", "icm_b.bin")
    res = invoke("align", "--metric", "sca", "icm/icm.bin", "icm_b.bin")
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    assert out["value"] == 1.0 and out["metric"] == "sca"
    assert list(out) == sorted(out)


def test_align_cms_permutation(workdir):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((12, 4))
    save_matrix(ResponseMatrix.from_array(X), Path("a.csv"))
    save_matrix(ResponseMatrix.from_array(X[:, [2, 0, 3, 1]]), Path("b.csv"))
    res = invoke("align", "--metric", "cms", "a.csv", "b.csv")
    out = json.loads(res.output)
    assert out["value"] == pytest.approx(1.0)
    assert out["permutation"] == [1, 3, 0, 2]


def test_align_rsa_and_ledger(workdir):
    for _ in range(2):
        res = invoke("align", "--metric", "rsa", "--rdm-metric", "euclidean", "--ledger", "led.csv", "--out", "al", "x.csv", "x.bin")
        assert res.exit_code == 0, res.output
    lines = Path("led.csv").read_text().splitlines()
    assert lines[0].startswith("metric,value") and len(lines) == 3
    assert json.loads(Path("al/result.json").read_text())["value"] == pytest.approx(1.0)


def test_align_rsa_precomputed_behavioral(workdir):
    rng = np.random.default_rng(2)
    v = rng.random((6, 6))
    v = v + v.T
    np.fill_diagonal(v, 0)
    Path("beh.csv").write_text(
        "behavioral," + ",".join(f"s{i}" for i in range(6)) + "\n"
        + "\n".join(f"s{i}," + ",".join(repr(float(e)) for e in row) for i, row in enumerate(v)) + "\n"
    )
    res = invoke("align", "--metric", "rsa", "--precomputed", "beh.csv", "beh.csv")
    assert json.loads(res.output)["value"] == 1.0
    assert load_connectivity("beh.csv").kind == "behavioral"


def test_align_encoding(workdir):
    res = invoke("align", "--metric", "encoding", "x.csv", "x.csv")
    assert json.loads(res.output)["value"] > 0.99


def test_align_missing_metric_usage(workdir):
    assert invoke("align", "x.csv", "x.csv").exit_code == 2


def test_sparsity_command(workdir):
    invoke("decompose", "--method", "nmf", "-c", 2, "--n-iter", 50, "x.csv", "f")
    res = invoke("sparsity", "f")
    assert res.exit_code == 0, res.output
    report = json.loads(Path("f/sparsity/sparsity.json").read_text())
    assert set(report) == {"w_report", "r_report", "method"}
    rows = Path("f/sparsity/sparsity_components.csv").read_text().splitlines()
    assert rows[0] == "matrix,component,hoyer,kurtosis,skewness,flag" and len(rows) == 5


def test_config_file_and_flag_override(workdir):
    Path("c.toml").write_text("[latent]\nm = 20\nn = 5\nk = 2\n[experiment]\nmethods = ['pca']\n")
    assert invoke("simulate", "--config", "c.toml", "--experiment", "recovery", "--n", 6, "sim").exit_code == 0
    params = json.loads(Path("sim/manifest.json").read_text())["params"]
    assert params["m"] == 20 and params["n"] == 6 and params["methods"] == ["pca"]


def test_config_values_are_validated(workdir):
    Path("c.toml").write_text("components = 0\n")
    assert invoke("decompose", "--config", "c.toml", "x.csv", "out").exit_code == 2


def test_burn_in_must_be_below_sweeps(workdir):
    assert invoke("decompose", "--n-sweeps", 10, "--burn-in", 10, "x.csv", "out").exit_code == 2


def test_parse_angle():
    assert parse_angle("pi/20") == pytest.approx(np.pi / 20)
    assert parse_angle("3*pi/4") == pytest.approx(3 * np.pi / 4)
    assert parse_angle("0.25") == 0.25
    assert parse_angle(0.5) == 0.5


def test_jobs_env_default(workdir, monkeypatch):
    monkeypatch.setenv("SCA_KIT_JOBS", "3")
    invoke("decompose", "--method", "pca", "-c", 2, "x.csv", "out")
    assert json.loads(Path("out/manifest.json").read_text())["params"]["jobs"] == 3


def test_module_entry_point_exit_codes(workdir):
    run = lambda *a: subprocess.run([sys.executable, "-m", "sca_kit", *a], capture_output=True, text=True)
    assert run("--help").returncode == 0
    assert run("decompose", "-c", "0", "x.csv", "o").returncode == 2
    missing = run("decompose", "missing.bin", "o")
    assert missing.returncode == 1 and "missing.bin" in missing.stderr


RERUNS = {
    "decompose-bnmf": ["decompose", "--method", "bnmf", "-c", 3, *GIBBS, "x.csv", "out"],
    "decompose-snmf": ["decompose", "--method", "snmf", "-c", 3, "--runs", 2, "--n-iter", 50, "x.csv", "out"],
    "decompose-pca": ["decompose", "--method", "pca", "-c", 3, "x.csv", "out"],
    "consensus": ["consensus", "-c", 2, "--runs", 3, *GIBBS, "x.bin", "out"],
    "icm": ["icm", "-c", 2, "--runs", 3, "--csv", *GIBBS, "x.bin", "out"],
    "align": ["align", "--metric", "encoding", "--out", "out", "x.csv", "x.bin"],
    "simulate-data": ["simulate", "--m", 20, "--n", 5, "--k", 2, "--n-seeds", 2, "out"],
    "simulate-recovery": ["simulate", "--experiment", "recovery", "--m", 20, "--n", 5, "--k", 2, *GIBBS, "out"],
    "simulate-rotation": ["simulate", "--experiment", "rotation", "--m", 20, "--n", 5, "--k", 2, "--plane-counts", "0,10", *GIBBS, "out"],
    "sweep": ["sweep", "--m", 20, "--n", 5, "--k", 2, "--plane-counts", "0,5,10", "--thetas", "pi/20", "--n-runs-icm", 2, *GIBBS, "--out", "out"],
}


@pytest.mark.parametrize("name", sorted(RERUNS))
def test_rerun_is_byte_identical(tmp_path, monkeypatch, name):
    trees = []
    for rep in ("a", "b"):
        d = tmp_path / rep
        d.mkdir()
        monkeypatch.chdir(d)
        X = np.abs(np.random.default_rng(0).standard_normal((30, 8)))
        save_matrix(ResponseMatrix.from_array(X), d / "x.csv")
        save_matrix(ResponseMatrix.from_array(X), d / "x.bin")
        res = invoke(*RERUNS[name], "--seed", 3)
        assert res.exit_code == 0, res.output + str(res.exception)
        trees.append(tree(d / "out"))
    assert trees[0] == trees[1]
    assert trees[0]


def test_sparsity_rerun_identical(workdir):
    invoke("decompose", "--method", "nmf", "-c", 2, "--n-iter", 50, "x.csv", "f")
    invoke("sparsity", "f", "--out", "s1")
    invoke("sparsity", "f", "--out", "s2")
    for name in ("sparsity.json", "sparsity_components.csv"):
        assert Path("s1", name).read_bytes() == Path("s2", name).read_bytes()
