import json

import pytest

from gapgp import dataio
from gapgp.cli import main
from gapgp.types import Channel


@pytest.fixture(scope="module")
def sampled(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {}
    for variant in ("mrna", "protein"):
        data, truth = d / f"{variant}-data.csv", d / f"{variant}-truth.csv"
        rc = main(["sample", "--model", variant, "--seed", "3", "--grid", "11", "--n-train", "30",
                   "--sa-iterations", "500", "--out-data", str(data), "--out-truth", str(truth)])
        assert rc == 0
        paths[variant] = (data, truth)
    return d, paths


def test_sample_is_byte_identical(tmp_path):
    args = ["sample", "--model", "mrna", "--seed", "7", "--grid", "9", "--n-train", "10", "--sa-iterations", "200"]
    for tag in ("a", "b"):
        assert main(args + ["--out-data", str(tmp_path / f"{tag}.csv"), "--out-truth", str(tmp_path / f"{tag}t.csv")]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "at.csv").read_bytes() == (tmp_path / "bt.csv").read_bytes()


def test_sample_boundary_behaviour(sampled):
    _, paths = sampled
    mrna = [r for r in dataio.load_csv(paths["mrna"][1]).records if r.channel is Channel.Y]
    edge = [r.value for r in mrna if r.x in (0.0, 1.0) or r.t == 0.0]
    assert max(abs(v) for v in edge) <= 1e-6
    prot = [r for r in dataio.load_csv(paths["protein"][1]).records if r.channel is Channel.Y]
    assert max(abs(r.value) for r in prot if r.x == 0.0) > 1e-3


def test_fit_then_predict(sampled, tmp_path):
    _, paths = sampled
    fit_json = tmp_path / "fit.json"
    assert main(["fit", "--model", "protein", "--data", str(paths["protein"][0]), "--freeze", "mech",
                 "--maxiter", "40", "--out", str(fit_json)]) == 0
    doc = json.loads(fit_json.read_text())
    assert doc["hyperparameters"]["mech"] == {"s_rate": 1.0, "lam": 0.1, "diff": 0.01}
    assert doc["loglik"] >= doc["initial_loglik"]
    assert len(doc["training"]) == 60

    query = tmp_path / "q.csv"
    dataio.save_design([[0.5, 0.5]], query)
    pred = tmp_path / "pred.json"
    assert main(["predict", "--fit", str(fit_json), "--query", str(query), "--out", str(pred)]) == 0
    post = json.loads(pred.read_text())["posterior"]
    assert len(post["U"]["mean"]) == 1 and len(post["Y"]["variance"]) == 1

    assert main(["predict", "--fit", str(fit_json), "--grid", "4", "--channels", "Y", "--out", str(pred)]) == 0
    post = json.loads(pred.read_text())["posterior"]
    assert set(post) == {"Y"} and len(post["Y"]["mean"]) == 16


def test_predict_metrics_against_truth(sampled, tmp_path):
    d, paths = sampled
    fit_json = tmp_path / "fit.json"
    main(["fit", "--model", "mrna", "--n-terms", "10", "--data", str(paths["mrna"][0]), "--freeze", "mech",
          "--freeze", "kernel", "--out", str(fit_json)])
    truth = dataio.load_csv(paths["mrna"][1]).records
    query = tmp_path / "q.csv"
    dataio.save_design(sorted({(r.x, r.t) for r in truth if 0 < r.x < 1 and r.t > 0}), query)
    pred = tmp_path / "pred.json"
    assert main(["predict", "--fit", str(fit_json), "--query", str(query), "--truth", str(paths["mrna"][1]),
                 "--out", str(pred)]) == 0
    metrics = json.loads(pred.read_text())["metrics"]
    assert metrics["U"]["q2"] > 0.8 and metrics["Y"]["q2"] > 0.9


def test_eval_with_config_file(sampled, tmp_path):
    _, paths = sampled
    conf = tmp_path / "c.toml"
    conf.write_text('model = "protein"\nfreeze = ["mech"]\nmaxiter = 30\nseeds = 2\ntrain-frac = 0.5\n')
    out = tmp_path / "eval.json"
    assert main(["eval", "--config", str(conf), "--data", str(paths["protein"][0]), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["train_frac"] == 0.5
    assert set(doc["aggregate"]) == {"u-only", "y-only", "both"}
    assert set(doc["aggregate"]["both"]["U"]["q2"]) == {"mean", "std", "median"}
    assert len(doc["per_seed"]["both"]) == 2


def test_flags_override_config(tmp_path):
    conf = tmp_path / "c.toml"
    conf.write_text("n-points = 3\n")
    out = tmp_path / "d.csv"
    assert main(["design", "--config", str(conf), "--n-points", "5", "--out", str(out)]) == 0
    assert dataio.load_design(out).shape == (5, 2)


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--seeds", "0", "--data", "{data}", "--out", "{tmp}/x.json"],
        ["fit", "--preset", "nope", "--data", "{data}", "--out", "{tmp}/x.json"],
        ["fit", "--data", "{tmp}/missing.csv", "--out", "{tmp}/x.json"],
        ["eval", "--config", "{tmp}/bad.toml", "--data", "{data}", "--out", "{tmp}/x.json"],
    ],
)
def test_config_errors_exit_2(sampled, tmp_path, argv):
    (tmp_path / "bad.toml").write_text("not_an_option = 1\n")
    data = sampled[1]["protein"][0]
    argv = [a.format(data=data, tmp=tmp_path) for a in argv]
    assert main(argv) == 2


def test_numerical_failure_exit_3(sampled, tmp_path, monkeypatch):
    from gapgp import cli
    from gapgp.gp import NumericalError

    def broken(*args, **kwargs):
        raise NumericalError("matrix not positive definite")

    monkeypatch.setattr(cli, "condition", broken)
    rc = main(["fit", "--data", str(sampled[1]["protein"][0]), "--freeze", "mech", "--freeze", "kernel",
               "--out", str(tmp_path / "f.json")])
    assert rc == 3


def test_presets_are_loaded(sampled, tmp_path):
    _, paths = sampled
    out = tmp_path / "f.json"
    assert main(["fit", "--preset", "becker-kni", "--freeze", "mech", "--freeze", "kernel",
                 "--data", str(paths["protein"][0]), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["hyperparameters"]["mech"] == {"s_rate": 0.0783, "lam": 0.077, "diff": 0.0125}


def test_verify_exit_code(tmp_path, capsys):
    out = tmp_path / "v.json"
    rc = main(["verify", "--profile", "quick", "--out", str(out)])
    doc = json.loads(out.read_text())
    assert rc == (0 if doc["passed"] else 4)
    assert "[PASS] specfun-vs-oracle" in capsys.readouterr().out
