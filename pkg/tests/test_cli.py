import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from fraudlab import cli
from fraudlab.models import TreeParams, fit_tree, save_model
from fraudlab.prep import select_features
from fraudlab.txdata import load_csv


def _write_config(tmp_path, name="config.json", **body):
    p = tmp_path / name
    p.write_text(json.dumps(body), encoding="utf-8")
    return str(p)


def _small_run_config(tmp_path, **over):
    body = dict(
        generator={"n_rows": 6_000, "fraud_rate": 0.01, "seed": 3},
        out_dir=str(tmp_path / "out"),
        seed=11,
        models=["tree"],
        tuning={"enabled": True, "k": 3,
                "grid": {"n_estimators": [5], "max_depth": [6],
                         "class_weight": ["balanced"]}},
    )
    body.update(over)
    return _write_config(tmp_path, **body)


def test_generate_writes_csv_and_echoes_distribution(tmp_path, capsys):
    out = tmp_path / "tx.csv"
    rc = cli.main(["generate", "--out", str(out), "--rows", "5000",
                   "--fraud-rate", "0.004", "--seed", "9"])
    assert rc == 0
    captured = capsys.readouterr().out
    assert f"wrote {out} (5000 rows)" in captured
    assert "fraud=20" in captured
    assert "fraud_rate=0.004" in captured
    lines = out.read_text().splitlines()
    assert len(lines) == 5001          # header + rows
    assert lines[0].startswith("step,type,amount,nameOrig")


def test_generate_same_seed_same_bytes(tmp_path, capsys):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    for path, seed in ((a, "5"), (b, "5"), (c, "6")):
        assert cli.main(["generate", "--out", str(path), "--rows", "3000",
                         "--fraud-rate", "0.01", "--seed", seed]) == 0
    h = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
    assert h(a) == h(b)
    assert h(a) != h(c)


def test_generate_requires_rows(tmp_path, capsys):
    rc = cli.main(["generate", "--out", str(tmp_path / "x.csv")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_explore_prints_tables_and_verdicts(tmp_path, capsys):
    csv = tmp_path / "tx.csv"
    cli.main(["generate", "--out", str(csv), "--rows", "8000",
              "--fraud-rate", "0.01", "--seed", "4"])
    capsys.readouterr()
    rc = cli.main(["explore", "--data", str(csv),
                   "--out", str(tmp_path / "eda")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Class distribution" in out
    assert "Transactions by type" in out
    assert "Top fraud destinations" in out
    assert "[H1] corr(amount, is_fraud) > 0: True" in out
    assert "[H2] all fraud rows are TRANSFER or CASH_OUT: True" in out
    assert "[H3] destinations with repeated fraud" in out
    payload = json.loads((tmp_path / "eda" / "eda.json").read_text())
    assert payload["class_counts"] == {"legit": 7920, "fraud": 80}
    assert payload["hypotheses"]["H2_all_fraud_in_transfer_or_cashout"] is True


def test_explore_not_evaluable_without_fraud(tmp_path, capsys, small_dataset):
    from fraudlab.txdata import write_csv
    legit = small_dataset.select(
        np.flatnonzero(small_dataset.is_fraud == 0)[:800])
    csv = tmp_path / "legit.csv"
    write_csv(legit, csv)
    rc = cli.main(["explore", "--data", str(csv),
                   "--out", str(tmp_path / "eda")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "[H1] corr(amount, is_fraud) > 0: not-evaluable" in out
    assert "[H2] all fraud rows are TRANSFER or CASH_OUT: not-evaluable" in out
    assert "(no fraud rows)" in out


def test_explore_subsample(tmp_path, capsys):
    csv = tmp_path / "tx.csv"
    cli.main(["generate", "--out", str(csv), "--rows", "8000",
              "--fraud-rate", "0.01", "--seed", "4"])
    capsys.readouterr()
    rc = cli.main(["explore", "--data", str(csv), "--subsample", "0.5",
                   "--seed", "1", "--out", str(tmp_path / "eda")])
    assert rc == 0
    payload = json.loads((tmp_path / "eda" / "eda.json").read_text())
    assert payload["class_counts"] == {"legit": 3960, "fraud": 40}


def test_run_writes_artifacts_and_summary(tmp_path, capsys):
    rc = cli.main(["run", "--config", _small_run_config(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "tree: fraud F1" in out
    assert "tuned_forest: fraud F1" in out
    out_dir = tmp_path / "out"
    manifest = json.loads((out_dir / "run_manifest.json").read_text())
    assert manifest["status"] == "ok"
    for name in ("eda.json", "split_summary.json", "report_tree.txt",
                 "cv_results.json", "report_tuned_forest.json",
                 "best_model.json"):
        assert (out_dir / name).exists(), name


def test_run_flag_overrides_beat_config(tmp_path, capsys):
    cfg = _small_run_config(tmp_path, models=["tree", "logistic"])
    rc = cli.main(["run", "--config", cfg, "--models", "gbt",
                   "--out", str(tmp_path / "o2"), "--seed", "21"])
    assert rc == 0
    manifest = json.loads((tmp_path / "o2" / "run_manifest.json").read_text())
    assert manifest["config"]["models"] == ["gbt"]
    assert manifest["config"]["seed"] == 21
    assert set(manifest["metrics"]["baselines"]) == {"gbt"}


def test_run_no_smote_flag(tmp_path, capsys):
    rc = cli.main(["run", "--config", _small_run_config(tmp_path),
                   "--no-smote", "--out", str(tmp_path / "o3")])
    assert rc == 0
    manifest = json.loads((tmp_path / "o3" / "run_manifest.json").read_text())
    assert manifest["audit"]["resample"]["enabled"] is False


def test_tune_skips_baselines(tmp_path, capsys):
    rc = cli.main(["tune", "--config", _small_run_config(tmp_path),
                   "--out", str(tmp_path / "t")])
    assert rc == 0
    manifest = json.loads((tmp_path / "t" / "run_manifest.json").read_text())
    assert manifest["metrics"]["baselines"] == {}
    assert manifest["metrics"]["tuned_forest"]["fraud_f1"] >= 0.0
    assert (tmp_path / "t" / "best_model.json").exists()
    assert not (tmp_path / "t" / "report_tree.txt").exists()


def test_evaluate_round_trip(tmp_path, capsys):
    csv = tmp_path / "tx.csv"
    cli.main(["generate", "--out", str(csv), "--rows", "4000",
              "--fraud-rate", "0.01", "--seed", "2"])
    ds = load_csv(csv)
    x, y = select_features(ds)
    model = fit_tree(x, y, params=TreeParams(max_depth=6))
    mpath = tmp_path / "model.json"
    save_model(model, mpath)
    capsys.readouterr()
    rc = cli.main(["evaluate", "--model", str(mpath), "--data", str(csv),
                   "--out", str(tmp_path / "ev")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Model: tree" in out
    assert "Fraud [1]" in out
    report = json.loads((tmp_path / "ev" / "report_evaluate.json").read_text())
    assert report["model"] == "tree"
    assert report["class1"]["f1"] == 1.0        # scored on training rows
    assert (tmp_path / "ev" / "report_evaluate.txt").exists()


def test_exit_code_2_on_config_error(tmp_path, capsys):
    cfg = _write_config(tmp_path, generator={"n_rows": 1000},
                        folds=5)          # unknown top-level key
    assert cli.main(["run", "--config", cfg]) == 2
    assert "unknown config keys" in capsys.readouterr().err
    assert cli.main(["run", "--config", _small_run_config(tmp_path),
                     "--subsample", "1.5"]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "absent.json")]) == 2


def test_exit_code_3_on_data_error(tmp_path, capsys):
    cfg = _small_run_config(tmp_path)
    rc = cli.main(["run", "--config", cfg, "--data",
                   str(tmp_path / "missing.csv")])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_exit_code_4_on_fit_error(tmp_path, capsys, small_dataset):
    # single-class data reaches the logistic fitter (it needs both
    # classes) once resampling and tuning are switched off
    from fraudlab.txdata import write_csv
    legit = small_dataset.select(
        np.flatnonzero(small_dataset.is_fraud == 0)[:600])
    csv = tmp_path / "legit.csv"
    write_csv(legit, csv)
    cfg = _write_config(
        tmp_path,
        csv_path=str(csv),
        out_dir=str(tmp_path / "out4"),
        models=["logistic"],
        smote={"enabled": False},
        tuning={"enabled": False},
    )
    rc = cli.main(["run", "--config", cfg])
    assert rc == 4
    assert "error:" in capsys.readouterr().err
    manifest = json.loads(
        (tmp_path / "out4" / "run_manifest.json").read_text())
    assert manifest["status"] == "failed:baselines"


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "fraudlab", "generate", "--out", str(out),
         "--rows", "500", "--fraud-rate", "0.01", "--seed", "1"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert "wrote" in proc.stdout
    assert out.exists()


def test_unknown_model_name_rejected(tmp_path, capsys):
    assert cli.main(["run", "--config", _small_run_config(tmp_path),
                     "--models", "tree,svm"]) == 2
    assert "unknown models" in capsys.readouterr().err
