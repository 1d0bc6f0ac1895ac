"""End-to-end experiment runner: data, exploration, split, baseline models,
resampling, grid search, and artifact emission.

Every run writes run_manifest.json, even when a stage fails; the manifest
records the failing stage, per-stage timings, library versions, derived
seeds, and the headline metrics, so a run directory is self-describing.
"""

from __future__ import annotations

import dataclasses
import json
import platform
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .errors import ConfigError, FraudLabError
from .metrics import attach_roc_auc, metrics_from_cm, confusion_matrix, \
    render_report, roc_auc
from .models import (ForestParams, GbtParams, LogisticParams, TreeParams,
                     fit_forest, fit_gbt, fit_logistic, fit_tree, predict,
                     predict_proba, save_model)
from .prep import select_features, stratified_split, stratified_take
from .resample import SmoteConfig, smote
from .seeding import derive_seed
from .tune import ParamGrid, default_forest_grid, grid_search
from .txdata import (Dataset, GeneratorConfig, class_distribution, eda_summary,
                     generate, hypothesis_verdicts, load_csv)

BASELINE_MODELS = ("logistic", "tree", "forest", "gbt")

# stage-seed derivation constants; distinct per consumer so no two RNG
# streams in one run share entropy
_SEED_SUBSAMPLE = 1
_SEED_SPLIT = 2
_SEED_SMOTE = 3
_SEED_GRID = 4


@dataclass(frozen=True)
class SmoteSettings:
    enabled: bool = True
    config: SmoteConfig = field(default_factory=SmoteConfig)
    per_fold: bool = False


@dataclass(frozen=True)
class TuningSettings:
    enabled: bool = True
    grid: ParamGrid = field(default_factory=default_forest_grid)
    k: int = 3

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigError(f"tuning k must be >= 2, got {self.k}")


@dataclass(frozen=True)
class PipelineConfig:
    """One reproducible document holding every experiment parameter.

    Exactly one of csv_path / generator supplies the data. The baseline
    list may be empty only when tuning is enabled; a run that would fit
    nothing is a config error, not a silent no-op.
    """

    csv_path: str | None = None
    generator: GeneratorConfig | None = None
    out_dir: str = "out"
    seed: int = 42
    test_fraction: float = 0.1
    subsample: float | None = None
    threshold: float = 0.5
    models: tuple = BASELINE_MODELS
    model_params: dict = field(default_factory=dict)
    smote: SmoteSettings = field(default_factory=SmoteSettings)
    tuning: TuningSettings = field(default_factory=TuningSettings)
    top_destinations: int = 10

    def __post_init__(self) -> None:
        if (self.csv_path is None) == (self.generator is None):
            raise ConfigError(
                "exactly one data source required: csv_path or generator"
            )
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(
                f"threshold must be in (0, 1), got {self.threshold}"
            )
        if self.subsample is not None and not 0.0 < self.subsample <= 1.0:
            raise ConfigError(
                f"subsample must be in (0, 1], got {self.subsample}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.top_destinations < 1:
            raise ConfigError(
                f"top_destinations must be >= 1, got {self.top_destinations}"
            )
        unknown = [m for m in self.models if m not in BASELINE_MODELS]
        if unknown:
            raise ConfigError(
                f"unknown models {unknown}; choose from {list(BASELINE_MODELS)}"
            )
        if len(set(self.models)) != len(self.models):
            raise ConfigError(f"duplicate model names in {list(self.models)}")
        bad_params = set(self.model_params) - set(BASELINE_MODELS)
        if bad_params:
            raise ConfigError(f"model_params for unknown models {sorted(bad_params)}")
        if not self.models and not self.tuning.enabled:
            raise ConfigError("nothing to do: no baselines selected and tuning disabled")


def config_to_dict(config: PipelineConfig) -> dict:
    """JSON-serializable echo of the full configuration."""
    return {
        "csv_path": config.csv_path,
        "generator": dataclasses.asdict(config.generator)
        if config.generator else None,
        "out_dir": config.out_dir,
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "subsample": config.subsample,
        "threshold": config.threshold,
        "models": list(config.models),
        "model_params": {
            name: dataclasses.asdict(params)
            for name, params in config.model_params.items()
        },
        "smote": {
            "enabled": config.smote.enabled,
            "per_fold": config.smote.per_fold,
            **dataclasses.asdict(config.smote.config),
        },
        "tuning": {
            "enabled": config.tuning.enabled,
            "k": config.tuning.k,
            "grid": {k: list(v) for k, v in config.tuning.grid.axes.items()},
        },
        "top_destinations": config.top_destinations,
    }


@dataclass
class RunArtifacts:
    out_dir: Path
    manifest_path: Path
    paths: dict
    manifest: dict
    reports: dict
    cv_result: object | None = None


def _default_baseline_params(name: str, seed: int):
    if name == "logistic":
        return LogisticParams()
    if name == "tree":
        return TreeParams()
    if name == "forest":
        return ForestParams(n_estimators=15, seed=seed)
    if name == "gbt":
        return GbtParams()
    raise ConfigError(f"unknown model {name!r}")


_FITTERS = {
    "logistic": fit_logistic,
    "tree": fit_tree,
    "forest": fit_forest,
    "gbt": fit_gbt,
}


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _evaluate(model, x_test, y_test, threshold: float, name: str):
    """Score a model on the held-out split; AUC only when both classes occur."""
    pred = predict(model, x_test, threshold=threshold)
    report = metrics_from_cm(confusion_matrix(y_test, pred))
    if np.unique(y_test).size == 2:
        report = attach_roc_auc(report, roc_auc(y_test, predict_proba(model, x_test)))
    text, payload = render_report(report, name)
    return report, text, payload


class _StageTimer:
    def __init__(self) -> None:
        self.timings: dict[str, float] = {}

    def run(self, name: str, fn):
        t0 = time.perf_counter()
        out = fn()
        self.timings[name] = time.perf_counter() - t0
        return out


def run_pipeline(config: PipelineConfig) -> RunArtifacts:
    """Execute the configured experiment and write all artifacts to out_dir."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    timer = _StageTimer()
    paths: dict[str, Path] = {}
    reports: dict[str, object] = {}
    metrics_summary: dict[str, dict] = {"baselines": {}}
    seeds = {
        "master": config.seed,
        "subsample": derive_seed(config.seed, _SEED_SUBSAMPLE),
        "split": derive_seed(config.seed, _SEED_SPLIT),
        "smote": config.smote.config.seed,
        "grid": derive_seed(config.seed, _SEED_GRID),
    }
    manifest: dict = {
        "status": "pending",
        "config": config_to_dict(config),
        "seeds": seeds,
        "versions": _versions(),
        "stages": timer.timings,
        "audit": {},
        "metrics": metrics_summary,
        "artifacts": {},
    }
    manifest_path = out / "run_manifest.json"
    stage = "setup"
    cv = None
    try:
        stage = "load"
        if config.csv_path is not None:
            dataset = timer.run(stage, lambda: load_csv(config.csv_path))
        else:
            dataset = timer.run(stage, lambda: generate(config.generator))

        if config.subsample is not None and config.subsample < 1.0:
            stage = "subsample"
            dataset = timer.run(stage, lambda: dataset.select(
                stratified_take(dataset.is_fraud, config.subsample,
                                seeds["subsample"])))
        manifest["audit"]["rows"] = len(dataset)
        dist = class_distribution(dataset)
        manifest["audit"]["class_distribution"] = {
            "legit": dist.n_legit, "fraud": dist.n_fraud,
            "fraud_rate": dist.fraud_rate,
        }

        stage = "explore"
        def _explore():
            summary = eda_summary(dataset, config.top_destinations)
            payload = summary.to_dict()
            payload["hypotheses"] = hypothesis_verdicts(summary)
            paths["eda"] = out / "eda.json"
            _write_json(paths["eda"], payload)
            return payload
        eda_payload = timer.run(stage, _explore)

        stage = "features"
        x, y = timer.run(stage, lambda: select_features(dataset))

        stage = "split"
        split = timer.run(stage, lambda: stratified_split(
            x, y, config.test_fraction, seeds["split"]))
        assert np.intersect1d(split.train_indices, split.test_indices).size == 0
        paths["split_summary"] = out / "split_summary.json"
        _write_json(paths["split_summary"], split.summary())

        # resampling input is exactly the training partition; held-out rows
        # never reach smote, which the audit block records
        stage = "resample"
        x_fit, y_fit = split.x_train, split.y_train
        resample_audit = {
            "enabled": config.smote.enabled,
            "per_fold": config.smote.per_fold,
            "test_rows_resampled": False,
            "train_rows_in": int(split.y_train.size),
        }
        if config.smote.enabled and not config.smote.per_fold:
            def _resample():
                assert split.y_train.size + split.y_test.size == y.size
                return smote(split.x_train, split.y_train, config.smote.config)
            x_fit, y_fit = timer.run(stage, _resample)
            resample_audit["train_rows_out"] = int(y_fit.size)
            resample_audit["class_counts_out"] = {
                "legit": int(np.sum(y_fit == 0)),
                "fraud": int(np.sum(y_fit == 1)),
            }
        manifest["audit"]["resample"] = resample_audit

        stage = "baselines"
        for name in config.models:
            params = config.model_params.get(
                name, _default_baseline_params(name, config.seed))
            fitter = _FITTERS[name]
            model = timer.run(f"fit_{name}", lambda f=fitter, p=params:
                              f(split.x_train, split.y_train, None, p))
            report, text, payload = _evaluate(
                model, split.x_test, split.y_test, config.threshold, name)
            reports[name] = report
            paths[f"report_{name}_txt"] = out / f"report_{name}.txt"
            paths[f"report_{name}_json"] = out / f"report_{name}.json"
            paths[f"report_{name}_txt"].write_text(text + "\n", encoding="utf-8")
            _write_json(paths[f"report_{name}_json"], payload)
            metrics_summary["baselines"][name] = {
                "fraud_f1": report.class1.f1,
                "fraud_precision": report.class1.precision,
                "fraud_recall": report.class1.recall,
                "accuracy": report.accuracy,
                "roc_auc": report.roc_auc,
            }

        if config.tuning.enabled:
            stage = "tuning"
            per_fold_cfg = config.smote.config \
                if config.smote.enabled and config.smote.per_fold else None
            cv = timer.run(stage, lambda: grid_search(
                x_fit, y_fit, config.tuning.grid, config.tuning.k,
                seed=seeds["grid"], smote_config=per_fold_cfg))
            paths["cv_results"] = out / "cv_results.json"
            _write_json(paths["cv_results"], cv.to_dict())

            stage = "evaluate_tuned"
            report, text, payload = timer.run(stage, lambda: _evaluate(
                cv.model, split.x_test, split.y_test, config.threshold,
                "tuned_forest"))
            reports["tuned_forest"] = report
            paths["report_tuned_forest_txt"] = out / "report_tuned_forest.txt"
            paths["report_tuned_forest_json"] = out / "report_tuned_forest.json"
            paths["report_tuned_forest_txt"].write_text(text + "\n",
                                                        encoding="utf-8")
            _write_json(paths["report_tuned_forest_json"], payload)
            metrics_summary["tuned_forest"] = {
                "fraud_f1": report.class1.f1,
                "fraud_precision": report.class1.precision,
                "fraud_recall": report.class1.recall,
                "accuracy": report.accuracy,
                "roc_auc": report.roc_auc,
                "cv_mean_f1": cv.candidates[cv.best_index].mean_f1,
                "best_params": cv.best_params,
            }

            stage = "save_model"
            paths["best_model"] = out / "best_model.json"
            save_model(cv.model, paths["best_model"])

        manifest["status"] = "ok"
        manifest["eda"] = {
            "fraud_rate": eda_payload["fraud_rate"],
            "hypotheses": eda_payload["hypotheses"],
        }
        return RunArtifacts(
            out_dir=out,
            manifest_path=manifest_path,
            paths=dict(paths),
            manifest=manifest,
            reports=reports,
            cv_result=cv,
        )
    except Exception as exc:
        manifest["status"] = f"failed:{stage}"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        manifest["artifacts"] = {k: str(v) for k, v in paths.items()}
        _write_json(manifest_path, manifest)


def _versions() -> dict:
    info = {
        "fraudlab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "backend": kernels.BACKEND,
    }
    try:
        import numba
        info["numba"] = numba.__version__
    except ImportError:
        info["numba"] = None
    return info
