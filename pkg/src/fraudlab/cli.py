"""Batch command-line interface.

Subcommands: generate, explore, run, tune, evaluate. A JSON config file
supplies the full experiment document; individual flags override single
keys. Exit codes: 0 ok, 2 configuration error, 3 data error, 4 fit error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, FraudLabError
from .metrics import attach_roc_auc, confusion_matrix, metrics_from_cm, \
    render_report, roc_auc
from .models import (ForestParams, GbtParams, LogisticParams, TreeParams,
                     load_model, predict, predict_proba)
from .pipeline import (_SEED_SMOTE, BASELINE_MODELS, PipelineConfig,
                       SmoteSettings, TuningSettings, config_to_dict,
                       run_pipeline)
from .prep import select_features
from .resample import SmoteConfig
from .seeding import derive_seed
from .tune import ParamGrid, default_forest_grid
from .txdata import (EDA_CORR_COLUMNS, GeneratorConfig, TxType,
                     class_distribution, eda_summary, generate,
                     hypothesis_verdicts, load_csv, write_csv)

_TOP_KEYS = {
    "csv_path", "generator", "out_dir", "seed", "test_fraction", "subsample",
    "threshold", "models", "model_params", "smote", "tuning",
    "top_destinations",
}

_PARAM_TYPES = {
    "logistic": LogisticParams,
    "tree": TreeParams,
    "forest": ForestParams,
    "gbt": GbtParams,
}


def _build(section: str, cls, kwargs: dict):
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad {section} settings: {exc}") from exc


def _model_params_from(raw: dict) -> dict:
    out = {}
    for name, kwargs in raw.items():
        cls = _PARAM_TYPES.get(name)
        if cls is None:
            raise ConfigError(
                f"model_params for unknown model {name!r}; "
                f"choose from {list(_PARAM_TYPES)}"
            )
        kwargs = dict(kwargs)
        if name == "forest" and isinstance(kwargs.get("tree"), dict):
            kwargs["tree"] = _build("forest.tree", TreeParams, kwargs["tree"])
        out[name] = _build(f"model_params.{name}", cls, kwargs)
    return out


def config_from_dict(d: dict) -> PipelineConfig:
    """Build a PipelineConfig from a JSON-shaped mapping.

    Any key absent from the document gets its dataclass default; the SMOTE
    seed, when unspecified, derives from the master seed so one seed value
    pins the whole run.
    """
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    seed = int(d.get("seed", 42))

    generator = None
    if d.get("generator") is not None:
        generator = _build("generator", GeneratorConfig, dict(d["generator"]))

    smote_d = dict(d.get("smote", {}))
    enabled = bool(smote_d.pop("enabled", True))
    per_fold = bool(smote_d.pop("per_fold", False))
    if "seed" not in smote_d:
        smote_d["seed"] = derive_seed(seed, _SEED_SMOTE)
    smote = SmoteSettings(
        enabled=enabled,
        config=_build("smote", SmoteConfig, smote_d),
        per_fold=per_fold,
    )

    tuning_d = dict(d.get("tuning", {}))
    t_enabled = bool(tuning_d.pop("enabled", True))
    k = int(tuning_d.pop("k", 3))
    grid = ParamGrid(tuning_d.pop("grid")) if "grid" in tuning_d \
        else default_forest_grid()
    if tuning_d:
        raise ConfigError(f"unknown tuning keys: {sorted(tuning_d)}")
    tuning = TuningSettings(enabled=t_enabled, grid=grid, k=k)

    kwargs = dict(
        csv_path=d.get("csv_path"),
        generator=generator,
        seed=seed,
        smote=smote,
        tuning=tuning,
        model_params=_model_params_from(dict(d.get("model_params", {}))),
    )
    if "out_dir" in d:
        kwargs["out_dir"] = str(d["out_dir"])
    if "test_fraction" in d:
        kwargs["test_fraction"] = float(d["test_fraction"])
    if d.get("subsample") is not None:
        kwargs["subsample"] = float(d["subsample"])
    if "threshold" in d:
        kwargs["threshold"] = float(d["threshold"])
    if "models" in d:
        kwargs["models"] = tuple(d["models"])
    if "top_destinations" in d:
        kwargs["top_destinations"] = int(d["top_destinations"])
    return PipelineConfig(**kwargs)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return d


def _merged_config(args: argparse.Namespace) -> PipelineConfig:
    d = _load_config_file(args.config)
    if getattr(args, "data", None):
        d["csv_path"] = args.data
        d.pop("generator", None)
    if getattr(args, "out", None):
        d["out_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
    if getattr(args, "subsample", None) is not None:
        d["subsample"] = args.subsample
    if getattr(args, "threshold", None) is not None:
        d["threshold"] = args.threshold
    if getattr(args, "models", None) is not None:
        d["models"] = [m.strip() for m in args.models.split(",") if m.strip()]
    if getattr(args, "smote", None) is not None or \
            getattr(args, "per_fold_smote", False):
        smote_d = dict(d.get("smote", {}))
        if args.smote is not None:
            smote_d["enabled"] = args.smote
        if args.per_fold_smote:
            smote_d["per_fold"] = True
        d["smote"] = smote_d
    return config_from_dict(d)


def _format_count_table(rows: list[tuple], headers: tuple) -> str:
    widths = [max(len(str(r[i])) for r in [headers, *rows])
              for i in range(len(headers))]
    lines = []
    for r in [headers, *rows]:
        cells = [f"{str(v):>{w}}" if i else f"{str(v):<{w}}"
                 for i, (v, w) in enumerate(zip(r, widths))]
        lines.append("  " + "  ".join(cells))
    return "\n".join(lines)


def render_eda_text(summary, verdicts: dict) -> str:
    """Plain-text exploration tables plus the three hypothesis verdicts."""
    legit, fraud = summary.class_counts
    total = legit + fraud
    out = ["Class distribution"]
    out.append(_format_count_table(
        [("legit", legit, f"{legit / total:.4%}"),
         ("fraud", fraud, f"{fraud / total:.4%}")],
        ("class", "rows", "share")))
    out.append("")
    out.append("Transactions by type")
    rows = []
    for t in TxType:
        s = summary.per_type[t]
        rows.append((t.label, s.n_rows, s.n_fraud,
                     f"{s.share_of_fraud:.2%}" if fraud else "-"))
    out.append(_format_count_table(
        rows, ("type", "rows", "fraud", "share_of_fraud")))
    out.append("")
    out.append("Top fraud destinations")
    if summary.top_dest_fraud_counts:
        out.append(_format_count_table(
            [(d, c) for d, c in summary.top_dest_fraud_counts],
            ("dest_id", "fraud_rows")))
    else:
        out.append("  (no fraud rows)")
    amount_i = EDA_CORR_COLUMNS.index("amount")
    fraud_i = EDA_CORR_COLUMNS.index("is_fraud")
    corr = summary.correlation[amount_i, fraud_i]
    out.append("")
    h1 = verdicts["H1_amount_fraud_correlation_positive"]
    h2 = verdicts["H2_all_fraud_in_transfer_or_cashout"]
    out.append(f"[H1] corr(amount, is_fraud) > 0: {h1}"
               + (f" (r={corr:.4f})" if h1 != "not-evaluable" else ""))
    out.append(f"[H2] all fraud rows are TRANSFER or CASH_OUT: {h2}")
    out.append(f"[H3] destinations with repeated fraud in top "
               f"{len(summary.top_dest_fraud_counts)}: "
               f"{verdicts['H3_repeat_fraud_destinations']}")
    return "\n".join(out)


def _resolve_dataset(args: argparse.Namespace, d: dict):
    if getattr(args, "data", None):
        return load_csv(args.data)
    if d.get("csv_path"):
        return load_csv(d["csv_path"])
    if d.get("generator"):
        gen = _build("generator", GeneratorConfig, dict(d["generator"]))
        return generate(gen)
    raise ConfigError("no data source: pass --data or a config with "
                      "csv_path/generator")


def cmd_generate(args: argparse.Namespace) -> int:
    d = _load_config_file(args.config)
    gen_d = dict(d.get("generator", d if d else {}))
    if args.rows is not None:
        gen_d["n_rows"] = args.rows
    if args.fraud_rate is not None:
        gen_d["fraud_rate"] = args.fraud_rate
    if args.seed is not None:
        gen_d["seed"] = args.seed
    if "n_rows" not in gen_d:
        raise ConfigError("generate needs --rows or a config with n_rows")
    config = _build("generator", GeneratorConfig, gen_d)
    dataset = generate(config)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(dataset, out)
    dist = class_distribution(dataset)
    print(f"wrote {out} ({len(dataset)} rows)")
    print(f"class_distribution: legit={dist.n_legit} fraud={dist.n_fraud} "
          f"fraud_rate={dist.fraud_rate:.6g}")
    return 0


def cmd_explore(args: argparse.Namespace) -> int:
    d = _load_config_file(args.config)
    dataset = _resolve_dataset(args, d)
    if args.subsample is not None and args.subsample < 1.0:
        from .prep import stratified_take
        seed = args.seed if args.seed is not None else int(d.get("seed", 42))
        dataset = dataset.select(
            stratified_take(dataset.is_fraud, args.subsample, seed))
    summary = eda_summary(dataset, int(d.get("top_destinations", 10)))
    verdicts = hypothesis_verdicts(summary)
    payload = summary.to_dict()
    payload["hypotheses"] = verdicts
    out_dir = Path(args.out or d.get("out_dir", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    eda_path = out_dir / "eda.json"
    eda_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(render_eda_text(summary, verdicts))
    print(f"\nwrote {eda_path}")
    return 0


def _print_run_summary(arts) -> None:
    metrics = arts.manifest["metrics"]
    for name, vals in metrics.get("baselines", {}).items():
        print(f"{name}: fraud F1 {vals['fraud_f1']:.4f} "
              f"accuracy {vals['accuracy']:.6f}")
    tuned = metrics.get("tuned_forest")
    if tuned:
        print(f"tuned_forest: fraud F1 {tuned['fraud_f1']:.4f} "
              f"accuracy {tuned['accuracy']:.6f} "
              f"cv_mean_f1 {tuned['cv_mean_f1']:.4f}")
    print(f"artifacts in {arts.out_dir} "
          f"({len(arts.manifest['artifacts'])} files + run_manifest.json)")


def cmd_run(args: argparse.Namespace) -> int:
    config = _merged_config(args)
    arts = run_pipeline(config)
    _print_run_summary(arts)
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    """Tuning-only run: skip the baselines, keep every other stage."""
    config = _merged_config(args)
    tuning = TuningSettings(enabled=True, grid=config.tuning.grid,
                            k=config.tuning.k)
    import dataclasses
    config = dataclasses.replace(config, models=(), tuning=tuning)
    arts = run_pipeline(config)
    _print_run_summary(arts)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    dataset = load_csv(args.data)
    x, y = select_features(dataset)
    threshold = args.threshold if args.threshold is not None else 0.5
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"threshold must be in (0, 1), got {threshold}")
    pred = predict(model, x, threshold=threshold)
    report = metrics_from_cm(confusion_matrix(y, pred))
    if np.unique(y).size == 2:
        report = attach_roc_auc(report, roc_auc(y, predict_proba(model, x)))
    text, payload = render_report(report, model.kind)
    print(text)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report_evaluate.txt").write_text(text + "\n",
                                                     encoding="utf-8")
        (out_dir / "report_evaluate.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"\nwrote {out_dir / 'report_evaluate.txt'} and .json")
    return 0


def _add_common_flags(p: argparse.ArgumentParser, *, tuning: bool) -> None:
    p.add_argument("--config", help="JSON experiment document")
    p.add_argument("--data", help="PaySim-schema CSV path (overrides config)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--subsample", type=float,
                   help="stratified row fraction in (0, 1]")
    if tuning:
        p.add_argument("--smote", action=argparse.BooleanOptionalAction,
                       default=None,
                       help="toggle minority oversampling of the training split")
        p.add_argument("--per-fold-smote", dest="per_fold_smote",
                       action="store_true",
                       help="resample inside each CV fold instead of once up front")
        p.add_argument("--models",
                       help=f"comma list from {','.join(BASELINE_MODELS)}")
        p.add_argument("--threshold", type=float,
                       help="decision threshold in (0, 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraudlab",
        description="Fraud-detection experiments on PaySim-schema data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic transaction CSV")
    p.add_argument("--out", default="transactions.csv", help="CSV path")
    p.add_argument("--rows", type=int, help="number of rows")
    p.add_argument("--fraud-rate", dest="fraud_rate", type=float,
                   help="fraud fraction in (0, 1)")
    p.add_argument("--seed", type=int, help="generator seed")
    p.add_argument("--config", help="JSON with generator settings")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("explore", help="print exploration tables, write eda.json")
    p.add_argument("--config", help="JSON experiment document")
    p.add_argument("--data", help="PaySim-schema CSV path")
    p.add_argument("--out", help="output directory (default out)")
    p.add_argument("--seed", type=int, help="subsample seed")
    p.add_argument("--subsample", type=float,
                   help="stratified row fraction in (0, 1]")
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("run", help="full pipeline: baselines, smote, tuning")
    _add_common_flags(p, tuning=True)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("tune", help="pipeline without baselines")
    _add_common_flags(p, tuning=True)
    p.set_defaults(fn=cmd_tune)

    p = sub.add_parser("evaluate", help="score a saved model on a CSV")
    p.add_argument("--model", required=True, help="saved model JSON")
    p.add_argument("--data", required=True, help="PaySim-schema CSV path")
    p.add_argument("--threshold", type=float, help="decision threshold")
    p.add_argument("--out", help="directory for report files")
    p.set_defaults(fn=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FraudLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 1)


if __name__ == "__main__":
    sys.exit(main())
