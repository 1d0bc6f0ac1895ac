"""Model serialization to a versioned JSON document.

Layout: {format_version: 1, kind, params, payload}. Floats pass through
json's shortest round-trip encoding, so a load returns bitwise-equal
parameters. Documents with any other format_version are rejected.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from ..errors import PersistenceError
from .forest import ForestModel, ForestParams
from .gbt import GbtModel, GbtParams, GbtRound
from .logistic import LogisticModel, LogisticParams
from .tree import TreeModel, TreeParams

FORMAT_VERSION = 1


def _tree_nodes(m: TreeModel) -> dict:
    return {
        "feature": m.feature.tolist(),
        "threshold": m.threshold.tolist(),
        "left": m.left.tolist(),
        "right": m.right.tolist(),
        "leaf_w0": m.leaf_w0.tolist(),
        "leaf_w1": m.leaf_w1.tolist(),
    }


def _payload(model) -> dict:
    base = {
        "feature_columns": list(model.feature_columns),
        "n_features": int(model.n_features),
    }
    if isinstance(model, LogisticModel):
        base.update(
            coef=model.coef.tolist(),
            intercept=model.intercept,
            n_iter=model.n_iter,
            converged=model.converged,
            grad_inf_norm=model.grad_inf_norm,
        )
    elif isinstance(model, TreeModel):
        base["nodes"] = _tree_nodes(model)
    elif isinstance(model, ForestModel):
        base["trees"] = [
            {"seed": t.params.seed, "nodes": _tree_nodes(t)} for t in model.trees
        ]
    elif isinstance(model, GbtModel):
        base.update(
            base_score_logit=model.base_score_logit,
            train_log_loss=list(model.train_log_loss),
            trees=[
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in model.trees
            ],
        )
    else:
        raise PersistenceError(f"cannot serialize object of type {type(model)!r}")
    return base


def model_to_dict(model) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "params": dataclasses.asdict(model.params),
        "payload": _payload(model),
    }


def save_model(model, path) -> None:
    doc = model_to_dict(model)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _require(doc: dict, key: str):
    try:
        return doc[key]
    except (KeyError, TypeError):
        raise PersistenceError(f"model document is missing {key!r}") from None


def _nodes_arrays(nodes: dict) -> dict:
    try:
        return {
            "feature": np.asarray(nodes["feature"], dtype=np.int32),
            "threshold": np.asarray(nodes["threshold"], dtype=np.float64),
            "left": np.asarray(nodes["left"], dtype=np.int32),
            "right": np.asarray(nodes["right"], dtype=np.int32),
            "leaf_w0": np.asarray(nodes["leaf_w0"], dtype=np.float64),
            "leaf_w1": np.asarray(nodes["leaf_w1"], dtype=np.float64),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise PersistenceError(f"malformed tree nodes: {exc}") from exc


def _build_params(cls, raw: dict):
    if not isinstance(raw, dict):
        raise PersistenceError(f"params must be an object, got {type(raw)!r}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise PersistenceError(f"bad {cls.__name__} fields: {exc}") from exc


def model_from_dict(doc: dict):
    if not isinstance(doc, dict):
        raise PersistenceError("model document must be a JSON object")
    version = _require(doc, "format_version")
    if version != FORMAT_VERSION:
        raise PersistenceError(
            f"unsupported format_version {version!r}; this build reads "
            f"{FORMAT_VERSION}"
        )
    kind = _require(doc, "kind")
    params_raw = _require(doc, "params")
    payload = _require(doc, "payload")
    if not isinstance(payload, dict):
        raise PersistenceError("payload must be a JSON object")
    try:
        cols = tuple(payload["feature_columns"])
        n_features = int(payload["n_features"])
    except (KeyError, TypeError, ValueError) as exc:
        raise PersistenceError(f"malformed payload header: {exc}") from exc

    try:
        if kind == "logistic":
            params = _build_params(LogisticParams, params_raw)
            return LogisticModel(
                params=params,
                coef=np.asarray(payload["coef"], dtype=np.float64),
                intercept=float(payload["intercept"]),
                n_iter=int(payload["n_iter"]),
                converged=bool(payload["converged"]),
                grad_inf_norm=float(payload["grad_inf_norm"]),
                feature_columns=cols,
            )
        if kind == "tree":
            params = _build_params(TreeParams, params_raw)
            return TreeModel(
                params=params,
                n_features=n_features,
                feature_columns=cols,
                **_nodes_arrays(payload["nodes"]),
            )
        if kind == "forest":
            if not isinstance(params_raw, dict) or "tree" not in params_raw:
                raise PersistenceError("forest params must include 'tree'")
            tree_params = _build_params(TreeParams, params_raw["tree"])
            outer = {k: v for k, v in params_raw.items() if k != "tree"}
            params = _build_params(
                ForestParams, {**outer, "tree": tree_params}
            )
            trees = []
            for entry in payload["trees"]:
                per_tree = dataclasses.replace(
                    tree_params, seed=int(entry["seed"])
                )
                trees.append(TreeModel(
                    params=per_tree,
                    n_features=n_features,
                    feature_columns=cols,
                    **_nodes_arrays(entry["nodes"]),
                ))
            return ForestModel(
                params=params,
                trees=tuple(trees),
                n_features=n_features,
                feature_columns=cols,
            )
        if kind == "gbt":
            params = _build_params(GbtParams, params_raw)
            rounds = []
            for entry in payload["trees"]:
                rounds.append(GbtRound(
                    feature=np.asarray(entry["feature"], dtype=np.int32),
                    threshold=np.asarray(entry["threshold"], dtype=np.float64),
                    left=np.asarray(entry["left"], dtype=np.int32),
                    right=np.asarray(entry["right"], dtype=np.int32),
                    value=np.asarray(entry["value"], dtype=np.float64),
                ))
            return GbtModel(
                params=params,
                base_score_logit=float(payload["base_score_logit"]),
                trees=tuple(rounds),
                train_log_loss=tuple(
                    float(v) for v in payload["train_log_loss"]
                ),
                n_features=n_features,
                feature_columns=cols,
            )
    except PersistenceError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise PersistenceError(f"malformed {kind!r} payload: {exc}") from exc
    raise PersistenceError(f"unknown model kind {kind!r}")


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise PersistenceError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)
