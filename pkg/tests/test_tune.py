import numpy as np
import pytest

from fraudlab.errors import (ConfigError, DataError, SearchError,
                             StratificationError)
from fraudlab.models import predict
from fraudlab.resample import SmoteConfig
from fraudlab.tune import (ParamGrid, balanced_class_weights,
                           default_forest_grid, expand_grid, fold_splits,
                           grid_search, sample_weights, stratified_kfold)


def test_balanced_weights_inverse_frequency():
    y = np.array([0] * 90 + [1] * 10)
    w = balanced_class_weights(y)
    assert w[0] == pytest.approx(100 / 180)
    assert w[1] == pytest.approx(100 / 20)
    vec = sample_weights(y, w)
    # each class carries the same total weight, summing to n
    assert float(vec[y == 0].sum()) == pytest.approx(50.0)
    assert float(vec[y == 1].sum()) == pytest.approx(50.0)
    assert float(vec.sum()) == pytest.approx(float(y.size))


def test_balanced_weights_unity_at_even_split():
    y = np.array([0, 1] * 25)
    w = balanced_class_weights(y)
    assert w == {0: 1.0, 1: 1.0}
    assert np.array_equal(sample_weights(y, w), np.ones(50))


def test_balanced_weights_need_two_classes():
    with pytest.raises(DataError):
        balanced_class_weights(np.zeros(5, dtype=np.int8))
    with pytest.raises(DataError):
        balanced_class_weights(np.array([]))


def test_stratified_kfold_sizes_within_one():
    y = np.array([0] * 70 + [1] * 13)
    folds = stratified_kfold(y, 3, seed=0)
    assert folds.shape == (83,)
    for label, count in ((0, 70), (1, 13)):
        per = np.bincount(folds[y == label], minlength=3)
        assert per.sum() == count
        assert per.max() - per.min() <= 1


def test_stratified_kfold_deterministic():
    y = np.array([0] * 40 + [1] * 8)
    a = stratified_kfold(y, 4, seed=3)
    b = stratified_kfold(y, 4, seed=3)
    c = stratified_kfold(y, 4, seed=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stratified_kfold_validation():
    y = np.array([0, 0, 0, 1, 1, 1])
    with pytest.raises(ConfigError):
        stratified_kfold(y, 1, seed=0)
    with pytest.raises(StratificationError):
        stratified_kfold(np.array([0, 0, 0, 1]), 2, seed=0)


def test_fold_splits_partition():
    y = np.array([0] * 20 + [1] * 10)
    folds = stratified_kfold(y, 5, seed=1)
    for train, test in fold_splits(folds, 5):
        assert np.intersect1d(train, test).size == 0
        assert np.array_equal(np.sort(np.concatenate([train, test])),
                              np.arange(30))


def test_param_grid_validation():
    with pytest.raises(ConfigError):
        ParamGrid({})
    with pytest.raises(ConfigError):
        ParamGrid({"n_estimators": []})
    with pytest.raises(ConfigError):
        ParamGrid("n_estimators=5")


def test_default_grid_has_eight_candidates():
    cands = expand_grid(default_forest_grid())
    assert len(cands) == 8
    seen = {(c["n_estimators"], c["max_depth"], c["min_samples_leaf"])
            for c in cands}
    assert len(seen) == 8
    assert all(c["class_weight"] == "balanced" for c in cands)


def test_expand_grid_order_last_axis_fastest():
    grid = ParamGrid({"a": [1, 2, 3], "b": ["x", "y"]})
    got = expand_grid(grid)
    assert got == [
        {"a": 1, "b": "x"}, {"a": 1, "b": "y"},
        {"a": 2, "b": "x"}, {"a": 2, "b": "y"},
        {"a": 3, "b": "x"}, {"a": 3, "b": "y"},
    ]


def _search_xy(n_maj=160, n_min=40, seed=0):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(0.0, 1.0, size=(n_maj, 4)),
                   rng.normal(2.2, 1.0, size=(n_min, 4))])
    y = np.concatenate([np.zeros(n_maj, dtype=np.int8),
                        np.ones(n_min, dtype=np.int8)])
    return x, y


def test_grid_search_singleton_grid():
    x, y = _search_xy()
    grid = ParamGrid({"n_estimators": [5], "max_depth": [4],
                      "class_weight": [None]})
    res = grid_search(x, y, grid=grid, k=3, seed=1)
    assert res.best_index == 0
    assert res.best_params == {"n_estimators": 5, "max_depth": 4,
                               "class_weight": None}
    assert len(res.candidates) == 1
    assert len(res.candidates[0].fold_f1) == 3
    assert res.n_fits == 4          # 1 candidate x 3 folds + refit
    assert res.model.params.n_estimators == 5
    # the refit model actually works
    acc = float(np.mean(predict(res.model, x) == y))
    assert acc > 0.8


def test_grid_search_prefers_deeper_trees_on_ring_data():
    # class = inside/outside a ring; stumps cannot express it
    rng = np.random.default_rng(5)
    x = rng.uniform(-2, 2, size=(600, 2))
    r = np.hypot(x[:, 0], x[:, 1])
    y = ((r > 0.8) & (r < 1.6)).astype(np.int8)
    grid = ParamGrid({"n_estimators": [10], "max_depth": [1, None],
                      "max_features": ["all"], "class_weight": [None]})
    res = grid_search(x, y, grid=grid, k=3, seed=0)
    assert res.best_params["max_depth"] is None
    deep = res.candidates[1].mean_f1
    shallow = res.candidates[0].mean_f1
    assert deep > shallow


def test_grid_search_tie_takes_earliest_candidate():
    # two copies of the same candidate produce different fold seeds but
    # the selection rule must keep the first on any exact tie; force the
    # tie with a deterministic, perfectly separable problem
    x = np.vstack([np.zeros((30, 2)), np.ones((30, 2))])
    y = np.concatenate([np.zeros(30, np.int8), np.ones(30, np.int8)])
    grid = ParamGrid({"n_estimators": [3, 3], "max_depth": [2],
                      "class_weight": [None], "bootstrap": [False]})
    res = grid_search(x, y, grid=grid, k=3, seed=2)
    assert res.candidates[0].mean_f1 == res.candidates[1].mean_f1 == 1.0
    assert res.best_index == 0


def test_grid_search_rejects_unknown_axis_before_fitting():
    x, y = _search_xy()
    with pytest.raises(ConfigError, match="unknown grid axes"):
        grid_search(x, y, grid=ParamGrid({"n_trees": [5]}), k=3, seed=0)


def test_grid_search_rejects_bad_class_weight():
    x, y = _search_xy()
    grid = ParamGrid({"n_estimators": [5], "class_weight": ["heavy"]})
    with pytest.raises(ConfigError, match="class_weight"):
        grid_search(x, y, grid=grid, k=3, seed=0)


def test_grid_search_deterministic():
    x, y = _search_xy(seed=9)
    grid = ParamGrid({"n_estimators": [4, 8], "max_depth": [3],
                      "class_weight": ["balanced"]})
    a = grid_search(x, y, grid=grid, k=3, seed=6)
    b = grid_search(x, y, grid=grid, k=3, seed=6)
    assert a.best_index == b.best_index
    assert [c.fold_f1 for c in a.candidates] == \
        [c.fold_f1 for c in b.candidates]
    assert np.array_equal(predict(a.model, x), predict(b.model, x))


def test_grid_search_with_per_fold_resampling():
    x, y = _search_xy(n_maj=150, n_min=30, seed=4)
    grid = ParamGrid({"n_estimators": [5], "max_depth": [4],
                      "class_weight": [None]})
    res = grid_search(x, y, grid=grid, k=3, seed=0,
                      smote_config=SmoteConfig(k_neighbors=3, seed=11))
    assert res.candidates[0].mean_f1 is not None
    assert res.n_fits == 4
    # refit data was balanced; the model still predicts sensibly
    assert 0.0 <= float(np.mean(predict(res.model, x))) <= 1.0


def test_grid_search_k_too_large_for_minority():
    x, y = _search_xy(n_maj=30, n_min=4)
    grid = ParamGrid({"n_estimators": [3]})
    with pytest.raises(StratificationError):
        grid_search(x, y, grid=grid, k=5, seed=0)


def test_grid_search_records_candidate_failure(monkeypatch):
    # a candidate whose fit blows up is recorded and excluded; the
    # surviving candidate still wins
    import fraudlab.tune as tune_mod
    from fraudlab.errors import FitError
    from fraudlab.models import fit_forest as real_fit

    def flaky(x, y, weights=None, params=None, _presort=None):
        if params is not None and params.n_estimators == 7:
            raise FitError("synthetic failure for n_estimators=7")
        return real_fit(x, y, weights, params, _presort=_presort)

    monkeypatch.setattr(tune_mod, "fit_forest", flaky)
    x, y = _search_xy()
    grid = ParamGrid({"n_estimators": [7, 3], "max_depth": [4],
                      "class_weight": [None]})
    res = grid_search(x, y, grid=grid, k=3, seed=0)
    assert res.candidates[0].status == "failed"
    assert "fold 0" in res.candidates[0].error
    assert res.candidates[0].mean_f1 is None
    assert res.candidates[1].status == "ok"
    assert res.best_index == 1
    assert res.model.params.n_estimators == 3


def test_grid_search_all_candidates_failed_raises(monkeypatch):
    import fraudlab.tune as tune_mod
    from fraudlab.errors import FitError

    def broken(*args, **kwargs):
        raise FitError("nothing fits")

    monkeypatch.setattr(tune_mod, "fit_forest", broken)
    x, y = _search_xy()
    grid = ParamGrid({"n_estimators": [3, 5], "class_weight": [None]})
    with pytest.raises(SearchError):
        grid_search(x, y, grid=grid, k=3, seed=0)


def test_grid_search_result_to_dict_round_trips():
    import json
    x, y = _search_xy()
    grid = ParamGrid({"n_estimators": [4], "max_depth": [3],
                      "class_weight": [None]})
    res = grid_search(x, y, grid=grid, k=3, seed=0)
    d = res.to_dict()
    assert d["n_candidates"] == 1 and d["n_fits"] == 4
    assert d["best_params"]["n_estimators"] == 4
    assert d["candidates"][0]["status"] == "ok"
    json.dumps(d)
