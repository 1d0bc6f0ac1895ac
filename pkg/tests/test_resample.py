import numpy as np
import pytest

from fraudlab.errors import ConfigError, ResampleError
from fraudlab.resample import SmoteConfig, minority_knn, smote


def _imbalanced(n_min=40, n_maj=400, seed=5):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(0.0, 1.0, size=(n_maj, 3)),
                   rng.normal(3.0, 1.0, size=(n_min, 3))])
    y = np.concatenate([np.zeros(n_maj, dtype=np.int8),
                        np.ones(n_min, dtype=np.int8)])
    return x, y


def test_smote_config_validation():
    with pytest.raises(ConfigError):
        SmoteConfig(k_neighbors=0)
    with pytest.raises(ConfigError):
        SmoteConfig(target_ratio=0.0)
    with pytest.raises(ConfigError):
        SmoteConfig(target_ratio=1.5)
    with pytest.raises(ConfigError):
        SmoteConfig(seed=-1)


def test_smote_reaches_exact_balance():
    x, y = _imbalanced()
    xr, yr = smote(x, y, SmoteConfig(seed=0))
    assert int(np.sum(yr == 1)) == int(np.sum(yr == 0)) == 400
    assert xr.shape == (800, 3)


def test_smote_keeps_originals_first_untouched():
    x, y = _imbalanced()
    xr, yr = smote(x, y, SmoteConfig(seed=0))
    assert np.array_equal(xr[: y.size], x)
    assert np.array_equal(yr[: y.size], y)
    assert np.all(yr[y.size:] == 1)


def test_smote_synthetic_rows_lie_on_minority_segments():
    rng = np.random.default_rng(11)
    k = 5
    x = np.vstack([rng.normal(0.0, 1.0, size=(1_500, 4)),
                   rng.normal(4.0, 1.0, size=(1_000, 4))])
    y = np.concatenate([np.zeros(1_500, dtype=np.int8),
                        np.ones(1_000, dtype=np.int8)])
    xr, yr = smote(x, y, SmoteConfig(k_neighbors=k, seed=2))
    synth = xr[y.size:]
    assert synth.shape[0] == 500

    # independent neighbour table: full distance matrix, self excluded
    minority = x[y == 1]
    m = minority.shape[0]
    d2 = np.sum((minority[:, None, :] - minority[None, :, :]) ** 2, axis=2)
    np.fill_diagonal(d2, np.inf)
    nbrs = np.argsort(d2, axis=1, kind="stable")[:, :k]

    # every admissible segment: anchor i paired with each of its k mates
    anchors = np.repeat(minority, k, axis=0)
    mates = minority[nbrs.ravel()]
    ab = mates - anchors
    denom = np.sum(ab * ab, axis=1)
    denom[denom == 0.0] = 1.0      # degenerate: point segment, u moot

    for s in synth:
        sa = s[None, :] - anchors
        u = np.clip(np.sum(sa * ab, axis=1) / denom, 0.0, 1.0)
        gap = np.linalg.norm(anchors + u[:, None] * ab - s, axis=1)
        assert gap.min() <= 1e-9, \
            "synthetic row off every admissible minority segment"


def test_smote_deterministic():
    x, y = _imbalanced()
    a = smote(x, y, SmoteConfig(seed=9))
    b = smote(x, y, SmoteConfig(seed=9))
    c = smote(x, y, SmoteConfig(seed=10))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    assert not np.array_equal(a[0], c[0])


def test_smote_target_ratio_partial():
    x, y = _imbalanced(n_min=40, n_maj=400)
    xr, yr = smote(x, y, SmoteConfig(target_ratio=0.5, seed=1))
    assert int(np.sum(yr == 1)) == 200


def test_smote_no_new_rows_when_already_balanced():
    x, y = _imbalanced(n_min=100, n_maj=100)
    xr, yr = smote(x, y, SmoteConfig(seed=0))
    assert xr.shape == x.shape
    assert np.array_equal(xr, x) and np.array_equal(yr, y)
    xr[0, 0] = 99.0
    assert x[0, 0] != 99.0     # copies, not views


def test_smote_tie_makes_positive_class_minority():
    # equal counts with target_ratio below 1 must not oversample class 0
    x, y = _imbalanced(n_min=100, n_maj=100)
    xr, yr = smote(x, y, SmoteConfig(target_ratio=0.9, seed=0))
    assert np.array_equal(yr, y)


def test_smote_rejects_k_too_large():
    x, y = _imbalanced(n_min=4, n_maj=50)
    with pytest.raises(ConfigError, match="k_neighbors=5"):
        smote(x, y, SmoteConfig(k_neighbors=5, seed=0))
    out = smote(x, y, SmoteConfig(k_neighbors=3, seed=0))
    assert int(np.sum(out[1] == 1)) == 50


def test_smote_rejects_single_class():
    x = np.zeros((10, 2))
    with pytest.raises(ResampleError):
        smote(x, np.zeros(10, dtype=np.int8), SmoteConfig(seed=0))


def test_smote_rejects_three_classes():
    x = np.zeros((6, 2))
    with pytest.raises(ResampleError):
        smote(x, np.array([0, 1, 2, 0, 1, 2]), SmoteConfig(seed=0))


def test_smote_rejects_non_finite():
    x, y = _imbalanced()
    x[3, 1] = np.nan
    with pytest.raises(ResampleError):
        smote(x, y, SmoteConfig(seed=0))


def test_smote_rejects_shape_mismatch():
    x, y = _imbalanced()
    with pytest.raises(ResampleError):
        smote(x[:-1], y, SmoteConfig(seed=0))


def test_minority_knn_is_symmetric_free_and_sorted_by_distance():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [4.0, 0.0],
                  [0.0, 9.0], [0.0, 9.0], [1.0, 9.0], [1.0, 8.0]])
    y = np.array([1, 1, 1, 0, 0, 0, 0])
    rows, nbrs = minority_knn(x, y, 2)
    assert np.array_equal(rows, [0, 1, 2])
    # row 0: nearest minority is row 1 (d=1) then row 2 (d=4)
    assert nbrs[0].tolist() == [1, 2]
    assert nbrs[1].tolist() == [0, 2]
    assert nbrs[2].tolist() == [1, 0]
    # no row lists itself
    for i in range(3):
        assert i not in nbrs[i]


def test_minority_knn_needs_two_minority_rows():
    x = np.zeros((5, 2))
    y = np.array([0, 0, 0, 0, 1])
    with pytest.raises(ResampleError):
        minority_knn(x, y, 1)
