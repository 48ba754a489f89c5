import json

import numpy as np
import pytest

from pricenoise.errors import EmptyRequestError, ResourceLimitError
from pricenoise.noisegen import (
    MAX_SAMPLES_ENV,
    export_ensemble,
    generate_ensemble,
    generate_noise,
    iter_ensemble,
)
from pricenoise.series import NoiseSpec, read_series_csv


@pytest.mark.parametrize("seed", [0, 7, 2**63 + 5])
def test_rademacher_is_plus_minus_one(seed):
    x = generate_noise(NoiseSpec(1.0, "rademacher", seed), 4, 1.0)
    assert set(x.values.tolist()) <= {-1.0, 1.0}


def test_rademacher_scale():
    x = generate_noise(NoiseSpec(2.0, "rademacher", 1), 100, 0.5)
    assert np.all(np.abs(x.values) == 2.0)


def test_gaussian_variance():
    # tolerance 0.005 > 3 * sqrt(2/n) standard error of the sample variance
    x = generate_noise(NoiseSpec(1.0, "gaussian", 3), 10**6, 1.0)
    assert abs(np.var(x.values) - 1.0) <= 0.005


def test_uniform_variance_and_support():
    x = generate_noise(NoiseSpec(4.0, "uniform", 3), 10**6, 0.25)
    assert np.var(x.values) == pytest.approx(16.0, rel=0.01)
    assert np.max(np.abs(x.values)) <= np.sqrt(3 * 16.0)


@pytest.mark.parametrize("dist", ["gaussian", "uniform", "rademacher"])
def test_zero_mean_pass_rate(dist):
    n0, dt, n = 2.0, 0.5, 4000
    bound = 3 * np.sqrt(n0 / dt) / np.sqrt(n)
    hits = [abs(generate_noise(NoiseSpec(n0, dist, s), n, dt).values.mean()) <= bound
            for s in range(200)]
    assert np.mean(hits) >= 0.99


@pytest.mark.parametrize("dist", ["gaussian", "uniform", "rademacher"])
def test_whiteness_band_rate(dist):
    n = 4096
    band = 1.96 / np.sqrt(n)
    inside = []
    for s in range(50):
        x = generate_noise(NoiseSpec(1.0, dist, s), n, 1.0).values
        x = x - x.mean()
        r0 = np.dot(x, x)
        inside += [abs(np.dot(x[:-k], x[k:]) / r0) <= band for k in range(1, 21)]
    assert 0.92 <= np.mean(inside) <= 0.98


def test_deterministic():
    spec = NoiseSpec(1.0, "gaussian", 11)
    assert generate_noise(spec, 50, 1.0) == generate_noise(spec, 50, 1.0)
    assert generate_noise(spec, 50, 1.0) != generate_noise(NoiseSpec(1.0, "gaussian", 12), 50, 1.0)


def test_empty_request():
    with pytest.raises(EmptyRequestError):
        generate_noise(NoiseSpec(1.0), 0, 1.0)
    with pytest.raises(EmptyRequestError):
        generate_ensemble(NoiseSpec(1.0), 0, 10, 1.0)


def test_ensemble_is_reproducible():
    spec = NoiseSpec(1.0, "uniform", 5)
    assert generate_ensemble(spec, 2, 100, 1.0) == generate_ensemble(spec, 2, 100, 1.0)


def test_single_path_ensemble_matches_noise():
    spec = NoiseSpec(1.0, "gaussian", 5)
    e = generate_ensemble(spec, 1, 100, 0.5)
    assert e.path(0) == generate_noise(spec, 100, 0.5, path=0)


def test_chunks_match_whole_ensemble():
    spec = NoiseSpec(1.0, "rademacher", 9)
    whole = generate_ensemble(spec, 10, 64, 1.0)
    rows = np.vstack([c.matrix for c in iter_ensemble(spec, 10, 64, 1.0, chunk=3)])
    assert np.array_equal(rows, whole.matrix)
    # order independence: path 7 alone
    assert generate_noise(spec, 64, 1.0, path=7) == whole.path(7)


def test_cross_path_independence():
    n = 1000
    e = generate_ensemble(NoiseSpec(1.0, "gaussian", 1), 10_000, n, 1.0)
    r = np.corrcoef(e.matrix[0], e.matrix[1])[0, 1]
    assert abs(r) <= 3 / np.sqrt(n)


def test_resource_cap(monkeypatch):
    monkeypatch.setenv(MAX_SAMPLES_ENV, "1000")
    with pytest.raises(ResourceLimitError, match="cap of 1000"):
        generate_ensemble(NoiseSpec(1.0), 11, 100, 1.0)
    generate_ensemble(NoiseSpec(1.0), 10, 100, 1.0)


def test_export_writes_manifest(tmp_path):
    spec = NoiseSpec(1.5, "uniform", 3)
    e = generate_ensemble(spec, 3, 16, 0.5)
    manifest = json.loads(export_ensemble(tmp_path, e).read_text())
    assert manifest["n0"] == 1.5 and manifest["dist"] == "uniform" and manifest["seed"] == 3
    assert [s["stream"] for s in manifest["streams"]] == [[3, 0], [3, 1], [3, 2]]
    back = read_series_csv(tmp_path / manifest["streams"][2]["file"])
    assert np.array_equal(back.values, e.matrix[2])
