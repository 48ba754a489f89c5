"""White-noise sample functions with reproducible per-path streams.

Path ``i`` of seed ``s`` draws from ``PCG64(SeedSequence(s, spawn_key=(i,)))``.
The stream depends only on ``(s, i)``, so paths can be generated in any
order, in chunks, or in parallel workers and still come out bit-identical.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyRequestError, ResourceLimitError
from .series import Ensemble, NoiseSpec, SampleSeries, write_series_csv

RNG_ID = f"numpy-{np.__version__}:PCG64:SeedSequence(seed,spawn_key=(path,))"

MAX_SAMPLES_ENV = "PRICENOISE_MAX_SAMPLES"
DEFAULT_MAX_SAMPLES = 50_000_000


def max_samples() -> int:
    """Ensemble size cap (paths * samples); override via ``PRICENOISE_MAX_SAMPLES``."""
    raw = os.environ.get(MAX_SAMPLES_ENV)
    if raw is None:
        return DEFAULT_MAX_SAMPLES
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{MAX_SAMPLES_ENV} must be an integer, got {raw!r}") from None
    if cap <= 0:
        raise ConfigError(f"{MAX_SAMPLES_ENV} must be positive, got {cap}")
    return cap


def stream(seed: int, path: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(path,))))


def _draw(spec: NoiseSpec, rng: np.random.Generator, n: int, dt: float) -> np.ndarray:
    sigma = np.sqrt(spec.n0 / dt)
    if spec.dist == "gaussian":
        return sigma * rng.standard_normal(n)
    if spec.dist == "uniform":
        half_width = np.sqrt(3.0) * sigma
        return rng.uniform(-half_width, half_width, n)
    if spec.dist == "rademacher":
        signs = 2.0 * rng.integers(0, 2, n) - 1.0
        return sigma * signs
    raise ConfigError(f"unsupported distribution {spec.dist!r}")


def _check_request(n, dt):
    if n < 1:
        raise EmptyRequestError(f"sample count must be at least 1, got {n}")
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt!r}")


def generate_noise(spec: NoiseSpec, n: int, dt: float, path: int = 0) -> SampleSeries:
    """Draw ``n`` i.i.d. samples of mean 0 and variance ``spec.n0 / dt``.

    Parameters
    ----------
    spec : NoiseSpec
        Intensity, innovation distribution and seed.
    n : int
        Number of samples.
    dt : float
        Grid step; sets the per-sample variance.
    path : int
        Stream index; ``generate_ensemble`` row ``i`` equals ``path=i``.
    """
    _check_request(n, dt)
    return SampleSeries(dt=dt, values=_draw(spec, stream(spec.seed, path), n, dt))


def generate_ensemble(spec: NoiseSpec, paths: int, n: int, dt: float,
                      first_path: int = 0) -> Ensemble:
    """Independent noise paths for stream indices ``first_path .. first_path+paths-1``.

    Raises ResourceLimitError when ``paths * n`` exceeds :func:`max_samples`;
    large studies should iterate over chunks with ``first_path`` instead.
    """
    _check_request(n, dt)
    if paths < 1:
        raise EmptyRequestError(f"path count must be at least 1, got {paths}")
    cap = max_samples()
    if paths * n > cap:
        raise ResourceLimitError(
            f"ensemble of {paths} x {n} = {paths * n} samples exceeds the cap of {cap}; "
            f"generate it in chunks via first_path or raise {MAX_SAMPLES_ENV}")
    matrix = np.empty((paths, n))
    for row in range(paths):
        matrix[row] = _draw(spec, stream(spec.seed, first_path + row), n, dt)
    return Ensemble(spec=spec, dt=dt, matrix=matrix, first_path=first_path)


def iter_ensemble(spec: NoiseSpec, paths: int, n: int, dt: float, chunk: int = 1000):
    """Yield consecutive sub-ensembles that together cover ``paths`` paths."""
    for start in range(0, paths, chunk):
        yield generate_ensemble(spec, min(chunk, paths - start), n, dt, first_path=start)


def manifest(ensemble: Ensemble, kind: str, files) -> dict:
    spec = ensemble.spec
    return {
        "n0": spec.n0,
        "dist": spec.dist,
        "seed": spec.seed,
        "dt": ensemble.dt,
        "samples_per_path": ensemble.n_samples,
        "paths": len(ensemble),
        "kind": kind,
        "rng": RNG_ID,
        "streams": [{"path": i, "stream": [spec.seed, i], "file": name}
                    for i, name in zip(ensemble.stream_ids, files)],
        "notes": "logprice/price paths hold steps+1 samples; sample 0 is y(0)=0 (price 1)",
    }


def export_ensemble(directory, ensemble: Ensemble, kind: str = "noise") -> Path:
    """Write one ``t,value`` CSV per path plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for row, stream_id in enumerate(ensemble.stream_ids):
        name = f"path_{stream_id:05d}.csv"
        write_series_csv(directory / name, ensemble.path(row))
        files.append(name)
    out = directory / "manifest.json"
    info = manifest(ensemble, kind, files)
    out.write_text(json.dumps(info, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out
