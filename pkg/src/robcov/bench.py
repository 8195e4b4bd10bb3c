"""Timing harness: kernel micro-benchmarks across backends and end-to-end
pipeline timings (per method / stream shape), emitted as timings.csv rows.

Backend selection is fixed at import time, so cross-backend pipeline
comparisons run each backend in a subprocess with ROBCOV_BACKEND set; the
kernel micro-benchmarks load both kernel modules directly and stay
in-process.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np

from . import backend
from .baseline import SampleCovEstimator
from .rng import RngStream, derive_seed
from .robust import RobustEstimator
from .simulate import ScenarioParams, sample_array

TIMING_COLUMNS = ("kind", "backend", "method", "n", "d", "batch_size",
                  "wall_seconds", "eig_count", "per_second")


def _row(kind, backend_name, method, n, d, batch_size, wall, eig_count, per_second):
    return (kind, backend_name, method, n, d, batch_size,
            float(wall), int(eig_count), float(per_second))


def time_pipeline(n, d, method, batch_size=None, seed=0, n_init=None, n_mc=10):
    """Initialize and feed one estimator on a clean stream; returns a
    timings row (wall time covers initialization plus all updates)."""
    n_init = n_init if n_init is not None else max(100, d + 1)
    batch_size = batch_size if batch_size is not None else (d if method == "streaming" else 1)
    params = ScenarioParams(d=d, r=0.0)
    xs, _ = sample_array(params, n, RngStream(derive_seed(seed, 0)))
    x_init, x_rest = xs[:n_init], xs[n_init:]

    start = time.perf_counter()
    if method == "naive":
        est = SampleCovEstimator.from_batch(x_init)
        for row_x in x_rest:
            est.update(row_x)
        eig_count = 0
    elif method == "online":
        est = RobustEstimator.from_batch(x_init, batch_size=1, n_mc=n_mc,
                                         rng=RngStream(derive_seed(seed, 1)))
        for row_x in x_rest:
            est.update(row_x)
        eig_count = est.eig_count
    elif method == "streaming":
        est = RobustEstimator.from_batch(x_init, batch_size=batch_size, n_mc=n_mc,
                                         rng=RngStream(derive_seed(seed, 1)))
        for pos in range(0, len(x_rest), batch_size):
            est.update_block(x_rest[pos:pos + batch_size])
        eig_count = est.eig_count
    else:
        raise ValueError(f"unknown method {method!r}")
    wall = time.perf_counter() - start
    return _row("pipeline", backend.ACTIVE, method, n, d,
                batch_size if method == "streaming" else 1,
                wall, eig_count, len(x_rest) / wall if wall > 0 else 0.0)


def time_pipeline_subprocess(backend_name, **kwargs):
    """Run :func:`time_pipeline` under a specific backend in a child process."""
    env = dict(os.environ, ROBCOV_BACKEND=backend_name)
    out = subprocess.run(
        [sys.executable, "-m", "robcov.bench", json.dumps(kwargs)],
        env=env, capture_output=True, text=True, check=True)
    return tuple(json.loads(out.stdout.strip()))


def micro_rows(dims=(10, 50, 100), eig_repeats=20, rm_iters=20000, normal_count=200000):
    """Kernel micro-benchmarks on every importable backend: symmetric
    eigensolver latency, reconstruction-iteration throughput, normal-draw
    throughput."""
    rows = []
    base = np.random.default_rng(0)
    for name in backend.available_backends():
        kern = backend.get_kernels(name)
        for d in dims:
            a = base.standard_normal((d, d))
            a = 0.5 * (a + a.T)
            kern.eigh_descending(a)  # warm up
            start = time.perf_counter()
            for _ in range(eig_repeats):
                kern.eigh_descending(a)
            wall = time.perf_counter() - start
            rows.append(_row("eigh", name, "-", eig_repeats, d, 1, wall,
                             eig_repeats, eig_repeats / wall))
        d = dims[0]
        lam = np.linspace(1.0, 2.0, d)
        avg = lam.copy()
        delta = lam.copy()
        rng = kern.Rng(1)
        start = time.perf_counter()
        kern.rm_iterate(lam, avg, delta, 1.0, 0.66, 0.0, 2.0, 0.0, 0, rm_iters,
                        1e-12, rng)
        wall = time.perf_counter() - start
        rows.append(_row("rm", name, "-", rm_iters, d, 1, wall, 0, rm_iters / wall))
        rng = kern.Rng(2)
        start = time.perf_counter()
        rng.normals(normal_count)
        wall = time.perf_counter() - start
        rows.append(_row("normals", name, "-", normal_count, 1, 1, wall, 0,
                         normal_count / wall))
    return rows


def main(argv=None):
    """Internal entry point: ``python -m robcov.bench '<json kwargs>'`` runs
    one pipeline timing with the backend chosen by ROBCOV_BACKEND and prints
    the row as JSON."""
    argv = sys.argv[1:] if argv is None else argv
    kwargs = json.loads(argv[0])
    print(json.dumps(time_pipeline(**kwargs)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
