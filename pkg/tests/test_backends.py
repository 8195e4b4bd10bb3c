"""Cross-backend agreement: the compiled kernels must match the pure-Python
fallback (exactly for the generator, to solver accuracy elsewhere)."""

import numpy as np
import pytest

from robcov import backend
from conftest import random_symmetric

pytestmark = pytest.mark.skipif(len(backend.available_backends()) < 2,
                                reason="compiled backend not built")


@pytest.fixture(scope="module")
def both():
    return backend.get_kernels("python"), backend.get_kernels("compiled")


def test_eigh_agreement_random(both, np_rng):
    pk, ck = both
    for d in (2, 5, 10, 30):
        a = random_symmetric(np_rng, d)
        wp, vp = pk.eigh_descending(a)
        wc, vc = ck.eigh_descending(a)
        assert np.max(np.abs(wp - wc)) < 1e-10 * max(np.abs(wp).max(), 1.0)
        assert np.max(np.abs(vp - vc)) < 1e-8


def test_eigh_contract_on_degenerate_spectra(both):
    pk, ck = both
    cases = [np.eye(4),
             np.diag([3.0, 3.0, 1.0, 1.0]),
             np.zeros((3, 3)),
             np.diag([1.0, 1.0 + 1e-14, 2.0])]
    for a in cases:
        for kern in (pk, ck):
            w, v = kern.eigh_descending(a)
            assert np.all(np.diff(w) <= 1e-12)
            assert np.max(np.abs(v.T @ v - np.eye(len(a)))) < 1e-10
            assert np.max(np.abs((v * w) @ v.T - a)) < 1e-10
            lead = np.argmax(np.abs(v), axis=0)
            assert np.all(v[lead, np.arange(len(a))] >= 0)


def test_jacobi_handles_large_dimension(both, np_rng):
    _, ck = both
    a = random_symmetric(np_rng, 100)
    w, v = ck.eigh_descending(a)
    assert np.max(np.abs((v * w) @ v.T - a)) <= 1e-8 * np.linalg.norm(a)
    assert np.max(np.abs(v.T @ v - np.eye(100))) < 1e-10


def test_rm_iterate_agreement(both):
    pk, ck = both
    lam0 = np.linspace(0.5, 2.5, 12)
    delta = 0.45 * lam0
    results = []
    for kern in (pk, ck):
        lam, avg = lam0.copy(), lam0.copy()
        wsum = kern.rm_iterate(lam, avg, delta, 1.0, 0.66, 0.0, 2.0, 0.0, 0,
                               30000, 1e-12, kern.Rng(41))
        results.append((lam, avg, wsum))
    (lp, ap, wp), (lc, ac, wc) = results
    assert np.max(np.abs(lp - lc)) < 1e-10
    assert np.max(np.abs(ap - ac)) < 1e-10
    assert wp == pytest.approx(wc, rel=1e-12)


def test_full_pipeline_agreement(tmp_path):
    # end to end under each backend in a subprocess (backend choice is
    # import-time); final covariances agree to solver accuracy and the
    # detection counts match
    import json
    import os
    import subprocess
    import sys

    script = tmp_path / "probe.py"
    script.write_text(
        "import json, sys\n"
        "import numpy as np\n"
        "from robcov import RobustEstimator, RngStream, scenario, sample_array\n"
        "params = scenario('A', d=6, r=0.1)\n"
        "xs, labels = sample_array(params, 1200, RngStream(3))\n"
        "est = RobustEstimator.from_batch(xs[:100], rng=RngStream(4))\n"
        "flags = [est.update(x).is_outlier for x in xs[100:]]\n"
        "print(json.dumps({'cov': est.covariance().tolist(),"
        " 'flags': int(sum(flags))}))\n")
    outputs = {}
    for name in ("python", "compiled"):
        env = dict(os.environ, ROBCOV_BACKEND=name)
        res = subprocess.run([sys.executable, str(script)], env=env,
                             capture_output=True, text=True, check=True)
        outputs[name] = json.loads(res.stdout)
    cov_p = np.array(outputs["python"]["cov"])
    cov_c = np.array(outputs["compiled"]["cov"])
    assert np.linalg.norm(cov_p - cov_c) <= 1e-6 * np.linalg.norm(cov_p)
    assert abs(outputs["python"]["flags"] - outputs["compiled"]["flags"]) <= 2


def test_backend_env_override(tmp_path):
    import os
    import subprocess
    import sys

    for name in ("python", "compiled"):
        env = dict(os.environ, ROBCOV_BACKEND=name)
        res = subprocess.run(
            [sys.executable, "-c", "import robcov; print(robcov.active_backend)"],
            env=env, capture_output=True, text=True, check=True)
        assert res.stdout.strip() == name


def test_micro_benchmark_rows_cover_backends():
    from robcov.bench import micro_rows
    rows = micro_rows(dims=(6,), eig_repeats=3, rm_iters=500, normal_count=2000)
    backends = {row[1] for row in rows}
    assert backends == {"python", "compiled"}
    kinds = {row[0] for row in rows}
    assert kinds == {"eigh", "rm", "normals"}


def test_bench_subprocess_backend_comparison():
    from robcov.bench import time_pipeline_subprocess
    row = time_pipeline_subprocess("python", n=250, d=3, method="streaming",
                                   batch_size=10, seed=1, n_init=50)
    assert row[0] == "pipeline" and row[1] == "python"
    assert row[7] == 20 + 1  # one eigendecomposition per block plus init
