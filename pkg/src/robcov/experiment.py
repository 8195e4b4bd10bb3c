"""Experiment orchestration: configuration, replicate runs, and artifact
emission (trajectories.csv / detections.csv / summary.txt / snapshots).

Every emitted byte is determined by (config, seed): replicate i draws its
data from the derived seed ``derive_seed(seed, i)`` and each method owns an
independent derived stream, so the result of one method does not depend on
which other methods run alongside it.
"""

import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Tuple

import numpy as np

from .baseline import SampleCovEstimator
from .metrics import (DETECTION_COLUMNS, TRAJECTORY_COLUMNS, OracleDetector,
                      TrajectoryRecorder, frobenius_error)
from .rng import RngStream, derive_seed
from .robust import RobustEstimator
from .simulate import ScenarioParams, sample_array, scenario
from .steps import StepSchedule

KNOWN_METHODS = ("online", "streaming", "naive", "oracle")

# method index -> rng stream lane within a replicate (0 = data stream)
_METHOD_LANES = {"online": 1, "streaming": 2, "naive": 3}


@dataclass
class RunConfig:
    """Validated experiment description; unknown keys are rejected when read
    from a config file, and flags override file values."""

    scenario: Optional[str] = None
    k: Optional[float] = None
    l: Optional[float] = None
    rho1: Optional[float] = None
    d: int = 10
    n: int = 10000
    r: float = 0.05
    rho0: float = 0.3
    seed: int = 0
    replicates: int = 1
    workers: int = 1
    methods: Tuple[str, ...] = ("online", "streaming", "naive", "oracle")
    batch_size: int = 10
    n_init: int = 100
    n_mc: int = 10
    alpha: float = 0.05
    omega: float = 2.0
    loc_c: float = 1.0
    loc_gamma: float = 0.75
    loc_n0: float = 0.0
    rm_c: float = 1.0
    rm_gamma: float = 0.66
    rm_n0: float = 0.0
    dist_c: float = 1.0
    dist_gamma: float = 0.66
    dist_n0: float = 0.0
    checkpoint_every: int = 10
    out_dir: Optional[str] = None
    data: Optional[str] = None

    def validate(self):
        if self.data is None:
            if self.scenario is not None and any(
                    v is not None for v in (self.k, self.l, self.rho1)):
                raise ValueError("give either scenario or explicit k/l/rho1, not both")
            if self.scenario is None and all(
                    v is None for v in (self.k, self.l, self.rho1)) and self.r > 0:
                raise ValueError("contaminated runs need a scenario or explicit k/l/rho1")
        elif self.replicates != 1:
            raise ValueError("external data supports a single replicate")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.data is None and self.n <= self.n_init:
            raise ValueError(f"n={self.n} must exceed n_init={self.n_init}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.replicates < 1 or self.workers < 1:
            raise ValueError("replicates and workers must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        unknown = set(self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ValueError("at least one method required")
        # schedule/range validation is owned by the component constructors
        self.loc_schedule()
        self.rm_schedule()
        self.dist_schedule()
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        return self

    def loc_schedule(self):
        return StepSchedule(self.loc_c, self.loc_gamma, self.loc_n0)

    def rm_schedule(self):
        return StepSchedule(self.rm_c, self.rm_gamma, self.rm_n0)

    def dist_schedule(self):
        return StepSchedule(self.dist_c, self.dist_gamma, self.dist_n0)

    def scenario_params(self) -> ScenarioParams:
        if self.scenario is not None:
            return scenario(self.scenario, d=self.d, r=self.r)
        return ScenarioParams(
            d=self.d, r=self.r,
            k=0.0 if self.k is None else self.k,
            l=1.0 if self.l is None else self.l,
            rho1=self.rho0 if self.rho1 is None else self.rho1,
            rho0=self.rho0)

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name, raw):
    if name not in _FIELD_TYPES:
        raise ValueError(f"unknown config key {name!r}")
    if name == "methods":
        if isinstance(raw, str):
            return tuple(m.strip() for m in raw.split(",") if m.strip())
        return tuple(raw)
    if name in ("scenario", "out_dir", "data"):
        return None if raw in (None, "", "none") else str(raw)
    if name in ("d", "n", "seed", "replicates", "workers", "batch_size",
                "n_init", "n_mc", "checkpoint_every"):
        return int(raw)
    return float(raw)


def load_config_file(path):
    """Parse a ``key = value`` config file (# comments, blank lines allowed)
    into a dict of RunConfig fields; unknown keys raise."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in line.split("=", 1))
            values[key] = _coerce(key, raw)
    return values


def build_config(file_values=None, overrides=None) -> RunConfig:
    """Defaults <- config file <- explicit overrides."""
    merged = {}
    merged.update(file_values or {})
    for key, val in (overrides or {}).items():
        if val is not None:
            merged[key] = _coerce(key, val)
    return RunConfig(**merged).validate()


# --- data ingestion ---------------------------------------------------------


def load_rows(source):
    """Observations from a CSV file (or stdin when source == '-'):
    one row per observation, optional header, optional trailing boolean
    ``label`` column.  Returns (X, labels-or-None)."""
    fh = sys.stdin if source == "-" else open(source)
    try:
        lines = [ln.strip() for ln in fh if ln.strip()]
    finally:
        if source != "-":
            fh.close()
    if not lines:
        raise ValueError(f"no data rows in {source!r}")
    cells = [ln.split(",") for ln in lines]
    has_label = False
    start = 0
    try:
        float(cells[0][0])
    except ValueError:
        header = [c.strip().lower() for c in cells[0]]
        has_label = header[-1] == "label"
        start = 1
    body = cells[start:]
    if not body:
        raise ValueError(f"no data rows in {source!r}")
    width = len(body[0])
    data_cols = width - 1 if has_label else width
    xs = np.array([[float(c) for c in row[:data_cols]] for row in body])
    labels = None
    if has_label:
        labels = np.array([row[-1].strip() in ("1", "true", "True") for row in body])
    return xs, labels


# --- single replicate -------------------------------------------------------


@dataclass
class MethodResult:
    method: str
    final_frob: Optional[float]
    final_log10det: Optional[float]
    counts: Optional[Tuple[int, int, int, int]]  # tp, fp, tn, fn
    trajectory: List[Tuple]
    detections: List[Tuple]
    snapshot: Optional[dict]
    eig_count: int = 0


@dataclass
class ReplicateResult:
    rep_index: int
    methods: Dict[str, MethodResult] = field(default_factory=dict)
    divergence: Optional[float] = None


def _detection_row(method, rec):
    truth = "" if rec.truth is None else int(rec.truth)
    return (method, rec.index, rec.raw_distance, rec.scaled_distance,
            int(rec.is_outlier), truth)


def _build_estimator(method, cfg, x_init, seed_rep):
    lane_rng = RngStream(derive_seed(seed_rep, _METHOD_LANES[method]))
    if method == "naive":
        return SampleCovEstimator.from_batch(x_init, alpha=cfg.alpha,
                                             dist_step=cfg.dist_schedule())
    batch = 1 if method == "online" else cfg.batch_size
    return RobustEstimator.from_batch(
        x_init, batch_size=batch, alpha=cfg.alpha, n_mc=cfg.n_mc,
        omega=cfg.omega, loc_step=cfg.loc_schedule(), rm_step=cfg.rm_schedule(),
        dist_step=cfg.dist_schedule(), rng=lane_rng)


def _run_method(method, cfg, x_init, x_rest, labels_rest, truth_cov, seed_rep):
    have_labels = labels_rest is not None
    record_errors = have_labels and truth_cov is not None
    recorder = TrajectoryRecorder(method, every=cfg.checkpoint_every) if record_errors else None
    detections = []

    def track(est, records, force=False):
        for rec in records:
            if have_labels:
                rec.truth = bool(labels_rest[rec.index - cfg.n_init])
            detections.append(_detection_row(method, rec))
            if recorder is not None:
                recorder.observe(rec)
        if recorder is not None and recorder.due(est.n_obs, force):
            recorder.checkpoint(est.n_obs,
                                frobenius_error(est.covariance(), truth_cov),
                                _log10det(est), force=force)

    est = _build_estimator(method, cfg, x_init, seed_rep)
    if method in ("online", "naive"):
        for row in x_rest:
            track(est, [est.update(row)])
    else:
        s = cfg.batch_size
        for pos in range(0, len(x_rest), s):
            track(est, est.update_block(x_rest[pos:pos + s]))
    track(est, [], force=True)

    final_frob = final_det = None
    counts = None
    if recorder is not None:
        c = recorder.counts
        counts = (c.tp, c.fp, c.tn, c.fn)
        final_frob = recorder.rows[-1][2]
        final_det = recorder.rows[-1][3]
    return MethodResult(method=method, final_frob=final_frob,
                        final_log10det=final_det, counts=counts,
                        trajectory=recorder.rows if recorder else [],
                        detections=detections, snapshot=est.to_snapshot(),
                        eig_count=getattr(est, "eig_count", 0))


def _log10det(est):
    if isinstance(est, RobustEstimator):
        return float(np.sum(np.log10(est.spectrum.average)))
    sign, logdet = np.linalg.slogdet(est.cov)
    return logdet / math.log(10.0) if sign > 0 else float("-inf")


def _run_oracle(cfg, params, x_rest, labels_rest):
    detector = OracleDetector(params.mu0, params.sigma0, alpha=cfg.alpha)
    raw = detector.distances(x_rest)
    verdicts = raw > detector.threshold
    recorder = TrajectoryRecorder("oracle", every=cfg.checkpoint_every)
    detections = []
    sign, logdet = np.linalg.slogdet(params.sigma0)
    log10det = logdet / math.log(10.0)
    for i, (dist, flag) in enumerate(zip(raw, verdicts)):
        index = cfg.n_init + i
        truth = bool(labels_rest[i])
        detections.append(("oracle", index, float(dist), float(dist), int(flag), int(truth)))
        recorder.counts.add(bool(flag), truth)
        recorder.checkpoint(index + 1, 0.0, log10det)
    recorder.checkpoint(cfg.n_init + len(x_rest), 0.0, log10det, force=True)
    c = recorder.counts
    return MethodResult(method="oracle", final_frob=0.0, final_log10det=log10det,
                        counts=(c.tp, c.fp, c.tn, c.fn),
                        trajectory=recorder.rows, detections=detections,
                        snapshot=None)


def run_replicate(cfg: RunConfig, rep_index: int) -> ReplicateResult:
    """One replicate: generate (or load) the stream, initialize every method
    on the first n_init rows, feed the rest, collect artifacts."""
    seed_rep = derive_seed(cfg.seed, rep_index)
    result = ReplicateResult(rep_index=rep_index)

    if cfg.data is not None:
        xs, labels = load_rows(cfg.data)
        params = None
    else:
        params = cfg.scenario_params()
        xs, labels = sample_array(params, cfg.n, RngStream(seed_rep))
        result.divergence = params.divergence() if cfg.r > 0 else 0.0
    if len(xs) <= cfg.n_init:
        raise ValueError(f"stream of {len(xs)} rows does not exceed n_init={cfg.n_init}")

    x_init, x_rest = xs[:cfg.n_init], xs[cfg.n_init:]
    labels_rest = labels[cfg.n_init:] if labels is not None else None
    truth_cov = params.sigma0 if params is not None else None

    for method in cfg.methods:
        if method == "oracle":
            if params is None or labels_rest is None:
                continue
            result.methods["oracle"] = _run_oracle(cfg, params, x_rest, labels_rest)
        else:
            result.methods[method] = _run_method(method, cfg, x_init, x_rest,
                                                 labels_rest, truth_cov, seed_rep)
    return result


# --- artifact emission ------------------------------------------------------


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(path, columns, rows):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_replicate_files(out_dir, rep: ReplicateResult, cfg: RunConfig):
    os.makedirs(out_dir, exist_ok=True)
    traj_rows = []
    det_rows = []
    for method in cfg.methods:
        if method not in rep.methods:
            continue
        mres = rep.methods[method]
        traj_rows.extend(mres.trajectory)
        det_rows.extend(mres.detections)
        if mres.snapshot is not None:
            with open(os.path.join(out_dir, f"snapshot_{method}.json"), "w") as fh:
                json.dump(mres.snapshot, fh)
    if traj_rows:
        write_csv(os.path.join(out_dir, "trajectories.csv"), TRAJECTORY_COLUMNS, traj_rows)
    write_csv(os.path.join(out_dir, "detections.csv"), DETECTION_COLUMNS, det_rows)


def _mean_sd(values):
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def write_summary(path, cfg: RunConfig, reps: List[ReplicateResult]):
    """Aggregate key=value summary over replicates (mean and population sd)."""
    lines = ["# robcov run summary"]
    for f in dataclasses.fields(RunConfig):
        if f.name in ("out_dir", "workers"):
            continue  # execution details; results are a function of (config, seed)
        value = getattr(cfg, f.name)
        if f.name == "methods":
            value = ",".join(value)
        lines.append(f"config.{f.name}={value}")
    divs = [r.divergence for r in reps if r.divergence is not None]
    if divs:
        lines.append(f"scenario.divergence={_fmt(float(divs[0]))}")
    for method in cfg.methods:
        picked = [r.methods[method] for r in reps if method in r.methods]
        if not picked:
            continue
        if picked[0].final_frob is not None:
            for label, values in (
                    ("final_frob", [m.final_frob for m in picked]),
                    ("final_log10det", [m.final_log10det for m in picked])):
                mean, sd = _mean_sd(values)
                lines.append(f"method.{method}.{label}.mean={_fmt(mean)}")
                lines.append(f"method.{method}.{label}.sd={_fmt(sd)}")
        if picked[0].counts is not None:
            tps, fps, tns, fns = zip(*(m.counts for m in picked))
            for label, vals in (("tp", tps), ("fp", fps), ("tn", tns), ("fn", fns)):
                mean, sd = _mean_sd(vals)
                lines.append(f"method.{method}.{label}.mean={_fmt(mean)}")
                lines.append(f"method.{method}.{label}.sd={_fmt(sd)}")
            fp_rates = [fp / max(fp + tn, 1) for _, fp, tn, _ in
                        ((m.counts) for m in picked)]
            fn_rates = [fn / max(fn + tp, 1) for tp, _, _, fn in
                        ((m.counts) for m in picked)]
            for label, vals in (("fp_rate", fp_rates), ("fn_rate", fn_rates)):
                mean, sd = _mean_sd(vals)
                lines.append(f"method.{method}.{label}.mean={_fmt(mean)}")
                lines.append(f"method.{method}.{label}.sd={_fmt(sd)}")
        n_det = [len(m.detections) for m in picked]
        lines.append(f"method.{method}.observations={n_det[0]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _replicate_worker(args):
    cfg, rep_index = args
    return run_replicate(cfg, rep_index)


def run_experiment(cfg: RunConfig):
    """All replicates (optionally in parallel workers), artifacts written
    under cfg.out_dir; returns the replicate results."""
    cfg.validate()
    jobs = [(cfg, i) for i in range(cfg.replicates)]
    if cfg.workers > 1 and cfg.replicates > 1:
        with Pool(processes=min(cfg.workers, cfg.replicates)) as pool:
            reps = pool.map(_replicate_worker, jobs)
    else:
        reps = [run_replicate(cfg, i) for i in range(cfg.replicates)]
    reps.sort(key=lambda r: r.rep_index)

    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        if cfg.replicates == 1:
            _write_replicate_files(cfg.out_dir, reps[0], cfg)
        else:
            for rep in reps:
                _write_replicate_files(os.path.join(cfg.out_dir, f"rep_{rep.rep_index:03d}"),
                                       rep, cfg)
        write_summary(os.path.join(cfg.out_dir, "summary.txt"), cfg, reps)
    return reps
