"""Seeded experiment runs, neighbor-number sweeps and their reports."""

import csv
import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ncer.errors import InputError, IsolatedVertexError, NcerError
from ncer.graph import SimilarityConfig, build_graph
from ncer.io import load_data, load_labels
from ncer.metrics import accuracy, nmi
from ncer.pipelines import KmeansInit, er_cluster, nc, ncer, nmf_baseline, same_partition

ALGORITHMS = ("ncer", "nc", "nmf", "er", "mer")
RANDOMIZED = ("nc", "nmf")

# field -> accepted JSON types, for the summary document
REPORT_SCHEMA = {
    "algorithm": str,
    "r": int,
    "config": dict,
    "points": int,
    "dropped": list,
    "seconds": float,
    "summaries": list,
    "trials": list,
}
SUMMARY_FIELDS = ("p", "trials", "ac_min", "ac_avg", "ac_max",
                  "nmi_min", "nmi_avg", "nmi_max", "seconds", "diagnostics")
TRIAL_FIELDS = ("p", "trial", "seed", "ac", "nmi", "objective", "seconds", "matches_mer")


def _parse_p(p):
    if p is None or p == "m":
        return p
    return int(p)


@dataclass
class RunConfig:
    algorithm: str
    r: int
    data: str
    p: int | str | None = 5          # int, "m" for all points, None for the full kernel
    b: float = 0.0
    c: int = 1
    seed: int = 0
    trials: int = 1
    sweep: list | None = None        # p values; "m" allowed
    labels: str | None = None
    out: str | None = None
    shift: float = 0.0
    drop_isolated: bool = False
    points_as_rows: bool = False
    compare_mer: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if int(self.trials) < 1:
            raise InputError("trials must be >= 1")
        if int(self.r) < 1:
            raise InputError("r must be >= 1")
        self.p = _parse_p(self.p)
        if self.sweep is not None:
            self.sweep = [_parse_p(v) for v in self.sweep]
            if not self.sweep:
                raise InputError("sweep needs at least one p value")
        for p in self.sweep or [self.p]:
            self.similarity(p, 10**9)

    def similarity(self, p, m):
        """Kernel configuration for neighbor number ``p`` on ``m`` points."""
        if p == "m":
            p = m
        return SimilarityConfig(b=float(self.b), c=int(self.c), p=p)


@dataclass
class RunReport:
    algorithm: str
    r: int
    config: dict
    points: int
    dropped: list = field(default_factory=list)
    seconds: float = 0.0
    summaries: list = field(default_factory=list)
    trials: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def validate_report(doc):
    """Raise ``InputError`` unless ``doc`` has the documented report layout."""
    for name, kind in REPORT_SCHEMA.items():
        if name not in doc:
            raise InputError(f"report lacks field {name!r}")
        if not isinstance(doc[name], kind) and not (kind is float and isinstance(doc[name], int)):
            raise InputError(f"report field {name!r} should be {kind.__name__}")
    for row in doc["summaries"]:
        missing = set(SUMMARY_FIELDS) - set(row)
        if missing:
            raise InputError(f"summary row lacks {sorted(missing)}")
        for key in ("ac", "nmi"):
            lo, avg, hi = row[f"{key}_min"], row[f"{key}_avg"], row[f"{key}_max"]
            if None not in (lo, avg, hi) and not (lo <= avg + 1e-12 and avg <= hi + 1e-12):
                raise InputError(f"{key} summary out of order")
    for row in doc["trials"]:
        missing = set(TRIAL_FIELDS) - set(row)
        if missing:
            raise InputError(f"trial row lacks {sorted(missing)}")
    return doc


def sweep_grid(m, step, start=5):
    """``[start, step, 2 step, ...]`` below ``m``, then ``m``; sorted and unique."""
    if step < 1:
        raise InputError("sweep step must be >= 1")
    grid = {min(start, m), m}
    grid.update(range(step, m, step))
    return sorted(grid)


def trial_seed(seed, trial):
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1)[0])


def _drop_isolated(A, cfg):
    """Remove columns that are isolated in the graph for ``cfg``, repeatedly."""
    keep = np.arange(A.shape[1])
    while True:
        try:
            build_graph(A[:, keep], cfg)
            return keep
        except IsolatedVertexError as exc:
            keep = np.delete(keep, exc.indices)
            if keep.size < 2:
                raise InputError("fewer than two points left after dropping isolated ones") from exc


@contextmanager
def stage(name):
    """Tag any package error raised inside with ``exc.stage = name``."""
    try:
        yield
    except NcerError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name
        raise


def _score(truth, labels):
    if truth is None:
        return None, None
    return accuracy(truth, labels), nmi(truth, labels)


def _stats(values):
    values = [v for v in values if v is not None]
    if not values:
        return None, None, None
    return min(values), float(np.mean(values)), max(values)


def _run_once(cfg, A, p, seed):
    m = A.shape[1]
    algo = cfg.algorithm
    if algo == "ncer":
        return ncer(A, cfg.r, cfg.similarity(p, m))
    if algo == "nc":
        return nc(A, cfg.r, cfg.similarity(p, m), KmeansInit(seed=seed))
    if algo == "nmf":
        rng = np.random.default_rng(seed)
        init_F = rng.uniform(0.0, 1.0, (A.shape[0], cfg.r)) * max(A.max(), 1.0)
        return nmf_baseline(A, cfg.r, init_F)
    return er_cluster(A, cfg.r, algo.upper())


def _jsonable(diag):
    return {k: v for k, v in diag.items() if not isinstance(v, np.ndarray)}


def prepare(cfg):
    """Load data and labels, apply shift and isolated-point dropping.

    Returns ``(A, truth, dropped)``; ``truth`` is ``None`` without labels.
    """
    A = load_data(cfg.data, cfg.points_as_rows)
    if cfg.shift:
        A = A + float(cfg.shift)
    truth = None
    if cfg.labels:
        truth = load_labels(cfg.labels)
        if truth.size != A.shape[1]:
            raise InputError(f"{truth.size} labels for {A.shape[1]} data points")
    dropped = []
    if cfg.drop_isolated and cfg.algorithm in ("ncer", "nc"):
        p = (cfg.sweep or [cfg.p])[0]
        keep = _drop_isolated(A, cfg.similarity(p, A.shape[1]))
        dropped = sorted(set(range(A.shape[1])) - set(keep.tolist()))
        A = A[:, keep]
        if truth is not None:
            truth = truth[keep]
    return A, truth, dropped


def run(cfg, keep_labels=False):
    """Execute ``cfg``; with ``cfg.out`` set, also write the report files.

    Randomized algorithms (nc, nmf) run ``cfg.trials`` times with per-trial
    seeds derived from ``(cfg.seed, trial)``; the others run once per p.
    With ``keep_labels`` the predicted labels of the last trial for each p are
    attached as ``report.labels`` (a dict keyed by p).
    """
    start = time.perf_counter()
    with stage("load"):
        A, truth, dropped = prepare(cfg)
    m = A.shape[1]
    grid = cfg.sweep or [cfg.p]
    n_trials = int(cfg.trials) if cfg.algorithm in RANDOMIZED else 1
    mer_labels = None
    if cfg.compare_mer:
        with stage("mer comparison"):
            mer_labels = er_cluster(A, cfg.r, "MER").labels

    report = RunReport(algorithm=cfg.algorithm, r=int(cfg.r), config=asdict(cfg),
                       points=m, dropped=dropped)
    labels_by_p = {}
    for p in grid:
        p_start = time.perf_counter()
        rows = []
        diagnostics = {}
        for t in range(n_trials):
            seed = trial_seed(cfg.seed, t)
            t0 = time.perf_counter()
            with stage(f"{cfg.algorithm} (p={p}, trial {t})"):
                res = _run_once(cfg, A, p, seed)
            ac, mi = _score(truth, res.labels)
            rows.append({
                "p": p, "trial": t, "seed": seed, "ac": ac, "nmi": mi,
                "objective": float(res.objective),
                "seconds": time.perf_counter() - t0,
                "matches_mer": None if mer_labels is None else same_partition(res.labels, mer_labels),
            })
            diagnostics = _jsonable(res.diagnostics)
            labels_by_p[p] = res.labels
        ac_lo, ac_avg, ac_hi = _stats(r["ac"] for r in rows)
        mi_lo, mi_avg, mi_hi = _stats(r["nmi"] for r in rows)
        report.summaries.append({
            "p": p, "trials": n_trials,
            "ac_min": ac_lo, "ac_avg": ac_avg, "ac_max": ac_hi,
            "nmi_min": mi_lo, "nmi_avg": mi_avg, "nmi_max": mi_hi,
            "seconds": time.perf_counter() - p_start,
            "diagnostics": diagnostics,
        })
        report.trials.extend(rows)
    report.seconds = time.perf_counter() - start
    if keep_labels:
        report.labels = labels_by_p
    if cfg.out:
        write_report(report, cfg.out)
    return report


def trial_log_path(out):
    out = Path(out)
    return out.with_name(out.stem + ".trials.csv")


def write_report(report, out):
    """JSON summary at ``out`` and the per-trial rows next to it as CSV."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = validate_report(report.to_dict())
    out.write_text(json.dumps(doc, indent=2, default=float) + "\n")
    with open(trial_log_path(out), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRIAL_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in report.trials:
            writer.writerow({k: "" if row[k] is None else row[k] for k in TRIAL_FIELDS})
    return out


BRIDGE_TOL = 1e-8


def bridge_passed(check, tol=BRIDGE_TOL):
    return (check["active_equal"] and check["labels_equal"]
            and check["eigen_singular_dev"] <= tol and check["hyperplane_dev"] <= tol)


def bridge_instance(seed):
    """A random nonnegative data set and cluster count for the bridge check."""
    rng = np.random.default_rng([int(seed), 1])
    d = int(rng.integers(4, 15))
    m = int(rng.integers(20, 80))
    r = int(rng.integers(2, 5))
    return rng.uniform(0.0, 1.0, (d, m)), r


def bridge_suite(instances=30, seed=0):
    """Run ``verify_bridge`` on seeded random data; one result dict per instance."""
    from ncer.pipelines import verify_bridge

    results = []
    for k in range(int(instances)):
        A, r = bridge_instance(trial_seed(seed, k))
        check = verify_bridge(A, r)
        check.update(instance=k, shape=list(A.shape), r=r, passed=bridge_passed(check))
        results.append(check)
    return results
